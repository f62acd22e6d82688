//! Reverse-mode automatic differentiation over dense row-major matrices.
//!
//! Operations are recorded on a [`Tape`] as they execute; [`Tape::backward`]
//! then sweeps the records in reverse and accumulates adjoints. Nodes are
//! whole matrices (a batch of sample points times a layer width), so a
//! network evaluation costs a handful of records per layer instead of one
//! per scalar.
//!
//! Forward-mode jets of the network are expressed with the same operations,
//! so gradients of derivative-containing losses come out exact
//! (reverse-over-forward).

use alloc::vec;
use alloc::vec::Vec;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    Slice { src: usize, offset: usize },
    MatMul(usize, usize),
    AddRow(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    MulScalar(usize, usize),
    Scale(usize, f64),
    Tanh(usize),
    OneMinusSquare(usize),
    Square(usize),
    Sin(usize),
    Column(usize, usize),
    Sum(usize),
}

#[derive(Debug)]
struct Node {
    value: Vec<f64>,
    rows: usize,
    cols: usize,
    op: Op,
    needs_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Vec<f64>>,
    lens: Vec<usize>,
}

impl Gradients {
    /// Adjoint of `var`; zeros when the root does not depend on it.
    pub fn get(&self, var: Var) -> Vec<f64> {
        let g = &self.grads[var.0];
        if g.is_empty() {
            vec![0.0; self.lens[var.0]]
        } else {
            g.clone()
        }
    }

    /// Moves the adjoint of `var` out without copying.
    pub fn take(&mut self, var: Var) -> Vec<f64> {
        let g = core::mem::take(&mut self.grads[var.0]);
        if g.is_empty() {
            vec![0.0; self.lens[var.0]]
        } else {
            g
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Vec<f64>, rows: usize, cols: usize, op: Op, needs_grad: bool) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node {
            value,
            rows,
            cols,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn node(&self, v: Var) -> &Node {
        &self.nodes[v.0]
    }

    fn grad_of(&self, a: Var) -> bool {
        self.nodes[a.0].needs_grad
    }

    /// A differentiable input.
    pub fn variable(&mut self, value: Vec<f64>, rows: usize, cols: usize) -> Var {
        assert_eq!(value.len(), rows * cols, "leaf shape mismatch");
        self.push(value, rows, cols, Op::Leaf, true)
    }

    /// A constant input; no adjoint is propagated into it.
    pub fn constant(&mut self, value: Vec<f64>, rows: usize, cols: usize) -> Var {
        assert_eq!(value.len(), rows * cols, "constant shape mismatch");
        self.push(value, rows, cols, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.node(v).value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = self.node(v);
        (n.rows, n.cols)
    }

    /// Value of a 1x1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        let n = self.node(v);
        assert_eq!(n.value.len(), 1, "scalar() on non-scalar node");
        n.value[0]
    }

    /// Reinterprets `len = rows * cols` consecutive entries of `src`
    /// starting at `offset` as a `rows x cols` matrix.
    pub fn slice(&mut self, src: Var, offset: usize, rows: usize, cols: usize) -> Var {
        let n = self.node(src);
        assert!(offset + rows * cols <= n.value.len(), "slice out of range");
        let value = n.value[offset..offset + rows * cols].to_vec();
        let g = n.needs_grad;
        self.push(value, rows, cols, Op::Slice { src: src.0, offset }, g)
    }

    /// Matrix product `a (r x k) * b (k x c)`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (r, k) = self.shape(a);
        let (k2, c) = self.shape(b);
        assert_eq!(k, k2, "matmul inner dimension mismatch");
        let av = &self.node(a).value;
        let bv = &self.node(b).value;
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let row = &mut out[i * c..(i + 1) * c];
            for p in 0..k {
                let x = av[i * k + p];
                if x == 0.0 {
                    continue;
                }
                let brow = &bv[p * c..(p + 1) * c];
                for (o, w) in row.iter_mut().zip(brow) {
                    *o += x * w;
                }
            }
        }
        let g = self.grad_of(a) || self.grad_of(b);
        self.push(out, r, c, Op::MatMul(a.0, b.0), g)
    }

    /// Adds the `1 x c` row vector `row` to every row of `m`.
    pub fn add_row(&mut self, m: Var, row: Var) -> Var {
        let (r, c) = self.shape(m);
        assert_eq!(self.shape(row), (1, c), "add_row shape mismatch");
        let rv = &self.node(row).value;
        let mut out = self.node(m).value.clone();
        for chunk in out.chunks_exact_mut(c) {
            for (o, b) in chunk.iter_mut().zip(rv) {
                *o += b;
            }
        }
        let g = self.grad_of(m) || self.grad_of(row);
        self.push(out, r, c, Op::AddRow(m.0, row.0), g)
    }

    fn zip_with(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f64, f64) -> f64) -> Var {
        let (r, c) = self.shape(a);
        assert_eq!((r, c), self.shape(b), "elementwise shape mismatch");
        let out = self
            .node(a)
            .value
            .iter()
            .zip(&self.node(b).value)
            .map(|(x, y)| f(*x, *y))
            .collect();
        let g = self.grad_of(a) || self.grad_of(b);
        self.push(out, r, c, op, g)
    }

    fn map(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let (r, c) = self.shape(a);
        let out = self.node(a).value.iter().map(|x| f(*x)).collect();
        let g = self.grad_of(a);
        self.push(out, r, c, op, g)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, Op::Add(a.0, b.0), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, Op::Sub(a.0, b.0), |x, y| x - y)
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, Op::Mul(a.0, b.0), |x, y| x * y)
    }

    /// Multiplies every entry of `m` by the 1x1 node `s`.
    pub fn mul_scalar(&mut self, m: Var, s: Var) -> Var {
        assert_eq!(self.shape(s), (1, 1), "mul_scalar expects a 1x1 factor");
        let k = self.node(s).value[0];
        let (r, c) = self.shape(m);
        let out = self.node(m).value.iter().map(|x| x * k).collect();
        let g = self.grad_of(m) || self.grad_of(s);
        self.push(out, r, c, Op::MulScalar(m.0, s.0), g)
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        self.map(a, Op::Scale(a.0, k), |x| x * k)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, Op::Tanh(a.0), libm::tanh)
    }

    /// `1 - x²`, the derivative of tanh expressed through its output.
    pub fn one_minus_square(&mut self, a: Var) -> Var {
        self.map(a, Op::OneMinusSquare(a.0), |x| 1.0 - x * x)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.map(a, Op::Square(a.0), |x| x * x)
    }

    pub fn sin(&mut self, a: Var) -> Var {
        self.map(a, Op::Sin(a.0), libm::sin)
    }

    /// Column `j` of `a` as an `r x 1` matrix.
    pub fn column(&mut self, a: Var, j: usize) -> Var {
        let (r, c) = self.shape(a);
        assert!(j < c, "column index out of range");
        let v = &self.node(a).value;
        let out = (0..r).map(|i| v[i * c + j]).collect();
        let g = self.grad_of(a);
        self.push(out, r, 1, Op::Column(a.0, j), g)
    }

    /// Sum of all entries as a 1x1 node.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.node(a).value.iter().sum();
        let g = self.grad_of(a);
        self.push(vec![s], 1, 1, Op::Sum(a.0), g)
    }

    /// Mean of all entries as a 1x1 node.
    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.node(a).value.len();
        let s = self.sum(a);
        self.scale(s, 1.0 / n as f64)
    }

    /// Propagates adjoints from the 1x1 node `root` back to every node that
    /// needs a gradient.
    pub fn backward(&self, root: Var) -> Gradients {
        assert_eq!(self.shape(root), (1, 1), "backward root must be 1x1");
        let n = self.nodes.len();
        let mut grads: Vec<Vec<f64>> = (0..n).map(|_| Vec::new()).collect();
        let lens = self.nodes.iter().map(|nd| nd.value.len()).collect();
        grads[root.0] = vec![1.0];

        for i in (0..=root.0).rev() {
            if grads[i].is_empty() {
                continue;
            }
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let g = core::mem::take(&mut grads[i]);
            match node.op {
                Op::Leaf => {
                    grads[i] = g;
                    continue;
                }
                Op::Slice { src, offset } => {
                    if let Some(d) = self.acc(&mut grads, src) {
                        for (x, y) in d[offset..offset + g.len()].iter_mut().zip(&g) {
                            *x += y;
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    let (r, k) = (self.nodes[a].rows, self.nodes[a].cols);
                    let c = self.nodes[b].cols;
                    let av = &self.nodes[a].value;
                    let bv = &self.nodes[b].value;
                    if let Some(da) = self.acc(&mut grads, a) {
                        // dA = G * B^T
                        for row in 0..r {
                            let grow = &g[row * c..(row + 1) * c];
                            for p in 0..k {
                                let brow = &bv[p * c..(p + 1) * c];
                                let dot: f64 = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
                                da[row * k + p] += dot;
                            }
                        }
                    }
                    if let Some(db) = self.acc(&mut grads, b) {
                        // dB = A^T * G
                        for row in 0..r {
                            let grow = &g[row * c..(row + 1) * c];
                            for p in 0..k {
                                let x = av[row * k + p];
                                if x == 0.0 {
                                    continue;
                                }
                                for (d, y) in db[p * c..(p + 1) * c].iter_mut().zip(grow) {
                                    *d += x * y;
                                }
                            }
                        }
                    }
                }
                Op::AddRow(m, row) => {
                    let c = self.nodes[m].cols;
                    if let Some(dm) = self.acc(&mut grads, m) {
                        for (x, y) in dm.iter_mut().zip(&g) {
                            *x += y;
                        }
                    }
                    if let Some(dr) = self.acc(&mut grads, row) {
                        for chunk in g.chunks_exact(c) {
                            for (x, y) in dr.iter_mut().zip(chunk) {
                                *x += y;
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    if let Some(da) = self.acc(&mut grads, a) {
                        for (x, y) in da.iter_mut().zip(&g) {
                            *x += y;
                        }
                    }
                    if let Some(db) = self.acc(&mut grads, b) {
                        for (x, y) in db.iter_mut().zip(&g) {
                            *x += y;
                        }
                    }
                }
                Op::Sub(a, b) => {
                    if let Some(da) = self.acc(&mut grads, a) {
                        for (x, y) in da.iter_mut().zip(&g) {
                            *x += y;
                        }
                    }
                    if let Some(db) = self.acc(&mut grads, b) {
                        for (x, y) in db.iter_mut().zip(&g) {
                            *x -= y;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let bv = &self.nodes[b].value;
                    if let Some(da) = self.acc(&mut grads, a) {
                        for ((x, y), w) in da.iter_mut().zip(&g).zip(bv) {
                            *x += y * w;
                        }
                    }
                    let av = &self.nodes[a].value;
                    if let Some(db) = self.acc(&mut grads, b) {
                        for ((x, y), w) in db.iter_mut().zip(&g).zip(av) {
                            *x += y * w;
                        }
                    }
                }
                Op::MulScalar(m, s) => {
                    let k = self.nodes[s].value[0];
                    let mv = &self.nodes[m].value;
                    if let Some(dm) = self.acc(&mut grads, m) {
                        for (x, y) in dm.iter_mut().zip(&g) {
                            *x += y * k;
                        }
                    }
                    if let Some(ds) = self.acc(&mut grads, s) {
                        ds[0] += g.iter().zip(mv).map(|(y, w)| y * w).sum::<f64>();
                    }
                }
                Op::Scale(a, k) => {
                    if let Some(da) = self.acc(&mut grads, a) {
                        for (x, y) in da.iter_mut().zip(&g) {
                            *x += y * k;
                        }
                    }
                }
                Op::Tanh(a) => {
                    let out = &node.value;
                    if let Some(da) = self.acc(&mut grads, a) {
                        for ((x, y), t) in da.iter_mut().zip(&g).zip(out) {
                            *x += y * (1.0 - t * t);
                        }
                    }
                }
                Op::OneMinusSquare(a) => {
                    let av = &self.nodes[a].value;
                    if let Some(da) = self.acc(&mut grads, a) {
                        for ((x, y), v) in da.iter_mut().zip(&g).zip(av) {
                            *x -= 2.0 * y * v;
                        }
                    }
                }
                Op::Square(a) => {
                    let av = &self.nodes[a].value;
                    if let Some(da) = self.acc(&mut grads, a) {
                        for ((x, y), v) in da.iter_mut().zip(&g).zip(av) {
                            *x += 2.0 * y * v;
                        }
                    }
                }
                Op::Sin(a) => {
                    let av = &self.nodes[a].value;
                    if let Some(da) = self.acc(&mut grads, a) {
                        for ((x, y), v) in da.iter_mut().zip(&g).zip(av) {
                            *x += y * libm::cos(*v);
                        }
                    }
                }
                Op::Column(a, j) => {
                    let c = self.nodes[a].cols;
                    if let Some(da) = self.acc(&mut grads, a) {
                        for (i, y) in g.iter().enumerate() {
                            da[i * c + j] += y;
                        }
                    }
                }
                Op::Sum(a) => {
                    let s = g[0];
                    if let Some(da) = self.acc(&mut grads, a) {
                        for x in da.iter_mut() {
                            *x += s;
                        }
                    }
                }
            }
        }
        Gradients { grads, lens }
    }

    /// Adjoint buffer of node `idx`, allocated on first use; `None` when the
    /// node does not need a gradient.
    fn acc<'g>(&self, grads: &'g mut [Vec<f64>], idx: usize) -> Option<&'g mut [f64]> {
        let node = &self.nodes[idx];
        if !node.needs_grad {
            return None;
        }
        let slot = &mut grads[idx];
        if slot.is_empty() {
            *slot = vec![0.0; node.value.len()];
        }
        Some(slot.as_mut_slice())
    }
}
