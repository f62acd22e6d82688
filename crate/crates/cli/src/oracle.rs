//! Slow reference implementations used to cross-check the core crate.
//!
//! Nothing here shares code with the fast paths: fronts are peeled by
//! exhaustive pairwise checks, and losses are rebuilt from scalar forward
//! passes with finite-difference derivatives.

use nsga_pinn_core::problems::{BurgersProblem, PendulumProblem};
use nsga_pinn_core::{Mlp, ParameterVector, ProblemSpec};

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// 1-based front rank of every row, found by repeatedly removing the
/// members no remaining member dominates.
pub fn brute_force_ranks(objectives: &[Vec<f64>]) -> Vec<usize> {
    let n = objectives.len();
    let mut rank = vec![0usize; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut r = 1;
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| {
                !remaining
                    .iter()
                    .any(|&j| dominates(&objectives[j], &objectives[i]))
            })
            .collect();
        for &i in &front {
            rank[i] = r;
        }
        remaining.retain(|i| !front.contains(i));
        r += 1;
    }
    rank
}

/// Crowding distance of the rows in `front`; neighbours are ordered by
/// value, then by label.
pub fn brute_force_crowding(objectives: &[Vec<f64>], labels: &[u64], front: &[usize]) -> Vec<f64> {
    let size = front.len();
    if size <= 2 {
        return vec![f64::INFINITY; size];
    }
    let mut dist = vec![0.0; size];
    for k in 0..objectives[front[0]].len() {
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| {
            let (ia, ib) = (front[a], front[b]);
            objectives[ia][k]
                .partial_cmp(&objectives[ib][k])
                .expect("finite objectives")
                .then(labels[ia].cmp(&labels[ib]))
        });
        let val = |pos: usize| objectives[front[order[pos]]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[size - 1]] = f64::INFINITY;
        let range = val(size - 1) - val(0);
        if range <= 0.0 {
            continue;
        }
        for pos in 1..size - 1 {
            dist[order[pos]] += (val(pos + 1) - val(pos - 1)) / range;
        }
    }
    dist
}

/// Labels of the `n` survivors of `2n` candidates under rank-then-crowding
/// truncation, sorted ascending.
pub fn brute_force_environmental(objectives: &[Vec<f64>], labels: &[u64], n: usize) -> Vec<u64> {
    let rank = brute_force_ranks(objectives);
    let max_rank = rank.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(n);
    for r in 1..=max_rank {
        let front: Vec<usize> = (0..objectives.len()).filter(|&i| rank[i] == r).collect();
        if out.len() + front.len() <= n {
            out.extend(front.iter().map(|&i| labels[i]));
            continue;
        }
        let crowd = brute_force_crowding(objectives, labels, &front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            crowd[b]
                .partial_cmp(&crowd[a])
                .expect("crowding is never NaN")
                .then(labels[front[a]].cmp(&labels[front[b]]))
        });
        let room = n - out.len();
        out.extend(order.into_iter().take(room).map(|p| labels[front[p]]));
        break;
    }
    out.sort_unstable();
    out
}

const H1: f64 = 1e-5;
const H2: f64 = 1e-4;

fn eval(mlp: &Mlp, params: &ParameterVector, x: &[f64]) -> Vec<f64> {
    mlp.forward(params, x).expect("input matches network")
}

/// Central differences `(∂/∂x_i, ∂²/∂x_i²)` of every output at `x`.
fn derivatives(
    mlp: &Mlp,
    params: &ParameterVector,
    x: &[f64],
    i: usize,
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    let (fp, f0, fm) = (
        eval(mlp, params, &xp),
        eval(mlp, params, x),
        eval(mlp, params, &xm),
    );
    let d1 = fp
        .iter()
        .zip(&fm)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    let d2 = fp
        .iter()
        .zip(&f0)
        .zip(&fm)
        .map(|((a, c), b)| (a - 2.0 * c + b) / (h * h))
        .collect();
    (d1, d2)
}

fn mean_sq_error(mlp: &Mlp, params: &ParameterVector, inputs: &[f64], targets: &[f64]) -> f64 {
    let d = mlp.input_dim();
    let rows = inputs.len() / d;
    let mut s = 0.0;
    for (x, t) in inputs
        .chunks_exact(d)
        .zip(targets.chunks_exact(mlp.output_dim()))
    {
        s += eval(mlp, params, x)
            .iter()
            .zip(t)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    s / rows as f64
}

fn pendulum_losses(p: &PendulumProblem, mlp: &Mlp, params: &ParameterVector) -> [f64; 3] {
    let k = params.extras()[0];
    let rows = p.collocation().len() / 3;
    let mut res = 0.0;
    for x in p.collocation().chunks_exact(3) {
        let out = eval(mlp, params, x);
        let (d1, _) = derivatives(mlp, params, x, 2, H1);
        let r1 = d1[0] - out[1];
        let r2 = d1[1] + k * out[0].sin();
        res += r1 * r1 + r2 * r2;
    }
    let ic_inputs: Vec<f64> = p
        .ic_targets()
        .chunks_exact(2)
        .flat_map(|c| [c[0], c[1], 0.0])
        .collect();
    let initial = mean_sq_error(mlp, params, &ic_inputs, p.ic_targets());
    let [a, b] = p.data_ic();
    let data_inputs: Vec<f64> = p.data_times().iter().flat_map(|&t| [a, b, t]).collect();
    let data = mean_sq_error(mlp, params, &data_inputs, p.data());
    [res / rows as f64, initial, data]
}

fn burgers_losses(p: &BurgersProblem, mlp: &Mlp, params: &ParameterVector) -> [f64; 3] {
    let nu = p.settings().viscosity;
    let rows = p.collocation().len() / 2;
    let mut res = 0.0;
    for x in p.collocation().chunks_exact(2) {
        let u = eval(mlp, params, x)[0];
        let (ut, _) = derivatives(mlp, params, x, 0, H1);
        let (ux, _) = derivatives(mlp, params, x, 1, H1);
        let (_, uxx) = derivatives(mlp, params, x, 1, H2);
        let r = ut[0] + u * ux[0] - nu * uxx[0];
        res += r * r;
    }
    let zeros = vec![0.0; p.boundary().len() / 2];
    let boundary = mean_sq_error(mlp, params, p.boundary(), &zeros);
    let initial = mean_sq_error(mlp, params, p.initial(), p.initial_targets());
    [res / rows as f64, boundary, initial]
}

/// The three loss components in the problem's objective order.
pub fn loss_oracle(problem: &ProblemSpec, params: &ParameterVector) -> [f64; 3] {
    match problem {
        ProblemSpec::Pendulum(p) => {
            pendulum_losses(p, nsga_pinn_core::problems::PinnProblem::mlp(p), params)
        }
        ProblemSpec::Burgers(b) => {
            burgers_losses(b, nsga_pinn_core::problems::PinnProblem::mlp(b), params)
        }
    }
}
