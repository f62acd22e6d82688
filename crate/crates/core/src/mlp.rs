//! Dense tanh multilayer perceptrons over a flat parameter vector.
//!
//! Layer `l` occupies `fan_in * fan_out` weights stored row-major as
//! `W[i][o]` (input-major) followed by `fan_out` biases. Problem-specific
//! scalars (the pendulum's stiffness estimate) are appended after the last
//! layer.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::Jet2;
use crate::tape::{Tape, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutodiffError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("seed coordinate {seed} out of range for input dimension {input_dim}")]
    SeedOutOfRange { seed: usize, input_dim: usize },
    #[error("non-finite loss value {0}")]
    NonFiniteLoss(f64),
    #[error("invalid network configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Hidden-layer activation; the output layer is always linear.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
}

impl MlpConfig {
    pub fn new(input_dim: usize, hidden_layers: Vec<usize>, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            hidden_layers,
            activation: Activation::Tanh,
        }
    }

    pub fn validate(&self) -> Result<(), AutodiffError> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(AutodiffError::InvalidConfig(
                "input and output dimensions must be positive",
            ));
        }
        if self.hidden_layers.is_empty() {
            return Err(AutodiffError::InvalidConfig(
                "hidden_layers must be non-empty",
            ));
        }
        if self.hidden_layers.contains(&0) {
            return Err(AutodiffError::InvalidConfig(
                "hidden layer widths must be positive",
            ));
        }
        Ok(())
    }

    /// Consecutive `(fan_in, fan_out)` pairs, hidden layers then output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_layers);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| (i + 1) * o).sum()
    }
}

/// All trainable scalars of one PINN: network weights and biases followed by
/// `extra_scalars` problem parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub values: Vec<f64>,
    pub extra_scalars: usize,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>, extra_scalars: usize) -> Self {
        Self {
            values,
            extra_scalars,
        }
    }

    pub fn zeros(config: &MlpConfig, extra_scalars: usize) -> Self {
        Self::new(
            vec![0.0; config.parameter_count() + extra_scalars],
            extra_scalars,
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Network part (weights and biases).
    pub fn network(&self) -> &[f64] {
        &self.values[..self.values.len() - self.extra_scalars]
    }

    pub fn extras(&self) -> &[f64] {
        &self.values[self.values.len() - self.extra_scalars..]
    }

    pub fn extras_mut(&mut self) -> &mut [f64] {
        let n = self.values.len();
        &mut self.values[n - self.extra_scalars..]
    }
}

/// One dense layer, unflattened.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Row-major `fan_in x fan_out`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// A network architecture with its precomputed parameter layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    config: MlpConfig,
    shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    count: usize,
}

impl Mlp {
    pub fn new(config: MlpConfig) -> Result<Self, AutodiffError> {
        config.validate()?;
        let shapes = config.layer_shapes();
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut at = 0;
        for (i, o) in &shapes {
            offsets.push(at);
            at += (i + 1) * o;
        }
        Ok(Self {
            config,
            shapes,
            offsets,
            count: at,
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn parameter_count(&self) -> usize {
        self.count
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim
    }

    fn check_params(&self, params: &ParameterVector) -> Result<(), AutodiffError> {
        let expected = self.count + params.extra_scalars;
        if params.values.len() != expected || params.values.len() < params.extra_scalars {
            return Err(AutodiffError::DimensionMismatch {
                expected,
                actual: params.values.len(),
            });
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<(), AutodiffError> {
        if input.len() != self.config.input_dim {
            return Err(AutodiffError::DimensionMismatch {
                expected: self.config.input_dim,
                actual: input.len(),
            });
        }
        Ok(())
    }

    /// Glorot-uniform weights, zero biases, extras set to `extras`.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R, extras: &[f64]) -> ParameterVector {
        let mut values = Vec::with_capacity(self.count + extras.len());
        for &(fan_in, fan_out) in &self.shapes {
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            for _ in 0..fan_in * fan_out {
                values.push(rng.random_range(-limit..limit));
            }
            values.extend(core::iter::repeat_n(0.0, fan_out));
        }
        values.extend_from_slice(extras);
        ParameterVector::new(values, extras.len())
    }

    pub fn unflatten(&self, params: &ParameterVector) -> Result<Vec<DenseLayer>, AutodiffError> {
        self.check_params(params)?;
        Ok(self
            .shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(fan_in, fan_out), &off)| {
                let w_end = off + fan_in * fan_out;
                DenseLayer {
                    fan_in,
                    fan_out,
                    weights: params.values[off..w_end].to_vec(),
                    bias: params.values[w_end..w_end + fan_out].to_vec(),
                }
            })
            .collect())
    }

    pub fn flatten(
        &self,
        layers: &[DenseLayer],
        extras: &[f64],
    ) -> Result<ParameterVector, AutodiffError> {
        if layers.len() != self.shapes.len() {
            return Err(AutodiffError::DimensionMismatch {
                expected: self.shapes.len(),
                actual: layers.len(),
            });
        }
        let mut values = Vec::with_capacity(self.count + extras.len());
        for (layer, &(fan_in, fan_out)) in layers.iter().zip(&self.shapes) {
            if layer.weights.len() != fan_in * fan_out || layer.bias.len() != fan_out {
                return Err(AutodiffError::DimensionMismatch {
                    expected: (fan_in + 1) * fan_out,
                    actual: layer.weights.len() + layer.bias.len(),
                });
            }
            values.extend_from_slice(&layer.weights);
            values.extend_from_slice(&layer.bias);
        }
        values.extend_from_slice(extras);
        Ok(ParameterVector::new(values, extras.len()))
    }

    /// Evaluates the network at one input point.
    pub fn forward(
        &self,
        params: &ParameterVector,
        input: &[f64],
    ) -> Result<Vec<f64>, AutodiffError> {
        self.check_params(params)?;
        self.check_input(input)?;
        let p = &params.values;
        let last = self.shapes.len() - 1;
        let mut act = input.to_vec();
        for (l, (&(fan_in, fan_out), &off)) in self.shapes.iter().zip(&self.offsets).enumerate() {
            let w = &p[off..off + fan_in * fan_out];
            let mut z = p[off + fan_in * fan_out..off + (fan_in + 1) * fan_out].to_vec();
            for (i, a) in act.iter().enumerate() {
                for (zo, wo) in z.iter_mut().zip(&w[i * fan_out..(i + 1) * fan_out]) {
                    *zo += a * wo;
                }
            }
            if l != last {
                for zo in z.iter_mut() {
                    *zo = libm::tanh(*zo);
                }
            }
            act = z;
        }
        Ok(act)
    }

    /// Value, first and second derivative of every output with respect to
    /// input coordinate `seed`, other coordinates held fixed.
    pub fn forward_jet(
        &self,
        params: &ParameterVector,
        input: &[f64],
        seed: usize,
    ) -> Result<Vec<Jet2>, AutodiffError> {
        self.check_params(params)?;
        self.check_input(input)?;
        if seed >= self.config.input_dim {
            return Err(AutodiffError::SeedOutOfRange {
                seed,
                input_dim: self.config.input_dim,
            });
        }
        let p = &params.values;
        let last = self.shapes.len() - 1;
        let mut act: Vec<Jet2> = input
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if i == seed {
                    Jet2::variable(x)
                } else {
                    Jet2::constant(x)
                }
            })
            .collect();
        for (l, (&(fan_in, fan_out), &off)) in self.shapes.iter().zip(&self.offsets).enumerate() {
            let w = &p[off..off + fan_in * fan_out];
            let mut z: Vec<Jet2> = p[off + fan_in * fan_out..off + (fan_in + 1) * fan_out]
                .iter()
                .map(|&b| Jet2::constant(b))
                .collect();
            for (i, a) in act.iter().enumerate() {
                for (zo, &wo) in z.iter_mut().zip(&w[i * fan_out..(i + 1) * fan_out]) {
                    *zo = *zo + *a * wo;
                }
            }
            if l != last {
                for zo in z.iter_mut() {
                    *zo = zo.tanh();
                }
            }
            act = z;
        }
        Ok(act)
    }

    /// Binds `params` to a tape as a single differentiable leaf and returns
    /// layer views for building losses.
    pub fn bind<'a>(
        &'a self,
        tape: &mut Tape,
        params: &ParameterVector,
    ) -> Result<TapeNet<'a>, AutodiffError> {
        self.check_params(params)?;
        let n = params.values.len();
        let leaf = tape.variable(params.values.clone(), n, 1);
        let layers = self
            .shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(fan_in, fan_out), &off)| {
                let w = tape.slice(leaf, off, fan_in, fan_out);
                let b = tape.slice(leaf, off + fan_in * fan_out, 1, fan_out);
                (w, b)
            })
            .collect();
        let extras = (0..params.extra_scalars)
            .map(|j| tape.slice(leaf, self.count + j, 1, 1))
            .collect();
        Ok(TapeNet {
            mlp: self,
            leaf,
            layers,
            extras,
        })
    }

    /// Value and exact gradient of a scalar loss built from the network on a
    /// tape.
    ///
    /// `loss` receives the tape and the bound network and returns a 1x1 node.
    pub fn grad_params<F>(
        &self,
        params: &ParameterVector,
        loss: F,
    ) -> Result<(f64, Vec<f64>), AutodiffError>
    where
        F: FnOnce(&mut Tape, &TapeNet<'_>) -> Result<Var, AutodiffError>,
    {
        let mut tape = Tape::new();
        let net = self.bind(&mut tape, params)?;
        let root = loss(&mut tape, &net)?;
        let value = tape.scalar(root);
        if !value.is_finite() {
            return Err(AutodiffError::NonFiniteLoss(value));
        }
        let mut grads = tape.backward(root);
        Ok((value, grads.take(net.leaf)))
    }
}

/// Derivative order requested along one input coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetRequest {
    pub seed: usize,
    pub second_order: bool,
}

/// Batched jet of the network outputs along one input coordinate.
#[derive(Debug, Clone, Copy)]
pub struct JetVars {
    pub d1: Var,
    pub d2: Option<Var>,
}

/// A network whose parameters live on a tape.
#[derive(Debug)]
pub struct TapeNet<'a> {
    mlp: &'a Mlp,
    leaf: Var,
    layers: Vec<(Var, Var)>,
    extras: Vec<Var>,
}

impl TapeNet<'_> {
    pub fn mlp(&self) -> &Mlp {
        self.mlp
    }

    /// The whole parameter vector as a tape node.
    pub fn params(&self) -> Var {
        self.leaf
    }

    /// The `j`-th appended scalar as a 1x1 node.
    pub fn extra(&self, j: usize) -> Var {
        self.extras[j]
    }

    fn input_batch(&self, tape: &mut Tape, inputs: &[f64]) -> Result<(Var, usize), AutodiffError> {
        let d = self.mlp.input_dim();
        if !inputs.len().is_multiple_of(d) {
            return Err(AutodiffError::DimensionMismatch {
                expected: d * (inputs.len() / d + 1),
                actual: inputs.len(),
            });
        }
        let rows = inputs.len() / d;
        Ok((tape.constant(inputs.to_vec(), rows, d), rows))
    }

    /// Outputs for a batch of row-major inputs (`rows x input_dim`), as a
    /// `rows x output_dim` node.
    pub fn forward(&self, tape: &mut Tape, inputs: &[f64]) -> Result<Var, AutodiffError> {
        let (mut a, _) = self.input_batch(tape, inputs)?;
        let last = self.layers.len() - 1;
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            let z = tape.matmul(a, w);
            let z = tape.add_row(z, b);
            a = if l == last { z } else { tape.tanh(z) };
        }
        Ok(a)
    }

    /// Outputs plus per-request derivative nodes, sharing the value pass.
    pub fn forward_jets(
        &self,
        tape: &mut Tape,
        inputs: &[f64],
        requests: &[JetRequest],
    ) -> Result<(Var, Vec<JetVars>), AutodiffError> {
        let d = self.mlp.input_dim();
        for r in requests {
            if r.seed >= d {
                return Err(AutodiffError::SeedOutOfRange {
                    seed: r.seed,
                    input_dim: d,
                });
            }
        }
        let (mut a, rows) = self.input_batch(tape, inputs)?;
        let mut jets: Vec<(Var, Option<Var>)> = requests
            .iter()
            .map(|r| {
                let mut onehot = vec![0.0; rows * d];
                for row in 0..rows {
                    onehot[row * d + r.seed] = 1.0;
                }
                let d1 = tape.constant(onehot, rows, d);
                let d2 = r
                    .second_order
                    .then(|| tape.constant(vec![0.0; rows * d], rows, d));
                (d1, d2)
            })
            .collect();

        let last = self.layers.len() - 1;
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            let z = tape.matmul(a, w);
            let z = tape.add_row(z, b);
            if l == last {
                a = z;
                for jet in jets.iter_mut() {
                    jet.0 = tape.matmul(jet.0, w);
                    jet.1 = jet.1.map(|d2| tape.matmul(d2, w));
                }
                continue;
            }
            let t = tape.tanh(z);
            let s = tape.one_minus_square(t);
            let ts = jets.iter().any(|j| j.1.is_some()).then(|| tape.mul(t, s));
            for jet in jets.iter_mut() {
                let z1 = tape.matmul(jet.0, w);
                let a1 = tape.mul(s, z1);
                if let (Some(d2), Some(ts)) = (jet.1, ts) {
                    // tanh(z)'' = s*z'' - 2*t*s*(z')²
                    let z2 = tape.matmul(d2, w);
                    let lin = tape.mul(s, z2);
                    let z1sq = tape.square(z1);
                    let curv = tape.mul(ts, z1sq);
                    let curv = tape.scale(curv, -2.0);
                    jet.1 = Some(tape.add(lin, curv));
                }
                jet.0 = a1;
            }
            a = t;
        }
        Ok((
            a,
            jets.into_iter()
                .map(|(d1, d2)| JetVars { d1, d2 })
                .collect(),
        ))
    }
}
