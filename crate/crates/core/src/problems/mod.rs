//! Physics problems expressed as three-objective loss evaluators.
//!
//! Each problem owns its network architecture, its fixed sample sets and the
//! targets derived from a reference solution. Loss components are mean
//! squared errors; the scalarized total used by Adam is their unit-weight
//! sum.

mod burgers;
mod noise;
mod ode;
mod pendulum;
mod sampling;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlp::{AutodiffError, Mlp, ParameterVector, TapeNet};
use crate::tape::{Tape, Var};

pub use burgers::{burgers_reference, BurgersProblem, BurgersReference, BurgersSettings};
pub use noise::{apply_noise, GaussianNoise};
pub use ode::{pendulum_energy, pendulum_reference, RK4_STEP};
pub use pendulum::{PendulumProblem, PendulumSettings};
pub use sampling::{latin_hypercube, stratified};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("non-finite {component} loss: {value}")]
    NonFinite { component: Component, value: f64 },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("invalid problem settings: {0}")]
    InvalidSettings(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Residual,
    Initial,
    Boundary,
    Data,
}

impl Component {
    pub fn name(self) -> &'static str {
        match self {
            Component::Residual => "residual",
            Component::Initial => "initial",
            Component::Boundary => "boundary",
            Component::Data => "data",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossComponent {
    pub name: Component,
    pub value: f64,
}

/// Named loss components in a fixed problem-defined order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector(pub Vec<LossComponent>);

impl ObjectiveVector {
    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.value).collect()
    }

    /// Unit-weight scalarization.
    pub fn total(&self) -> f64 {
        self.0.iter().map(|c| c.value).sum()
    }

    pub fn get(&self, name: Component) -> Option<f64> {
        self.0.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Query points and reference outputs for plotting a trained network.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionGrid {
    /// Row-major `rows x input_dim`.
    pub inputs: Vec<f64>,
    /// Row-major `rows x output_dim`.
    pub reference: Vec<f64>,
    pub input_names: Vec<&'static str>,
    pub output_names: Vec<&'static str>,
}

impl PredictionGrid {
    pub fn rows(&self) -> usize {
        self.inputs.len() / self.input_names.len()
    }
}

/// A PINN problem: a network signature plus loss components built on a tape.
pub trait PinnProblem: Sync {
    fn mlp(&self) -> &Mlp;

    /// Component names in objective order.
    fn components(&self) -> [Component; 3];

    /// Initial values of the trainable problem scalars appended to the
    /// network parameters.
    fn initial_extras(&self) -> Vec<f64>;

    /// Records the three loss components for the bound network.
    fn build_objectives(
        &self,
        tape: &mut Tape,
        net: &TapeNet<'_>,
    ) -> Result<[Var; 3], AutodiffError>;

    fn prediction_grid(&self) -> PredictionGrid;
}

fn collect_objectives<P: PinnProblem + ?Sized>(
    problem: &P,
    tape: &Tape,
    vars: &[Var; 3],
) -> Result<ObjectiveVector, ProblemError> {
    let names = problem.components();
    let mut out = Vec::with_capacity(3);
    for (name, v) in names.iter().zip(vars) {
        let value = tape.scalar(*v);
        if !value.is_finite() {
            return Err(ProblemError::NonFinite {
                component: *name,
                value,
            });
        }
        out.push(LossComponent { name: *name, value });
    }
    Ok(ObjectiveVector(out))
}

/// The problem's three loss components at `params`.
pub fn evaluate_objectives<P: PinnProblem + ?Sized>(
    problem: &P,
    params: &ParameterVector,
) -> Result<ObjectiveVector, ProblemError> {
    let mut tape = Tape::new();
    let net = problem.mlp().bind(&mut tape, params)?;
    let vars = problem.build_objectives(&mut tape, &net)?;
    collect_objectives(problem, &tape, &vars)
}

/// Loss components at `params` and the exact gradient of their sum.
pub fn objectives_and_gradient<P: PinnProblem + ?Sized>(
    problem: &P,
    params: &ParameterVector,
) -> Result<(ObjectiveVector, Vec<f64>), ProblemError> {
    let mut tape = Tape::new();
    let net = problem.mlp().bind(&mut tape, params)?;
    let vars = problem.build_objectives(&mut tape, &net)?;
    let objectives = collect_objectives(problem, &tape, &vars)?;
    let s = tape.add(vars[0], vars[1]);
    let total = tape.add(s, vars[2]);
    let mut grads = tape.backward(total);
    Ok((objectives, grads.take(net.params())))
}

/// The two built-in problems.
#[derive(Debug, Clone)]
pub enum ProblemSpec {
    Pendulum(PendulumProblem),
    Burgers(BurgersProblem),
}

impl ProblemSpec {
    fn inner(&self) -> &dyn PinnProblem {
        match self {
            ProblemSpec::Pendulum(p) => p,
            ProblemSpec::Burgers(b) => b,
        }
    }
}

impl PinnProblem for ProblemSpec {
    fn mlp(&self) -> &Mlp {
        self.inner().mlp()
    }

    fn components(&self) -> [Component; 3] {
        self.inner().components()
    }

    fn initial_extras(&self) -> Vec<f64> {
        self.inner().initial_extras()
    }

    fn build_objectives(
        &self,
        tape: &mut Tape,
        net: &TapeNet<'_>,
    ) -> Result<[Var; 3], AutodiffError> {
        self.inner().build_objectives(tape, net)
    }

    fn prediction_grid(&self) -> PredictionGrid {
        self.inner().prediction_grid()
    }
}

/// `mean over rows of ||out - target||²` for a `rows x cols` output node.
pub(crate) fn mean_row_sq_error(tape: &mut Tape, out: Var, target: Vec<f64>) -> Var {
    let (rows, cols) = tape.shape(out);
    let t = tape.constant(target, rows, cols);
    let d = tape.sub(out, t);
    let sq = tape.square(d);
    let s = tape.sum(sq);
    tape.scale(s, 1.0 / rows as f64)
}
