#![no_std]

//! Multi-objective training of physics-informed neural networks.
//!
//! Every loss component of a PINN (residual, initial/boundary condition,
//! data misfit) is kept as a separate objective. A population of networks is
//! ranked by Pareto dominance and crowding distance, a mating pool is drawn by
//! crowded binary tournament, and each pool member is refined with Adam to
//! produce offspring. Parents and offspring are merged and truncated back to
//! the population size with elitist NSGA-II survival.
//!
//! The crate is `no_std` with `alloc`; IO, threading and file formats live in
//! the companion `nsga-pinn` crate.
//!
//! Module map:
//!
//! * [`jet`], [`tape`], [`mlp`]: network evaluation, forward-mode input
//!   derivatives and reverse-mode parameter gradients.
//! * [`problems`]: the inverse pendulum and viscous Burgers problems.
//! * [`adam`]: the Adam optimizer and the scalarized training loop.
//! * [`nsga`]: dominance, non-dominated sorting, crowding, selection.
//! * [`trainer`]: the generational loop, survival rate and ensembles.

extern crate alloc;

pub mod adam;
pub mod jet;
pub mod mlp;
pub mod nsga;
pub mod problems;
pub mod rng;
pub mod tape;
pub mod trainer;

pub use adam::{AdamConfig, AdamError, AdamState};
pub use jet::Jet2;
pub use mlp::{Activation, AutodiffError, Mlp, MlpConfig, ParameterVector};
pub use nsga::{FrontPartition, Individual, Label, NsgaError};
pub use problems::{Component, LossComponent, ObjectiveVector, ProblemError, ProblemSpec};
pub use trainer::{EnsemblePrediction, GenerationRecord, Mode, Refine, RunConfig, TrainError};
