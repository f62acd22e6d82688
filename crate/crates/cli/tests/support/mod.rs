//! Shared fixtures and finite-difference oracles for the integration tests.
#![allow(dead_code)]

pub mod properties;

use nsga_pinn::config::ProblemSettings;
use nsga_pinn_core::problems::{
    evaluate_objectives, BurgersSettings, PendulumSettings, PinnProblem,
};
use nsga_pinn_core::{Mlp, ParameterVector, ProblemSpec};

pub fn tiny_pendulum_settings(seed: u64) -> PendulumSettings {
    PendulumSettings {
        hidden_layers: vec![5, 4],
        n_collocation: 12,
        n_ics: 5,
        data_intervals: 6,
        seed,
        ..PendulumSettings::default()
    }
}

pub fn tiny_burgers_settings(seed: u64) -> BurgersSettings {
    BurgersSettings {
        hidden_layers: vec![5, 4],
        n_collocation: 12,
        n_boundary: 7,
        reference_cells: 20,
        seed,
        ..BurgersSettings::default()
    }
}

pub fn tiny_problem(burgers: bool, seed: u64) -> ProblemSpec {
    let settings = if burgers {
        ProblemSettings::Burgers(tiny_burgers_settings(seed))
    } else {
        ProblemSettings::Pendulum(tiny_pendulum_settings(seed))
    };
    settings.build().expect("tiny settings are valid")
}

/// Glorot network from `seed` with every parameter scaled by `scale` and
/// biases filled from the same stream, so no component is trivially zero.
pub fn random_params(problem: &ProblemSpec, seed: u64, scale: f64) -> ParameterVector {
    use rand::Rng;
    let mut rng = nsga_pinn_core::rng::stream(&[77, seed]);
    let mut extras = problem.initial_extras();
    for e in extras.iter_mut() {
        *e = rng.random_range(0.2..2.0);
    }
    let mut p = problem.mlp().init(&mut rng, &extras);
    let n = p.len() - p.extra_scalars;
    for v in p.values[..n].iter_mut() {
        *v = *v * scale + rng.random_range(-0.1..0.1);
    }
    p
}

pub fn total_loss(problem: &ProblemSpec, params: &ParameterVector) -> f64 {
    evaluate_objectives(problem, params)
        .expect("finite loss")
        .total()
}

/// Fourth-order central difference of `f` in coordinate `i`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut y = x.to_vec();
    let mut at = |d: f64| {
        y[i] = x[i] + d;
        f(&y)
    };
    let (p2, p1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
    (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
}

/// Relative error with an absolute floor for components near zero.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Max relative error between the tape gradient and finite differences of
/// the total loss over every parameter.
pub fn gradient_error(problem: &ProblemSpec, params: &ParameterVector) -> f64 {
    let (_, grad) =
        nsga_pinn_core::problems::objectives_and_gradient(problem, params).expect("finite");
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let f = |v: &[f64]| {
        total_loss(
            problem,
            &ParameterVector::new(v.to_vec(), params.extra_scalars),
        )
    };
    (0..params.len())
        .map(|i| {
            let fd = central_diff(f, &params.values, i, 1e-4);
            rel_err(grad[i], fd, GRAD_FLOOR * scale.max(1.0))
        })
        .fold(0.0, f64::max)
}

/// Components smaller than this fraction of the largest gradient entry are
/// compared absolutely.
pub const GRAD_FLOOR: f64 = 1e-6;

/// Max relative errors `(d1, d2)` of `forward_jet` against fourth-order
/// central differences with steps `1e-4` (first) and `1e-3` (second).
pub fn jet_error(mlp: &Mlp, params: &ParameterVector, x: &[f64], seed: usize) -> (f64, f64) {
    const H1: f64 = 1e-4;
    const H2: f64 = 1e-3;
    let jets = mlp.forward_jet(params, x, seed).expect("valid input");
    let at = |d: f64| {
        let mut y = x.to_vec();
        y[seed] += d;
        mlp.forward(params, &y).expect("valid input")
    };
    let s1: Vec<Vec<f64>> = [2.0, 1.0, -1.0, -2.0].iter().map(|k| at(k * H1)).collect();
    let s2: Vec<Vec<f64>> = [2.0, 1.0, 0.0, -1.0, -2.0]
        .iter()
        .map(|k| at(k * H2))
        .collect();
    let mut e1 = 0.0f64;
    let mut e2 = 0.0f64;
    for (k, j) in jets.iter().enumerate() {
        let d1 = (-s1[0][k] + 8.0 * s1[1][k] - 8.0 * s1[2][k] + s1[3][k]) / (12.0 * H1);
        let d2 = (-s2[0][k] + 16.0 * s2[1][k] - 30.0 * s2[2][k] + 16.0 * s2[3][k] - s2[4][k])
            / (12.0 * H2 * H2);
        e1 = e1.max(rel_err(j.d1, d1, JET_FLOOR));
        e2 = e2.max(rel_err(j.d2, d2, JET_FLOOR));
    }
    (e1, e2)
}

/// Derivatives below this magnitude are compared absolutely.
pub const JET_FLOOR: f64 = 1e-6;
