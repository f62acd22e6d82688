//! Viscous Burgers equation `u_t + u u_x = ν u_xx` on `x ∈ [-1, 1]`,
//! `t ∈ [0, 1]`, with `u(0, x) = -sin(πx)` and `u(t, ±1) = 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    apply_noise, latin_hypercube, mean_row_sq_error, stratified, Component, GaussianNoise,
    PinnProblem, PredictionGrid, ProblemError,
};
use crate::mlp::{AutodiffError, JetRequest, Mlp, MlpConfig, TapeNet};
use crate::rng::{purpose, stream};
use crate::tape::{Tape, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersSettings {
    pub hidden_layers: Vec<usize>,
    pub viscosity: f64,
    pub n_collocation: usize,
    /// Split evenly between `x = -1`, `x = +1` and `t = 0`; the remainder
    /// goes to `t = 0`.
    pub n_boundary: usize,
    /// Perturbs the initial-condition targets.
    pub noise: Option<GaussianNoise>,
    pub seed: u64,
    /// Cells of the finite-volume reference used for predictions.
    pub reference_cells: usize,
}

impl Default for BurgersSettings {
    fn default() -> Self {
        Self {
            hidden_layers: vec![20; 8],
            viscosity: 0.01 / PI,
            n_collocation: 10_000,
            n_boundary: 100,
            noise: None,
            seed: 1234,
            reference_cells: 2000,
        }
    }
}

impl BurgersSettings {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let bad = |m: &str| Err(ProblemError::InvalidSettings(m.into()));
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return bad("hidden_layers must be non-empty with positive widths");
        }
        if self.n_collocation == 0 {
            return bad("n_collocation must be positive");
        }
        if self.n_boundary < 3 {
            return bad("n_boundary must be at least 3");
        }
        if !(self.viscosity > 0.0) {
            return bad("viscosity must be positive");
        }
        if self.reference_cells < 10 {
            return bad("reference_cells must be at least 10");
        }
        if let Some(n) = &self.noise {
            if !(n.std >= 0.0) {
                return Err(ProblemError::InvalidSettings(format!(
                    "noise std must be >= 0, got {}",
                    n.std
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BurgersProblem {
    settings: BurgersSettings,
    mlp: Mlp,
    /// `(t, x)` rows.
    collocation: Vec<f64>,
    boundary: Vec<f64>,
    initial: Vec<f64>,
    initial_targets: Vec<f64>,
}

impl BurgersProblem {
    pub fn new(settings: BurgersSettings) -> Result<Self, ProblemError> {
        settings.validate()?;
        let mlp = Mlp::new(MlpConfig::new(2, settings.hidden_layers.clone(), 1))?;
        let mut rng = stream(&[purpose::SAMPLING, settings.seed]);
        let collocation =
            latin_hypercube(settings.n_collocation, &[(0.0, 1.0), (-1.0, 1.0)], &mut rng);

        let side = settings.n_boundary / 3;
        let n_initial = settings.n_boundary - 2 * side;
        let mut boundary = Vec::with_capacity(4 * side);
        for x in [-1.0, 1.0] {
            for t in stratified(side, 0.0, 1.0, &mut rng) {
                boundary.extend_from_slice(&[t, x]);
            }
        }
        let xs = stratified(n_initial, -1.0, 1.0, &mut rng);
        let initial = xs.iter().flat_map(|&x| [0.0, x]).collect();
        let clean: Vec<f64> = xs.iter().map(|&x| -libm::sin(PI * x)).collect();
        let initial_targets = match &settings.noise {
            Some(n) => apply_noise(&clean, n),
            None => clean,
        };
        Ok(Self {
            settings,
            mlp,
            collocation,
            boundary,
            initial,
            initial_targets,
        })
    }

    pub fn settings(&self) -> &BurgersSettings {
        &self.settings
    }

    pub fn collocation(&self) -> &[f64] {
        &self.collocation
    }

    pub fn boundary(&self) -> &[f64] {
        &self.boundary
    }

    /// `(0, x)` rows of the initial-condition samples.
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn initial_targets(&self) -> &[f64] {
        &self.initial_targets
    }
}

impl PinnProblem for BurgersProblem {
    fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    fn components(&self) -> [Component; 3] {
        [Component::Residual, Component::Boundary, Component::Initial]
    }

    fn initial_extras(&self) -> Vec<f64> {
        Vec::new()
    }

    fn build_objectives(
        &self,
        tape: &mut Tape,
        net: &TapeNet<'_>,
    ) -> Result<[Var; 3], AutodiffError> {
        let (u, jets) = net.forward_jets(
            tape,
            &self.collocation,
            &[
                JetRequest {
                    seed: 0,
                    second_order: false,
                },
                JetRequest {
                    seed: 1,
                    second_order: true,
                },
            ],
        )?;
        let u_t = jets[0].d1;
        let u_x = jets[1].d1;
        let u_xx = jets[1].d2.expect("second order requested");
        let conv = tape.mul(u, u_x);
        let diff = tape.scale(u_xx, self.settings.viscosity);
        let r = tape.add(u_t, conv);
        let r = tape.sub(r, diff);
        let r = tape.square(r);
        let residual = tape.mean(r);

        let ub = net.forward(tape, &self.boundary)?;
        let boundary = mean_row_sq_error(tape, ub, vec![0.0; self.boundary.len() / 2]);

        let u0 = net.forward(tape, &self.initial)?;
        let initial = mean_row_sq_error(tape, u0, self.initial_targets.clone());
        Ok([residual, boundary, initial])
    }

    fn prediction_grid(&self) -> PredictionGrid {
        let times = [0.25, 0.5, 0.75];
        let xs: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
        let reference = burgers_reference(
            self.settings.viscosity,
            self.settings.reference_cells,
            &times,
        );
        let mut inputs = Vec::with_capacity(2 * times.len() * xs.len());
        let mut values = Vec::with_capacity(times.len() * xs.len());
        for (ti, &t) in times.iter().enumerate() {
            for &x in &xs {
                inputs.extend_from_slice(&[t, x]);
                values.push(reference.sample(ti, x));
            }
        }
        PredictionGrid {
            inputs,
            reference: values,
            input_names: vec!["t", "x"],
            output_names: vec!["u"],
        }
    }
}

/// Snapshots of a finite-volume Burgers solution on a uniform node grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersReference {
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

impl BurgersReference {
    /// Linear interpolation of snapshot `ti` at `x`.
    pub fn sample(&self, ti: usize, x: f64) -> f64 {
        let u = &self.snapshots[ti];
        let n = self.xs.len() - 1;
        let dx = 2.0 / n as f64;
        let s = ((x + 1.0) / dx).clamp(0.0, n as f64);
        let i = (libm::floor(s) as usize).min(n - 1);
        let w = s - i as f64;
        (1.0 - w) * u[i] + w * u[i + 1]
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Godunov flux for `f(u) = u²/2`.
fn godunov(ul: f64, ur: f64) -> f64 {
    let f = |u: f64| 0.5 * u * u;
    if ul <= ur {
        if ul > 0.0 {
            f(ul)
        } else if ur < 0.0 {
            f(ur)
        } else {
            0.0
        }
    } else {
        f(ul).max(f(ur))
    }
}

fn burgers_rate(u: &[f64], nu: f64, dx: f64, out: &mut [f64]) {
    let n = u.len() - 1;
    let mut slope = vec![0.0; n + 1];
    for i in 1..n {
        slope[i] = minmod(u[i] - u[i - 1], u[i + 1] - u[i]);
    }
    let mut flux = vec![0.0; n];
    for i in 0..n {
        flux[i] = godunov(u[i] + 0.5 * slope[i], u[i + 1] - 0.5 * slope[i + 1]);
    }
    out[0] = 0.0;
    out[n] = 0.0;
    for i in 1..n {
        out[i] =
            -(flux[i] - flux[i - 1]) / dx + nu * (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
    }
}

/// MUSCL/Godunov finite-volume solution with SSP-RK2 time stepping on
/// `cells + 1` nodes, sampled at the ascending `times`.
pub fn burgers_reference(viscosity: f64, cells: usize, times: &[f64]) -> BurgersReference {
    let dx = 2.0 / cells as f64;
    let xs: Vec<f64> = (0..=cells).map(|i| -1.0 + i as f64 * dx).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| -libm::sin(PI * x)).collect();
    u[0] = 0.0;
    u[cells] = 0.0;
    let mut k1 = vec![0.0; cells + 1];
    let mut k2 = vec![0.0; cells + 1];
    let mut stage = vec![0.0; cells + 1];
    let mut t = 0.0;
    let mut snapshots = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let umax = u.iter().fold(1e-12_f64, |m, v| m.max(v.abs()));
            // joint advection-diffusion limit: |u| dt/dx + 2 ν dt/dx² <= 0.8
            let dt = (0.8 / (umax / dx + 2.0 * viscosity / (dx * dx))).min(target - t);
            burgers_rate(&u, viscosity, dx, &mut k1);
            for i in 0..=cells {
                stage[i] = u[i] + dt * k1[i];
            }
            burgers_rate(&stage, viscosity, dx, &mut k2);
            for i in 0..=cells {
                u[i] = 0.5 * u[i] + 0.5 * (stage[i] + dt * k2[i]);
            }
            t = if target - t <= dt { target } else { t + dt };
        }
        snapshots.push(u.clone());
    }
    BurgersReference {
        xs,
        times: times.to_vec(),
        snapshots,
    }
}
