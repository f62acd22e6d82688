//! Inverse pendulum: learn `(θ0, ω0, t) ↦ (θ(t), ω(t))` together with the
//! unknown stiffness `k` of `θ' = ω, ω' = -k sin θ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    apply_noise, latin_hypercube, mean_row_sq_error, pendulum_reference, Component, GaussianNoise,
    PinnProblem, PredictionGrid, ProblemError,
};
use crate::mlp::{AutodiffError, JetRequest, Mlp, MlpConfig, TapeNet};
use crate::rng::{purpose, stream};
use crate::tape::{Tape, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumSettings {
    pub hidden_layers: Vec<usize>,
    pub k_true: f64,
    pub k_init: f64,
    pub theta_range: [f64; 2],
    pub omega_range: [f64; 2],
    pub n_collocation: usize,
    pub n_ics: usize,
    /// Number of data mesh intervals on `[0, 1]`; the mesh has one more point.
    pub data_intervals: usize,
    pub noise: Option<GaussianNoise>,
    pub seed: u64,
}

impl Default for PendulumSettings {
    fn default() -> Self {
        Self {
            hidden_layers: vec![100, 100, 100],
            k_true: 1.0,
            k_init: 0.5,
            theta_range: [-PI, PI],
            omega_range: [0.0, PI],
            n_collocation: 1000,
            n_ics: 100,
            data_intervals: 100,
            noise: None,
            seed: 1234,
        }
    }
}

impl PendulumSettings {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let bad = |m: &str| Err(ProblemError::InvalidSettings(m.into()));
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return bad("hidden_layers must be non-empty with positive widths");
        }
        if self.n_collocation == 0 || self.n_ics == 0 || self.data_intervals == 0 {
            return bad("n_collocation, n_ics and data_intervals must be positive");
        }
        if !(self.theta_range[0] < self.theta_range[1])
            || !(self.omega_range[0] < self.omega_range[1])
        {
            return bad("initial-condition ranges must be increasing");
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
pub struct PendulumProblem {
    settings: PendulumSettings,
    mlp: Mlp,
    /// `(θ0, ω0, t)` rows.
    collocation: Vec<f64>,
    /// `(θ0, ω0, 0)` rows.
    ic_inputs: Vec<f64>,
    /// `(θ0, ω0)` rows.
    ic_targets: Vec<f64>,
    data_ic: [f64; 2],
    data_times: Vec<f64>,
    data_inputs: Vec<f64>,
    clean_data: Vec<f64>,
    data: Vec<f64>,
}

impl PendulumProblem {
    pub fn new(settings: PendulumSettings) -> Result<Self, ProblemError> {
        settings.validate()?;
        let mlp = Mlp::new(MlpConfig::new(3, settings.hidden_layers.clone(), 2))?;
        let mut rng = stream(&[purpose::SAMPLING, settings.seed]);
        let th = (settings.theta_range[0], settings.theta_range[1]);
        let om = (settings.omega_range[0], settings.omega_range[1]);

        let collocation = latin_hypercube(settings.n_collocation, &[th, om, (0.0, 1.0)], &mut rng);
        let ics = latin_hypercube(settings.n_ics, &[th, om], &mut rng);
        let ic_inputs = ics
            .chunks_exact(2)
            .flat_map(|c| [c[0], c[1], 0.0])
            .collect();

        let data_pair = latin_hypercube(1, &[th, om], &mut rng);
        let data_ic = [data_pair[0], data_pair[1]];
        let data_times: Vec<f64> = (0..=settings.data_intervals)
            .map(|i| i as f64 / settings.data_intervals as f64)
            .collect();
        let data_inputs = data_times
            .iter()
            .flat_map(|&t| [data_ic[0], data_ic[1], t])
            .collect();
        let clean_data: Vec<f64> =
            pendulum_reference(data_ic[0], data_ic[1], settings.k_true, &data_times)
                .into_iter()
                .flatten()
                .collect();
        let data = match &settings.noise {
            Some(n) => apply_noise(&clean_data, n),
            None => clean_data.clone(),
        };

        Ok(Self {
            settings,
            mlp,
            collocation,
            ic_inputs,
            ic_targets: ics,
            data_ic,
            data_times,
            data_inputs,
            clean_data,
            data,
        })
    }

    pub fn settings(&self) -> &PendulumSettings {
        &self.settings
    }

    pub fn collocation(&self) -> &[f64] {
        &self.collocation
    }

    pub fn ic_targets(&self) -> &[f64] {
        &self.ic_targets
    }

    pub fn data_ic(&self) -> [f64; 2] {
        self.data_ic
    }

    pub fn data_times(&self) -> &[f64] {
        &self.data_times
    }

    /// Observed `(θ, ω)` rows at the data mesh, noise included.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn clean_data(&self) -> &[f64] {
        &self.clean_data
    }
}

impl PinnProblem for PendulumProblem {
    fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    fn components(&self) -> [Component; 3] {
        [Component::Residual, Component::Initial, Component::Data]
    }

    fn initial_extras(&self) -> Vec<f64> {
        vec![self.settings.k_init]
    }

    fn build_objectives(
        &self,
        tape: &mut Tape,
        net: &TapeNet<'_>,
    ) -> Result<[Var; 3], AutodiffError> {
        let k = net.extra(0);
        let (out, jets) = net.forward_jets(
            tape,
            &self.collocation,
            &[JetRequest {
                seed: 2,
                second_order: false,
            }],
        )?;
        let theta = tape.column(out, 0);
        let omega = tape.column(out, 1);
        let theta_t = tape.column(jets[0].d1, 0);
        let omega_t = tape.column(jets[0].d1, 1);
        let r1 = tape.sub(theta_t, omega);
        let sin_theta = tape.sin(theta);
        let ksin = tape.mul_scalar(sin_theta, k);
        let r2 = tape.add(omega_t, ksin);
        let r1 = tape.square(r1);
        let r2 = tape.square(r2);
        let r = tape.add(r1, r2);
        let residual = tape.mean(r);

        let ic_out = net.forward(tape, &self.ic_inputs)?;
        let initial = mean_row_sq_error(tape, ic_out, self.ic_targets.clone());

        let data_out = net.forward(tape, &self.data_inputs)?;
        let data = mean_row_sq_error(tape, data_out, self.data.clone());
        Ok([residual, initial, data])
    }

    fn prediction_grid(&self) -> PredictionGrid {
        PredictionGrid {
            inputs: self.data_inputs.clone(),
            reference: self.clean_data.clone(),
            input_names: vec!["theta0", "omega0", "t"],
            output_names: vec!["theta", "omega"],
        }
    }
}
