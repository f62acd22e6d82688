use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{purpose, stream};

/// Additive i.i.d. Gaussian noise with a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianNoise {
    pub mean: f64,
    pub std: f64,
    pub seed: u64,
}

/// Returns `data + eps`, `eps ~ Normal(mean, std²)` drawn from the noise seed.
pub fn apply_noise(data: &[f64], noise: &GaussianNoise) -> Vec<f64> {
    if noise.std == 0.0 {
        return data.iter().map(|x| x + noise.mean).collect();
    }
    let mut rng = stream(&[purpose::NOISE, noise.seed]);
    data.iter()
        .map(|x| {
            let z: f64 = StandardNormal.sample(&mut rng);
            x + noise.mean + noise.std * z
        })
        .collect()
}
