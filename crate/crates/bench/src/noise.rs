use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::experiment::{run_experiment, ExperimentOutcome};
use crate::spec::ExperimentSpec;

/// Base noise level `s` of the default sweep `{0, s, 10 s}`. With `mu = 0.01`
/// the values compared in one ranking differ by roughly `mu ||grad f||`, so
/// `s` starts to matter near the optimum and `10 s` already does far from it.
pub const NOISE_STEP: f64 = 0.01;

pub fn default_sigmas() -> Vec<f64> {
    vec![0.0, NOISE_STEP, 10.0 * NOISE_STEP]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub sigma: f64,
    pub outcome: ExperimentOutcome,
}

/// Runs `base` once per noise level. Seeds, directions and starting points
/// are shared across levels, so `sigma = 0` reproduces the noiseless run.
pub fn noise_sweep(base: &ExperimentSpec, sigmas: &[f64]) -> Result<Vec<NoiseLevel>> {
    if sigmas.is_empty() {
        return Err(BenchError::Invalid(
            "noise sweep needs at least one sigma".into(),
        ));
    }
    sigmas
        .iter()
        .map(|&sigma| {
            Ok(NoiseLevel {
                sigma,
                outcome: run_experiment(&base.with_noise(sigma))?,
            })
        })
        .collect()
}
