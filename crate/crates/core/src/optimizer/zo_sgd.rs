//! Value-oracle baseline: two-point Gaussian-smoothing ZO-SGD.

use super::config::StepParams;
use super::step::{line_search_candidates, IterationRecord};
use crate::error::{Error, Result};
use crate::functions::Objective;
use crate::oracle::{NoiseSpec, OracleError};
use crate::perturbation::sample_perturbations;
use crate::rng::{standard_normal, RankRng};
use crate::vector;

/// Returns (optionally noisy) objective values and counts evaluations.
#[derive(Debug, Clone)]
pub struct ValueOracle<F> {
    f: F,
    noise: NoiseSpec,
    rng: Option<RankRng>,
    evaluations: u64,
}

impl<F: Objective> ValueOracle<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            noise: NoiseSpec::default(),
            rng: None,
            evaluations: 0,
        }
    }

    pub fn noisy(f: F, noise: NoiseSpec, rng: RankRng) -> Self {
        Self {
            f,
            noise,
            rng: Some(rng),
            evaluations: 0,
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        let v = self.f.value(x);
        if !v.is_finite() {
            return Err(OracleError::NonFinite { index: 1, value: v });
        }
        self.evaluations += 1;
        Ok(match (&mut self.rng, self.noise.sigma) {
            (Some(rng), s) if s > 0.0 => v + s * standard_normal(rng),
            _ => v,
        })
    }
}

/// `sum_i ((f_i - f0) / mu) xi_i / n`
pub fn two_point_estimate(f0: f64, values: &[f64], directions: &[Vec<f64>], mu: f64) -> Vec<f64> {
    let d = directions.first().map_or(0, Vec::len);
    let mut g = vec![0.0; d];
    for (v, dir) in values.iter().zip(directions) {
        vector::axpy((v - f0) / mu, dir, &mut g);
    }
    let n = directions.len() as f64;
    g.iter_mut().for_each(|x| *x /= n);
    g
}

/// One ZO-SGD iteration spending `m` value queries on the gradient: `f(x)`
/// plus `m - 1` directions. With line search, `l` more values pick the step.
pub fn zo_sgd_step<F, R>(
    x: &[f64],
    params: &StepParams,
    oracle: &mut ValueOracle<F>,
    rng: &mut R,
) -> Result<(Vec<f64>, IterationRecord)>
where
    F: Objective,
    R: rand::Rng + ?Sized,
{
    let n_dirs = params.m.saturating_sub(1).max(1);
    // sample_perturbations wants at least two directions
    let batch = sample_perturbations(x, n_dirs.max(2), params.mu, rng)?;
    let directions = &batch.directions()[..n_dirs];
    let f0 = oracle.value(x)?;
    let values = batch.candidates()[..n_dirs]
        .iter()
        .map(|c| oracle.value(c))
        .collect::<Result<Vec<_>, _>>()?;
    let g = two_point_estimate(f0, &values, directions, params.mu);
    let mut queries = (n_dirs + 1) as u64;

    let (next, exponent) = match params.line_search {
        Some(ls) => {
            queries += ls.l as u64;
            let cands = line_search_candidates(x, &g, params.eta, ls.gamma, ls.l);
            let mut best = (0, f64::INFINITY);
            for (i, c) in cands.iter().enumerate() {
                if !vector::all_finite(c) {
                    return Err(Error::NonFinite {
                        index: i + 1,
                        value: f64::NAN,
                    });
                }
                let v = oracle.value(c)?;
                if v < best.1 {
                    best = (i, v);
                }
            }
            match best.0 {
                0 => (x.to_vec(), None),
                p => (cands[p].clone(), Some(p as u32)),
            }
        }
        None => (vector::offset(x, -params.eta, &g), None),
    };

    let record = IterationRecord {
        t: 0,
        point_before: x.to_vec(),
        point_after: next.clone(),
        grad_norm: vector::norm(&g),
        queries,
        total_queries: queries,
        eta: params.eta,
        mu: params.mu,
        accepted_exponent: exponent,
        f_value: None,
        true_grad_norm: None,
    };
    Ok((next, record))
}
