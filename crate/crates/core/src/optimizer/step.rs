use serde::{Deserialize, Serialize};

use super::config::StepParams;
use crate::error::{Error, Result};
use crate::estimator::{estimate_gradient, GradientEstimate};
use crate::oracle::{OracleRequest, RankingOracle};
use crate::perturbation::{sample_perturbations, PerturbationBatch};
use crate::ranking::RankingOutcome;
use crate::vector;

/// What happened in one optimizer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub t: usize,
    pub point_before: Vec<f64>,
    pub point_after: Vec<f64>,
    /// Norm of the gradient estimate.
    pub grad_norm: f64,
    /// Oracle points consumed by this iteration.
    pub queries: u64,
    /// Oracle points consumed since the start of the run, this iteration included.
    pub total_queries: u64,
    pub eta: f64,
    pub mu: f64,
    /// Line-search exponent of the accepted step; `None` when the current
    /// point won the selection or no line search was run.
    pub accepted_exponent: Option<u32>,
    /// Objective at `point_after`, when the objective is known.
    pub f_value: Option<f64>,
    /// True gradient norm at `point_before`, when available.
    pub true_grad_norm: Option<f64>,
}

fn check_finite(points: &[Vec<f64>]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if let Some(v) = p.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: i + 1,
                value: *v,
            });
        }
    }
    Ok(())
}

/// Picks the best of `{x} ∪ {x - eta gamma^p g : p = 1..l-1}` with a best-of-`l`
/// query. Returns `x` itself with `None` when no shrunk step beats it.
pub fn line_search_step<O: RankingOracle + ?Sized>(
    x: &[f64],
    g: &[f64],
    eta: f64,
    gamma: f64,
    l: usize,
    select_oracle: &mut O,
) -> Result<(Vec<f64>, Option<u32>)> {
    if l < 2 || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "line search needs l >= 2 and gamma in (0, 1), got l = {l}, gamma = {gamma}"
        )));
    }
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: g.len(),
        });
    }
    let candidates = line_search_candidates(x, g, eta, gamma, l);
    check_finite(&candidates)?;
    let winner = select_oracle
        .rank(&OracleRequest::select(candidates.clone())?)?
        .best();
    Ok(match winner {
        0 => (x.to_vec(), None),
        p => (
            candidates.into_iter().nth(p).expect("winner in range"),
            Some(p as u32),
        ),
    })
}

/// `[x, x - eta gamma g, ..., x - eta gamma^(l-1) g]`
pub fn line_search_candidates(
    x: &[f64],
    g: &[f64],
    eta: f64,
    gamma: f64,
    l: usize,
) -> Vec<Vec<f64>> {
    std::iter::once(x.to_vec())
        .chain((1..l).map(|p| vector::offset(x, -eta * gamma.powi(p as i32), g)))
        .collect()
}

/// One ZO-RankSGD iteration: sample `m` directions, rank the perturbed points,
/// estimate the gradient and step `x - eta g` (or line-search along `g`).
///
/// The returned record has `t = 0` and `total_queries = queries`; the run loop
/// fills both in.
pub fn zo_rank_sgd_step<O, R>(
    x: &[f64],
    params: &StepParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<(Vec<f64>, IterationRecord)>
where
    O: RankingOracle + ?Sized,
    R: rand::Rng + ?Sized,
{
    zo_rank_sgd_step_with(x, params, oracle, rng, estimate_gradient)
}

/// [`zo_rank_sgd_step`] with a replaceable estimator.
pub fn zo_rank_sgd_step_with<O, R, E>(
    x: &[f64],
    params: &StepParams,
    oracle: &mut O,
    rng: &mut R,
    estimator: E,
) -> Result<(Vec<f64>, IterationRecord)>
where
    O: RankingOracle + ?Sized,
    R: rand::Rng + ?Sized,
    E: FnOnce(&PerturbationBatch, &RankingOutcome) -> Result<GradientEstimate>,
{
    let batch = sample_perturbations(x, params.m, params.mu, rng)?;
    step_from_batch(&batch, params, oracle, estimator)
}

/// The deterministic part of an iteration, starting from an already sampled
/// batch around `batch.base_point()`.
pub fn step_from_batch<O, E>(
    batch: &PerturbationBatch,
    params: &StepParams,
    oracle: &mut O,
    estimator: E,
) -> Result<(Vec<f64>, IterationRecord)>
where
    O: RankingOracle + ?Sized,
    E: FnOnce(&PerturbationBatch, &RankingOutcome) -> Result<GradientEstimate>,
{
    let x = batch.base_point();
    check_finite(batch.candidates())?;
    let request = OracleRequest::new(batch.candidates().to_vec(), params.k)?;
    let outcome = oracle.rank(&request)?;
    let g = estimator(batch, &outcome)?;
    let mut queries = batch.len() as u64;

    let (next, exponent) = match params.line_search {
        Some(ls) => {
            queries += ls.l as u64;
            line_search_step(x, &g.vector, params.eta, ls.gamma, ls.l, oracle)?
        }
        None => {
            let next = vector::offset(x, -params.eta, &g.vector);
            check_finite(std::slice::from_ref(&next))?;
            (next, None)
        }
    };

    let record = IterationRecord {
        t: 0,
        point_before: x.to_vec(),
        point_after: next.clone(),
        grad_norm: g.norm(),
        queries,
        total_queries: queries,
        eta: params.eta,
        mu: batch.mu(),
        accepted_exponent: exponent,
        f_value: None,
        true_grad_norm: None,
    };
    Ok((next, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{pairwise_estimate, sign};
    use crate::functions::{Objective, TestFunction};
    use crate::oracle::{ExactOracle, Metered};
    use crate::rng::{stream_rng, Stream};

    fn params(eta: f64, mu: f64, m: usize, k: usize) -> StepParams {
        StepParams {
            eta,
            mu,
            m,
            k,
            line_search: None,
        }
    }

    #[test]
    fn hand_executed_step() {
        // f = x^2 at x = 10 with directions +1, -1: the second candidate wins,
        // g = xi_1 - xi_2 = 2 and x moves to 8.
        let mut oracle = ExactOracle::new(TestFunction::quadratic(1));
        let batch =
            PerturbationBatch::from_directions(vec![10.0], 1e-4, vec![vec![1.0], vec![-1.0]])
                .unwrap();
        let (next, rec) = step_from_batch(
            &batch,
            &params(1.0, 1e-4, 2, 1),
            &mut oracle,
            estimate_gradient,
        )
        .unwrap();
        assert_eq!(next, vec![8.0]);
        assert_eq!(rec.grad_norm, 2.0);
        assert_eq!(rec.queries, 2);
    }

    #[test]
    fn zero_estimate_leaves_point_unchanged() {
        let mut oracle = ExactOracle::new(TestFunction::quadratic(3));
        let mut rng = stream_rng(1, Stream::Directions);
        let x = vec![1.0, 2.0, 3.0];
        let (next, rec) = zo_rank_sgd_step_with(
            &x,
            &params(1.0, 0.1, 4, 2),
            &mut oracle,
            &mut rng,
            |b, o| {
                Ok(GradientEstimate {
                    vector: vec![0.0; b.dim()],
                    edge_count: 1,
                    weights: vec![0.0; o.m()],
                })
            },
        )
        .unwrap();
        assert_eq!(next, x);
        assert_eq!(rec.grad_norm, 0.0);
    }

    #[test]
    fn pairwise_reduction_matches_bit_for_bit() {
        let f = TestFunction::quadratic(5);
        let x = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        for seed in 0..100 {
            let mut oracle = ExactOracle::new(f);
            let (next, _) = zo_rank_sgd_step(
                &x,
                &params(0.3, 0.01, 2, 1),
                &mut oracle,
                &mut stream_rng(seed, Stream::Directions),
            )
            .unwrap();

            let b = sample_perturbations(&x, 2, 0.01, &mut stream_rng(seed, Stream::Directions))
                .unwrap();
            let s = sign(f.value(&b.candidates()[0]) - f.value(&b.candidates()[1]));
            let g = pairwise_estimate(s, &b.directions()[0], &b.directions()[1]).unwrap();
            assert_eq!(next, vector::offset(&x, -0.3, &g));
        }
    }

    #[test]
    fn line_search_example() {
        let mut oracle = ExactOracle::new(TestFunction::quadratic(2));
        let (x, p) = line_search_step(&[1.0, 0.0], &[1.0, 0.0], 1.0, 0.1, 3, &mut oracle).unwrap();
        assert_eq!(p, Some(1));
        assert!((x[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn line_search_without_progress() {
        let mut oracle = ExactOracle::new(TestFunction::quadratic(2));
        assert_eq!(
            line_search_step(&[1.0, 0.0], &[0.0, 0.0], 1.0, 0.5, 4, &mut oracle).unwrap(),
            (vec![1.0, 0.0], None)
        );
        assert_eq!(
            line_search_step(&[0.0, 0.0], &[1.0, -1.0], 1.0, 0.5, 4, &mut oracle).unwrap(),
            (vec![0.0, 0.0], None)
        );
        assert!(
            line_search_step(&[0.0, 0.0], &[f64::INFINITY, 0.0], 1.0, 0.5, 4, &mut oracle).is_err()
        );
    }

    #[test]
    fn step_with_line_search_meters_m_plus_l() {
        let mut oracle = Metered::new(ExactOracle::new(TestFunction::quadratic(4)));
        let mut p = params(1.0, 0.01, 10, 10);
        p.line_search = Some(super::super::config::LineSearch { l: 5, gamma: 0.1 });
        let (_, rec) = zo_rank_sgd_step(
            &[1.0; 4],
            &p,
            &mut oracle,
            &mut stream_rng(3, Stream::Directions),
        )
        .unwrap();
        assert_eq!(rec.queries, 15);
        assert_eq!(oracle.queries(), 15);
    }
}
