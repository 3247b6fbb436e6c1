use serde::{Deserialize, Serialize};

use super::{OracleError, OracleRequest, RankingOracle};
use crate::functions::Objective;
use crate::ranking::RankingOutcome;
use crate::rng::{standard_normal, RankRng};

/// Additive Gaussian noise on objective values. `sigma = 0` is noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct NoiseSpec {
    pub sigma: f64,
}

impl NoiseSpec {
    pub fn new(sigma: f64) -> Result<Self, OracleError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(OracleError::InvalidRequest(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }
}

fn evaluate<F: Objective + ?Sized>(f: &F, points: &[Vec<f64>]) -> Result<Vec<f64>, OracleError> {
    points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let v = f.value(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(OracleError::NonFinite {
                    index: i + 1,
                    value: v,
                })
            }
        })
        .collect()
}

/// The `k` smallest values, ascending, ties to the lower index.
fn top_k(values: &[f64], k: usize) -> RankingOutcome {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // values are finite here, so total_cmp agrees with <
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order.truncate(k);
    RankingOutcome::from_zero_based(values.len(), order).expect("top-k of a valid request")
}

/// Ranks the request by exact objective values.
pub fn exact_rank<F: Objective + ?Sized>(
    f: &F,
    request: &OracleRequest,
) -> Result<RankingOutcome, OracleError> {
    let values = evaluate(f, &request.points)?;
    Ok(top_k(&values, request.k))
}

/// Ranks `f(x_i) + eps_i` with `eps_i ~ N(0, sigma^2)` drawn once per request,
/// one draw per point in order. With `sigma = 0` nothing is drawn and the
/// result is exactly [`exact_rank`].
pub fn noisy_rank<F: Objective + ?Sized, R: rand::Rng + ?Sized>(
    f: &F,
    request: &OracleRequest,
    noise: NoiseSpec,
    rng: &mut R,
) -> Result<RankingOutcome, OracleError> {
    let mut values = evaluate(f, &request.points)?;
    if noise.sigma > 0.0 {
        for v in &mut values {
            *v += noise.sigma * standard_normal(rng);
        }
    }
    Ok(top_k(&values, request.k))
}

/// 0-based index of the smallest value, ties to the lowest index.
pub fn argmin_select<F: Objective + ?Sized>(
    f: &F,
    points: &[Vec<f64>],
) -> Result<usize, OracleError> {
    if points.is_empty() {
        return Err(OracleError::InvalidRequest(
            "no points to select from".into(),
        ));
    }
    let values = evaluate(f, points)?;
    Ok(top_k(&values, 1).best())
}

/// Oracle backed by exact objective values.
#[derive(Debug, Clone)]
pub struct ExactOracle<F> {
    pub f: F,
}

impl<F: Objective> ExactOracle<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F: Objective> RankingOracle for ExactOracle<F> {
    fn rank(&mut self, request: &OracleRequest) -> Result<RankingOutcome, OracleError> {
        exact_rank(&self.f, request)
    }
}

/// Oracle backed by noisy objective values. Noise is resampled on every
/// request, including repeated queries of the same point.
#[derive(Debug, Clone)]
pub struct NoisyOracle<F> {
    pub f: F,
    pub noise: NoiseSpec,
    rng: RankRng,
}

impl<F: Objective> NoisyOracle<F> {
    pub fn new(f: F, noise: NoiseSpec, rng: RankRng) -> Self {
        Self { f, noise, rng }
    }
}

impl<F: Objective> RankingOracle for NoisyOracle<F> {
    fn rank(&mut self, request: &OracleRequest) -> Result<RankingOutcome, OracleError> {
        noisy_rank(&self.f, request, self.noise, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::TestFunction;
    use crate::rng::{stream_rng, stream_rng_raw, Stream};

    fn sq(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn req(points: &[f64], k: usize) -> OracleRequest {
        OracleRequest::new(points.iter().map(|&p| vec![p]).collect(), k).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(
            exact_rank(&sq, &req(&[3.0, 1.0, 2.0], 2))
                .unwrap()
                .to_one_based(),
            vec![2, 3]
        );
        assert_eq!(
            exact_rank(&sq, &req(&[1.0, -1.0], 2))
                .unwrap()
                .to_one_based(),
            vec![1, 2]
        );
        let full = exact_rank(&sq, &req(&[0.5, -3.0, 0.1, 2.0], 4)).unwrap();
        assert_eq!(full.to_one_based(), vec![3, 1, 4, 2]);
    }

    #[test]
    fn non_finite_reports_index() {
        let f = |x: &[f64]| if x[0] > 1.0 { f64::NAN } else { x[0] };
        let err = exact_rank(&f, &req(&[0.0, 2.0], 1)).unwrap_err();
        assert!(matches!(err, OracleError::NonFinite { index: 2, .. }));
        assert!(argmin_select(&f, &[vec![0.0], vec![3.0]]).is_err());
    }

    #[test]
    fn argmin_examples() {
        assert_eq!(
            argmin_select(&sq, &[vec![1.0], vec![0.9], vec![0.99]]),
            Ok(1)
        );
        assert_eq!(argmin_select(&sq, &[vec![4.0]]), Ok(0));
        assert_eq!(
            argmin_select(&sq, &[vec![1.0], vec![2.0], vec![-1.0]]),
            Ok(0)
        );
        assert!(argmin_select(&sq, &[]).is_err());
    }

    #[test]
    fn zero_noise_is_exact() {
        let f = TestFunction::quadratic(3);
        let mut rng = stream_rng(5, Stream::Directions);
        for seed in 0..50 {
            let points = (0..6)
                .map(|_| crate::rng::standard_normal_vec(&mut rng, 3))
                .collect();
            let r = OracleRequest::new(points, 4).unwrap();
            let mut noise_rng = stream_rng(seed, Stream::OracleNoise);
            assert_eq!(
                noisy_rank(&f, &r, NoiseSpec::new(0.0).unwrap(), &mut noise_rng).unwrap(),
                exact_rank(&f, &r).unwrap()
            );
        }
    }

    #[test]
    fn small_noise_rarely_flips_large_gaps() {
        // values 0 and 10; flip needs a 10 / (0.01 sqrt 2) sigma event
        let f = |x: &[f64]| x[0];
        let r = req(&[0.0, 10.0], 1);
        let noise = NoiseSpec::new(0.01).unwrap();
        let wins = (0..10_000u64)
            .filter(|&s| {
                noisy_rank(&f, &r, noise, &mut stream_rng_raw(s, 1))
                    .unwrap()
                    .best()
                    == 0
            })
            .count();
        assert!(wins as f64 / 1e4 >= 0.999);
    }

    #[test]
    fn noise_on_ties_is_symmetric() {
        let f = |_: &[f64]| 0.0;
        let r = req(&[0.0, 0.0], 1);
        let noise = NoiseSpec::new(1.0).unwrap();
        let first = (0..10_000u64)
            .filter(|&s| {
                noisy_rank(&f, &r, noise, &mut stream_rng_raw(s, 1))
                    .unwrap()
                    .best()
                    == 0
            })
            .count();
        let freq = first as f64 / 1e4;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(NoiseSpec::new(-1.0).is_err());
        assert!(NoiseSpec::new(f64::NAN).is_err());
    }
}
