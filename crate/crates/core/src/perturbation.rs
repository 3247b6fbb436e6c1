use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::standard_normal_vec;
use crate::vector;

/// A base point, a smoothing radius and `m` Gaussian directions, together with
/// the perturbed candidates `base_point + mu * direction`.
///
/// Candidates are always derived from the directions at construction, so the
/// estimator never has to recover a direction by dividing by `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBatch", into = "RawBatch")]
pub struct PerturbationBatch {
    base_point: Vec<f64>,
    mu: f64,
    directions: Vec<Vec<f64>>,
    candidates: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawBatch {
    base_point: Vec<f64>,
    mu: f64,
    directions: Vec<Vec<f64>>,
}

impl TryFrom<RawBatch> for PerturbationBatch {
    type Error = Error;

    fn try_from(raw: RawBatch) -> Result<Self> {
        PerturbationBatch::from_directions(raw.base_point, raw.mu, raw.directions)
    }
}

impl From<PerturbationBatch> for RawBatch {
    fn from(b: PerturbationBatch) -> Self {
        RawBatch {
            base_point: b.base_point,
            mu: b.mu,
            directions: b.directions,
        }
    }
}

impl PerturbationBatch {
    /// Builds a batch from explicit directions.
    pub fn from_directions(
        base_point: Vec<f64>,
        mu: f64,
        directions: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate(&base_point, directions.len(), mu)?;
        let d = base_point.len();
        if let Some(bad) = directions.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        let candidates = directions
            .iter()
            .map(|dir| vector::offset(&base_point, mu, dir))
            .collect();
        Ok(Self {
            base_point,
            mu,
            directions,
            candidates,
        })
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }

    /// Number of candidates `m`.
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.base_point.len()
    }
}

fn validate(base_point: &[f64], m: usize, mu: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::TooFewCandidates(m));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidSmoothing(mu));
    }
    if base_point.is_empty() {
        return Err(Error::EmptyPoint);
    }
    Ok(())
}

/// Draws `m` i.i.d. standard-normal directions around `base_point`.
///
/// Directions are drawn one full vector at a time, in candidate order, so the
/// batch is a deterministic function of the generator state.
pub fn sample_perturbations<R: rand::Rng + ?Sized>(
    base_point: &[f64],
    m: usize,
    mu: f64,
    rng: &mut R,
) -> Result<PerturbationBatch> {
    validate(base_point, m, mu)?;
    let d = base_point.len();
    let directions = (0..m).map(|_| standard_normal_vec(rng, d)).collect();
    PerturbationBatch::from_directions(base_point.to_vec(), mu, directions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn same_seed_gives_identical_directions() {
        let x = vec![0.0; 3];
        let a = sample_perturbations(&x, 2, 0.1, &mut stream_rng(7, Stream::Directions)).unwrap();
        let b = sample_perturbations(&x, 2, 0.1, &mut stream_rng(7, Stream::Directions)).unwrap();
        assert_eq!(a, b);
        for (c, dir) in a.candidates().iter().zip(a.directions()) {
            for (ci, di) in c.iter().zip(dir) {
                assert_eq!(*ci, 0.1 * di);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = stream_rng(0, Stream::Directions);
        assert_eq!(
            sample_perturbations(&[0.0], 1, 0.1, &mut rng),
            Err(Error::TooFewCandidates(1))
        );
        assert_eq!(
            sample_perturbations(&[0.0], 2, 0.0, &mut rng),
            Err(Error::InvalidSmoothing(0.0))
        );
        assert!(matches!(
            sample_perturbations(&[0.0], 2, -1.0, &mut rng),
            Err(Error::InvalidSmoothing(_))
        ));
        assert_eq!(
            sample_perturbations(&[], 2, 0.1, &mut rng),
            Err(Error::EmptyPoint)
        );
    }

    #[test]
    fn serde_rederives_candidates() {
        let x = vec![1.0, -2.0];
        let b = sample_perturbations(&x, 3, 0.5, &mut stream_rng(1, Stream::Directions)).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert!(!json.contains("candidates"));
        let back: PerturbationBatch = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }

    // Monte Carlo check of the first two moments against N(0, 1).
    #[test]
    fn directions_have_standard_normal_moments() {
        let d = 4;
        let n_batches = 50_000; // 2 directions each -> 1e5 samples per coordinate
        let mut rng = stream_rng(2024, Stream::Directions);
        let mut sum = vec![0.0; d];
        let mut sum_sq = vec![0.0; d];
        let mut n = 0usize;
        for _ in 0..n_batches {
            let b = sample_perturbations(&vec![0.0; d], 2, 1.0, &mut rng).unwrap();
            for dir in b.directions() {
                for (j, v) in dir.iter().enumerate() {
                    sum[j] += v;
                    sum_sq[j] += v * v;
                }
                n += 1;
            }
        }
        let nf = n as f64;
        for j in 0..d {
            let mean = sum[j] / nf;
            let var = sum_sq[j] / nf - mean * mean;
            // tolerance 3 (d / n)^(1/2) on the mean; 3 sqrt(2/n) on the variance
            assert!(
                mean.abs() < 3.0 * (d as f64 / nf).sqrt(),
                "coordinate {j} mean {mean}"
            );
            assert!(
                (var - 1.0).abs() < 3.0 * (2.0 / nf).sqrt(),
                "coordinate {j} var {var}"
            );
        }
    }
}
