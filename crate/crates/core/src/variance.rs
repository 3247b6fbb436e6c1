//! Monte Carlo checks of the estimator's first and second moments.
//!
//! `M1` and `M2` are defined as maxima over `x`; everything here is evaluated
//! at one fixed `x`, so estimates are lower bounds of the maxima. Upper bounds
//! on `M1`/`M2` must still hold pointwise, which is what the checks assert.
//!
//! Sampling is split into fixed-size chunks. Chunk `c` draws from stream
//! `Stream::MonteCarlo + c` of the given seed and chunk results are combined
//! in chunk order, so estimates depend only on `(seed, n)`, not on the thread
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dag::{edge_count, neighbor_pair_count};
use crate::error::{Error, Result};
use crate::estimator::{estimate_gradient, sign};
use crate::functions::Objective;
use crate::oracle::{exact_rank, OracleRequest};
use crate::perturbation::sample_perturbations;
use crate::rng::{standard_normal_vec, stream_rng_raw, RankRng, Stream};
use crate::vector;

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 1_000;
/// Default sample count for `M1`/`M2`.
pub const DEFAULT_METRIC_SAMPLES: usize = 200_000;
/// Default sample count for second moments.
pub const DEFAULT_MOMENT_SAMPLES: usize = 10_000;

const CHUNK: usize = 2_048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub n_samples: usize,
    pub x: Vec<f64>,
    pub mu: f64,
}

fn check_args(x: &[f64], mu: f64, n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n,
            min: MIN_SAMPLES,
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyPoint);
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidSmoothing(mu));
    }
    Ok(())
}

/// Runs `work(rng, count)` over chunks of `n` samples in parallel; results
/// come back in chunk order.
fn chunked<T, W>(n: usize, seed: u64, work: W) -> Result<Vec<T>>
where
    T: Send,
    W: Fn(&mut RankRng, usize) -> Result<T> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(n - c * CHUNK);
            let mut rng = stream_rng_raw(seed, Stream::MonteCarlo as u64 + c as u64);
            work(&mut rng, count)
        })
        .collect()
}

fn value_at<F: Objective + ?Sized>(f: &F, x: &[f64]) -> Result<f64> {
    let v = f.value(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { index: 1, value: v })
    }
}

/// `Sign(f(x + mu a) - f(x + mu b))`
fn comparison<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    mu: f64,
    a: &[f64],
    b: &[f64],
) -> Result<f64> {
    let fa = value_at(f, &vector::offset(x, mu, a))?;
    let fb = value_at(f, &vector::offset(x, mu, b))?;
    Ok(sign(fa - fb))
}

/// `(xi1, xi2)` and `S (xi1 - xi2)` for one sample.
fn pair_sample<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    mu: f64,
    rng: &mut RankRng,
) -> Result<Vec<f64>> {
    let d = x.len();
    let a = standard_normal_vec(rng, d);
    let b = standard_normal_vec(rng, d);
    let s = comparison(f, x, mu, &a, &b)?;
    Ok(a.iter().zip(&b).map(|(ai, bi)| s * (ai - bi)).collect())
}

/// Mean and standard error of scalar samples produced per chunk as
/// `(sum, sum of squares)` around a shift.
fn mean_se(parts: &[(f64, f64)], n: usize) -> (f64, f64) {
    let (s, s2) = parts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let nf = n as f64;
    let mean = s / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// `|| E[S (xi1 - xi2)] ||^2` at `x`, with a jackknife standard error.
pub fn estimate_m1<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    mu: f64,
    n: usize,
    seed: u64,
) -> Result<MetricEstimate> {
    check_args(x, mu, n)?;
    let d = x.len();
    let sums = chunked(n, seed, |rng, count| {
        let mut acc = vec![0.0; d];
        for _ in 0..count {
            vector::axpy(1.0, &pair_sample(f, x, mu, rng)?, &mut acc);
        }
        Ok(acc)
    })?;
    let mut total = vec![0.0; d];
    for s in &sums {
        vector::axpy(1.0, s, &mut total);
    }
    let nf = n as f64;
    let value = vector::norm_sq(&total) / (nf * nf);

    // Leave-one-out values are ||total - v_i||^2 / (n-1)^2; the second pass
    // regenerates the same samples and accumulates their offsets from
    // ||total||^2 / (n-1)^2, which keeps the variance sum well conditioned.
    let denom = (nf - 1.0) * (nf - 1.0);
    let offsets = chunked(n, seed, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let v = pair_sample(f, x, mu, rng)?;
            let delta = (vector::norm_sq(&v) - 2.0 * vector::dot(&total, &v)) / denom;
            s += delta;
            s2 += delta * delta;
        }
        Ok((s, s2))
    })?;
    let (s, s2) = offsets
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let mean = s / nf;
    let spread = (s2 - nf * mean * mean).max(0.0);
    let se = ((nf - 1.0) / nf * spread).sqrt();
    Ok(MetricEstimate {
        value,
        standard_error: se,
        n_samples: n,
        x: x.to_vec(),
        mu,
    })
}

/// `E[S12 S13 <xi1 - xi2, xi1 - xi3>]` at `x`.
pub fn estimate_m2<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    mu: f64,
    n: usize,
    seed: u64,
) -> Result<MetricEstimate> {
    check_args(x, mu, n)?;
    let d = x.len();
    let parts = chunked(n, seed, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let a = standard_normal_vec(rng, d);
            let b = standard_normal_vec(rng, d);
            let c = standard_normal_vec(rng, d);
            let fa = value_at(f, &vector::offset(x, mu, &a))?;
            let fb = value_at(f, &vector::offset(x, mu, &b))?;
            let fc = value_at(f, &vector::offset(x, mu, &c))?;
            let z = sign(fa - fb)
                * sign(fa - fc)
                * vector::dot(&vector::sub(&a, &b), &vector::sub(&a, &c));
            s += z;
            s2 += z * z;
        }
        Ok((s, s2))
    })?;
    let (value, se) = mean_se(&parts, n);
    Ok(MetricEstimate {
        value,
        standard_error: se,
        n_samples: n,
        x: x.to_vec(),
        mu,
    })
}

/// `2d/|E| + N(E)/|E|^2 * m2 + m1`
pub fn lemma4_bound(m: usize, k: usize, d: usize, m1: f64, m2: f64) -> Result<f64> {
    let e = edge_count(m, k)? as f64;
    let nb = neighbor_pair_count(m, k)? as f64;
    if !(m1 >= 0.0 && m2.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "metrics must be finite with m1 >= 0, got m1 = {m1}, m2 = {m2}"
        )));
    }
    Ok(2.0 * d as f64 / e + nb / (e * e) * m2 + m1)
}

/// `E ||g~(x)||^2` of the rank estimator under exact `(m, k)` ranking.
pub fn empirical_second_moment<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    mu: f64,
    m: usize,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<MetricEstimate> {
    check_args(x, mu, n)?;
    edge_count(m, k)?;
    let parts = chunked(n, seed, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let batch = sample_perturbations(x, m, mu, rng)?;
            let request = OracleRequest::new(batch.candidates().to_vec(), k)?;
            let outcome = exact_rank(f, &request)?;
            let z = vector::norm_sq(&estimate_gradient(&batch, &outcome)?.vector);
            s += z;
            s2 += z * z;
        }
        Ok((s, s2))
    })?;
    let (value, se) = mean_se(&parts, n);
    Ok(MetricEstimate {
        value,
        standard_error: se,
        n_samples: n,
        x: x.to_vec(),
        mu,
    })
}

/// `E <grad f(x), S (xi1 - xi2)>`; needs an analytic gradient.
pub fn descent_inner_product<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    mu: f64,
    n: usize,
    seed: u64,
) -> Result<MetricEstimate> {
    check_args(x, mu, n)?;
    let grad = f
        .gradient(x)
        .ok_or_else(|| Error::InvalidConfig("descent check needs an analytic gradient".into()))?;
    if !vector::all_finite(&grad) {
        return Err(Error::NonFinite {
            index: 1,
            value: f64::NAN,
        });
    }
    let parts = chunked(n, seed, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let z = vector::dot(&grad, &pair_sample(f, x, mu, rng)?);
            s += z;
            s2 += z * z;
        }
        Ok((s, s2))
    })?;
    let (value, se) = mean_se(&parts, n);
    Ok(MetricEstimate {
        value,
        standard_error: se,
        n_samples: n,
        x: x.to_vec(),
        mu,
    })
}

/// One pass/fail line of a variance check report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub check: String,
    pub metric: String,
    pub estimate: f64,
    pub standard_error: f64,
    pub bound: f64,
    /// `estimate <= bound + slack * standard_error` (or `>=` for lower bounds).
    pub slack: f64,
    pub passed: bool,
}

impl BoundCheck {
    /// Passes when `estimate <= bound + slack * se`.
    pub fn upper(
        check: impl Into<String>,
        metric: impl Into<String>,
        est: f64,
        se: f64,
        bound: f64,
        slack: f64,
    ) -> Self {
        Self {
            check: check.into(),
            metric: metric.into(),
            estimate: est,
            standard_error: se,
            bound,
            slack,
            passed: est <= bound + slack * se,
        }
    }

    /// Passes when `|estimate - target| <= slack * se`.
    pub fn equal(
        check: impl Into<String>,
        metric: impl Into<String>,
        est: f64,
        se: f64,
        target: f64,
        slack: f64,
    ) -> Self {
        Self {
            check: check.into(),
            metric: metric.into(),
            estimate: est,
            standard_error: se,
            bound: target,
            slack,
            passed: (est - target).abs() <= slack * se,
        }
    }
}
