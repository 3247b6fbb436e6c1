//! Monte Carlo checks of the estimator's moment bounds.

use std::f64::consts::PI;

use rankgrad::dag::{edge_count, neighbor_pair_count};
use rankgrad::functions::{Constant, FunctionKind, Linear, Objective, TestFunction};
use rankgrad::rng::{standard_normal_vec, stream_rng, Stream};
use rankgrad::variance::{
    descent_inner_product, empirical_second_moment, estimate_m1, estimate_m2, lemma4_bound,
    BoundCheck, DEFAULT_METRIC_SAMPLES, DEFAULT_MOMENT_SAMPLES,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheckConfig {
    /// Dimensions for the `M1`/`M2` caps.
    pub dims: Vec<usize>,
    pub mu: f64,
    pub metric_samples: usize,
    pub moment_samples: usize,
    pub descent_samples: usize,
    pub seed: u64,
    /// Dimension and `(m, k)` pairs for the second-moment bound.
    pub moment_dim: usize,
    pub combos: Vec<(usize, usize)>,
    /// Allowed excess in standard errors.
    pub slack: f64,
}

impl Default for VarianceCheckConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 10, 100],
            mu: 0.01,
            metric_samples: DEFAULT_METRIC_SAMPLES,
            moment_samples: DEFAULT_MOMENT_SAMPLES,
            descent_samples: 100_000,
            seed: 0,
            moment_dim: 10,
            combos: vec![(2, 1), (5, 3), (10, 10), (100, 1)],
            slack: 3.0,
        }
    }
}

/// Test function used by the checks. Rosenbrock's sum is empty at `d = 1`,
/// which makes it the constant 0 there.
pub fn check_objective(kind: FunctionKind, d: usize) -> Result<Box<dyn Objective>> {
    Ok(match (kind, d) {
        (FunctionKind::Rosenbrock, 1) => Box::new(Constant(0.0)),
        _ => Box::new(TestFunction::new(kind, d)?),
    })
}

/// Evaluation point: a seeded Gaussian draw at benchmark scale (10 for the
/// quadratic, 1 around the minimizer's scale for Rosenbrock).
pub fn check_point(kind: FunctionKind, d: usize, seed: u64) -> Vec<f64> {
    let scale = match kind {
        FunctionKind::Quadratic => 10.0,
        FunctionKind::Rosenbrock => 1.0,
    };
    standard_normal_vec(&mut stream_rng(seed, Stream::InitialPoint), d)
        .into_iter()
        .map(|v| scale * v)
        .collect()
}

/// Descent direction: `E <grad f, S (xi1 - xi2)>` equals `(2/sqrt(pi)) ||grad f||`
/// on a linear function, and shrinking `mu` does not hurt on the quadratic.
pub fn descent_checks(cfg: &VarianceCheckConfig) -> Result<Vec<BoundCheck>> {
    let c: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0 - 0.45).collect();
    let lin = Linear(c.clone());
    let x = vec![0.5; c.len()];
    let est = descent_inner_product(&lin, &x, 1.0, cfg.descent_samples, cfg.seed)?;
    let target = 2.0 / PI.sqrt() * rankgrad::vector::norm(&c);
    let mut out = vec![BoundCheck::equal(
        "descent",
        "linear d=10: E<grad f, S(xi1 - xi2)> = (2/sqrt(pi)) ||grad f||",
        est.value,
        est.standard_error,
        target,
        cfg.slack,
    )];

    let f = TestFunction::quadratic(10);
    let x = vec![10.0 / 10f64.sqrt(); 10];
    let small = descent_inner_product(&f, &x, 1e-3, cfg.descent_samples, cfg.seed)?;
    let large = descent_inner_product(&f, &x, 1.0, cfg.descent_samples, cfg.seed)?;
    out.push(BoundCheck::upper(
        "descent",
        "quadratic d=10, ||x||=10: estimate at mu=1 <= estimate at mu=1e-3",
        large.value,
        large.standard_error,
        small.value,
        0.0,
    ));
    Ok(out)
}

/// `M1 <= 2d`, `M2 <= 2d` for both test functions, and `M1 <= 32/pi` on the
/// quadratic.
pub fn metric_checks(cfg: &VarianceCheckConfig) -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    for kind in [FunctionKind::Quadratic, FunctionKind::Rosenbrock] {
        for &d in &cfg.dims {
            let f = check_objective(kind, d)?;
            let x = check_point(kind, d, cfg.seed);
            let m1 = estimate_m1(f.as_ref(), &x, cfg.mu, cfg.metric_samples, cfg.seed)?;
            let m2 = estimate_m2(f.as_ref(), &x, cfg.mu, cfg.metric_samples, cfg.seed)?;
            let cap = 2.0 * d as f64;
            out.push(BoundCheck::upper(
                "metric-cap",
                format!("{kind} d={d}: M1 <= 2d"),
                m1.value,
                m1.standard_error,
                cap,
                cfg.slack,
            ));
            out.push(BoundCheck::upper(
                "metric-cap",
                format!("{kind} d={d}: M2 <= 2d"),
                m2.value,
                m2.standard_error,
                cap,
                cfg.slack,
            ));
            if kind == FunctionKind::Quadratic {
                out.push(BoundCheck::upper(
                    "metric-cap",
                    format!("{kind} d={d}: M1 <= 32/pi"),
                    m1.value,
                    m1.standard_error,
                    32.0 / PI,
                    cfg.slack,
                ));
            }
        }
    }
    Ok(out)
}

/// `E ||g||^2 <= 2d/|E| + N/|E|^2 M2 + M1` with `M1`, `M2` estimated at the
/// same point. The slack uses the combined standard error of both sides.
pub fn second_moment_checks(cfg: &VarianceCheckConfig) -> Result<Vec<BoundCheck>> {
    let d = cfg.moment_dim;
    let f = TestFunction::quadratic(d);
    let x = check_point(FunctionKind::Quadratic, d, cfg.seed);
    let m1 = estimate_m1(&f, &x, cfg.mu, cfg.metric_samples, cfg.seed)?;
    let m2 = estimate_m2(&f, &x, cfg.mu, cfg.metric_samples, cfg.seed)?;
    cfg.combos
        .iter()
        .map(|&(m, k)| {
            let e = edge_count(m, k)? as f64;
            let ratio = neighbor_pair_count(m, k)? as f64 / (e * e);
            let bound = lemma4_bound(m, k, d, m1.value, m2.value)?;
            let emp = empirical_second_moment(&f, &x, cfg.mu, m, k, cfg.moment_samples, cfg.seed)?;
            let se = (emp.standard_error.powi(2)
                + m1.standard_error.powi(2)
                + (ratio * m2.standard_error).powi(2))
            .sqrt();
            Ok(BoundCheck::upper(
                "second-moment",
                format!("quadratic d={d} (m={m}, k={k}): E||g||^2 <= 2d/|E| + N/|E|^2 M2 + M1"),
                emp.value,
                se,
                bound,
                cfg.slack,
            ))
        })
        .collect()
}

pub fn variance_checks(cfg: &VarianceCheckConfig) -> Result<Vec<BoundCheck>> {
    let mut out = descent_checks(cfg)?;
    out.extend(metric_checks(cfg)?);
    out.extend(second_moment_checks(cfg)?);
    Ok(out)
}

/// One line per check:
///
/// ```text
/// PASS metric-cap  quadratic d=10: M1 <= 2d  estimate=1.2641 se=0.0031 bound=20 slack=3
/// ```
pub fn format_report(checks: &[BoundCheck]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!(
            "{} {:<13} {}  estimate={} se={} bound={} slack={}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.check,
            c.metric,
            c.estimate,
            c.standard_error,
            c.bound,
            c.slack
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    s.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    s
}
