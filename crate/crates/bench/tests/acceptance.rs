//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs under a custom harness so the report is always printed; the process
//! exits non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use rand::Rng;
use rankgrad::functions::{grad_function, Objective};
use rankgrad::optimizer::{run_interactive, InteractiveParams, Schedule};
use rankgrad::prelude::*;
use rankgrad::rng::standard_normal_vec;
use rankgrad::variance::BoundCheck;
use rankgrad::vector;
use rankgrad_bench::variance_check::{descent_checks, metric_checks, second_moment_checks};
use rankgrad_bench::{
    default_sigmas, initial_point, mk_grid_study, noise_sweep, preset, run_experiment, run_seed,
    VarianceCheckConfig,
};
use rankgrad_service::store::lock;
use rankgrad_service::{router, GroundTruth, Session, Store};
use serde_json::{json, Value};
use tower::ServiceExt;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// ---------------------------------------------------------------- oracles

/// Ordered pairs `(i, j)` with `i` known to beat `j`, by checking all `m^2` pairs.
fn implied_pairs(outcome: &RankingOutcome) -> BTreeSet<(usize, usize)> {
    let pos = outcome.positions();
    let mut out = BTreeSet::new();
    for i in 0..outcome.m() {
        for j in 0..outcome.m() {
            let beats = match (pos[i], pos[j]) {
                (Some(a), Some(b)) => a < b,
                (Some(_), None) => true,
                _ => false,
            };
            if beats {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Ordered pairs of distinct edges sharing an endpoint.
fn brute_neighbor_pairs(edges: &BTreeSet<(usize, usize)>) -> u64 {
    let e: Vec<_> = edges.iter().collect();
    let mut n = 0;
    for (a, x) in e.iter().enumerate() {
        for (b, y) in e.iter().enumerate() {
            if a != b && (x.0 == y.0 || x.0 == y.1 || x.1 == y.0 || x.1 == y.1) {
                n += 1;
            }
        }
    }
    n
}

fn edge_sum_estimate(batch: &PerturbationBatch, outcome: &RankingOutcome) -> Vec<f64> {
    let edges = implied_pairs(outcome);
    let mut g = vec![0.0; batch.dim()];
    for &(i, j) in &edges {
        vector::axpy(
            1.0,
            &vector::sub(&batch.directions()[j], &batch.directions()[i]),
            &mut g,
        );
    }
    vector::scale(1.0 / edges.len() as f64, &g)
}

fn random_outcome<R: Rng>(rng: &mut R, m: usize, k: usize) -> RankingOutcome {
    let mut p: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    RankingOutcome::from_zero_based(m, p[..k].to_vec()).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------- criteria

fn graph_statistics() -> Verdict {
    let mut rng = stream_rng(11, Stream::MonteCarlo);
    let mut cases = 0;
    for m in 2..=12 {
        for k in 1..=m {
            for _ in 0..5 {
                let outcome = random_outcome(&mut rng, m, k);
                let brute = implied_pairs(&outcome);
                let dag = build_dag(&outcome);
                let built: BTreeSet<_> = dag.edges().iter().copied().collect();
                ensure(built == brute, format!("edge set differs at m={m}, k={k}"))?;
                ensure(
                    edge_count(m, k).unwrap() == brute.len() as u64,
                    format!("|E| wrong at m={m}, k={k}"),
                )?;
                ensure(
                    neighbor_pair_count(m, k).unwrap() == brute_neighbor_pairs(&brute),
                    format!("N(E) wrong at m={m}, k={k}"),
                )?;
                cases += 1;
            }
        }
    }
    Ok(format!(
        "|E| and N(E) match brute force on {cases} outcomes, 2 <= m <= 12"
    ))
}

fn estimator_forms() -> Verdict {
    let mut rng = stream_rng(12, Stream::MonteCarlo);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(2..=12);
        let k = rng.random_range(1..=m);
        let d = rng.random_range(1..=20);
        let outcome = random_outcome(&mut rng, m, k);
        let x = standard_normal_vec(&mut rng, d);
        let batch = sample_perturbations(&x, m, 0.1, &mut rng).unwrap();
        let g = estimate_gradient(&batch, &outcome).unwrap();
        let oracle = edge_sum_estimate(&batch, &outcome);
        let rel = vector::norm(&vector::sub(&g.vector, &oracle))
            / vector::norm(&oracle).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure(
            rel <= 1e-12,
            format!("relative error {rel:e} at m={m}, k={k}, d={d}"),
        )?;
        let sum: f64 = rank_weights(&outcome).iter().sum();
        ensure(sum == 0.0, format!("weights sum to {sum} at m={m}, k={k}"))?;
    }
    Ok(format!(
        "1000 random outcomes, worst relative error {worst:.1e}, weights sum to 0"
    ))
}

fn pairwise_reduction() -> Verdict {
    let f = TestFunction::quadratic(8);
    for seed in 0..500u64 {
        let x = standard_normal_vec(&mut stream_rng(seed, Stream::InitialPoint), 8);
        let batch =
            sample_perturbations(&x, 2, 0.05, &mut stream_rng(seed, Stream::Directions)).unwrap();
        let outcome = exact_rank(
            &f,
            &OracleRequest::new(batch.candidates().to_vec(), 1).unwrap(),
        )
        .unwrap();
        let g = estimate_gradient(&batch, &outcome).unwrap().vector;
        // Independent draw of the same two directions.
        let mut rng = stream_rng(seed, Stream::Directions);
        let (xi1, xi2) = (
            standard_normal_vec(&mut rng, 8),
            standard_normal_vec(&mut rng, 8),
        );
        let s = f.value(&vector::offset(&x, 0.05, &xi1)) - f.value(&vector::offset(&x, 0.05, &xi2));
        let p = pairwise_estimate(s, &xi1, &xi2).unwrap();
        ensure(g == p, format!("estimates differ at seed {seed}"))?;
    }

    // Whole runs: the (2, 1) optimizer against a hand-rolled pairwise SGD loop.
    for seed in 0..10u64 {
        let (d, eta, mu, iters) = (8, 0.05, 0.01, 100);
        let x0 = standard_normal_vec(&mut stream_rng(seed, Stream::InitialPoint), d);
        let config = OptimizerConfig::new(eta, mu, 2, 1, iters);
        let mut oracle = Metered::new(ExactOracle::new(f));
        let traj = run(
            &config,
            &mut oracle,
            &x0,
            &mut stream_rng(seed, Stream::Directions),
            None,
        )
        .unwrap();

        let mut rng = stream_rng(seed, Stream::Directions);
        let mut x = x0.clone();
        for r in &traj.records {
            let (xi1, xi2) = (
                standard_normal_vec(&mut rng, d),
                standard_normal_vec(&mut rng, d),
            );
            let s = f.value(&vector::offset(&x, mu, &xi1)) - f.value(&vector::offset(&x, mu, &xi2));
            x = vector::offset(&x, -eta, &pairwise_estimate(s, &xi1, &xi2).unwrap());
            ensure(
                x == r.point_after,
                format!("trajectories diverge at seed {seed}, t = {}", r.t),
            )?;
        }
    }
    Ok("(2, 1) estimate and 10 full runs equal the pairwise form bit for bit".into())
}

fn report_checks(checks: Vec<BoundCheck>) -> Verdict {
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        return Ok(format!("{} checks within bounds", checks.len()));
    }
    let detail = failed
        .iter()
        .map(|c| {
            format!(
                "{} {}: {:.4} (se {:.4}) vs {:.4}",
                c.check, c.metric, c.estimate, c.standard_error, c.bound
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Err(format!(
        "{} of {} checks out of bounds: {detail}",
        failed.len(),
        checks.len()
    ))
}

fn descent_direction() -> Verdict {
    report_checks(descent_checks(&VarianceCheckConfig::default()).map_err(|e| e.to_string())?)
}

fn metric_caps() -> Verdict {
    report_checks(metric_checks(&VarianceCheckConfig::default()).map_err(|e| e.to_string())?)
}

fn second_moment_bound() -> Verdict {
    report_checks(second_moment_checks(&VarianceCheckConfig::default()).map_err(|e| e.to_string())?)
}

fn mk_ordering() -> Verdict {
    let base = preset("quadratic-mk").unwrap();
    let study =
        mk_grid_study(&base, &[(10, 1), (10, 5), (10, 10), (100, 1)]).map_err(|e| e.to_string())?;
    let fin = |m, k| study.row(m, k).unwrap().outcome.aggregate.final_mean();
    let (a, b, c, e) = (fin(10, 1), fin(10, 5), fin(10, 10), fin(100, 1));
    let line =
        format!("final mean f: (10,1) {a:.3}, (10,5) {b:.3}, (10,10) {c:.3}, (100,1) {e:.3}");
    ensure(c < e, format!("(10,10) not below (100,1): {line}"))?;
    ensure(a >= b && b >= c, format!("not monotone in k: {line}"))?;
    Ok(line)
}

fn convergence_trend() -> Verdict {
    let f = TestFunction::quadratic(100);
    let mut medians = Vec::new();
    for t in [100usize, 1_000, 10_000] {
        let mut spec = preset("quadratic-theorem").unwrap();
        spec.optimizer.iterations = t;
        spec.optimizer.schedule = Some(Schedule::Theorem { c_d: 1.0 });
        let out = run_experiment(&spec).map_err(|e| e.to_string())?;
        ensure(out.failures.is_empty(), format!("failed seeds at T = {t}"))?;
        let mins: Vec<f64> = out
            .runs
            .iter()
            .map(|r| {
                let last = vector::norm(&grad_function(&f, r.trajectory.final_point()).unwrap());
                r.trajectory
                    .records
                    .iter()
                    .filter_map(|x| x.true_grad_norm)
                    .fold(last, f64::min)
            })
            .collect();
        medians.push((t, median(mins)));
    }
    let line = medians
        .iter()
        .map(|(t, v)| format!("T={t}: {v:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(
        medians.windows(2).all(|w| w[1].1 < w[0].1),
        format!("median min ||grad f|| not decreasing: {line}"),
    )?;
    Ok(format!("median min ||grad f||: {line}"))
}

fn exact_monotonicity() -> Verdict {
    let mut n = 0;
    for name in ["quadratic-mk", "rosenbrock-mk"] {
        let mut spec = preset(name).unwrap();
        spec.grid.clear();
        let out = run_experiment(&spec).map_err(|e| e.to_string())?;
        ensure(out.failures.is_empty(), format!("{name}: failed seeds"))?;
        for r in &out.runs {
            let curve = r.curve();
            for w in curve.windows(2) {
                ensure(
                    w[1].1 <= w[0].1,
                    format!(
                        "{name} seed {}: f rose from {} to {}",
                        r.seed, w[0].1, w[1].1
                    ),
                )?;
            }
            n += 1;
        }
    }
    Ok(format!(
        "f non-increasing along {n} line-search trajectories (quadratic and Rosenbrock)"
    ))
}

fn noise_robustness() -> Verdict {
    let base = preset("quadratic-noise").unwrap();
    let quiet = base.with_noise(0.0);
    for seed in quiet.seeds.clone() {
        let noisy = run_seed(&quiet, seed).map_err(|e| e.to_string())?;
        let f = quiet.test_function().unwrap();
        let mut oracle = Metered::new(ExactOracle::new(f));
        let exact = run(
            &quiet.effective_config(),
            &mut oracle,
            &initial_point(&quiet, seed),
            &mut stream_rng(seed, Stream::Directions),
            Some(&f as &dyn Objective),
        )
        .map_err(|e| e.to_string())?;
        ensure(
            noisy.trajectory == exact,
            format!("sigma = 0 differs from the exact oracle at seed {seed}"),
        )?;
    }
    let levels = noise_sweep(&base, &default_sigmas()).map_err(|e| e.to_string())?;
    let finals: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| (l.sigma, l.outcome.aggregate.final_mean()))
        .collect();
    let line = finals
        .iter()
        .map(|(s, v)| format!("sigma={s}: {v:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(
        finals.windows(2).all(|w| w[1].1 >= w[0].1),
        format!("not monotone: {line}"),
    )?;
    Ok(format!("sigma = 0 matches exact runs; final mean f {line}"))
}

// ---------------------------------------------------------------- service

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json");
    let req = req
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

struct RobotCase {
    seed: u64,
    renderer: Value,
    x0: Vec<f64>,
    k: usize,
    truth: GroundTruth,
    rounds: usize,
}

async fn robot_session(dir: &std::path::Path, case: &RobotCase) -> Result<(), String> {
    let store = Arc::new(Store::open(dir, None).map_err(|e| e.to_string())?);
    let app = router(store.clone(), None);
    let body = json!({
        "renderer": case.renderer, "seed": case.seed, "x0": case.x0, "k": case.k,
        "ground_truth": serde_json::to_value(&case.truth).unwrap(),
    });
    let (status, created) = call(&app, Method::POST, "/sessions", Some(body)).await;
    ensure(
        status == StatusCode::CREATED,
        format!("create returned {status}: {created}"),
    )?;
    let id = created["session"]["session_id"]
        .as_str()
        .unwrap()
        .to_string();
    let settings = &created["session"]["settings"];

    let params = InteractiveParams {
        eta: settings["eta"].as_f64().unwrap(),
        mu: settings["mu"].as_f64().unwrap(),
        m: settings["m"].as_u64().unwrap() as usize,
        k: case.k,
        gamma: settings["gamma"].as_f64().unwrap(),
    };
    let truth = case.truth.clone();
    let hidden = move |x: &[f64]| truth.value(x);
    let mut oracle = ExactOracle::new(hidden);
    let expected = run_interactive(
        case.x0.clone(),
        &params,
        &mut oracle,
        &mut stream_rng(case.seed, Stream::Directions),
        case.rounds,
    )
    .map_err(|e| e.to_string())?;

    let mut batch = created["batch"].clone();
    let mut round = 0;
    while round < case.rounds {
        let mut order: Vec<(f64, String)> = batch["candidates"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| {
                let p: Vec<f64> = serde_json::from_value(c["params"].clone()).unwrap();
                (
                    case.truth.value(&p),
                    c["candidate_id"].as_str().unwrap().to_string(),
                )
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let rank = batch["phase"] == "rank";
        let (path, body) = if rank {
            let top: Vec<&String> = order
                .iter()
                .take(batch["max_rank"].as_u64().unwrap() as usize)
                .map(|o| &o.1)
                .collect();
            (
                "ranking",
                json!({"batch_id": batch["batch_id"], "ranking": top}),
            )
        } else {
            (
                "selection",
                json!({"batch_id": batch["batch_id"], "choice": order[0].1}),
            )
        };
        let (status, out) = call(
            &app,
            Method::POST,
            &format!("/sessions/{id}/{path}"),
            Some(body),
        )
        .await;
        ensure(
            status == StatusCode::OK,
            format!("{path} returned {status}: {out}"),
        )?;
        if !rank {
            let (_, st) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
            let want = serde_json::to_value(&expected[round]).unwrap();
            ensure(
                st["state"] == want,
                format!(
                    "seed {}: state differs after selection {}: {} vs {want}",
                    case.seed,
                    round + 1,
                    st["state"]
                ),
            )?;
            round += 1;
        }
        batch = out["next_batch"].clone();
    }

    let (live, events) = {
        let shared = store.get(&id).map_err(|e| e.to_string())?;
        let session = lock(&shared);
        (
            serde_json::to_string(session.state()).unwrap(),
            session.events().to_vec(),
        )
    };
    let replayed = Session::replay(&events).map_err(|e| e.to_string())?;
    ensure(
        serde_json::to_string(replayed.state()).unwrap() == live,
        "replayed state differs",
    )?;
    drop(app);
    drop(store);
    let reopened = Store::open(dir, None).map_err(|e| e.to_string())?;
    let shared = reopened.get(&id).map_err(|e| e.to_string())?;
    ensure(
        serde_json::to_string(lock(&shared).state()).unwrap() == live,
        "restored state differs",
    )?;
    Ok(())
}

fn robot_end_to_end() -> Verdict {
    let cases = [
        RobotCase {
            seed: 7,
            renderer: json!({"id": "color-swatch"}),
            x0: vec![0.0, 0.0, 0.0],
            k: 6,
            truth: GroundTruth::Target {
                point: vec![0.8, -0.5, 0.3],
            },
            rounds: 25,
        },
        RobotCase {
            seed: 8,
            renderer: json!({"id": "color-swatch"}),
            x0: vec![1.0, -1.0, 0.5],
            k: 2,
            truth: GroundTruth::Quadratic,
            rounds: 25,
        },
        RobotCase {
            seed: 9,
            renderer: json!({"id": "fourier-curve", "harmonics": 2}),
            x0: vec![0.5, 0.5, -0.5, 0.2],
            k: 3,
            truth: GroundTruth::Rosenbrock,
            rounds: 25,
        },
    ];
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap();
    for case in &cases {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        rt.block_on(robot_session(dir.path(), case))?;
    }
    Ok(format!(
        "{} robot sessions match the in-process loop; replay and restart reproduce state",
        cases.len()
    ))
}

// ---------------------------------------------------------------- harness

/// Criteria that cannot pass as stated: name, the start of the expected
/// failure detail, and why. They still print FAIL; the process only fails if
/// one of them passes or fails with a different detail.
const KNOWN_FAILURES: &[(&str, &str, &str)] = &[(
    "second-moment-bound",
    "1 of 4 checks out of bounds: second-moment quadratic d=10 (m=100, k=1)",
    "the bound treats the edge set as fixed, but with k < m the ranking picks which edges \
     exist; at (m=100, k=1) every edge touches the best of 100 draws and E||g||^2 is about \
     (d-1) + E[max^2 of 100 normals], far above the bound",
)];

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("graph-statistics", graph_statistics),
        ("estimator-forms", estimator_forms),
        ("pairwise-reduction", pairwise_reduction),
        ("descent-direction", descent_direction),
        ("metric-caps", metric_caps),
        ("second-moment-bound", second_moment_bound),
        ("mk-ordering", mk_ordering),
        ("convergence-trend", convergence_trend),
        ("exact-oracle-monotonicity", exact_monotonicity),
        ("noise-robustness", noise_robustness),
        ("robot-human-end-to-end", robot_end_to_end),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let verdict = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let known = KNOWN_FAILURES
            .iter()
            .find(|k| k.0 == name)
            .map(|k| (k.1, k.2));
        match (verdict, known) {
            (Ok(detail), None) => println!("PASS {name}: {detail}"),
            (Ok(detail), Some(_)) => {
                failed += 1;
                println!("PASS {name}: {detail} (listed as a known failure; update the list)");
            }
            (Err(detail), None) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
            (Err(detail), Some((expected, why))) if detail.starts_with(expected) => {
                println!("FAIL {name}: {detail} [known: {why}]")
            }
            (Err(detail), Some(_)) => {
                failed += 1;
                println!("FAIL {name}: {detail} (differs from the known failure)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
