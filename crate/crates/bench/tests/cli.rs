use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rankgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankgrad"))
        .args(args)
        .output()
        .unwrap()
}

const SMALL: &str = r#"
name = "small"
function = "quadratic"
dim = 5
seeds = [0, 1, 2]

[optimizer]
eta = 1.0
mu = 0.01
m = 4
k = 2
iterations = 15
line_search = { l = 3, gamma = 0.5 }
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = rankgrad(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(String::from_utf8_lossy(&o.stdout).contains("seeds=3"));
    }
    for file in [
        "aggregate.csv",
        "summary.json",
        "runs/seed-0.jsonl",
        "runs/seed-2.jsonl",
    ] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let csv = fs::read_to_string(a.join("aggregate.csv")).unwrap();
    assert!(csv.starts_with("queries,mean,std,n_seeds\n"));
    let records =
        rankgrad::optimizer::read_trajectory(&fs::read(a.join("runs/seed-1.jsonl")).unwrap()[..])
            .unwrap();
    assert_eq!(records.len(), 15);
    assert_eq!(records.last().unwrap().queries, 15 * 7);
}

#[test]
fn cli_overrides_seeds_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("o");
    let o = rankgrad(&[
        "run",
        "--config",
        &config,
        "--seeds",
        "3..7",
        "--budget",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("runs/seed-6.jsonl").exists());
    assert!(!out.join("runs/seed-0.jsonl").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("queries=49"), "{stdout}");
}

#[test]
fn bad_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &SMALL.replace("dim = 5", "dim = 5\ncolour = 1"));
    let o = rankgrad(&["run", "--config", &config]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let config = write_config(dir.path(), SMALL);
    let o = rankgrad(&["run", "--config", &config, "--seeds", "4"]);
    assert_eq!(o.status.code(), Some(2));

    let o = rankgrad(&["run", "--preset", "no-such-preset"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-preset"));
}

#[test]
fn grid_and_noise_sweep_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("grid");
    let o = rankgrad(&[
        "grid",
        "--config",
        &config,
        "--mk",
        "4:1,4:4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    // Long format: one row per (combo, curve point); 15 iterations plus the start.
    let table = fs::read_to_string(out.join("grid.csv")).unwrap();
    assert!(table.starts_with("m,k,predicted_variance,queries,mean,std,n_seeds\n"));
    assert_eq!(table.lines().count(), 1 + 2 * 16);
    assert!(out.join("m4-k1/aggregate.csv").exists());

    let out = dir.path().join("noise");
    let o = rankgrad(&[
        "noise-sweep",
        "--config",
        &config,
        "--sigmas",
        "0,0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        fs::read_to_string(out.join("noise.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 2 * 16
    );
}

#[test]
fn presets_are_listed() {
    let o = rankgrad(&["presets"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    for (name, _) in rankgrad_bench::PRESETS {
        assert!(stdout.contains(name), "{name}");
    }
}

#[test]
fn variance_check_reports_each_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = rankgrad(&[
        "variance-check",
        "--dims",
        "2",
        "--samples",
        "20000",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    // The (100, 1) second-moment bound does not hold; the exit code says so.
    assert_eq!(o.status.code(), Some(1), "{stdout}");
    let fails: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{stdout}");
    assert!(fails[0].contains("m=100, k=1"));
    assert!(out.join("variance.csv").exists());
}
