use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use statrs::distribution::{Discrete, Poisson};
use tasep_cli::output::read_csv;
use tasep_cli::{Format, JobConfig, OutputSpec, SpectralSpec, StateSpec, Targets};
use tempfile::TempDir;

fn tasep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tasep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn prob_single_particle_is_poisson() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "job.toml",
        "rates = [1.5]\ntime = 1.0\n[initial]\npositions = [0]\nspecies = [1]\n",
    );
    let out = dir.path().join("p.csv");
    let run = tasep(&["prob", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let rows = read_csv(&read(&out)).unwrap();
    let pois = Poisson::new(1.5).unwrap();
    assert!(rows.len() > 10);
    for r in rows {
        let p = pois.pmf(r.positions[0] as u64);
        assert!((r.value - p).abs() < 1e-10, "{r:?}");
    }
}

#[test]
fn prob_at_time_zero_has_one_nonzero_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "job.toml",
        "rates = [1.0, 2.0]\ntime = 0.0\n[initial]\npositions = [0, 1]\nspecies = [2, 1]\n",
    );
    let out = dir.path().join("p.csv");
    assert!(
        tasep(&["prob", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .success()
    );
    let rows = read_csv(&read(&out)).unwrap();
    let big: Vec<_> = rows.iter().filter(|r| r.value.abs() > 1e-8).collect();
    assert_eq!(big.len(), 1);
    assert_eq!(big[0].positions, vec![0, 1]);
    assert_eq!(big[0].species, vec![2, 1]);
    assert!((big[0].value - 1.0).abs() < 1e-8);
}

#[test]
fn prob_output_is_deterministic_and_json_selectable() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "job.toml",
        "rates = [0.8, 1.3]\ntime = 0.4\n[initial]\npositions = [0, 2]\nspecies = [2, 1]\n",
    );
    let (a, b, j) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("j"),
    );
    for (path, fmt) in [(&a, "csv"), (&b, "csv"), (&j, "json")] {
        let run = tasep(&[
            "--threads",
            "2",
            "prob",
            "--config",
            &cfg,
            "--out",
            path.to_str().unwrap(),
            "--format",
            fmt,
        ]);
        assert!(run.status.success());
    }
    assert_eq!(read(&a), read(&b));
    let json: serde_json::Value = serde_json::from_str(&read(&j)).unwrap();
    let rows = read_csv(&read(&a)).unwrap();
    assert_eq!(json.as_array().unwrap().len(), rows.len());
    assert_eq!(json[0]["value"].as_f64().unwrap(), rows[0].value);
}

#[test]
fn simulate_trivial_and_forbidden_cases() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "zero.toml",
        "rates = [1.0, 2.0]\ntime = 0.0\n[initial]\npositions = [3, 5]\nspecies = [2, 1]\n",
    );
    let out = dir.path().join("s.csv");
    let run = tasep(&[
        "simulate",
        "--config",
        &cfg,
        "--samples",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let rows = read_csv(&read(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].count, Some(1));
    assert_eq!(rows[0].positions, vec![3, 5]);

    // a slow particle behind a fast one is never overtaken
    let cfg = write_config(
        &dir,
        "blocked.toml",
        "rates = [1.0, 2.0]\ntime = 2.0\n[initial]\npositions = [0, 1]\nspecies = [1, 2]\n",
    );
    let run = tasep(&[
        "simulate",
        "--config",
        &cfg,
        "--samples",
        "5000",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let rows = read_csv(&read(&out)).unwrap();
    assert!(rows.len() > 5);
    assert!(rows.iter().all(|r| r.species == vec![1, 2]));
    let total: u64 = rows.iter().map(|r| r.count.unwrap()).sum();
    assert_eq!(total, 5000);
}

#[test]
fn verify_exit_codes() {
    let run = tasep(&[
        "verify",
        "--suite",
        "yang-baxter",
        "--size",
        "3",
        "--trials",
        "10",
    ]);
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stdout).contains("PASS"));
    let run = tasep(&["verify", "--suite", "oracle", "--size", "9"]);
    assert_eq!(run.status.code(), Some(2));
    let run = tasep(&["verify", "--suite", "nonsense", "--size", "3"]);
    assert_eq!(run.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let run = tasep(&[
        "verify",
        "--suite",
        "boundary",
        "-n",
        "2",
        "--trials",
        "5",
        "--seed",
        "4",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&read(&report)).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["suite"], "boundary");
}

#[test]
fn config_errors_exit_two_and_divergence_exits_three() {
    let dir = TempDir::new().unwrap();
    let typo = write_config(
        &dir,
        "typo.toml",
        "rates = [1.0]\ntime = 1.0\ntimee = 2.0\n[initial]\npositions = [0]\nspecies = [1]\n",
    );
    assert_eq!(tasep(&["prob", "--config", &typo]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        tasep(&["prob", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let radius = write_config(
        &dir,
        "radius.toml",
        "rates = [1.0, 2.0]\ntime = 1.0\n[initial]\npositions = [0, 1]\nspecies = [1, 2]\n[spectral]\nradius = 0.6\n",
    );
    assert_eq!(tasep(&["prob", "--config", &radius]).status.code(), Some(2));

    let hard = write_config(
        &dir,
        "hard.toml",
        "rates = [1.0, 2.0]\ntime = 40.0\ntargets = [{ positions = [30, 60], species = [1, 2] }]\n[initial]\npositions = [0, 1]\nspecies = [2, 1]\n[spectral]\nmax_nodes = 64\n",
    );
    assert_eq!(tasep(&["prob", "--config", &hard]).status.code(), Some(3));
}

fn state_strategy() -> impl Strategy<Value = StateSpec> {
    (
        prop::collection::vec(-50i64..50, 1..4),
        prop::collection::vec(1usize..12, 1..4),
    )
        .prop_map(|(positions, species)| StateSpec { positions, species })
}

fn config_strategy() -> impl Strategy<Value = JobConfig> {
    let finite = prop::num::f64::POSITIVE | prop::num::f64::NORMAL;
    (
        prop::collection::vec(finite, 1..5),
        0.0f64..100.0,
        state_strategy(),
        prop::option::of(prop::collection::vec(state_strategy(), 0..3)),
        (
            prop::option::of(1e-6f64..1.0),
            prop::option::of(2usize..10),
            prop::option::of(any::<bool>()),
        ),
        (any::<bool>(), prop::option::of("[a-z]{1,8}\\.(csv|json)")),
    )
        .prop_map(
            |(rates, time, initial, targets, (radius, log_m, large), (json, path))| JobConfig {
                rates,
                time,
                initial,
                targets: targets.map_or(Targets::Window, Targets::List),
                spectral: SpectralSpec {
                    radius,
                    nodes_per_dim: log_m.map(|k| 1usize << k),
                    adapt_tol: radius.map(|r| r * 1e-9),
                    max_nodes: log_m.map(|k| 1usize << (k + 2)),
                    allow_large_n: large,
                },
                output: OutputSpec {
                    format: if json { Format::Json } else { Format::Csv },
                    path: path.map(Into::into),
                },
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn config_canonical_form_round_trips(cfg in config_strategy()) {
        let text = cfg.to_canonical();
        let parsed = JobConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_canonical(), text);
    }
}
