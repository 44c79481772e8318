use std::path::Path;
use std::process::Command;

use garp_cli::data::{parse_csv, to_csv};
use garp_cli::output::SummaryFile;
use garp_cli::parse_config;

const SHORT: &str = "chain.n_iter = 120\nchain.burnin = 60\nchain.warmup = 30\nchain.thin = 3\n";

fn garp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_garp"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, scenario: &str, seed: &str) {
    let out = garp(&["simulate", "--scenario", scenario, "--seed", seed, "--out", p(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_writes_expected_shapes() {
    let t = tempfile::tempdir().unwrap();
    for (scenario, rows) in [("well-specified", 1500), ("misspecified", 1500), ("non-connected", 1000)] {
        let dir = t.path().join(scenario);
        simulate(&dir, scenario, "5");
        let text = std::fs::read_to_string(dir.join("data.csv")).unwrap();
        let ds = parse_csv(&text, false).unwrap();
        assert_eq!(ds.points.len(), rows);
        assert_eq!(ds.dim(), 2);
        assert_eq!(to_csv(&ds), text, "round trip");
        let truth: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("truth.json")).unwrap()).unwrap();
        assert_eq!(truth["partition"].as_array().unwrap().len(), rows);
        assert_eq!(truth["seed"], 5);
    }
    let again = t.path().join("again");
    simulate(&again, "well-specified", "5");
    for f in ["data.csv", "truth.json"] {
        assert_eq!(
            std::fs::read(again.join(f)).unwrap(),
            std::fs::read(t.path().join("well-specified").join(f)).unwrap()
        );
    }
}

#[test]
fn fit_outputs_are_consistent() {
    let t = tempfile::tempdir().unwrap();
    let sim = t.path().join("sim");
    simulate(&sim, "well-specified", "2");
    let cfg = t.path().join("c.toml");
    std::fs::write(&cfg, SHORT).unwrap();
    let out = t.path().join("fit");
    let data = sim.join("data.csv");
    let r = garp(&["fit", "--config", p(&cfg), "--data", p(&data), "--out", p(&out), "--seed", "7", "--chains", "2"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let mut resolved = parse_config(SHORT).unwrap();
    resolved.chain.seed = 7;
    resolved.chains = 2;
    let hash = resolved.hash();
    for f in ["summary.json", "samples.jsonl", "coclustering.csv", "plot.svg", "run_info.json"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(text.contains(&hash), "{f} lacks the config hash");
        assert!(text.contains("seed"), "{f} lacks the seed");
    }

    let samples = std::fs::read_to_string(out.join("samples.jsonl")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 2 * resolved.chain.n_retained());

    let summary: SummaryFile = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.n_samples, 2 * resolved.chain.n_retained());
    assert_eq!(summary.partition.len(), 1500);
    let total: f64 = summary.kv_posterior.iter().map(|r| r.frequency).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let csv = std::fs::read_to_string(out.join("coclustering.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), rows.len());
        assert_eq!(row[i], 1.0);
        for (j, &x) in row.iter().enumerate() {
            assert_eq!(x, rows[j][i]);
        }
    }

    let svg = std::fs::read_to_string(out.join("plot.svg")).unwrap();
    let nonzero = summary.edge_table.iter().filter(|e| e.mass > 0.0).count();
    assert_eq!(svg.matches("<line ").count(), nonzero);
    let n_vertex = summary.partition.iter().filter(|l| matches!(l, garp_cli::output::Label::Vertex(_))).count();
    assert_eq!(svg.matches("<polygon ").count(), n_vertex);
    assert_eq!(svg.matches("<circle ").count(), 1500 - n_vertex);

    // Re-summarizing the stored draws gives the same file.
    let again = t.path().join("again");
    let r = garp(&["summarize", "--samples", p(&out.join("samples.jsonl")), "--data", p(&data), "--out", p(&again)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stdout).contains("frequency"));
    assert_eq!(
        std::fs::read(again.join("summary.json")).unwrap(),
        std::fs::read(out.join("summary.json")).unwrap()
    );

    // The stream must match the data it describes.
    let small = t.path().join("small.csv");
    std::fs::write(&small, "1,2\n3,4\n").unwrap();
    let r = garp(&["summarize", "--samples", p(&out.join("samples.jsonl")), "--data", p(&small), "--out", p(&again)]);
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stderr).contains("data stage"));
}

#[test]
fn failures_name_their_stage() {
    let t = tempfile::tempdir().unwrap();
    let data = t.path().join("d.csv");
    std::fs::write(&data, "1,2\n3,x\n").unwrap();
    let cfg = t.path().join("c.toml");

    std::fs::write(&cfg, "prior.kind = \"sym_dirichlet\"\nprior.m_v = 3\n").unwrap();
    let r = garp(&["fit", "--config", p(&cfg), "--data", p(&data), "--out", p(t.path())]);
    assert_eq!(r.status.code(), Some(3));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("config stage") && err.contains("prior.rho"), "{err}");

    std::fs::write(&cfg, "chain.bogus = 1\n").unwrap();
    let r = garp(&["fit", "--config", p(&cfg), "--data", p(&data), "--out", p(t.path())]);
    assert_eq!(r.status.code(), Some(3));

    std::fs::write(&cfg, SHORT).unwrap();
    let r = garp(&["fit", "--config", p(&cfg), "--data", p(&data), "--out", p(t.path())]);
    assert_eq!(r.status.code(), Some(4));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("row 2, column 2"), "{err}");

    let r = garp(&["fit", "--data", p(&data), "--out", p(t.path()), "--mode", "fast"]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn prior_check_reports() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("c.toml");
    std::fs::write(&cfg, "hyper.p_v = 1.0\n").unwrap();
    let json = t.path().join("r.json");
    let r = garp(&["prior-check", "--config", p(&cfg), "--n", "50", "--draws", "2000", "--out", p(&json)]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["truncation_probability"], 1.0);
    assert_eq!(v["monte_carlo"], 1.0);
    let hash = parse_config("hyper.p_v = 1.0\n").unwrap().hash();
    assert_eq!(v["config_hash"], hash.as_str());
    assert!(String::from_utf8_lossy(&r.stdout).contains(&hash));

    let r = garp(&["prior-check", "--n", "500", "--draws", "20000", "--out", p(&json)]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let (c, m, se) = (
        v["truncation_probability"].as_f64().unwrap(),
        v["monte_carlo"].as_f64().unwrap(),
        v["monte_carlo_se"].as_f64().unwrap(),
    );
    assert!((c - m).abs() < 4.0 * se, "{c} vs {m}");
}
