//! End-to-end tests of the `covhom` binary: exit codes, reproducibility,
//! and the JSON document contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_covhom")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn simulate_groups(dir: &Path, prefix: &str, model: &str, n: usize, p: usize, seed: u64, k: usize) {
    let out = run_in(
        dir,
        &[
            "simulate",
            "--model",
            model,
            "--law",
            "normal",
            "--n",
            &n.to_string(),
            "--p",
            &p.to_string(),
            "--seed",
            &seed.to_string(),
            "--groups",
            &k.to_string(),
            "--out-prefix",
            prefix,
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn identical_files_give_zero_statistic_and_no_rejection() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.csv", "1,2\n3,4\n5,-1\n");
    let out = run_in(dir.path(), &["test", "g.csv", "g.csv", "g.csv", "--alpha", "0.05"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("statistic        0.000000"), "{text}");
    assert!(text.contains("p-value (upper)  1.0000"), "{text}");
    assert!(text.contains("fail to reject"), "{text}");
}

#[test]
fn ragged_csv_is_a_data_error_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.csv", "1,2\n3,4\n");
    write(dir.path(), "bad.csv", "1,2\n3\n");
    let out = run_in(dir.path(), &["test", "good.csv", "bad.csv"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["no-such-command"],
        vec!["test", "only-one.csv"],
        vec!["mc"],
        vec!["mc", "--preset", "definitely-not-a-preset"],
        vec!["simulate", "--model", "bogus", "--n", "5", "--p", "5", "--out-prefix", "x"],
    ] {
        let out = run_in(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}: {}", stderr(&out));
    }
    // out-of-range alpha is a usage error too
    write(dir.path(), "g.csv", "1,2\n3,4\n");
    let out = run_in(dir.path(), &["test", "g.csv", "g.csv", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn help_and_version_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run_in(dir.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn simulate_then_test_roundtrips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    simulate_groups(dir.path(), "g", "omega0", 20, 30, 99, 3);

    let out1 = run_in(
        dir.path(),
        &["test", "g1.csv", "g2.csv", "g3.csv", "--json", "a.json"],
    );
    assert!(out1.status.success(), "{}", stderr(&out1));

    // rewrite the parsed groups through another simulate/test cycle:
    // re-reading the same files must reproduce identical statistics
    let out2 = run_in(
        dir.path(),
        &["test", "g1.csv", "g2.csv", "g3.csv", "--json", "b.json"],
    );
    assert!(out2.status.success());

    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap())
            .unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap())
            .unwrap();
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["inputs"], b["inputs"]);
    assert_eq!(a["config"], b["config"]);
    // only the timestamp may differ
    let (mut am, mut bm) = (a.clone(), b.clone());
    am["timestamp"] = serde_json::Value::Null;
    bm["timestamp"] = serde_json::Value::Null;
    assert_eq!(am, bm);
}

#[test]
fn result_document_schema_fields() {
    let dir = tempfile::tempdir().unwrap();
    simulate_groups(dir.path(), "g", "omega0", 10, 12, 5, 3);
    let out = run_in(
        dir.path(),
        &[
            "test", "g1.csv", "g2.csv", "g3.csv", "--mode", "region", "--json", "doc.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("doc.json")).unwrap())
            .unwrap();
    for key in ["version", "timestamp", "inputs", "config", "results", "warnings"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["inputs"].as_array().unwrap().len(), 3);
    for input in doc["inputs"].as_array().unwrap() {
        assert_eq!(input["sha256"].as_str().unwrap().len(), 64);
    }
    let cfg = &doc["config"];
    for key in ["alpha", "mode", "partition", "seed", "r", "c"] {
        assert!(cfg.get(key).is_some(), "missing config.{key}");
    }
    let rec = &doc["results"][0];
    for key in [
        "label",
        "statistic",
        "rho",
        "scaled",
        "df",
        "p_value",
        "region",
        "reject",
        "group_quadforms",
        "pooled",
    ] {
        assert!(rec.get(key).is_some(), "missing results[0].{key}");
    }
    assert!(rec["region"].is_array());
    assert_eq!(rec["group_quadforms"].as_array().unwrap().len(), 3);
}

#[test]
fn blocks_auto_partition_reports_four_blocks() {
    let dir = tempfile::tempdir().unwrap();
    simulate_groups(dir.path(), "b", "ar1:0.4", 101, 350, 31, 3);
    let out = run_in(
        dir.path(),
        &["blocks", "b1.csv", "b2.csv", "b3.csv", "--partition", "auto", "--json", "blocks.json"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("1-100"), "{text}");
    assert!(text.contains("101-200"), "{text}");
    assert!(text.contains("201-300"), "{text}");
    assert!(text.contains("301-350"), "{text}");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("blocks.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["partition"], serde_json::json!([100, 200, 300, 350]));
    assert_eq!(doc["results"].as_array().unwrap().len(), 4);
}

#[test]
fn blocks_explicit_partition_must_end_at_p() {
    let dir = tempfile::tempdir().unwrap();
    simulate_groups(dir.path(), "c", "omega0", 6, 10, 1, 3);
    let out = run_in(
        dir.path(),
        &["blocks", "c1.csv", "c2.csv", "c3.csv", "--partition", "4,8"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn mc_identical_seeds_and_different_workers_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut counts = Vec::new();
    for workers in ["1", "2"] {
        let out = run_in(
            dir.path(),
            &[
                "mc",
                "--preset",
                "table1-size-normal-p20-n10",
                "--reps",
                "100",
                "--seed",
                "7",
                "--workers",
                workers,
                "--json",
                "mc.json",
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("mc.json")).unwrap())
                .unwrap();
        counts.push(doc["results"][0]["rejections"].as_u64().unwrap());
    }
    assert_eq!(counts[0], counts[1]);
}

#[test]
fn mc_accepts_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "name": "custom-null",
        "n_sizes": [8, 8],
        "p": 6,
        "groups": [
            {"model": {"omega_j": {"j": 0}}, "law": "gaussian"},
            {"model": {"omega_j": {"j": 0}}, "law": "gaussian"},
        ],
        "alpha": 0.05,
        "replications": 50,
        "master_seed": 3,
    });
    write(dir.path(), "scenario.json", &config.to_string());
    let out = run_in(dir.path(), &["mc", "--config", "scenario.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("custom-null"));
}

#[test]
fn mc_list_names_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["mc", "--list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("table1-size-normal-p100-n50"), "{text}");
    assert!(text.contains("table1-power-exp-p20-n10"), "{text}");
    assert!(text.contains("example1-gaussian"), "{text}");
    assert!(text.contains("example2-exponential"), "{text}");
}

#[test]
fn dist_check_custom_case_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "dist-check", "--n", "5", "--p", "20", "--reps", "400", "--seed", "9", "--json",
            "dc.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("dc.json")).unwrap())
            .unwrap();
    assert_eq!(doc["checks"][0]["pass"], serde_json::json!(true));
}

#[test]
fn subsample_is_reproducible_given_seed() {
    let dir = tempfile::tempdir().unwrap();
    simulate_groups(dir.path(), "g", "omega0", 40, 8, 17, 3);
    let mut stats = Vec::new();
    for _ in 0..2 {
        let out = run_in(
            dir.path(),
            &[
                "test", "g1.csv", "g2.csv", "g3.csv", "--subsample", "10", "--seed", "21",
                "--json", "sub.json",
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("sub.json")).unwrap())
                .unwrap();
        stats.push(doc["results"][0]["statistic"].as_f64().unwrap());
    }
    assert_eq!(stats[0], stats[1]);
}

#[test]
fn subsample_without_seed_prints_one() {
    let dir = tempfile::tempdir().unwrap();
    simulate_groups(dir.path(), "g", "omega0", 20, 5, 4, 2);
    let out = run_in(dir.path(), &["test", "g1.csv", "g2.csv", "--subsample", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("subsample seed (drawn from entropy):"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn boxm_small_p_works_and_large_p_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    simulate_groups(dir.path(), "s", "gamma", 30, 4, 2, 3);
    let out = run_in(dir.path(), &["boxm", "s1.csv", "s2.csv", "s3.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("Box's M"));

    simulate_groups(dir.path(), "w", "gamma", 4, 10, 2, 2);
    let out = run_in(dir.path(), &["boxm", "w1.csv", "w2.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("singular"), "{}", stderr(&out));
}
