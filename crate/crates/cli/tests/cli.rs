//! End-to-end tests of the binary: exit codes, report formats, and
//! determinism across runs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prorank"))
}

fn fixture(name: &str) -> String {
    format!("{}/tests/data/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const PROCYCLIC_CSV: &str = "\
k,order,raw_rank,value_num,value_den,gap_num,gap_den
2,2,1,1,2,1,2
3,4,3,3,4,1,4
5,8,7,7,8,1,8
9,16,15,15,16,1,16
";

#[test]
fn rank_approx_emits_the_expected_csv() {
    let out = bin()
        .args(["rank-approx", "--preset", "zp2", "--matrix", &fixture("gminus1.json")])
        .args(["--k", "2,3,5,9"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out), PROCYCLIC_CSV);
}

#[test]
fn rank_approx_json_mirrors_the_csv() {
    let out = bin()
        .args(["rank-approx", "--preset", "zp2", "--matrix", &fixture("gminus1.json")])
        .args(["--k", "2,3,5,9", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["p"], 2);
    assert_eq!(doc["levels"].as_array().unwrap().len(), 4);
    assert_eq!(doc["levels"][3]["value"]["num"], "15");
    assert_eq!(doc["levels"][3]["value"]["den"], "16");
    assert_eq!(doc["levels"][3]["nearest"], "1");
    assert!(doc["truncated"].is_null());
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let run = |jobs: Option<&str>| {
        let mut cmd = bin();
        cmd.args(["rank-approx", "--preset", "zp2", "--matrix", &fixture("gminus1.json")])
            .args(["--kmax", "6"]);
        if let Some(j) = jobs {
            cmd.args(["--jobs", j]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let first = run(None);
    assert_eq!(first, run(None));
    assert_eq!(first, run(Some("2")));
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let path = tmp("report.csv");
    let out = bin()
        .args(["rank-approx", "--preset", "zp2", "--matrix", &fixture("gminus1.json")])
        .args(["--k", "2,3,5,9", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), PROCYCLIC_CSV);
}

#[test]
fn budget_truncation_exits_one_and_marks_the_report() {
    let out = bin()
        .args(["rank-approx", "--preset", "zp2", "--matrix", &fixture("gminus1.json")])
        .args(["--k", "2,3", "--max-order", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("2,2,1,1,2,1,2"));
    assert!(text.contains("# truncated: k=3"));
}

#[test]
fn config_errors_exit_two() {
    let cases: Vec<Vec<String>> = vec![
        // Unknown preset.
        vec![
            "rank-approx".into(),
            "--preset".into(),
            "nope".into(),
            "--matrix".into(),
            fixture("gminus1.json"),
            "--kmax".into(),
            "3".into(),
        ],
        // Missing matrix file.
        vec![
            "rank-approx".into(),
            "--preset".into(),
            "zp2".into(),
            "--matrix".into(),
            "/definitely/not/here.json".into(),
            "--kmax".into(),
            "3".into(),
        ],
        // Neither --kmax nor --k.
        vec![
            "rank-approx".into(),
            "--preset".into(),
            "zp2".into(),
            "--matrix".into(),
            fixture("gminus1.json"),
        ],
        // Level below 2.
        vec![
            "rank-approx".into(),
            "--preset".into(),
            "zp2".into(),
            "--matrix".into(),
            fixture("gminus1.json"),
            "--k".into(),
            "1,2".into(),
        ],
        // Matrix references a generator the presentation lacks.
        vec![
            "rank-approx".into(),
            "--preset".into(),
            "free2".into(),
            "--matrix".into(),
            fixture("gminus1.json"),
            "--kmax".into(),
            "3".into(),
        ],
    ];
    for args in cases {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "args {args:?}: {out:?}");
    }
}

#[test]
fn invalid_prime_in_a_presentation_file_exits_two() {
    let path = tmp("badprime.txt");
    fs::write(&path, "p = 6\ngens = g\n").unwrap();
    let out = bin()
        .args(["quotient-info", "--presentation", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn presentation_files_work_like_presets() {
    let path = tmp("zp2.txt");
    fs::write(&path, "p = 2\ngens = g\n").unwrap();
    let from_file = bin()
        .args(["rank-approx", "--presentation", path.to_str().unwrap()])
        .args(["--matrix", &fixture("gminus1.json"), "--k", "2,3"])
        .output()
        .unwrap();
    let from_preset = bin()
        .args(["rank-approx", "--preset", "zp2"])
        .args(["--matrix", &fixture("gminus1.json"), "--k", "2,3"])
        .output()
        .unwrap();
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_preset.stdout);
}

#[test]
fn quotient_info_reports_oracle_matches() {
    let out = bin()
        .args(["quotient-info", "--preset", "free2", "--kmax", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("k=4: algebra dim 15, quotient order 128"));
    assert!(text.contains("graded dims at k=4: 1, 2, 4, 8"));
    assert!(text.contains("series oracle: match"));
    assert!(text.contains("order oracle: match"));
}

#[test]
fn quotient_info_skips_oracles_it_cannot_apply() {
    let out = bin()
        .args(["quotient-info", "--preset", "flag-deep", "--kmax", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("series oracle: skipped (not mild)"));
    assert!(text.contains("order oracle: skipped (not free)"));

    let mild = bin()
        .args(["quotient-info", "--preset", "mild1", "--kmax", "4"])
        .output()
        .unwrap();
    let text = stdout(&mild);
    assert!(text.contains("series oracle: match"));
    assert!(text.contains("order oracle: skipped (not free)"));
}

#[test]
fn skew_check_passes_on_the_bundled_presets() {
    for (preset, kmax) in [("mild1", "6"), ("free2", "5"), ("zp2", "5")] {
        let out = bin()
            .args(["skew-check", "--preset", preset, "--kmax", kmax, "--samples", "30"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{preset}: {out:?}");
        assert!(stdout(&out).contains("skew check: pass"));
    }
}

#[test]
fn localize_eval_reports_values_and_laws() {
    let out = bin()
        .args(["localize-eval", "--triples", &fixture("triples.json")])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["laws"]["all_passed"], true);
    assert_eq!(doc["laws"]["skipped"], 0);
    assert_eq!(doc["values"][0]["value"], serde_json::json!([1, 1, 1, 1]));
}

#[test]
fn localize_eval_maps_into_a_target_ring() {
    let out = bin()
        .args(["localize-eval", "--triples", &fixture("triples.json")])
        .args(["--target", r#"{"kind":"fp-poly","p":2,"m":2}"#])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["target"]["m"], 2);
    assert_eq!(doc["values"][0]["value"], serde_json::json!([1, 1]));
}

#[test]
fn malformed_triples_exit_two() {
    let path = tmp("bad_triples.json");
    fs::write(&path, "{ not json").unwrap();
    let out = bin()
        .args(["localize-eval", "--triples", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
