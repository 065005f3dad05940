use std::process::Command;

use serde_json::Value;

fn geomkit(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_geomkit"))
        .args(args)
        .output()
        .unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

fn raw(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_geomkit"))
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap(), out.stdout)
}

const FANO: &str =
    r#"{"points":7,"lines":[[0,1,2],[0,3,4],[0,5,6],[1,3,5],[1,4,6],[2,3,6],[2,4,5]]}"#;

#[test]
fn reports_carry_the_envelope() {
    let (code, r) = geomkit(&[
        "check",
        "--geometry",
        r#"{"kind":"projective","q":2,"dim":2}"#,
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["tool"], "geomkit");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["status"], "pass");
    assert_eq!(r["config"]["command"]["name"], "check");
    assert_eq!(r["result"]["points"], 7);
    assert_eq!(r["result"]["generated_by_lines"], true);
    assert!(r["config"]["common"].get("workers").is_none());
}

#[test]
fn axiom_failures_exit_with_one() {
    let (code, r) = geomkit(&[
        "check",
        "--geometry",
        r#"{"kind":"explicit","points":["a","b"],"flats":[[0]]}"#,
    ]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["result"]["axioms"][0]["passed"], false);
    assert!(r["result"]["axioms"][0]["witness"].is_object());
}

#[test]
fn synthetic_checks() {
    assert_eq!(
        geomkit(&["check", "--synthetic", "projective", "--input", FANO]).0,
        0
    );
    let two_lines = r#"{"points":5,"lines":[[0,1,2],[2,3,4]]}"#;
    assert_eq!(
        geomkit(&["check", "--synthetic", "projective", "--input", two_lines]).0,
        1
    );
    let square =
        r#"{"points":4,"lines":[[0,1],[2,3],[0,2],[1,3],[0,3],[1,2]],"parallel":[0,0,1,1,2,2]}"#;
    assert_eq!(
        geomkit(&["check", "--synthetic", "affine", "--input", square]).0,
        0
    );
    // Without parallel classes no line has a parallel through outside points.
    let (code, r) = geomkit(&[
        "check",
        "--synthetic",
        "affine",
        "--input",
        r#"{"points":4,"lines":[[0,1],[2,3],[0,2],[1,3],[0,3],[1,2]]}"#,
    ]);
    assert_eq!(code, 1);
    let failed: Vec<&Value> = r["result"]["axioms"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["passed"] == false)
        .collect();
    assert!(!failed.is_empty() && failed.iter().all(|a| a["witness"].is_object()));
    let bad_classes =
        r#"{"points":4,"lines":[[0,1],[2,3],[0,2],[1,3],[0,3],[1,2]],"parallel":[0,1,0,1,2,2]}"#;
    assert_eq!(
        geomkit(&["check", "--synthetic", "affine", "--input", bad_classes]).0,
        1
    );
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    let (code, r) = geomkit(&["verify", "ft-affine", "--q", "6"]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "error");
    assert!(r["error"].as_str().unwrap().contains("prime power"));
    assert_eq!(geomkit(&["check"]).0, 2);
    assert_eq!(geomkit(&["check", "--geometry", "{not json"]).0, 2);
    assert_eq!(
        geomkit(&["check", "--geometry", "/nonexistent/file.json"]).0,
        2
    );
    assert_eq!(
        geomkit(&["enumerate", "--geometry", "{}", "--codomain", "{}"]).0,
        2
    );
    // clap rejects unknown subcommands and a zero budget.
    assert_eq!(raw(&["frobnicate"]).0, 2);
    assert_eq!(raw(&["verify", "ft-affine", "--budget", "0"]).0, 2);
}

#[test]
fn fundamental_theorem_counts() {
    let (code, r) = geomkit(&["verify", "ft-projective", "--q", "2", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["enumerated"], 168);
    assert_eq!(r["result"]["equal"], true);
    let (code, r) = geomkit(&["verify", "ft-affine", "--q", "3", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["enumerated"], 432);
    assert!(r.get("timings").is_none());
    let (_, r) = geomkit(&["verify", "ft-affine", "--q", "3", "--n", "2", "--timings"]);
    assert!(r["timings"]["elapsed_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn budget_overrun_exits_with_three() {
    let (code, r) = geomkit(&[
        "verify",
        "ft-affine",
        "--q",
        "5",
        "--n",
        "3",
        "--budget",
        "1000",
    ]);
    assert_eq!(code, 3);
    assert_eq!(r["status"], "budget");
}

#[test]
fn output_is_identical_across_worker_counts() {
    for args in [
        vec!["verify", "ft-affine", "--q", "3", "--n", "2"],
        vec![
            "enumerate",
            "--geometry",
            r#"{"kind":"affine","q":2,"dim":2}"#,
            "--codomain",
            r#"{"kind":"projective","q":2,"dim":2}"#,
        ],
    ] {
        let with = |w: &str| {
            let mut a = args.clone();
            a.extend(["--workers", w]);
            raw(&a)
        };
        let one = with("1");
        assert_eq!(one.0, 0);
        assert_eq!(one, with("4"));
        assert_eq!(one, with("0"));
    }
}

#[test]
fn extension_suite_and_quotient_iso() {
    let (code, r) = geomkit(&[
        "verify",
        "extension",
        "--q",
        "5",
        "--n",
        "2",
        "--samples",
        "10",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["matches_block_matrix"], 10);
    assert_eq!(r["config"]["common"]["seed"], 7);
    let (code, r) = geomkit(&[
        "verify",
        "quotient-iso",
        "--q",
        "3",
        "--n",
        "4",
        "--dim",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["quotient_points"], 13);
    assert_eq!(
        geomkit(&[
            "verify",
            "quotient-iso",
            "--q",
            "3",
            "--n",
            "2",
            "--dim",
            "2"
        ])
        .0,
        2
    );
}

#[test]
fn octagon_artifacts_drive_the_extend_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, r) = geomkit(&["counterexample", "octagon", "--q", "7", "--dir", d]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["map_file"], "octagon-q7-map.json");
    let map = dir.path().join("octagon-q7-map.json");
    let witness: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("octagon-q7-witness.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(witness["sides"].as_array().unwrap().len(), 3);

    let report = dir.path().join("ext.json");
    let (code, r) = geomkit(&[
        "extend",
        "--input",
        map.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["hypothesis"], false);
    assert_eq!(
        r["result"]["witness"]["image_lines"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(saved, r["result"]);

    assert_eq!(
        geomkit(&["counterexample", "octagon", "--q", "5", "--dir", d]).0,
        2
    );
}

#[test]
fn nine_point_configuration_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, r) = geomkit(&["counterexample", "hesse", "--q", "7", "--dir", d]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["certificate"]["no_field_morphism"], true);
    assert!(dir.path().join("hesse-q7-map.json").exists());
    assert_eq!(
        geomkit(&["counterexample", "hesse", "--q", "5", "--dir", d]).0,
        2
    );
}

#[test]
fn affine_maps_extend_and_decompose() {
    // (x, y) -> (x + y, y) over GF(5).
    let images: Vec<String> = (0..25)
        .map(|p| (5 * ((p / 5 + p % 5) % 5) + p % 5).to_string())
        .collect();
    let map = format!(
        r#"{{"domain":{{"kind":"affine","q":5,"dim":2}},"codomain":{{"kind":"affine","q":5,"dim":2}},"images":[{}]}}"#,
        images.join(",")
    );
    let (code, r) = geomkit(&["affine", "--map", &map]);
    assert_eq!(code, 0);
    assert_eq!(
        r["result"]["semiaffine"]["matrix"],
        serde_json::json!([[1, 1], [0, 1]])
    );
    let (code, r) = geomkit(&["decompose", "--map", &map]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["omega_is_zero"], true);
    let (code, r) = geomkit(&["extend", "--input", &map]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["extension"]["unique"], true);
    assert_eq!(
        r["result"]["extension"]["exceptional"],
        serde_json::json!([])
    );

    let broken = r#"{"domain":{"kind":"affine","q":3,"dim":2},"codomain":{"kind":"affine","q":3,"dim":2},"images":[0,1,2,3,4,5,6,7,1]}"#;
    let (code, r) = geomkit(&["affine", "--map", broken]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["parallel"], false);
    // Decomposition needs a morphism, so this is an input error.
    assert_eq!(geomkit(&["decompose", "--map", broken]).0, 2);
}

#[test]
fn text_format_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let (code, stdout) = raw(&[
        "check",
        "--synthetic",
        "projective",
        "--input",
        FANO,
        "--format",
        "text",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.lines().any(|l| l == "status: \"pass\""));
    assert!(text.lines().any(|l| l == "result.axioms.0.passed: true"));
}
