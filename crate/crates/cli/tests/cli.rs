//! Runs the `tessella` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn tessella(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tessella"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn corpus_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Fast analysis settings for the 1D corpus.
const QUICK: [&str; 4] = ["--radius", "100", "--m-max", "4"];

fn analyze_json(spec: &str, extra: &[&str]) -> (i32, Value) {
    let mut args = vec!["analyze", spec];
    args.extend(QUICK);
    args.extend(extra);
    let out = tessella(&args);
    (
        code(&out),
        serde_json::from_str(&stdout(&out)).expect("report is JSON"),
    )
}

#[test]
fn validate_accepts_the_corpus() {
    for name in ["fibonacci", "thue-morse", "chair"] {
        let out = tessella(&[
            "validate",
            corpus_file(&format!("{name}.toml")).to_str().unwrap(),
        ]);
        assert_eq!(
            code(&out),
            0,
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = stdout(&out);
        assert!(
            text.contains("primitive: S^") && text.contains("disjoint: yes"),
            "{text}"
        );
    }
    // Corpus names work without a file.
    let out = tessella(&["validate", "fibonacci"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("length a: "));
}

#[test]
fn invalid_specs_exit_2() {
    for name in [
        "empty-column.toml",
        "overlapping-pieces.toml",
        "reducible-minpoly.toml",
    ] {
        let path = corpus_file("invalid").join(name);
        let out = tessella(&["validate", path.to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
        assert_eq!(
            code(&tessella(&["analyze", path.to_str().unwrap()])),
            2,
            "{name}"
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.toml");
    std::fs::write(&junk, "dimension = [").unwrap();
    assert_eq!(code(&tessella(&["validate", junk.to_str().unwrap()])), 2);
    assert_eq!(code(&tessella(&["validate", "no-such-system"])), 1);
}

#[test]
fn analyze_reports_verdicts() {
    let (c, fib) = analyze_json("fibonacci", &[]);
    assert_eq!(c, 0);
    assert_eq!(fib["schema_version"], 1);
    assert_eq!(fib["decision"], "pure_point");
    assert_eq!(fib["overlap"]["classes"], 10);
    assert_eq!(fib["cps"]["status"], "analysed");
    assert_eq!(fib["options"]["radius"], 100.0);
    assert_eq!(fib["options"]["m_max"], 4);
    assert!(fib["spec"]["source_sha256"].is_string());
    assert!(fib["consistency"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["holds"] == true));

    let (c, tm) = analyze_json("thue-morse", &["--no-cps"]);
    assert_eq!(c, 0);
    assert_eq!(tm["decision"], "not_pure_point");
    assert_eq!(tm["dekking"]["result"], "none");
    assert_eq!(tm["cps"]["status"], "skipped");

    // Unknown is still a verdict.
    let (c, tri) = analyze_json("tribonacci", &[]);
    assert_eq!((c, tri["decision"].as_str()), (0, Some("unknown")));
}

#[test]
fn reports_are_deterministic_modulo_timings() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let (_, a) = analyze_json("period-doubling", &[]);
    let (_, b) = analyze_json("period-doubling", &["--sequential"]);
    assert_eq!(a["report_sha256"], b["report_sha256"]);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn budget_exceeded_exits_3_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_tessella"))
        .args(["analyze", "fibonacci", "--out", report.to_str().unwrap()])
        .env("TESSELLA_MAX_TILES", "100")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(value["decision"], "unknown");
    assert!(value["errors"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["budget"] == true));
}

#[test]
fn analyze_side_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (dot, svg, csv, json, wsvg, out) = (
        path("g.dot"),
        path("p.svg"),
        path("w.csv"),
        path("w.json"),
        path("w.svg"),
        path("r.json"),
    );
    for windows in [&csv, &json, &wsvg] {
        let mut args = vec![
            "analyze",
            "fibonacci",
            "--dot",
            &dot,
            "--svg",
            &svg,
            "--windows",
            windows,
            "--out",
            &out,
        ];
        args.extend(QUICK);
        assert_eq!(code(&tessella(&args)), 0);
    }
    let read = |p: &str| std::fs::read_to_string(p).unwrap();
    assert!(read(&dot).starts_with("digraph"));
    let report: Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(report["decision"], "pure_point");
    assert_eq!(
        read(&dot).matches("doublecircle").count() as u64,
        report["overlap"]["coincidences"].as_u64().unwrap()
    );
    assert!(read(&svg).contains("<svg"));
    assert!(read(&wsvg).contains("<svg"));
    assert_eq!(
        read(&csv).lines().next().map(|l| l.contains(',')),
        Some(true)
    );
    let windows: Value = serde_json::from_str(&read(&json)).unwrap();
    assert!(windows.is_array() || windows.is_object());
}

#[test]
fn patch_formats() {
    let out = tessella(&["patch", "fibonacci", "--radius", "10"]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json.is_object());

    let out = tessella(&["patch", "chair", "--radius", "4", "--format", "svg"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("fill-rule=\"evenodd\""));

    let csv = stdout(&tessella(&[
        "patch",
        "fibonacci",
        "--radius",
        "10",
        "--format",
        "csv",
    ]));
    let rows = csv.lines().count();
    assert!(rows > 5);

    // Radius 0 still yields the tiles around the origin.
    let out = tessella(&["patch", "fibonacci", "--radius", "0", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().count() >= 2);

    // Tile counts after n steps from one tile follow the substitution matrix.
    let tiles = |n: u32| {
        stdout(&tessella(&[
            "patch",
            "fibonacci",
            "--generations",
            &n.to_string(),
            "--format",
            "csv",
        ]))
        .lines()
        .count()
            - 1
    };
    let counts: Vec<usize> = (0..7).map(tiles).collect();
    assert_eq!(counts, [1, 2, 3, 5, 8, 13, 21]);

    assert_eq!(
        code(&tessella(&[
            "patch",
            "fibonacci",
            "--radius",
            "3",
            "--generations",
            "2"
        ])),
        2
    );
}
