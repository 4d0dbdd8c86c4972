//! The JSON report: determinism, hashes, round trips and internal consistency.

use sha2::{Digest, Sha256};

use tessella_core::coincidence::Decision;
use tessella_core::corpus;
use tessella_core::report::{
    analyze, spec_hash, AnalysisOptions, AnalysisReport, CpsSection, SCHEMA_VERSION,
};
use tessella_core::Execution;

fn run(name: &str, options: &AnalysisOptions) -> AnalysisReport {
    analyze(&corpus::load(name).unwrap(), options).unwrap().0
}

fn quick() -> AnalysisOptions {
    AnalysisOptions {
        m_max: 6,
        ..AnalysisOptions::default()
    }
}

#[test]
fn canonical_form_is_deterministic() {
    let seq = AnalysisOptions {
        exec: Execution::Sequential,
        ..quick()
    };
    for name in ["fibonacci", "thue-morse"] {
        let a = run(name, &quick());
        let b = run(name, &quick());
        let c = run(name, &seq);
        assert_eq!(a.canonical_json(), b.canonical_json(), "{name}");
        assert_eq!(a.canonical_json(), c.canonical_json(), "{name}");
        assert_eq!(a.report_sha256, c.report_sha256);
        assert!(!a.canonical_json().contains("\"timings\""));
        assert!(a.timings.contains_key("overlap"));
    }
}

#[test]
fn hashes_are_sha256_of_the_canonical_form() {
    let mut r = run("fibonacci", &quick());
    let digest = |s: &str| hex::encode(Sha256::digest(s.as_bytes()));
    assert_eq!(r.report_sha256, digest(&r.canonical_json()));
    assert_eq!(r.spec.sha256, digest(&r.spec.document));
    assert_eq!(r.spec.sha256, spec_hash(&r.spec.document));
    let before = r.report_sha256.clone();
    r.set_source("source text");
    assert_eq!(
        r.spec.source_sha256.as_deref(),
        Some(digest("source text").as_str())
    );
    assert_ne!(r.report_sha256, before);
    assert_eq!(r.report_sha256, digest(&r.canonical_json()));
}

#[test]
fn json_round_trip() {
    let r = run("period-doubling", &quick());
    let back: AnalysisReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back.canonical_json(), r.canonical_json());
    assert_eq!(back.timings, r.timings);
    let value: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(value["schema_version"], SCHEMA_VERSION);
    let keys: Vec<&str> = value
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    for key in [
        "schema_version",
        "tool_version",
        "spec",
        "options",
        "decision",
        "primitivity",
        "geometry",
        "disjointness",
        "seed",
        "patch",
        "meyer",
        "periods",
        "overlap",
        "algebraic_witness",
        "dekking",
        "cps",
        "consistency",
        "errors",
        "report_sha256",
        "timings",
    ] {
        assert!(keys.contains(&key), "{key}");
    }
    assert_eq!(value["dekking"]["result"], "coincidence");
    assert_eq!(value["decision"], "pure_point");
}

#[test]
fn corpus_reports_are_consistent() {
    let expected = [
        ("fibonacci", Decision::PurePoint, "analysed"),
        ("period-doubling", Decision::PurePoint, "unsupported"),
        ("thue-morse", Decision::NotPurePoint, "unsupported"),
        ("tribonacci", Decision::Unknown, "analysed"),
    ];
    for (name, decision, cps) in expected {
        let r = run(name, &quick());
        assert_eq!(r.decision, decision, "{name}");
        assert!(r.errors.is_empty(), "{name}: {:?}", r.errors);
        assert!(!r.consistency.is_empty());
        assert!(
            r.consistency.iter().all(|c| c.holds),
            "{name}: {:?}",
            r.consistency
        );
        let status = match &r.cps {
            CpsSection::Analysed { .. } => "analysed",
            CpsSection::Unsupported { .. } => "unsupported",
            CpsSection::Skipped { .. } => "skipped",
        };
        assert_eq!(status, cps, "{name}");
    }
    let chair = run(
        "chair",
        &AnalysisOptions {
            radius: 30.0,
            xi_radius: 6.0,
            m_max: 3,
            ..AnalysisOptions::default()
        },
    );
    assert!(chair.dekking.is_none());
    assert_eq!(chair.periods.as_ref().unwrap().rank, 0);
    assert!(
        chair.consistency.iter().all(|c| c.holds),
        "{:?}",
        chair.consistency
    );
}

#[test]
fn witness_section() {
    let fib = run("fibonacci", &quick());
    let w = fib.algebraic_witness.unwrap();
    assert_eq!(w.witness.unwrap().exponent, 1);
    let tm = run("thue-morse", &quick());
    let w = tm.algebraic_witness.unwrap();
    assert!(w.witness.is_none());
    assert_eq!(w.tested, (0..=6).collect::<Vec<_>>());
    // 2^6·2 plus the margin stays below the main radius, so the main patch is reused.
    assert_eq!(w.patch.radius, tm.patch.unwrap().radius);
    let tm = run(
        "thue-morse",
        &AnalysisOptions {
            m_max: 8,
            ..quick()
        },
    );
    assert!(tm.algebraic_witness.unwrap().patch.radius > tm.patch.unwrap().radius);
    assert_eq!(tm.dekking.as_ref().unwrap().height, 1);
}

#[test]
fn disabled_cps_is_skipped() {
    let r = run(
        "fibonacci",
        &AnalysisOptions {
            cps: false,
            ..quick()
        },
    );
    assert!(matches!(r.cps, CpsSection::Skipped { .. }));
}

#[test]
fn budgets_are_recorded_not_fatal() {
    let r = run(
        "fibonacci",
        &AnalysisOptions {
            max_tiles: 100,
            ..quick()
        },
    );
    assert!(r.budget_exceeded());
    assert!(r.errors.iter().any(|e| e.stage == "patch" && e.budget));
    assert_eq!(r.decision, Decision::Unknown);
    assert!(r.patch.is_none() && r.overlap.is_none());

    let r = run(
        "tribonacci",
        &AnalysisOptions {
            max_classes: 5,
            ..quick()
        },
    );
    assert!(r.errors.iter().any(|e| e.stage == "overlap" && e.budget));
    assert!(r.patch.is_some());
}
