mod common;

use cohomflow::analysis::identity_check;
use cohomflow::*;
use serde_json::json;

fn small() -> TheoremParams {
    TheoremParams {
        nodes: 100,
        t_end: 2e-4,
        min_sec: MinSecOptions {
            samples: 200,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn reports_match_the_schema() {
    let schema = common::report_schema();
    let theorem = theorem_check(ManifoldSpec::cp2(2.0), InitialMetric::GroveZiller, &small()).unwrap().report;
    let identity = identity_check(ManifoldSpec::mn(1, 2.0), &small()).unwrap().0;
    let (einstein, _) = einstein_regression(ModelMetric::FubiniStudy, 2.0, 1e-4, 40, 1.0).unwrap();
    for report in [theorem, identity, einstein] {
        let v = serde_json::to_value(&report).unwrap();
        let errs = common::validate(&schema, &v, "$");
        assert!(errs.is_empty(), "{errs:#?}");
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let schema = common::report_schema();
    let bad = json!({
        "experiment": "check-theorem", "manifold": "S4", "n": null, "c": 2.0, "N": -1,
        "t_end": 1e-3, "verdict": "maybe", "results": [{"name": "x", "value": 1.0}],
        "artifacts": [], "extra": 1
    });
    let errs = common::validate(&schema, &bad, "$");
    for needle in ["$.N", "$.verdict", "missing `tolerance`", "unexpected `extra`"] {
        assert!(errs.iter().any(|e| e.contains(needle)), "{needle}: {errs:#?}");
    }
}
