//! Acceptance criteria 1–8. Each test prints one `criterion N: PASS|FAIL` line.

use std::time::{Duration, Instant};

use cohomflow::analysis::{build_initial, identity_check, IDENTITY_TOLERANCE};
use cohomflow::curvature::Connection;
use cohomflow::stencil::NodeJet;
use cohomflow::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C: f64 = 2.0;
const K: f64 = 1.0;

fn manifolds() -> [(&'static str, ManifoldSpec); 4] {
    [
        ("S4", ManifoldSpec::s4(C)),
        ("CP2", ManifoldSpec::cp2(C)),
        ("M2", ManifoldSpec::mn(2, C)),
        ("M1", ManifoldSpec::mn(1, C)),
    ]
}

fn verdict(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

/// Ricci displays with `ζ ≡ 1`, divided through by the frame lengths.
fn displayed_ricci(jet: &NodeJet, c: f64) -> [f64; 4] {
    let [_, f1, f2, f3] = jet.v;
    let [_, d1, d2, d3] = jet.d1;
    let [_, s1, s2, s3] = jet.d2;
    let k = c * c / 2.0;
    let ric00 = -s1 / f1 - s2 / f2 - s3 / f3;
    // Ric(X_i, X_i) for the cyclic triple (a, b, e) = (i, j, k).
    let axial = |a: f64, da: f64, sa: f64, b: f64, db: f64, e: f64, de: f64| {
        let x = k * (a.powi(4) - (b * b - e * e).powi(2)) / (b * b * e * e)
            - (da * a * db * e + da * a * de * b) / (b * e)
            - sa * a;
        x / (a * a)
    };
    [
        ric00,
        axial(f1, d1, s1, f2, d2, f3, d3),
        axial(f2, d2, s2, f3, d3, f1, d1),
        axial(f3, d3, s3, f1, d1, f2, d2),
    ]
}

#[test]
fn criterion_1_closed_form_ricci() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = rng.gen_range(0.5..3.0);
        let mut jet = NodeJet {
            v: [1.0; 4],
            d1: [0.0; 4],
            d2: [0.0; 4],
        };
        for j in 1..4 {
            jet.v[j] = rng.gen_range(0.3..3.0);
            jet.d1[j] = rng.gen_range(-3.0..3.0);
            jet.d2[j] = rng.gen_range(-10.0..10.0);
        }
        let ric = Connection::from_jet(&jet, c).riemann().ricci();
        let expect = displayed_ricci(&jet, c);
        for a in 0..4 {
            for b in 0..4 {
                let e = if a == b { expect[a] } else { 0.0 };
                let scale = e.abs().max(1.0);
                worst = worst.max((ric[a][b] - e).abs() / scale);
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        &format!("max relative deviation {worst:.2e} in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_einstein_fixtures() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (model, t_end) in [(ModelMetric::RoundS4, 0.05), (ModelMetric::FubiniStudy, 0.02)] {
        let start = Instant::now();
        let (report, _) = einstein_regression(model, C, t_end, 400, 1.0).unwrap();
        let elapsed = start.elapsed();
        let get = |name: &str| report.results.iter().find(|r| r.name == name).unwrap();
        let ric = get("ricci_minus_lambda");
        let homothety = get("homothety_deviation");
        let pass = ric.passed && homothety.passed && homothety.tolerance <= 1e-3 && elapsed < Duration::from_secs(60);
        ok &= pass;
        detail.push(format!(
            "{}: |Ric-Λ| {:.2e} <= {:.2e}, homothety {:.2e}, {elapsed:.1?}",
            model.name(),
            ric.value,
            ric.tolerance,
            homothety.value
        ));
    }
    verdict(2, ok, &detail.join("; "));
}

#[test]
fn criterion_3_initial_nonnegativity() {
    let start = Instant::now();
    let params = TheoremParams::default();
    assert!(params.min_sec.samples >= 20_000);
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec) in manifolds() {
        let p = build_initial(spec, InitialMetric::GroveZiller, &params).unwrap();
        let (m, node, _) = min_sec_global(&p, &params.min_sec);
        ok &= m >= -1e-6 / (K * K);
        detail.push(format!("{name} {m:.2e} at node {node}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    verdict(3, ok, &format!("{}; {elapsed:.1?}", detail.join(", ")));
}

#[test]
fn criterion_4_theorem_reproduction() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec) in manifolds() {
        let start = Instant::now();
        let out = theorem_check(spec, InitialMetric::GroveZiller, &TheoremParams::default()).unwrap();
        let elapsed = start.elapsed();
        let sec_min = out
            .sec_series
            .iter()
            .filter(|&&(t, _)| t <= 1e-3 * (1.0 + 1e-12))
            .map(|&(_, s)| s)
            .fold(f64::INFINITY, f64::min);
        let (numeric, analytic) = (
            out.report.sec_slope_numeric.unwrap_or(f64::NAN),
            out.report.sec_slope_analytic.unwrap_or(f64::NAN),
        );
        let mismatch = ((numeric - analytic) / analytic).abs();
        let pass = sec_min < -1e-8 / (K * K) && mismatch < 0.1 && elapsed < Duration::from_secs(300);
        ok &= pass;
        detail.push(format!(
            "{name}: sec {sec_min:.2e}, slope {numeric:.4} vs {analytic:.4} ({:.2}%), {elapsed:.1?}",
            100.0 * mismatch
        ));
    }
    verdict(4, ok, &detail.join("; "));
}

#[test]
fn criterion_5_integral_identity() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec) in manifolds() {
        let coarse = identity_check(spec, &TheoremParams::default()).unwrap().2;
        let fine = identity_check(
            spec,
            &TheoremParams {
                nodes: 800,
                ..Default::default()
            },
        )
        .unwrap()
        .2;
        assert!(!coarse.is_empty());
        for (a, b) in coarse.iter().zip(&fine) {
            assert_eq!(a.axis, b.axis);
            let ratio = a.residual / b.residual;
            ok &= a.residual < IDENTITY_TOLERANCE && ratio >= 2.0;
            detail.push(format!(
                "{name} axis {}: {:.2e} -> {:.2e} (x{ratio:.1})",
                a.axis, a.residual, b.residual
            ));
        }
    }
    verdict(5, ok, &detail.join("; "));
}

#[test]
fn criterion_6_smoothness_preservation() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec) in manifolds() {
        let out = theorem_check(spec, InitialMetric::GroveZiller, &TheoremParams::default()).unwrap();
        let trace = out.trace.unwrap();
        assert!(trace.completed());
        for side in [Side::Minus, Side::Plus] {
            let Some(init) = trace.initial_smoothness.get(side) else {
                continue;
            };
            let (mut slope, mut equality): (f64, f64) = (0.0, 0.0);
            for step in &trace.steps {
                let r = step.smoothness.get(side).unwrap();
                slope = slope.max(r.slope);
                equality = equality.max(r.pole_equality);
            }
            ok &= slope <= 10.0 * init.slope && equality <= 10.0 * init.pole_equality;
            detail.push(format!(
                "{name} {}: slope {:.2e}/{:.2e}, equality {:.2e}/{:.2e}",
                side.name(),
                slope,
                init.slope,
                equality,
                init.pole_equality
            ));
        }
    }
    verdict(6, ok, &detail.join("; "));
}

#[test]
fn criterion_7_homogeneous_reduction() {
    let t_end = 0.4 * K * K / (C * C);
    let model = ModelMetric::ProductCylinder { k: K };
    let p0 = build_model_metric(model, Grid::new(64, 1.0).unwrap(), C).unwrap();
    let trace = evolve(
        &p0,
        &FlowOptions {
            output_stride: 25,
            ..FlowOptions::until(t_end)
        },
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for snap in &trace.snapshots {
        let exact = (K * K - C * C * snap.t).sqrt();
        for j in 1..4 {
            for &f in snap.profile(j) {
                worst = worst.max((f - exact).abs());
            }
        }
    }
    let reached = trace.last().t;
    verdict(
        7,
        trace.completed() && (reached - t_end).abs() < 1e-14 && worst < 1e-6,
        &format!("max |f - sqrt(K^2 - c^2 t)| {worst:.2e} through t = {reached}"),
    );
}

#[test]
fn criterion_8_convergence_order() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec) in manifolds() {
        let study = refinement_study(spec, InitialMetric::GroveZiller, &TheoremParams::default(), 200).unwrap();
        ok &= (1.7..=2.5).contains(&study.order);
        detail.push(format!(
            "{name}: order {:.2} from differences {:.2e}, {:.2e}",
            study.order, study.differences[0], study.differences[1]
        ));
    }
    verdict(8, ok, &detail.join("; "));
}
