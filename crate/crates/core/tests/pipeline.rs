use std::f64::consts::PI;

use cohomflow::analysis::{build_initial, midregion_sign};
use cohomflow::io::{read_report, write_curvature, write_report, write_trace, DIAGNOSTICS_HEADER};
use cohomflow::svg::render_profiles;
use cohomflow::*;

fn round(n: usize, c: f64) -> ProfileSet {
    build_model_metric(ModelMetric::RoundS4, Grid::new(n, PI / 3.0).unwrap(), c).unwrap()
}

fn gz(spec: ManifoldSpec, n: usize) -> ProfileSet {
    build_initial(
        spec,
        InitialMetric::GroveZiller,
        &TheoremParams {
            nodes: n,
            ..Default::default()
        },
    )
    .unwrap()
}

#[test]
fn model_values_at_sixth_of_pi() {
    for (model, c, expect) in [
        (ModelMetric::RoundS4, 1.0, [1.0, 2.0, 1.0]),
        (ModelMetric::RoundS4, 2.0, [2.0, 4.0, 2.0]),
        (ModelMetric::FubiniStudy, 1.0, [0.5, 0.5, 3f64.sqrt() / 2.0]),
    ] {
        let e = model.exact(PI / 6.0, c);
        for j in 0..3 {
            assert!((e[j + 1][0] - expect[j]).abs() < 1e-14, "{} {j}", model.name());
        }
    }
}

#[test]
fn round_sphere_curvature_is_one_and_converges() {
    let err = |n: usize| {
        let p = round(n, 2.0);
        curvature_profile(&p, GhostMode::Reflect)
            .iter()
            .flat_map(|fc| fc.coordinate_secs())
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let h = PI / 3.0 / 400.0;
    let fine = err(400);
    assert!(fine < 10.0 * h * h, "{fine}");
    // Coarse grids, before roundoff near the poles takes over.
    let (e1, e2) = (err(50), err(100));
    assert!((e1 / e2).log2() >= 2.0, "{e1} {e2}");

    let p = round(100, 2.0);
    let opts = MinSecOptions {
        samples: 2000,
        ..Default::default()
    };
    let (m, _, _) = min_sec_global(&p, &opts);
    assert!((m - 1.0).abs() < 1e-3, "{m}");
    let smooth = check_smoothness(&round(400, 2.0));
    let tol = 10.0 * smooth.h * smooth.h;
    for side in [Side::Minus, Side::Plus] {
        assert!(smooth.get(side).unwrap().max() < tol);
    }
}

#[test]
fn cylinder_minimum_is_zero_on_radial_planes() {
    let p = build_model_metric(ModelMetric::ProductCylinder { k: 1.5 }, Grid::new(20, 1.0).unwrap(), 2.0).unwrap();
    let (m, plane) = min_sec_point(&p, 7, &MinSecOptions::default()).unwrap();
    assert!(m.abs() < 1e-10, "{m}");
    let radial = sec_plane(&p, 7, &TangentPlane::coordinate(7, 0, 2)).unwrap();
    assert!(radial.abs() < 1e-12);
    assert!(plane.orthonormality_defect() < 1e-10);
}

#[test]
fn grove_ziller_shapes() {
    let p = gz(ManifoldSpec::s4(2.0), 400);
    let mid = p.grid.len() / 2;
    for j in 1..4 {
        assert!((p.profile(j)[mid] - 1.0).abs() < 1e-12);
    }
    // One rising, one falling, one constant.
    assert!(p.phi[0] < 0.1 && p.phi[399] == 1.0);
    assert!(p.xi[0] == 1.0 && p.xi[399] < 0.1);
    assert!(p.psi.iter().all(|&v| v == 1.0));
    let axis = p.spec.globally_noncollapsing();
    assert_eq!(axis, vec![2]);

    let m = gz(ManifoldSpec::mn(2, 2.0), 400);
    assert!(m.psi.iter().chain(&m.xi).all(|&v| v == 1.0));
    for i in 0..200 {
        assert!((m.phi[i] - m.phi[399 - i]).abs() < 1e-13);
    }
    let svg = render_profiles(&p, "Grove-Ziller S4");
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn plateau_radial_plane_is_flat() {
    let p = gz(ManifoldSpec::s4(2.0), 400);
    let i = p.grid.len() / 2;
    let s = sec_plane(&p, i, &TangentPlane::coordinate(i, 0, 1)).unwrap();
    assert!(s.abs() < 1e-10, "{s}");
}

#[test]
fn convexity_defect_is_detected_inside_the_dip() {
    let mut p = gz(ManifoldSpec::s4(2.0), 400);
    let (center, width) = (0.5 * p.grid.length(), 0.03 * p.grid.length());
    let r: Vec<f64> = p.grid.nodes().collect();
    for (i, v) in p.psi.iter_mut().enumerate() {
        *v -= 0.01 * (-((r[i] - center) / width).powi(2)).exp();
    }
    let (m, node, _) = min_sec_global(
        &p,
        &MinSecOptions {
            samples: 2000,
            ..Default::default()
        },
    );
    assert!(m < -1e-3, "{m}");
    assert!((r[node] - center).abs() < 3.0 * width);
}

#[test]
fn calibrated_slopes() {
    let s4 = calibrate_slope(&ManifoldSpec::s4(1.0), Side::Minus, (0.5, 8.0)).unwrap();
    assert!((s4 - 2.0).abs() < 0.02, "{s4}");
    let cp2 = calibrate_slope(&ManifoldSpec::cp2(1.0), Side::Plus, (0.5, 8.0)).unwrap();
    assert!((cp2 - 2.0).abs() < 0.02, "{cp2}");
    let cp2_minus = calibrate_slope(&ManifoldSpec::cp2(1.0), Side::Minus, (0.25, 8.0)).unwrap();
    assert!((cp2_minus - 1.0).abs() < 0.01, "{cp2_minus}");
    // Bounded-curvature slope of the identity pole of M1 at c = 2; the
    // default slopes of M_n are this value.
    for n in [1, 2] {
        let spec = ManifoldSpec::mn(n, 2.0);
        let m = calibrate_slope(&spec, Side::Minus, (0.25, 8.0)).unwrap();
        assert!((m - 2.0).abs() < 1e-6, "{m}");
        assert!((spec.min_slope().unwrap() - m).abs() < 1e-6);
    }
}

#[test]
fn round_sphere_control_does_not_pass() {
    let out = theorem_check(
        ManifoldSpec::s4(2.0),
        InitialMetric::Model {
            model: ModelMetric::RoundS4,
        },
        &TheoremParams {
            min_sec: MinSecOptions {
                samples: 500,
                ..Default::default()
            },
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.report.verdict, Verdict::Fail);
    let trace = out.trace.unwrap();
    assert!(trace.snapshot_min_sec.iter().all(|&m| m >= 0.9));
}

#[test]
fn theorem_verdict_is_stable_under_refinement() {
    let base = TheoremParams::default();
    let runs = [
        base,
        TheoremParams { nodes: 800, ..base },
        TheoremParams { t_end: 5e-4, ..base },
    ];
    let reports: Vec<ExperimentReport> = runs
        .iter()
        .map(|p| theorem_check(ManifoldSpec::s4(2.0), InitialMetric::GroveZiller, p).unwrap().report)
        .collect();
    let slope0 = reports[0].sec_slope_numeric.unwrap();
    for r in &reports {
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let s = r.sec_slope_numeric.unwrap();
        assert!((s / slope0 - 1.0).abs() < 0.05);
    }
    // sec(r₀, t) ≈ −4 s₀² t / K⁴ with s₀ = 2c.
    assert!((slope0 / -64.0 - 1.0).abs() < 0.02, "{slope0}");
}

#[test]
fn midregion_report_and_artifacts() {
    let p0 = gz(ManifoldSpec::s4(2.0), 200);
    let trace = evolve(
        &p0,
        &FlowOptions {
            output_stride: 1,
            ..FlowOptions::until(1e-4)
        },
    )
    .unwrap();
    let mid = midregion_sign(&trace).unwrap();
    assert!(!mid.planes.is_empty());
    for plane in &mid.planes {
        assert!(plane.max_rate >= plane.min_rate);
    }

    let dir = tempfile::tempdir().unwrap();
    let files = write_trace(dir.path(), &trace).unwrap();
    assert_eq!(files.len(), trace.snapshots.len() + 1);
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().next().unwrap(), DIAGNOSTICS_HEADER.join(","));
    assert_eq!(diag.lines().count(), trace.steps.len() + 2);
    let back = read_profiles(&files[files.len() - 2]).unwrap();
    assert_eq!(&back, trace.last());

    let curv_path = dir.path().join("curvature.csv");
    write_curvature(&curv_path, &p0, &curvature_profile(&p0, GhostMode::Reflect)).unwrap();
    let curv = std::fs::read_to_string(&curv_path).unwrap();
    assert!(curv.starts_with("r,sec01,sec02,sec03,sec23,sec31,sec12,ric00,ric11,ric22,ric33,minsec\n"));
    assert_eq!(curv.lines().count(), 201);

    let (report, _) = einstein_regression(ModelMetric::RoundS4, 2.0, 1e-3, 60, 1.0).unwrap();
    let path = dir.path().join("report.json");
    write_report(&path, &report).unwrap();
    assert_eq!(read_report(&path).unwrap(), report);
}
