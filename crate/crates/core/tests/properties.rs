use cohomflow::curvature::{min_sec_operator, Connection};
use cohomflow::stencil::NodeJet;
use cohomflow::*;
use proptest::prelude::*;

fn jet_strategy() -> impl Strategy<Value = NodeJet> {
    (
        prop::array::uniform4(0.3f64..3.0),
        prop::array::uniform4(-3.0f64..3.0),
        prop::array::uniform4(-10.0f64..10.0),
    )
        .prop_map(|(v, d1, d2)| NodeJet { v, d1, d2 })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transition_is_monotone_and_concave(
        slope in 0.5f64..5.0,
        width in 0.2f64..3.0,
        sharpness in 0.05f64..20.0,
        x in 0.0f64..4.0,
    ) {
        let f = TransitionProfile::new(slope, width, sharpness).unwrap();
        let j = f.eval(x);
        prop_assert!(j.d1 >= 0.0 && j.d1 <= slope * (1.0 + 1e-12));
        prop_assert!(j.d2 <= 1e-12);
        prop_assert!(j.value >= 0.0 && j.value <= f.plateau() * (1.0 + 1e-12));
        let odd = f.eval(-x);
        prop_assert!(close(odd.value, -j.value, 1e-14) && close(odd.d1, j.d1, 1e-14));
    }

    #[test]
    fn koszul_ricci_matches_closed_form(jet in jet_strategy(), c in 0.5f64..3.0) {
        let ric = Connection::from_jet(&jet, c).riemann().ricci();
        let closed = ricci_closed_form(&jet, c);
        for a in 0..4 {
            prop_assert!(close(ric[a][a], closed[a], 1e-10), "{a}: {} vs {}", ric[a][a], closed[a]);
            for b in 0..4 {
                if a != b {
                    prop_assert!(ric[a][b].abs() <= 1e-10 * closed.iter().fold(1.0, |m, x| f64::max(m, x.abs())));
                }
            }
        }
    }

    #[test]
    fn riemann_symmetries_and_bianchi(jet in jet_strategy(), c in 0.5f64..3.0) {
        let rm = Connection::from_jet(&jet, c).riemann();
        let scale = rm.0.iter().flatten().flatten().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(rm.bianchi_defect() <= 1e-12 * scale);
        for a in 0..4 { for b in 0..4 { for x in 0..4 { for y in 0..4 {
            prop_assert!((rm.0[a][b][x][y] + rm.0[b][a][x][y]).abs() <= 1e-12 * scale);
            prop_assert!((rm.0[a][b][x][y] - rm.0[x][y][a][b]).abs() <= 1e-12 * scale);
        }}}}
    }

    #[test]
    fn operator_has_block_structure(jet in jet_strategy(), c in 0.5f64..3.0) {
        let fc = FrameCurvature::from_jet(0, &jet, c);
        prop_assert!(fc.asymmetry() <= 1e-12 * fc.norm());
        prop_assert!(fc.block_defect() <= 1e-12 * fc.norm());
    }

    #[test]
    fn traces_are_consistent(jet in jet_strategy(), c in 0.5f64..3.0) {
        let fc = FrameCurvature::from_jet(0, &jet, c);
        for a in 0..4 {
            let sum: f64 = (0..4).filter(|&b| b != a).map(|b| fc.sec(a, b)).sum();
            prop_assert!(close(sum, fc.ricci[a], 1e-10));
        }
        let twice: f64 = 2.0 * fc.coordinate_secs().iter().sum::<f64>();
        prop_assert!(close(twice, fc.scalar(), 1e-10));
    }

    /// `(c, f) → (λc, λf)` leaves the frame curvature unchanged.
    #[test]
    fn bracket_scaling_invariance(jet in jet_strategy(), c in 0.5f64..3.0, lambda in 0.2f64..5.0) {
        let mut scaled = jet;
        for j in 1..4 {
            scaled.v[j] *= lambda;
            scaled.d1[j] *= lambda;
            scaled.d2[j] *= lambda;
        }
        let a = ricci_closed_form(&jet, c);
        let b = ricci_closed_form(&scaled, lambda * c);
        for k in 0..4 {
            prop_assert!(close(a[k], b[k], 1e-10));
        }
        let fa = FrameCurvature::from_jet(0, &jet, c);
        let fb = FrameCurvature::from_jet(0, &scaled, lambda * c);
        prop_assert!((fa.operator - fb.operator).abs().max() <= 1e-10 * fa.norm());
    }

    /// The sampled minimum never beats the exact four-dimensional minimum
    /// and lands on it after descent.
    #[test]
    fn min_sec_sampling_agrees_with_thorpe(jet in jet_strategy(), c in 0.5f64..3.0, seed in 0u64..1000) {
        let fc = FrameCurvature::from_jet(0, &jet, c);
        let exact = min_sec_thorpe(&fc);
        let opts = MinSecOptions { samples: 500, seed, ..Default::default() };
        let (sampled, plane) = min_sec_operator(&fc, &opts);
        prop_assert!(sampled >= exact - 1e-9 * fc.norm());
        prop_assert!(sampled <= exact + 1e-7 * fc.norm(), "{sampled} vs {exact}");
        prop_assert!(plane.orthonormality_defect() < 1e-10);
        prop_assert!(fc.coordinate_secs().iter().all(|&s| s >= exact - 1e-12 * fc.norm()));
    }

    #[test]
    fn profile_csv_round_trip(
        cols in prop::collection::vec(prop::array::uniform4(1e-3f64..1e3), 6..40),
        t in 0.0f64..1.0,
    ) {
        let n = cols.len();
        let mut profiles: [Vec<f64>; 4] = Default::default();
        for row in &cols {
            for j in 0..4 {
                profiles[j].push(row[j]);
            }
        }
        let spec = ManifoldSpec::cylinder(2.0, 1.7);
        let p = ProfileSet::new(spec, Grid::new(n, 1.7).unwrap(), t, profiles).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_profiles(&path, &p).unwrap();
        let q = read_profiles(&path).unwrap();
        prop_assert_eq!(p, q);
    }
}
