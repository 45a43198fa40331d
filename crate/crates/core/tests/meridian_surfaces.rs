use pnmc_core::frame_invariants::{
    classify_pnmc, mean_curvature, normal_functions, sweep_functions, ClassifyOptions, PnmcTag,
};
use pnmc_core::meridian::{build_meridian, closed_form_functions, CurvatureProfile, MeridianFamily};
use pnmc_core::pseudo_euclidean::{causal_character, inner, Ambient, CausalCharacter, Epsilon};
use pnmc_core::surface::{eval_jet, JetOrder, ParamDomain, SurfaceMap};

fn profiles() -> Vec<CurvatureProfile> {
    vec![
        CurvatureProfile::constant(1.0),
        CurvatureProfile::polynomial(vec![0.8, 0.4]),
        CurvatureProfile::sine(1.0, 0.3, 1.0),
    ]
}

#[test]
fn functions_match_closed_forms_on_grid() {
    for fam in [MeridianFamily::Euclidean, MeridianFamily::Parabolic] {
        for k in profiles() {
            let m = build_meridian(fam, &k, (-0.5, 2.5), 1e-3).unwrap();
            let d = ParamDomain::new(0.0, 2.0, 0.0, 2.0, 15, 15).unwrap();
            let grid = sweep_functions(&m, &d, fam.signature(), 1e-4).unwrap();
            for n in &grid.nodes {
                let (lam, mu, nu) = closed_form_functions(fam, &k, n.u, n.v).unwrap();
                let f = n.functions;
                assert!((f.lambda.abs() - lam.abs()).abs() < 1e-8, "{fam} {} λ at {}, {}", k.description, n.u, n.v);
                assert!((f.mu.abs() - mu.abs()).abs() < 1e-8);
                assert!((f.nu1 - nu).abs() < 1e-8 && (f.nu2 - nu).abs() < 1e-8);
                assert!(f.beta_max() < 1e-6, "{f:?}");
            }
        }
    }
}

#[test]
fn mean_curvature_causal_type() {
    let k = CurvatureProfile::sine(1.0, 0.3, 1.0);
    let m = build_meridian(MeridianFamily::Parabolic, &k, (-0.5, 2.5), 1e-3).unwrap();
    for (u, v) in [(0.0, 0.0), (0.7, 1.9), (2.0, 2.0)] {
        let j = eval_jet(&m, u, v, JetOrder::Two, 0.0).unwrap();
        let h = mean_curvature(&j, m.signature()).unwrap();
        assert_eq!(causal_character(&h, m.signature(), 1e-10), CausalCharacter::Spacelike);
        let (frame, _) = normal_functions(&j, m.signature()).unwrap();
        assert_eq!(frame.ambient, Ambient::Minkowski(Epsilon::Spacelike));
    }
}

#[test]
fn both_families_are_pnmc_with_nonparallel_h() {
    for fam in [MeridianFamily::Euclidean, MeridianFamily::Parabolic] {
        for k in profiles() {
            let m = build_meridian(fam, &k, (-0.5, 2.5), 1e-3).unwrap();
            let d = ParamDomain::new(0.0, 2.0, 0.0, 2.0, 9, 9).unwrap();
            let opts = ClassifyOptions { h: Some(1e-4), ..Default::default() };
            let c = classify_pnmc(&m, &d, fam.signature(), &opts).unwrap();
            assert_eq!(c.tag, PnmcTag::PnmcNonparallelH, "{fam} {}: {c:?}", k.description);
            assert!(c.sup_beta < 1e-6);
        }
    }
}

#[test]
fn squared_mean_curvature_varies_along_meridians() {
    let k = CurvatureProfile::constant(1.0);
    for fam in [MeridianFamily::Euclidean, MeridianFamily::Parabolic] {
        let m = build_meridian(fam, &k, (-0.5, 2.5), 1e-3).unwrap();
        let s = fam.signature();
        let hh = |u: f64| {
            let j = eval_jet(&m, u, 1.0, JetOrder::Two, 0.0).unwrap();
            let h = mean_curvature(&j, s).unwrap();
            inner(&h, &h, s)
        };
        assert!((hh(0.0) - hh(1.5)).abs() > 1e-2);
    }
}

#[test]
fn first_forms_are_not_canonical_in_original_parameters() {
    let k = CurvatureProfile::constant(1.0);
    let m = build_meridian(MeridianFamily::Euclidean, &k, (-0.5, 2.5), 1e-3).unwrap();
    let d = ParamDomain::new(0.0, 2.0, 0.0, 2.0, 5, 5).unwrap();
    let grid = sweep_functions(&m, &d, m.signature(), 1e-4).unwrap();
    // the frame sits at 45° to the coordinate lines
    for n in &grid.nodes {
        let (a, b) = n.directions.x;
        let ratio = (b * n.form.g.sqrt()) / (a * n.form.e.sqrt());
        assert!((ratio.abs() - 1.0).abs() < 1e-9, "{ratio}");
    }
}
