use flowgrowth_core::boxdim::{estimate_dimension, generate_set, PointCloud, SetKind};
use flowgrowth_core::ibf::{build_model, derivative_norm_law, ibf_growth_constants, IbfModel};
use flowgrowth_core::moment::{f_bound, theorem_constants};
use flowgrowth_core::rate::{sandwich, xi_checked, GrowthConstants};
use flowgrowth_core::sim::{simulate_derivative_norm, simulate_rho, SimConfig};
use flowgrowth_core::{CharacteristicBounds, HoelderSplit};
use proptest::prelude::*;
use std::collections::BTreeMap;

proptest! {
    #[test]
    fn xi_sits_in_sandwich(c in 0.01f64..10.0, ch in -10.0f64..10.0, k in 0.01f64..10.0, kh in -5.0f64..10.0,
                           d in 2u32..6, frac in 0.0f64..=1.0) {
        let gc = GrowthConstants::new(c, ch, k, kh, d, frac * d as f64).unwrap();
        let xi = xi_checked(&gc).unwrap().xi;
        let (lo, hi) = sandwich(&gc);
        prop_assert!(lo - 1e-9 <= xi && xi <= hi + 1e-9);
    }

    #[test]
    fn translation_leaves_box_counts_unchanged(shift in -100.0f64..100.0) {
        let kind = SetKind::CantorDust { ratio: 1.0 / 3.0, depth: 6, active_axes: vec![0, 1] };
        let pc = generate_set(&kind, 2).unwrap();
        let moved = pc.translated(&[shift, -shift]).unwrap();
        let (a, _) = estimate_dimension(Some(&kind), &pc).unwrap();
        let (b, _) = estimate_dimension(Some(&kind), &moved).unwrap();
        prop_assert_eq!(a.counts, b.counts);
    }
}

#[test]
fn constant_pipeline_feeds_growth_bound() {
    let cb = CharacteristicBounds {
        k1: 1.0,
        k2: 0.0,
        k3: 1.0,
        k4: 0.0,
        lambda_cap: 0.0,
        sigma: 1.0,
        c_bar: 1.0,
        d: 2,
    };
    let rates = theorem_constants(&cb, &HoelderSplit::all_twos()).unwrap();
    let xi = xi_checked(&rates.with_delta(1.0).unwrap()).unwrap().xi;
    assert!((xi - 1393.3057390419262).abs() < 1e-9);

    let hs = HoelderSplit::new([3.0; 3], [4.0; 4]).unwrap();
    assert!((f_bound(&cb, &hs, 2.0, 0.0).unwrap() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn catalog_lookup_matches_direct_constructor() {
    let mut params = BTreeMap::new();
    params.insert("ell".to_string(), 2.0);
    let a = build_model("potential-gaussian", &params, None, 3).unwrap();
    let b = IbfModel::potential_gaussian(2.0, 3).unwrap();
    assert_eq!(ibf_growth_constants(&a), ibf_growth_constants(&b));
    params.insert("sigma".to_string(), 1.0);
    assert!(build_model("potential-gaussian", &params, None, 3).is_err());
    assert!(build_model("no-such-model", &BTreeMap::new(), None, 3).is_err());
}

#[test]
fn second_moment_law_at_unit_time() {
    // log E|D phi_1|^2 = log(2)/2 - 2 + 6 for ell = 1, d = 2
    let m = IbfModel::potential_gaussian(1.0, 2).unwrap();
    let want = 0.5 * 2f64.ln() + 4.0;
    assert!((derivative_norm_law(&m, 2.0, 1.0).unwrap() - want).abs() < 1e-12);
}

#[test]
fn fixed_seed_reproduces_ensembles() {
    let m = IbfModel::potential_gaussian(1.0, 2).unwrap();
    let cfg = SimConfig {
        horizon: 0.2,
        dt: 1e-3,
        n_paths: 32,
        seed: 11,
        r0: 0.1,
        record_stride: 20,
    };
    assert_eq!(
        simulate_rho(&m, &cfg).unwrap(),
        simulate_rho(&m, &cfg).unwrap()
    );
    let other = SimConfig { seed: 12, ..cfg };
    assert_ne!(
        simulate_derivative_norm(&m, &cfg).unwrap(),
        simulate_derivative_norm(&m, &other).unwrap()
    );
}

#[test]
fn single_point_cloud_has_dimension_zero() {
    let pc = PointCloud::new(3, &[vec![1.0, 2.0, 3.0]]).unwrap();
    let (_, fit) = estimate_dimension(None, &pc).unwrap();
    assert_eq!(fit.slope, 0.0);
}
