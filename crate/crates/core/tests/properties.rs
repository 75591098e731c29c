//! Property tests for the invariants of the core types.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cokinetic::fields::{CoIsotopy, InverseIsotopy, Isotopy};
use cokinetic::linalg::{canonical_couple, is_cosymplectic, pullback_couple, reeb_vector};
use cokinetic::manifold::{Coords, FourierScalar, FourierTerm, ModelSpec};
use cokinetic::norms::{distance_ch, length_l1inf, length_linf, Flavor, QuadratureOptions};
use cokinetic::random::{random_curve, random_generator, TrigShape};
use cokinetic::Tolerances;

fn quad() -> QuadratureOptions {
    QuadratureOptions {
        panels: 16,
        osc_resolution: 32,
        z_grid: 8,
    }
}

prop_compose! {
    fn xy_term()(kx in -2i32..=2, ky in -2i32..=2, a in -1.0f64..1.0, b in -1.0f64..1.0) -> FourierTerm {
        let (kx, ky) = if kx == 0 && ky == 0 { (1, 0) } else { (kx, ky) };
        FourierTerm { k: vec![kx, ky, 0], a, b }
    }
}

prop_compose! {
    fn scalar()(terms in prop::collection::vec(xy_term(), 1..5)) -> FourierScalar {
        FourierScalar::from_terms(3, terms).unwrap()
    }
}

fn iso_from(seed: u64, steps: usize) -> CoIsotopy {
    let model = ModelSpec::circle(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CoIsotopy::co_hamiltonian(model, random_generator(&mut rng, &model, &TrigShape::default()), steps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn osc_enclosure_is_ordered(f in scalar()) {
        let e = f.osc(32).unwrap();
        prop_assert!(0.0 <= e.lo && e.lo <= e.value + 1e-12 && e.value <= e.hi + 1e-12);
    }

    #[test]
    fn osc_ignores_constants(f in scalar(), c in -5.0f64..5.0) {
        let a = f.osc(32).unwrap();
        let b = f.add(&FourierScalar::constant(3, c)).osc(32).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-9);
    }

    #[test]
    fn osc_is_absolutely_homogeneous(f in scalar(), s in -3.0f64..3.0) {
        let a = f.osc(32).unwrap();
        let b = f.scale(s).osc(32).unwrap();
        prop_assert!(b.lo <= s.abs() * a.hi + 1e-9);
        prop_assert!(s.abs() * a.lo <= b.hi + 1e-9);
    }

    #[test]
    fn osc_is_subadditive(f in scalar(), g in scalar()) {
        let s = f.add(&g).osc(32).unwrap();
        let (a, b) = (f.osc(32).unwrap(), g.osc(32).unwrap());
        prop_assert!(s.lo <= a.hi + b.hi + 1e-9);
    }

    #[test]
    fn osc_is_translation_invariant(f in scalar(), sx in 0.0f64..6.3, sy in 0.0f64..6.3) {
        let a = f.osc(32).unwrap();
        let b = f.translate(&[sx, sy, 0.0]).osc(32).unwrap();
        prop_assert!(b.lo <= a.hi + 1e-9 && a.lo <= b.hi + 1e-9);
    }

    #[test]
    fn pulled_back_couples_stay_cosymplectic(entries in prop::collection::vec(-1.0f64..1.0, 9)) {
        let p = DMatrix::from_row_slice(3, 3, &entries) + DMatrix::identity(3, 3) * 2.5;
        let c = canonical_couple(1).unwrap();
        let q = pullback_couple(&c, &p).unwrap();
        prop_assert!(is_cosymplectic(&q));
        // the Reeb vector transforms as a vector: ξ' = P⁻¹ξ
        let xi = reeb_vector(&c).unwrap();
        let xi_q = reeb_vector(&q).unwrap();
        let expected: DVector<f64> = p.clone().try_inverse().unwrap() * xi;
        prop_assert!((xi_q - expected).amax() <= 1e-9);
    }

    #[test]
    fn flat_distance_is_a_metric(a in prop::collection::vec(-10.0f64..10.0, 3),
                                 b in prop::collection::vec(-10.0f64..10.0, 3),
                                 c in prop::collection::vec(-10.0f64..10.0, 3)) {
        for model in [ModelSpec::circle(1), ModelSpec::line(1)] {
            let (a, b, c) = (Coords::from_slice(&a), Coords::from_slice(&b), Coords::from_slice(&c));
            prop_assert!(model.distance(&a, &a) == 0.0);
            prop_assert!((model.distance(&a, &b) - model.distance(&b, &a)).abs() <= 1e-12);
            prop_assert!(model.distance(&a, &c) <= model.distance(&a, &b) + model.distance(&b, &c) + 1e-12);
            let r = model.reduce(&a);
            prop_assert!(model.distance(&a, &r) <= 1e-12);
        }
    }

    #[test]
    fn curves_fix_endpoints_and_increase(seed in any::<u64>()) {
        let z = random_curve(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(z.value(0.0).abs() <= 1e-15 && (z.value(1.0) - 1.0).abs() <= 1e-12);
        prop_assert!(z.is_monotone() && z.max_deriv() >= 1.0 - 1e-12);
    }

    #[test]
    fn tolerances_round_trip(tol_flow in 1e-12f64..1.0, steps in 1usize..4096) {
        let t = Tolerances { tol_flow, steps, ..Default::default() };
        let back: Tolerances = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        prop_assert_eq!(t, back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn inverse_map_undoes_map(seed in any::<u64>(), t in 0.0f64..1.0, p in prop::collection::vec(0.0f64..6.28, 3)) {
        // backward RK4 inverts the forward scheme only to integrator accuracy
        let iso = iso_from(seed, 1024);
        let p = Coords::from_slice(&p);
        let back = iso.inverse_map(&iso.map(&p, t), t);
        prop_assert!(back.sub(&p).max_abs() <= Tolerances::default().tol_flow);
    }

    #[test]
    fn co_hofer_distance_axioms(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (a, b, c) = (iso_from(s1, 16), iso_from(s2, 16), iso_from(s3, 16));
        let q = quad();
        for flavor in [Flavor::L1Inf, Flavor::Linf] {
            let aa = distance_ch(&a, &a, flavor, &q).unwrap();
            prop_assert!(aa.upper <= 1e-12);
            let ab = distance_ch(&a, &b, flavor, &q).unwrap();
            let ba = distance_ch(&b, &a, flavor, &q).unwrap();
            prop_assert!((ab.value - ba.value).abs() <= 1e-12);
            let bc = distance_ch(&b, &c, flavor, &q).unwrap();
            let ac = distance_ch(&a, &c, flavor, &q).unwrap();
            prop_assert!(ac.lower <= ab.upper + bc.upper + 1e-9);
        }
    }

    #[test]
    fn l1inf_never_exceeds_linf(seed in any::<u64>()) {
        let iso = iso_from(seed, 16);
        let q = quad();
        let l1 = length_l1inf(&iso, &q).unwrap();
        let li = length_linf(&iso, &q).unwrap();
        prop_assert!(l1.lower <= li.upper + 1e-12);
        prop_assert!(l1.value <= li.value + 1e-9);
    }

    #[test]
    fn inverse_path_has_the_same_length(seed in any::<u64>()) {
        let iso = iso_from(seed, 16);
        let q = quad();
        let inv = InverseIsotopy::new(&iso);
        let a = length_linf(&iso, &q).unwrap();
        let b = length_linf(&inv, &q).unwrap();
        prop_assert!(b.lower <= a.upper + 1e-9 && a.lower <= b.upper + 1e-9);
    }
}
