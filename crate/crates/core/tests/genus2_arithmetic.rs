use dpw_core::genus2::{
    cantor_add, complete_to_ks, divisor_of, is_linearly_equivalent, jacobian_class, riemann_roch_space, rr_basis,
    section_admissibility, spin_structure, BundleTag, CurveFunction, CurvePoint, Divisor, HyperellipticCurve,
    MumfordDivisor, RationalSection,
};
use dpw_core::poly::{Poly, RationalFunction};
use dpw_core::potential::SpinPartition;
use dpw_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_point(curve: &HyperellipticCurve, rng: &mut impl Rng) -> CurvePoint {
    let z = c(rng.gen_range(-1.8..1.8), rng.gen_range(-1.8..1.8));
    curve.point_at(z, if rng.gen::<bool>() { 1 } else { -1 })
}

/// `P + Q − R − S` with random points.
fn random_degree_zero(curve: &HyperellipticCurve, rng: &mut impl Rng) -> Divisor {
    let p: Vec<CurvePoint> = (0..4).map(|_| random_point(curve, rng)).collect();
    Divisor::from_terms(vec![(p[0], 1), (p[1], 1), (p[2], -1), (p[3], -1)])
}

fn w(curve: &HyperellipticCurve, k: usize) -> Divisor {
    Divisor::point(curve.weierstrass(k))
}

/// Principal iff `h⁰ = 1` for a degree-zero divisor.
fn principal_by_rr(curve: &HyperellipticCurve, d: &Divisor) -> bool {
    assert_eq!(d.degree(), 0);
    riemann_roch_space(curve, d).len() == 1
}

/// Effective divisor of a reduced class plus `W₅` padding to degree 2.
fn class_as_divisor(curve: &HyperellipticCurve, m: &MumfordDivisor) -> Divisor {
    let mut terms: Vec<(CurvePoint, i32)> = m.support().iter().map(|p| (*p, 1)).collect();
    terms.push((curve.weierstrass(5), -(m.degree() as i32)));
    Divisor::from_terms(terms)
}

#[test]
fn group_axioms_on_random_divisors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let curve = HyperellipticCurve::random(&mut rng);
    let classes: Vec<MumfordDivisor> =
        (0..100).map(|_| jacobian_class(&random_degree_zero(&curve, &mut rng), &curve).unwrap()).collect();
    let e = MumfordDivisor::neutral();
    for (k, a) in classes.iter().enumerate() {
        assert!(a.residual(&curve) < 1e-8, "{a}");
        let b = &classes[(k + 1) % 100];
        let d = &classes[(k + 7) % 100];
        assert!(cantor_add(a, &e, &curve).unwrap().approx_eq(a, 1e-8));
        assert!(cantor_add(a, &a.negate(), &curve).unwrap().is_neutral());
        let ab = cantor_add(a, b, &curve).unwrap();
        assert!(ab.approx_eq(&cantor_add(b, a, &curve).unwrap(), 1e-7), "{ab}");
        let left = cantor_add(&ab, d, &curve).unwrap();
        let right = cantor_add(a, &cantor_add(b, d, &curve).unwrap(), &curve).unwrap();
        assert!(left.approx_eq(&right, 1e-6), "{left} vs {right}");
    }
}

#[test]
fn sums_agree_with_riemann_roch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let curve = HyperellipticCurve::random(&mut rng);
    for _ in 0..20 {
        let ds: Vec<Divisor> = (0..3).map(|_| random_degree_zero(&curve, &mut rng)).collect();
        let cl: Vec<MumfordDivisor> = ds.iter().map(|d| jacobian_class(d, &curve).unwrap()).collect();
        let sum = cantor_add(&cantor_add(&cl[0], &cl[1], &curve).unwrap(), &cl[2], &curve).unwrap();
        let total = ds[0].plus(&ds[1]).plus(&ds[2]);
        assert!(principal_by_rr(&curve, &total.minus(&class_as_divisor(&curve, &sum))));
        // A wrong answer is detected by the oracle.
        let off = cantor_add(&sum, &cl[0], &curve).unwrap();
        if !cl[0].is_neutral() {
            assert!(!principal_by_rr(&curve, &total.minus(&class_as_divisor(&curve, &off))));
        }
    }
}

#[test]
fn weierstrass_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for curve in [HyperellipticCurve::lawson(), HyperellipticCurve::random(&mut rng)] {
        for i in 0..6 {
            for j in 0..6 {
                assert!(is_linearly_equivalent(&w(&curve, i).scaled(2), &w(&curve, j).scaled(2), &curve).unwrap());
            }
        }
        let w12 = w(&curve, 0).plus(&w(&curve, 1));
        assert!(!is_linearly_equivalent(&w12, &w(&curve, 2).scaled(2), &curve).unwrap());
        assert!(!principal_by_rr(&curve, &w12.minus(&w(&curve, 2).scaled(2))));
        let a = w12.plus(&w(&curve, 2));
        let b = w(&curve, 3).plus(&w(&curve, 4)).plus(&w(&curve, 5));
        assert!(is_linearly_equivalent(&a, &b, &curve).unwrap());
        assert!(principal_by_rr(&curve, &a.minus(&b)));
        assert!(is_linearly_equivalent(&w12, &w(&curve, 0), &curve).is_err());
    }
}

#[test]
fn all_partitions_give_even_spin_structures() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for curve in [HyperellipticCurve::lawson(), HyperellipticCurve::random(&mut rng), HyperellipticCurve::random(&mut rng)] {
        for part in SpinPartition::all() {
            let s = spin_structure(&part, &curve).unwrap();
            assert_eq!(s.divisor.degree(), 1);
            assert!(riemann_roch_space(&curve, &s.divisor).is_empty());
            assert_eq!(riemann_roch_space(&curve, &s.ks_divisor).len(), 2);
        }
    }
}

/// `z`-roots of the Bezoutian `[U(z₀)T(z) − T(z₀)U(z)]/(z − z₀)`.
fn bezout_roots(curve: &HyperellipticCurve, part: &SpinPartition, z0: C64) -> Vec<C64> {
    let e = curve.roots();
    let t = Poly::from_roots(&part.first.map(|k| e[k]));
    let u = Poly::from_roots(&part.second.map(|k| e[k])).scale(curve.leading());
    let num = &t.scale(u.eval(z0)) - &u.scale(t.eval(z0));
    num.exact_div(&Poly::linear_root(z0)).roots()
}

#[test]
fn completion_to_ks() {
    let curve = HyperellipticCurve::lawson();
    let part = SpinPartition::new([0, 1, 2], [3, 4, 5]).unwrap();
    let spin = spin_structure(&part, &curve).unwrap();
    let (a, b) = complete_to_ks(&curve.weierstrass(0), &spin, &curve).unwrap();
    let mut got = [curve.weierstrass_index(&a), curve.weierstrass_index(&b)];
    got.sort();
    assert_eq!(got, [Some(1), Some(2)]);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let curve = HyperellipticCurve::random(&mut rng);
        for part in SpinPartition::all().into_iter().step_by(3) {
            let spin = spin_structure(&part, &curve).unwrap();
            let p = random_point(&curve, &mut rng);
            let (a, b) = complete_to_ks(&p, &spin, &curve).unwrap();
            let d = Divisor::from_terms(vec![(p, 1), (a, 1), (b, 1)]);
            assert!(is_linearly_equivalent(&d, &spin.ks_divisor, &curve).unwrap());
            let roots = bezout_roots(&curve, &part, p.z().unwrap());
            for q in [a, b] {
                let z = q.z().unwrap();
                let dist = roots.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min);
                assert!(dist < 1e-6, "{z} {roots:?}");
            }
        }
    }
}

#[test]
fn bundle_dimensions_and_canonical_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let curve = HyperellipticCurve::random(&mut rng);
    let k = rr_basis(BundleTag::K, &curve, None).unwrap();
    assert_eq!(k.len(), 2);
    for (deg, s) in k.iter().enumerate() {
        let h = s.function();
        assert!(h.b.is_zero() && h.den.degree() == Some(0));
        let mut expect = vec![C64::new(0.0, 0.0); deg + 1];
        expect[deg] = C64::new(1.0, 0.0) * h.den.coeff(0);
        assert!((&h.a - &Poly::new(expect)).max_abs() < 1e-10, "{:?}", h.a);
    }
    for part in SpinPartition::all() {
        let spin = spin_structure(&part, &curve).unwrap();
        for tag in BundleTag::ALL {
            let basis = rr_basis(tag, &curve, Some(&spin)).unwrap();
            assert_eq!(basis.len(), tag.expected_dimension(), "{tag:?} {part:?}");
            for s in &basis {
                let adm = section_admissibility(s, &curve, Some(&spin)).unwrap();
                assert!(adm >= 0, "{tag:?} {part:?} {adm} {:?}", s.function());
            }
        }
    }
    assert!(rr_basis(BundleTag::KS, &curve, None).is_err());
    let bad = RationalSection {
        a: RationalFunction::poly(Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])),
        b: RationalFunction::zero(),
        tag: BundleTag::K,
    };
    assert!(section_admissibility(&bad, &curve, None).unwrap() < 0);
}

#[test]
fn small_riemann_roch_spaces() {
    let curve = HyperellipticCurve::lawson();
    let p = curve.point_at(c(0.3, 0.4), 1);
    assert_eq!(riemann_roch_space(&curve, &Divisor::zero()).len(), 1);
    assert_eq!(riemann_roch_space(&curve, &Divisor::point(p)).len(), 1);
    assert_eq!(riemann_roch_space(&curve, &w(&curve, 1).scaled(2)).len(), 2);
    assert_eq!(riemann_roch_space(&curve, &curve.canonical_divisor()).len(), 2);
    // Riemann–Roch for degree ≥ 3: h⁰ = deg − 1.
    let q = curve.point_at(c(-0.7, 0.1), -1);
    let d = Divisor::from_terms(vec![(p, 2), (q, 1), (curve.infinity(1), 1)]);
    assert_eq!(riemann_roch_space(&curve, &d).len(), 3);
}

#[test]
fn divisors_of_functions_are_principal() {
    let curve = HyperellipticCurve::lawson();
    let h = CurveFunction {
        a: Poly::new(vec![c(0.2, 0.1), c(1.0, 0.0), c(0.0, 0.3)]),
        b: Poly::new(vec![c(0.5, 0.0)]),
        den: Poly::linear_root(c(0.4, -0.2)),
    };
    let d = divisor_of(&curve, &h);
    assert_eq!(d.degree(), 0);
    assert!(jacobian_class(&d, &curve).unwrap().is_neutral());
    let y = CurveFunction { a: Poly::zero(), b: Poly::one(), den: Poly::one() };
    let dy = divisor_of(&curve, &y);
    for k in 0..6 {
        assert_eq!(dy.multiplicity(&curve.weierstrass(k)), 1);
    }
    assert_eq!(dy.multiplicity(&curve.infinity(1)), -3);
}

#[test]
fn weierstrass_completions_stay_in_their_triple() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for curve in [HyperellipticCurve::lawson(), HyperellipticCurve::random(&mut rng)] {
        for part in SpinPartition::all() {
            let spin = spin_structure(&part, &curve).unwrap();
            for k in 0..6 {
                let triple = if part.first.contains(&k) { part.first } else { part.second };
                let (a, b) = complete_to_ks(&curve.weierstrass(k), &spin, &curve).unwrap();
                let mut got = [curve.weierstrass_index(&a).unwrap(), curve.weierstrass_index(&b).unwrap(), k];
                got.sort();
                assert_eq!(got, triple, "{part:?} W{k}");
            }
        }
    }
}

#[test]
fn curve_and_class_serialization() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let curve = HyperellipticCurve::random(&mut rng);
    let json = serde_json::to_string(&curve).unwrap();
    let back: HyperellipticCurve = serde_json::from_str(&json).unwrap();
    assert_eq!(back.roots(), curve.roots());
    let d = jacobian_class(&random_degree_zero(&curve, &mut rng), &curve).unwrap();
    let parsed = MumfordDivisor::parse(&d.to_string(), &curve).unwrap();
    assert!(parsed.approx_eq(&d, 1e-9));
}

mod properties {
    use super::*;
    use dpw_core::genus2::point_class;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn class_plus_negation_is_neutral(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let curve = HyperellipticCurve::random(&mut rng);
            let d = Divisor::from_terms(vec![(random_point(&curve, &mut rng), 1), (random_point(&curve, &mut rng), 1)]);
            let cls = jacobian_class(&d, &curve).unwrap();
            prop_assert!(cantor_add(&cls, &cls.negate(), &curve).unwrap().is_neutral());
            // The hyperelliptic involution negates point classes.
            let p = random_point(&curve, &mut rng);
            let sum = cantor_add(&point_class(&p, &curve).unwrap(), &point_class(&curve.involution(&p), &curve).unwrap(), &curve).unwrap();
            prop_assert!(sum.is_neutral());
        }

        #[test]
        fn addition_commutes(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let curve = HyperellipticCurve::random(&mut rng);
            let a = point_class(&random_point(&curve, &mut rng), &curve).unwrap();
            let b = jacobian_class(&Divisor::from_terms(vec![(random_point(&curve, &mut rng), 1), (random_point(&curve, &mut rng), 1)]), &curve).unwrap();
            let (ab, ba) = (cantor_add(&a, &b, &curve).unwrap(), cantor_add(&b, &a, &curve).unwrap());
            prop_assert!(ab.approx_eq(&ba, 1e-7), "{}", ab.distance(&ba));
        }
    }
}
