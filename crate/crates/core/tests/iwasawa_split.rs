use std::time::Instant;

use dpw_core::iwasawa::{iwasawa, iwasawa_with, spectral_factorize, FactorOptions};
use dpw_core::loopcore::{random_invertible_loop, unit_circle};
use dpw_core::{Matrix2, MatrixLoop, C64};
use nalgebra::Matrix2 as NMatrix2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sup_diff(a: &MatrixLoop, b: &MatrixLoop) -> f64 {
    (a - b).sup_norm_sampled(64)
}

#[test]
fn random_loops_reconstruct() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let psi = random_invertible_loop(&mut rng, 8, 0.1);
        let r = iwasawa(&psi, 1e-10).unwrap();
        assert!(sup_diff(&psi, &r.f.mul(&r.b)) < 1e-9);
        assert!(r.f.unitarity_defect(64) < 1e-9);
        assert!(r.b.is_plus(0.0));
    }
}

#[test]
fn constant_matrix_matches_dense_qr() {
    let m = Matrix2::new(
        C64::new(0.3, -1.2),
        C64::new(2.0, 0.5),
        C64::new(-0.7, 0.1),
        C64::new(0.4, 0.9),
    );
    let r = iwasawa(&MatrixLoop::constant(m), 1e-12).unwrap();

    let dense = NMatrix2::new(m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]);
    let qr = dense.qr();
    let (mut q, mut rr) = (qr.q(), qr.r());
    // Fix phases so that R has a positive real diagonal.
    for k in 0..2 {
        let d = rr[(k, k)];
        let phase = d / d.norm();
        for c in 0..2 {
            rr[(k, c)] /= phase;
            q[(c, k)] *= phase;
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            assert!((r.f.coeff(0).0[i][j] - q[(i, j)]).norm() < 1e-12);
            assert!((r.b.coeff(0).0[i][j] - rr[(i, j)]).norm() < 1e-12);
        }
    }
}

#[test]
fn block_size_does_not_change_the_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tol = 1e-10;
    for _ in 0..3 {
        let psi = random_invertible_loop(&mut rng, 4, 0.1);
        let small = iwasawa_with(&psi, &FactorOptions { initial_blocks: 8, max_blocks: 8, ..FactorOptions::with_tol(tol) }).unwrap();
        let large = iwasawa_with(&psi, &FactorOptions { initial_blocks: 64, max_blocks: 64, ..FactorOptions::with_tol(tol) }).unwrap();
        assert!(sup_diff(&small.f, &large.f) < 100.0 * tol);
    }
}

fn unipotent(power: i32, upper: bool, c: C64) -> MatrixLoop {
    let n = if upper { Matrix2::e_plus() } else { Matrix2::e_minus() };
    &MatrixLoop::identity() + &MatrixLoop::monomial(power, n * c)
}

#[test]
fn special_linear_loops_keep_determinant_normalization() {
    let psi = unipotent(-1, true, C64::new(0.4, 0.2))
        .mul(&unipotent(1, false, C64::new(-0.3, 0.5)))
        .mul(&unipotent(2, true, C64::new(0.7, 0.0)));
    let r = iwasawa(&psi, 1e-10).unwrap();
    for z in unit_circle(32) {
        assert!((psi.eval(z).unwrap().det() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((r.f.eval(z).unwrap().det().norm() - 1.0).abs() < 1e-9);
    }
    let b0 = r.b.coeff(0).det();
    assert!(b0.re > 0.0 && b0.im.abs() < 1e-14);
}

#[test]
fn factor_of_hermitian_square() {
    // J = star(B)B for a known normalized plus loop B.
    let b = MatrixLoop::from_coeffs(
        0,
        vec![
            Matrix2::new(C64::new(1.5, 0.0), C64::new(0.2, -0.4), C64::new(0.0, 0.0), C64::new(0.8, 0.0)),
            Matrix2::real(0.3, -0.1, 0.2, 0.25),
            Matrix2::real(0.0, 0.1, -0.1, 0.05),
        ],
    );
    let j = b.star().mul(&b);
    let got = spectral_factorize(&j, 1e-11).unwrap();
    assert!((&got - &b).norm() < 1e-9);
}

#[test]
fn timing_at_truncation_sixteen() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi = random_invertible_loop(&mut rng, 16, 0.1);
    let t = Instant::now();
    let r = iwasawa(&psi, 1e-10).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    assert!(r.residual < 1e-9);
    assert!(elapsed < 1.0, "took {elapsed} s");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reconstruction_holds(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_invertible_loop(&mut rng, n, 0.1);
        let r = iwasawa(&psi, 1e-10).unwrap();
        prop_assert!(sup_diff(&psi, &r.f.mul(&r.b)) < 1e-9);
        prop_assert!(r.f.unitarity_defect(64) < 1e-9);
        prop_assert!(r.b.lo >= 0);
    }
}
