use dpw_core::potential::{lawson_potential, DPWPotential};
use dpw_core::transport::{
    abelianness_probe, holonomy, parallel_transport, parallel_transport_loop, Path, TransportOptions,
};
use dpw_core::{Matrix2, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn opts() -> TransportOptions {
    TransportOptions::with_tol(1e-12)
}

#[test]
fn residue_monodromy_matches_exponential() {
    // Diagonalizable residue with non-real eigenvalues; based at 1.
    let a = Matrix2::new(c(0.2, 0.1), c(0.5, 0.0), c(0.3, -0.2), c(-0.2, -0.1));
    let pot = DPWPotential::simple_pole(&a, c(0.0, 0.0));
    let h = holonomy(&pot, &Path::circle(c(0.0, 0.0), 1.0, 256), c(1.0, 0.0), &opts()).unwrap();
    let expected = (a * c(0.0, std::f64::consts::TAU)).exp();
    assert!((h.value.trace() - expected.trace()).norm() < 1e-8);
    // For z^A with commuting factors the holonomy is exactly exp(2πiA).
    assert!(h.value.max_abs_diff(&expected) < 1e-8);
    assert!(h.det_defect < 1e-10);
}

#[test]
fn contractible_loop_is_trivial() {
    let pot = lawson_potential(c(0.2, 0.0), c(1.0, 0.0)).unwrap();
    let h = holonomy(&pot, &Path::circle(c(0.5, 0.5), 0.2, 64), c(0.6, 0.8), &opts()).unwrap();
    assert!(h.value.max_abs_diff(&Matrix2::identity()) < 1e-9);
}

#[test]
fn homotopic_lassos_agree() {
    let pot = lawson_potential(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    let base = c(0.5, 0.5);
    let zeta = c(0.6, 0.8);
    let small = holonomy(&pot, &Path::lasso(base, c(1.0, 0.0), 0.2, 96), zeta, &opts()).unwrap();
    let large = holonomy(&pot, &Path::lasso(base, c(1.0, 0.0), 0.4, 96), zeta, &opts()).unwrap();
    assert!(small.value.max_abs_diff(&large.value) < 1e-8);
    // The local monodromy at a branch point has order 3: the residue there is
    // [[−1/3, 0], [1/4, 1/3]] for every ζ.
    assert!((small.value.trace() - c(-1.0, 0.0)).norm() < 1e-8);
}

#[test]
fn refinement_is_stable() {
    let pot = lawson_potential(c(0.1, 0.2), c(1.2, 0.0)).unwrap();
    let path = Path::open(vec![c(0.3, 0.3), c(0.8, -0.4), c(1.5, 0.6)]);
    let coarse = parallel_transport(&pot, &path, c(0.0, 1.0), &TransportOptions { max_step: 0.1, ..opts() }).unwrap();
    let fine = parallel_transport(&pot, &path, c(0.0, 1.0), &TransportOptions { max_step: 0.05, ..opts() }).unwrap();
    assert!(coarse.max_abs_diff(&fine) < 100.0 * 1e-12 * 10.0);
    assert!((fine.det() - c(1.0, 0.0)).norm() < 1e-11);
}

#[test]
fn loop_mode_matches_fixed_zeta() {
    let pot = lawson_potential(c(0.1, 0.0), c(1.0, 0.0)).unwrap();
    let path = Path::open(vec![c(0.3, 0.3), c(0.6, -0.2)]);
    let (lp, tail) = parallel_transport_loop(&pot, &path, 24, 64, &opts()).unwrap();
    assert!(tail < 1e-10);
    for k in 0..8 {
        let zeta = C64::from_polar(1.0, 0.37 + k as f64 * 0.8);
        let fixed = parallel_transport(&pot, &path, zeta, &opts()).unwrap();
        assert!(lp.eval(zeta).unwrap().max_abs_diff(&fixed) < 1e-9);
    }
}

#[test]
fn lawson_holonomy_is_non_abelian() {
    let pot = lawson_potential(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    let base = c(0.5, 0.5);
    for zeta in [c(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4), c(0.0, 1.0)] {
        let h1 = holonomy(&pot, &Path::lasso(base, c(1.0, 0.0), 0.25, 96), zeta, &opts()).unwrap();
        let hi = holonomy(&pot, &Path::lasso(base, c(0.0, 1.0), 0.25, 96), zeta, &opts()).unwrap();
        assert!(h1.det_defect < 1e-8 && hi.det_defect < 1e-8);
        assert!(abelianness_probe(&[h1.value, hi.value]) > 1e-3);
    }
}
