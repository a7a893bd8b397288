use dpw_core::chartfamily::{Grid, MinimalChartData};
use dpw_core::potential::DPWPotential;
use dpw_core::synthesis::{
    extended_frame, frame_from_chart, geometry_report, pauli_exp, sym_point_surface, to_obj, to_r4,
    ExtendedFrameGrid, SurfaceMap, SynthesisOptions,
};
use dpw_core::{Matrix2, MatrixLoop, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Unitary factor of `exp(w·A)` for the vacuum `A = ζ⁻¹E₊ + E₋`: the two
/// exponents commute, so `F = exp(wA − w̄·star(A))`.
fn vacuum_frame(w: C64, zeta: C64) -> Matrix2 {
    let a = Matrix2::e_plus() * zeta.inv() + Matrix2::e_minus();
    let sa = Matrix2::e_plus() + Matrix2::e_minus() * zeta;
    (a * w - sa * w.conj()).exp()
}

fn small_grid() -> Grid {
    Grid::centered(c(0.1, 0.05), 0.1, 9)
}

fn vacuum_frames(dressing: &MatrixLoop) -> ExtendedFrameGrid {
    extended_frame(&DPWPotential::vacuum(c(1.0, 0.0)), &small_grid(), (4, 4), dressing, &SynthesisOptions::default())
        .unwrap()
}

/// Distance of `V·f·W⁻¹` from the torus `|w₁| = |w₂| = 1/√2`, where `W`
/// turns the right-stabilizer generator σ_x into σ_z and `V` does the same
/// for the left generator σ_y.
fn torus_distance(f: &Matrix2) -> f64 {
    let v = pauli_exp(0, -std::f64::consts::FRAC_PI_4);
    let w = pauli_exp(1, std::f64::consts::FRAC_PI_4);
    let x = to_r4(&(v * *f * w.adjoint()));
    let half = std::f64::consts::FRAC_1_SQRT_2;
    ((x[0] * x[0] + x[1] * x[1]).sqrt() - half).abs().max(((x[2] * x[2] + x[3] * x[3]).sqrt() - half).abs())
}

#[test]
fn zero_potential_gives_trivial_frame() {
    let frames =
        extended_frame(&DPWPotential::empty(), &small_grid(), (2, 6), &MatrixLoop::identity(), &SynthesisOptions::default())
            .unwrap();
    for p in frames.points.iter().flatten() {
        assert!((&p.f - &MatrixLoop::identity()).norm() < 1e-12);
        assert!((&p.b - &MatrixLoop::identity()).norm() < 1e-12);
    }
    let s = sym_point_surface(&frames).unwrap();
    assert!(s.f.iter().all(|f| f.max_abs_diff(&Matrix2::identity()) < 1e-12));
    assert!(geometry_report(&s).unwrap().degenerate);
}

#[test]
fn vacuum_matches_commuting_exponential() {
    let frames = vacuum_frames(&MatrixLoop::identity());
    assert!(frames.failures.is_empty());
    assert!(frames.max_residual() < 1e-9);
    let g = small_grid();
    let z0 = g.point(4, 4);
    let mut err: f64 = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let f = &frames.at(i, j).unwrap().f;
            for k in 0..7 {
                let zeta = C64::from_polar(1.0, 0.3 + 0.9 * k as f64);
                err = err.max(f.eval(zeta).unwrap().max_abs_diff(&vacuum_frame(g.point(i, j) - z0, zeta)));
            }
        }
    }
    assert!(err < 1e-6, "{err:e}");
    // Basepoint invariant: F·B equals the dressing there.
    let p = frames.at(4, 4).unwrap();
    assert!((&p.f.mul(&p.b) - &MatrixLoop::identity()).norm() < 1e-9);
}

#[test]
fn unitary_dressing_left_multiplies_the_frame() {
    let u = pauli_exp(0, 0.4) * pauli_exp(2, -1.3);
    let plain = vacuum_frames(&MatrixLoop::identity());
    let dressed = vacuum_frames(&MatrixLoop::constant(u));
    for (a, b) in plain.points.iter().flatten().zip(dressed.points.iter().flatten()) {
        assert!((&MatrixLoop::constant(u).mul(&a.f) - &b.f).norm() < 1e-8);
    }
    // On the surface the constant dressing acts by conjugation f ↦ U f U⁻¹.
    let (sa, sb) = (sym_point_surface(&plain).unwrap(), sym_point_surface(&dressed).unwrap());
    for (fa, fb) in sa.f.iter().zip(&sb.f) {
        assert!((u * *fa * u.adjoint()).max_abs_diff(fb) < 1e-8);
    }
}

#[test]
fn clifford_surface_lies_on_the_torus() {
    let s = sym_point_surface(&vacuum_frames(&MatrixLoop::identity())).unwrap();
    assert!(s.max_su2_defect() < 1e-8);
    assert!(s.at(4, 4).max_abs_diff(&Matrix2::identity()) < 1e-14);
    let d = s.f.iter().map(torus_distance).fold(0.0, f64::max);
    assert!(d < 1e-5, "{d:e}");
}

#[test]
fn chart_route_matches_potential_route() {
    let g = small_grid();
    let chart = frame_from_chart(&MinimalChartData::clifford(g), (4, 4), 64, 1e-8).unwrap();
    let pot = vacuum_frames(&MatrixLoop::identity());
    let z0 = g.point(4, 4);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let fc = &chart.at(i, j).unwrap().f;
            for zeta in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)] {
                let exact = vacuum_frame(g.point(i, j) - z0, zeta);
                assert!(fc.eval(zeta).unwrap().max_abs_diff(&exact) < 1e-10);
            }
        }
    }
    assert!(chart.at(4, 4).unwrap().f.eval(c(0.6, 0.8)).unwrap().max_abs_diff(&Matrix2::identity()) < 1e-12);
    let (sc, sp) = (sym_point_surface(&chart).unwrap(), sym_point_surface(&pot).unwrap());
    let diff = sc.f.iter().zip(&sp.f).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
    assert!(diff < 1e-4, "{diff:e}");
}

#[test]
fn non_integrable_chart_data_rejected() {
    let d = MinimalChartData::from_fn(Grid::centered(c(0.0, 0.0), 0.1, 9), |z| z.re, |z| z.conj());
    assert!(frame_from_chart(&d, (4, 4), 16, 1e-3).is_err());
}

/// `F(1)⁻¹·f⁻¹·df·F(1) = −2Φ + 2Φ*` for `f = F(−1)F(1)⁻¹`, checked with
/// centered differences on round-sphere data.
fn sphere_gauge_error(h: f64) -> f64 {
    let n = (0.8 / h).round() as usize + 1;
    let g = Grid::centered(c(0.1, 0.2), h, n);
    let data = MinimalChartData::round_sphere(g);
    let frames = frame_from_chart(&data, (n / 2, n / 2), 16, 1.0).unwrap();
    let s = sym_point_surface(&frames).unwrap();
    let mut err: f64 = 0.0;
    // Compare on the fixed points z = 0.1 + 0.2i ± 0.2, ± 0.2i.
    let step = (0.2 / h).round() as usize;
    let mid = n / 2;
    for (i, j) in [(mid, mid), (mid - step, mid), (mid + step, mid), (mid, mid - step), (mid, mid + step)] {
        let f1 = frames.at(i, j).unwrap().f.eval(c(1.0, 0.0)).unwrap();
        let finv = s.at(i, j).adjoint();
        let fx = (s.at(i + 1, j) - s.at(i - 1, j)) * c(0.5 / h, 0.0);
        let fy = (s.at(i, j + 1) - s.at(i, j - 1)) * c(0.5 / h, 0.0);
        let eu = data.u[g.index(i, j)].exp();
        let p = Matrix2::real(0.0, eu, 0.0, 0.0);
        let ps = Matrix2::real(0.0, 0.0, eu, 0.0);
        let ex = (p - ps) * c(-2.0, 0.0);
        let ey = (p + ps) * c(0.0, -2.0);
        err = err.max((f1.adjoint() * finv * fx * f1).max_abs_diff(&ex));
        err = err.max((f1.adjoint() * finv * fy * f1).max_abs_diff(&ey));
    }
    err
}

#[test]
fn sphere_frames_differ_by_the_higgs_gauge() {
    let (a, b) = (sphere_gauge_error(0.05), sphere_gauge_error(0.025));
    assert!(b < 5e-3, "{a:e} {b:e}");
    assert!((a / b).log2() > 1.8, "{a:e} {b:e}");
}

#[test]
fn clifford_geometry() {
    let g = Grid::centered(c(0.0, 0.0), 0.05, 17);
    let frames = frame_from_chart(&MinimalChartData::clifford(g), (8, 8), 32, 1e-8).unwrap();
    let r = geometry_report(&sym_point_surface(&frames).unwrap()).unwrap();
    assert!(!r.degenerate);
    // Centered differences of a product of one-parameter subgroups are
    // scaled by the same factor in x and y, so conformality holds to roundoff.
    assert!(r.conformality.fine < 1e-10 && r.conformality.coarse < 1e-10);
    assert!(r.mean_curvature.fine < 1e-8, "{:?}", r.mean_curvature);
    assert!(r.hopf.fine > 0.1);
}

#[test]
fn sphere_geometry_converges() {
    let report = |h: f64| {
        let n = (0.8 / h).round() as usize + 1;
        let g = Grid::centered(c(0.1, 0.0), h, n);
        let frames = frame_from_chart(&MinimalChartData::round_sphere(g), (n / 2, n / 2), 16, 1.0).unwrap();
        geometry_report(&sym_point_surface(&frames).unwrap()).unwrap()
    };
    let r = report(1.0 / 40.0);
    assert!(!r.degenerate);
    // The image stays in a great sphere, whose normal is constant, so the
    // extracted Hopf coefficient vanishes to roundoff at every spacing.
    assert!(r.hopf.fine < 1e-10 && r.hopf.coarse < 1e-10, "{:?}", r.hopf);
    assert!(r.mean_curvature.fine < 1e-8, "{:?}", r.mean_curvature);
    let order = r.conformality.order.unwrap();
    assert!(order > 1.8, "{:?}", r.conformality);
    let csv = r.to_csv(&Grid::centered(c(0.1, 0.0), 1.0 / 40.0, 33));
    assert_eq!(csv.lines().count(), 1 + 31 * 31);
}

#[test]
fn obj_export_of_clifford_patch() {
    let g = Grid::centered(c(0.0, 0.0), 0.1, 9);
    let frames = frame_from_chart(&MinimalChartData::clifford(g), (4, 4), 16, 1e-8).unwrap();
    let s: SurfaceMap = sym_point_surface(&frames).unwrap();
    let obj = to_obj(&s, [0.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 81);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 128);
    assert!(obj.lines().filter(|l| l.starts_with("v ")).all(|l| l.split_whitespace().skip(1).all(|t| t.parse::<f64>().unwrap().is_finite())));
}
