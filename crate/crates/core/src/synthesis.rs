//! Forward DPW construction on a planar grid: transport of a potential from a
//! basepoint, pointwise Iwasawa splitting, the Sym-point surface
//! `f = F(−1)·F(1)⁻¹` in SU(2) ≅ S³, and discrete geometry checks.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chartfamily::{associated_family_form, coefficient_residuals, ChartError, Grid, MinimalChartData};
use crate::iwasawa::{iwasawa_from, iwasawa_with, FactorOptions};
use crate::loopcore::{unit_circle, LoopError, Matrix2, MatrixLoop, C64, I, ONE};
use crate::potential::DPWPotential;
use crate::transport::{transport_waypoints, Path, TransportError, TransportOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("basepoint ({0}, {1}) is outside the grid")]
    BasepointOutside(usize, usize),
    #[error("dressing loop is not invertible on the unit circle")]
    SingularDressing,
    #[error("chart data is not integrable (coefficient residual {residual:e} > {threshold:e})")]
    NonIntegrable { residual: f64, threshold: f64 },
    #[error("{count} grid points have no frame")]
    MissingFrames { count: usize },
    #[error("frame at point {index} is not unitary at the Sym points (defect {defect:e})")]
    NonUnitary { index: usize, defect: f64 },
    #[error("grid needs at least {needed} points per side, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize, needed: usize },
    #[error("pole must be a unit vector")]
    BadPole,
}

#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    /// Iwasawa tolerance.
    pub tol: f64,
    /// `Ψ` is truncated to ζ-indices `−trunc..=trunc` before splitting.
    pub trunc: usize,
    /// Number of unit-circle ζ samples used for transport.
    pub zeta_samples: usize,
    pub transport: TransportOptions,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            tol: 1e-10,
            trunc: 16,
            zeta_samples: 64,
            transport: TransportOptions { max_step: 1.0, ..TransportOptions::with_tol(1e-12) },
        }
    }
}

#[derive(Debug, Clone)]
pub struct FramePoint {
    pub f: MatrixLoop,
    pub b: MatrixLoop,
    /// Iwasawa residual (reconstruction and unitarity).
    pub residual: f64,
    /// Wiener norm of the part of `Ψ` dropped by truncation.
    pub tail: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub point: C64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExtendedFrameGrid {
    pub grid: Grid,
    pub basepoint: (usize, usize),
    pub dressing: MatrixLoop,
    /// Row-major like the grid; `None` where the splitting failed.
    pub points: Vec<Option<FramePoint>>,
    pub failures: Vec<PointFailure>,
}

impl ExtendedFrameGrid {
    pub fn at(&self, i: usize, j: usize) -> Option<&FramePoint> {
        self.points[self.grid.index(i, j)].as_ref()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().flatten().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn max_tail(&self) -> f64 {
        self.points.iter().flatten().map(|p| p.tail).fold(0.0, f64::max)
    }
}

fn check_basepoint(grid: &Grid, base: (usize, usize)) -> Result<(), SynthesisError> {
    if base.0 >= grid.nx || base.1 >= grid.ny {
        return Err(SynthesisError::BasepointOutside(base.0, base.1));
    }
    Ok(())
}

/// Values of a transport on the grid, composed from a row through the
/// basepoint and columns through that row. `step(a, b)` transports along the
/// straight chain of grid points `a` (the first is the start).
fn grid_transport<E>(
    grid: &Grid,
    base: (usize, usize),
    step: &dyn Fn(&[(usize, usize)]) -> Result<Vec<Matrix2>, E>,
) -> Result<Vec<Matrix2>, E> {
    let (i0, j0) = base;
    let mut out = vec![Matrix2::identity(); grid.len()];
    let chain = |pts: Vec<(usize, usize)>, start: Matrix2, out: &mut Vec<Matrix2>| -> Result<(), E> {
        if pts.len() < 2 {
            return Ok(());
        }
        let vals = step(&pts)?;
        for (p, v) in pts.iter().zip(vals).skip(1) {
            out[grid.index(p.0, p.1)] = start * v;
        }
        Ok(())
    };
    chain((i0..grid.nx).map(|i| (i, j0)).collect(), Matrix2::identity(), &mut out)?;
    chain((0..=i0).rev().map(|i| (i, j0)).collect(), Matrix2::identity(), &mut out)?;
    for i in 0..grid.nx {
        let start = out[grid.index(i, j0)];
        chain((j0..grid.ny).map(|j| (i, j)).collect(), start, &mut out)?;
        chain((0..=j0).rev().map(|j| (i, j)).collect(), start, &mut out)?;
    }
    Ok(out)
}

/// `Ψ(z) = dressing·(transport of ξ from the basepoint)` sampled on the unit
/// circle, truncated, and Iwasawa-split at every grid point.
///
/// Splits along a row are warm-started from the left neighbour; points whose
/// splitting fails are recorded in `failures`.
pub fn extended_frame(
    pot: &DPWPotential,
    grid: &Grid,
    basepoint: (usize, usize),
    dressing: &MatrixLoop,
    opts: &SynthesisOptions,
) -> Result<ExtendedFrameGrid, SynthesisError> {
    check_basepoint(grid, basepoint)?;
    let m = opts.zeta_samples.max(2 * opts.trunc + 2);
    let zetas = unit_circle(m);
    let per_zeta: Vec<Vec<Matrix2>> = zetas
        .par_iter()
        .map(|&zeta| -> Result<Vec<Matrix2>, SynthesisError> {
            let d = dressing.eval(zeta)?;
            if d.det().norm() < 1e-300 {
                return Err(SynthesisError::SingularDressing);
            }
            let step = |pts: &[(usize, usize)]| {
                let path = Path::open(pts.iter().map(|p| grid.point(p.0, p.1)).collect());
                transport_waypoints(pot, &path, zeta, &opts.transport)
            };
            let t = grid_transport(grid, basepoint, &step)?;
            Ok(t.into_iter().map(|v| d * v).collect())
        })
        .collect::<Result<_, _>>()?;

    let lo = -((m / 2) as i32);
    let fopts = FactorOptions::with_tol(opts.tol);
    let rows: Vec<Vec<Result<FramePoint, String>>> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut prev: Option<MatrixLoop> = None;
            (0..grid.nx)
                .map(|i| {
                    let k = grid.index(i, j);
                    let samples: Vec<Matrix2> = per_zeta.iter().map(|v| v[k]).collect();
                    let (psi, tail) = MatrixLoop::from_unit_samples(&samples, lo).truncated(opts.trunc);
                    let res = match &prev {
                        Some(g) => iwasawa_from(&psi, g, &fopts),
                        None => iwasawa_with(&psi, &fopts),
                    };
                    match res {
                        Ok(r) => {
                            prev = Some(r.b.clone());
                            Ok(FramePoint { f: r.f, b: r.b, residual: r.residual, tail })
                        }
                        Err(e) => {
                            prev = None;
                            Err(e.to_string())
                        }
                    }
                })
                .collect()
        })
        .collect();

    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (j, row) in rows.into_iter().enumerate() {
        for (i, r) in row.into_iter().enumerate() {
            match r {
                Ok(p) => points.push(Some(p)),
                Err(message) => {
                    failures.push(PointFailure { index: grid.index(i, j), point: grid.point(i, j), message });
                    points.push(None);
                }
            }
        }
    }
    Ok(ExtendedFrameGrid { grid: *grid, basepoint, dressing: dressing.clone(), points, failures })
}

/// Frames of chart data: the associated family is unitary on `|ζ| = 1`, so it
/// is transported directly at `zeta_samples` unit values (no splitting,
/// `B ≡ I`). Each grid edge uses the exponential of the trapezoidal average of
/// the connection, which is exact for constant coefficients.
pub fn frame_from_chart(
    data: &MinimalChartData,
    basepoint: (usize, usize),
    zeta_samples: usize,
    max_coefficient_residual: f64,
) -> Result<ExtendedFrameGrid, SynthesisError> {
    let grid = data.grid;
    check_basepoint(&grid, basepoint)?;
    let cr = coefficient_residuals(data)?;
    let total = cr.r_minus + cr.r_zero + cr.r_plus;
    if !(total <= max_coefficient_residual) {
        return Err(SynthesisError::NonIntegrable { residual: total, threshold: max_coefficient_residual });
    }
    let m = zeta_samples.max(2);
    let zetas = unit_circle(m);
    let h = grid.h;
    let per_zeta: Vec<Vec<Matrix2>> = zetas
        .par_iter()
        .map(|&zeta| -> Result<Vec<Matrix2>, SynthesisError> {
            let form = associated_family_form(data, zeta)?;
            let step = |pts: &[(usize, usize)]| -> Result<Vec<Matrix2>, SynthesisError> {
                let mut acc = Matrix2::identity();
                let mut vals = vec![acc];
                for w in pts.windows(2) {
                    let (p, q) = (w[0], w[1]);
                    let (ap, aq) = (form.real_components(grid.index(p.0, p.1)), form.real_components(grid.index(q.0, q.1)));
                    let dx = q.0 as f64 - p.0 as f64;
                    let dy = q.1 as f64 - p.1 as f64;
                    let gen = ((ap.0 + aq.0) * C64::new(dx, 0.0) + (ap.1 + aq.1) * C64::new(dy, 0.0)) * C64::new(0.5 * h, 0.0);
                    acc = (acc * gen.exp()).normalize_det();
                    vals.push(acc);
                }
                Ok(vals)
            };
            grid_transport(&grid, basepoint, &step)
        })
        .collect::<Result<_, _>>()?;
    let lo = -((m / 2) as i32);
    let points = (0..grid.len())
        .map(|k| {
            let samples: Vec<Matrix2> = per_zeta.iter().map(|v| v[k]).collect();
            let residual = samples
                .iter()
                .map(|s| (s.adjoint() * *s - Matrix2::identity()).frobenius())
                .fold(0.0, f64::max);
            Some(FramePoint {
                f: MatrixLoop::from_unit_samples(&samples, lo),
                b: MatrixLoop::identity(),
                residual,
                tail: 0.0,
            })
        })
        .collect();
    Ok(ExtendedFrameGrid {
        grid,
        basepoint,
        dressing: MatrixLoop::identity(),
        points,
        failures: Vec::new(),
    })
}

/// Map into SU(2), normalized to `I` at the basepoint.
#[derive(Debug, Clone)]
pub struct SurfaceMap {
    pub grid: Grid,
    pub basepoint: (usize, usize),
    pub f: Vec<Matrix2>,
}

/// Real coordinates of `f = [[w₁, −w̄₂], [w₂, w̄₁]]` as `(Re w₁, Im w₁, Re w₂, Im w₂)`.
pub fn to_r4(f: &Matrix2) -> [f64; 4] {
    let (w1, w2) = (f.0[0][0], f.0[1][0]);
    [w1.re, w1.im, w2.re, w2.im]
}

pub fn from_r4(x: [f64; 4]) -> Matrix2 {
    let w1 = C64::new(x[0], x[1]);
    let w2 = C64::new(x[2], x[3]);
    Matrix2::new(w1, -w2.conj(), w2, w1.conj())
}

/// `max(‖f^†f − I‖, |det f − 1|)`.
pub fn su2_defect(f: &Matrix2) -> f64 {
    (f.adjoint() * *f - Matrix2::identity()).frobenius().max((f.det() - ONE).norm())
}

impl SurfaceMap {
    pub fn at(&self, i: usize, j: usize) -> Matrix2 {
        self.f[self.grid.index(i, j)]
    }

    pub fn max_su2_defect(&self) -> f64 {
        self.f.iter().map(su2_defect).fold(0.0, f64::max)
    }

    pub fn points_r4(&self) -> Vec<[f64; 4]> {
        self.f.iter().map(to_r4).collect()
    }

    /// `g·f` at every point.
    pub fn left_translated(&self, g: &Matrix2) -> SurfaceMap {
        SurfaceMap { grid: self.grid, basepoint: self.basepoint, f: self.f.iter().map(|f| *g * *f).collect() }
    }
}

/// `f = F(−1)·F(1)⁻¹`, then `f ← f(basepoint)⁻¹·f`.
pub fn sym_point_surface(frames: &ExtendedFrameGrid) -> Result<SurfaceMap, SynthesisError> {
    let missing = frames.points.iter().filter(|p| p.is_none()).count();
    if missing > 0 {
        return Err(SynthesisError::MissingFrames { count: missing });
    }
    let mut raw = Vec::with_capacity(frames.points.len());
    for (index, p) in frames.points.iter().flatten().enumerate() {
        let fm = p.f.eval(-ONE)?;
        let fp = p.f.eval(ONE)?;
        let defect = su2_defect(&fm).max(su2_defect(&fp));
        if !(defect < 1e-6) {
            return Err(SynthesisError::NonUnitary { index, defect });
        }
        raw.push(fm * fp.inverse().ok_or(SynthesisError::NonUnitary { index, defect })?);
    }
    let (i0, j0) = frames.basepoint;
    let base_inv = raw[frames.grid.index(i0, j0)].adjoint();
    let f = raw.iter().map(|m| base_inv * *m).collect();
    Ok(SurfaceMap { grid: frames.grid, basepoint: frames.basepoint, f })
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Vector orthogonal to `a`, `b`, `c` in ℝ⁴ (cofactor expansion).
fn cross4(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]) -> [f64; 4] {
    let minor = |k: usize| {
        let cols: Vec<usize> = (0..4).filter(|&x| x != k).collect();
        let row = |v: &[f64; 4]| [v[cols[0]], v[cols[1]], v[cols[2]]];
        det3([row(a), row(b), row(c)])
    };
    [-minor(0), minor(1), -minor(2), minor(3)]
}

/// Discrete geometry at one point, with spacing `s·h`.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PointGeometry {
    pub conformality: f64,
    pub mean_curvature: f64,
    pub hopf: C64,
    /// `|f_x|² + |f_y|²`.
    pub metric: f64,
}

fn geometry_at(x: &[[f64; 4]], grid: &Grid, i: usize, j: usize, s: usize) -> PointGeometry {
    let at = |a: usize, b: usize| &x[grid.index(a, b)];
    let hs = s as f64 * grid.h;
    let c = at(i, j);
    let (xp, xm, yp, ym) = (at(i + s, j), at(i - s, j), at(i, j + s), at(i, j - s));
    let mut fx = [0.0; 4];
    let mut fy = [0.0; 4];
    let mut lap = [0.0; 4];
    let mut dxx_yy = [0.0; 4];
    let mut fxy = [0.0; 4];
    for k in 0..4 {
        fx[k] = (xp[k] - xm[k]) / (2.0 * hs);
        fy[k] = (yp[k] - ym[k]) / (2.0 * hs);
        let fxx = (xp[k] - 2.0 * c[k] + xm[k]) / (hs * hs);
        let fyy = (yp[k] - 2.0 * c[k] + ym[k]) / (hs * hs);
        lap[k] = fxx + fyy;
        dxx_yy[k] = fxx - fyy;
        fxy[k] = (at(i + s, j + s)[k] - at(i + s, j - s)[k] - at(i - s, j + s)[k] + at(i - s, j - s)[k])
            / (4.0 * hs * hs);
    }
    let (ex, ey) = (dot(&fx, &fx), dot(&fy, &fy));
    let conformality = dot(&fx, &fy).abs() + (ex.sqrt() - ey.sqrt()).abs();
    let metric = ex + ey;
    let n = cross4(c, &fx, &fy);
    let nn = dot(&n, &n).sqrt();
    if !(nn > 0.0) || !(metric > 0.0) {
        return PointGeometry { conformality, mean_curvature: 0.0, hopf: C64::new(0.0, 0.0), metric };
    }
    let n = n.map(|v| v / nn);
    let mean_curvature = dot(&lap, &n) / metric;
    let hopf = C64::new(dot(&dxx_yy, &n), -2.0 * dot(&fxy, &n)) * 0.25;
    PointGeometry { conformality, mean_curvature, hopf, metric }
}

/// Sup norms of one quantity at spacing `h` and `2h` over the same points,
/// with the observed order `log₂(coarse / fine)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Convergence {
    pub fine: f64,
    pub coarse: f64,
    pub order: Option<f64>,
}

impl Convergence {
    fn new(fine: f64, coarse: f64) -> Self {
        let order = if fine > 0.0 && coarse > 0.0 && fine.is_finite() && coarse.is_finite() {
            Some((coarse / fine).log2())
        } else {
            None
        };
        Convergence { fine, coarse, order }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    /// `|⟨f_x, f_y⟩| + ||f_x| − |f_y||`.
    pub conformality: Convergence,
    pub mean_curvature: Convergence,
    /// Sup of `|⟨f_zz, N⟩|`.
    pub hopf: Convergence,
    /// Raised when the differential vanishes somewhere (no normal).
    pub degenerate: bool,
    pub min_metric: f64,
    /// Per interior point of the fine grid: `(i, j, geometry)`.
    pub points: Vec<(usize, usize, PointGeometry)>,
}

impl GeometryReport {
    pub fn to_csv(&self, grid: &Grid) -> String {
        let mut s = String::from("i,j,x,y,conformality,mean_curvature,hopf_re,hopf_im\n");
        for (i, j, g) in &self.points {
            let z = grid.point(*i, *j);
            let _ = writeln!(
                s,
                "{i},{j},{},{},{:e},{:e},{:e},{:e}",
                z.re, z.im, g.conformality, g.mean_curvature, g.hopf.re, g.hopf.im
            );
        }
        s
    }
}

/// Finite-difference conformality, mean curvature and Hopf coefficient of
/// the surface in S³ ⊂ ℝ⁴. Orders compare spacing `h` with `2h` on the
/// points common to both stencils.
pub fn geometry_report(surface: &SurfaceMap) -> Result<GeometryReport, SynthesisError> {
    let g = surface.grid;
    if g.nx < 5 || g.ny < 5 {
        return Err(SynthesisError::GridTooSmall { nx: g.nx, ny: g.ny, needed: 5 });
    }
    let x = surface.points_r4();
    let points: Vec<(usize, usize, PointGeometry)> = (1..g.ny - 1)
        .flat_map(|j| (1..g.nx - 1).map(move |i| (i, j)))
        .map(|(i, j)| (i, j, geometry_at(&x, &g, i, j, 1)))
        .collect();
    let common: Vec<(usize, usize)> = (2..g.ny - 2)
        .step_by(2)
        .flat_map(|j| (2..g.nx - 2).step_by(2).map(move |i| (i, j)))
        .collect();
    let (mut fine, mut coarse) = ([0.0f64; 3], [0.0f64; 3]);
    let mut min_metric = f64::INFINITY;
    for (i, j, p) in &points {
        min_metric = min_metric.min(p.metric);
        if i % 2 == 0 && j % 2 == 0 && (2..g.nx - 2).contains(i) && (2..g.ny - 2).contains(j) {
            fine[0] = fine[0].max(p.conformality);
            fine[1] = fine[1].max(p.mean_curvature.abs());
            fine[2] = fine[2].max(p.hopf.norm());
        }
    }
    for &(i, j) in &common {
        let p = geometry_at(&x, &g, i, j, 2);
        coarse[0] = coarse[0].max(p.conformality);
        coarse[1] = coarse[1].max(p.mean_curvature.abs());
        coarse[2] = coarse[2].max(p.hopf.norm());
    }
    let scale = points.iter().map(|p| p.2.metric).fold(0.0, f64::max);
    let degenerate = !(min_metric > 1e-12 * scale.max(1e-300)) || scale < 1e-24;
    Ok(GeometryReport {
        conformality: Convergence::new(fine[0], coarse[0]),
        mean_curvature: Convergence::new(fine[1], coarse[1]),
        hopf: Convergence::new(fine[2], coarse[2]),
        degenerate,
        min_metric,
        points,
    })
}

/// Stereographic projection of a point of S³ from the unit vector `pole`
/// onto the orthogonal 3-space, in an orthonormal basis obtained by
/// Gram–Schmidt from the standard vectors.
pub struct Stereographic {
    pole: [f64; 4],
    basis: [[f64; 4]; 3],
}

impl Stereographic {
    pub fn new(pole: [f64; 4]) -> Result<Self, SynthesisError> {
        let n = dot(&pole, &pole).sqrt();
        if !((n - 1.0).abs() < 1e-9) {
            return Err(SynthesisError::BadPole);
        }
        let mut basis: Vec<[f64; 4]> = Vec::new();
        for k in 0..4 {
            let mut v = [0.0; 4];
            v[k] = 1.0;
            for b in std::iter::once(&pole).chain(basis.iter()) {
                let c = dot(&v, b);
                v = sub(&v, &b.map(|x| x * c));
            }
            let nv = dot(&v, &v).sqrt();
            if nv > 1e-6 && basis.len() < 3 {
                basis.push(v.map(|x| x / nv));
            }
        }
        Ok(Stereographic { pole, basis: [basis[0], basis[1], basis[2]] })
    }

    /// `None` at the pole itself.
    pub fn project(&self, x: &[f64; 4]) -> Option<[f64; 3]> {
        let d = 1.0 - dot(x, &self.pole);
        if d < 1e-12 {
            return None;
        }
        Some([dot(x, &self.basis[0]) / d, dot(x, &self.basis[1]) / d, dot(x, &self.basis[2]) / d])
    }
}

/// Wavefront OBJ of the grid mesh after stereographic projection. Cells with
/// a vertex at the pole are dropped (the vertex is written at the origin).
pub fn to_obj(surface: &SurfaceMap, pole: [f64; 4]) -> Result<String, SynthesisError> {
    let proj = Stereographic::new(pole)?;
    let g = surface.grid;
    let mut s = String::new();
    let mut ok = Vec::with_capacity(g.len());
    for x in surface.points_r4() {
        let p = proj.project(&x);
        ok.push(p.is_some());
        let [a, b, c] = p.unwrap_or([0.0; 3]);
        let _ = writeln!(s, "v {a} {b} {c}");
    }
    for j in 0..g.ny.saturating_sub(1) {
        for i in 0..g.nx.saturating_sub(1) {
            let v = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)];
            if v.iter().all(|&k| ok[k]) {
                let _ = writeln!(s, "f {} {} {}", v[0] + 1, v[1] + 1, v[2] + 1);
                let _ = writeln!(s, "f {} {} {}", v[0] + 1, v[2] + 1, v[3] + 1);
            }
        }
    }
    Ok(s)
}

/// `exp(i·t·σ)` for a Pauli matrix index `σ ∈ {x, y, z}` = 0, 1, 2.
pub fn pauli_exp(axis: usize, t: f64) -> Matrix2 {
    let sigma = match axis {
        0 => Matrix2::real(0.0, 1.0, 1.0, 0.0),
        1 => Matrix2::new(C64::new(0.0, 0.0), -I, I, C64::new(0.0, 0.0)),
        _ => Matrix2::real(1.0, 0.0, 0.0, -1.0),
    };
    (sigma * (I * t)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r4_roundtrip() {
        let f = pauli_exp(0, 0.3) * pauli_exp(1, -1.1);
        assert!(from_r4(to_r4(&f)).max_abs_diff(&f) < 1e-15);
        assert!(su2_defect(&f) < 1e-14);
    }

    #[test]
    fn cross4_is_orthogonal() {
        let a = [1.0, 2.0, 0.5, -1.0];
        let b = [0.3, -1.0, 2.0, 0.0];
        let c = [0.0, 0.7, 1.0, 3.0];
        let n = cross4(&a, &b, &c);
        for v in [a, b, c] {
            assert!(dot(&n, &v).abs() < 1e-12);
        }
        assert!(dot(&n, &n) > 1.0);
    }

    #[test]
    fn stereographic_of_equator_is_unit_sphere() {
        let p = Stereographic::new([0.0, 0.0, 0.0, 1.0]).unwrap();
        let y = p.project(&[0.6, 0.0, 0.8, 0.0]).unwrap();
        assert!((y.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(p.project(&[0.0, 0.0, 0.0, 1.0]).is_none());
        assert!(Stereographic::new([1.0, 1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn constant_map_is_degenerate() {
        let grid = Grid::centered(C64::new(0.0, 0.0), 0.1, 7);
        let s = SurfaceMap { grid, basepoint: (3, 3), f: vec![Matrix2::identity(); grid.len()] };
        let r = geometry_report(&s).unwrap();
        assert!(r.degenerate);
        assert!(r.conformality.fine == 0.0);
    }

    #[test]
    fn obj_counts() {
        let grid = Grid::centered(C64::new(0.0, 0.0), 0.1, 4);
        let f = (0..grid.len()).map(|k| pauli_exp(2, 0.1 * k as f64)).collect();
        let s = SurfaceMap { grid, basepoint: (0, 0), f };
        let obj = to_obj(&s, [0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 16);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 18);
    }
}
