//! The associated family `∇^ζ = ∇ + ζ⁻¹Φ − ζΦ*` of a minimal surface on a
//! local chart, assembled from the conformal factor `u` (metric `e^{2u}|dz|²`)
//! and the Hopf coefficient `q` (`Q = q dz²`), with discrete flatness and
//! unitarity diagnostics.
//!
//! In the frame `(e^{−u/2}t, e^{u/2}s)` the connection form is `C_z dz + C_z̄ dz̄`
//! with
//!
//! ```text
//! C_z = [[ u_z/2, ζ⁻¹e^u ], [ −(i/2)e^{−u}q, −u_z/2 ]]
//! C_z̄ = [[ −u_z̄/2, −(i/2)e^{−u}q̄ ], [ −ζe^u, u_z̄/2 ]]
//! ```
//!
//! Its curvature `∂_z C_z̄ − ∂_z̄ C_z + [C_z, C_z̄]` vanishes for all ζ exactly
//! when `q` is holomorphic and `u_zz̄ + e^{2u} − ¼|q|²e^{−2u} = 0`. The round
//! sphere `u = −log(1+|z|²)`, `q = 0` and the Clifford torus `u = 0`, `|q| = 2`
//! are solutions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loopcore::{Matrix2, C64, I, ZERO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("the associated family has a pole at zeta = 0")]
    PoleOfFamily,
    #[error("grid of {nx}x{ny} points has no interior points at depth {depth}")]
    GridTooSmall { nx: usize, ny: usize, depth: usize },
    #[error("chart data is inconsistent: {0}")]
    Invalid(String),
}

/// Rectangular lattice `z = origin + h(i + j·i)`, `0 ≤ i < nx`, `0 ≤ j < ny`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: C64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Square grid of `n × n` points centered at `center`.
    pub fn centered(center: C64, h: f64, n: usize) -> Self {
        let half = 0.5 * h * (n as f64 - 1.0);
        Grid { origin: center - C64::new(half, half), h, nx: n, ny: n }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        self.origin + C64::new(self.h * i as f64, self.h * j as f64)
    }

    /// Whether `(i, j)` is at least `depth` steps away from the boundary.
    pub fn is_interior(&self, i: usize, j: usize, depth: usize) -> bool {
        i >= depth && j >= depth && i + depth < self.nx && j + depth < self.ny
    }

    fn check_depth(&self, depth: usize) -> Result<(), ChartError> {
        if self.nx > 2 * depth && self.ny > 2 * depth {
            Ok(())
        } else {
            Err(ChartError::GridTooSmall { nx: self.nx, ny: self.ny, depth })
        }
    }
}

/// Sampled minimal-surface data on a chart: `u` real, `q` complex, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalChartData {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub q: Vec<C64>,
}

impl MinimalChartData {
    pub fn new(grid: Grid, u: Vec<f64>, q: Vec<C64>) -> Result<Self, ChartError> {
        if u.len() != grid.len() || q.len() != grid.len() {
            return Err(ChartError::Invalid(format!(
                "expected {} samples, got u: {}, q: {}",
                grid.len(),
                u.len(),
                q.len()
            )));
        }
        if let Some(k) = u.iter().position(|v| !v.is_finite()) {
            return Err(ChartError::Invalid(format!("u is not finite at sample {k}")));
        }
        Ok(MinimalChartData { grid, u, q })
    }

    pub fn from_fn(grid: Grid, u: impl Fn(C64) -> f64, q: impl Fn(C64) -> C64) -> Self {
        let mut us = Vec::with_capacity(grid.len());
        let mut qs = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let z = grid.point(i, j);
                us.push(u(z));
                qs.push(q(z));
            }
        }
        MinimalChartData { grid, u: us, q: qs }
    }

    /// `u = −log(1+|z|²)`, `q = 0`: a totally geodesic sphere.
    pub fn round_sphere(grid: Grid) -> Self {
        Self::from_fn(grid, |z| -(1.0 + z.norm_sqr()).ln(), |_| ZERO)
    }

    /// `u = 0`, `q = 2i`: the Clifford torus.
    pub fn clifford(grid: Grid) -> Self {
        Self::from_fn(grid, |_| 0.0, |_| C64::new(0.0, 2.0))
    }

    /// `u = 0`, `q = 0` (not a solution).
    pub fn flat_zero(grid: Grid) -> Self {
        Self::from_fn(grid, |_| 0.0, |_| ZERO)
    }
}

/// `(∂_z, ∂_z̄)` of a sampled field at `(i, j)` by centered differences, or
/// second-order one-sided differences on the boundary.
fn wirtinger<T>(grid: &Grid, f: &[T], i: usize, j: usize) -> (C64, C64)
where
    T: Copy + Into<C64>,
{
    let at = |a: usize, b: usize| -> C64 { f[grid.index(a, b)].into() };
    let d = |n: usize, k: usize, get: &dyn Fn(usize) -> C64| -> C64 {
        if n < 3 {
            return ZERO;
        }
        if k == 0 {
            (get(0) * -3.0 + get(1) * 4.0 - get(2)) / (2.0 * grid.h)
        } else if k + 1 == n {
            (get(k) * 3.0 - get(k - 1) * 4.0 + get(k - 2)) / (2.0 * grid.h)
        } else {
            (get(k + 1) - get(k - 1)) / (2.0 * grid.h)
        }
    };
    let fx = d(grid.nx, i, &|a| at(a, j));
    let fy = d(grid.ny, j, &|b| at(i, b));
    ((fx - I * fy) * 0.5, (fx + I * fy) * 0.5)
}

/// Connection form of `∇^ζ` sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionFormPair {
    pub grid: Grid,
    pub zeta: C64,
    pub cz: Vec<Matrix2>,
    pub czbar: Vec<Matrix2>,
}

impl ConnectionFormPair {
    /// `(A_x, A_y)` with `C_z dz + C_z̄ dz̄ = A_x dx + A_y dy` at sample `k`.
    pub fn real_components(&self, k: usize) -> (Matrix2, Matrix2) {
        let (a, b) = (self.cz[k], self.czbar[k]);
        (a + b, (a - b) * I)
    }
}

/// The ζ-independent building blocks of the form at one point:
/// `C_z = N_z + ζ⁻¹P`, `C_z̄ = N_z̄ − ζP*` with `P = e^u E₊`, `P* = e^u E₋`.
#[derive(Debug, Clone, Copy)]
struct Pieces {
    nz: Matrix2,
    nzbar: Matrix2,
    p: Matrix2,
    pstar: Matrix2,
}

fn pieces(data: &MinimalChartData, i: usize, j: usize) -> Pieces {
    let g = &data.grid;
    let k = g.index(i, j);
    let u = data.u[k];
    let q = data.q[k];
    let (uz, uzbar) = wirtinger(g, &data.u, i, j);
    let eu = u.exp();
    let emu = (-u).exp();
    let half_i = C64::new(0.0, -0.5);
    Pieces {
        nz: Matrix2::new(uz * 0.5, ZERO, half_i * q * emu, -uz * 0.5),
        nzbar: Matrix2::new(-uzbar * 0.5, half_i * q.conj() * emu, ZERO, uzbar * 0.5),
        p: Matrix2::real(0.0, eu, 0.0, 0.0),
        pstar: Matrix2::real(0.0, 0.0, eu, 0.0),
    }
}

/// Assembles `C_z, C_z̄` of `∇^ζ` at every grid point.
pub fn associated_family_form(
    data: &MinimalChartData,
    zeta: C64,
) -> Result<ConnectionFormPair, ChartError> {
    if zeta == ZERO {
        return Err(ChartError::PoleOfFamily);
    }
    let g = data.grid;
    let zinv = zeta.inv();
    let (cz, czbar): (Vec<Matrix2>, Vec<Matrix2>) = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let p = pieces(data, k % g.nx, k / g.nx);
            (p.nz + p.p * zinv, p.nzbar - p.pstar * zeta)
        })
        .unzip();
    Ok(ConnectionFormPair { grid: g, zeta, cz, czbar })
}

/// Discrete curvature `∂_z C_z̄ − ∂_z̄ C_z + [C_z, C_z̄]` at interior point `(i, j)`.
fn curvature_at(form: &ConnectionFormPair, i: usize, j: usize) -> Matrix2 {
    let g = &form.grid;
    let mut out = Matrix2::zero();
    for r in 0..2 {
        for c in 0..2 {
            out.0[r][c] += wirtinger_local(g, &|a, b| form.czbar[g.index(a, b)].0[r][c], i, j).0;
            out.0[r][c] -= wirtinger_local(g, &|a, b| form.cz[g.index(a, b)].0[r][c], i, j).1;
        }
    }
    let k = g.index(i, j);
    out + form.cz[k].commutator(&form.czbar[k])
}

/// Centered Wirtinger derivatives of an interior point of a field given by a
/// closure.
fn wirtinger_local(g: &Grid, f: &dyn Fn(usize, usize) -> C64, i: usize, j: usize) -> (C64, C64) {
    let fx = (f(i + 1, j) - f(i - 1, j)) / (2.0 * g.h);
    let fy = (f(i, j + 1) - f(i, j - 1)) / (2.0 * g.h);
    ((fx - I * fy) * 0.5, (fx + I * fy) * 0.5)
}

fn interior_points(g: &Grid, depth: usize) -> Vec<(usize, usize)> {
    (depth..g.ny - depth)
        .flat_map(|j| (depth..g.nx - depth).map(move |i| (i, j)))
        .collect()
}

fn sup<T: Send + Sync>(pts: &[T], f: impl Fn(&T) -> f64 + Sync + Send) -> f64 {
    let vals: Vec<f64> = pts.par_iter().map(f).collect();
    vals.into_iter().fold(0.0, f64::max)
}

/// Sup over points two steps inside the boundary of the Frobenius norm of the
/// discrete curvature of `∇^ζ`.
pub fn flatness_residual(data: &MinimalChartData, zeta: C64) -> Result<f64, ChartError> {
    data.grid.check_depth(2)?;
    let form = associated_family_form(data, zeta)?;
    let pts = interior_points(&data.grid, 2);
    Ok(sup(&pts, |&(i, j)| curvature_at(&form, i, j).frobenius()))
}

/// Sup norms of the ζ⁻¹, ζ⁰ and ζ¹ coefficients of the curvature of `∇^ζ`,
/// together with the sup of `|∂_z̄ q|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientResiduals {
    /// `−∂_z̄Φ + [Φ, N_z̄]`: holomorphicity of the Higgs field.
    pub r_minus: f64,
    /// `F^N − [Φ ∧ Φ*]`: the Gauss equation and the Codazzi equations.
    pub r_zero: f64,
    /// `−∂_zΦ* − [N_z, Φ*]`: the adjoint of the ζ⁻¹ equation.
    pub r_plus: f64,
    /// Discrete `sup |∂_z̄ q|`.
    pub dbar_q: f64,
}

pub fn coefficient_residuals(data: &MinimalChartData) -> Result<CoefficientResiduals, ChartError> {
    let g = data.grid;
    g.check_depth(2)?;
    let all: Vec<Pieces> = (0..g.len())
        .into_par_iter()
        .map(|k| pieces(data, k % g.nx, k / g.nx))
        .collect();
    let field = |sel: fn(&Pieces) -> Matrix2, r: usize, c: usize| {
        let all = &all;
        move |a: usize, b: usize| sel(&all[g.index(a, b)]).0[r][c]
    };
    let deriv = |sel: fn(&Pieces) -> Matrix2, i: usize, j: usize| -> (Matrix2, Matrix2) {
        let mut dz = Matrix2::zero();
        let mut dzbar = Matrix2::zero();
        for r in 0..2 {
            for c in 0..2 {
                let (a, b) = wirtinger_local(&g, &field(sel, r, c), i, j);
                dz.0[r][c] = a;
                dzbar.0[r][c] = b;
            }
        }
        (dz, dzbar)
    };
    let pts = interior_points(&g, 2);
    let per_point: Vec<[f64; 4]> = pts
        .par_iter()
        .map(|&(i, j)| {
            let p = &all[g.index(i, j)];
            let (_, dbar_p) = deriv(|x| x.p, i, j);
            let (dz_pstar, _) = deriv(|x| x.pstar, i, j);
            let (dz_nzbar, _) = deriv(|x| x.nzbar, i, j);
            let (_, dbar_nz) = deriv(|x| x.nz, i, j);
            let r_minus = p.p.commutator(&p.nzbar) - dbar_p;
            let r_zero = dz_nzbar - dbar_nz + p.nz.commutator(&p.nzbar) - p.p.commutator(&p.pstar);
            let r_plus = -dz_pstar - p.nz.commutator(&p.pstar);
            let dbar_q = wirtinger_local(&g, &|a, b| data.q[g.index(a, b)], i, j).1.norm();
            [r_minus.frobenius(), r_zero.frobenius(), r_plus.frobenius(), dbar_q]
        })
        .collect();
    let mut out = [0.0f64; 4];
    for v in per_point {
        for k in 0..4 {
            out[k] = out[k].max(v[k]);
        }
    }
    Ok(CoefficientResiduals { r_minus: out[0], r_zero: out[1], r_plus: out[2], dbar_q: out[3] })
}

/// Sup over the grid of `max(‖A_x + A_x^†‖, ‖A_y + A_y^†‖)` for the real
/// components of the form; zero exactly when the form is skew-Hermitian.
pub fn unitarity_check(form: &ConnectionFormPair) -> f64 {
    let idx: Vec<usize> = (0..form.cz.len()).collect();
    sup(&idx, |&k| {
        let (ax, ay) = form.real_components(k);
        (ax + ax.adjoint()).frobenius().max((ay + ay.adjoint()).frobenius())
    })
}

/// One row of a residual report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualRow {
    pub zeta: C64,
    pub r_minus: f64,
    pub r_zero: f64,
    pub r_plus: f64,
    pub flatness: f64,
    pub unitarity: f64,
}

pub fn residual_table(data: &MinimalChartData, zetas: &[C64]) -> Result<Vec<ResidualRow>, ChartError> {
    let coeffs = coefficient_residuals(data)?;
    zetas
        .iter()
        .map(|&zeta| {
            let form = associated_family_form(data, zeta)?;
            Ok(ResidualRow {
                zeta,
                r_minus: coeffs.r_minus,
                r_zero: coeffs.r_zero,
                r_plus: coeffs.r_plus,
                flatness: flatness_residual(data, zeta)?,
                unitarity: unitarity_check(&form),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopcore::ONE;

    fn small_grid() -> Grid {
        Grid::centered(C64::new(0.1, -0.2), 0.05, 9)
    }

    #[test]
    fn zero_data_forms() {
        let d = MinimalChartData::flat_zero(small_grid());
        let f = associated_family_form(&d, ONE).unwrap();
        assert_eq!(f.cz[0], Matrix2::real(0.0, 1.0, 0.0, 0.0));
        assert_eq!(f.czbar[0], Matrix2::real(0.0, 0.0, -1.0, 0.0));
        let f = associated_family_form(&d, -ONE).unwrap();
        assert_eq!(f.cz[0], Matrix2::real(0.0, -1.0, 0.0, 0.0));
        assert_eq!(f.czbar[0], Matrix2::real(0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn zeta_zero_is_rejected() {
        let d = MinimalChartData::flat_zero(small_grid());
        assert_eq!(associated_family_form(&d, ZERO), Err(ChartError::PoleOfFamily));
    }

    #[test]
    fn zero_data_is_not_flat() {
        // Only [Φ, Φ*] survives: [E₊, −E₋] = −diag(1, −1), Frobenius √2.
        let d = MinimalChartData::flat_zero(small_grid());
        let r = flatness_residual(&d, ONE).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn clifford_is_flat() {
        let d = MinimalChartData::clifford(small_grid());
        for zeta in [ONE, C64::new(0.3, 2.0), C64::from_polar(1.0, 0.7)] {
            assert!(flatness_residual(&d, zeta).unwrap() < 1e-10);
        }
    }

    #[test]
    fn traces_vanish() {
        let d = MinimalChartData::round_sphere(small_grid());
        let f = associated_family_form(&d, C64::new(0.5, 0.5)).unwrap();
        for (a, b) in f.cz.iter().zip(&f.czbar) {
            assert!(a.trace().norm() < 1e-15 && b.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn off_circle_unitarity_defect() {
        let d = MinimalChartData::round_sphere(small_grid());
        let f = associated_family_form(&d, C64::new(2.0, 0.0)).unwrap();
        let min_eu = d.u.iter().map(|u| u.exp()).fold(f64::INFINITY, f64::min);
        assert!(unitarity_check(&f) >= 1.5 * min_eu);
    }

    #[test]
    fn tiny_grid_is_rejected() {
        let d = MinimalChartData::flat_zero(Grid::centered(ZERO, 0.1, 4));
        assert!(matches!(flatness_residual(&d, ONE), Err(ChartError::GridTooSmall { .. })));
    }
}
