//! Iwasawa splitting `Ψ = F·B` of loops, with `F` unitary on the circle and
//! `B` in the positive loop group, via spectral factorization of `star(Ψ)·Ψ`.
//!
//! The factor `B` of `J = star(B)·B` is first approximated by the trailing block
//! column of the upper Cholesky factor of the block Toeplitz matrix of `J`
//! (Bauer's method), doubling the block count until the residual stalls, and
//! then refined by Newton's method on the coefficients of `B`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loopcore::{unit_circle, LoopError, Matrix2, MatrixLoop, C64, ZERO};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IwasawaError {
    #[error("loop is not positive definite on the unit circle (min eigenvalue {min_eigenvalue:e} at angle {angle})")]
    NotPositiveDefinite { min_eigenvalue: f64, angle: f64 },
    #[error("spectral factorization did not converge (best residual {residual:e})")]
    FactorizationFailure { residual: f64 },
    #[error("positive factor is ill-conditioned on the unit circle (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("loop is not invertible on the unit circle (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error(transparent)]
    Loop(#[from] LoopError),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FactorOptions {
    pub tol: f64,
    /// Block count of the first Toeplitz factorization (0 picks one from the degree).
    pub initial_blocks: usize,
    /// Largest block count tried before switching to Newton refinement.
    pub max_blocks: usize,
    pub max_newton_steps: usize,
    /// Condition number of `B(ζ)` above which the splitting is refused.
    pub max_condition: f64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            tol: DEFAULT_TOL,
            initial_blocks: 0,
            max_blocks: 128,
            max_newton_steps: 30,
            max_condition: 1e12,
        }
    }
}

impl FactorOptions {
    pub fn with_tol(tol: f64) -> Self {
        FactorOptions { tol, ..Self::default() }
    }
}

/// One row of the convergence table: method, block count,
/// residual `sup ‖star(B)B − J‖` after the step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorStep {
    pub stage: String,
    pub blocks: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralFactor {
    pub b: MatrixLoop,
    pub residual: f64,
    pub history: Vec<FactorStep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IwasawaResult {
    #[serde(rename = "F")]
    pub f: MatrixLoop,
    #[serde(rename = "B")]
    pub b: MatrixLoop,
    /// Largest of the reconstruction, unitarity and factorization defects
    /// measured on the unit circle.
    pub residual: f64,
    /// Wiener norm of the discarded tail of `F`.
    pub tail: f64,
    /// Largest condition number of `B(ζ)` seen on the unit circle.
    pub condition: f64,
    pub history: Vec<FactorStep>,
}

fn hermitian_min_eigenvalue(m: &Matrix2) -> f64 {
    let a = m.0[0][0].re;
    let d = m.0[1][1].re;
    let b = (m.0[0][1] + m.0[1][0].conj()) * 0.5;
    0.5 * (a + d - ((a - d).powi(2) + 4.0 * b.norm_sqr()).sqrt())
}

/// Smallest and largest singular values of a 2×2 matrix.
pub fn singular_values(m: &Matrix2) -> (f64, f64) {
    let fro2 = m.frobenius().powi(2);
    let det = m.det().norm();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let s_max = (0.5 * (fro2 + disc)).sqrt();
    let s_min = if s_max > 0.0 { det / s_max } else { 0.0 };
    (s_min, s_max)
}

fn sample_count(deg: usize) -> usize {
    (8 * (deg + 1)).next_power_of_two().max(64)
}

/// `sup ‖star(B)B − J‖` on the unit circle.
fn factor_residual(b: &MatrixLoop, j: &MatrixLoop, samples: usize) -> f64 {
    let bs = b.sample_unit(samples);
    let js = j.sample_unit(samples);
    bs.iter()
        .zip(&js)
        .map(|(bv, jv)| (bv.adjoint() * *bv - *jv).frobenius())
        .fold(0.0, f64::max)
}

/// Trailing block column of the upper Cholesky factor of the `m`-block Toeplitz
/// matrix `T_{ik} = J_{k−i}`, read as the coefficients of `B`.
fn bauer_step(j: &MatrixLoop, deg: usize, m: usize) -> Option<MatrixLoop> {
    let n = 2 * m;
    let mut t = DMatrix::<C64>::zeros(n, n);
    for bi in 0..m {
        for bk in 0..m {
            let blk = j.coeff(bk as i32 - bi as i32);
            for r in 0..2 {
                for c in 0..2 {
                    t[(2 * bi + r, 2 * bk + c)] = blk.0[r][c];
                }
            }
        }
    }
    // Hermitian symmetrization guards against roundoff in the input.
    let t = (&t + t.adjoint()) * C64::new(0.5, 0.0);
    let l = t.cholesky()?.unpack();
    // X = L^†; X_{(m−1−s),(m−1)} = (L_{(m−1),(m−1−s)})^†.
    let last = m - 1;
    let count = (deg + 1).min(m);
    let coeffs = (0..count)
        .map(|s| {
            let col = last - s;
            let mut blk = Matrix2::zero();
            for r in 0..2 {
                for c in 0..2 {
                    blk.0[r][c] = l[(2 * last + c, 2 * col + r)].conj();
                }
            }
            blk
        })
        .collect();
    Some(MatrixLoop::from_coeffs(0, coeffs))
}

/// Real coordinates of a correction `ΔB = Σ_{k=0}^{d} ΔB_k ζ^k` with `ΔB_0`
/// upper triangular and real on the diagonal.
fn correction_from_params(x: &[f64], deg: usize) -> MatrixLoop {
    let mut coeffs = Vec::with_capacity(deg + 1);
    coeffs.push(Matrix2::new(
        C64::new(x[0], 0.0),
        C64::new(x[1], x[2]),
        ZERO,
        C64::new(x[3], 0.0),
    ));
    for k in 0..deg {
        let o = 4 + 8 * k;
        coeffs.push(Matrix2::new(
            C64::new(x[o], x[o + 1]),
            C64::new(x[o + 2], x[o + 3]),
            C64::new(x[o + 4], x[o + 5]),
            C64::new(x[o + 6], x[o + 7]),
        ));
    }
    MatrixLoop { lo: 0, coeffs }
}

/// Independent real coordinates of a Hermitian loop `R` of degree `d`, given
/// its coefficients `R_0..R_d`: the Hermitian part of `R_0` and the full
/// coefficients `R_1..R_d`.
fn hermitian_params(r: &[Matrix2], out: &mut [f64]) {
    let r0 = r[0];
    let off = (r0.0[0][1] + r0.0[1][0].conj()) * 0.5;
    out[..4].copy_from_slice(&[r0.0[0][0].re, off.re, off.im, r0.0[1][1].re]);
    for (k, m) in r.iter().enumerate().skip(1) {
        let o = 4 + 8 * (k - 1);
        for (q, e) in m.0.iter().flatten().enumerate() {
            out[o + 2 * q] = e.re;
            out[o + 2 * q + 1] = e.im;
        }
    }
}

/// Newton step for `star(B)B = J` on the polynomial coefficients of `B`:
/// solves `star(B)ΔB + star(ΔB)B = J − star(B)B` for `ΔB` of degree `d`.
///
/// For `ΔB = E ζ^j` the nonnegative coefficients of the left side are
/// `B_{j−m}^† E + E^† B_{j+m}`, which gives the Jacobian column by column.
fn newton_step(b: &MatrixLoop, j: &MatrixLoop, deg: usize) -> Option<MatrixLoop> {
    let n = 4 + 8 * deg;
    let bc: Vec<Matrix2> = (0..=deg as i32).map(|k| b.coeff(k)).collect();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut unit = vec![0.0; n];
    let mut h = vec![Matrix2::zero(); deg + 1];
    let mut col_vals = vec![0.0; n];
    for col in 0..n {
        unit[col] = 1.0;
        let db = correction_from_params(&unit, deg);
        unit[col] = 0.0;
        let (jj, e) = db
            .coeffs
            .iter()
            .enumerate()
            .find(|(_, m)| **m != Matrix2::zero())
            .map(|(k, m)| (k, *m))
            .unwrap();
        let eh = e.adjoint();
        for (m, hm) in h.iter_mut().enumerate() {
            let mut acc = Matrix2::zero();
            if jj >= m {
                acc += bc[jj - m].adjoint() * e;
            }
            if jj + m <= deg {
                acc += eh * bc[jj + m];
            }
            *hm = acc;
        }
        hermitian_params(&h, &mut col_vals);
        for (row, v) in col_vals.iter().enumerate() {
            jac[(row, col)] = *v;
        }
    }
    let resid = j - &b.star().mul(b);
    let rc: Vec<Matrix2> = (0..=deg as i32).map(|k| resid.coeff(k)).collect();
    let mut rhs = vec![0.0; n];
    hermitian_params(&rc, &mut rhs);
    let x = jac.lu().solve(&DVector::from_vec(rhs))?;
    let db = correction_from_params(x.as_slice(), deg);
    Some((b + &db).window(0, deg as i32).0)
}

/// Left-multiplies by the constant unitary that makes `B(0)` upper triangular
/// with positive real diagonal (thin QR of `B(0)`), and cleans the entries
/// that are zero by construction.
fn normalize_plus(b: &MatrixLoop) -> MatrixLoop {
    let b0 = b.coeff(0);
    let (a0, a1) = (b0.0[0][0], b0.0[1][0]);
    let r11 = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    if r11 == 0.0 {
        return b.clone();
    }
    let q1 = [a0 / r11, a1 / r11];
    let (c0, c1) = (b0.0[0][1], b0.0[1][1]);
    let r12 = q1[0].conj() * c0 + q1[1].conj() * c1;
    let w = [c0 - r12 * q1[0], c1 - r12 * q1[1]];
    let r22 = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let q2 = if r22 > 0.0 {
        [w[0] / r22, w[1] / r22]
    } else {
        [-q1[1].conj(), q1[0].conj()]
    };
    let q = Matrix2::new(q1[0], q2[0], q1[1], q2[1]);
    let qh = q.adjoint();
    let mut out = b.map_coeffs(|m| qh * *m);
    if out.lo == 0 && !out.coeffs.is_empty() {
        let c = &mut out.coeffs[0];
        c.0[1][0] = ZERO;
        c.0[0][0] = C64::new(c.0[0][0].re.abs(), 0.0);
        c.0[1][1] = C64::new(c.0[1][1].re.abs(), 0.0);
    }
    out
}

fn check_positive(j: &MatrixLoop, deg: usize) -> Result<(), IwasawaError> {
    let m = sample_count(deg) * 4;
    for (k, z) in unit_circle(m).into_iter().enumerate() {
        let jv = j.eval(z)?;
        let e = hermitian_min_eigenvalue(&jv);
        if !(e > 0.0) {
            return Err(IwasawaError::NotPositiveDefinite {
                min_eigenvalue: e,
                angle: 2.0 * std::f64::consts::PI * k as f64 / m as f64,
            });
        }
    }
    Ok(())
}

/// Factors `J = star(B)·B` with `B` a plus-class loop normalized at `ζ = 0`.
pub fn spectral_factorize(j: &MatrixLoop, tol: f64) -> Result<MatrixLoop, IwasawaError> {
    spectral_factorize_with(j, &FactorOptions::with_tol(tol)).map(|s| s.b)
}

pub fn spectral_factorize_with(
    j: &MatrixLoop,
    opts: &FactorOptions,
) -> Result<SpectralFactor, IwasawaError> {
    // Hermitian part only; J is assumed self-adjoint.
    let j = &(j + &j.star()).scale(C64::new(0.5, 0.0));
    let deg = j.degree();
    check_positive(j, deg)?;
    let check_samples = sample_count(deg);
    let scale = j.norm().max(1.0);
    let target = opts.tol * 1e-4;
    let mut history = Vec::new();

    let mut blocks = if opts.initial_blocks > 0 {
        opts.initial_blocks
    } else {
        (4 * (deg + 1)).max(8)
    };
    let mut best: Option<(MatrixLoop, f64)> = None;
    loop {
        if let Some(b) = bauer_step(j, deg, blocks) {
            let b = normalize_plus(&b);
            let res = factor_residual(&b, j, check_samples);
            history.push(FactorStep { stage: "toeplitz".into(), blocks, residual: res });
            let prev = best.as_ref().map(|(_, r)| *r);
            if prev.is_none_or(|p| res < p) {
                best = Some((b, res));
            }
            let stalled = prev.is_some_and(|p| res > 0.5 * p);
            if res < target * scale || stalled {
                break;
            }
        } else if best.is_some() {
            break;
        }
        if blocks * 2 > opts.max_blocks.max(blocks) {
            break;
        }
        blocks *= 2;
    }
    let (b, res) = best.ok_or(IwasawaError::FactorizationFailure { residual: f64::INFINITY })?;
    refine(j, b, res, blocks, history, opts)
}

/// Newton refinement of `B` until the sampled residual of `star(B)B − J`
/// falls below the target; `j` must already be Hermitian.
fn refine(
    j: &MatrixLoop,
    mut b: MatrixLoop,
    mut res: f64,
    blocks: usize,
    mut history: Vec<FactorStep>,
    opts: &FactorOptions,
) -> Result<SpectralFactor, IwasawaError> {
    let deg = j.degree();
    let check_samples = sample_count(deg);
    let target = opts.tol * 1e-4 * j.norm().max(1.0);
    let mut steps = 0;
    while res >= target && steps < opts.max_newton_steps {
        steps += 1;
        let Some(cand) = newton_step(&b, j, deg) else { break };
        let cand = normalize_plus(&cand);
        let cres = factor_residual(&cand, j, check_samples);
        history.push(FactorStep { stage: "newton".into(), blocks, residual: cres });
        if cres.is_finite() && cres < res {
            b = cand;
            res = cres;
        } else {
            break;
        }
    }
    if !(res < opts.tol) {
        return Err(IwasawaError::FactorizationFailure { residual: res });
    }
    Ok(SpectralFactor { b, residual: res, history })
}

/// Like [`spectral_factorize_with`], but starts Newton refinement from
/// `guess` (typically the factor at a neighbouring point). Falls back to the
/// Toeplitz start when refinement from the guess does not converge.
pub fn spectral_factorize_from(
    j: &MatrixLoop,
    guess: &MatrixLoop,
    opts: &FactorOptions,
) -> Result<SpectralFactor, IwasawaError> {
    let jh = (j + &j.star()).scale(C64::new(0.5, 0.0));
    let deg = jh.degree();
    check_positive(&jh, deg)?;
    let b0 = normalize_plus(&guess.window(0, deg as i32).0);
    let res0 = factor_residual(&b0, &jh, sample_count(deg));
    let history = vec![FactorStep { stage: "warm".into(), blocks: 0, residual: res0 }];
    if res0.is_finite() && res0 < 0.1 * jh.norm().max(1.0) {
        if let Ok(sf) = refine(&jh, b0, res0, 0, history, opts) {
            return Ok(sf);
        }
    }
    spectral_factorize_with(j, opts)
}

/// Computes `F = Ψ·B⁻¹` from samples, doubling the sample count until the
/// coefficient tail is below `tol`.
fn unitary_factor(psi: &MatrixLoop, b: &MatrixLoop, tol: f64, opts: &FactorOptions) -> Result<(MatrixLoop, f64, f64), IwasawaError> {
    let mut m = sample_count(psi.degree().max(b.degree()));
    loop {
        let zs = unit_circle(m);
        let mut cond: f64 = 1.0;
        let mut samples = Vec::with_capacity(m);
        for z in &zs {
            let bv = b.eval(*z)?;
            let (smin, smax) = singular_values(&bv);
            cond = cond.max(smax / smin);
            if !(cond <= opts.max_condition) {
                return Err(IwasawaError::IllConditioned { condition: cond });
            }
            samples.push(psi.eval(*z)? * bv.inverse().unwrap());
        }
        // Window [lo, lo + m): the negative part of F is bounded by Ψ.lo, the
        // positive part decays; the top quarter measures aliasing.
        let lo = psi.lo.min(0);
        let f = MatrixLoop::from_unit_samples(&samples, lo);
        let top = f.window(lo + (3 * m / 4) as i32, lo + m as i32).0.norm();
        if top < tol * 1e-3 || m >= 1 << 16 {
            let f = f.chopped(tol * 1e-4);
            let tail = top;
            return Ok((f, tail, cond));
        }
        m *= 2;
    }
}

/// Splits `Ψ = F·B` with `F` unitary on `|ζ| = 1` and `B` in the plus class.
pub fn iwasawa(psi: &MatrixLoop, tol: f64) -> Result<IwasawaResult, IwasawaError> {
    iwasawa_with(psi, &FactorOptions::with_tol(tol))
}

pub fn iwasawa_with(psi: &MatrixLoop, opts: &FactorOptions) -> Result<IwasawaResult, IwasawaError> {
    iwasawa_impl(psi, None, opts)
}

/// Iwasawa splitting warm-started from a plus-class guess for `B`.
pub fn iwasawa_from(psi: &MatrixLoop, guess: &MatrixLoop, opts: &FactorOptions) -> Result<IwasawaResult, IwasawaError> {
    iwasawa_impl(psi, Some(guess), opts)
}

fn iwasawa_impl(psi: &MatrixLoop, guess: Option<&MatrixLoop>, opts: &FactorOptions) -> Result<IwasawaResult, IwasawaError> {
    let check = sample_count(psi.degree());
    let sigma_min = psi
        .sample_unit(check)
        .iter()
        .map(|m| singular_values(m).0)
        .fold(f64::INFINITY, f64::min);
    if !(sigma_min > 0.0) || sigma_min < 1e-14 * psi.norm() {
        return Err(IwasawaError::Singular { sigma_min });
    }
    let j = psi.star().mul(psi);
    let sf = match guess {
        Some(g) => spectral_factorize_from(&j, g, opts)?,
        None => spectral_factorize_with(&j, opts)?,
    };
    let (f, tail, condition) = unitary_factor(psi, &sf.b, opts.tol, opts)?;

    let zs = unit_circle(check);
    let mut residual = sf.residual;
    for z in zs {
        let fv = f.eval(z)?;
        let bv = sf.b.eval(z)?;
        let pv = psi.eval(z)?;
        residual = residual
            .max((pv - fv * bv).frobenius())
            .max((fv.adjoint() * fv - Matrix2::identity()).frobenius());
    }
    Ok(IwasawaResult { f, b: sf.b, residual, tail, condition, history: sf.history })
}
