//! 2×2 matrix-valued finite Laurent series in the spectral parameter ζ.
//!
//! A [`MatrixLoop`] stores coefficients `A_lo, …, A_hi` of
//! `A(ζ) = Σ_n ζⁿ A_n`. Loops are the common currency of the crate: parallel
//! frames, Iwasawa factors, gauges and holonomies are all loops.
//!
//! The canonical norm is the Wiener norm `Σ ‖A_n‖_F`, which dominates the sup
//! norm on the unit circle and is submultiplicative.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default truncation degree for loops.
pub const DEFAULT_TRUNCATION: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("loop has negative powers of zeta and cannot be evaluated at zeta = 0")]
    PoleAtOrigin,
    #[error("product exceeds degree cap {cap}; discarded tail has Wiener norm {tail_norm:e}")]
    Truncation { cap: usize, tail_norm: f64 },
}

/// A complex 2×2 matrix, row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix2(pub [[C64; 2]; 2]);

impl fmt::Debug for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{:.6}, {:.6}], [{:.6}, {:.6}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

impl Matrix2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        Matrix2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Matrix2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    /// Nilpotent raising operator `[[0,1],[0,0]]`.
    pub fn e_plus() -> Self {
        Self::new(ZERO, ONE, ZERO, ZERO)
    }

    /// Nilpotent lowering operator `[[0,0],[1,0]]`.
    pub fn e_minus() -> Self {
        Self::new(ZERO, ZERO, ONE, ZERO)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Self::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    /// Adjugate; equals `det · inverse`.
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        Self::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    /// Inverse, or `None` when the determinant vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(d.inv()))
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Matrix exponential in closed form.
    ///
    /// Writes `X = (tr X / 2)·I + X₀` with `X₀` trace-free, so that
    /// `X₀² = s²·I` with `s² = −det X₀`, and `exp X₀ = cosh(s)·I + sinh(s)/s·X₀`.
    pub fn exp(&self) -> Self {
        let half_tr = self.trace() * 0.5;
        let x0 = *self - Matrix2::identity().scale(half_tr);
        let s2 = -x0.det();
        let s = s2.sqrt();
        let (c, sinc) = if s.norm() < 1e-4 {
            // Taylor series of cosh(s) and sinh(s)/s in s².
            let c = ONE + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0;
            let sc = ONE + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0;
            (c, sc)
        } else {
            (s.cosh(), s.sinh() / s)
        };
        (Matrix2::identity().scale(c) + x0.scale(sinc)).scale(half_tr.exp())
    }

    /// Principal square root of the determinant used to bring a matrix back
    /// onto `det = 1`.
    pub fn normalize_det(&self) -> Self {
        let d = self.det();
        self.scale(d.sqrt().inv())
    }

    /// Entry-wise maximum of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                m = m.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        m
    }
}

impl Default for Matrix2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &o.0);
        Matrix2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl AddAssign for Matrix2 {
    fn add_assign(&mut self, o: Matrix2) {
        *self = *self + o;
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &o.0);
        Matrix2::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(-ONE)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &o.0);
        Matrix2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: C64) -> Matrix2 {
        self.scale(s)
    }
}

/// Which subgroup of the loop group a loop has been recognised as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopClass {
    General,
    Unitary,
    Plus,
}

/// Finite Laurent series `Σ_{n=lo}^{hi} ζⁿ A_n` with 2×2 complex coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLoop {
    pub lo: i32,
    pub coeffs: Vec<Matrix2>,
}

impl MatrixLoop {
    pub fn zero() -> Self {
        MatrixLoop { lo: 0, coeffs: Vec::new() }
    }

    pub fn constant(m: Matrix2) -> Self {
        MatrixLoop { lo: 0, coeffs: vec![m] }
    }

    pub fn identity() -> Self {
        Self::constant(Matrix2::identity())
    }

    /// `ζⁿ · m`.
    pub fn monomial(n: i32, m: Matrix2) -> Self {
        MatrixLoop { lo: n, coeffs: vec![m] }
    }

    pub fn from_coeffs(lo: i32, coeffs: Vec<Matrix2>) -> Self {
        MatrixLoop { lo, coeffs }.trimmed()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest index carried (`lo - 1` for the zero loop).
    pub fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32 - 1
    }

    /// Truncation degree `max(|lo|, |hi|)`.
    pub fn degree(&self) -> usize {
        if self.is_zero() {
            0
        } else {
            self.lo.unsigned_abs().max(self.hi().unsigned_abs()) as usize
        }
    }

    pub fn coeff(&self, n: i32) -> Matrix2 {
        let k = n - self.lo;
        if k < 0 || k as usize >= self.coeffs.len() {
            Matrix2::zero()
        } else {
            self.coeffs[k as usize]
        }
    }

    /// Drops exactly-zero coefficients at both ends.
    pub fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|m| *m == Matrix2::zero()) {
            self.coeffs.pop();
        }
        let lead = self
            .coeffs
            .iter()
            .take_while(|m| **m == Matrix2::zero())
            .count();
        if lead == self.coeffs.len() {
            return Self::zero();
        }
        self.coeffs.drain(..lead);
        self.lo += lead as i32;
        self
    }

    /// Evaluates the loop at ζ by Horner's rule.
    pub fn eval(&self, zeta: C64) -> Result<Matrix2, LoopError> {
        if self.is_zero() {
            return Ok(Matrix2::zero());
        }
        if zeta == ZERO {
            if self.lo < 0 {
                return Err(LoopError::PoleAtOrigin);
            }
            return Ok(self.coeff(0));
        }
        let mut acc = Matrix2::zero();
        for m in self.coeffs.iter().rev() {
            acc = acc.scale(zeta) + *m;
        }
        Ok(acc.scale(zeta.powi(self.lo)))
    }

    /// Evaluation on the unit circle (never fails).
    pub fn eval_unit(&self, theta: f64) -> Matrix2 {
        self.eval(C64::from_polar(1.0, theta))
            .expect("unit-circle evaluation is total")
    }

    /// Exact Cauchy product.
    pub fn mul(&self, other: &MatrixLoop) -> MatrixLoop {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![Matrix2::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += *a * *b;
            }
        }
        MatrixLoop { lo: self.lo + other.lo, coeffs: out }.trimmed()
    }

    /// Product with a degree cap; reports the discarded tail if any.
    pub fn mul_capped(&self, other: &MatrixLoop, cap: usize) -> Result<MatrixLoop, LoopError> {
        let p = self.mul(other);
        let (kept, tail) = p.truncated(cap);
        if tail > 0.0 {
            Err(LoopError::Truncation { cap, tail_norm: tail })
        } else {
            Ok(kept)
        }
    }

    /// Restriction to indices `-cap..=cap`, plus the Wiener norm of what was cut.
    pub fn truncated(&self, cap: usize) -> (MatrixLoop, f64) {
        self.window(-(cap as i32), cap as i32)
    }

    /// Restriction to indices `lo..=hi`, plus the Wiener norm of what was cut.
    pub fn window(&self, lo: i32, hi: i32) -> (MatrixLoop, f64) {
        let mut tail = 0.0;
        let mut kept = Vec::new();
        let mut first = None;
        for (k, m) in self.coeffs.iter().enumerate() {
            let n = self.lo + k as i32;
            if n < lo || n > hi {
                tail += m.frobenius();
            } else {
                first.get_or_insert(n);
                kept.push(*m);
            }
        }
        let out = match first {
            Some(f) => MatrixLoop { lo: f, coeffs: kept }.trimmed(),
            None => MatrixLoop::zero(),
        };
        (out, tail)
    }

    /// `star(a)(ζ) = a(1/ζ̄)^†`; coefficient-wise `star(a)_m = (a_{-m})^†`.
    pub fn star(&self) -> MatrixLoop {
        if self.is_zero() {
            return Self::zero();
        }
        let coeffs = self.coeffs.iter().rev().map(Matrix2::adjoint).collect();
        MatrixLoop { lo: -self.hi(), coeffs }
    }

    /// Wiener norm `Σ_n ‖A_n‖_F`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(Matrix2::frobenius).sum()
    }

    /// Largest Frobenius norm over `samples` equispaced points of the unit circle.
    pub fn sup_norm_sampled(&self, samples: usize) -> f64 {
        unit_circle(samples)
            .into_iter()
            .map(|z| self.eval(z).unwrap().frobenius())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> MatrixLoop {
        MatrixLoop {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|m| m.scale(s)).collect(),
        }
        .trimmed()
    }

    pub fn map_coeffs(&self, f: impl Fn(&Matrix2) -> Matrix2) -> MatrixLoop {
        MatrixLoop {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
        .trimmed()
    }

    /// `sup_ζ ‖star(Ψ)Ψ − I‖` over `samples` unit points.
    pub fn unitarity_defect(&self, samples: usize) -> f64 {
        unit_circle(samples)
            .into_iter()
            .map(|z| {
                let m = self.eval(z).unwrap();
                (m.adjoint() * m - Matrix2::identity()).frobenius()
            })
            .fold(0.0, f64::max)
    }

    /// Coefficient 0 upper triangular with real positive diagonal, no negative powers.
    pub fn is_plus(&self, tol: f64) -> bool {
        if self.is_zero() || self.lo < 0 {
            return false;
        }
        let b0 = self.coeff(0);
        b0.get(1, 0).norm() <= tol
            && b0.get(0, 0).im.abs() <= tol
            && b0.get(1, 1).im.abs() <= tol
            && b0.get(0, 0).re > 0.0
            && b0.get(1, 1).re > 0.0
    }

    pub fn classify(&self, tol: f64) -> LoopClass {
        if self.is_plus(tol) {
            LoopClass::Plus
        } else if !self.is_zero() && self.unitarity_defect(64) < tol {
            LoopClass::Unitary
        } else {
            LoopClass::General
        }
    }

    /// Smallest singular value of `A(ζ)` over `samples` unit points.
    pub fn min_singular_value_sampled(&self, samples: usize) -> f64 {
        unit_circle(samples)
            .into_iter()
            .map(|z| {
                let m = self.eval(z).unwrap();
                let fro2 = m.frobenius().powi(2);
                let det = m.det().norm();
                let smax = (0.5 * (fro2 + (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt())).sqrt();
                if smax > 0.0 { det / smax } else { 0.0 }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Samples the loop at the `m` points `e^{2πij/m}`.
    pub fn sample_unit(&self, m: usize) -> Vec<Matrix2> {
        unit_circle(m)
            .into_iter()
            .map(|z| self.eval(z).unwrap())
            .collect()
    }

    /// Recovers coefficients with indices `lo..lo+m` from `m` equispaced
    /// unit-circle samples (discrete Fourier transform; aliasing is the
    /// caller's concern).
    pub fn from_unit_samples(samples: &[Matrix2], lo: i32) -> MatrixLoop {
        let m = samples.len();
        if m == 0 {
            return Self::zero();
        }
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(m);
        let mut coeffs = vec![Matrix2::zero(); m];
        let inv_m = 1.0 / m as f64;
        for r in 0..2 {
            for c in 0..2 {
                let mut buf: Vec<C64> = samples.iter().map(|s| s.0[r][c]).collect();
                fft.process(&mut buf);
                for (k, coeff) in coeffs.iter_mut().enumerate() {
                    let n = lo + k as i32;
                    let idx = n.rem_euclid(m as i32) as usize;
                    coeff.0[r][c] = buf[idx] * inv_m;
                }
            }
        }
        MatrixLoop { lo, coeffs }.trimmed()
    }

    /// Replaces coefficients with Frobenius norm below `eps` at the ends by zero.
    pub fn chopped(&self, eps: f64) -> MatrixLoop {
        let mut out = self.clone();
        while out.coeffs.last().is_some_and(|m| m.frobenius() < eps) {
            out.coeffs.pop();
        }
        let lead = out
            .coeffs
            .iter()
            .take_while(|m| m.frobenius() < eps)
            .count();
        if lead == out.coeffs.len() {
            return Self::zero();
        }
        out.coeffs.drain(..lead);
        out.lo += lead as i32;
        out
    }
}

impl Add for &MatrixLoop {
    type Output = MatrixLoop;
    fn add(self, o: &MatrixLoop) -> MatrixLoop {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(o.lo);
        let hi = self.hi().max(o.hi());
        let coeffs = (lo..=hi).map(|n| self.coeff(n) + o.coeff(n)).collect();
        MatrixLoop { lo, coeffs }.trimmed()
    }
}

impl Sub for &MatrixLoop {
    type Output = MatrixLoop;
    fn sub(self, o: &MatrixLoop) -> MatrixLoop {
        self + &o.scale(-ONE)
    }
}

impl Mul for &MatrixLoop {
    type Output = MatrixLoop;
    fn mul(self, o: &MatrixLoop) -> MatrixLoop {
        MatrixLoop::mul(self, o)
    }
}

/// Random loop with indices `-n..=n`; each coefficient has independent
/// uniform entries rescaled to a Frobenius norm drawn uniformly from `[0, 1]`.
pub fn random_loop(rng: &mut impl rand::Rng, n: usize) -> MatrixLoop {
    let n = n as i32;
    let coeffs = (-n..=n)
        .map(|_| {
            let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = Matrix2::new(c(), c(), c(), c());
            let target: f64 = rng.gen_range(0.0..1.0);
            m * C64::new(target / m.frobenius().max(f64::MIN_POSITIVE), 0.0)
        })
        .collect();
    MatrixLoop::from_coeffs(-n, coeffs)
}

/// Like [`random_loop`], but redraws until the smallest singular value over
/// 256 unit samples is at least `sigma_floor`.
pub fn random_invertible_loop(rng: &mut impl rand::Rng, n: usize, sigma_floor: f64) -> MatrixLoop {
    loop {
        let l = random_loop(rng, n);
        if l.min_singular_value_sampled(256) >= sigma_floor {
            return l;
        }
    }
}

/// The `m` points `e^{2πij/m}`, `j = 0..m`.
pub fn unit_circle(m: usize) -> Vec<C64> {
    (0..m)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng) -> Matrix2 {
        let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        Matrix2::new(c(), c(), c(), c())
    }

    fn random_loop(rng: &mut impl Rng, n: i32) -> MatrixLoop {
        let coeffs = (-n..=n).map(|_| random_matrix(rng)).collect();
        MatrixLoop::from_coeffs(-n, coeffs)
    }

    #[test]
    fn identity_times_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_loop(&mut rng, 3);
        assert_eq!(MatrixLoop::identity().mul(&a), a);
    }

    #[test]
    fn index_cancellation() {
        let up = MatrixLoop::monomial(1, Matrix2::identity());
        let down = MatrixLoop::monomial(-1, Matrix2::identity());
        assert_eq!(up.mul(&down), MatrixLoop::identity());
    }

    #[test]
    fn product_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_loop(&mut rng, 8);
        let b = random_loop(&mut rng, 8);
        let p = a.mul(&b);
        for z in unit_circle(64) {
            let lhs = p.eval(z).unwrap();
            let rhs = a.eval(z).unwrap() * b.eval(z).unwrap();
            assert!((lhs - rhs).frobenius() < 1e-12, "{}", (lhs - rhs).frobenius());
        }
    }

    #[test]
    fn capped_product_reports_tail() {
        let a = MatrixLoop::monomial(3, Matrix2::identity());
        let err = a.mul_capped(&a, 4).unwrap_err();
        assert_eq!(err, LoopError::Truncation { cap: 4, tail_norm: 2f64.sqrt() });
        assert!(a.mul_capped(&a, 6).is_ok());
    }

    #[test]
    fn eval_basics() {
        let z = MatrixLoop::monomial(1, Matrix2::identity());
        assert_eq!(z.eval(I).unwrap(), Matrix2::identity().scale(I));
        let c = Matrix2::real(1.0, 2.0, 3.0, 4.0);
        let lc = MatrixLoop::constant(c);
        assert_eq!(lc.eval(C64::new(0.3, -7.0)).unwrap(), c);
        assert_eq!(lc.eval(ZERO).unwrap(), c);
        let neg = MatrixLoop::monomial(-1, c);
        assert_eq!(neg.eval(ZERO), Err(LoopError::PoleAtOrigin));
    }

    #[test]
    fn horner_matches_naive_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_loop(&mut rng, 16);
        for k in 0..20 {
            let z = C64::from_polar(rng.gen_range(0.8..1.2), k as f64 * 0.37);
            let naive = a
                .coeffs
                .iter()
                .enumerate()
                .fold(Matrix2::zero(), |acc, (j, m)| {
                    acc + m.scale(z.powi(a.lo + j as i32))
                });
            let h = a.eval(z).unwrap();
            assert!((h - naive).frobenius() < 1e-13 * (1.0 + naive.frobenius()));
        }
    }

    #[test]
    fn star_of_special_unitary_is_inverse() {
        let u = Matrix2::new(
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            C64::new(0.0, 0.8),
            C64::new(0.6, 0.0),
        );
        let s = MatrixLoop::constant(u).star();
        let prod = s.coeff(0) * u;
        assert!((prod - Matrix2::identity()).frobenius() < 1e-15);
    }

    #[test]
    fn star_of_monomial_on_circle() {
        let e = Matrix2::new(C64::new(1.0, 2.0), C64::new(0.5, 0.0), ZERO, C64::new(0.0, -1.0));
        let s = MatrixLoop::monomial(1, e).star();
        for k in 0..16 {
            let th = 0.4 * k as f64;
            let want = e.adjoint().scale(C64::from_polar(1.0, -th));
            assert!((s.eval_unit(th) - want).frobenius() < 1e-14);
        }
    }

    #[test]
    fn norms() {
        assert_eq!(MatrixLoop::zero().norm(), 0.0);
        assert!((MatrixLoop::identity().norm() - 2f64.sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random_loop(&mut rng, 6);
            assert!(a.sup_norm_sampled(256) <= a.norm() + 1e-12);
        }
    }

    #[test]
    fn fourier_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_loop(&mut rng, 5);
        let b = MatrixLoop::from_unit_samples(&a.sample_unit(16), -8).chopped(1e-12);
        assert!((&a - &b).norm() < 1e-12);
    }

    #[test]
    fn exp_of_nilpotent_and_diagonal() {
        let n = Matrix2::e_plus().scale(C64::new(2.0, 1.0));
        assert!((n.exp() - (Matrix2::identity() + n)).frobenius() < 1e-15);
        let d = Matrix2::diag(C64::new(0.3, 0.2), C64::new(-1.0, 0.5));
        let e = d.exp();
        assert!((e.get(0, 0) - C64::new(0.3, 0.2).exp()).norm() < 1e-14);
        assert!((e.get(1, 1) - C64::new(-1.0, 0.5).exp()).norm() < 1e-14);
    }

    #[test]
    fn classification() {
        let b = MatrixLoop::from_coeffs(
            0,
            vec![Matrix2::real(2.0, 1.0, 0.0, 0.5), Matrix2::real(1.0, 0.0, 3.0, 1.0)],
        );
        assert_eq!(b.classify(1e-10), LoopClass::Plus);
        let u = MatrixLoop::monomial(1, Matrix2::identity());
        assert_eq!(u.classify(1e-10), LoopClass::Unitary);
        let g = MatrixLoop::monomial(-1, Matrix2::identity().scale(C64::new(2.0, 0.0)));
        assert_eq!(g.classify(1e-10), LoopClass::General);
    }
}
