//! Dense complex polynomials and rational functions in one variable.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::loopcore::{C64, ONE, ZERO};

/// Polynomial with complex coefficients, lowest degree first.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly(pub Vec<C64>);

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}", c)?;
        }
        write!(f, "]")
    }
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Poly(coeffs).trimmed()
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `z`.
    pub fn x() -> Self {
        Poly(vec![ZERO, ONE])
    }

    /// `z - a`.
    pub fn linear_root(a: C64) -> Self {
        Poly(vec![-a, ONE])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, &r| &acc * &Self::linear_root(r))
    }

    fn trimmed(mut self) -> Self {
        while self.0.last() == Some(&ZERO) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.0.get(k).copied().unwrap_or(ZERO)
    }

    pub fn leading(&self) -> C64 {
        self.0.last().copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.0.iter().map(|&c| c * s).collect())
    }

    pub fn monic(&self) -> Self {
        let l = self.leading();
        if l == ZERO {
            self.clone()
        } else {
            self.scale(l.inv())
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Zeroes coefficients with modulus at most `eps` times the largest one,
    /// then trims.
    pub fn cleaned(&self, eps: f64) -> Self {
        let scale = self.max_abs();
        Self::new(
            self.0
                .iter()
                .map(|&c| if c.norm() <= eps * scale { ZERO } else { c })
                .collect(),
        )
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead_inv = d.leading().inv();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![ZERO; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd] * lead_inv;
            quot[k] = c;
            for (j, &dc) in d.0.iter().enumerate() {
                rem[k + j] -= c * dc;
            }
            rem[k + dd] = ZERO;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Quotient of a division that is known to be exact (remainder dropped).
    pub fn exact_div(&self, d: &Poly) -> Poly {
        self.div_rem(d).0
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.div_rem(d).1
    }

    /// Monic greatest common divisor; remainders whose size is below
    /// `tol` relative to the inputs are treated as zero.
    pub fn gcd(&self, other: &Poly, tol: f64) -> Poly {
        let (g, _, _) = self.xgcd(other, tol);
        g
    }

    /// Extended Euclid: returns `(g, s, t)` with `s·self + t·other = g`, `g` monic.
    pub fn xgcd(&self, other: &Poly, tol: f64) -> (Poly, Poly, Poly) {
        let scale = self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE);
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() && r1.max_abs() > tol * scale {
            let (q, r) = r0.div_rem(&r1);
            let s2 = &s0 - &(&q * &s1);
            let t2 = &t0 - &(&q * &t1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (Poly::zero(), s0, t0);
        }
        let l = r0.leading().inv();
        (r0.scale(l), s0.scale(l), t0.scale(l))
    }

    /// Multiplicity of `a` as a root, by repeated synthetic division.
    /// A remainder counts as zero when it is at most `tol` relative to the
    /// current coefficient scale.
    pub fn root_multiplicity(&self, a: C64, tol: f64) -> usize {
        let mut p = self.clone();
        let mut m = 0;
        while let Some(d) = p.degree() {
            if d == 0 {
                break;
            }
            let scale: f64 = p
                .0
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * a.norm().max(1.0).powi(k as i32))
                .sum();
            let (q, r) = p.div_rem(&Poly::linear_root(a));
            if r.max_abs() <= tol * scale {
                m += 1;
                p = q;
            } else {
                break;
            }
        }
        m
    }

    /// All complex roots (with multiplicity) by the Aberth–Ehrlich iteration,
    /// followed by Newton polishing.
    pub fn roots(&self) -> Vec<C64> {
        let n = match self.degree() {
            None | Some(0) => return Vec::new(),
            Some(n) => n,
        };
        let p = self.monic();
        if n == 1 {
            return vec![-p.0[0]];
        }
        if n == 2 {
            let (b, c) = (p.0[1], p.0[0]);
            let disc = (b * b - c * 4.0).sqrt();
            // Avoid cancellation: pick the larger-magnitude root first.
            let r1 = if (-b + disc).norm() >= (-b - disc).norm() {
                (-b + disc) * 0.5
            } else {
                (-b - disc) * 0.5
            };
            let r2 = if r1 == ZERO { ZERO } else { c / r1 };
            return vec![r1, r2];
        }
        let dp = p.derivative();
        // Cauchy bound for the initial circle.
        let radius = 1.0 + p.0[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut z: Vec<C64> = (0..n)
            .map(|k| {
                C64::from_polar(
                    0.5 * radius,
                    2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4,
                )
            })
            .collect();
        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for i in 0..n {
                let pv = p.eval(z[i]);
                if pv == ZERO {
                    continue;
                }
                let ratio = pv / dp.eval(z[i]);
                let sum: C64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (z[i] - z[j]).inv())
                    .sum();
                let w = ratio / (ONE - ratio * sum);
                if w.is_finite() {
                    z[i] -= w;
                    max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        for r in z.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d == ZERO {
                    break;
                }
                let step = p.eval(*r) / d;
                if !step.is_finite() || step.norm() > 1e-6 * (1.0 + r.norm()) {
                    break;
                }
                *r -= step;
            }
        }
        z
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Quotient of two polynomials. Serialized as `[numerator, denominator]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(Poly, Poly)", into = "(Poly, Poly)")]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

impl TryFrom<(Poly, Poly)> for RationalFunction {
    type Error = String;
    fn try_from((num, den): (Poly, Poly)) -> Result<Self, String> {
        if den.is_zero() {
            Err("rational function with zero denominator".into())
        } else {
            Ok(RationalFunction { num, den })
        }
    }
}

impl From<RationalFunction> for (Poly, Poly) {
    fn from(r: RationalFunction) -> Self {
        (r.num, r.den)
    }
}

impl RationalFunction {
    /// Panics if `den` is the zero polynomial.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        RationalFunction { num, den }
    }

    pub fn zero() -> Self {
        Self::new(Poly::zero(), Poly::one())
    }

    pub fn poly(p: Poly) -> Self {
        Self::new(p, Poly::one())
    }

    pub fn constant(c: C64) -> Self {
        Self::poly(Poly::constant(c))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.num.eval(z) / self.den.eval(z)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.num.scale(s), self.den.clone())
    }

    /// Cancels common roots (within `tol`) and makes the denominator monic.
    pub fn reduced(&self, tol: f64) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        let g = self.num.gcd(&self.den, tol);
        let (mut num, mut den) = if g.degree().unwrap_or(0) > 0 {
            (self.num.exact_div(&g), self.den.exact_div(&g))
        } else {
            (self.num.clone(), self.den.clone())
        };
        let l = den.leading().inv();
        num = num.scale(l);
        den = den.scale(l);
        Self::new(num, den)
    }

    /// Order of the pole at `a` (0 if regular there).
    pub fn pole_order_at(&self, a: C64, tol: f64) -> usize {
        let d = self.den.root_multiplicity(a, tol);
        if d == 0 || self.num.is_zero() {
            return 0;
        }
        let n = self.num.root_multiplicity(a, tol);
        d.saturating_sub(n)
    }

    /// Pole order of the 1-form `r(z) dz` at `z = ∞` (chart `w = 1/z`).
    pub fn form_pole_order_at_infinity(&self) -> usize {
        match (self.num.degree(), self.den.degree()) {
            (Some(n), Some(d)) => (n as i64 - d as i64 + 2).max(0) as usize,
            _ => 0,
        }
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        if self.den == o.den {
            return RationalFunction::new(&self.num + &o.num, self.den.clone());
        }
        RationalFunction::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction::new(-&self.num, self.den.clone())
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &o.num, &self.den * &o.den)
    }
}
