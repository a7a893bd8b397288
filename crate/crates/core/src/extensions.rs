//! Extension classes of `S⁻¹` by `S` on a genus-2 curve, represented by their
//! pairing functional on `H⁰(K²)`, and the stability of the resulting rank-2
//! bundles.
//!
//! Sections of `K²` are `p(z)·(dz/y)²` with `deg p ≤ 2`; the basis returned by
//! `rr_basis(K²)` is `{1, z, z²}`. For a spin structure with first triple
//! `{i, j, k}` put `T = (z − e_i)(z − e_j)(z − e_k)` and `U = f/T`. The two
//! sections of `KS` used below are `s = T/den` and `t = y/den` with
//! `den = (z − e_i)(z − e_j)`; products of `KS` sections land in `H⁰(K³)`
//! through `s² ↦ T`, `s·t ↦ y`, `t² ↦ U`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genus2::{complete_to_ks, CurveFunction, CurvePoint, Genus2Error, HyperellipticCurve, SpinStructure};
use crate::loopcore::{C64, ONE, ZERO};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtensionError {
    #[error("the extension functional vanishes")]
    ZeroFunctional,
    #[error("the quadratic differential vanishes")]
    ZeroDifferential,
    #[error("expected 4 zeros in 2 fibers, found {found} fiber(s) counted with multiplicity")]
    RootCount { found: usize },
    #[error("witness identity fails (residual {residual:e}); zero divisor degenerate beyond the handled cases")]
    UnhandledDegeneracy { residual: f64 },
    #[error("quadrature did not converge (error estimate {estimate:e})")]
    QuadratureNonConvergence { estimate: f64 },
    #[error(transparent)]
    Genus2(#[from] Genus2Error),
}

/// `𝒬 = p(z)·(dz/y)²`, meaningful up to scale when `projective`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDifferential {
    pub p: Poly,
    pub projective: bool,
}

/// Point of the Riemann sphere, `None` standing for `∞`.
pub type SpherePoint = Option<C64>;

fn chordal(a: SpherePoint, b: SpherePoint) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(x), None) | (None, Some(x)) => 1.0 / (1.0 + x.norm_sqr()).sqrt(),
        (Some(x), Some(y)) => (x - y).norm() / ((1.0 + x.norm_sqr()) * (1.0 + y.norm_sqr())).sqrt(),
    }
}

fn coeffs3(p: &Poly) -> [C64; 3] {
    [p.coeff(0), p.coeff(1), p.coeff(2)]
}

/// `1 − |⟨a, b⟩|/(|a||b|)`, zero iff the vectors are proportional.
pub fn projective_distance(a: &[C64], b: &[C64]) -> f64 {
    let dot: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot.norm() / (na * nb)).max(0.0)
}

impl QuadraticDifferential {
    pub fn new(p: Poly) -> Result<Self, ExtensionError> {
        if p.is_zero() || p.degree().unwrap_or(0) > 2 {
            return Err(ExtensionError::ZeroDifferential);
        }
        Ok(QuadraticDifferential { p, projective: true })
    }

    /// `𝒬 = ω₁·ω₂ = z·(dz/y)²`.
    pub fn omega1_omega2() -> Self {
        QuadraticDifferential { p: Poly::x(), projective: true }
    }

    /// `c·∏(z − r)` over the finite fibers; `∞` lowers the degree.
    pub fn from_fibers(fibers: [SpherePoint; 2]) -> Self {
        let mut p = Poly::one();
        for r in fibers.into_iter().flatten() {
            p = &p * &Poly::linear_root(r);
        }
        QuadraticDifferential { p, projective: true }
    }

    /// The two zero fibers, with multiplicity; a degree deficit puts fibers
    /// over `∞`.
    pub fn zero_fibers(&self) -> [SpherePoint; 2] {
        let p = self.p.cleaned(1e-14);
        let d = p.degree().unwrap_or(0);
        let mut out: Vec<SpherePoint> = if d > 0 { p.roots().into_iter().map(Some).collect() } else { Vec::new() };
        while out.len() < 2 {
            out.push(None);
        }
        [out[0], out[1]]
    }

    pub fn coefficients(&self) -> [C64; 3] {
        coeffs3(&self.p)
    }

    pub fn projective_distance(&self, other: &QuadraticDifferential) -> f64 {
        projective_distance(&self.coefficients(), &other.coefficients())
    }
}

/// Serre-pairing functional of an extension class, as its values on the
/// basis `{1, z, z²}·(dz/y)²` of `H⁰(K²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionFunctional {
    pub values: [C64; 3],
    pub projective: bool,
}

impl ExtensionFunctional {
    pub fn new(values: [C64; 3]) -> Result<Self, ExtensionError> {
        if values.iter().all(|v| *v == ZERO) {
            return Err(ExtensionError::ZeroFunctional);
        }
        Ok(ExtensionFunctional { values, projective: true })
    }

    /// `q ↦ q(P₀)` in the trivialization `(dz/y)²`, for `P₀` over `z₀`.
    pub fn evaluation_at(z0: SpherePoint) -> Self {
        let values = match z0 {
            Some(z) => [ONE, z, z * z],
            None => [ZERO, ZERO, ONE],
        };
        ExtensionFunctional { values, projective: true }
    }

    pub fn apply(&self, q: &Poly) -> C64 {
        self.values.iter().enumerate().map(|(k, v)| v * q.coeff(k)).sum()
    }

    pub fn scale(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// The products of two `KS` sections inside `H⁰(K³)`.
///
/// `H⁰(K³)` is written in coordinates `[A₀, A₁, A₂, A₃, B]` for
/// `(A(z) + B·y)(dz/y)³`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductSubspace {
    pub t_poly: Poly,
    pub u_poly: Poly,
    /// `s = T/den` and `t = y/den` as functions.
    pub s: CurveFunction,
    pub t: CurveFunction,
    /// Images of `s²`, `s·t`, `t²`.
    pub basis: [[C64; 5]; 3],
}

fn k3_coords(a: &Poly, b: C64) -> [C64; 5] {
    [a.coeff(0), a.coeff(1), a.coeff(2), a.coeff(3), b]
}

impl ProductSubspace {
    pub fn new(spin: &SpinStructure, curve: &HyperellipticCurve) -> Self {
        let e = curve.roots();
        let [i, j, _] = spin.partition.first;
        let t_poly = Poly::from_roots(&spin.partition.first.map(|k| e[k]));
        let u_poly = Poly::from_roots(&spin.partition.second.map(|k| e[k])).scale(curve.leading());
        let den = Poly::from_roots(&[e[i], e[j]]);
        let s = CurveFunction { a: t_poly.clone(), b: Poly::zero(), den: den.clone() };
        let t = CurveFunction { a: Poly::zero(), b: Poly::one(), den };
        let basis = [k3_coords(&t_poly, ZERO), k3_coords(&Poly::zero(), ONE), k3_coords(&u_poly, ZERO)];
        ProductSubspace { t_poly, u_poly, s, t, basis }
    }

    pub fn dimension(&self) -> usize {
        let m = DMatrix::from_fn(5, 3, |r, c| self.basis[c][r]);
        m.rank(1e-10 * m.norm())
    }

    /// `a·s² + b·s·t + c·t²` in `H⁰(K³)` coordinates.
    pub fn expand(&self, c: [C64; 3]) -> [C64; 5] {
        let mut out = [ZERO; 5];
        for (k, v) in c.iter().enumerate() {
            for (o, b) in out.iter_mut().zip(&self.basis[k]) {
                *o += v * b;
            }
        }
        out
    }

    /// `(λ₁s + μ₁t)(λ₂s + μ₂t)` in `H⁰(K³)` coordinates.
    pub fn product(&self, f1: [C64; 2], f2: [C64; 2]) -> [C64; 5] {
        self.expand([f1[0] * f2[0], f1[0] * f2[1] + f1[1] * f2[0], f1[1] * f2[1]])
    }

    /// Writes `a·s² + b·s·t + c·t²` as a product of two `KS` sections.
    pub fn factor(&self, c: [C64; 3]) -> ([C64; 2], [C64; 2]) {
        factor_binary_quadratic(c)
    }
}

/// `a·X² + b·XY + c·Y² = (λ₁X + μ₁Y)(λ₂X + μ₂Y)` over ℂ.
pub fn factor_binary_quadratic(c: [C64; 3]) -> ([C64; 2], [C64; 2]) {
    let [a, b, cc] = c;
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return ([ZERO, ZERO], [ONE, ZERO]);
    }
    if a.norm() <= 1e-14 * scale {
        // Y·(bX + cY)
        return ([ZERO, ONE], [b, cc]);
    }
    // a(X − ρ₁Y)(X − ρ₂Y) with ρ roots of aρ² + bρ + c, the larger one first.
    let disc = (b * b - a * cc * 4.0).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
    let (r1, r2) = if q == ZERO { (ZERO, ZERO) } else { (q / a, cc / q) };
    ([a, -a * r1], [ONE, -r2])
}

/// Witness of `ω·𝒬 = α·β` with `ω ∈ H⁰(K)` and `α, β ∈ H⁰(KS)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    /// `ω = (ω₀ + ω₁z)·dz/y`.
    pub omega: Poly,
    /// Coefficients on `(s, t)`.
    pub alpha: [C64; 2],
    pub beta: [C64; 2],
    /// Coefficient-wise residual of the identity in `H⁰(K³)`, relative to `ω·𝒬`.
    pub residual: f64,
}

/// Relative coefficient residual of `ω·p = α·β`.
pub fn witness_residual(
    q: &QuadraticDifferential,
    omega: &Poly,
    alpha: [C64; 2],
    beta: [C64; 2],
    prod: &ProductSubspace,
) -> f64 {
    let lhs = k3_coords(&(omega * &q.p), ZERO);
    let rhs = prod.product(alpha, beta);
    let scale = lhs.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    NonStable,
}

/// Criterion the verdict is decided by. The factorization `ω·𝒬 = α·β`
/// exists exactly for non-stable bundles.
pub const STABILITY_CRITERION: &str =
    "non-stable iff the KS-completion of a zero of Q meets the other zero fiber, iff omega*Q = alpha*beta is solvable";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub criterion: String,
    pub zero_fibers: [SpherePoint; 2],
    pub double_fiber: bool,
    /// Completion `(P̃₁, P̂₁)` of the first zero `P₁`.
    pub completion: (CurvePoint, CurvePoint),
    /// The completion point lying on the second zero fiber.
    pub destabilizing_point: Option<CurvePoint>,
    pub witness: Option<Factorization>,
}

fn point_over(curve: &HyperellipticCurve, z: SpherePoint) -> CurvePoint {
    match z {
        Some(z) => curve.point_at(z, 1),
        None => curve.infinity(1),
    }
}

fn same_fiber(p: &CurvePoint, z: SpherePoint) -> bool {
    chordal(p.z(), z) <= 1e-7
}

/// `ω = (z − z(P))` for a finite point, `1` over `∞`.
fn fiber_form(p: &CurvePoint) -> Poly {
    match p.z() {
        Some(z) => Poly::linear_root(z),
        None => Poly::one(),
    }
}

pub fn stability_check(
    q: &QuadraticDifferential,
    spin: &SpinStructure,
    curve: &HyperellipticCurve,
) -> Result<StabilityVerdict, ExtensionError> {
    if q.p.is_zero() {
        return Err(ExtensionError::ZeroDifferential);
    }
    let fibers = q.zero_fibers();
    let double_fiber = chordal(fibers[0], fibers[1]) <= 1e-7;
    let p1 = point_over(curve, fibers[0]);
    let (a, b) = complete_to_ks(&p1, spin, curve)?;
    // For a double fiber the second zero fiber is the first one again, and
    // the test reads: the completion of P₁ meets its own fiber.
    let hit = [(a, b), (b, a)].into_iter().find(|(x, _)| same_fiber(x, fibers[1]));
    let mut out = StabilityVerdict {
        verdict: Verdict::Stable,
        criterion: STABILITY_CRITERION.to_string(),
        zero_fibers: fibers,
        double_fiber,
        completion: (a, b),
        destabilizing_point: None,
        witness: None,
    };
    if let Some((on_fiber, other)) = hit {
        let prod = ProductSubspace::new(spin, curve);
        let witness = completion_witness(q, fibers[0], &other, &prod)?;
        out.verdict = Verdict::NonStable;
        out.destabilizing_point = Some(on_fiber);
        out.witness = Some(witness);
    }
    Ok(out)
}

/// `ω𝒬 = α·β` from the section of `KS` through `P₁ + P̃₁ + P̂₁`: with
/// `(a², b²) = (U(z₁), T(z₁))`, `(as + bt)(as − bt) ↦ a²T − b²U`, which
/// vanishes on the fibers of `P₁`, `P̃₁` and `P̂₁`.
fn completion_witness(
    q: &QuadraticDifferential,
    z1: SpherePoint,
    other: &CurvePoint,
    prod: &ProductSubspace,
) -> Result<Factorization, ExtensionError> {
    let (a2, b2) = match z1 {
        Some(z) => (prod.u_poly.eval(z), prod.t_poly.eval(z)),
        None => (prod.u_poly.leading(), prod.t_poly.leading()),
    };
    let (a, b) = (a2.sqrt(), b2.sqrt());
    let omega = fiber_form(other);
    let lhs = k3_coords(&(&omega * &q.p), ZERO);
    let rhs = prod.product([a, b], [a, -b]);
    let num: C64 = rhs.iter().zip(&lhs).map(|(r, l)| r.conj() * l).sum();
    let den: f64 = rhs.iter().map(|r| r.norm_sqr()).sum();
    let c = num / den;
    let alpha = [a * c, b * c];
    let beta = [a, -b];
    let residual = witness_residual(q, &omega, alpha, beta, prod);
    if residual > 1e-10 {
        return Err(ExtensionError::UnhandledDegeneracy { residual });
    }
    Ok(Factorization { omega, alpha, beta, residual })
}

/// Outcome of the brute-force search for `ω𝒬 = αβ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub witness: Option<Factorization>,
    /// Smallest relative distance of `ω·𝒬` from the product subspace.
    pub best_residual: f64,
    pub best_omega: Poly,
}

/// Acceptance threshold for the oracle's best candidate.
pub const ORACLE_THRESHOLD: f64 = 1e-8;

/// Searches `ω ∈ PH⁰(K)` for `ω·𝒬 ∈ W = {α·β}`; `W` is everything of the form
/// `c₁T + c₂y + c₃U`, so the search is a projective least-squares problem,
/// scanned on a grid over the sphere and polished in the best chart.
pub fn decomposition_oracle(
    q: &QuadraticDifferential,
    spin: &SpinStructure,
    curve: &HyperellipticCurve,
) -> Result<OracleResult, ExtensionError> {
    if q.p.is_zero() {
        return Err(ExtensionError::ZeroDifferential);
    }
    let prod = ProductSubspace::new(spin, curve);
    // ω·p has no y-part, so only the span of T and U matters.
    let tu = DMatrix::from_fn(4, 2, |r, c| if c == 0 { prod.t_poly.coeff(r) } else { prod.u_poly.coeff(r) });
    let qm = tu.clone().qr().q();
    let perp = |v: DVector<C64>| -> DVector<C64> { &v - &qm * (qm.adjoint() * &v) };
    let vec4 = |p: &Poly| DVector::from_fn(4, |r, _| p.coeff(r));
    let zp = &Poly::x() * &q.p;
    let (a_full, b_full) = (vec4(&zp), vec4(&q.p));
    let (a, b) = (perp(a_full.clone()), perp(b_full.clone()));
    // ω = μz − ν.
    let rel = |mu: C64, nu: C64| -> f64 {
        let r = &a * mu - &b * nu;
        let full = &a_full * mu - &b_full * nu;
        r.norm() / full.norm().max(1e-300)
    };
    let mut best = (f64::INFINITY, ONE, ZERO);
    let (nt, np) = (24, 48);
    for it in 0..=nt {
        let theta = std::f64::consts::PI * it as f64 / nt as f64;
        for ip in 0..(if it == 0 || it == nt { 1 } else { np }) {
            let phi = std::f64::consts::TAU * ip as f64 / np as f64;
            let mu = C64::new((0.5 * theta).cos(), 0.0);
            let nu = C64::from_polar((0.5 * theta).sin(), phi);
            let r = rel(mu, nu);
            if r < best.0 {
                best = (r, mu, nu);
            }
        }
    }
    let (_, mu, nu) = best;
    let (mu, nu) = if nu.norm() <= mu.norm() {
        // ω = z − w: minimize |a − w·b|.
        let bb = b.norm_squared();
        let w = if bb > 0.0 { b.dotc(&a) / bb } else { nu / mu };
        (ONE, w)
    } else {
        // ω = m·z − 1: minimize |m·a − b|.
        let aa = a.norm_squared();
        let m = if aa > 0.0 { a.dotc(&b) / aa } else { mu / nu };
        (m, ONE)
    };
    let best_residual = rel(mu, nu);
    let omega = Poly::new(vec![-nu, mu]);
    let mut result = OracleResult { witness: None, best_residual, best_omega: omega.clone() };
    if best_residual > ORACLE_THRESHOLD {
        return Ok(result);
    }
    let target = vec4(&(&omega * &q.p));
    let sol = tu.svd(true, true).solve(&target, 1e-14).unwrap_or_else(|_| DVector::zeros(2));
    let (alpha, beta) = factor_binary_quadratic([sol[0], ZERO, sol[1]]);
    let residual = witness_residual(q, &omega, alpha, beta, &prod);
    if residual <= 1e-10 {
        result.witness = Some(Factorization { omega, alpha, beta, residual });
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Residual bound for accepted zeros, relative to `max |ℓ|`.
    pub tol: f64,
    pub max_newton: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tol: 1e-9, max_newton: 60 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifiedZero {
    pub fiber: SpherePoint,
    pub multiplicity: usize,
    /// `|ℓ(q_P)|/|q_P(z*)|` at the zero, relative to `max |ℓ|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub quadratic: QuadraticDifferential,
    pub zeros: Vec<ClassifiedZero>,
}

/// `P ↦ ℓ(q_P)/q_P(z*)`, where `q_P` is the `K²` section vanishing on the
/// fibers of the `KS`-completion of `P`. It depends on `z(P)` only, and its
/// poles are the completions of a point over `z*`.
struct ZeroFunction<'a> {
    ell: &'a ExtensionFunctional,
    spin: &'a SpinStructure,
    curve: &'a HyperellipticCurve,
    zstar: C64,
    poles: Vec<C64>,
}

impl ZeroFunction<'_> {
    fn section(&self, z0: SpherePoint) -> Result<Poly, ExtensionError> {
        let (a, b) = complete_to_ks(&point_over(self.curve, z0), self.spin, self.curve)?;
        Ok(&fiber_form(&a) * &fiber_form(&b))
    }

    fn eval(&self, z0: SpherePoint) -> Result<C64, ExtensionError> {
        let q = self.section(z0)?;
        Ok(self.ell.apply(&q) / q.eval(self.zstar))
    }

    /// `g(z₀)·∏(z₀ − π)` over the finite poles: a polynomial of degree ≤ 2.
    fn cleared(&self, z0: C64) -> Result<C64, ExtensionError> {
        let g = self.eval(Some(z0))?;
        Ok(self.poles.iter().fold(g, |acc, p| acc * (z0 - p)))
    }
}

/// Classifying map: the quadratic differential whose zeros are the points
/// `P` with `ℓ(q_P) = 0`.
///
/// The pole-cleared zero function is sampled at three points to seed the
/// roots, which are then refined by Newton iteration; a root at `∞` is
/// confirmed by evaluating at `∞±` directly.
pub fn classify_to_quadratic(
    ell: &ExtensionFunctional,
    spin: &SpinStructure,
    curve: &HyperellipticCurve,
    opts: &ClassifyOptions,
) -> Result<Classification, ExtensionError> {
    let scale = ell.scale();
    if scale == 0.0 {
        return Err(ExtensionError::ZeroFunctional);
    }
    let roots = curve.roots();
    let radius = roots.iter().map(|e| e.norm()).fold(1.0, f64::max);
    let dist = |z: C64| roots.iter().map(|e| (z - e).norm()).fold(f64::INFINITY, f64::min);
    let zstar = [C64::new(0.37, 0.21), C64::new(-0.29, 0.43), C64::new(0.11, -0.52)]
        .into_iter()
        .map(|c| c * radius)
        .max_by(|a, b| dist(*a).total_cmp(&dist(*b)))
        .unwrap();
    let (pa, pb) = complete_to_ks(&curve.point_at(zstar, 1), spin, curve)?;
    let poles: Vec<C64> = [pa.z(), pb.z()].into_iter().flatten().collect();
    let g = ZeroFunction { ell, spin, curve, zstar, poles };

    // Samples away from the poles and the Weierstrass abscissas.
    let mut samples: Vec<C64> = Vec::new();
    for k in 0..12 {
        let z = C64::from_polar(0.5 * radius * (1.0 + 0.25 * k as f64), 0.7 + 2.1 * k as f64);
        let clear = dist(z) > 0.05 * radius && g.poles.iter().all(|p| (z - p).norm() > 0.05 * radius);
        if clear && samples.len() < 3 {
            samples.push(z);
        }
    }
    let values: Vec<C64> = samples.iter().map(|z| g.cleared(*z)).collect::<Result<_, _>>()?;
    let vander = DMatrix::from_fn(3, 3, |r, c| samples[r].powi(c as i32));
    let coeffs = vander.lu().solve(&DVector::from_column_slice(&values)).ok_or(ExtensionError::RootCount { found: 0 })?;
    let h = Poly::new(coeffs.iter().copied().collect()).cleaned(1e-10);

    let mut found: Vec<ClassifiedZero> = Vec::new();
    let deg = h.degree().unwrap_or(0);
    let seeds: Vec<C64> = if deg > 0 { h.roots() } else { Vec::new() };
    for seed in seeds {
        let r = newton_refine(&g, seed, opts)?;
        match found.iter_mut().find(|z| z.fiber.is_some_and(|f| (f - r).norm() <= 1e-6 * (1.0 + r.norm()))) {
            Some(z) => z.multiplicity += 1,
            None => {
                let residual = g.eval(Some(r))?.norm() / scale;
                found.push(ClassifiedZero { fiber: Some(r), multiplicity: 1, residual });
            }
        }
    }
    if deg < 2 {
        let residual = g.eval(None)?.norm() / scale;
        found.push(ClassifiedZero { fiber: None, multiplicity: 2 - deg, residual });
    }
    let count: usize = found.iter().filter(|z| z.residual <= opts.tol).map(|z| z.multiplicity).sum();
    if count != 2 {
        return Err(ExtensionError::RootCount { found: count });
    }
    let mut p = Poly::one();
    for z in &found {
        if let Some(r) = z.fiber {
            for _ in 0..z.multiplicity {
                p = &p * &Poly::linear_root(r);
            }
        }
    }
    Ok(Classification { quadratic: QuadraticDifferential { p, projective: true }, zeros: found })
}

/// Newton iteration on the pole-cleared zero function with
/// central-difference derivatives.
fn newton_refine(g: &ZeroFunction<'_>, start: C64, opts: &ClassifyOptions) -> Result<C64, ExtensionError> {
    let mut x = start;
    for _ in 0..opts.max_newton {
        let v = g.cleared(x)?;
        let h = 1e-6 * (1.0 + x.norm());
        let d = (g.cleared(x + h)? - g.cleared(x - h)?) / (2.0 * h);
        if !d.is_finite() || d.norm() == 0.0 || !v.is_finite() {
            break;
        }
        let step = v / d;
        if step.norm() > 0.1 * (1.0 + x.norm()) {
            // Far from a simple root (or at a double one): keep the seed.
            break;
        }
        x -= step;
        if step.norm() <= 1e-14 * (1.0 + x.norm()) {
            break;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Gauss–Legendre nodes in the radial direction (angular nodes are twice
    /// as many).
    pub radial: usize,
    /// Accepted relative change between a rule and its refinement.
    pub tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { radial: 64, tol: 1e-8, max_refinements: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingResult {
    pub functional: ExtensionFunctional,
    pub error_estimate: f64,
    pub radial_nodes: usize,
}

/// Density of `|ω₁|² + |ω₂|²` in units of `|dz/y|²`.
pub fn symmetric_density(z: C64) -> f64 {
    1.0 + z.norm_sqr()
}

/// Smooth cutoff: 1 on `[0, 0.2]`, 0 beyond 1.
fn bump(s: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if s <= 0.2 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let t = (s - 0.2) / 0.8;
        h(1.0 - t) / (h(1.0 - t) + h(t))
    }
}

/// `∫_ℂ F d²z` for `F` with `|z − e|⁻¹` singularities at the roots and
/// `O(|z|⁻⁴)` decay: polar disks around the roots glued by a partition of
/// unity, a polar disk about 0, and the exterior in the chart `w = 1/z`.
fn plane_integral(roots: &[C64; 6], n: usize, f: &dyn Fn(C64) -> [C64; 3]) -> [C64; 3] {
    let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("positive"));
    let nodes = gl.as_node_weight_pairs();
    let nth = 2 * n;
    let mut sep = f64::INFINITY;
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            sep = sep.min((a - b).norm());
        }
    }
    let rho = (0.45 * sep).min(0.6);
    let big_r = roots.iter().map(|e| e.norm()).fold(0.0, f64::max) + 1.0;
    let cut = |z: C64| -> f64 { roots.iter().map(|e| bump((z - e).norm() / rho)).sum() };
    let mut acc = [ZERO; 3];
    let mut polar = |center: C64, radius: f64, weight: &dyn Fn(C64, C64) -> f64, map: bool| {
        for &(x, wx) in nodes {
            let r = 0.5 * radius * (x + 1.0);
            let wr = 0.5 * radius * wx;
            for k in 0..nth {
                let th = std::f64::consts::TAU * (k as f64 + 0.5) / nth as f64;
                let u = center + C64::from_polar(r, th);
                let (z, jac) = if map { (u.inv(), u.norm_sqr().powi(-2)) } else { (u, 1.0) };
                let w = weight(z, u) * jac * r * wr * std::f64::consts::TAU / nth as f64;
                if w == 0.0 {
                    continue;
                }
                let v = f(z);
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b * w;
                }
            }
        }
    };
    for e in roots {
        polar(*e, rho, &|z, _| bump((z - e).norm() / rho), false);
    }
    polar(ZERO, big_r, &|z, _| 1.0 - cut(z), false);
    polar(ZERO, 1.0 / big_r, &|_, _| 1.0, true);
    acc
}

/// `ℓ(q_k) = 2∫ q_k·conj(Q_h)/ρ` over the curve (two sheets over the
/// `z`-plane), with `q_k = z^k (dz/y)²` and metric `ρ = density(z)·|dz/y|²`.
pub fn hopf_pairing(
    qh: &QuadraticDifferential,
    density: &dyn Fn(C64) -> f64,
    curve: &HyperellipticCurve,
    opts: &QuadratureOptions,
) -> Result<PairingResult, ExtensionError> {
    if qh.p.is_zero() {
        return Err(ExtensionError::ZeroDifferential);
    }
    let f = curve.f();
    let integrand = |z: C64| -> [C64; 3] {
        let w = 2.0 * qh.p.eval(z).conj() / (density(z) * f.eval(z).norm());
        [w, z * w, z * z * w]
    };
    let mut n = opts.radial.max(4);
    let mut prev = plane_integral(curve.roots(), n, &integrand);
    let mut estimate = f64::INFINITY;
    for _ in 0..opts.max_refinements {
        n *= 2;
        let next = plane_integral(curve.roots(), n, &integrand);
        let size = next.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        estimate = prev.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / size;
        prev = next;
        if estimate <= opts.tol {
            let functional = ExtensionFunctional::new(prev)?;
            return Ok(PairingResult { functional, error_estimate: estimate, radial_nodes: n });
        }
    }
    Err(ExtensionError::QuadratureNonConvergence { estimate })
}
