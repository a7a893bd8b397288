//! DPW potentials `ξ = Σ_n ζⁿ ξ_n(z) dz` with rational `sl₂` coefficients in
//! one affine chart, the pole-structure validator for genus-2 potentials, and
//! the Lawson family.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loopcore::{Matrix2, MatrixLoop, C64, ONE, ZERO};
use crate::poly::{Poly, RationalFunction};

/// Tolerance for deciding that a synthetic-division remainder vanishes.
pub const POLE_TOL: f64 = 1e-9;
/// Two roots closer than this are treated as the same point.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("G has vanishing constant term, so B = −(…)/G is undefined")]
    DivisionByZero,
    #[error("invalid spin partition: {0}")]
    InvalidPartition(String),
    #[error("expected {expected} locations, got {got}")]
    WrongLocationCount { expected: usize, got: usize },
}

/// A point of the z-line including `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleLocation {
    Finite(C64),
    Infinity,
}

impl PoleLocation {
    pub fn near(&self, z: C64) -> bool {
        match self {
            PoleLocation::Finite(p) => (p - z).norm() <= CLUSTER_TOL * (1.0 + p.norm()),
            PoleLocation::Infinity => false,
        }
    }

    pub fn same(&self, other: &PoleLocation) -> bool {
        match (self, other) {
            (PoleLocation::Infinity, PoleLocation::Infinity) => true,
            (PoleLocation::Finite(a), _) => other.near(*a),
            _ => false,
        }
    }
}

impl fmt::Display for PoleLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoleLocation::Finite(z) => write!(f, "{:.6}{:+.6}i", z.re, z.im),
            PoleLocation::Infinity => write!(f, "inf"),
        }
    }
}

/// A point where the potential is allowed to have poles, with the largest
/// admissible order for each entry. `ramification` is the branching order
/// of the curve over `z` at that point; orders are measured in a local
/// coordinate of the curve, `ord = e·ord_z + (e − 1)` for a 1-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclaredPole {
    pub location: PoleLocation,
    pub max_order: [[usize; 2]; 2],
    #[serde(default = "one_u32")]
    pub ramification: u32,
}

fn one_u32() -> u32 {
    1
}

pub type Entry = BTreeMap<i32, RationalFunction>;

/// `ξ = Σ_n ζⁿ ξ_n(z) dz`, entries stored as maps from the Laurent index to
/// rational functions of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DPWPotential {
    pub entries: [[Entry; 2]; 2],
    #[serde(default)]
    pub declared_poles: Vec<DeclaredPole>,
}

impl DPWPotential {
    pub fn empty() -> Self {
        DPWPotential { entries: Default::default(), declared_poles: Vec::new() }
    }

    /// Adds `ζⁿ r(z)` to entry `(row, col)`.
    pub fn add_term(&mut self, row: usize, col: usize, n: i32, r: RationalFunction) {
        let e = self.entries[row][col].entry(n).or_insert_with(RationalFunction::zero);
        *e = &*e + &r;
    }

    /// `ζⁿ M` with `M` a constant matrix.
    pub fn add_constant(&mut self, n: i32, m: &Matrix2) {
        for r in 0..2 {
            for c in 0..2 {
                if m.0[r][c] != ZERO {
                    self.add_term(r, c, n, RationalFunction::constant(m.0[r][c]));
                }
            }
        }
    }

    /// `(ζ⁻¹E₊ + cE₋) dz`; for `|c| = 1` the resulting surface is a Clifford torus.
    pub fn vacuum(c: C64) -> Self {
        let mut p = Self::empty();
        p.add_constant(-1, &Matrix2::e_plus());
        p.add_constant(0, &(Matrix2::e_minus() * c));
        p
    }

    /// `A/(z − z₀) dz` with a constant residue matrix.
    pub fn simple_pole(residue: &Matrix2, at: C64) -> Self {
        let mut p = Self::empty();
        for r in 0..2 {
            for c in 0..2 {
                if residue.0[r][c] != ZERO {
                    p.add_term(
                        r,
                        c,
                        0,
                        RationalFunction::new(Poly::constant(residue.0[r][c]), Poly::linear_root(at)),
                    );
                }
            }
        }
        p.declared_poles.push(DeclaredPole {
            location: PoleLocation::Finite(at),
            max_order: [[1, 1], [1, 1]],
            ramification: 1,
        });
        p
    }

    /// Smallest and largest Laurent index carried by any entry.
    pub fn index_range(&self) -> Option<(i32, i32)> {
        let keys: Vec<i32> = self
            .entries
            .iter()
            .flatten()
            .flat_map(|e| e.iter().filter(|(_, r)| !r.is_zero()).map(|(k, _)| *k))
            .collect();
        Some((*keys.iter().min()?, *keys.iter().max()?))
    }

    /// `ξ_n(z)`.
    pub fn coefficient_at(&self, n: i32, z: C64) -> Matrix2 {
        let mut m = Matrix2::zero();
        for r in 0..2 {
            for c in 0..2 {
                if let Some(f) = self.entries[r][c].get(&n) {
                    m.0[r][c] = f.eval(z);
                }
            }
        }
        m
    }

    /// `ξ(z, ζ)` (the `dz`-coefficient).
    pub fn eval(&self, z: C64, zeta: C64) -> Matrix2 {
        let mut m = Matrix2::zero();
        for r in 0..2 {
            for c in 0..2 {
                for (&n, f) in &self.entries[r][c] {
                    m.0[r][c] += f.eval(z) * zeta.powi(n);
                }
            }
        }
        m
    }

    /// The `dz`-coefficient at `z` as a loop in ζ.
    pub fn loop_at(&self, z: C64) -> MatrixLoop {
        match self.index_range() {
            None => MatrixLoop::zero(),
            Some((lo, hi)) => {
                MatrixLoop::from_coeffs(lo, (lo..=hi).map(|n| self.coefficient_at(n, z)).collect())
            }
        }
    }

    /// Every entry and index, in a fixed order.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), i32, &RationalFunction)> {
        (0..2).flat_map(move |r| {
            (0..2).flat_map(move |c| self.entries[r][c].iter().map(move |(n, f)| ((r, c), *n, f)))
        })
    }

    /// Distinct finite poles of all entries (denominator roots that survive
    /// cancellation), clustered.
    pub fn finite_poles(&self) -> Vec<C64> {
        let mut out: Vec<C64> = Vec::new();
        for (_, _, f) in self.terms() {
            if f.is_zero() {
                continue;
            }
            for root in f.den.roots() {
                if f.pole_order_at(root, POLE_TOL) == 0 {
                    continue;
                }
                if !out.iter().any(|p| PoleLocation::Finite(*p).near(root)) {
                    out.push(root);
                }
            }
        }
        out
    }

    /// Largest deviation from zero trace, sampled at a few generic points.
    pub fn trace_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let (lo, hi) = self.index_range().unwrap_or((0, -1));
        for n in lo..=hi {
            let a = self.entries[0][0].get(&n).cloned().unwrap_or_else(RationalFunction::zero);
            let d = self.entries[1][1].get(&n).cloned().unwrap_or_else(RationalFunction::zero);
            let sum = &a + &d;
            for z in [C64::new(0.31, 0.17), C64::new(-1.3, 0.77), C64::new(2.1, -0.4)] {
                let v = sum.eval(z);
                let s = a.eval(z).norm() + d.eval(z).norm();
                if s.is_finite() {
                    worst = worst.max(v.norm() / s.max(1.0));
                }
            }
        }
        worst
    }
}

/// A division of the six Weierstrass labels `0..6` into two triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SpinPartition {
    pub first: [usize; 3],
    pub second: [usize; 3],
}

impl SpinPartition {
    pub fn new(first: [usize; 3], second: [usize; 3]) -> Result<Self, PotentialError> {
        let mut seen = [false; 6];
        for &w in first.iter().chain(&second) {
            if w >= 6 {
                return Err(PotentialError::InvalidPartition(format!("label {w} out of range")));
            }
            if seen[w] {
                return Err(PotentialError::InvalidPartition(format!("label {w} repeated")));
            }
            seen[w] = true;
        }
        let mut first = first;
        let mut second = second;
        first.sort_unstable();
        second.sort_unstable();
        Ok(SpinPartition { first, second })
    }

    /// All ten partitions, each listed once (the triple containing 0 first).
    pub fn all() -> Vec<SpinPartition> {
        let mut out = Vec::new();
        for a in 1..6 {
            for b in a + 1..6 {
                let rest: Vec<usize> = (1..6).filter(|&w| w != a && w != b).collect();
                out.push(SpinPartition::new([0, a, b], [rest[0], rest[1], rest[2]]).unwrap());
            }
        }
        out
    }

    pub fn in_first(&self, w: usize) -> bool {
        self.first.contains(&w)
    }

    pub fn in_second(&self, w: usize) -> bool {
        self.second.contains(&w)
    }
}

impl std::str::FromStr for SpinPartition {
    type Err = PotentialError;

    /// Parses `"012|345"` or `"0,1,2|3,4,5"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PotentialError::InvalidPartition(s.to_string());
        let (a, b) = s.split_once('|').ok_or_else(bad)?;
        let parse = |t: &str| -> Result<[usize; 3], PotentialError> {
            let digits: Vec<usize> = t
                .chars()
                .filter(|c| !c.is_whitespace() && *c != ',')
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<_, _>>()?;
            digits.try_into().map_err(|_| bad())
        };
        SpinPartition::new(parse(a)?, parse(b)?)
    }
}

impl fmt::Display for SpinPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.first;
        let [d, e, g] = self.second;
        write!(f, "{a}{b}{c}|{d}{e}{g}")
    }
}

impl TryFrom<String> for SpinPartition {
    type Error = PotentialError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SpinPartition> for String {
    fn from(p: SpinPartition) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Outside the affine chart; orders there depend on the trivialization.
    Unchecked,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleCheck {
    pub location: PoleLocation,
    /// Weierstrass labels at this location, empty for declared non-Weierstrass points.
    pub labels: Vec<usize>,
    pub entry: (usize, usize),
    pub measured_order: usize,
    pub bound: usize,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OffDivisorPole {
    pub location: C64,
    pub entry: (usize, usize),
    pub order: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleReport {
    pub checks: Vec<PoleCheck>,
    pub off_divisor: Vec<OffDivisorPole>,
    pub trace_defect: f64,
    pub pass: bool,
}

impl PoleReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| {
                format!(
                    "entry {:?} at {}: measured order {} exceeds {}",
                    c.entry, c.location, c.measured_order, c.bound
                )
            })
            .collect();
        out.extend(
            self.off_divisor
                .iter()
                .map(|p| format!("off-divisor pole of order {} in entry {:?} at {}", p.order, p.entry, PoleLocation::Finite(p.location))),
        );
        out
    }
}

/// Pole order, in a local coordinate of the curve, of the 1-form `r(z) dz`
/// at a point where `z` has branching order `e`.
fn form_order(r: &RationalFunction, at: C64, e: u32) -> usize {
    let p = r.pole_order_at(at, POLE_TOL) as i64;
    if p == 0 {
        return 0;
    }
    let e = e as i64;
    (e * p - (e - 1)).max(0) as usize
}

fn entry_order(pot: &DPWPotential, r: usize, c: usize, at: C64, e: u32) -> usize {
    pot.entries[r][c]
        .values()
        .filter(|f| !f.is_zero())
        .map(|f| form_order(f, at, e))
        .max()
        .unwrap_or(0)
}

/// Allowed pole order at a Weierstrass location carrying `labels`: order 1 on the
/// diagonal, order 2 lower left on the first triple, order 2 upper right on
/// the second triple, holomorphic otherwise.
fn weierstrass_bound(part: &SpinPartition, labels: &[usize], r: usize, c: usize) -> usize {
    match (r, c) {
        (0, 0) | (1, 1) => 1,
        (1, 0) if labels.iter().any(|&w| part.in_first(w)) => 2,
        (0, 1) if labels.iter().any(|&w| part.in_second(w)) => 2,
        _ => 0,
    }
}

/// Checks the pole orders of `pot` against the genus-2 bounds at the six
/// Weierstrass points (`locations[w]` is the z-value of label `w`; several
/// labels may share a z-value) and against the potential's own declared
/// divisor elsewhere. Any other pole fails as off-divisor.
pub fn validate_pole_structure(
    pot: &DPWPotential,
    part: &SpinPartition,
    locations: &[PoleLocation],
) -> Result<PoleReport, PotentialError> {
    if locations.len() != 6 {
        return Err(PotentialError::WrongLocationCount { expected: 6, got: locations.len() });
    }
    let mut groups: Vec<(PoleLocation, Vec<usize>)> = Vec::new();
    for (w, loc) in locations.iter().enumerate() {
        match groups.iter_mut().find(|(l, _)| l.same(loc)) {
            Some((_, labels)) => labels.push(w),
            None => groups.push((*loc, vec![w])),
        }
    }
    let ramification_at = |loc: &PoleLocation| {
        pot.declared_poles
            .iter()
            .find(|d| d.location.same(loc))
            .map(|d| d.ramification)
            .unwrap_or(1)
    };

    let mut checks = Vec::new();
    for (loc, labels) in &groups {
        for r in 0..2 {
            for c in 0..2 {
                let bound = weierstrass_bound(part, labels, r, c);
                let (measured, status) = match loc {
                    PoleLocation::Finite(z) => {
                        let m = entry_order(pot, r, c, *z, ramification_at(loc));
                        (m, if m <= bound { CheckStatus::Pass } else { CheckStatus::Fail })
                    }
                    PoleLocation::Infinity => (0, CheckStatus::Unchecked),
                };
                checks.push(PoleCheck {
                    location: *loc,
                    labels: labels.clone(),
                    entry: (r, c),
                    measured_order: measured,
                    bound,
                    status,
                });
            }
        }
    }
    for d in &pot.declared_poles {
        if groups.iter().any(|(l, _)| l.same(&d.location)) {
            continue;
        }
        for r in 0..2 {
            for c in 0..2 {
                let (measured, status) = match d.location {
                    PoleLocation::Finite(z) => {
                        let m = entry_order(pot, r, c, z, d.ramification);
                        let ok = m <= d.max_order[r][c];
                        (m, if ok { CheckStatus::Pass } else { CheckStatus::Fail })
                    }
                    PoleLocation::Infinity => (0, CheckStatus::Unchecked),
                };
                checks.push(PoleCheck {
                    location: d.location,
                    labels: Vec::new(),
                    entry: (r, c),
                    measured_order: measured,
                    bound: d.max_order[r][c],
                    status,
                });
            }
        }
    }

    let known = |z: C64| {
        groups.iter().any(|(l, _)| l.near(z)) || pot.declared_poles.iter().any(|d| d.location.near(z))
    };
    let mut off_divisor = Vec::new();
    for ((r, c), _, f) in pot.terms() {
        if f.is_zero() {
            continue;
        }
        for root in f.den.roots() {
            if known(root) {
                continue;
            }
            let order = f.pole_order_at(root, POLE_TOL);
            if order == 0 {
                continue;
            }
            let dup = off_divisor.iter_mut().find(|p: &&mut OffDivisorPole| {
                p.entry == (r, c) && PoleLocation::Finite(p.location).near(root)
            });
            match dup {
                Some(p) => p.order = p.order.max(order),
                None => off_divisor.push(OffDivisorPole { location: root, entry: (r, c), order }),
            }
        }
    }
    let trace_defect = pot.trace_defect();
    let pass = checks.iter().all(|c| c.status != CheckStatus::Fail)
        && off_divisor.is_empty()
        && trace_defect < 1e-12;
    Ok(PoleReport { checks, off_divisor, trace_defect, pass })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeadingTermReport {
    pub lowest_index: Option<i32>,
    /// Only the upper-right entry of the ζ⁻¹ coefficient is nonzero.
    pub minus_one_nilpotent: bool,
    /// The ζ⁻¹ upper-right entry is the constant 1.
    pub minus_one_is_unit: bool,
    /// Lower-left ζ⁰ coefficient: candidate Hopf coefficient `−(i/2)q`.
    pub hopf_candidate: Option<RationalFunction>,
    pub pass: bool,
}

fn is_zero_fn(f: Option<&RationalFunction>) -> bool {
    f.is_none_or(|f| f.num.max_abs() <= 1e-14 * f.den.max_abs())
}

/// Checks the shape `[[*, ζ⁻¹ + …], [*, *]]` of the leading ζ-terms.
pub fn leading_term_check(pot: &DPWPotential) -> LeadingTermReport {
    let lowest = pot.index_range().map(|(lo, _)| lo);
    let m1 = |r: usize, c: usize| pot.entries[r][c].get(&-1);
    let nilpotent = is_zero_fn(m1(0, 0))
        && is_zero_fn(m1(1, 0))
        && is_zero_fn(m1(1, 1))
        && !is_zero_fn(m1(0, 1));
    let unit = m1(0, 1).is_some_and(|f| {
        let r = f.reduced(1e-12);
        r.num.degree() == Some(0) && r.den.degree() == Some(0) && (r.eval(ZERO) - ONE).norm() < 1e-12
    });
    let hopf = pot.entries[1][0].get(&0).cloned();
    let pass = lowest.is_some_and(|l| l >= -1) && nilpotent;
    LeadingTermReport {
        lowest_index: lowest,
        minus_one_nilpotent: nilpotent,
        minus_one_is_unit: unit,
        hopf_candidate: hopf,
        pass,
    }
}

/// Power series in ζ, lowest degree first.
pub type ZetaSeries = Vec<C64>;

fn series_mul(a: &[C64], b: &[C64], n: usize) -> ZetaSeries {
    let mut out = vec![ZERO; n + 1];
    for (i, &x) in a.iter().enumerate().take(n + 1) {
        for (j, &y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_inv(a: &[C64], n: usize) -> Option<ZetaSeries> {
    let a0 = *a.first()?;
    if a0 == ZERO {
        return None;
    }
    let mut out = vec![ZERO; n + 1];
    out[0] = a0.inv();
    for k in 1..=n {
        let s: C64 = (1..=k.min(a.len() - 1)).map(|j| a[j] * out[k - j]).sum();
        out[k] = -s * out[0];
    }
    Some(out)
}

fn series_add(a: &[C64], b: &[C64], n: usize) -> ZetaSeries {
    (0..=n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

/// Coefficients `H` and `B` of the Lawson potential, truncated at ζ^N:
/// `H = A + A²`, `B = −(1/G)(−1/3 + A + (1/3 − A)²)`.
pub fn lawson_coefficients(a: &[C64], g: &[C64], n: usize) -> Result<(ZetaSeries, ZetaSeries), PotentialError> {
    let h = series_add(a, &series_mul(a, a, n), n);
    let third = C64::new(1.0 / 3.0, 0.0);
    let shifted: ZetaSeries = series_add(&[third], &a.iter().map(|x| -x).collect::<Vec<_>>(), n);
    let inner = series_add(
        &series_add(&[-third], a, n),
        &series_mul(&shifted, &shifted, n),
        n,
    );
    let ginv = series_inv(g, n).ok_or(PotentialError::DivisionByZero)?;
    let b = series_mul(&ginv, &inner, n).into_iter().map(|x| -x).collect();
    Ok((h, b))
}

/// Lawson potential with constant `A`, `G`.
pub fn lawson_potential(a: C64, g: C64) -> Result<DPWPotential, PotentialError> {
    lawson_potential_series(&[a], &[g], 0)
}

/// Lawson potential with `A`, `G` given as ζ-series truncated at ζ^N (the
/// `ζH` term then reaches ζ^{N+1}):
///
/// ```text
/// [[ −(4/3)z³/(z⁴−1) + A/z,        ζ⁻¹ + Bz²              ],
///  [ G/(z⁴−1) + ζH/(z²(z⁴−1)),     (4/3)z³/(z⁴−1) − A/z    ]] dz
/// ```
///
/// Declared divisor: `z = 0` (three unramified Weierstrass points), the four
/// branch points `z⁴ = 1` of `y³ = z⁴ − 1` (ramification 3), and `∞`.
pub fn lawson_potential_series(a: &[C64], g: &[C64], n: usize) -> Result<DPWPotential, PotentialError> {
    let (h, b) = lawson_coefficients(a, g, n)?;
    let quartic = Poly::real(&[-1.0, 0.0, 0.0, 0.0, 1.0]);
    let z = Poly::x();
    let z2 = &z * &z;
    let log_deriv = RationalFunction::new(Poly::real(&[0.0, 0.0, 0.0, -4.0 / 3.0]), quartic.clone());
    let coef = |s: &[C64], k: usize| s.get(k).copied().unwrap_or(ZERO);

    let mut p = DPWPotential::empty();
    for k in 0..=n {
        let ki = k as i32;
        let mut diag = RationalFunction::new(Poly::constant(coef(a, k)), z.clone());
        if k == 0 {
            diag = &diag + &log_deriv;
        }
        if !diag.is_zero() {
            p.add_term(0, 0, ki, diag.clone());
            p.add_term(1, 1, ki, -&diag);
        }
        let upper = RationalFunction::poly(z2.scale(coef(&b, k)));
        if !upper.is_zero() {
            p.add_term(0, 1, ki, upper);
        }
        let lower = RationalFunction::new(Poly::constant(coef(g, k)), quartic.clone());
        if !lower.is_zero() {
            p.add_term(1, 0, ki, lower);
        }
        let hk = coef(&h, k);
        if hk != ZERO {
            p.add_term(1, 0, ki + 1, RationalFunction::new(Poly::constant(hk), &z2 * &quartic));
        }
    }
    p.add_term(0, 1, -1, RationalFunction::constant(ONE));

    p.declared_poles.push(DeclaredPole {
        location: PoleLocation::Finite(ZERO),
        max_order: [[1, 0], [2, 1]],
        ramification: 1,
    });
    for k in 0..4 {
        let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * k as f64);
        p.declared_poles.push(DeclaredPole {
            location: PoleLocation::Finite(w),
            max_order: [[1, 0], [1, 1]],
            ramification: 3,
        });
    }
    p.declared_poles.push(DeclaredPole {
        location: PoleLocation::Infinity,
        max_order: [[1, 2], [0, 1]],
        ramification: 3,
    });
    Ok(p)
}

/// Weierstrass locations of the Lawson chart: labels 0–2 over `z = 0`,
/// labels 3–5 over `z = ∞`.
pub fn lawson_weierstrass_locations() -> Vec<PoleLocation> {
    let mut v = vec![PoleLocation::Finite(ZERO); 3];
    v.extend([PoleLocation::Infinity; 3]);
    v
}

/// Contents of a potential file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialFile {
    pub potential: DPWPotential,
    #[serde(default)]
    pub partition: Option<SpinPartition>,
    #[serde(default)]
    pub weierstrass_locations: Option<Vec<PoleLocation>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lawson_coefficient_examples() {
        let cases = [(0.0, 0.0, 2.0 / 9.0), (1.0 / 3.0, 4.0 / 9.0, 0.0), (-1.0, 0.0, -4.0 / 9.0)];
        for (a, h_want, b_want) in cases {
            let (h, b) = lawson_coefficients(&[c(a, 0.0)], &[ONE], 0).unwrap();
            assert!((h[0] - c(h_want, 0.0)).norm() < 1e-15);
            assert!((b[0] - c(b_want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_g_rejected() {
        assert_eq!(lawson_potential(ONE, ZERO).unwrap_err(), PotentialError::DivisionByZero);
    }

    #[test]
    fn lawson_shape() {
        let p = lawson_potential(c(0.2, 0.1), c(1.0, -0.5)).unwrap();
        assert_eq!(p.index_range(), Some((-1, 1)));
        assert!(p.trace_defect() < 1e-14);
        let z = c(0.3, 0.4);
        let zeta = c(0.7, 0.2);
        let m = p.eval(z, zeta);
        let q = z.powi(4) - 1.0;
        let (a, g) = (c(0.2, 0.1), c(1.0, -0.5));
        let h = a + a * a;
        let b = -(c(-1.0 / 3.0, 0.0) + a + (c(1.0 / 3.0, 0.0) - a).powi(2)) / g;
        let want = Matrix2::new(
            -z.powi(3) * (4.0 / 3.0) / q + a / z,
            zeta.inv() + b * z * z,
            g / q + zeta * h / (z * z * q),
            z.powi(3) * (4.0 / 3.0) / q - a / z,
        );
        assert!(m.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn partition_parsing() {
        let p: SpinPartition = "012|345".parse().unwrap();
        assert!(p.in_first(1) && p.in_second(5));
        assert_eq!("2,0,1|5,4,3".parse::<SpinPartition>().unwrap(), p);
        assert!("011|345".parse::<SpinPartition>().is_err());
        assert!("01|2345".parse::<SpinPartition>().is_err());
        assert_eq!(SpinPartition::all().len(), 10);
    }

    #[test]
    fn series_inverse() {
        let g = vec![c(2.0, 0.0), c(0.5, 1.0), c(-0.3, 0.0)];
        let inv = series_inv(&g, 6).unwrap();
        let prod = series_mul(&g, &inv, 6);
        assert!((prod[0] - ONE).norm() < 1e-15);
        for x in &prod[1..] {
            assert!(x.norm() < 1e-15);
        }
    }
}
