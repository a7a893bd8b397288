//! Parallel transport `dΨ = Ψ·ξ`, `Ψ(start) = I`, of DPW potentials along
//! polygonal paths in the punctured z-plane, holonomies and commutator probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loopcore::{unit_circle, Matrix2, MatrixLoop, C64, ONE, ZERO};
use crate::potential::DPWPotential;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("segment {segment} passes within {distance:e} of the pole at {pole} (minimum {delta:e})")]
    PathTooClose { segment: usize, pole: C64, distance: f64, delta: f64 },
    #[error("step size underflow at t = {t} on segment {segment}")]
    StepUnderflow { segment: usize, t: f64 },
    #[error("path needs at least two distinct waypoints")]
    DegeneratePath,
    #[error("holonomy needs a closed path")]
    NotClosed,
    #[error("the family has a pole at zeta = 0")]
    ZetaZero,
}

/// Polygonal path through `waypoints`; a closed path returns to the first
/// waypoint at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<C64>,
    #[serde(default)]
    pub closed: bool,
}

impl Path {
    pub fn open(waypoints: Vec<C64>) -> Self {
        Path { waypoints, closed: false }
    }

    pub fn closed(waypoints: Vec<C64>) -> Self {
        Path { waypoints, closed: true }
    }

    pub fn segment(a: C64, b: C64) -> Self {
        Self::open(vec![a, b])
    }

    /// Counterclockwise regular `n`-gon on the circle `|z − center| = radius`,
    /// starting and ending at `center + radius`.
    pub fn circle(center: C64, radius: f64, n: usize) -> Self {
        let pts = (0..n)
            .map(|k| center + C64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64))
            .collect();
        Self::closed(pts)
    }

    /// Closed path from `base` straight to the circle around `center`, once
    /// around it counterclockwise (`n` vertices), and straight back.
    pub fn lasso(base: C64, center: C64, radius: f64, n: usize) -> Self {
        let dir = base - center;
        let theta0 = if dir.norm() > 0.0 { dir.arg() } else { 0.0 };
        let mut pts = vec![base];
        for k in 0..=n {
            pts.push(center + C64::from_polar(radius, theta0 + std::f64::consts::TAU * k as f64 / n as f64));
        }
        Self::closed(pts)
    }

    /// Consecutive segment endpoints, including the closing segment.
    pub fn segments(&self) -> Vec<(C64, C64)> {
        let mut pts = self.waypoints.clone();
        if self.closed && pts.len() > 1 && pts.first() != pts.last() {
            pts.push(pts[0]);
        }
        pts.windows(2)
            .filter(|w| w[0] != w[1])
            .map(|w| (w[0], w[1]))
            .collect()
    }

    pub fn start(&self) -> Option<C64> {
        self.waypoints.first().copied()
    }

    /// The same path run backwards.
    pub fn reversed(&self) -> Self {
        let mut w = self.waypoints.clone();
        if self.closed {
            w.push(w[0]);
            w.reverse();
            w.pop();
        } else {
            w.reverse();
        }
        Path { waypoints: w, closed: self.closed }
    }

    /// `self` followed by `other` (endpoints must match).
    pub fn then(&self, other: &Path) -> Self {
        let mut w: Vec<C64> = self.segments().iter().map(|s| s.0).collect();
        w.push(self.segments().last().map(|s| s.1).unwrap_or(ZERO));
        w.extend(other.segments().iter().map(|s| s.1));
        Path::open(w)
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(a: C64, b: C64, p: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransportOptions {
    /// Local error tolerance per step.
    pub tol: f64,
    /// Largest step as a fraction of a segment (1 = unrestricted).
    pub max_step: f64,
    /// Minimum admissible distance to a pole; `None` uses 1e−2 times the
    /// smallest pairwise pole distance.
    pub delta: Option<f64>,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { tol: 1e-11, max_step: 0.1, delta: None }
    }
}

impl TransportOptions {
    pub fn with_tol(tol: f64) -> Self {
        TransportOptions { tol, ..Self::default() }
    }
}

/// Default pole clearance: 1e−2 times the smallest pairwise distance, or
/// 1e−3 with fewer than two poles.
pub fn default_delta(poles: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for (i, a) in poles.iter().enumerate() {
        for b in &poles[i + 1..] {
            m = m.min((a - b).norm());
        }
    }
    if m.is_finite() {
        1e-2 * m
    } else {
        1e-3
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `Ψ' = Ψ·g(t)` on `t ∈ [0, 1]` from `psi`, renormalizing the
/// determinant after each accepted step.
fn integrate_segment(
    psi: Matrix2,
    g: &dyn Fn(f64) -> Matrix2,
    opts: &TransportOptions,
    segment: usize,
) -> Result<Matrix2, TransportError> {
    let mut y = psi;
    let mut t = 0.0;
    let mut h = opts.max_step.min(0.05);
    while t < 1.0 {
        h = h.min(opts.max_step);
        let last = h >= 1.0 - t;
        if last {
            h = 1.0 - t;
        }
        if h < 1e-14 && !last {
            return Err(TransportError::StepUnderflow { segment, t });
        }
        let mut k = [Matrix2::zero(); 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    ys += *kj * C64::new(h * A[s][j], 0.0);
                }
            }
            k[s] = ys * g(t + C[s] * h);
        }
        let mut y5 = y;
        let mut err = Matrix2::zero();
        for s in 0..7 {
            y5 += k[s] * C64::new(h * B5[s], 0.0);
            err += k[s] * C64::new(h * (B5[s] - B4[s]), 0.0);
        }
        let scale = opts.tol * y.frobenius().max(1.0);
        let e = err.frobenius() / scale;
        if e <= 1.0 {
            t = if last { 1.0 } else { t + h };
            y = y5.normalize_det();
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        if !factor.is_finite() {
            h *= 0.2;
        } else {
            h *= factor;
        }
    }
    Ok(y)
}

fn check_clearance(path: &Path, poles: &[C64], delta: f64) -> Result<(), TransportError> {
    for (s, (a, b)) in path.segments().into_iter().enumerate() {
        for &p in poles {
            let d = segment_distance(a, b, p);
            if d < delta {
                return Err(TransportError::PathTooClose { segment: s, pole: p, distance: d, delta });
            }
        }
    }
    Ok(())
}

/// Transport at a fixed spectral parameter. Returns `Ψ(end)`.
pub fn parallel_transport(
    pot: &DPWPotential,
    path: &Path,
    zeta: C64,
    opts: &TransportOptions,
) -> Result<Matrix2, TransportError> {
    if zeta == ZERO {
        return Err(TransportError::ZetaZero);
    }
    let poles = pot.finite_poles();
    let delta = opts.delta.unwrap_or_else(|| default_delta(&poles));
    check_clearance(path, &poles, delta)?;
    transport_unchecked(pot, path, zeta, opts)
}

fn transport_unchecked(
    pot: &DPWPotential,
    path: &Path,
    zeta: C64,
    opts: &TransportOptions,
) -> Result<Matrix2, TransportError> {
    let segs = path.segments();
    if segs.is_empty() {
        return Err(TransportError::DegeneratePath);
    }
    let mut psi = Matrix2::identity();
    for (s, (a, b)) in segs.into_iter().enumerate() {
        let d = b - a;
        let g = move |t: f64| pot.eval(a + d * t, zeta) * d;
        psi = integrate_segment(psi, &g, opts, s)?;
    }
    Ok(psi)
}

/// Transport at a fixed spectral parameter, returning `Ψ` at every waypoint
/// (the first entry is `I`).
pub fn transport_waypoints(
    pot: &DPWPotential,
    path: &Path,
    zeta: C64,
    opts: &TransportOptions,
) -> Result<Vec<Matrix2>, TransportError> {
    if zeta == ZERO {
        return Err(TransportError::ZetaZero);
    }
    let poles = pot.finite_poles();
    let delta = opts.delta.unwrap_or_else(|| default_delta(&poles));
    check_clearance(path, &poles, delta)?;
    let segs = path.segments();
    if segs.is_empty() {
        return Err(TransportError::DegeneratePath);
    }
    let mut out = Vec::with_capacity(segs.len() + 1);
    let mut psi = Matrix2::identity();
    out.push(psi);
    for (s, (a, b)) in segs.into_iter().enumerate() {
        let d = b - a;
        let g = move |t: f64| pot.eval(a + d * t, zeta) * d;
        psi = integrate_segment(psi, &g, opts, s)?;
        out.push(psi);
    }
    Ok(out)
}

/// Transport along a path for a generator given as a closure `z ↦ ξ(z)`.
pub fn transport_with(
    xi: &(dyn Fn(C64) -> Matrix2 + Sync),
    path: &Path,
    opts: &TransportOptions,
) -> Result<Matrix2, TransportError> {
    let mut psi = Matrix2::identity();
    let segs = path.segments();
    if segs.is_empty() {
        return Err(TransportError::DegeneratePath);
    }
    for (s, (a, b)) in segs.into_iter().enumerate() {
        let d = b - a;
        let g = move |t: f64| xi(a + d * t) * d;
        psi = integrate_segment(psi, &g, opts, s)?;
    }
    Ok(psi)
}

/// Transport of the whole loop in ζ: `Ψ(end)` is computed at `samples`
/// points of the unit circle and converted to coefficients with indices in
/// `-trunc..=trunc`. Returns the loop and the Wiener norm of the discarded part.
pub fn parallel_transport_loop(
    pot: &DPWPotential,
    path: &Path,
    trunc: usize,
    samples: usize,
    opts: &TransportOptions,
) -> Result<(MatrixLoop, f64), TransportError> {
    let poles = pot.finite_poles();
    let delta = opts.delta.unwrap_or_else(|| default_delta(&poles));
    check_clearance(path, &poles, delta)?;
    let m = samples.max(2 * trunc + 2);
    let values: Vec<Matrix2> = unit_circle(m)
        .into_par_iter()
        .map(|zeta| transport_unchecked(pot, path, zeta, opts))
        .collect::<Result<_, _>>()?;
    let lo = -((m / 2) as i32);
    let full = MatrixLoop::from_unit_samples(&values, lo);
    Ok(full.truncated(trunc))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Holonomy {
    pub value: Matrix2,
    pub zeta: C64,
    pub basepoint: C64,
    pub path: Path,
    /// `|det − 1|`.
    pub det_defect: f64,
}

pub fn holonomy(
    pot: &DPWPotential,
    path: &Path,
    zeta: C64,
    opts: &TransportOptions,
) -> Result<Holonomy, TransportError> {
    if !path.closed {
        return Err(TransportError::NotClosed);
    }
    let value = parallel_transport(pot, path, zeta, opts)?;
    Ok(Holonomy {
        value,
        zeta,
        basepoint: path.start().unwrap_or(ZERO),
        path: path.clone(),
        det_defect: (value.det() - ONE).norm(),
    })
}

/// `max ‖XY − YX‖_F` over all pairs.
pub fn abelianness_probe(hols: &[Matrix2]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, x) in hols.iter().enumerate() {
        for y in &hols[i + 1..] {
            worst = worst.max(x.commutator(y).frobenius());
        }
    }
    worst
}

/// Analytic continuation of `y = (z⁴ − 1)^{1/3}` along a path. Sheet `k`
/// at `z` is `e^{2πik/3}` times the principal cube root. Returns the sheet
/// index at the end of the path.
pub fn track_sheet(path: &Path, start_sheet: usize) -> usize {
    let omega = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let f = |z: C64| z.powi(4) - ONE;
    let branch = |z: C64, k: usize| f(z).powf(1.0 / 3.0) * omega.powi(k as i32 % 3);
    let branches = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    let segs = path.segments();
    let Some(&(z0, _)) = segs.first() else { return start_sheet % 3 };
    let mut y = branch(z0, start_sheet);
    let mut z_end = z0;
    for (a, b) in segs {
        let clearance = branches
            .iter()
            .map(|&p| segment_distance(a, b, p))
            .fold(f64::INFINITY, f64::min)
            .max(1e-6);
        let n = (((b - a).norm() / (0.05 * clearance)).ceil() as usize).max(1);
        for s in 1..=n {
            let z = a + (b - a) * (s as f64 / n as f64);
            let base = f(z).powf(1.0 / 3.0);
            y = (0..3)
                .map(|k| base * omega.powi(k))
                .min_by(|p, q| (p - y).norm().total_cmp(&(q - y).norm()))
                .unwrap();
        }
        z_end = b;
    }
    let base = f(z_end).powf(1.0 / 3.0);
    (0..3usize)
        .min_by(|&p, &q| {
            (base * omega.powi(p as i32) - y).norm().total_cmp(&(base * omega.powi(q as i32) - y).norm())
        })
        .unwrap()
}
