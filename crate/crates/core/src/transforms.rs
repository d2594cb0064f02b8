//! Cauchy, Poisson and conjugate-Poisson transforms, boundary limits along
//! vertical rays, and principal-value integrals.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::phase_shift::{PhaseShift, ShiftForm};
use crate::piecewise::{self, Piece};
use crate::C64;

/// A point `x + iy` with `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl UpperHalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() || !x.is_finite() {
            return Err(Error::NotInUpperHalfPlane { y });
        }
        Ok(UpperHalfPlanePoint { x, y })
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.x, self.y)
    }
}

/// `Kμ(z) = (1/π) Σ w / (t − z)`. Rejects measures with mass at infinity.
pub fn cauchy(m: &AtomicMeasure, z: UpperHalfPlanePoint) -> Result<C64> {
    m.require_compact()?;
    Ok(cauchy_unchecked(m, z))
}

pub(crate) fn cauchy_unchecked(m: &AtomicMeasure, z: UpperHalfPlanePoint) -> C64 {
    let z = z.to_c64();
    m.atoms().iter().map(|a| a.mass / (a.location - z)).sum::<C64>() / PI
}

/// Poisson integral `(1/π) Σ w·y/((x−t)² + y²) + y·μ(∞)`.
pub fn poisson(m: &AtomicMeasure, z: UpperHalfPlanePoint) -> f64 {
    let UpperHalfPlanePoint { x, y } = z;
    let s: f64 = m.atoms().iter().map(|a| a.mass * y / ((x - a.location).powi(2) + y * y)).sum();
    s / PI + y * m.infinity_mass()
}

/// `Ku(z) = (1/π) ∫ u(t)/(t − z) dt`.
///
/// Exact shifts use `±Σ log((b − z)/(a − z))`; sampled shifts fall back to
/// numerical quadrature.
pub fn cauchy_of_shift(u: &PhaseShift, z: UpperHalfPlanePoint) -> C64 {
    match u.form() {
        ShiftForm::Exact(set) => {
            let zc = z.to_c64();
            let s: C64 = set.intervals().iter().map(|iv| ((iv.right - zc) / (iv.left - zc)).ln()).sum();
            s * u.sign().factor()
        }
        ShiftForm::Sampled { .. } => cauchy_of_shift_quadrature(u, z),
    }
}

/// [`cauchy_of_shift`] by double-exponential quadrature on every constancy cell.
pub fn cauchy_of_shift_quadrature(u: &PhaseShift, z: UpperHalfPlanePoint) -> C64 {
    let Some((lo, hi)) = u.support_hull() else {
        return C64::new(0.0, 0.0);
    };
    let zc = z.to_c64();
    let br = u.breakpoints_in(lo, hi);
    let mut acc = C64::new(0.0, 0.0);
    for p in piecewise::pieces_from(&br, |a, b| u.line_on(a, b)) {
        if p.a == 0.0 && p.b == 0.0 {
            continue;
        }
        let re = quadrature::integrate(|t| ((p.a + p.b * t) / (t - zc)).re, p.lo, p.hi, 1e-14);
        let im = quadrature::integrate(|t| ((p.a + p.b * t) / (t - zc)).im, p.lo, p.hi, 1e-14);
        acc += C64::new(re.integral, im.integral);
    }
    acc / PI
}

/// Conjugate Poisson integral `Qu = −Re Ku`.
pub fn conj_poisson(u: &PhaseShift, z: UpperHalfPlanePoint) -> f64 {
    -cauchy_of_shift(u, z).re
}

/// Poisson extension `Pu = Im Ku` of a shift.
pub fn shift_poisson(u: &PhaseShift, z: UpperHalfPlanePoint) -> f64 {
    cauchy_of_shift(u, z).im
}

/// Sampling and extrapolation parameters for boundary limits and p.v. integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    /// First height of the vertical ray.
    pub y0: f64,
    pub ratio: f64,
    pub steps: usize,
    /// Samples used for extrapolation and trend detection.
    pub window: usize,
    pub tol: f64,
    pub cap: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { y0: 0.1, ratio: 0.5, steps: 40, window: 8, tol: 1e-8, cap: 1e12 }
    }
}

impl LimitConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.y0 > 0.0
            && self.ratio > 0.0
            && self.ratio < 1.0
            && self.window >= 3
            && self.steps >= self.window + 2
            && self.tol > 0.0
            && self.cap > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid limit configuration {self:?}")))
        }
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(move |k| self.y0 * self.ratio.powi(k as i32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Converged,
    DivergesToPlusInf,
    DivergesToMinusInf,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLimitResult {
    pub kind: LimitKind,
    pub value: Option<C64>,
    /// `(y, f(x + iy))` samples.
    pub evidence: Vec<(f64, C64)>,
}

/// Richardson extrapolation for `s(y) = L + Σ c_m y^m` sampled at `y_k = y_0 r^k`.
fn richardson(samples: &[C64], r: f64) -> C64 {
    let mut t = samples.to_vec();
    let w = t.len();
    for m in 1..w {
        let rm = r.powi(m as i32);
        for j in (m..w).rev() {
            t[j] = (t[j] - rm * t[j - 1]) / (1.0 - rm);
        }
    }
    t[w - 1]
}

/// Limit of `f(x + iy)` as `y ↓ 0` along `y_k = y_0 r^k`.
pub fn nontangential_limit<F: Fn(UpperHalfPlanePoint) -> C64>(f: F, x: f64, cfg: &LimitConfig) -> BoundaryLimitResult {
    let evidence: Vec<(f64, C64)> = cfg
        .heights()
        .map(|y| (y, f(UpperHalfPlanePoint { x, y })))
        .collect();
    let kind_value = classify_limit(&evidence, cfg);
    BoundaryLimitResult { kind: kind_value.0, value: kind_value.1, evidence }
}

fn classify_limit(ev: &[(f64, C64)], cfg: &LimitConfig) -> (LimitKind, Option<C64>) {
    let n = ev.len();
    let w = cfg.window.min(n);
    if n < w + 2 || ev.iter().any(|(_, v)| !v.re.is_finite() || !v.im.is_finite()) {
        return divergence_or_undecided(ev, cfg);
    }
    let vals: Vec<C64> = ev.iter().map(|e| e.1).collect();
    let ext: Vec<C64> = (0..3).map(|k| richardson(&vals[n - w - k..n - k], cfg.ratio)).collect();
    let scale = ext[0].norm().max(1.0);
    let agree = (ext[0] - ext[1]).norm() <= cfg.tol * scale && (ext[1] - ext[2]).norm() <= cfg.tol * scale;
    let raw_agree = (vals[n - 1] - vals[n - 2]).norm() <= cfg.tol * scale
        && (vals[n - 2] - vals[n - 3]).norm() <= cfg.tol * scale;
    if raw_agree {
        return (LimitKind::Converged, Some(vals[n - 1]));
    }
    if agree {
        return (LimitKind::Converged, Some(ext[0]));
    }
    divergence_or_undecided(ev, cfg)
}

fn divergence_or_undecided(ev: &[(f64, C64)], cfg: &LimitConfig) -> (LimitKind, Option<C64>) {
    let n = ev.len();
    let w = cfg.window.min(n);
    let tail = &ev[n - w..];
    let mags: Vec<f64> = tail.iter().map(|(_, v)| v.norm()).collect();
    let last = tail[w - 1].1;
    let rising = mags.windows(2).all(|p| p[1] > p[0]);
    let non_finite = !last.re.is_finite() || !last.im.is_finite();
    let over_cap = (mags[w - 1] > cfg.cap || non_finite) && mags.windows(2).all(|p| p[1] >= p[0] || !p[1].is_finite());
    let incs: Vec<f64> = mags.windows(2).map(|p| p[1] - p[0]).collect();
    let no_decay = incs.windows(2).all(|d| d[1] >= 0.75 * d[0]);
    if over_cap || (rising && no_decay) {
        let dominant = if last.re.abs() >= last.im.abs() { last.re } else { last.im };
        let kind = if dominant >= 0.0 { LimitKind::DivergesToPlusInf } else { LimitKind::DivergesToMinusInf };
        return (kind, None);
    }
    (LimitKind::Undecided, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PvKind {
    Finite,
    PlusInf,
    MinusInf,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvResult {
    pub kind: PvKind,
    pub value: Option<f64>,
    /// `(ε, ∫_{|t|>ε})` for `ε = ε_0 2^{-k}`.
    pub partials: Vec<(f64, f64)>,
}

/// `p.v. ∫_{-w}^{w} u(x + t) dt/t`.
pub fn pv_integral(u: &PhaseShift, x: f64, window: f64, cfg: &LimitConfig) -> PvResult {
    pv_of_pieces(&u.pieces_around(x, window), window, u.is_exact(), cfg)
}

/// Principal value of a piecewise-linear integrand against `1/t`.
///
/// Piecewise-constant integrands are decided from the jump at 0: the
/// truncations grow like `jump · ln(1/ε)`. Otherwise the trend of the last
/// `cfg.window` truncations decides.
pub(crate) fn pv_of_pieces(pieces: &[Piece], eps0: f64, constant: bool, cfg: &LimitConfig) -> PvResult {
    let partials: Vec<(f64, f64)> = (0..=cfg.steps)
        .map(|k| {
            let eps = eps0 * 0.5f64.powi(k as i32);
            (eps, piecewise::integral_outside(pieces, eps))
        })
        .collect();
    if constant {
        let (left, right, delta) = piecewise::local_structure(pieces);
        let jump = right - left;
        let kind = if jump.abs() <= 1e-12 * (left.abs() + right.abs()).max(1.0) {
            PvKind::Finite
        } else if jump > 0.0 {
            PvKind::PlusInf
        } else {
            PvKind::MinusInf
        };
        let value = (kind == PvKind::Finite).then(|| piecewise::integral_outside(pieces, 0.5 * delta.min(eps0)));
        return PvResult { kind, value, partials };
    }
    let (kind, value) = classify_trend(&partials, cfg);
    PvResult { kind, value, partials }
}

fn classify_trend(partials: &[(f64, f64)], cfg: &LimitConfig) -> (PvKind, Option<f64>) {
    let n = partials.len();
    let w = cfg.window.min(n);
    let tail: Vec<f64> = partials[n - w..].iter().map(|p| p.1).collect();
    let last = tail[w - 1];
    let incs: Vec<f64> = tail.windows(2).map(|p| p[1] - p[0]).collect();
    if incs.iter().all(|d| d.abs() <= cfg.tol * last.abs().max(1.0)) {
        return (PvKind::Finite, Some(last));
    }
    let steady = |s: f64| {
        incs.iter().all(|&d| d * s > 0.0) && {
            let mx = incs.iter().map(|d| d.abs()).fold(0.0, f64::max);
            let mn = incs.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
            mn >= 0.5 * mx
        }
    };
    if steady(1.0) {
        (PvKind::PlusInf, None)
    } else if steady(-1.0) {
        (PvKind::MinusInf, None)
    } else {
        (PvKind::Undecided, None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertCheck {
    /// `(y, Qu(x+iy) − (1/π)∫_{|x−t|>y} u(t) dt/(x−t))`.
    pub samples: Vec<(f64, f64)>,
    pub sup: f64,
}

/// Difference between the conjugate Poisson integral and the truncated Hilbert
/// transform along the vertical ray at `x`.
pub fn hilbert_correction_check(u: &PhaseShift, x: f64, cfg: &LimitConfig) -> HilbertCheck {
    let window = match u.support_hull() {
        Some((lo, hi)) => (x - lo).abs().max((hi - x).abs()) + 1.0,
        None => 1.0,
    };
    let pieces = u.pieces_around(x, window);
    let samples: Vec<(f64, f64)> = cfg
        .heights()
        .map(|y| {
            let q = conj_poisson(u, UpperHalfPlanePoint { x, y });
            let truncated = -piecewise::integral_outside(&pieces, y) / PI;
            (y, q - truncated)
        })
        .collect();
    let sup = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    HilbertCheck { samples, sup }
}

/// Atom mass `μ{x} = lim y·Im(π·Kμ(x + iy))` from an evaluator of `Kμ`.
pub fn stieltjes_atom<F: Fn(UpperHalfPlanePoint) -> C64>(f: F, x: f64, cfg: &LimitConfig) -> Result<f64> {
    let res = nontangential_limit(|z| C64::new(z.y * PI * f(z).im, 0.0), x, cfg);
    match (res.kind, res.value) {
        (LimitKind::Converged, Some(v)) => Ok(v.re.max(0.0)),
        _ => Err(Error::Precondition(format!("Stieltjes limit at {x} is {:?}", res.kind))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClarkCheck {
    pub x: f64,
    pub expected: f64,
    pub limit: BoundaryLimitResult,
    pub ok: bool,
}

/// Checks that `F = (1 + K(fσ))/(1 + Kσ)` tends to `f(x)` at the atoms `xs` of `σ`.
///
/// `f[i]` is the value at the `i`-th atom of `sigma`.
pub fn verify_clark_limit(sigma: &AtomicMeasure, f: &[f64], xs: &[f64], cfg: &LimitConfig) -> Result<Vec<ClarkCheck>> {
    sigma.require_compact()?;
    if f.len() != sigma.len() {
        return Err(Error::Precondition(format!("{} values for {} atoms", f.len(), sigma.len())));
    }
    let atoms = sigma.atoms();
    let eval = |z: UpperHalfPlanePoint| {
        let zc = z.to_c64();
        let mut kf = C64::new(0.0, 0.0);
        let mut ks = C64::new(0.0, 0.0);
        for (a, &fv) in atoms.iter().zip(f) {
            let k = a.mass / (a.location - zc);
            kf += fv * k;
            ks += k;
        }
        (1.0 + kf / PI) / (1.0 + ks / PI)
    };
    xs.iter()
        .map(|&x| {
            let i = atoms
                .iter()
                .position(|a| a.location == x)
                .ok_or_else(|| Error::Precondition(format!("{x} is not an atom of sigma")))?;
            let limit = nontangential_limit(eval, x, cfg);
            let ok = limit.kind == LimitKind::Converged
                && limit.value.is_some_and(|v| (v - C64::new(f[i], 0.0)).norm() <= 1e-6 * f[i].abs().max(1.0));
            Ok(ClarkCheck { x, expected: f[i], limit, ok })
        })
        .collect()
}
