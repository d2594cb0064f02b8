//! Rank-one perturbation calculus: the resolvent formula, the coupling ↔
//! circle-parameter map, the characteristic function `φ` and the Clark
//! family atom test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::transforms::{self, nontangential_limit, BoundaryLimitResult, LimitConfig, LimitKind, UpperHalfPlanePoint};
use crate::C64;

/// Coupling constant `λ` of `A_λ = A_0 + λ(·, φ)φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub lambda: f64,
}

impl Coupling {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InfiniteCoupling);
        }
        Ok(Coupling { lambda })
    }
}

/// A point `α` of the unit circle with the scale `c` relating `ν_λ = c·μ_α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleParam {
    pub alpha: C64,
    pub scale_c: f64,
}

impl CircleParam {
    /// A bare circle point (`c = 1`).
    pub fn new(alpha: C64) -> Result<Self> {
        if (alpha.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("|alpha| = {} is not 1", alpha.norm())));
        }
        Ok(CircleParam { alpha, scale_c: 1.0 })
    }
}

/// `β = (1 + iπλ)/(1 − iπλ)`, `c = 1/(1 + π²λ²)`.
pub fn coupling_to_circle(lam: Coupling) -> CircleParam {
    let t = C64::new(0.0, PI * lam.lambda);
    let one = C64::new(1.0, 0.0);
    CircleParam { alpha: (one + t) / (one - t), scale_c: 1.0 / (1.0 + (PI * lam.lambda).powi(2)) }
}

/// `λ = (i/π)(1 − α)/(1 + α)`; `α = −1` is the infinite coupling.
pub fn circle_to_coupling(alpha: C64) -> Result<Coupling> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("|alpha| = {} is not 1", alpha.norm())));
    }
    let one = C64::new(1.0, 0.0);
    if (one + alpha).norm() < 1e-12 {
        return Err(Error::InfiniteCoupling);
    }
    let l = C64::new(0.0, 1.0 / PI) * (one - alpha) / (one + alpha);
    Coupling::new(l.re)
}

/// `Kν_λ = Kν_0 / (1 + πλ Kν_0)`.
pub fn perturbed_cauchy(m0: &AtomicMeasure, lam: Coupling, z: UpperHalfPlanePoint) -> Result<C64> {
    let k = transforms::cauchy(m0, z)?;
    Ok(k / (1.0 + PI * lam.lambda * k))
}

/// The contraction `φ` with `−iKν_0 = (1 + φ)/(1 − φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunction {
    base: AtomicMeasure,
}

impl CharFunction {
    pub fn new(base: AtomicMeasure) -> Result<Self> {
        base.require_compact()?;
        if base.is_empty() {
            return Err(Error::InvalidMeasure("characteristic function of the zero measure".into()));
        }
        Ok(CharFunction { base })
    }

    pub fn base(&self) -> &AtomicMeasure {
        &self.base
    }

    pub fn eval(&self, z: UpperHalfPlanePoint) -> C64 {
        let w = C64::new(0.0, -1.0) * transforms::cauchy_unchecked(&self.base, z);
        (w - 1.0) / (w + 1.0)
    }

    /// `i(α + φ)/(α − φ)`: a Herglotz function whose imaginary part is `Pμ_α`.
    pub fn member_herglotz(&self, alpha: C64, z: UpperHalfPlanePoint) -> C64 {
        // Written in w = −iKν_0 to avoid forming α − φ when φ is close to α.
        let w = C64::new(0.0, -1.0) * transforms::cauchy_unchecked(&self.base, z);
        C64::new(0.0, 1.0) * (w * (alpha + 1.0) + (alpha - 1.0)) / (w * (alpha - 1.0) + (alpha + 1.0))
    }
}

/// `Pμ_α(z) = Re((α + φ)/(α − φ))`.
pub fn clark_member_poisson(cf: &CharFunction, alpha: CircleParam, z: UpperHalfPlanePoint) -> f64 {
    let phi = cf.eval(z);
    ((alpha.alpha + phi) / (alpha.alpha - phi)).re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Atom,
    NoAtom,
    SingularContinuousEvidence,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVerdict {
    pub kind: VerdictKind,
    /// `c·μ_α{x}`, which is `ν_λ{x}` when `α` comes from a coupling.
    pub mass: Option<f64>,
    /// Boundary behaviour of `φ` at `x`.
    pub phi_limit: BoundaryLimitResult,
    /// Boundary behaviour of `(φ(z) − α)/(z − x)`, when it was needed.
    pub quotient: Option<BoundaryLimitResult>,
}

impl SpectralVerdict {
    /// Growth of the last difference-quotient samples, `log2 |q_k|/|q_{k−1}|`; 0 when unused.
    pub fn evidence_rate(&self) -> f64 {
        match &self.quotient {
            Some(q) if q.evidence.len() >= 2 => {
                let n = q.evidence.len();
                let a = q.evidence[n - 2].1.norm();
                let b = q.evidence[n - 1].1.norm();
                if a > 0.0 && b > 0.0 {
                    (b / a).log2()
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }
}

/// Tolerances of the nontangential atom test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomTestConfig {
    /// `|φ(x) − α|` below this counts as `φ → α`.
    pub match_tol: f64,
    /// Ray for the difference quotient and the mass. It stops well above the
    /// rounding floor because `φ − α` carries absolute error near machine epsilon.
    pub quotient: LimitConfig,
    pub limit: LimitConfig,
}

impl Default for AtomTestConfig {
    fn default() -> Self {
        AtomTestConfig {
            match_tol: 1e-6,
            quotient: LimitConfig { steps: 22, tol: 1e-6, ..LimitConfig::default() },
            limit: LimitConfig::default(),
        }
    }
}

/// `μ_α{x} > 0` iff `φ → α` at `x` with a finite angular derivative.
pub fn atom_test_nontangential(cf: &CharFunction, alpha: CircleParam, x: f64) -> SpectralVerdict {
    atom_test_with(cf, alpha, x, &AtomTestConfig::default())
}

pub fn atom_test_with(cf: &CharFunction, alpha: CircleParam, x: f64, cfg: &AtomTestConfig) -> SpectralVerdict {
    let phi_limit = nontangential_limit(|z| cf.eval(z), x, &cfg.limit);
    let limit = match (phi_limit.kind, phi_limit.value) {
        (LimitKind::Converged, Some(v)) => v,
        _ => return SpectralVerdict { kind: VerdictKind::Undecided, mass: None, phi_limit, quotient: None },
    };
    if (limit - alpha.alpha).norm() > cfg.match_tol {
        return SpectralVerdict { kind: VerdictKind::NoAtom, mass: None, phi_limit, quotient: None };
    }
    let a = alpha.alpha;
    let quotient = nontangential_limit(|z| (cf.eval(z) - a) / C64::new(0.0, z.y), x, &cfg.quotient);
    let (kind, mass) = match quotient.kind {
        LimitKind::Converged => {
            match transforms::stieltjes_atom(|z| cf.member_herglotz(a, z), x, &cfg.quotient) {
                Ok(m) if m > 0.0 => (VerdictKind::Atom, Some(alpha.scale_c * m)),
                Ok(_) => (VerdictKind::NoAtom, None),
                Err(_) => (VerdictKind::Undecided, None),
            }
        }
        LimitKind::DivergesToPlusInf | LimitKind::DivergesToMinusInf => (VerdictKind::SingularContinuousEvidence, None),
        LimitKind::Undecided => (VerdictKind::Undecided, None),
    };
    SpectralVerdict { kind, mass, phi_limit, quotient: Some(quotient) }
}

/// Per-point verdicts for the `λ`-perturbed measure, evaluated in parallel.
pub fn classify_points(m0: &AtomicMeasure, lam: Coupling, xs: &[f64]) -> Result<Vec<(f64, SpectralVerdict)>> {
    let cf = CharFunction::new(m0.clone())?;
    let beta = coupling_to_circle(lam);
    Ok(xs.par_iter().map(|&x| (x, atom_test_nontangential(&cf, beta, x))).collect())
}
