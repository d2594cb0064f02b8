//! The Krein spectral shift `u` of a rank-one pair and the pointwise criteria
//! built on it.
//!
//! With `Kμ` the Cauchy transform, the pair `(μ, ν)` of a coupling `λ` and the
//! shift `u` are tied together by
//!
//! ```text
//! 1 + πλ Kμ = exp(Ku) = (1 − πλ Kν)^(-1),      0 ≤ sign(λ)·u ≤ π.
//! ```
//!
//! For a piecewise-constant `u = ±π Σ χ(a_i, b_i)` the middle term is the
//! rational function `R(z) = Π (q_i − z)/(p_i − z)`, where `p_i` are the
//! upward jumps of `u` (atoms of `μ`) and `q_i` the downward jumps (atoms of
//! `ν`). Everything in this module reduces to residues of `R`.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Atom, AtomicMeasure, Interval, IntervalSet};
use crate::piecewise::{self, Piece};
use crate::rank_one::Coupling;
use crate::roots::{bisect, next_down, next_up};
use crate::transforms::{self, nontangential_limit, LimitConfig, LimitKind, PvKind, PvResult, UpperHalfPlanePoint};
use crate::C64;
use std::f64::consts::PI;

/// Sign convention of a shift: `u ∈ [0, π]` for `λ > 0`, `u ∈ [−π, 0]` for `λ < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftSign {
    Positive,
    Negative,
}

impl ShiftSign {
    pub fn factor(self) -> f64 {
        match self {
            ShiftSign::Positive => 1.0,
            ShiftSign::Negative => -1.0,
        }
    }

    pub fn of_lambda(lambda: f64) -> Result<Self> {
        if lambda > 0.0 {
            Ok(ShiftSign::Positive)
        } else if lambda < 0.0 {
            Ok(ShiftSign::Negative)
        } else {
            Err(Error::ZeroCoupling)
        }
    }

    pub fn from_int(s: i64) -> Result<Self> {
        match s {
            1 => Ok(ShiftSign::Positive),
            -1 => Ok(ShiftSign::Negative),
            _ => Err(Error::InvalidShift(format!("sign must be 1 or -1, got {s}"))),
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            ShiftSign::Positive => 1,
            ShiftSign::Negative => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftForm {
    /// `|u| = π` exactly on these intervals, 0 elsewhere.
    Exact(IntervalSet),
    /// Linear interpolation between samples, 0 outside `[xs[0], xs[n-1]]`.
    Sampled { xs: Vec<f64>, values: Vec<f64> },
}

/// A compactly supported phase shift.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShift {
    sign: ShiftSign,
    form: ShiftForm,
}

impl PhaseShift {
    /// Intervals must be separated: touching intervals would put a jump up and
    /// a jump down at the same point.
    pub fn exact(sign: ShiftSign, intervals: IntervalSet) -> Result<Self> {
        for w in intervals.intervals().windows(2) {
            if !(w[0].right < w[1].left) {
                return Err(Error::InvalidShift(format!(
                    "intervals ({}, {}) and ({}, {}) touch",
                    w[0].left, w[0].right, w[1].left, w[1].right
                )));
            }
        }
        Ok(PhaseShift { sign, form: ShiftForm::Exact(intervals) })
    }

    pub fn from_intervals(sign: ShiftSign, intervals: &[(f64, f64)]) -> Result<Self> {
        let set = IntervalSet::new(intervals.iter().map(|&(a, b)| Interval::new(a, b)).collect())?;
        Self::exact(sign, set)
    }

    pub fn zero(sign: ShiftSign) -> Self {
        PhaseShift { sign, form: ShiftForm::Exact(IntervalSet::empty()) }
    }

    pub fn sampled(sign: ShiftSign, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::InvalidShift("sample and value counts differ".into()));
        }
        for w in xs.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidShift("sample points must increase strictly".into()));
            }
        }
        for (&x, &v) in xs.iter().zip(&values) {
            if !x.is_finite() || !v.is_finite() {
                return Err(Error::InvalidShift("non-finite sample".into()));
            }
            if v.abs() > PI + 1e-9 || v * sign.factor() < -1e-9 {
                return Err(Error::InvalidShift(format!("value {v} at {x} is outside the allowed range")));
            }
        }
        Ok(PhaseShift { sign, form: ShiftForm::Sampled { xs, values } })
    }

    pub fn sign(&self) -> ShiftSign {
        self.sign
    }

    pub fn form(&self) -> &ShiftForm {
        &self.form
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.form, ShiftForm::Exact(_))
    }

    pub fn intervals(&self) -> Option<&IntervalSet> {
        match &self.form {
            ShiftForm::Exact(s) => Some(s),
            ShiftForm::Sampled { .. } => None,
        }
    }

    pub(crate) fn require_exact(&self) -> Result<&IntervalSet> {
        self.intervals()
            .ok_or_else(|| Error::InvalidShift("operation needs an exact (piecewise-constant) shift".into()))
    }

    /// `u(x)`; exact shifts vanish at their jump points.
    pub fn value(&self, x: f64) -> f64 {
        match &self.form {
            ShiftForm::Exact(set) => {
                if set.contains(x) {
                    self.sign.factor() * PI
                } else {
                    0.0
                }
            }
            ShiftForm::Sampled { xs, values } => interpolate(xs, values, x),
        }
    }

    /// Smallest closed interval outside which `u = 0`.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        match &self.form {
            ShiftForm::Exact(set) => {
                let ivs = set.intervals();
                Some((ivs.first()?.left, ivs.last()?.right))
            }
            ShiftForm::Sampled { xs, .. } => Some((*xs.first()?, *xs.last()?)),
        }
    }

    /// Points where an exact shift jumps upward (atoms of `μ`).
    pub fn up_jumps(&self) -> Vec<f64> {
        match (&self.form, self.sign) {
            (ShiftForm::Exact(s), ShiftSign::Positive) => s.intervals().iter().map(|iv| iv.left).collect(),
            (ShiftForm::Exact(s), ShiftSign::Negative) => s.intervals().iter().map(|iv| iv.right).collect(),
            _ => Vec::new(),
        }
    }

    /// Points where an exact shift jumps downward (atoms of `ν`).
    pub fn down_jumps(&self) -> Vec<f64> {
        match (&self.form, self.sign) {
            (ShiftForm::Exact(s), ShiftSign::Positive) => s.intervals().iter().map(|iv| iv.right).collect(),
            (ShiftForm::Exact(s), ShiftSign::Negative) => s.intervals().iter().map(|iv| iv.left).collect(),
            _ => Vec::new(),
        }
    }

    /// `x ↦ u(−x)`.
    pub fn reflect(&self) -> PhaseShift {
        let form = match &self.form {
            ShiftForm::Exact(set) => {
                let ivs = set.intervals().iter().rev().map(|iv| Interval::new(-iv.right, -iv.left)).collect();
                ShiftForm::Exact(IntervalSet::new(ivs).expect("reflection keeps intervals disjoint"))
            }
            ShiftForm::Sampled { xs, values } => ShiftForm::Sampled {
                xs: xs.iter().rev().map(|x| -x).collect(),
                values: values.iter().rev().copied().collect(),
            },
        };
        PhaseShift { sign: self.sign, form }
    }

    /// Breakpoints of `u` inside `(lo, hi)`, plus `lo` and `hi`.
    pub(crate) fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.form {
            ShiftForm::Exact(set) => {
                let ivs = set.intervals();
                let start = ivs.partition_point(|iv| iv.right <= lo);
                let end = ivs.partition_point(|iv| iv.left < hi);
                piecewise::breakpoints(lo, hi, ivs[start..end].iter().flat_map(|iv| [iv.left, iv.right]))
            }
            ShiftForm::Sampled { xs, .. } => {
                let start = xs.partition_point(|&x| x <= lo);
                let end = xs.partition_point(|&x| x < hi);
                piecewise::breakpoints(lo, hi, xs[start..end].iter().copied())
            }
        }
    }

    /// `(a, b)` with `u(y) = a + b·y` on a cell `[lo, hi]` free of breakpoints.
    pub(crate) fn line_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mid = 0.5 * (lo + hi);
        match &self.form {
            ShiftForm::Exact(_) => (self.value(mid), 0.0),
            ShiftForm::Sampled { xs, values } => {
                if xs.len() < 2 || mid <= xs[0] || mid >= xs[xs.len() - 1] {
                    return (0.0, 0.0);
                }
                let i = xs.partition_point(|&x| x <= mid) - 1;
                let slope = (values[i + 1] - values[i]) / (xs[i + 1] - xs[i]);
                (values[i] - slope * xs[i], slope)
            }
        }
    }

    /// Pieces of `t ↦ u(x + t)` on `[-w, w]`, split at `t = 0`.
    pub(crate) fn pieces_around(&self, x: f64, w: f64) -> Vec<Piece> {
        let mut br = self.breakpoints_in(x - w, x + w);
        br.push(x);
        br.sort_by(f64::total_cmp);
        br.dedup();
        piecewise::pieces_from(&br, |lo, hi| {
            let (a, b) = self.line_on(lo, hi);
            (a + b * x, b)
        })
        .into_iter()
        .map(|p| Piece { lo: p.lo - x, hi: p.hi - x, ..p })
        .collect()
    }
}

fn interpolate(xs: &[f64], values: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&p| p <= x);
    if i == 0 {
        return values[0];
    }
    if i == xs.len() {
        return values[i - 1];
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    values[i - 1] + t * (values[i] - values[i - 1])
}

/// `exp(Ku)(z)` for an exact shift: `Π (q_i − z)/(p_i − z)`.
pub fn exp_k_shift(u: &PhaseShift, z: UpperHalfPlanePoint) -> Result<C64> {
    u.require_exact()?;
    let z = z.to_c64();
    let prod = u
        .down_jumps()
        .iter()
        .zip(u.up_jumps())
        .fold(C64::new(1.0, 0.0), |acc, (&q, p)| acc * (q - z) / (p - z));
    Ok(prod)
}

/// `μ`, `ν` and the coupling they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePair {
    pub mu: AtomicMeasure,
    pub nu: AtomicMeasure,
    pub lambda: Coupling,
}

fn check_sign(u: &PhaseShift, lambda: Coupling) -> Result<()> {
    let s = ShiftSign::of_lambda(lambda.lambda)?;
    if s != u.sign() {
        return Err(Error::SignMismatch { lambda: lambda.lambda });
    }
    Ok(())
}

/// Residue masses of `R = Π (q_j − z)/(p_j − z)`:
/// `μ{p_i} = (q_i − p_i)/λ · Π_{j≠i} (q_j − p_i)/(p_j − p_i)` and symmetrically for `ν{q_i}`.
fn residue_masses(p: &[f64], q: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = p.len();
    let one_side = |poles: &[f64], zeros: &[f64], i: usize| -> f64 {
        let lead = (q[i] - p[i]) / lambda;
        let mut log_abs = 0.0;
        let mut negative = false;
        for j in 0..n {
            if j == i {
                continue;
            }
            // (zeros_j − x)/(poles_j − x) = 1 + (zeros_j − poles_j)/(poles_j − x)
            let r = (zeros[j] - poles[j]) / (poles[j] - poles[i]);
            let f = 1.0 + r;
            if f < 0.0 {
                negative = !negative;
            }
            log_abs += if r.abs() < 0.5 { r.ln_1p() } else { f.abs().ln() };
        }
        let m = lead * log_abs.exp();
        if negative {
            -m
        } else {
            m
        }
    };
    let mu = (0..n).map(|i| one_side(p, q, i)).collect();
    let nu = (0..n).map(|i| one_side(q, p, i)).collect();
    (mu, nu)
}

/// The pair `(μ, ν)` whose shift is `u`, by residues of `exp(Ku)`.
pub fn pair_from_shift(u: &PhaseShift, lambda: Coupling) -> Result<MeasurePair> {
    u.require_exact()?;
    check_sign(u, lambda)?;
    let p = u.up_jumps();
    let q = u.down_jumps();
    let (mu_w, nu_w) = residue_masses(&p, &q, lambda.lambda);
    let build = |locs: &[f64], ws: Vec<f64>| -> Result<AtomicMeasure> {
        let mut atoms: Vec<Atom> = locs.iter().zip(ws).map(|(&x, w)| Atom::new(x, w)).collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        AtomicMeasure::with_tolerance(atoms, 0.0, 0.0)
    };
    Ok(MeasurePair { mu: build(&p, mu_w)?, nu: build(&q, nu_w)?, lambda })
}

/// Exact rational atoms `(location, mass)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPair {
    pub mu: Vec<(BigRational, BigRational)>,
    pub nu: Vec<(BigRational, BigRational)>,
}

impl ExactPair {
    pub fn mu_f64(&self) -> Vec<(f64, f64)> {
        to_f64_pairs(&self.mu)
    }

    pub fn nu_f64(&self) -> Vec<(f64, f64)> {
        to_f64_pairs(&self.nu)
    }
}

fn to_f64_pairs(v: &[(BigRational, BigRational)]) -> Vec<(f64, f64)> {
    v.iter()
        .map(|(x, w)| (x.to_f64().unwrap_or(f64::NAN), w.to_f64().unwrap_or(f64::NAN)))
        .collect()
}

pub(crate) fn rational(x: f64) -> BigRational {
    // Every finite double is a dyadic rational, so this conversion is exact.
    BigRational::from_float(x).expect("finite value")
}

/// [`pair_from_shift`] in exact rational arithmetic on the (dyadic) endpoints.
pub fn pair_from_shift_exact(u: &PhaseShift, lambda: Coupling) -> Result<ExactPair> {
    u.require_exact()?;
    check_sign(u, lambda)?;
    let lam = rational(lambda.lambda);
    let p: Vec<BigRational> = u.up_jumps().into_iter().map(rational).collect();
    let q: Vec<BigRational> = u.down_jumps().into_iter().map(rational).collect();
    let side = |poles: &[BigRational], zeros: &[BigRational]| -> Vec<(BigRational, BigRational)> {
        (0..poles.len())
            .map(|i| {
                let mut m = (&zeros[i] - &poles[i]) / &lam;
                for j in 0..poles.len() {
                    if j != i {
                        m *= (&zeros[j] - &poles[i]) / (&poles[j] - &poles[i]);
                    }
                }
                (poles[i].clone(), m.abs())
            })
            .collect()
    };
    let mut mu = side(&p, &q);
    let mut nu = side(&q, &p);
    mu.sort_by(|a, b| a.0.cmp(&b.0));
    nu.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ExactPair { mu, nu })
}

/// `1 + λ Σ w/(t − x)`, the boundary value of `1 + πλKμ` off the atoms.
fn secular(m: &AtomicMeasure, lambda: f64, x: f64) -> f64 {
    1.0 + lambda * m.atoms().iter().map(|a| a.mass / (a.location - x)).sum::<f64>()
}

/// Roots of the secular function, one per bracket, returned with the atom
/// they pair with. For `λ > 0` root `i` lies right of atom `i`; for `λ < 0`
/// it lies left of it.
pub(crate) fn secular_roots(m: &AtomicMeasure, lambda: f64) -> Result<Vec<(f64, f64)>> {
    m.require_compact()?;
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::ZeroCoupling);
    }
    let t = m.locations();
    let n = t.len();
    let total = m.total_mass();
    let f = |x: f64| secular(m, lambda, x);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if lambda > 0.0 {
            let hi = if i + 1 < n { t[i + 1] } else { t[i] + lambda * total + 1.0 };
            (next_up(t[i]), if i + 1 < n { next_down(hi) } else { hi })
        } else {
            let lo = if i > 0 { t[i - 1] } else { t[0] + lambda * total - 1.0 };
            (if i > 0 { next_up(lo) } else { lo }, next_down(t[i]))
        };
        let r = bisect(f, lo, hi, 0.0)?;
        out.push((t[i], r));
    }
    Ok(out)
}

/// The exact shift of `(μ, λ)`: jumps at the atoms of `μ` and at the roots of
/// `1 + λ Σ w/(t − x)`.
pub fn exact_shift_from_pair(m: &AtomicMeasure, lambda: Coupling) -> Result<PhaseShift> {
    let sign = ShiftSign::of_lambda(lambda.lambda)?;
    if m.is_empty() {
        m.require_compact()?;
        return Ok(PhaseShift::zero(sign));
    }
    let roots = secular_roots(m, lambda.lambda)?;
    let ivs = roots
        .into_iter()
        .map(|(t, r)| if lambda.lambda > 0.0 { Interval::new(t, r) } else { Interval::new(r, t) })
        .collect();
    PhaseShift::exact(sign, IntervalSet::new(ivs)?)
}

/// A sampled shift together with the grid points that could not be used.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledShift {
    pub shift: PhaseShift,
    pub skipped: Vec<f64>,
}

/// `u = arg(1 + πλKμ)` sampled on `grid` through vertical boundary limits.
///
/// Points within `1e-9` of an atom, and points where the limit is undecided or
/// vanishes, are skipped.
pub fn shift_from_pair(m: &AtomicMeasure, lambda: Coupling, grid: &[f64], cfg: &LimitConfig) -> Result<SampledShift> {
    m.require_compact()?;
    let sign = ShiftSign::of_lambda(lambda.lambda)?;
    let mut pts: Vec<f64> = grid.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let locs = m.locations();
    let near_atom = |x: f64| {
        let i = locs.partition_point(|&t| t < x);
        (i < locs.len() && locs[i] - x <= 1e-9) || (i > 0 && x - locs[i - 1] <= 1e-9)
    };
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for x in pts {
        if near_atom(x) {
            skipped.push(x);
            continue;
        }
        let res = nontangential_limit(
            |z| C64::new(1.0, 0.0) + PI * lambda.lambda * transforms::cauchy_unchecked(m, z),
            x,
            cfg,
        );
        match (res.kind, res.value) {
            (LimitKind::Converged, Some(v)) if v.norm() > 1e-12 => {
                let arg = v.arg().abs();
                xs.push(x);
                values.push(sign.factor() * arg);
            }
            _ => skipped.push(x),
        }
    }
    Ok(SampledShift { shift: PhaseShift::sampled(sign, xs, values)?, skipped })
}

/// Verdict of a pointwise atom criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomVerdict {
    Atom,
    NoAtom,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub verdict: AtomVerdict,
    /// The value of the integral when it converges.
    pub value: Option<f64>,
    /// `(ε, truncated integral)` over a geometric sequence of ε.
    pub partials: Vec<(f64, f64)>,
}

/// `∫_{[-1,1] \ (-ε,ε)} (ref(t) − u(x+t)) / t dt` with `ref = left` on `t < 0`
/// and `right` on `t > 0`, multiplied by `orientation`.
fn criterion(u: &PhaseShift, x: f64, left: f64, right: f64, orientation: f64, cfg: &LimitConfig) -> CriterionResult {
    let pieces: Vec<Piece> = u
        .pieces_around(x, 1.0)
        .into_iter()
        .map(|p| {
            let r = if p.hi <= 0.0 { left } else { right };
            Piece { a: orientation * (r - p.a), b: -orientation * p.b, ..p }
        })
        .collect();
    let pv = transforms::pv_of_pieces(&pieces, 1.0, u.is_exact(), cfg);
    let verdict = match pv.kind {
        PvKind::Finite => AtomVerdict::Atom,
        PvKind::PlusInf | PvKind::MinusInf => AtomVerdict::NoAtom,
        PvKind::Undecided => AtomVerdict::Undecided,
    };
    CriterionResult { verdict, value: pv.value, partials: pv.partials }
}

/// Point-mass test for `μ` at `x`: finiteness of
/// `∫_{x−1}^{x+1} (πχ(x, x+1) − u(y)) dy/(y − x)` (mirrored for `λ < 0`).
pub fn atom_criterion_mu(u: &PhaseShift, x: f64) -> CriterionResult {
    atom_criterion_mu_with(u, x, &LimitConfig::default())
}

pub fn atom_criterion_mu_with(u: &PhaseShift, x: f64, cfg: &LimitConfig) -> CriterionResult {
    match u.sign() {
        ShiftSign::Positive => criterion(u, x, 0.0, PI, 1.0, cfg),
        ShiftSign::Negative => criterion(u, x, -PI, 0.0, 1.0, cfg),
    }
}

/// Point-mass test for `ν` at `x`: finiteness of
/// `∫_{x−1}^{x+1} (πχ(x−1, x) − u(y)) dy/(x − y)` (mirrored for `λ < 0`).
pub fn atom_criterion_nu(u: &PhaseShift, x: f64) -> CriterionResult {
    atom_criterion_nu_with(u, x, &LimitConfig::default())
}

pub fn atom_criterion_nu_with(u: &PhaseShift, x: f64, cfg: &LimitConfig) -> CriterionResult {
    match u.sign() {
        ShiftSign::Positive => criterion(u, x, PI, 0.0, -1.0, cfg),
        ShiftSign::Negative => criterion(u, x, 0.0, -PI, -1.0, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportSide {
    MuSide,
    NuSide,
    Neither,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportReport {
    pub side: SupportSide,
    pub pv: PvResult,
}

/// Sign of `p.v. ∫ u(x+t) dt/t`: `+∞` on the singular support of `μ`, `−∞` on that of `ν`.
pub fn singular_support_test(u: &PhaseShift, x: f64) -> SupportReport {
    let window = match u.support_hull() {
        Some((lo, hi)) => (x - lo).abs().max((hi - x).abs()) + 1.0,
        None => 1.0,
    };
    let pv = transforms::pv_integral(u, x, window, &LimitConfig::default());
    let side = match pv.kind {
        PvKind::Finite => SupportSide::Neither,
        PvKind::PlusInf => SupportSide::MuSide,
        PvKind::MinusInf => SupportSide::NuSide,
        PvKind::Undecided => SupportSide::Undecided,
    };
    SupportReport { side, pv }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    /// Whether `|u| ∈ {0, π}` almost everywhere on the region.
    pub singular: bool,
    /// Exact: Lebesgue measure of `{|u| ∉ {0, π}}` (always 0). Sampled: fraction of samples.
    pub bad_fraction: f64,
    pub samples: usize,
}

/// Whether `μ` and `ν` restricted to `region` are singular, judged by `|u| ∈ {0, π}`.
pub fn singularity_region_test(u: &PhaseShift, region: &IntervalSet, tol: f64) -> RegionReport {
    match u.form() {
        ShiftForm::Exact(_) => RegionReport { singular: true, bad_fraction: 0.0, samples: 0 },
        ShiftForm::Sampled { xs, values } => {
            let mut n = 0usize;
            let mut bad = 0usize;
            for (&x, &v) in xs.iter().zip(values) {
                if region.contains(x) {
                    n += 1;
                    let a = v.abs();
                    if a.min((PI - a).abs()) > tol {
                        bad += 1;
                    }
                }
            }
            let frac = if n == 0 { 0.0 } else { bad as f64 / n as f64 };
            RegionReport { singular: bad == 0, bad_fraction: frac, samples: n }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftComparison {
    /// `p.v. ∫ (u1 − u2)(x + t) dt/t`.
    pub pv: PvResult,
    /// `f(x) = pv / π` when finite.
    pub exponent: Option<f64>,
    /// Predicted `μ1{x} / μ2{x} = e^f`.
    pub mu_density: Option<f64>,
    /// Predicted `ν1{x} / ν2{x} = e^{−f}`.
    pub nu_density: Option<f64>,
    pub mu_atoms: (AtomVerdict, AtomVerdict),
    pub nu_atoms: (AtomVerdict, AtomVerdict),
}

/// Relative behaviour of two pairs at `x` through the difference of their shifts.
pub fn compare_shifts(u1: &PhaseShift, u2: &PhaseShift, x: f64) -> Result<ShiftComparison> {
    u1.require_exact()?;
    u2.require_exact()?;
    let window = [u1.support_hull(), u2.support_hull()]
        .into_iter()
        .flatten()
        .map(|(lo, hi)| (x - lo).abs().max((hi - x).abs()))
        .fold(0.0, f64::max)
        + 1.0;
    let mut br = u1.breakpoints_in(x - window, x + window);
    br.extend(u2.breakpoints_in(x - window, x + window));
    let br = piecewise::breakpoints(x - window, x + window, br.into_iter().chain([x]));
    let pieces: Vec<Piece> = piecewise::pieces_from(&br, |lo, hi| {
        let mid = 0.5 * (lo + hi);
        (u1.value(mid) - u2.value(mid), 0.0)
    })
    .into_iter()
    .map(|p| Piece { lo: p.lo - x, hi: p.hi - x, ..p })
    .collect();
    let cfg = LimitConfig::default();
    let pv = transforms::pv_of_pieces(&pieces, window, true, &cfg);
    let exponent = pv.value.map(|v| v / PI);
    Ok(ShiftComparison {
        exponent,
        mu_density: exponent.map(f64::exp),
        nu_density: exponent.map(|f| (-f).exp()),
        mu_atoms: (atom_criterion_mu(u1, x).verdict, atom_criterion_mu(u2, x).verdict),
        nu_atoms: (atom_criterion_nu(u1, x).verdict, atom_criterion_nu(u2, x).verdict),
        pv,
    })
}

/// Exact residue mass of `μ` at an up-jump `x` of `u`, or 0.
pub(crate) fn exact_mu_mass(u: &PhaseShift, lambda: Coupling, x: f64) -> Result<BigRational> {
    let pair = pair_from_shift_exact(u, lambda)?;
    let xr = rational(x);
    Ok(pair.mu.into_iter().find(|(l, _)| *l == xr).map(|(_, m)| m).unwrap_or_else(BigRational::zero))
}

pub(crate) fn ratio_f64(a: &BigRational, b: &BigRational) -> f64 {
    if b.is_zero() {
        return f64::NAN;
    }
    (a / b).to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam(l: f64) -> Coupling {
        Coupling::new(l).unwrap()
    }

    fn unit() -> PhaseShift {
        PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0)]).unwrap()
    }

    fn z(x: f64, y: f64) -> UpperHalfPlanePoint {
        UpperHalfPlanePoint::new(x, y).unwrap()
    }

    #[test]
    fn exp_k_single_and_double() {
        let v = exp_k_shift(&unit(), z(0.0, 1.0)).unwrap();
        assert!((v - C64::new(1.0, 1.0)).norm() < 1e-15);
        let two = PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let i = C64::new(0.0, 1.0);
        let want = ((1.0 - i) / (-i)) * ((3.0 - i) / (2.0 - i));
        assert!((exp_k_shift(&two, z(0.0, 1.0)).unwrap() - want).norm() < 1e-15);
        assert_eq!(exp_k_shift(&PhaseShift::zero(ShiftSign::Positive), z(0.3, 0.2)).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn single_interval_pair() {
        for &(x, y) in &[(0.0, 1.0), (0.25, 0.75), (-1.0, 3.0)] {
            let u = PhaseShift::from_intervals(ShiftSign::Positive, &[(x, y)]).unwrap();
            let pair = pair_from_shift(&u, lam(1.0)).unwrap();
            assert_eq!(pair.mu.atoms(), &[Atom::new(x, y - x)]);
            assert_eq!(pair.nu.atoms(), &[Atom::new(y, y - x)]);
            let ex = pair_from_shift_exact(&u, lam(1.0)).unwrap();
            assert_eq!(ex.mu, vec![(rational(x), rational(y - x))]);
            assert_eq!(ex.nu, vec![(rational(y), rational(y - x))]);
        }
    }

    #[test]
    fn empty_shift_gives_empty_pair() {
        let pair = pair_from_shift(&PhaseShift::zero(ShiftSign::Positive), lam(0.7)).unwrap();
        assert!(pair.mu.is_empty() && pair.nu.is_empty());
    }

    #[test]
    fn sign_mismatch_rejected() {
        assert_eq!(pair_from_shift(&unit(), lam(-1.0)).unwrap_err(), Error::SignMismatch { lambda: -1.0 });
    }

    #[test]
    fn touching_intervals_rejected() {
        assert!(PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn exact_shift_of_dirac() {
        let m = AtomicMeasure::dirac(0.0, 1.0).unwrap();
        let u = exact_shift_from_pair(&m, lam(1.0)).unwrap();
        let iv = u.intervals().unwrap().intervals()[0];
        assert_eq!(iv.left, 0.0);
        assert!((iv.right - 1.0).abs() < 1e-15);
        let v = exact_shift_from_pair(&m, lam(-1.0)).unwrap();
        let iv = v.intervals().unwrap().intervals()[0];
        assert!((iv.left + 1.0).abs() < 1e-15);
        assert_eq!(iv.right, 0.0);
    }

    #[test]
    fn sampled_shift_of_dirac() {
        let m = AtomicMeasure::dirac(0.0, 1.0).unwrap();
        let grid = [-0.5, 0.0, 0.25, 0.5, 0.75, 1.5];
        let s = shift_from_pair(&m, lam(1.0), &grid, &LimitConfig::default()).unwrap();
        assert_eq!(s.skipped, vec![0.0]);
        let ShiftForm::Sampled { xs, values } = s.shift.form() else { panic!() };
        assert_eq!(xs, &vec![-0.5, 0.25, 0.5, 0.75, 1.5]);
        let want = [0.0, PI, PI, PI, 0.0];
        for (v, w) in values.iter().zip(want) {
            assert!((v - w).abs() < 1e-9, "{values:?}");
        }
    }

    #[test]
    fn criteria_on_unit_interval() {
        let u = unit();
        assert_eq!(atom_criterion_mu(&u, 0.0).verdict, AtomVerdict::Atom);
        assert_eq!(atom_criterion_mu(&u, 0.0).value, Some(0.0));
        assert_eq!(atom_criterion_mu(&u, 0.5).verdict, AtomVerdict::NoAtom);
        assert_eq!(atom_criterion_mu(&u, 1.0).verdict, AtomVerdict::NoAtom);
        assert_eq!(atom_criterion_nu(&u, 1.0).verdict, AtomVerdict::Atom);
        assert_eq!(atom_criterion_nu(&u, 0.0).verdict, AtomVerdict::NoAtom);
        let empty = PhaseShift::zero(ShiftSign::Positive);
        assert_eq!(atom_criterion_nu(&empty, 0.3).verdict, AtomVerdict::NoAtom);
    }

    #[test]
    fn criteria_negative_sign() {
        let u = PhaseShift::from_intervals(ShiftSign::Negative, &[(-1.0, 0.0)]).unwrap();
        // λ = -1: μ = δ_0, ν = δ_{-1}.
        assert_eq!(atom_criterion_mu(&u, 0.0).verdict, AtomVerdict::Atom);
        assert_eq!(atom_criterion_nu(&u, -1.0).verdict, AtomVerdict::Atom);
        assert_eq!(atom_criterion_mu(&u, -1.0).verdict, AtomVerdict::NoAtom);
        assert_eq!(atom_criterion_nu(&u, 0.0).verdict, AtomVerdict::NoAtom);
    }

    #[test]
    fn support_sides() {
        let u = unit();
        assert_eq!(singular_support_test(&u, 0.0).side, SupportSide::MuSide);
        assert_eq!(singular_support_test(&u, 1.0).side, SupportSide::NuSide);
        assert_eq!(singular_support_test(&u, 5.0).side, SupportSide::Neither);
    }

    #[test]
    fn region_test() {
        let k = IntervalSet::new(vec![Interval::new(0.0, 1.0)]).unwrap();
        assert!(singularity_region_test(&unit(), &k, 1e-6).singular);
        let s = PhaseShift::sampled(ShiftSign::Positive, vec![0.1, 0.2, 0.3], vec![PI, PI / 2.0, 0.0]).unwrap();
        let r = singularity_region_test(&s, &k, 1e-6);
        assert!(!r.singular);
        assert!((r.bad_fraction - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn compare_density_half() {
        let u1 = unit();
        let u2 = PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 2.0)]).unwrap();
        let c = compare_shifts(&u1, &u2, 0.0).unwrap();
        assert!((c.exponent.unwrap() + 2f64.ln()).abs() < 1e-14);
        let m1 = exact_mu_mass(&u1, lam(1.0), 0.0).unwrap();
        let m2 = exact_mu_mass(&u2, lam(1.0), 0.0).unwrap();
        assert!((ratio_f64(&m1, &m2) - c.mu_density.unwrap()).abs() < 1e-14);
        let same = compare_shifts(&u1, &u1, 0.0).unwrap();
        assert_eq!(same.exponent, Some(0.0));
    }

    #[test]
    fn compare_without_common_atom() {
        let u1 = unit();
        let u2 = PhaseShift::from_intervals(ShiftSign::Positive, &[(2.0, 3.0)]).unwrap();
        let c = compare_shifts(&u1, &u2, 0.0).unwrap();
        assert_eq!(c.mu_atoms, (AtomVerdict::Atom, AtomVerdict::NoAtom));
        assert!(c.exponent.is_none());
    }

    fn arb_shift(max: usize) -> impl Strategy<Value = PhaseShift> {
        proptest::collection::vec(0.0f64..1.0, 2..=2 * max).prop_filter_map("separated endpoints", |mut v| {
            v.sort_by(f64::total_cmp);
            if v.len() % 2 == 1 {
                v.pop();
            }
            if v.windows(2).any(|w| w[1] - w[0] < 1e-3) {
                return None;
            }
            let ivs: Vec<(f64, f64)> = v.chunks(2).map(|c| (c[0], c[1])).collect();
            PhaseShift::from_intervals(ShiftSign::Positive, &ivs).ok()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn resolvent_identity_holds(u in arb_shift(15), l in prop_oneof![Just(0.5), Just(1.0), Just(2.0)]) {
            let pair = pair_from_shift(&u, lam(l)).unwrap();
            prop_assert!(pair.mu.validate().is_ok() && pair.nu.validate().is_ok());
            for &(x, y) in &[(0.3, 0.5), (-0.2, 1.0), (0.9, 0.05), (2.0, 3.0)] {
                let zz = z(x, y);
                let r = exp_k_shift(&u, zz).unwrap();
                let km = transforms::cauchy(&pair.mu, zz).unwrap();
                let kn = transforms::cauchy(&pair.nu, zz).unwrap();
                let one = C64::new(1.0, 0.0);
                prop_assert!((r - (one + PI * l * km)).norm() < 1e-10 * r.norm().max(1.0));
                prop_assert!((r * (one - PI * l * kn) - one).norm() < 1e-10 * r.norm().max(1.0));
            }
        }

        #[test]
        fn shift_roundtrip(u in arb_shift(15), l in prop_oneof![Just(0.5), Just(1.0), Just(2.0)]) {
            let pair = pair_from_shift(&u, lam(l)).unwrap();
            let back = exact_shift_from_pair(&pair.mu, lam(l)).unwrap();
            let a = u.intervals().unwrap().endpoints();
            let b = back.intervals().unwrap().endpoints();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() < 1e-9, "{a:?} vs {b:?}");
            }
        }

        #[test]
        fn criteria_find_exactly_the_jumps(u in arb_shift(15)) {
            let pair = pair_from_shift(&u, lam(1.0)).unwrap();
            for x in u.up_jumps() {
                prop_assert_eq!(atom_criterion_mu(&u, x).verdict, AtomVerdict::Atom);
                prop_assert_eq!(atom_criterion_nu(&u, x).verdict, AtomVerdict::NoAtom);
            }
            for x in u.down_jumps() {
                prop_assert_eq!(atom_criterion_nu(&u, x).verdict, AtomVerdict::Atom);
                prop_assert_eq!(atom_criterion_mu(&u, x).verdict, AtomVerdict::NoAtom);
            }
            prop_assert!(pair.mu.masses().iter().chain(pair.nu.masses().iter()).all(|&w| w > 0.0));
        }

        #[test]
        fn pv_reflection(u in arb_shift(8), x in -0.5f64..1.5) {
            let cfg = LimitConfig::default();
            let a = transforms::pv_integral(&u, x, 3.0, &cfg);
            let b = transforms::pv_integral(&u.reflect(), -x, 3.0, &cfg);
            match (a.value, b.value) {
                (Some(p), Some(q)) => prop_assert!((p + q).abs() < 1e-12 * p.abs().max(1.0)),
                _ => {
                    let flip = |k: PvKind| match k {
                        PvKind::PlusInf => PvKind::MinusInf,
                        PvKind::MinusInf => PvKind::PlusInf,
                        k => k,
                    };
                    prop_assert_eq!(a.kind, flip(b.kind));
                }
            }
        }

        #[test]
        fn mass_identity_at_i(u in arb_shift(10)) {
            let pair = pair_from_shift(&u, lam(1.0)).unwrap();
            let r = exp_k_shift(&u, z(0.0, 1.0)).unwrap();
            let p = transforms::poisson(&pair.mu, z(0.0, 1.0));
            prop_assert!((r.im - PI * p).abs() < 1e-12);
        }
    }
}
