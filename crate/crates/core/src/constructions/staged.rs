use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constructions::well_mixed::is_well_mixed;
use crate::error::{Error, Result};
use crate::measures::{Interval, IntervalSet};
use crate::phase_shift::{compare_shifts, exact_mu_mass, pair_from_shift, ratio_f64, PhaseShift, ShiftSign};
use crate::rank_one::Coupling;
use crate::transforms::{cauchy, cauchy_of_shift, UpperHalfPlanePoint};
use crate::C64;

/// Mass change of one pre-existing atom of `μ` across a stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDrift {
    pub location: f64,
    /// `μ_{k+1}{a} / μ_k{a}` from exact rational residues.
    pub exact_ratio: f64,
    /// `exp(p.v. ∫ (u_{k+1} − u_k)(a + t) dt/t / π)`.
    pub predicted_ratio: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub k: u32,
    pub b: f64,
    pub c: f64,
    pub shift: PhaseShift,
    /// `∫ |u_k − u_{k+1}| dx/|x − y|` at every earlier jump `y`.
    pub bound_values: Vec<(f64, f64)>,
    /// `2^{-(k+1)}`.
    pub bound_limit: f64,
    pub drifts: Vec<AtomDrift>,
    /// `2^{-k}`: every ratio must lie in `(1 − tol, 1 + tol)`.
    pub drift_tolerance: f64,
    pub halvings: u32,
}

impl StageReport {
    pub fn passes(&self) -> bool {
        self.bound_values.iter().all(|t| t.1 < self.bound_limit) && self.drifts.iter().all(|d| d.within_bound)
    }
}

fn all_jumps(u: &PhaseShift) -> Vec<f64> {
    let mut v = u.up_jumps();
    v.extend(u.down_jumps());
    v.sort_by(f64::total_cmp);
    v
}

/// Adds an up-jump at `b` and a down-jump at a nearby `c` in the same
/// constancy piece, with `|b − c|` halved until the change to `u` is small at
/// every earlier jump (twice below the required bound).
pub fn theorem_4_1_stage(u_k: &PhaseShift, b: f64, k: u32) -> Result<StageReport> {
    let set = u_k.intervals().ok_or_else(|| Error::InvalidShift("stages need an exact shift".into()))?;
    if u_k.sign() != ShiftSign::Positive {
        return Err(Error::Precondition("stages are built for positive couplings".into()));
    }
    if k == 0 || k > 50 {
        return Err(Error::Precondition(format!("stage index {k} outside 1..=50")));
    }
    if !b.is_finite() {
        return Err(Error::Precondition("b must be finite".into()));
    }
    let jumps = all_jumps(u_k);
    if jumps.contains(&b) {
        return Err(Error::Precondition(format!("{b} is already a jump point")));
    }
    let inside = set.contains(b);
    // Outside the support c goes right of b; inside, c goes left.
    let dir = if inside { -1.0 } else { 1.0 };
    let side_dist = jumps.iter().map(|&y| (y - b) * dir).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
    let nearest = jumps.iter().map(|&y| (y - b).abs()).fold(f64::INFINITY, f64::min);
    let room = if side_dist.is_finite() { side_dist } else if nearest.is_finite() { nearest } else { 1.0 };
    let target = 0.5f64.powi(k as i32 + 2);
    let bound_at = |c: f64| -> Vec<(f64, f64)> {
        jumps.iter().map(|&y| (y, PI * ((c - y).abs() / (b - y).abs()).ln().abs())).collect()
    };
    let mut h = room * 0.5f64.powi(k as i32 + 2);
    let mut halvings = 0;
    let mut c = b + dir * h;
    while bound_at(c).iter().any(|t| t.1 >= target) {
        h /= 2.0;
        halvings += 1;
        c = b + dir * h;
        if c == b {
            return Err(Error::Construction(format!("no admissible c next to {b}: the bound at earlier jumps cannot be met")));
        }
    }
    let mut ivs: Vec<Interval> = set.intervals().to_vec();
    if inside {
        let i = set.find(b).expect("b lies in the support");
        let iv = ivs.remove(i);
        ivs.push(Interval::new(iv.left, c));
        ivs.push(Interval::new(b, iv.right));
    } else {
        ivs.push(Interval::new(b, c));
    }
    let next = PhaseShift::exact(ShiftSign::Positive, IntervalSet::from_unsorted(ivs)?)?;
    let lam = Coupling::new(1.0)?;
    let drift_tolerance = 0.5f64.powi(k as i32);
    let mut drifts = Vec::new();
    for a in u_k.up_jumps() {
        let before = exact_mu_mass(u_k, lam, a)?;
        let after = exact_mu_mass(&next, lam, a)?;
        let exact_ratio = ratio_f64(&after, &before);
        let predicted_ratio = compare_shifts(&next, u_k, a)?.mu_density.unwrap_or(f64::NAN);
        let within_bound = (exact_ratio - 1.0).abs() < drift_tolerance && (predicted_ratio - 1.0).abs() < drift_tolerance;
        drifts.push(AtomDrift { location: a, exact_ratio, predicted_ratio, within_bound });
    }
    Ok(StageReport {
        k,
        b,
        c,
        shift: next,
        bound_values: bound_at(c),
        bound_limit: 2.0 * target,
        drifts,
        drift_tolerance,
        halvings,
    })
}

/// Largest violation of `exp(Ku) = 1 + πλKμ` and `exp(Ku)(1 − πλKν) = 1`
/// over the given points, with `(μ, ν)` taken from residues.
pub fn pair_residual(u: &PhaseShift, lambda: Coupling, points: &[UpperHalfPlanePoint]) -> Result<f64> {
    let pair = pair_from_shift(u, lambda)?;
    let one = C64::new(1.0, 0.0);
    let pl = PI * lambda.lambda;
    let mut worst: f64 = 0.0;
    for &z in points {
        let e = cauchy_of_shift(u, z).exp();
        let r1 = (e - (one + pl * cauchy(&pair.mu, z)?)).norm() / e.norm().max(1.0);
        let r2 = (e * (one - pl * cauchy(&pair.nu, z)?) - one).norm();
        worst = worst.max(r1).max(r2);
    }
    Ok(worst)
}

/// Whether the atoms of `μ` and `ν` at `λ = 1` are well-mixed.
pub fn atoms_well_mixed(u: &PhaseShift) -> Result<bool> {
    let pair = pair_from_shift(u, Coupling::new(1.0)?)?;
    Ok(is_well_mixed(&pair.mu.locations(), &pair.nu.locations())?.well_mixed)
}
