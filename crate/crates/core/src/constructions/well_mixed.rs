use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::{Interval, IntervalSet};
use crate::phase_shift::{atom_criterion_mu, pair_from_shift, CriterionResult, PhaseShift, ShiftSign};
use crate::rank_one::Coupling;

/// Outcome of the well-mixed test with the first violated condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellMixedReport {
    pub well_mixed: bool,
    pub violation: Option<String>,
}

fn sorted_finite(v: &[f64], name: &str) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(format!("sequence {name} has a non-finite entry")));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition(format!("sequence {name} repeats a point")));
    }
    Ok(s)
}

fn first_gap_violation(own: &[f64], other: &[f64], label: &str) -> Option<String> {
    for w in own.windows(2) {
        if !other.iter().any(|&t| w[0] < t && t < w[1]) {
            return Some(format!("({}, {}) contains no {label}", w[0], w[1]));
        }
    }
    if own.len() >= 2 {
        let (lo, hi) = (own[0], own[own.len() - 1]);
        if !other.iter().any(|&t| t < lo || t > hi) {
            return Some(format!("no {label} lies outside [{lo}, {hi}]"));
        }
    }
    None
}

/// Between any two points of one set, and outside their closed span, lies a
/// point of the other. Consecutive pairs and the extreme pair suffice.
pub fn is_well_mixed(a: &[f64], b: &[f64]) -> Result<WellMixedReport> {
    let a = sorted_finite(a, "a")?;
    let b = sorted_finite(b, "b")?;
    if let Some(x) = a.iter().find(|x| b.binary_search_by(|t| t.total_cmp(x)).is_ok()) {
        return Err(Error::Precondition(format!("sequences share the point {x}")));
    }
    let violation = first_gap_violation(&a, &b, "b").or_else(|| first_gap_violation(&b, &a, "a"));
    Ok(WellMixedReport { well_mixed: violation.is_none(), violation })
}

/// Two disjoint, sorted, well-mixed finite sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellMixedPair {
    seq_a: Vec<f64>,
    seq_b: Vec<f64>,
}

impl WellMixedPair {
    pub fn new(a: &[f64], b: &[f64]) -> Result<Self> {
        let report = is_well_mixed(a, b)?;
        if let Some(v) = report.violation {
            return Err(Error::NotWellMixed(v));
        }
        Ok(WellMixedPair { seq_a: sorted_finite(a, "a")?, seq_b: sorted_finite(b, "b")? })
    }

    pub fn a(&self) -> &[f64] {
        &self.seq_a
    }

    pub fn b(&self) -> &[f64] {
        &self.seq_b
    }
}

/// The compactly supported `{0, ±π}` shift jumping up at every `a` and down at
/// every `b`. When the merged order starts with a `b` the shift is `−π` on
/// `(b_i, a_i)` and belongs to negative couplings.
pub fn build_interleaved_shift(pair: &WellMixedPair) -> Result<PhaseShift> {
    let mut merged: Vec<(f64, bool)> = pair.a().iter().map(|&x| (x, true)).collect();
    merged.extend(pair.b().iter().map(|&x| (x, false)));
    merged.sort_by(|p, q| p.0.total_cmp(&q.0));
    if merged.is_empty() {
        return Ok(PhaseShift::zero(ShiftSign::Positive));
    }
    if pair.a().len() != pair.b().len() || merged.windows(2).any(|w| w[0].1 == w[1].1) {
        return Err(Error::Construction(
            "no compactly supported shift: the points do not alternate with equal counts".into(),
        ));
    }
    let sign = if merged[0].1 { ShiftSign::Positive } else { ShiftSign::Negative };
    let ivs = merged.chunks(2).map(|c| Interval::new(c[0].0, c[1].0)).collect();
    PhaseShift::exact(sign, IntervalSet::new(ivs)?)
}

/// Truncation of the dyadic two-sided example around 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Example52 {
    pub n: usize,
    /// `a_k = (−1)^k / 2^k`, `k = 1..n`.
    pub a: Vec<f64>,
    /// `b_1 = −1`, `b_k = a_{k−1} + (−1)^k / 4^k`, `k = 1..n`.
    pub b: Vec<f64>,
    pub well_mixed: WellMixedReport,
    /// The shift forced by the jump rules, closed off at 0: up-jumps at
    /// `a_1..a_n, 0`, down-jumps at `b_1..b_{n+1}`. Negative sign.
    pub shift: PhaseShift,
    /// Point-mass criterion for `μ` at 0.
    pub criterion: CriterionResult,
    /// The value the criterion should take: `−π Σ_{k=2}^{n+1} ln(1 − 2^{−(k+1)})`.
    pub expected: f64,
    /// The untruncated integral `−π ln Π_{j≥3}(1 − 2^{−j})`.
    pub bound: f64,
    /// `μ{0}` from the residues of the closed shift at `λ = −1`.
    pub mass_at_zero: f64,
}

fn dyadic_a(k: usize) -> f64 {
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    s * 0.5f64.powi(k as i32)
}

fn dyadic_b(k: usize) -> f64 {
    if k == 1 {
        return -1.0;
    }
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    dyadic_a(k - 1) + s * 0.25f64.powi(k as i32)
}

fn gap_term(k: usize) -> f64 {
    // b_k sits 4^{-k} from a_{k-1} on the side of 0: the relative gap is 2^{-(k+1)}.
    -PI * (-(0.5f64.powi(k as i32 + 1))).ln_1p()
}

pub fn example_5_2(n: usize) -> Result<Example52> {
    if n < 2 {
        return Err(Error::Precondition("the example needs n >= 2".into()));
    }
    if n > 24 {
        return Err(Error::Precondition("n > 24 exhausts double precision for the b points".into()));
    }
    let a: Vec<f64> = (1..=n).map(dyadic_a).collect();
    let b: Vec<f64> = (1..=n).map(dyadic_b).collect();
    let well_mixed = is_well_mixed(&a, &b)?;
    let mut ups = a.clone();
    ups.push(0.0);
    let downs: Vec<f64> = (1..=n + 1).map(dyadic_b).collect();
    let shift = build_interleaved_shift(&WellMixedPair::new(&ups, &downs)?)?;
    let criterion = atom_criterion_mu(&shift, 0.0);
    let expected = (2..=n + 1).map(gap_term).sum();
    let bound = (2..200).map(gap_term).sum();
    let pair = pair_from_shift(&shift, Coupling::new(-1.0)?)?;
    let mass_at_zero = pair.mu.atoms().iter().find(|t| t.location == 0.0).map(|t| t.mass).unwrap_or(0.0);
    Ok(Example52 { n, a, b, well_mixed, shift, criterion, expected, bound, mass_at_zero })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_shift::{pair_from_shift_exact, AtomVerdict};
    use proptest::prelude::*;

    #[test]
    fn definition_examples() {
        assert!(is_well_mixed(&[0.0, 2.0], &[1.0, 3.0]).unwrap().well_mixed);
        let r = is_well_mixed(&[0.0, 1.0], &[2.0, 3.0]).unwrap();
        assert!(!r.well_mixed);
        assert_eq!(r.violation.as_deref(), Some("(0, 1) contains no b"));
        assert!(is_well_mixed(&[0.0], &[0.0]).is_err());
    }

    #[test]
    fn interleaved_shift_examples() {
        let u = build_interleaved_shift(&WellMixedPair::new(&[0.0, 2.0], &[1.0, 3.0]).unwrap()).unwrap();
        assert_eq!(u, PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0), (2.0, 3.0)]).unwrap());
        let u = build_interleaved_shift(&WellMixedPair::new(&[0.0], &[1.0]).unwrap()).unwrap();
        assert_eq!(u, PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0)]).unwrap());
        let u = build_interleaved_shift(&WellMixedPair::new(&[0.0, 2.0], &[1.0, 3.0]).unwrap()).unwrap();
        let p = pair_from_shift_exact(&u, Coupling::new(1.0).unwrap()).unwrap();
        assert_eq!(p.mu_f64().iter().map(|t| t.0).collect::<Vec<_>>(), vec![0.0, 2.0]);
        assert_eq!(p.nu_f64().iter().map(|t| t.0).collect::<Vec<_>>(), vec![1.0, 3.0]);
        let u = build_interleaved_shift(&WellMixedPair::new(&[1.0, 3.0], &[0.0, 2.0]).unwrap()).unwrap();
        assert_eq!(u.sign(), ShiftSign::Negative);
    }

    #[test]
    fn dyadic_example() {
        for n in 2..=20 {
            let e = example_5_2(n).unwrap();
            assert!(e.well_mixed.well_mixed, "n = {n}: {:?}", e.well_mixed.violation);
            let mut all = e.a.clone();
            all.extend(&e.b);
            all.sort_by(f64::total_cmp);
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
        let mut prev = 0.0;
        for n in 2..=10 {
            let e = example_5_2(n).unwrap();
            assert_eq!(e.criterion.verdict, AtomVerdict::Atom);
            let v = e.criterion.value.unwrap();
            assert!((v - e.expected).abs() < 1e-12, "n = {n}: {v} vs {}", e.expected);
            assert!(v > prev && v < e.bound);
            assert!(e.mass_at_zero > 0.0);
            prev = v;
        }
    }

    proptest! {
        #[test]
        fn interleaved_roundtrip(pts in proptest::collection::btree_set(-1000i32..1000, 2..40), start_a in any::<bool>()) {
            let pts: Vec<f64> = pts.into_iter().map(|k| k as f64 / 7.0).collect();
            let m = pts.len() / 2 * 2;
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (i, &x) in pts[..m].iter().enumerate() {
                if (i % 2 == 0) == start_a { a.push(x) } else { b.push(x) }
            }
            let u = build_interleaved_shift(&WellMixedPair::new(&a, &b).unwrap()).unwrap();
            let lam = Coupling::new(u.sign().factor()).unwrap();
            let p = pair_from_shift(&u, lam).unwrap();
            prop_assert_eq!(p.mu.locations(), a);
            prop_assert_eq!(p.nu.locations(), b);
        }
    }
}
