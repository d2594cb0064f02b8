use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Interval, IntervalSet};

/// Removed intervals of the middle-thirds Cantor set, grouped by generation:
/// entry `g` holds the `2^g` gaps of length `3^{-(g+1)}`.
pub fn middle_thirds(depth: usize) -> Vec<Vec<Interval>> {
    let mut level = vec![Interval::new(0.0, 1.0)];
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut gaps = Vec::with_capacity(level.len());
        let mut next = Vec::with_capacity(2 * level.len());
        for iv in &level {
            let w = iv.len() / 3.0;
            let (p, q) = (iv.left + w, iv.right - w);
            gaps.push(Interval::new(p, q));
            next.push(Interval::new(iv.left, p));
            next.push(Interval::new(q, iv.right));
        }
        out.push(gaps);
        level = next;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PorosityVerdict {
    /// The sum is finite: either only finitely many generations were given, or
    /// the per-generation increments decay geometrically.
    Passes,
    /// Increments stay bounded below, so the partial sums grow linearly.
    Fails,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PorosityReport {
    pub y: f64,
    pub verdict: PorosityVerdict,
    /// Sum over every interval except those having `y` as an endpoint.
    pub total: f64,
    /// Contribution of each generation.
    pub increments: Vec<f64>,
    /// Cumulative sums after each generation.
    pub partials: Vec<f64>,
    /// Upper bound on what the untruncated generations would add, when they
    /// decay geometrically.
    pub tail_bound: Option<f64>,
    /// Intervals dropped because `y` is one of their endpoints.
    pub excluded: Vec<Interval>,
}

/// `∫_I dx/|x − y|` for `y` outside the open interval.
fn log_term(iv: &Interval, y: f64) -> f64 {
    if y <= iv.left {
        ((iv.right - y) / (iv.left - y)).ln()
    } else {
        ((y - iv.left) / (y - iv.right)).ln()
    }
}

const MIN_GENERATIONS: usize = 8;
const DECAY: f64 = 0.8;

fn verdict(increments: &[f64], total: f64) -> (PorosityVerdict, Option<f64>) {
    let n = increments.len();
    if n < MIN_GENERATIONS {
        return (PorosityVerdict::Passes, Some(0.0));
    }
    let last = &increments[n - 5..];
    let q = last
        .windows(2)
        .map(|w| if w[0] == 0.0 { if w[1] == 0.0 { 0.0 } else { f64::INFINITY } } else { w[1] / w[0] })
        .fold(0.0, f64::max);
    if q < DECAY {
        let l = increments[n - 1];
        return (PorosityVerdict::Passes, Some(l * q / (1.0 - q)));
    }
    let floor = increments[n - MIN_GENERATIONS..].iter().copied().fold(f64::INFINITY, f64::min);
    if floor > 0.0 && floor >= 0.05 * total / n as f64 {
        (PorosityVerdict::Fails, None)
    } else {
        (PorosityVerdict::Undecided, None)
    }
}

/// The finiteness test for `∫_{∪I} dx/|y − x|` with the intervals given by
/// generation. An interval with `y` as an endpoint is left out.
pub fn theorem_5_5_check(graded: &[Vec<Interval>], y: f64) -> Result<PorosityReport> {
    if !y.is_finite() {
        return Err(Error::Precondition("y must be finite".into()));
    }
    let mut excluded = Vec::new();
    let mut increments = Vec::with_capacity(graded.len());
    for gen in graded {
        let mut s = 0.0;
        for iv in gen {
            if iv.left < y && y < iv.right {
                return Err(Error::Precondition(format!(
                    "y = {y} lies inside the removed interval ({}, {})",
                    iv.left, iv.right
                )));
            }
            if y == iv.left || y == iv.right {
                excluded.push(*iv);
            } else {
                s += log_term(iv, y);
            }
        }
        increments.push(s);
    }
    let partials: Vec<f64> = increments
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let total = partials.last().copied().unwrap_or(0.0);
    let (verdict, tail_bound) = verdict(&increments, total);
    Ok(PorosityReport { y, verdict, total, increments, partials, tail_bound, excluded })
}

/// Same test for an ungraded set. Intervals are grouped by length into
/// classes `[4^{-(g+1)}, 4^{-g}) · max length`.
pub fn theorem_5_5_check_set(k_complement: &IntervalSet, y: f64) -> Result<PorosityReport> {
    theorem_5_5_check(&grade_by_length(k_complement), y)
}

fn grade_by_length(set: &IntervalSet) -> Vec<Vec<Interval>> {
    let top = set.intervals().iter().map(Interval::len).fold(0.0, f64::max);
    let mut graded: Vec<Vec<Interval>> = Vec::new();
    for iv in set.intervals() {
        let g = ((top / iv.len()).log(4.0) + 1e-12).floor().max(0.0) as usize;
        if graded.len() <= g {
            graded.resize(g + 1, Vec::new());
        }
        graded[g].push(*iv);
    }
    graded
}

/// Removed intervals placed inside one gap `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PorousFamily {
    pub gap: Interval,
    pub budget: f64,
    /// Relative length of the level-0 intervals; halved until the bound holds.
    pub theta: f64,
    /// Certified upper bound on `∫ dx/|x − y|` over the infinite family, for
    /// every `y` outside the gap.
    pub certified_bound: f64,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PorousEmbedding {
    pub families: Vec<PorousFamily>,
    /// Level `k` of every family, gathered across gaps.
    pub graded: Vec<Vec<Interval>>,
    pub levels: usize,
}

impl PorousEmbedding {
    pub fn removed(&self) -> Result<IntervalSet> {
        IntervalSet::from_unsorted(self.families.iter().flat_map(|f| f.intervals.iter().copied()).collect())
    }

    pub fn total_budget(&self) -> f64 {
        self.families.iter().map(|f| f.budget).sum()
    }
}

/// Level-`k` pair in a gap `(x, y)`: centers `x + d_k` and `y − d_k` with
/// `d_k = L/4 · 2^{-k}`, half-lengths `θ d_k 2^{-k} / 2`.
fn level_pair(gap: &Interval, theta: f64, k: usize) -> (Interval, Interval) {
    let d = gap.len() / 4.0 * 0.5f64.powi(k as i32);
    let h = theta * d * 0.5f64.powi(k as i32) / 2.0;
    let (cl, cr) = (gap.left + d, gap.right - d);
    (Interval::new(cl - h, cl + h), Interval::new(cr - h, cr + h))
}

/// Exact sum over levels `0..=levels` at both gap endpoints, plus the tail
/// `2θ 2^{-K} / (1 − θ/2)` for the levels beyond.
fn family_bound(gap: &Interval, theta: f64, levels: usize) -> f64 {
    let mut at_left = 0.0;
    let mut at_right = 0.0;
    for k in 0..=levels {
        let (a, b) = level_pair(gap, theta, k);
        at_left += log_term(&a, gap.left) + log_term(&b, gap.left);
        at_right += log_term(&a, gap.right) + log_term(&b, gap.right);
    }
    at_left.max(at_right) + 2.0 * theta * 0.5f64.powi(levels as i32) / (1.0 - theta / 2.0)
}

/// Inside each gap, intervals accumulating at both endpoints whose total
/// `∫ dx/|x − y|` stays below the gap's budget for all `y` outside the gap.
/// The worst `y` is an endpoint, where the bound is evaluated.
pub fn porous_embed(gaps: &IntervalSet, budgets: &[f64], levels: usize) -> Result<PorousEmbedding> {
    if budgets.len() < gaps.len() {
        return Err(Error::Precondition(format!("{} gaps but only {} budgets", gaps.len(), budgets.len())));
    }
    if let Some(b) = budgets.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(Error::Precondition(format!("budget {b} is not positive")));
    }
    let mut families = Vec::with_capacity(gaps.len());
    let mut graded = vec![Vec::new(); if gaps.is_empty() { 0 } else { levels + 1 }];
    for (gap, &budget) in gaps.intervals().iter().zip(budgets) {
        if !(gap.len() > 0.0) {
            return Err(Error::Precondition("gaps must have positive length".into()));
        }
        let mut theta = budget.min(0.5);
        let mut bound = family_bound(gap, theta, levels);
        while bound >= budget {
            theta /= 2.0;
            if theta < 1e-300 {
                return Err(Error::Construction(format!("cannot certify budget {budget}")));
            }
            bound = family_bound(gap, theta, levels);
        }
        let mut intervals = Vec::with_capacity(2 * levels + 2);
        for k in 0..=levels {
            let (a, b) = level_pair(gap, theta, k);
            if !(a.left < a.right && b.left < b.right) {
                return Err(Error::Precondition(format!(
                    "level {k} intervals in ({}, {}) vanish in double precision; use fewer levels",
                    gap.left, gap.right
                )));
            }
            intervals.extend([a, b]);
            graded[k].extend([a, b]);
        }
        intervals.sort_by(|p, q| p.left.total_cmp(&q.left));
        families.push(PorousFamily { gap: *gap, budget, theta, certified_bound: bound, intervals });
    }
    Ok(PorousEmbedding { families, graded, levels })
}

/// `2^{-(i+1)}` for `i = 0..n`.
pub fn default_budgets(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5f64.powi(i as i32 + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cantor_point(rng: &mut ChaCha8Rng) -> f64 {
        let mut x = 0.0;
        let mut w = 1.0;
        for _ in 0..40 {
            w /= 3.0;
            if rng.gen::<bool>() {
                x += 2.0 * w;
            }
        }
        x
    }

    #[test]
    fn empty_complement_passes() {
        let r = theorem_5_5_check_set(&IntervalSet::empty(), 0.3).unwrap();
        assert_eq!(r.verdict, PorosityVerdict::Passes);
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn rejects_interior_point() {
        let k = middle_thirds(2);
        assert!(theorem_5_5_check(&k, 0.5).is_err());
    }

    #[test]
    fn quarter_gains_ln5_per_generation() {
        let r = theorem_5_5_check(&middle_thirds(12), 0.25).unwrap();
        // The gap adjacent to 1/4 at each generation contributes exactly ln 5.
        assert!((r.increments[0] - 5f64.ln()).abs() < 1e-12);
        assert!(r.increments.iter().all(|&v| v >= 5f64.ln() - 1e-12));
        assert_eq!(r.verdict, PorosityVerdict::Fails);
        assert!(r.total > 10.0);
    }

    #[test]
    fn endpoint_excludes_adjacent_gap() {
        let r = theorem_5_5_check(&middle_thirds(3), 1.0 / 3.0).unwrap();
        assert_eq!(r.excluded.len(), 1);
        assert!(r.total.is_finite());
    }

    #[test]
    fn random_cantor_points_fail() {
        let k = middle_thirds(12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let y = cantor_point(&mut rng);
            let r = theorem_5_5_check(&k, y).unwrap();
            assert!(r.increments.iter().all(|&v| v >= 2f64.ln() - 1e-9));
            assert_eq!(r.verdict, PorosityVerdict::Fails, "y = {y}");
        }
    }

    #[test]
    fn single_gap_budget() {
        let gaps = IntervalSet::new(vec![Interval::new(0.0, 1.0)]).unwrap();
        let e = porous_embed(&gaps, &[0.5], 14).unwrap();
        let f = &e.families[0];
        assert!(f.certified_bound < 0.5);
        for y in [0.0, 1.0] {
            let r = theorem_5_5_check(&e.graded, y).unwrap();
            assert!(r.total <= f.certified_bound);
            assert_eq!(r.verdict, PorosityVerdict::Passes);
        }
        assert!(e.removed().is_ok());
        assert!(porous_embed(&IntervalSet::empty(), &[], 10).unwrap().families.is_empty());
        assert!(porous_embed(&gaps, &[0.5], 40).is_err());
    }

    #[test]
    fn embedded_cantor_gaps_pass() {
        let gaps = IntervalSet::from_unsorted(middle_thirds(4).concat()).unwrap();
        let e = porous_embed(&gaps, &default_budgets(gaps.len()), 12).unwrap();
        let ends = gaps.endpoints();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let y = ends[rng.gen_range(0..ends.len())];
            let r = theorem_5_5_check(&e.graded, y).unwrap();
            assert_eq!(r.verdict, PorosityVerdict::Passes);
            assert!(r.total + r.tail_bound.unwrap() < e.total_budget());
        }
    }

    proptest! {
        #[test]
        fn finite_complement_passes(cuts in proptest::collection::btree_set(0u32..1000, 2..30), pick in 0usize..100) {
            let pts: Vec<f64> = cuts.into_iter().map(|c| c as f64 / 1000.0).collect();
            let ivs: Vec<Interval> = pts.chunks_exact(2).map(|c| Interval::new(c[0], c[1])).collect();
            let set = IntervalSet::from_unsorted(ivs).unwrap();
            let ends = set.endpoints();
            let y = ends[pick % ends.len()];
            let r = theorem_5_5_check(&[set.intervals().to_vec()], y).unwrap();
            prop_assert_eq!(r.verdict, PorosityVerdict::Passes);
            prop_assert!(r.total.is_finite());
        }

        #[test]
        fn middle_thirds_grows_linearly(depth in 8usize..14) {
            let r = theorem_5_5_check(&middle_thirds(depth), 0.25).unwrap();
            prop_assert!(r.total >= depth as f64 * 2f64.ln());
        }
    }
}
