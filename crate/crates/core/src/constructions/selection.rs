use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Interval, IntervalSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    L,
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    /// 1-based; odd generations feed `L`, even ones `M`.
    pub index: usize,
    pub family: Family,
    /// Indices into [`SelectionCertificate::intervals`].
    pub members: Vec<usize>,
    pub coverage: f64,
    /// Measure of the unselected pool when this generation started.
    pub pool_measure: f64,
    /// Smallest `∫ dx/(y − x)` over `(y − 1, y)` across the sample points.
    pub min_left: f64,
    /// Smallest `∫ dx/(x − y)` over `(y, y + 1)` across the sample points.
    pub min_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePartials {
    pub y: f64,
    /// Cumulative one-sided integrals after each generation of the family.
    pub l_left: Vec<f64>,
    pub l_right: Vec<f64>,
    pub m_left: Vec<f64>,
    pub m_right: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionCertificate {
    /// Input intervals, longest first (ties by left endpoint).
    pub intervals: Vec<Interval>,
    pub generations: Vec<Generation>,
    pub l: Vec<usize>,
    pub m: Vec<usize>,
    pub partial_integrals: Vec<SamplePartials>,
}

impl SelectionCertificate {
    pub fn generation_of(&self, idx: usize) -> Option<usize> {
        self.generations.iter().find(|g| g.members.contains(&idx)).map(|g| g.index)
    }
}

/// `∫ dx/|x − y|` over `iv ∩ (y − 1, y + 1)`, split by side.
fn sides(iv: &Interval, y: f64) -> (f64, f64) {
    if iv.left >= y {
        let hi = iv.right.min(y + 1.0);
        if hi <= iv.left {
            return (0.0, 0.0);
        }
        (0.0, ((hi - y) / (iv.left - y)).ln())
    } else {
        let lo = iv.left.max(y - 1.0);
        if iv.right <= lo {
            return (0.0, 0.0);
        }
        (((y - lo) / (y - iv.right)).ln(), 0.0)
    }
}

/// Greedy version of the two-family selection: each generation takes the
/// longest remaining intervals until they cover more than half of the
/// remaining pool and both one-sided integrals exceed 1 at every sample.
pub fn lemma_4_2_select(f_complement: &IntervalSet, generations: usize, sample_ys: &[f64]) -> Result<SelectionCertificate> {
    for &y in sample_ys {
        if let Some(i) = f_complement.find(y) {
            let iv = f_complement.intervals()[i];
            if iv.left < y && y < iv.right {
                return Err(Error::Precondition(format!("sample {y} is not in the closed set")));
            }
        }
        if f_complement.intervals().iter().any(|iv| iv.left == y || iv.right == y) {
            return Err(Error::Precondition(format!("sample {y} is an endpoint")));
        }
    }
    let mut intervals = f_complement.intervals().to_vec();
    intervals.sort_by(|a, b| b.len().total_cmp(&a.len()).then(a.left.total_cmp(&b.left)));
    let mut next = 0;
    let mut gens = Vec::with_capacity(generations);
    for index in 1..=generations {
        let pool_measure: f64 = intervals[next..].iter().map(Interval::len).sum();
        let mut members = Vec::new();
        let mut coverage = 0.0;
        let mut left = vec![0.0; sample_ys.len()];
        let mut right = vec![0.0; sample_ys.len()];
        let done = |c: f64, l: &[f64], r: &[f64]| {
            c > pool_measure / 2.0 && l.iter().all(|&v| v > 1.0) && r.iter().all(|&v| v > 1.0)
        };
        while !done(coverage, &left, &right) {
            if next == intervals.len() {
                let worst = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
                return Err(Error::Construction(format!(
                    "generation {index} ran out of intervals: covered {coverage:.3e} of {pool_measure:.3e}, \
                     smallest left integral {:.3}, smallest right integral {:.3}; the closed set is not null at this scale",
                    worst(&left),
                    worst(&right)
                )));
            }
            let iv = intervals[next];
            coverage += iv.len();
            for (j, &y) in sample_ys.iter().enumerate() {
                let (a, b) = sides(&iv, y);
                left[j] += a;
                right[j] += b;
            }
            members.push(next);
            next += 1;
        }
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let family = if index % 2 == 1 { Family::L } else { Family::M };
        gens.push(Generation {
            index,
            family,
            members,
            coverage,
            pool_measure,
            min_left: min(&left),
            min_right: min(&right),
        });
    }
    let collect = |fam: Family| -> Vec<usize> {
        gens.iter().filter(|g| g.family == fam).flat_map(|g| g.members.iter().copied()).collect()
    };
    let (l, m) = (collect(Family::L), collect(Family::M));
    let partial_integrals = sample_ys
        .iter()
        .map(|&y| {
            let mut p = SamplePartials { y, l_left: vec![], l_right: vec![], m_left: vec![], m_right: vec![] };
            let (mut ll, mut lr, mut ml, mut mr) = (0.0, 0.0, 0.0, 0.0);
            for g in &gens {
                let (a, b) = g.members.iter().map(|&i| sides(&intervals[i], y)).fold((0.0, 0.0), |s, t| (s.0 + t.0, s.1 + t.1));
                match g.family {
                    Family::L => {
                        ll += a;
                        lr += b;
                        p.l_left.push(ll);
                        p.l_right.push(lr);
                    }
                    Family::M => {
                        ml += a;
                        mr += b;
                        p.m_left.push(ml);
                        p.m_right.push(mr);
                    }
                }
            }
            p
        })
        .collect();
    Ok(SelectionCertificate { intervals, generations: gens, l, m, partial_integrals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub z_points: Vec<f64>,
    /// `δ_l` for every interval, in the certificate's order.
    pub deltas: Vec<f64>,
    /// Members of `J_l`: `M`-intervals inside `(y_l, y_l + δ_l)`.
    pub j: Vec<Vec<usize>>,
    /// The union of all `J_l`.
    pub n: Vec<usize>,
    /// `max δ_l / |I_l|²`, below 1 by construction.
    pub max_delta_ratio: f64,
    /// Every `δ_l` is below a quarter of `(y_l − z_l)` times the distance to
    /// earlier `J_k` on the right.
    pub quarter_ok: bool,
}

/// Builds `N ⊂ M` from the points `z_n ∈ I_n` (in the certificate's order),
/// which must satisfy `y_n − z_n < |I_n|²`.
pub fn lemma_4_3_refine(cert: &SelectionCertificate, z_points: &[f64]) -> Result<Refinement> {
    let ivs = &cert.intervals;
    if z_points.len() != ivs.len() {
        return Err(Error::Precondition(format!("{} intervals but {} z points", ivs.len(), z_points.len())));
    }
    for (iv, &z) in ivs.iter().zip(z_points) {
        if !(iv.left < z && z < iv.right) || !(iv.right - z < iv.len() * iv.len()) {
            return Err(Error::Precondition(format!(
                "z = {z} must lie in ({}, {}) within |I|^2 of the right end",
                iv.left, iv.right
            )));
        }
    }
    let mut deltas = Vec::with_capacity(ivs.len());
    let mut j: Vec<Vec<usize>> = Vec::with_capacity(ivs.len());
    let mut quarter_ok = true;
    let mut max_ratio: f64 = 0.0;
    for (l, (iv, &z)) in ivs.iter().zip(z_points).enumerate() {
        let y = iv.right;
        let dist = j
            .iter()
            .flatten()
            .map(|&k| ivs[k].left - y)
            .filter(|&d| d >= 0.0)
            .fold(f64::INFINITY, f64::min);
        let dist = if dist.is_finite() { dist } else { 1.0 };
        let quarter = 0.25 * (y - z) * dist;
        let delta = 0.5 * (iv.len() * iv.len()).min(quarter);
        quarter_ok &= delta < quarter || quarter == 0.0;
        max_ratio = max_ratio.max(delta / (iv.len() * iv.len()));
        deltas.push(delta);
        let members: Vec<usize> =
            cert.m.iter().copied().filter(|&k| ivs[k].left > y && ivs[k].right < y + delta && k != l).collect();
        j.push(members);
    }
    let mut n: Vec<usize> = j.iter().flatten().copied().collect();
    n.sort_unstable();
    n.dedup();
    Ok(Refinement { z_points: z_points.to_vec(), deltas, j, n, max_delta_ratio: max_ratio, quarter_ok })
}

/// `z_n = y_n − frac · |I_n|²`.
pub fn quadratic_z_points(cert: &SelectionCertificate, frac: f64) -> Vec<f64> {
    cert.intervals.iter().map(|iv| iv.right - frac * iv.len() * iv.len()).collect()
}

impl Refinement {
    /// Cumulative `∫_{J_l} dx/(x − y_l)`, one entry per `M`-generation that
    /// reaches `J_l`.
    pub fn endpoint_partials(&self, cert: &SelectionCertificate, l: usize) -> Vec<(usize, f64)> {
        let y = cert.intervals[l].right;
        let mut by_gen: Vec<(usize, f64)> = Vec::new();
        for &k in &self.j[l] {
            let g = cert.generation_of(k).unwrap_or(0);
            let v = sides(&cert.intervals[k], y).1;
            match by_gen.iter_mut().find(|e| e.0 == g) {
                Some(e) => e.1 += v,
                None => by_gen.push((g, v)),
            }
        }
        by_gen.sort_by_key(|e| e.0);
        let mut acc = 0.0;
        by_gen.into_iter().map(|(g, v)| {
            acc += v;
            (g, acc)
        }).collect()
    }

    /// `E`: the `N`-intervals together with every `[z_n, y_n]`, merged.
    pub fn e_set(&self, cert: &SelectionCertificate) -> Vec<Interval> {
        let mut pieces: Vec<Interval> = self.n.iter().map(|&k| cert.intervals[k]).collect();
        pieces.extend(cert.intervals.iter().zip(&self.z_points).map(|(iv, &z)| Interval::new(z, iv.right)));
        pieces.sort_by(|a, b| a.left.total_cmp(&b.left));
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match merged.last_mut() {
                Some(last) if p.left <= last.right => last.right = last.right.max(p.right),
                _ => merged.push(p),
            }
        }
        merged
    }

    /// Truncated `∫ χ_E(x) dx/(x − y)` over `(y − 1, y + 1) \ (y − ε, y + ε)`
    /// at the given scales.
    pub fn pv_trail(&self, cert: &SelectionCertificate, y: f64, scales: &[f64]) -> Result<Vec<(f64, f64)>> {
        let e = self.e_set(cert);
        if e.iter().any(|iv| iv.left <= y && y <= iv.right) {
            return Err(Error::Precondition(format!("{y} lies in the closure of E")));
        }
        Ok(scales
            .iter()
            .map(|&eps| {
                let v: f64 = e
                    .iter()
                    .map(|iv| {
                        if iv.left > y {
                            let lo = iv.left.max(y + eps);
                            let hi = iv.right.min(y + 1.0);
                            if hi > lo { ((hi - y) / (lo - y)).ln() } else { 0.0 }
                        } else {
                            let lo = iv.left.max(y - 1.0);
                            let hi = iv.right.min(y - eps);
                            if hi > lo { -((y - lo) / (y - hi)).ln() } else { 0.0 }
                        }
                    })
                    .sum();
                (eps, v)
            })
            .collect())
    }
}
