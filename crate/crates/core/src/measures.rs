//! Finite nonnegative atomic measures on the extended real line.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atoms closer than this are rejected rather than merged.
pub const DEFAULT_MERGE_TOL: f64 = 1e-12;

/// A point of `ℝ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.total_cmp(b),
            (ExtendedReal::Finite(_), ExtendedReal::Infinity) => Ordering::Less,
            (ExtendedReal::Infinity, ExtendedReal::Finite(_)) => Ordering::Greater,
            (ExtendedReal::Infinity, ExtendedReal::Infinity) => Ordering::Equal,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        ExtendedReal::Finite(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "x")]
    pub location: f64,
    #[serde(rename = "w")]
    pub mass: f64,
}

impl Atom {
    pub fn new(location: f64, mass: f64) -> Self {
        Atom { location, mass }
    }
}

/// The first invariant a candidate measure violates.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite { index: usize },
    NonpositiveMass { index: usize, mass: f64 },
    Unsorted { index: usize },
    Duplicate { index: usize, gap: f64 },
    NegativeInfinityMass(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { index } => write!(f, "non-finite value at atom {index}"),
            Violation::NonpositiveMass { index, mass } => {
                write!(f, "nonpositive mass {mass} at atom {index}")
            }
            Violation::Unsorted { index } => write!(f, "unsorted: atom {index} precedes atom {}", index - 1),
            Violation::Duplicate { index, gap } => {
                write!(f, "duplicate location: atoms {} and {index} are {gap:e} apart", index - 1)
            }
            Violation::NegativeInfinityMass(m) => write!(f, "negative mass {m} at infinity"),
        }
    }
}

/// Check the measure invariants on raw parts, reporting the first violation.
pub fn validate_parts(atoms: &[Atom], infinity_mass: f64, merge_tol: f64) -> std::result::Result<(), Violation> {
    for (i, a) in atoms.iter().enumerate() {
        if !a.location.is_finite() || !a.mass.is_finite() {
            return Err(Violation::NonFinite { index: i });
        }
        if a.mass <= 0.0 {
            return Err(Violation::NonpositiveMass { index: i, mass: a.mass });
        }
        if i > 0 {
            let gap = a.location - atoms[i - 1].location;
            if gap < 0.0 {
                return Err(Violation::Unsorted { index: i });
            }
            if gap <= merge_tol {
                return Err(Violation::Duplicate { index: i, gap });
            }
        }
    }
    if !infinity_mass.is_finite() {
        return Err(Violation::NonFinite { index: atoms.len() });
    }
    if infinity_mass < 0.0 {
        return Err(Violation::NegativeInfinityMass(infinity_mass));
    }
    Ok(())
}

/// `Σ mass_i δ_{loc_i} + infinity_mass·δ_∞`, locations strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    infinity_mass: f64,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>, infinity_mass: f64) -> Result<Self> {
        Self::with_tolerance(atoms, infinity_mass, DEFAULT_MERGE_TOL)
    }

    pub fn with_tolerance(atoms: Vec<Atom>, infinity_mass: f64, merge_tol: f64) -> Result<Self> {
        validate_parts(&atoms, infinity_mass, merge_tol).map_err(|v| Error::InvalidMeasure(v.to_string()))?;
        Ok(AtomicMeasure { atoms, infinity_mass })
    }

    /// Builds from unsorted `(location, mass)` pairs.
    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<Self> {
        let mut atoms: Vec<Atom> = pairs.into_iter().map(|(x, w)| Atom::new(x, w)).collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Self::new(atoms, 0.0)
    }

    pub fn empty() -> Self {
        AtomicMeasure::default()
    }

    pub fn dirac(x: f64, mass: f64) -> Result<Self> {
        Self::new(vec![Atom::new(x, mass)], 0.0)
    }

    pub fn at_infinity(mass: f64) -> Result<Self> {
        Self::new(Vec::new(), mass)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn infinity_mass(&self) -> f64 {
        self.infinity_mass
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.infinity_mass == 0.0
    }

    pub fn is_compact(&self) -> bool {
        self.infinity_mass == 0.0
    }

    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.location).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.mass).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>() + self.infinity_mass
    }

    /// Mass at `x`, matching atoms within `tol`.
    pub fn mass_at(&self, x: ExtendedReal, tol: f64) -> f64 {
        match x {
            ExtendedReal::Infinity => self.infinity_mass,
            ExtendedReal::Finite(x) => self
                .atoms
                .iter()
                .filter(|a| (a.location - x).abs() <= tol)
                .map(|a| a.mass)
                .sum(),
        }
    }

    /// `(1/π) ∫ dμ/(1+t²) + μ(∞)`.
    pub fn norm(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass / (1.0 + a.location * a.location))
            .sum::<f64>()
            / PI
            + self.infinity_mass
    }

    /// Re-checks every invariant.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        validate_parts(&self.atoms, self.infinity_mass, DEFAULT_MERGE_TOL)
    }

    /// Keeps the atoms lying in some interval of `set`; drops the mass at infinity.
    pub fn restrict(&self, set: &IntervalSet) -> AtomicMeasure {
        AtomicMeasure {
            atoms: self.atoms.iter().copied().filter(|a| set.contains(a.location)).collect(),
            infinity_mass: 0.0,
        }
    }

    /// Sum of two measures whose atom locations are disjoint.
    pub fn disjoint_union(&self, other: &AtomicMeasure) -> Result<AtomicMeasure> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        AtomicMeasure::new(atoms, self.infinity_mass + other.infinity_mass)
    }

    pub fn scaled(&self, c: f64) -> Result<AtomicMeasure> {
        AtomicMeasure::new(
            self.atoms.iter().map(|a| Atom::new(a.location, a.mass * c)).collect(),
            self.infinity_mass * c,
        )
    }

    pub(crate) fn require_compact(&self) -> Result<()> {
        if self.infinity_mass > 0.0 {
            Err(Error::InfinityMass(self.infinity_mass))
        } else {
            Ok(())
        }
    }
}

/// An open interval `(left, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Self {
        Interval { left, right }
    }

    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    pub fn is_empty(&self) -> bool {
        self.right <= self.left
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left + self.right)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left < x && x < self.right
    }
}

/// Sorted, pairwise disjoint open intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for (i, iv) in intervals.iter().enumerate() {
            if !(iv.left.is_finite() && iv.right.is_finite()) {
                return Err(Error::InvalidIntervals(format!("interval {i} is not finite")));
            }
            if iv.left >= iv.right {
                return Err(Error::InvalidIntervals(format!(
                    "interval {i} = ({}, {}) is empty",
                    iv.left, iv.right
                )));
            }
            if i > 0 && intervals[i - 1].right > iv.left {
                return Err(Error::InvalidIntervals(format!(
                    "intervals {} and {i} overlap or are unsorted",
                    i - 1
                )));
            }
        }
        Ok(IntervalSet { intervals })
    }

    /// Sorts first; still rejects overlaps.
    pub fn from_unsorted(mut intervals: Vec<Interval>) -> Result<Self> {
        intervals.sort_by(|a, b| a.left.total_cmp(&b.left));
        Self::new(intervals)
    }

    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure of the union.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.find(x).is_some()
    }

    /// Index of the interval containing `x`.
    pub fn find(&self, x: f64) -> Option<usize> {
        let idx = self.intervals.partition_point(|iv| iv.right <= x);
        (idx < self.intervals.len() && self.intervals[idx].contains(x)).then_some(idx)
    }

    pub fn union(&self, other: &IntervalSet) -> Result<IntervalSet> {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::from_unsorted(all)
    }

    /// All interval endpoints, ascending.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|iv| [iv.left, iv.right]).collect()
    }
}

/// `n` atoms in `(lo, hi)`, consecutive gaps at least `min_gap`, masses in
/// `[0.1, 1)`. Locations are drawn as sorted uniforms with the gaps added back.
pub fn random_measure<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64, min_gap: f64) -> Result<AtomicMeasure> {
    let slack = hi - lo - min_gap * (n + 1) as f64;
    if n == 0 || !(slack > 0.0) {
        return Err(Error::Precondition(format!("{n} atoms with gap {min_gap} do not fit in ({lo}, {hi})")));
    }
    let mut u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * slack).collect();
    u.sort_by(f64::total_cmp);
    let atoms = u
        .iter()
        .enumerate()
        .map(|(i, &t)| Atom::new(lo + t + min_gap * (i + 1) as f64, rng.gen_range(0.1..1.0)))
        .collect();
    AtomicMeasure::new(atoms, 0.0)
}
