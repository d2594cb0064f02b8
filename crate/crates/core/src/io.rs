//! JSON and CSV interchange for the command line and the examples.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use serde::{Deserialize, Serialize};

use crate::constructions::{CantorSpec, CantorTree, SpectralReport};
use crate::error::{Error, Result};
use crate::measures::{Atom, AtomicMeasure, Interval, IntervalSet};
use crate::phase_shift::{PhaseShift, ShiftSign};

/// `{"atoms":[{"x":..,"w":..}],"inf":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub inf: f64,
}

impl From<&AtomicMeasure> for MeasureJson {
    fn from(m: &AtomicMeasure) -> Self {
        MeasureJson { atoms: m.atoms().to_vec(), inf: m.infinity_mass() }
    }
}

impl MeasureJson {
    pub fn into_measure(self) -> Result<AtomicMeasure> {
        if self.atoms.windows(2).any(|w| !(w[0].location < w[1].location)) {
            return Err(Error::InvalidMeasure("atoms must be sorted ascending by x".into()));
        }
        AtomicMeasure::new(self.atoms, self.inf)
    }
}

/// `{"sign":±1,"intervals":[[a,b],..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftJson {
    pub sign: i64,
    pub intervals: Vec<[f64; 2]>,
}

impl ShiftJson {
    pub fn from_shift(u: &PhaseShift) -> Result<Self> {
        let set = u.intervals().ok_or_else(|| Error::InvalidShift("only exact shifts have a JSON form".into()))?;
        Ok(ShiftJson { sign: u.sign().as_int(), intervals: intervals_to_pairs(set) })
    }

    pub fn into_shift(self) -> Result<PhaseShift> {
        let sign = ShiftSign::from_int(self.sign)?;
        PhaseShift::exact(sign, pairs_to_intervals(&self.intervals)?)
    }
}

/// A list of disjoint open intervals in any order, either bare `[[a,b],..]` or
/// `{"intervals":[[a,b],..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntervalsJson {
    Wrapped { intervals: Vec<[f64; 2]> },
    Bare(Vec<[f64; 2]>),
}

impl IntervalsJson {
    pub fn into_set(self) -> Result<IntervalSet> {
        match self {
            IntervalsJson::Wrapped { intervals } | IntervalsJson::Bare(intervals) => {
                IntervalSet::from_unsorted(intervals.iter().map(|&[a, b]| Interval::new(a, b)).collect())
            }
        }
    }
}

fn pairs_to_intervals(p: &[[f64; 2]]) -> Result<IntervalSet> {
    IntervalSet::new(p.iter().map(|&[a, b]| Interval::new(a, b)).collect())
}

pub fn intervals_to_pairs(s: &IntervalSet) -> Vec<[f64; 2]> {
    s.intervals().iter().map(|iv| [iv.left, iv.right]).collect()
}

pub fn parse_measure(text: &str) -> Result<AtomicMeasure> {
    serde_json::from_str::<MeasureJson>(text)?.into_measure()
}

pub fn parse_shift(text: &str) -> Result<PhaseShift> {
    serde_json::from_str::<ShiftJson>(text)?.into_shift()
}

pub fn parse_intervals(text: &str) -> Result<IntervalSet> {
    serde_json::from_str::<IntervalsJson>(text)?.into_set()
}

pub fn parse_cantor_spec(text: &str) -> Result<CantorSpec> {
    let spec: CantorSpec = serde_json::from_str(text)?;
    spec.validate()?;
    Ok(spec)
}

pub fn measure_to_json(m: &AtomicMeasure) -> String {
    to_json(&MeasureJson::from(m))
}

/// Nested `{"interval":[l,r],"children":[..]}`.
pub fn tree_to_json(tree: &CantorTree) -> String {
    to_json(&tree.to_nodes())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// The snake_case name serde gives a unit enum variant.
pub fn variant_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// First column of a CSV of points. A non-numeric first row is taken as a header.
pub fn read_points(text: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let Some(cell) = rec.get(0).filter(|c| !c.is_empty()) else { continue };
        match cell.parse::<f64>() {
            Ok(x) if x.is_finite() => out.push(x),
            Ok(x) => return Err(Error::Parse(format!("row {}: {x} is not finite", i + 1))),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::Parse(format!("row {}: {cell:?} is not a number", i + 1))),
        }
    }
    Ok(out)
}

/// A CSV table held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

/// Shortest round-trip digits; exponent form outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One row per coupling.
pub fn sweep_table(reports: &[SpectralReport]) -> Table {
    let mut t = Table::new(&[
        "lambda",
        "regime",
        "class",
        "atoms",
        "bounded_gaps",
        "atoms_in_bounded_gaps",
        "outer_atoms",
        "confirmed_atoms",
        "oracle_max_error",
        "sample_points",
        "sc_evidence",
        "atom_tests_failed",
        "depth",
    ]);
    for r in reports {
        t.push(vec![
            fmt_f64(r.lambda),
            variant_name(&r.regime),
            variant_name(&r.class),
            r.atoms.len().to_string(),
            r.bounded_gaps.to_string(),
            r.atoms_in_bounded_gaps.to_string(),
            r.outer_atoms.to_string(),
            r.confirmed_atoms.to_string(),
            fmt_opt(r.oracle_max_error),
            r.sample_points.len().to_string(),
            r.sc_evidence.to_string(),
            r.atom_tests_failed.to_string(),
            r.depth.to_string(),
        ]);
    }
    t
}

/// Every located atom of every report.
pub fn atom_table(reports: &[SpectralReport]) -> Table {
    let mut t = Table::new(&["lambda", "x", "gap", "confirmed", "mass", "oracle_error"]);
    for r in reports {
        for a in &r.atoms {
            t.push(vec![
                fmt_f64(r.lambda),
                fmt_f64(a.x),
                a.gap.map(|g| g.to_string()).unwrap_or_default(),
                a.confirmed.to_string(),
                fmt_opt(a.mass),
                fmt_opt(a.oracle_error),
            ]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trip() {
        let text = r#"{"atoms":[{"x":0.0,"w":1.5},{"x":2.0,"w":0.25}],"inf":0.0}"#;
        let m = parse_measure(text).unwrap();
        assert_eq!(m.locations(), vec![0.0, 2.0]);
        assert_eq!(parse_measure(&measure_to_json(&m)).unwrap(), m);
        let no_inf = parse_measure(r#"{"atoms":[{"x":1,"w":1}]}"#).unwrap();
        assert_eq!(no_inf.infinity_mass(), 0.0);
    }

    #[test]
    fn measure_rejects_bad_input() {
        assert!(parse_measure(r#"{"atoms":[{"x":2,"w":1},{"x":1,"w":1}]}"#).is_err());
        assert!(parse_measure(r#"{"atoms":[{"x":1,"w":-1}]}"#).is_err());
        assert!(parse_measure(r#"{"atoms":[],"bogus":1}"#).is_err());
        assert!(matches!(parse_measure("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn shift_round_trip() {
        let u = parse_shift(r#"{"sign":1,"intervals":[[0,1],[2,3]]}"#).unwrap();
        assert_eq!(u.up_jumps(), vec![0.0, 2.0]);
        let back = ShiftJson::from_shift(&u).unwrap();
        assert_eq!(back, ShiftJson { sign: 1, intervals: vec![[0.0, 1.0], [2.0, 3.0]] });
        assert!(parse_shift(r#"{"sign":0,"intervals":[]}"#).is_err());
        assert!(parse_shift(r#"{"sign":1,"intervals":[[1,0]]}"#).is_err());
    }

    #[test]
    fn intervals_both_forms() {
        assert_eq!(parse_intervals("[[0,1]]").unwrap().len(), 1);
        assert_eq!(parse_intervals(r#"{"intervals":[[2,3],[0,1]]}"#).unwrap().len(), 2);
        assert!(parse_intervals("[[0,2],[1,3]]").is_err());
    }

    #[test]
    fn points_with_and_without_header() {
        assert_eq!(read_points("x\n0.5\n1\n").unwrap(), vec![0.5, 1.0]);
        assert_eq!(read_points("0.5,foo\n\n2\n").unwrap(), vec![0.5, 2.0]);
        assert!(read_points("x\n0.5\nabc\n").is_err());
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1.5e-15), "1.5e-15");
        assert_eq!(fmt_f64(-2.0), "-2");
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["x", "value"]);
        t.push(vec!["0.1".into(), "3".into()]);
        assert_eq!(t.to_csv(), "x,value\n0.1,3\n");
    }
}
