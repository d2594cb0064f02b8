//! Dense-matrix ground truth: `A = diag(t)`, cyclic vector `v = (√w_i)`,
//! `A_λ = A + λ v vᵀ`, spectral measure of `v` read from the eigenvectors.

use faer::{Mat, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Atom, AtomicMeasure};
use crate::phase_shift::{exact_shift_from_pair, pair_from_shift, secular_roots};
use crate::rank_one::Coupling;

pub const DEFAULT_CAP: usize = 512;

/// Masses below this are reported as numerically zero.
pub const ZERO_MASS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleModel {
    pub diag: Vec<f64>,
    pub vec: Vec<f64>,
}

impl OracleModel {
    pub fn to_measure(&self) -> Result<AtomicMeasure> {
        let atoms = self.diag.iter().zip(&self.vec).map(|(&t, &v)| Atom::new(t, v * v)).collect();
        AtomicMeasure::new(atoms, 0.0)
    }
}

pub fn measure_to_model(m: &AtomicMeasure) -> Result<OracleModel> {
    m.require_compact()?;
    Ok(OracleModel { diag: m.locations(), vec: m.masses().iter().map(|w| w.sqrt()).collect() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    /// Spectral measure of the cyclic vector for `A_λ`.
    pub measure: AtomicMeasure,
    /// Eigenvalues whose projection mass fell below [`ZERO_MASS`], with that mass.
    pub numerically_zero: Vec<(f64, f64)>,
}

pub fn perturb_spectrum(model: &OracleModel, lam: Coupling) -> Result<OracleSpectrum> {
    perturb_spectrum_capped(model, lam, DEFAULT_CAP)
}

pub fn perturb_spectrum_capped(model: &OracleModel, lam: Coupling, cap: usize) -> Result<OracleSpectrum> {
    let n = model.diag.len();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if n == 0 {
        return Ok(OracleSpectrum { measure: AtomicMeasure::empty(), numerically_zero: Vec::new() });
    }
    let (d, v, l) = (&model.diag, &model.vec, lam.lambda);
    let a = Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 } + l * v[i] * v[j]);
    if (0..n).any(|i| (0..n).any(|j| !a.read(i, j).is_finite())) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let eig = a.selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let p: f64 = (0..n).map(|i| u.read(i, j) * v[i]).sum();
            (s.read(j), p * p)
        })
        .collect();
    if pairs.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::Eigen(format!("non-finite eigenpair for n = {n}, λ = {l}")));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let numerically_zero = pairs.iter().copied().filter(|p| p.1 < ZERO_MASS).collect();
    let atoms = pairs.into_iter().filter(|p| p.1 > 0.0).map(|(e, w)| Atom::new(e, w)).collect();
    let measure = AtomicMeasure::with_tolerance(atoms, 0.0, 0.0)?;
    Ok(OracleSpectrum { measure, numerically_zero })
}

/// Strict interlacing of the unperturbed points `a` and perturbed points `b`:
/// `a_1 < b_1 < a_2 < …` for `λ > 0`, `b_1 < a_1 < b_2 < …` for `λ < 0`.
pub fn interlaces(a: &[f64], b: &[f64], lambda: f64) -> bool {
    if a.len() != b.len() || lambda == 0.0 {
        return false;
    }
    let merged: Vec<f64> = if lambda > 0.0 {
        a.iter().zip(b).flat_map(|(&x, &y)| [x, y]).collect()
    } else {
        b.iter().zip(a).flat_map(|(&x, &y)| [x, y]).collect()
    };
    merged.windows(2).all(|w| w[0] < w[1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub n: usize,
    pub lambda: f64,
    /// Oracle atoms `(location, mass)`.
    pub oracle: Vec<(f64, f64)>,
    /// Poles and residues of the perturbed Cauchy transform.
    pub resolvent: Vec<(f64, f64)>,
    /// `ν` from the phase-shift pipeline.
    pub shift: Vec<(f64, f64)>,
    pub max_location_error: f64,
    pub max_mass_error: f64,
    pub interlacing: bool,
    pub numerically_zero: usize,
}

/// Poles of `Kμ/(1 + πλKμ)` and their masses `1/(λ² Σ w/(t − p)²)`.
pub fn resolvent_atoms(m: &AtomicMeasure, lam: Coupling) -> Result<Vec<(f64, f64)>> {
    let roots = secular_roots(m, lam.lambda)?;
    let mut out: Vec<(f64, f64)> = roots
        .into_iter()
        .map(|(_, p)| {
            let s: f64 = m.atoms().iter().map(|a| a.mass / (a.location - p).powi(2)).sum();
            (p, 1.0 / (lam.lambda * lam.lambda * s))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Runs all three routes to the perturbed measure and reports their spread.
pub fn compare_with_formula(m: &AtomicMeasure, lam: Coupling) -> Result<Discrepancy> {
    compare_with_formula_capped(m, lam, DEFAULT_CAP)
}

pub fn compare_with_formula_capped(m: &AtomicMeasure, lam: Coupling, cap: usize) -> Result<Discrepancy> {
    if lam.lambda == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let spec = perturb_spectrum_capped(&measure_to_model(m)?, lam, cap)?;
    let oracle: Vec<(f64, f64)> = spec.measure.atoms().iter().map(|a| (a.location, a.mass)).collect();
    let resolvent = resolvent_atoms(m, lam)?;
    let u = exact_shift_from_pair(m, lam)?;
    let pair = pair_from_shift(&u, lam)?;
    let shift: Vec<(f64, f64)> = pair.nu.atoms().iter().map(|a| (a.location, a.mass)).collect();
    let mut loc = 0.0f64;
    let mut mass = 0.0f64;
    let routes = [&oracle, &resolvent, &shift];
    let same_len = routes.iter().all(|r| r.len() == oracle.len());
    if same_len {
        for i in 0..3 {
            for j in i + 1..3 {
                for (p, q) in routes[i].iter().zip(routes[j].iter()) {
                    loc = loc.max((p.0 - q.0).abs());
                    mass = mass.max((p.1 - q.1).abs());
                }
            }
        }
    } else {
        loc = f64::INFINITY;
        mass = f64::INFINITY;
    }
    let perturbed: Vec<f64> = oracle.iter().map(|p| p.0).collect();
    Ok(Discrepancy {
        n: m.len(),
        lambda: lam.lambda,
        interlacing: interlaces(&m.locations(), &perturbed, lam.lambda),
        numerically_zero: spec.numerically_zero.len(),
        oracle,
        resolvent,
        shift,
        max_location_error: loc,
        max_mass_error: mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn lam(l: f64) -> Coupling {
        Coupling::new(l).unwrap()
    }

    #[test]
    fn model_roundtrip() {
        let m = AtomicMeasure::from_pairs([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let model = measure_to_model(&m).unwrap();
        assert_eq!(model.diag, vec![0.0, 1.0]);
        assert_abs_diff_eq!(model.vec[0], 0.5f64.sqrt(), epsilon = 1e-16);
        let back = measure_to_model(&model.to_measure().unwrap()).unwrap();
        assert_eq!(back.diag, model.diag);
        for (a, b) in back.vec.iter().zip(&model.vec) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-16);
        }
        assert!(measure_to_model(&AtomicMeasure::at_infinity(1.0).unwrap()).is_err());
    }

    #[test]
    fn two_by_two() {
        let m = AtomicMeasure::from_pairs([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let s = perturb_spectrum(&measure_to_model(&m).unwrap(), lam(1.0)).unwrap();
        let l = s.measure.locations();
        assert_abs_diff_eq!(l[0], 1.0 - 0.5f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(l[1], 1.0 + 0.5f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.measure.total_mass(), 1.0, epsilon = 1e-14);
        assert!(s.measure.masses().iter().all(|&w| w > 0.0 && w < 1.0));
    }

    #[test]
    fn scalar_and_zero_coupling() {
        let d0 = AtomicMeasure::dirac(0.0, 1.0).unwrap();
        let s = perturb_spectrum(&measure_to_model(&d0).unwrap(), lam(1.0)).unwrap();
        assert_eq!(s.measure.atoms(), &[Atom::new(1.0, 1.0)]);
        let m = AtomicMeasure::from_pairs([(0.0, 0.25), (0.5, 0.75)]).unwrap();
        let s = perturb_spectrum(&measure_to_model(&m).unwrap(), lam(0.0)).unwrap();
        for (a, b) in s.measure.atoms().iter().zip(m.atoms()) {
            assert_abs_diff_eq!(a.location, b.location, epsilon = 1e-15);
            assert_abs_diff_eq!(a.mass, b.mass, epsilon = 1e-15);
        }
    }

    #[test]
    fn cap_enforced() {
        let m = AtomicMeasure::from_pairs((0..5).map(|i| (i as f64, 1.0))).unwrap();
        assert_eq!(
            perturb_spectrum_capped(&measure_to_model(&m).unwrap(), lam(1.0), 4).unwrap_err(),
            Error::TooLarge { n: 5, cap: 4 }
        );
    }

    #[test]
    fn interlacing_sides() {
        assert!(interlaces(&[0.0, 1.0], &[0.5, 1.5], 1.0));
        assert!(!interlaces(&[0.0, 1.0], &[0.5, 1.5], -1.0));
        assert!(interlaces(&[0.0, 1.0], &[-0.5, 0.5], -1.0));
    }

    fn arb_measure() -> impl Strategy<Value = AtomicMeasure> {
        proptest::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..=12).prop_filter_map("separated", |mut v| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            if v.windows(2).any(|w| w[1].0 - w[0].0 < 1e-3) {
                return None;
            }
            AtomicMeasure::from_pairs(v).ok()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn three_routes_agree(m in arb_measure(), l in prop_oneof![Just(-2.0), Just(-0.5), Just(0.5), Just(1.0), Just(2.0)]) {
            let d = compare_with_formula(&m, lam(l)).unwrap();
            prop_assert!(d.max_location_error < 1e-9, "{d:?}");
            prop_assert!(d.max_mass_error < 1e-9, "{d:?}");
            prop_assert!(d.interlacing);
            let total: f64 = d.oracle.iter().map(|p| p.1).sum();
            prop_assert!((total - m.total_mass()).abs() < 1e-12);
        }

        #[test]
        fn eigenvalues_increase_with_coupling(m in arb_measure(), l in -2.0f64..2.0) {
            let model = measure_to_model(&m).unwrap();
            let a = perturb_spectrum(&model, lam(l)).unwrap().measure.locations();
            let b = perturb_spectrum(&model, lam(l + 0.1)).unwrap().measure.locations();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(y > x);
            }
        }
    }
}
