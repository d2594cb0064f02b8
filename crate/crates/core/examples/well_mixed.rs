//! Any two interleaving point sets are the spectra of a rank-one pair.

use spectral_shift::constructions::{build_interleaved_shift, is_well_mixed, WellMixedPair};
use spectral_shift::matrix_oracle::{measure_to_model, perturb_spectrum};
use spectral_shift::phase_shift::pair_from_shift;
use spectral_shift::Coupling;

fn main() -> spectral_shift::Result<()> {
    let a = [-3.0, -0.5, 1.0, 4.0];
    let b = [-2.0, 0.25, 2.0, 6.0];
    let u = build_interleaved_shift(&WellMixedPair::new(&a, &b)?)?;
    let lam = Coupling::new(u.sign().factor())?;
    let pair = pair_from_shift(&u, lam)?;
    println!("shift sign {:?}, coupling {}", u.sign(), lam.lambda);
    println!("mu: {:?}", pair.mu.atoms().iter().map(|a| (a.location, a.mass)).collect::<Vec<_>>());
    println!("nu: {:?}", pair.nu.atoms().iter().map(|a| (a.location, a.mass)).collect::<Vec<_>>());

    // The dense model of mu, perturbed, has eigenvalues exactly at b.
    let spec = perturb_spectrum(&measure_to_model(&pair.mu)?, lam)?;
    println!("eigenvalues: {:?}", spec.measure.locations());

    let bad = is_well_mixed(&[0.0, 3.0], &[1.0, 2.0])?;
    println!("[0, 3] vs [1, 2]: well mixed {}, {:?}", bad.well_mixed, bad.violation);
    Ok(())
}
