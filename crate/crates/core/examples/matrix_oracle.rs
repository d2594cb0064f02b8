//! The dense eigensolver against the resolvent formula and the shift pipeline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spectral_shift::matrix_oracle::compare_with_formula;
use spectral_shift::measures::random_measure;
use spectral_shift::Coupling;

fn main() -> spectral_shift::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1, 4, 12, 40] {
        let m = random_measure(&mut rng, n, 0.0, 1.0, 1e-3)?;
        for l in [-2.0, -0.5, 0.5, 2.0] {
            let d = compare_with_formula(&m, Coupling::new(l)?)?;
            println!(
                "n = {n:>2}, lambda = {l:>4}: location error {:.1e}, mass error {:.1e}, interlacing {}",
                d.max_location_error, d.max_mass_error, d.interlacing
            );
        }
    }
    Ok(())
}
