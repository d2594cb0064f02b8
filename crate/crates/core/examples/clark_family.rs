//! A rank-one family: perturbed Cauchy transforms, the circle parameter of a
//! coupling, and the atom test on the characteristic function.

use spectral_shift::rank_one::{classify_points, coupling_to_circle, perturbed_cauchy};
use spectral_shift::{Atom, AtomicMeasure, Coupling, UpperHalfPlanePoint};

fn main() -> spectral_shift::Result<()> {
    // Two atoms of mass 1/2; at λ = 1 the perturbed spectrum is 1 ± 1/√2.
    let m0 = AtomicMeasure::new(vec![Atom::new(0.0, 0.5), Atom::new(1.0, 0.5)], 0.0)?;
    let lam = Coupling::new(1.0)?;
    let alpha = coupling_to_circle(lam);
    println!("alpha = {:.6}, scale c = {:.6}", alpha.alpha, alpha.scale_c);

    let z = UpperHalfPlanePoint::new(0.5, 0.5)?;
    println!("K nu_1(0.5 + 0.5i) = {:.9}", perturbed_cauchy(&m0, lam, z)?);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let xs = [1.0 - s, 0.0, 0.5, 1.0, 1.0 + s];
    for (x, v) in classify_points(&m0, lam, &xs)? {
        let mass = v.mass.map(|w| format!("{w:.12}")).unwrap_or_else(|| "-".into());
        println!("x = {x:<20} {:<14} mass {mass}", format!("{:?}", v.kind));
    }
    Ok(())
}
