//! Staged refinement of a shift: each stage keeps the old atoms nearly fixed
//! while adding new ones, and the pair stays consistent throughout.

use spectral_shift::constructions::{pair_residual, theorem_4_1_stage};
use spectral_shift::{Coupling, PhaseShift, ShiftSign, UpperHalfPlanePoint};

fn main() -> spectral_shift::Result<()> {
    let mut u = PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0)])?;
    let grid: Vec<UpperHalfPlanePoint> =
        (-4..=4).map(|i| UpperHalfPlanePoint::new(0.5 * i as f64, 0.2).unwrap()).collect();
    for (i, b) in [2.0, 0.5, -1.0, 1.5].into_iter().enumerate() {
        let k = i as u32 + 1;
        let r = theorem_4_1_stage(&u, b, k)?;
        println!("stage {k}: new jump at {b}, c = {:.3e}, bounds hold {}", r.c, r.passes());
        for d in &r.drifts {
            println!(
                "  atom {:>8.5}: ratio {:.9} (predicted {:.9}) within bound {}",
                d.location, d.exact_ratio, d.predicted_ratio, d.within_bound
            );
        }
        u = r.shift;
        println!("  pair residual {:.2e}", pair_residual(&u, Coupling::new(1.0)?, &grid)?);
    }
    Ok(())
}
