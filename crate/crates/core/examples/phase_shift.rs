//! Shifts and measure pairs: exact inversion, the round trip back, and the
//! pointwise atom and singular-support criteria.

use spectral_shift::phase_shift::{
    atom_criterion_mu, atom_criterion_nu, exact_shift_from_pair, pair_from_shift, pair_from_shift_exact,
    singular_support_test,
};
use spectral_shift::{Coupling, PhaseShift, ShiftSign};

fn main() -> spectral_shift::Result<()> {
    let u = PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0), (2.0, 2.5), (4.0, 7.0)])?;
    let lam = Coupling::new(1.0)?;

    let exact = pair_from_shift_exact(&u, lam)?;
    println!("mu (exact):");
    for (x, w) in &exact.mu {
        println!("  {x}: {w}");
    }
    println!("nu (exact):");
    for (x, w) in &exact.nu {
        println!("  {x}: {w}");
    }

    let pair = pair_from_shift(&u, lam)?;
    let back = exact_shift_from_pair(&pair.mu, lam)?;
    println!("round trip reproduces the shift: {}", back == u);

    for x in [0.0, 0.5, 1.0, 2.5, 3.0] {
        let s = singular_support_test(&u, x);
        println!(
            "x = {x:<4} mu {:?}, nu {:?}, support side {:?}",
            atom_criterion_mu(&u, x).verdict,
            atom_criterion_nu(&u, x).verdict,
            s.side
        );
    }
    Ok(())
}
