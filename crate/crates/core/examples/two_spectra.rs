//! The dyadic two-sided sequence accumulating at 0: μ keeps an atom at 0
//! while both spectra accumulate there.

use spectral_shift::constructions::example_5_2;

fn main() -> spectral_shift::Result<()> {
    println!("{:>3} {:>16} {:>16} {:>14}", "n", "criterion", "closed form", "mu{0}");
    let mut bound = 0.0;
    for n in 2..=12 {
        let e = example_5_2(n)?;
        let v = e.criterion.value.unwrap_or(f64::NAN);
        println!("{n:>3} {v:>16.12} {:>16.12} {:>14.6e}", e.expected, e.mass_at_zero);
        bound = e.bound;
    }
    println!("limit of the criterion: {bound:.12}");
    Ok(())
}
