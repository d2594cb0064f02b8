//! Cauchy and Poisson transforms of an atomic measure, a vertical boundary
//! limit, Stieltjes inversion, and exp(Ku) for a step shift.

use spectral_shift::transforms::{cauchy, cauchy_of_shift_quadrature, nontangential_limit, poisson, stieltjes_atom};
use spectral_shift::phase_shift::exp_k_shift;
use spectral_shift::{Atom, AtomicMeasure, LimitConfig, PhaseShift, ShiftSign, UpperHalfPlanePoint};

fn main() -> spectral_shift::Result<()> {
    let m = AtomicMeasure::new(vec![Atom::new(-1.0, 0.5), Atom::new(0.0, 1.0), Atom::new(2.0, 0.25)], 0.0)?;
    let cfg = LimitConfig::default();

    println!("{:>6} {:>6}  {:>22}  {:>12}", "x", "y", "K mu", "P mu");
    for (x, y) in [(0.5, 1.0), (0.5, 0.1), (-1.0, 0.01)] {
        let z = UpperHalfPlanePoint::new(x, y)?;
        let k = cauchy(&m, z)?;
        println!("{x:>6} {y:>6}  {:>10.6}{:+.6}i  {:>12.6}", k.re, k.im, poisson(&m, z));
    }

    // Off the atoms the boundary value is real.
    let lim = nontangential_limit(|z| cauchy(&m, z).unwrap(), 1.0, &cfg);
    println!("K mu(1 + i0) -> {:?} ({:?})", lim.value, lim.kind);

    for a in m.atoms() {
        let w = stieltjes_atom(|z| cauchy(&m, z).unwrap(), a.location, &cfg)?;
        println!("recovered mass at {:>4}: {w:.12} (true {})", a.location, a.mass);
    }

    let u = PhaseShift::from_intervals(ShiftSign::Positive, &[(0.0, 1.0)])?;
    let z = UpperHalfPlanePoint::new(0.0, 1.0)?;
    let closed = exp_k_shift(&u, z)?;
    let quad = cauchy_of_shift_quadrature(&u, z).exp();
    println!("exp K(pi chi_(0,1))(i): closed form {closed:.12}, quadrature {quad:.12}");
    Ok(())
}
