//! The Cantor family: for |λ| outside (0,1) the spectrum is pure point with
//! one atom per gap; inside it is singular continuous on the Cantor set.

use spectral_shift::constructions::{cantor_build, classify_lambda_sweep, CantorSpec, LambdaRegime, SweepConfig};

fn main() -> spectral_shift::Result<()> {
    let depth = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let tree = cantor_build(&CantorSpec::default_with_depth(depth))?;
    println!(
        "depth {depth}: {} leaves, |C| = {:.9}, matches product {}, density chain {}",
        tree.leaves().len(),
        tree.measure(),
        tree.measure_matches(),
        tree.density_holds()
    );
    for r in classify_lambda_sweep(&tree, &[-1.0, 0.25, 0.5, 2.0], &SweepConfig::default())? {
        let detail = match r.regime {
            LambdaRegime::InsideUnit => {
                format!("divergent quotients at {}/{} points of C", r.sc_evidence, r.sample_points.len())
            }
            _ => format!(
                "{} atoms ({} confirmed), {}/{} gaps hit, oracle error {:.1e}",
                r.atoms.len(),
                r.confirmed_atoms,
                r.atoms_in_bounded_gaps,
                r.bounded_gaps,
                r.oracle_max_error.unwrap_or(f64::NAN)
            ),
        };
        println!("lambda {:>5}: {:?}, {detail}", r.lambda, r.class);
    }
    Ok(())
}
