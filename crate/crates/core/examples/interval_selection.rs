//! Choosing generations of gaps so a point is surrounded by divergent mass on
//! both sides, then shrinking the chosen gaps so principal values stay bounded.

use spectral_shift::constructions::{lemma_4_2_select, lemma_4_3_refine, middle_thirds, quadratic_z_points};
use spectral_shift::IntervalSet;

fn main() -> spectral_shift::Result<()> {
    let gaps = IntervalSet::from_unsorted(middle_thirds(14).concat())?;
    let cert = lemma_4_2_select(&gaps, 6, &[0.25])?;
    for (i, g) in cert.generations.iter().enumerate() {
        println!(
            "generation {i}: left {:.3}, right {:.3}, coverage {:.4} of pool {:.4}",
            g.min_left, g.min_right, g.coverage, g.pool_measure
        );
    }
    println!("L has {} intervals, M has {}", cert.l.len(), cert.m.len());

    let r = lemma_4_3_refine(&cert, &quadratic_z_points(&cert, 0.5))?;
    println!("largest shrink ratio {:.4}, quarter condition {}", r.max_delta_ratio, r.quarter_ok);
    let scales: Vec<f64> = (1..=10).map(|k| 3f64.powi(-k)).collect();
    for (eps, v) in r.pv_trail(&cert, 0.25, &scales)? {
        println!("  p.v. at 1/4 truncated at {eps:.2e}: {v:+.6}");
    }
    Ok(())
}
