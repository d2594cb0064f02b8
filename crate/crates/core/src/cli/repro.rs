//! End-to-end reproductions behind `spectral-shift repro`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ReproArgs, ReproTarget};
use crate::constructions::{
    build_interleaved_shift, cantor_build, classify_lambda_sweep, default_budgets, example_5_2, middle_thirds, porous_embed,
    theorem_5_5_check, CantorSpec, LambdaRegime, PorosityVerdict, SpectralClass, SweepConfig, WellMixedPair,
};
use crate::error::Result;
use crate::matrix_oracle::{measure_to_model, perturb_spectrum};
use crate::measures::{random_measure, IntervalSet};
use crate::phase_shift::{pair_from_shift, pair_from_shift_exact, rational, AtomVerdict, PhaseShift, ShiftSign};
use crate::rank_one::Coupling;

pub(super) struct Row {
    pub item: String,
    pub detail: String,
    pub pass: bool,
}

pub(super) struct ReproTable {
    pub title: &'static str,
    pub rows: Vec<Row>,
}

impl ReproTable {
    fn new(title: &'static str) -> Self {
        ReproTable { title, rows: Vec::new() }
    }

    fn row(&mut self, item: impl Into<String>, detail: impl Into<String>, pass: bool) {
        self.rows.push(Row { item: item.into(), detail: detail.into(), pass });
    }

    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn status_line(&self) -> String {
        let n = self.rows.iter().filter(|r| r.pass).count();
        let verdict = if self.all_pass() { "PASS" } else { "FAIL" };
        format!("{}: {n}/{} {verdict}\n", self.title, self.rows.len())
    }

    pub fn render(&self) -> String {
        let w = self.rows.iter().map(|r| r.item.chars().count()).max().unwrap_or(0);
        let mut s = format!("# {}\n", self.title);
        for r in &self.rows {
            let pad = w - r.item.chars().count();
            s += &format!("{}  {}{}  {}\n", if r.pass { "PASS" } else { "FAIL" }, r.item, " ".repeat(pad), r.detail);
        }
        s + &self.status_line()
    }
}

pub(super) fn run(target: ReproTarget, args: &ReproArgs, seed: u64) -> Result<ReproTable> {
    match target {
        ReproTarget::Example34 => two_point_exact(),
        ReproTarget::Example52 => dyadic_trail(args.n),
        ReproTarget::Example61 => cantor_family(args.depth, &args.lambdas, seed),
        ReproTarget::Thm51 => well_mixed_sets(seed),
        ReproTarget::Thm55 => porosity_dichotomy(seed),
    }
}

fn two_point_exact() -> Result<ReproTable> {
    let mut t = ReproTable::new("example-3.4");
    for (x, y) in [(0.0, 1.0), (0.25, 0.75), (-1.0, 3.0)] {
        let u = PhaseShift::from_intervals(ShiftSign::Positive, &[(x, y)])?;
        let p = pair_from_shift_exact(&u, Coupling::new(1.0)?)?;
        let m = rational(y) - rational(x);
        let ok = p.mu == vec![(rational(x), m.clone())] && p.nu == vec![(rational(y), m.clone())];
        t.row(format!("u = pi*chi({x}, {y})"), format!("mu = {m}*delta_{x}, nu = {m}*delta_{y} (exact)"), ok);
    }
    Ok(t)
}

fn dyadic_trail(n_max: usize) -> Result<ReproTable> {
    let mut t = ReproTable::new("example-5.2");
    let mut values = Vec::new();
    let mut bound = f64::NAN;
    for n in 2..=n_max.max(2) {
        let e = example_5_2(n)?;
        let v = e.criterion.value.unwrap_or(f64::NAN);
        let ok = e.criterion.verdict == AtomVerdict::Atom
            && (v - e.expected).abs() <= 1e-9 * e.expected.abs().max(1.0)
            && e.well_mixed.well_mixed
            && e.mass_at_zero > 0.0;
        t.row(format!("n = {n}"), format!("criterion at 0 = {v:.12}, mu{{0}} = {:.6e}", e.mass_at_zero), ok);
        values.push(v);
        bound = e.bound;
    }
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    let bounded = values.iter().all(|&v| v <= bound);
    t.row("trail", format!("monotone {monotone}, all below {bound:.12}"), monotone && bounded);
    Ok(t)
}

fn cantor_family(depth: usize, lambdas: &[f64], seed: u64) -> Result<ReproTable> {
    let mut t = ReproTable::new("example-6.1");
    let tree = cantor_build(&CantorSpec::default_with_depth(depth))?;
    t.row("|C_depth| = product", format!("{:.12}", tree.measure()), tree.measure_matches());
    t.row("density chain", format!("{} nodes", tree.density.len()), tree.density_holds());
    t.row(
        "ratio certificate",
        format!("c in [{:.6}, {:.6}]", tree.certificate.c_lower, tree.certificate.c_upper),
        tree.certificate.conforming,
    );
    let cfg = SweepConfig { seed, ..SweepConfig::default() };
    for r in classify_lambda_sweep(&tree, lambdas, &cfg)? {
        match r.regime {
            LambdaRegime::InsideUnit => {
                let ok = r.class == SpectralClass::SingularContinuous
                    && r.confirmed_atoms == 0
                    && r.sc_evidence == r.sample_points.len();
                t.row(
                    format!("lambda = {}", r.lambda),
                    format!(
                        "{:?}: {} confirmed atoms off C, sc-evidence at {}/{} Cantor points",
                        r.class,
                        r.confirmed_atoms,
                        r.sc_evidence,
                        r.sample_points.len()
                    ),
                    ok,
                );
            }
            _ => {
                let err = r.oracle_max_error.unwrap_or(f64::NAN);
                let ok = r.class == SpectralClass::PurePoint && r.atoms_in_bounded_gaps == r.bounded_gaps && err <= 1e-8;
                let head: Vec<String> = r.atoms.iter().take(3).map(|a| format!("{:.9}", a.x)).collect();
                t.row(
                    format!("lambda = {}", r.lambda),
                    format!(
                        "{:?}: {}/{} atoms confirmed, {}/{} gaps hit, oracle error {err:.1e}, atoms {} ...",
                        r.class,
                        r.confirmed_atoms,
                        r.atoms.len(),
                        r.atoms_in_bounded_gaps,
                        r.bounded_gaps,
                        head.join(", ")
                    ),
                    ok,
                );
            }
        }
    }
    Ok(t)
}

fn well_mixed_sets(seed: u64) -> Result<ReproTable> {
    let mut t = ReproTable::new("thm-5.1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = 20;
    let (mut exact, mut positive, mut rejected) = (0, 0, 0);
    let mut eig_err: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(1..=8);
        let pts = random_measure(&mut rng, 2 * n, 0.0, 1.0, 1e-3)?.locations();
        let a_first = rng.gen::<bool>();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, &x) in pts.iter().enumerate() {
            if (i % 2 == 0) == a_first {
                a.push(x);
            } else {
                b.push(x);
            }
        }
        let u = build_interleaved_shift(&WellMixedPair::new(&a, &b)?)?;
        let lam = Coupling::new(u.sign().factor())?;
        let pair = pair_from_shift(&u, lam)?;
        if pair.mu.locations() == a && pair.nu.locations() == b {
            exact += 1;
        }
        if pair.mu.masses().iter().chain(pair.nu.masses().iter()).all(|&w| w > 0.0) {
            positive += 1;
        }
        let spec = perturb_spectrum(&measure_to_model(&pair.mu)?, lam)?;
        let got = spec.measure.locations();
        let e = if got.len() == b.len() {
            got.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        eig_err = eig_err.max(e);
        // Moving b_i past the last a below b_{i+1} leaves two b's with no a between.
        if n >= 2 {
            let mut bad_b = b.clone();
            let i = rng.gen_range(0..n - 1);
            let lo = a.iter().copied().filter(|&x| x < b[i + 1]).fold(b[i], f64::max);
            bad_b[i] = 0.5 * (lo + b[i + 1]);
            bad_b.sort_by(f64::total_cmp);
            if WellMixedPair::new(&a, &bad_b).is_err() {
                rejected += 1;
            }
        } else {
            rejected += 1;
        }
    }
    t.row("atoms of mu at A, nu at B", format!("{exact}/{trials} random well-mixed sets"), exact == trials);
    t.row("all masses positive", format!("{positive}/{trials}"), positive == trials);
    t.row("eigenvalues of A_mu + rank one = B", format!("max error {eig_err:.1e}"), eig_err <= 1e-9);
    t.row("non-mixed sets rejected", format!("{rejected}/{trials}"), rejected == trials);
    Ok(t)
}

fn cantor_point(rng: &mut ChaCha8Rng) -> f64 {
    let mut x = 0.0;
    let mut w = 1.0;
    for _ in 0..40 {
        w /= 3.0;
        if rng.gen::<bool>() {
            x += 2.0 * w;
        }
    }
    x
}

fn porosity_dichotomy(seed: u64) -> Result<ReproTable> {
    let mut t = ReproTable::new("thm-5.5");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = middle_thirds(12);
    let mut fails = 0;
    let mut min_total = f64::INFINITY;
    for _ in 0..10 {
        let r = theorem_5_5_check(&k, cantor_point(&mut rng))?;
        if r.verdict == PorosityVerdict::Fails && r.total > 10.0 {
            fails += 1;
        }
        min_total = min_total.min(r.total);
    }
    t.row("middle thirds, 10 Cantor points", format!("{fails}/10 diverge, smallest sum {min_total:.3}"), fails == 10);
    let gaps = IntervalSet::from_unsorted(middle_thirds(4).concat())?;
    let e = porous_embed(&gaps, &default_budgets(gaps.len()), 12)?;
    let ends = gaps.endpoints();
    let mut passes = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let y = ends[rng.gen_range(0..ends.len())];
        let r = theorem_5_5_check(&e.graded, y)?;
        let total = r.total + r.tail_bound.unwrap_or(f64::INFINITY);
        worst = worst.max(total);
        if r.verdict == PorosityVerdict::Passes && total < e.total_budget() {
            passes += 1;
        }
    }
    t.row(
        "porous embedding, 20 boundary points",
        format!("{passes}/20 finite, largest sum {worst:.4} < budget {:.4}", e.total_budget()),
        passes == 20 && e.total_budget() <= 1.0,
    );
    Ok(t)
}
