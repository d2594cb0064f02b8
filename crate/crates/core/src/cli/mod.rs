//! The `spectral-shift` command line.
//!
//! Every subcommand reads the JSON formats of [`crate::io`] and writes either
//! JSON or CSV. Malformed input exits with 2 and a JSON error on stderr; a
//! computed check that does not hold exits with 1.

mod repro;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::constructions::{
    cantor_build, classify_lambda_sweep, example_5_2, theorem_5_5_check_set, build_interleaved_shift, is_well_mixed,
    CantorSpec, PorosityVerdict, SpectralClass, SweepConfig, WellMixedPair,
};
use crate::error::{Error, Result};
use crate::io::{self, MeasureJson, ShiftJson, Table};
use crate::matrix_oracle::{compare_with_formula, resolvent_atoms};
use crate::measures::{random_measure, AtomicMeasure};
use crate::phase_shift::{
    atom_criterion_mu, atom_criterion_nu, exact_shift_from_pair, pair_from_shift, singular_support_test, CriterionResult,
    PhaseShift,
};
use crate::rank_one::{classify_points, coupling_to_circle, perturbed_cauchy, Coupling};
use crate::transforms::{cauchy, nontangential_limit, poisson, stieltjes_atom, LimitConfig, UpperHalfPlanePoint};
use crate::C64;

#[derive(Debug, Parser)]
#[command(name = "spectral-shift", version, about = "Rank-one perturbations, spectral shifts and their constructions")]
struct Cli {
    /// Tolerance for the command's check (or the boundary-limit tolerance).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Write the main artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Validate, restrict or generate atomic measures.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Cauchy / Poisson transforms on a grid, or a boundary limit.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Convert between shifts and measure pairs; pointwise criteria.
    #[command(subcommand)]
    Shift(ShiftCmd),
    /// The perturbed measures and circle parameters of a rank-one family.
    Family(FamilyArgs),
    /// Atom test for the perturbed measure at given points.
    Classify(ClassifyArgs),
    /// Explicit constructions.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Checks on closed sets.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Spectral class of the Cantor family for several couplings.
    Sweep(SweepArgs),
    /// Cross-check against the dense eigensolver.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Reproduce a named example or theorem end to end.
    Repro(ReproArgs),
}

#[derive(Debug, Subcommand)]
enum MeasureCmd {
    /// Parse a measure and print its summary.
    Validate {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Keep the atoms inside the given intervals.
    Restrict {
        #[arg(long)]
        measure: PathBuf,
        /// Intervals JSON.
        #[arg(long)]
        to: PathBuf,
    },
    /// A seeded random measure on (0, 1).
    Random {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        min_gap: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformKind {
    Cauchy,
    Poisson,
    /// Cauchy transform of the perturbed measure (needs --lambda).
    Perturbed,
}

#[derive(Debug, Args)]
struct RayArgs {
    /// First height of the vertical ray.
    #[arg(long, default_value_t = 0.1)]
    ymax: f64,
    #[arg(long, default_value_t = 40)]
    steps: usize,
}

#[derive(Debug, Subcommand)]
enum TransformCmd {
    /// CSV `x,y,re,im` over a grid.
    Grid {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_enum, default_value = "cauchy")]
        kind: TransformKind,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        xmax: f64,
        #[arg(long, default_value_t = 31)]
        nx: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01")]
        ys: Vec<f64>,
    },
    /// Vertical boundary limit of the Cauchy transform and the atom mass at x.
    Limit {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[command(flatten)]
        ray: RayArgs,
    },
}

#[derive(Debug, Subcommand)]
enum ShiftCmd {
    /// The pair `(μ, ν)` of a shift.
    ToPair {
        #[arg(long)]
        shift: PathBuf,
        /// Defaults to the sign of the shift.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
    },
    /// The exact shift of an atomic `μ` at coupling `λ`.
    FromPair {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Point-mass criteria for both measures and the singular-support sign at x.
    Criteria {
        #[arg(long)]
        shift: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// CSV `x,value` of the shift on a grid.
    Sample {
        #[arg(long)]
        shift: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        xmax: f64,
        #[arg(long, default_value_t = 61)]
        nx: usize,
    },
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0.5,1,2")]
    lambdas: Vec<f64>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    /// CSV whose first column holds the points.
    #[arg(long)]
    points: PathBuf,
}

#[derive(Debug, Subcommand)]
enum ConstructCmd {
    /// The Cantor tree as nested JSON.
    Cantor {
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Ratio specification JSON; `--depth` is ignored when given.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// The shift and pair of two well-mixed point sets.
    Wellmixed {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        b: Vec<f64>,
    },
    /// The dyadic two-sided example truncated at n.
    Example52 {
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
enum CheckCmd {
    /// Finiteness of `Σ ∫_I dx/|x − y|` over the complementary intervals of K.
    T55 {
        /// Intervals JSON of the bounded complementary intervals.
        #[arg(long)]
        k: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Cantor specification JSON. Without it the default ratios are used.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0.5,2")]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Skip the eigensolver cross-check.
    #[arg(long)]
    no_oracle: bool,
    /// Also write every located atom as CSV here.
    #[arg(long)]
    atoms: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum OracleCmd {
    /// Discrepancy between the eigensolver, the resolvent poles and the shift pipeline.
    Compare {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReproTarget {
    #[value(name = "example-3.4")]
    Example34,
    #[value(name = "example-5.2")]
    Example52,
    #[value(name = "example-6.1")]
    Example61,
    #[value(name = "thm-5.1")]
    Thm51,
    #[value(name = "thm-5.5")]
    Thm55,
}

#[derive(Debug, Args)]
struct ReproArgs {
    #[arg(value_enum)]
    target: ReproTarget,
    /// Cantor depth for example-6.1.
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Couplings for example-6.1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0.5,2")]
    lambdas: Vec<f64>,
    /// Largest truncation for example-5.2.
    #[arg(long, default_value_t = 10)]
    n: usize,
}

/// What a handler produced.
struct Output {
    /// JSON or CSV, written to `--out` or stdout.
    artifact: String,
    /// Printed on stdout when the artifact goes to a file.
    summary: Option<String>,
    ok: bool,
}

impl Output {
    fn new(artifact: String, ok: bool) -> Self {
        Output { artifact, summary: None, ok }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.render().to_string();
            let _ = write!(err, "{}", io::to_json(&json!({"error": "usage", "message": msg.trim_end()})));
            return 2;
        }
    };
    match dispatch(&cli).and_then(|o| emit(&cli, o, out)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let (code, kind) = classify_error(&e);
            let _ = write!(err, "{}", io::to_json(&json!({"error": kind, "message": e.to_string()})));
            code
        }
    }
}

fn classify_error(e: &Error) -> (i32, &'static str) {
    match e {
        Error::Parse(_) => (2, "parse"),
        Error::Io(_) => (2, "io"),
        Error::Construction(_) | Error::Eigen(_) => (1, "computation"),
        _ => (2, "input"),
    }
}

fn emit(cli: &Cli, o: Output, out: &mut dyn Write) -> Result<bool> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &o.artifact)?;
            if let Some(s) = &o.summary {
                out.write_all(s.as_bytes())?;
            }
        }
        None => out.write_all(o.artifact.as_bytes())?,
    }
    Ok(o.ok)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Result<AtomicMeasure> {
    io::parse_measure(&read(path)?)
}

fn load_shift(path: &Path) -> Result<PhaseShift> {
    io::parse_shift(&read(path)?)
}

fn positive_tol(t: Option<f64>, default: f64) -> Result<f64> {
    match t {
        None => Ok(default),
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::Precondition(format!("--tol {v} must be positive"))),
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
        return Err(Error::Precondition(format!("grid [{lo}, {hi}] with {n} points")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn measure_value(m: &AtomicMeasure) -> Value {
    serde_json::to_value(MeasureJson::from(m)).expect("plain data")
}

fn criterion_value(c: &CriterionResult) -> Value {
    json!({"verdict": c.verdict, "value": c.value, "truncations": c.partials.len()})
}

fn c64_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.cmd {
        Cmd::Measure(c) => measure_cmd(cli, c),
        Cmd::Transform(c) => transform_cmd(cli, c),
        Cmd::Shift(c) => shift_cmd(c),
        Cmd::Family(a) => family_cmd(a),
        Cmd::Classify(a) => classify_cmd(a),
        Cmd::Construct(c) => construct_cmd(c),
        Cmd::Check(c) => check_cmd(c),
        Cmd::Sweep(a) => sweep_cmd(cli, a),
        Cmd::Oracle(c) => oracle_cmd(cli, c),
        Cmd::Repro(a) => {
            let table = repro::run(a.target, a, cli.seed)?;
            Ok(Output { artifact: table.render(), summary: Some(table.status_line()), ok: table.all_pass() })
        }
    }
}

fn measure_cmd(cli: &Cli, c: &MeasureCmd) -> Result<Output> {
    match c {
        MeasureCmd::Validate { measure } => {
            let m = load_measure(measure)?;
            let v = json!({
                "atoms": m.len(),
                "total_mass": m.total_mass(),
                "norm": m.norm(),
                "inf": m.infinity_mass(),
                "compact": m.is_compact(),
                "measure": measure_value(&m),
            });
            Ok(Output::new(io::to_json(&v), true))
        }
        MeasureCmd::Restrict { measure, to } => {
            let m = load_measure(measure)?;
            let set = io::parse_intervals(&read(to)?)?;
            Ok(Output::new(io::measure_to_json(&m.restrict(&set)), true))
        }
        MeasureCmd::Random { n, min_gap } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let m = random_measure(&mut rng, *n, 0.0, 1.0, *min_gap)?;
            Ok(Output::new(io::measure_to_json(&m), true))
        }
    }
}

fn transform_cmd(cli: &Cli, c: &TransformCmd) -> Result<Output> {
    match c {
        TransformCmd::Grid { measure, kind, lambda, xmin, xmax, nx, ys } => {
            let m = load_measure(measure)?;
            let lam = match (kind, lambda) {
                (TransformKind::Perturbed, Some(l)) => Some(Coupling::new(*l)?),
                (TransformKind::Perturbed, None) => return Err(Error::Precondition("--kind perturbed needs --lambda".into())),
                _ => None,
            };
            let mut t = Table::new(&["x", "y", "re", "im"]);
            for &y in ys {
                for x in grid(*xmin, *xmax, *nx)? {
                    let z = UpperHalfPlanePoint::new(x, y)?;
                    let w = match kind {
                        TransformKind::Cauchy => cauchy(&m, z)?,
                        TransformKind::Poisson => C64::new(poisson(&m, z), 0.0),
                        TransformKind::Perturbed => perturbed_cauchy(&m, lam.expect("checked above"), z)?,
                    };
                    t.push(vec![io::fmt_f64(x), io::fmt_f64(y), io::fmt_f64(w.re), io::fmt_f64(w.im)]);
                }
            }
            Ok(Output::new(t.to_csv(), true))
        }
        TransformCmd::Limit { measure, x, ray } => {
            let m = load_measure(measure)?;
            let cfg = LimitConfig { y0: ray.ymax, steps: ray.steps, tol: positive_tol(cli.tol, 1e-8)?, ..LimitConfig::default() };
            cfg.validate()?;
            cauchy(&m, UpperHalfPlanePoint::new(*x, 1.0)?)?;
            let lim = nontangential_limit(|z| cauchy(&m, z).expect("compact measure"), *x, &cfg);
            let mass = stieltjes_atom(|z| cauchy(&m, z).expect("compact measure"), *x, &cfg).ok();
            let v = json!({
                "x": x,
                "kind": lim.kind,
                "value": lim.value.map(c64_pair),
                "samples": lim.evidence.len(),
                "atom_mass": mass,
            });
            Ok(Output::new(io::to_json(&v), true))
        }
    }
}

fn shift_cmd(c: &ShiftCmd) -> Result<Output> {
    match c {
        ShiftCmd::ToPair { shift, lambda } => {
            let u = load_shift(shift)?;
            let lam = Coupling::new(lambda.unwrap_or(u.sign().factor()))?;
            let pair = pair_from_shift(&u, lam)?;
            let v = json!({"lambda": lam.lambda, "mu": measure_value(&pair.mu), "nu": measure_value(&pair.nu)});
            Ok(Output::new(io::to_json(&v), true))
        }
        ShiftCmd::FromPair { measure, lambda } => {
            let m = load_measure(measure)?;
            let u = exact_shift_from_pair(&m, Coupling::new(*lambda)?)?;
            Ok(Output::new(io::to_json(&ShiftJson::from_shift(&u)?), true))
        }
        ShiftCmd::Criteria { shift, x } => {
            let u = load_shift(shift)?;
            if !x.is_finite() {
                return Err(Error::Precondition("x must be finite".into()));
            }
            let support = singular_support_test(&u, *x);
            let v = json!({
                "x": x,
                "value": u.value(*x),
                "mu": criterion_value(&atom_criterion_mu(&u, *x)),
                "nu": criterion_value(&atom_criterion_nu(&u, *x)),
                "singular_support": {"side": support.side, "pv": support.pv.value, "pv_kind": support.pv.kind},
            });
            Ok(Output::new(io::to_json(&v), true))
        }
        ShiftCmd::Sample { shift, xmin, xmax, nx } => {
            let u = load_shift(shift)?;
            let mut t = Table::new(&["x", "value"]);
            for x in grid(*xmin, *xmax, *nx)? {
                t.push(vec![io::fmt_f64(x), io::fmt_f64(u.value(x))]);
            }
            Ok(Output::new(t.to_csv(), true))
        }
    }
}

fn family_cmd(a: &FamilyArgs) -> Result<Output> {
    let m = load_measure(&a.measure)?;
    let mut members = Vec::new();
    for &l in &a.lambdas {
        let lam = Coupling::new(l)?;
        let p = coupling_to_circle(lam);
        let perturbed = if l == 0.0 { m.clone() } else { AtomicMeasure::from_pairs(resolvent_atoms(&m, lam)?)? };
        members.push(json!({
            "lambda": l,
            "alpha": c64_pair(p.alpha),
            "scale_c": p.scale_c,
            "measure": measure_value(&perturbed),
        }));
    }
    Ok(Output::new(io::to_json(&json!({"base": measure_value(&m), "members": members})), true))
}

fn classify_cmd(a: &ClassifyArgs) -> Result<Output> {
    let m = load_measure(&a.measure)?;
    let xs = io::read_points(&read(&a.points)?)?;
    let verdicts = classify_points(&m, Coupling::new(a.lambda)?, &xs)?;
    let mut t = Table::new(&["x", "kind", "mass", "evidence_rate"]);
    for (x, v) in &verdicts {
        t.push(vec![io::fmt_f64(*x), io::variant_name(&v.kind), io::fmt_opt(v.mass), io::fmt_f64(v.evidence_rate())]);
    }
    Ok(Output::new(t.to_csv(), true))
}

fn construct_cmd(c: &ConstructCmd) -> Result<Output> {
    match c {
        ConstructCmd::Cantor { depth, spec } => {
            let spec = match spec {
                Some(p) => io::parse_cantor_spec(&read(p)?)?,
                None => CantorSpec::default_with_depth(*depth),
            };
            let tree = cantor_build(&spec)?;
            let ok = tree.measure_matches() && tree.density_holds() && tree.certificate.conforming;
            let summary = json!({
                "depth": tree.depth(),
                "leaves": tree.leaves().len(),
                "measure": tree.measure(),
                "measure_matches_product": tree.measure_matches(),
                "density_holds": tree.density_holds(),
                "conforming": tree.certificate.conforming,
                "c_bounds": [tree.certificate.c_lower, tree.certificate.c_upper],
            });
            Ok(Output { artifact: io::tree_to_json(&tree), summary: Some(io::to_json(&summary)), ok })
        }
        ConstructCmd::Wellmixed { a, b } => {
            let report = is_well_mixed(a, b)?;
            if !report.well_mixed {
                return Ok(Output::new(io::to_json(&json!({"well_mixed": report})), false));
            }
            let u = build_interleaved_shift(&WellMixedPair::new(a, b)?)?;
            let pair = pair_from_shift(&u, Coupling::new(u.sign().factor())?)?;
            let v = json!({
                "well_mixed": report,
                "shift": ShiftJson::from_shift(&u)?,
                "lambda": u.sign().factor(),
                "mu": measure_value(&pair.mu),
                "nu": measure_value(&pair.nu),
            });
            Ok(Output::new(io::to_json(&v), true))
        }
        ConstructCmd::Example52 { n } => {
            let e = example_5_2(*n)?;
            let ok = e.criterion.value.is_some_and(|v| v <= e.bound) && e.mass_at_zero > 0.0;
            let v = json!({
                "n": e.n,
                "a": e.a,
                "b": e.b,
                "well_mixed": e.well_mixed,
                "shift": ShiftJson::from_shift(&e.shift)?,
                "criterion": criterion_value(&e.criterion),
                "expected": e.expected,
                "bound": e.bound,
                "mass_at_zero": e.mass_at_zero,
            });
            Ok(Output::new(io::to_json(&v), ok))
        }
    }
}

fn check_cmd(c: &CheckCmd) -> Result<Output> {
    match c {
        CheckCmd::T55 { k, y } => {
            let set = io::parse_intervals(&read(k)?)?;
            let r = theorem_5_5_check_set(&set, *y)?;
            let ok = r.verdict == PorosityVerdict::Passes;
            Ok(Output::new(io::to_json(&r), ok))
        }
    }
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> Result<Output> {
    let spec = match &a.spec {
        Some(p) => io::parse_cantor_spec(&read(p)?)?,
        None => CantorSpec::default_with_depth(a.depth),
    };
    let tree = cantor_build(&spec)?;
    let cfg = SweepConfig { sample_points: a.samples, seed: cli.seed, oracle: !a.no_oracle, ..SweepConfig::default() };
    let reports = classify_lambda_sweep(&tree, &a.lambdas, &cfg)?;
    let tol = positive_tol(cli.tol, 1e-8)?;
    let ok = reports
        .iter()
        .all(|r| r.class != SpectralClass::Undecided && r.oracle_max_error.is_none_or(|e| e <= tol));
    if let Some(p) = &a.atoms {
        std::fs::write(p, io::atom_table(&reports).to_csv())?;
    }
    let table = io::sweep_table(&reports);
    let csv = table.to_csv();
    Ok(Output { summary: Some(csv.clone()), artifact: csv, ok })
}

fn oracle_cmd(cli: &Cli, c: &OracleCmd) -> Result<Output> {
    match c {
        OracleCmd::Compare { measure, lambda } => {
            let m = load_measure(measure)?;
            let d = compare_with_formula(&m, Coupling::new(*lambda)?)?;
            let tol = positive_tol(cli.tol, 1e-9)?;
            let ok = d.max_location_error <= tol && d.max_mass_error <= tol;
            Ok(Output::new(io::to_json(&d), ok))
        }
    }
}
