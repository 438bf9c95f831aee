//! Command line front end: validate algebras, lift and inspect curves, run
//! excess and blow-up sweeps, the identity check suites, and the shortening
//! pipeline. Every command prints canonical JSON to stdout; CSV artifacts go
//! to explicit paths. Outputs are deterministic for a fixed seed, and thread
//! count (RAYON_NUM_THREADS) never changes any reported number.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use carnot::algebra::StratifiedAlgebra;
use carnot::blowup;
use carnot::checks::{self, SuiteReport};
use carnot::excess;
use carnot::io;
use carnot::shorten;
use carnot::tol;
use carnot::Error;

type Alg = StratifiedAlgebra<f64>;

const STANDARD_ALGEBRAS: [&str; 5] =
    ["heisenberg(1)", "heisenberg(2)", "engel", "free(2,3)", "free(3,2)"];

#[derive(Parser)]
#[command(name = "carnot", version, about = "Carnot-group curves: excess, surgery, blow-ups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Algebra tables.
    Algebra {
        #[command(subcommand)]
        action: AlgebraAction,
    },
    /// Horizontal curves.
    Curve {
        #[command(subcommand)]
        action: CurveAction,
    },
    /// Excess of a curve over a window, optionally across shrinking windows.
    Excess(ExcessArgs),
    /// Disjoint subintervals whose displacements span the horizontal layer.
    SelectIntervals(SelectArgs),
    /// Randomized verification suites.
    Surgery {
        #[command(subcommand)]
        action: SurgeryAction,
    },
    /// Cut a window and repair the endpoint; optionally sweep window sizes.
    Shorten(ShortenArgs),
    /// Blow-up profile and tangent line detection at a point.
    Blowup(BlowupArgs),
}

#[derive(Subcommand)]
enum AlgebraAction {
    /// Build the table, run all structural validations, report the shape.
    Validate {
        /// Built-in name (heisenberg(m), engel, free(r,s)) or a JSON file.
        algebra: String,
    },
}

#[derive(Subcommand)]
enum CurveAction {
    /// Lift the controls and report endpoint and length; optionally write
    /// the curve back in canonical form.
    Lift {
        #[arg(long)]
        curve: PathBuf,
        /// Write the canonically formatted curve here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the curve on a uniform grid.
    Show {
        #[arg(long)]
        curve: PathBuf,
        /// Number of sample points.
        #[arg(long, default_value_t = 9)]
        samples: usize,
    },
}

#[derive(Args)]
struct ExcessArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Window bounds.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    window: Vec<f64>,
    /// Extra window scales: each entry shrinks the window around its
    /// midpoint by that factor.
    #[arg(long, value_delimiter = ',')]
    scales: Vec<f64>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    curve: PathBuf,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    window: Vec<f64>,
    /// Dyadic search depth; default adapts to the rank.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Subcommand)]
enum SurgeryAction {
    /// Run the seeded identity suites; nonzero exit if any check fails.
    Check {
        /// Algebras to check; defaults to the standard five.
        #[arg(long = "algebra")]
        algebras: Vec<String>,
        #[arg(long, default_value_t = 2026)]
        seed: u64,
        /// Random cases per check.
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
}

#[derive(Args)]
struct ShortenArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Cut window size (half-width in symmetric mode).
    #[arg(long)]
    eta: f64,
    /// Excess threshold below which nothing is cut.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Margin in the window exponent ladder.
    #[arg(long, default_value_t = 0.02)]
    beta: f64,
    /// Window exponent of the deepest layer.
    #[arg(long, default_value_t = 0.8)]
    rho_last: f64,
    /// Dyadic interval-search depth; default adapts to the rank.
    #[arg(long)]
    depth: Option<usize>,
    /// Cut around time zero of a symmetric domain instead of the left end.
    #[arg(long)]
    symmetric: bool,
    /// Run the pipeline once per window size instead of once.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
    /// Write the shortened curve here (single run only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write sweep results here as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BlowupArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Base time of the blow-up.
    #[arg(long, allow_negative_numbers = true)]
    time: f64,
    /// Window scales, largest first.
    #[arg(long, value_delimiter = ',', required = true)]
    scales: Vec<f64>,
    /// Residual below which a tangent line is declared.
    #[arg(long, default_value_t = tol::TANGENT_DETECTION)]
    threshold: f64,
    /// Write the profile here as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// A failure with its process exit code and machine-readable kind.
struct Failure {
    kind: &'static str,
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, code) = match &e {
            Error::Json(_) | Error::Io(_) => ("parse", 2),
            Error::UnknownAlgebra(_)
            | Error::InvalidAlgebra(_)
            | Error::InvalidCurve(_)
            | Error::EmptyWindow
            | Error::WindowOutOfDomain { .. } => ("validation", 3),
            Error::InfeasibleParams(_) => ("infeasible_params", 4),
            Error::DegenerateDirections { .. } => ("degenerate_directions", 5),
            Error::SingularIncrements
            | Error::BracketMapNotSurjective { .. }
            | Error::UnexpectedDefect { .. } => ("numeric", 6),
        };
        Failure { kind, code, message: e.to_string() }
    }
}

fn suite_failure(failed: &[String]) -> Failure {
    Failure {
        kind: "suite_failure",
        code: 1,
        message: format!("identity checks failed: {}", failed.join(", ")),
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    kind: &'a str,
    code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let record = ErrorRecord { error: &f.message, kind: f.kind, code: f.code };
            eprintln!(
                "{}",
                serde_json::to_string(&record).unwrap_or_else(|_| f.message.clone())
            );
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Algebra { action: AlgebraAction::Validate { algebra } } => {
            cmd_algebra_validate(&algebra)
        }
        Command::Curve { action: CurveAction::Lift { curve, out } } => {
            cmd_curve_lift(&curve, out.as_deref())
        }
        Command::Curve { action: CurveAction::Show { curve, samples } } => {
            cmd_curve_show(&curve, samples)
        }
        Command::Excess(args) => cmd_excess(&args),
        Command::SelectIntervals(args) => cmd_select(&args),
        Command::Surgery { action: SurgeryAction::Check { algebras, seed, cases } } => {
            cmd_surgery_check(&algebras, seed, cases)
        }
        Command::Shorten(args) => cmd_shorten(&args),
        Command::Blowup(args) => cmd_blowup(&args),
    }
}

/// Treats the argument as a file when it exists on disk, otherwise as a
/// built-in algebra name.
fn resolve_algebra(spec: &str) -> Result<Alg, Error> {
    if Path::new(spec).exists() {
        io::load_algebra(spec)
    } else {
        Alg::builtin(spec)
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = io::to_canonical_json(value).map_err(Failure::from)?;
    print!("{text}");
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::from(Error::from(e)))
}

fn cmd_algebra_validate(spec: &str) -> Result<(), Failure> {
    let alg = resolve_algebra(spec)?;
    #[derive(Serialize)]
    struct Out<'a> {
        command: &'a str,
        source: &'a str,
        label: &'a str,
        dimension: usize,
        rank: usize,
        step: usize,
        layers: &'a [usize],
        status: &'a str,
    }
    print_json(&Out {
        command: "algebra validate",
        source: spec,
        label: alg.label(),
        dimension: alg.n(),
        rank: alg.rank(),
        step: alg.step(),
        layers: alg.layer_dims(),
        status: "valid",
    })
}

fn cmd_curve_lift(curve: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let (alg, path) = io::load_curve(curve)?;
    let end = path.endpoint(&alg);
    #[derive(Serialize)]
    struct Out<'a> {
        command: &'a str,
        algebra: &'a str,
        domain: (f64, f64),
        pieces: usize,
        length: f64,
        arclength: bool,
        endpoint: &'a [f64],
        endpoint_homogeneous_norm: f64,
    }
    print_json(&Out {
        command: "curve lift",
        algebra: alg.label(),
        domain: path.domain(),
        pieces: path.pieces().len(),
        length: path.length(),
        arclength: path.is_arclength(),
        endpoint: end.log().coords(),
        endpoint_homogeneous_norm: alg.homogeneous_norm(&end),
    })?;
    if let Some(out) = out {
        io::save_curve(out, &alg, &path)?;
    }
    Ok(())
}

fn cmd_curve_show(curve: &Path, samples: usize) -> Result<(), Failure> {
    if samples < 2 {
        return Err(Failure::from(Error::InvalidCurve(
            "need at least two sample points".into(),
        )));
    }
    let (alg, path) = io::load_curve(curve)?;
    let (a, b) = path.domain();
    let times: Vec<f64> = (0..samples)
        .map(|k| a + (b - a) * k as f64 / (samples - 1) as f64)
        .collect();
    let grid = path.sample(&alg, &times);
    let points: Vec<&[f64]> = grid.points.iter().map(|g| g.log().coords()).collect();
    #[derive(Serialize)]
    struct Out<'a> {
        command: &'a str,
        algebra: &'a str,
        times: &'a [f64],
        points: Vec<&'a [f64]>,
    }
    print_json(&Out {
        command: "curve show",
        algebra: alg.label(),
        times: &grid.times,
        points,
    })
}

fn window_of(args: &[f64]) -> (f64, f64) {
    (args[0], args[1])
}

fn cmd_excess(args: &ExcessArgs) -> Result<(), Failure> {
    let (alg, path) = io::load_curve(&args.curve)?;
    let (lo, hi) = window_of(&args.window);
    let report = excess::excess(&alg, &path, lo, hi)?;

    #[derive(Serialize)]
    struct Row {
        scale: f64,
        window: (f64, f64),
        value: f64,
    }
    let mid = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    let rows = args
        .scales
        .iter()
        .map(|&s| {
            let rep = excess::excess(&alg, &path, mid - s * half, mid + s * half)?;
            Ok(Row { scale: s, window: rep.window, value: rep.value })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    #[derive(Serialize)]
    struct Out<'a> {
        command: &'a str,
        algebra: &'a str,
        report: &'a excess::ExcessReport<f64>,
        #[serde(skip_serializing_if = "Vec::is_empty")]
        scaled_windows: Vec<Row>,
    }
    print_json(&Out {
        command: "excess",
        algebra: alg.label(),
        report: &report,
        scaled_windows: rows,
    })
}

fn cmd_select(args: &SelectArgs) -> Result<(), Failure> {
    let (alg, path) = io::load_curve(&args.curve)?;
    let (lo, hi) = window_of(&args.window);
    let depth = args.depth.unwrap_or_else(|| excess::default_depth(alg.rank()));
    let sel = excess::select_intervals(&alg, &path, lo, hi, depth)?;
    #[derive(Serialize)]
    struct Out<'a> {
        command: &'a str,
        algebra: &'a str,
        window: (f64, f64),
        depth: usize,
        selection: &'a excess::IntervalSelection<f64>,
    }
    print_json(&Out {
        command: "select-intervals",
        algebra: alg.label(),
        window: (lo, hi),
        depth,
        selection: &sel,
    })
}

fn cmd_surgery_check(algebras: &[String], seed: u64, cases: usize) -> Result<(), Failure> {
    let names: Vec<String> = if algebras.is_empty() {
        STANDARD_ALGEBRAS.iter().map(|s| s.to_string()).collect()
    } else {
        algebras.to_vec()
    };
    let mut suites: Vec<SuiteReport> = Vec::with_capacity(names.len());
    for name in &names {
        let alg = resolve_algebra(name)?;
        suites.push(checks::run_suite(&alg, seed, cases));
    }
    let pass = suites.iter().all(|s| s.pass);
    #[derive(Serialize)]
    struct Out<'a> {
        command: &'a str,
        seed: u64,
        cases: usize,
        suites: &'a [SuiteReport],
        pass: bool,
    }
    print_json(&Out { command: "surgery check", seed, cases, suites: &suites, pass })?;
    if !pass {
        let failed: Vec<String> = suites
            .iter()
            .flat_map(|s| {
                s.checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(move |c| format!("{}/{}", s.algebra, c.name))
            })
            .collect();
        return Err(suite_failure(&failed));
    }
    Ok(())
}

#[derive(Serialize)]
struct Tolerances {
    endpoint_residual: f64,
    connector_residual: f64,
    pipeline_layer_residual: f64,
    degenerate_determinant: f64,
}

fn tolerances() -> Tolerances {
    Tolerances {
        endpoint_residual: tol::ENDPOINT_RESIDUAL,
        connector_residual: tol::CONNECTOR_RESIDUAL,
        pipeline_layer_residual: tol::PIPELINE_LAYER_RESIDUAL,
        degenerate_determinant: tol::DEGENERATE_DET,
    }
}

fn sweep_csv(points: &[shorten::SweepPoint<f64>]) -> String {
    let mut out = String::from("eta,gross_gain,correction_cost,net_gain,endpoint_residual\n");
    for p in points {
        let gross = p.ledger.cut.as_ref().map_or(0.0, |c| c.gain);
        let cost: f64 = p.ledger.stages.iter().map(|s| s.added_length).sum();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.eta, gross, cost, p.ledger.net_gain, p.ledger.endpoint_residual
        ));
    }
    out
}

fn cmd_shorten(args: &ShortenArgs) -> Result<(), Failure> {
    let (alg, path) = io::load_curve(&args.curve)?;
    let mut params = shorten::choose_params(&alg, args.eta, args.beta, args.rho_last, args.eps)?;
    if let Some(depth) = args.depth {
        params.depth = depth;
    }

    if args.sweep.is_empty() {
        let outcome = if args.symmetric {
            shorten::shorten_symmetric(&alg, &path, &params)
        } else {
            shorten::shorten_one_sided(&alg, &path, &params)
        }?;
        #[derive(Serialize)]
        struct Out<'a> {
            command: &'a str,
            algebra: &'a str,
            symmetric: bool,
            params: &'a shorten::ShortenParams<f64>,
            tolerances: Tolerances,
            ledger: &'a shorten::SurgeryLedger<f64>,
        }
        print_json(&Out {
            command: "shorten",
            algebra: alg.label(),
            symmetric: args.symmetric,
            params: &params,
            tolerances: tolerances(),
            ledger: &outcome.ledger,
        })?;
        if let Some(out) = &args.out {
            io::save_curve(out, &alg, &outcome.curve)?;
        }
        Ok(())
    } else {
        let points = shorten::sweep(&alg, &path, &params, &args.sweep, args.symmetric)?;
        let exponent = shorten::cost_exponent(&points);
        #[derive(Serialize)]
        struct Out<'a> {
            command: &'a str,
            algebra: &'a str,
            symmetric: bool,
            params: &'a shorten::ShortenParams<f64>,
            tolerances: Tolerances,
            points: &'a [shorten::SweepPoint<f64>],
            cost_exponent: Option<f64>,
        }
        print_json(&Out {
            command: "shorten sweep",
            algebra: alg.label(),
            symmetric: args.symmetric,
            params: &params,
            tolerances: tolerances(),
            points: &points,
            cost_exponent: exponent,
        })?;
        if let Some(csv) = &args.csv {
            write_text(csv, &sweep_csv(&points))?;
        }
        Ok(())
    }
}

fn blowup_csv(est: &blowup::TangentLineEstimate<f64>, rank: usize) -> String {
    let mut header = String::from("scale,excess");
    for i in 1..=rank {
        header.push_str(&format!(",v{i}"));
    }
    header.push_str(",residual,ratio\n");
    let mut out = header;
    for row in &est.rows {
        out.push_str(&format!("{},{}", row.scale, row.excess));
        for v in &row.mean_direction {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{},{}\n", row.rms_residual, row.ratio));
    }
    out
}

fn cmd_blowup(args: &BlowupArgs) -> Result<(), Failure> {
    let (alg, path) = io::load_curve(&args.curve)?;
    let est =
        blowup::tangent_line_estimate(&alg, &path, args.time, &args.scales, args.threshold)?;
    #[derive(Serialize)]
    struct Out<'a> {
        command: &'a str,
        algebra: &'a str,
        estimate: &'a blowup::TangentLineEstimate<f64>,
    }
    print_json(&Out { command: "blowup", algebra: alg.label(), estimate: &est })?;
    if let Some(csv) = &args.csv {
        write_text(csv, &blowup_csv(&est, alg.rank()))?;
    }
    Ok(())
}
