use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pointline::compose::{
    cell_ranges, iterate_compose, sampled_verification, ComposeMode, ComposeParams,
    RecursionPlan, DEFAULT_SAMPLE_PAIRS, DEFAULT_VERIFY_CAP,
};
use pointline::geometry::{trivial_configuration, verify_claim, TOL_ABS};
use pointline::io::{parse_fraction, read_config, to_csv_string, write_config};
use pointline::random_construct::{build_random, derive_params, DEFAULT_MAX_RETRIES};
use pointline::report::BuildReport;
use pointline::search::{search_base, SearchBudget};
use pointline::svg::render_svg;
use pointline::Error;

const EXIT_VERIFY: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "pointline", version, about = "Build and verify point-line configurations")]
struct Cli {
    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized construction with empty strips at distance delta.
    BuildRandom(BuildRandomArgs),
    /// Self-affine composition of a base with an inner configuration.
    Compose(ComposeArgs),
    /// Recompute d(X) and check it against the claimed distance.
    Verify(VerifyArgs),
    /// Render to SVG or write CSV.
    Export(ExportArgs),
    /// Write the stacked-lines baseline with n elements.
    Trivial(TrivialArgs),
    /// Local search for a small configuration with large d(X).
    SearchBase(SearchArgs),
}

#[derive(Args)]
struct BuildRandomArgs {
    #[arg(long)]
    delta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
    max_retries: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Guaranteed,
    Exploratory,
}

#[derive(Args)]
struct ComposeArgs {
    #[arg(long)]
    base: PathBuf,
    /// Inner seed; a single element at the origin when omitted.
    #[arg(long)]
    inner: Option<PathBuf>,
    /// Scale, decimal or exact ratio such as 1/64.
    #[arg(long)]
    w: String,
    /// Shift separation constant.
    #[arg(long = "C", default_value = "5")]
    c: String,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, value_enum, default_value = "exploratory")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep (i, j, inner) provenance labels in the output file.
    #[arg(long)]
    labels: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long, conflicts_with = "sampled")]
    exact: bool,
    /// Same-cell pairs plus random cross pairs; only above the exact cap.
    #[arg(long)]
    sampled: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    file: PathBuf,
    #[arg(long, required_unless_present = "csv")]
    svg: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Vertical half-width of the strips drawn around each line.
    #[arg(long, default_value = "0")]
    strip_width: String,
}

#[derive(Args)]
struct TrivialArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "0")]
    delta_target: String,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 20_000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::ClaimViolated { .. }
            | Error::RetriesExhausted { .. }
            | Error::SanityBoundExceeded { .. } => EXIT_VERIFY,
            Error::Io(_) | Error::Format(_) => EXIT_IO,
            _ => EXIT_PRECONDITION,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn io_failure(path: &Path, err: Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {err}", path.display()),
    }
}

fn load(path: &Path) -> Result<pointline::Configuration, Failure> {
    read_config(path).map_err(|e| io_failure(path, e))
}

fn save(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e.into()))
}

fn emit_report(report: &BuildReport, path: Option<&Path>) -> Result<(), Failure> {
    let json = report.to_json() + "\n";
    if let Some(p) = path {
        save(p, &json)?;
    }
    print!("{json}");
    Ok(())
}

fn precondition(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_PRECONDITION,
        message: message.into(),
    }
}

fn fraction(s: &str, name: &str) -> Result<f64, Failure> {
    parse_fraction(s).map_err(|e| precondition(format!("--{name}: {e}")))
}

fn build_random_cmd(args: BuildRandomArgs) -> Result<(), Failure> {
    let delta = fraction(&args.delta, "delta")?;
    let params = derive_params(delta, args.seed, args.max_retries)?;
    match build_random(&params) {
        Ok((config, report)) => {
            write_config(&args.out, &config, false).map_err(|e| io_failure(&args.out, e))?;
            emit_report(&report, args.report.as_deref())
        }
        Err(Error::RetriesExhausted {
            attempts,
            best_size,
            target,
            best,
        }) => {
            let (config, report) = *best;
            write_config(&args.out, &config, false).map_err(|e| io_failure(&args.out, e))?;
            emit_report(&report, args.report.as_deref())?;
            Err(Failure {
                code: EXIT_VERIFY,
                message: format!(
                    "retries exhausted after {attempts} attempts: best kept {best_size} of target {target}"
                ),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn compose_cmd(args: ComposeArgs) -> Result<(), Failure> {
    let w = fraction(&args.w, "w")?;
    let c = fraction(&args.c, "C")?;
    let mode = match args.mode {
        Mode::Guaranteed => ComposeMode::Guaranteed,
        Mode::Exploratory => ComposeMode::Exploratory,
    };
    let mut params = ComposeParams::new(w, c, mode)?;
    params.sample_seed = args.seed;
    let base = load(&args.base)?;
    let inner = match &args.inner {
        Some(p) => load(p)?,
        None => RecursionPlan::singleton_seed(),
    };
    let plan = RecursionPlan::new(args.depth, base, inner, params)?;
    let (config, report) = iterate_compose(&plan)?;
    write_config(&args.out, &config, args.labels).map_err(|e| io_failure(&args.out, e))?;
    if let Some(levels) = &report.levels {
        eprint!("{}", levels.to_text());
    }
    emit_report(&report, args.report.as_deref())?;
    if report.success {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: "case-bound violations on the guaranteed path".into(),
        })
    }
}

fn verify_cmd(args: VerifyArgs) -> Result<(), Failure> {
    let config = load(&args.file)?;
    let n = config.len();
    println!("n = {n}");
    if args.sampled {
        if n <= DEFAULT_VERIFY_CAP {
            return Err(precondition(format!(
                "--sampled is only allowed above {DEFAULT_VERIFY_CAP} elements; use --exact"
            )));
        }
        let claimed = config.claimed_delta().ok_or(Error::MissingClaim)?;
        let ranges = config.labels().map(cell_ranges).unwrap_or_default();
        let v = sampled_verification(&config, &ranges, DEFAULT_SAMPLE_PAIRS, args.seed)?;
        let w = v.witness.expect("sampled witness");
        println!("method = sampled ({} pairs)", v.pairs_checked);
        println!("d(X) <= {} (sampled)", w.value);
        println!("witness = point {} to line {}", w.index_a, w.index_b);
        println!("claimed = {claimed}");
        if w.value < claimed - TOL_ABS {
            println!("FAIL");
            return Err(Error::ClaimViolated {
                claimed,
                measured: w.value,
                witness: w,
            }
            .into());
        }
        println!("PASS");
        return Ok(());
    }
    match verify_claim(&config) {
        Ok(check) if check.degenerate => {
            println!("degenerate: fewer than two elements, nothing to check");
            println!("PASS");
            Ok(())
        }
        Ok(check) => {
            let w = check.witness.expect("witness");
            println!("method = exact");
            println!("d(X) = {}", w.value);
            println!("witness = point {} to line {}", w.index_a, w.index_b);
            println!("claimed = {}", check.claimed_delta.expect("claim"));
            if let Some(warn) = check.sanity_warning {
                eprintln!("warning: {warn}");
            }
            println!("PASS");
            Ok(())
        }
        Err(Error::ClaimViolated {
            claimed,
            measured,
            witness,
        }) => {
            println!("method = exact");
            println!("d(X) = {measured}");
            println!("witness = point {} to line {}", witness.index_a, witness.index_b);
            println!("claimed = {claimed}");
            println!("FAIL");
            Err(Error::ClaimViolated {
                claimed,
                measured,
                witness,
            }
            .into())
        }
        Err(e) => Err(e.into()),
    }
}

fn export_cmd(args: ExportArgs) -> Result<(), Failure> {
    let config = load(&args.file)?;
    let strip = fraction(&args.strip_width, "strip-width")?;
    if strip < 0.0 {
        return Err(precondition("--strip-width must be nonnegative"));
    }
    if let Some(p) = &args.svg {
        save(p, &render_svg(&config, strip))?;
    }
    if let Some(p) = &args.csv {
        save(p, &to_csv_string(&config)?)?;
    }
    Ok(())
}

fn trivial_cmd(args: TrivialArgs) -> Result<(), Failure> {
    let config = trivial_configuration(args.n)?;
    write_config(&args.out, &config, false).map_err(|e| io_failure(&args.out, e))
}

fn search_cmd(args: SearchArgs) -> Result<(), Failure> {
    let target = fraction(&args.delta_target, "delta-target")?;
    let budget = SearchBudget {
        restarts: args.restarts,
        steps_per_restart: args.steps,
    };
    let out = search_base(args.k, target, budget, args.seed)?;
    write_config(&args.out, &out.config, false).map_err(|e| io_failure(&args.out, e))?;
    println!("d(X) = {} (restart {})", out.delta, out.restart);
    if out.met_target {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("budget exhausted below target {target}"),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_PRECONDITION);
        }
    }
    let result = match cli.command {
        Command::BuildRandom(a) => build_random_cmd(a),
        Command::Compose(a) => compose_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Export(a) => export_cmd(a),
        Command::Trivial(a) => trivial_cmd(a),
        Command::SearchBase(a) => search_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
