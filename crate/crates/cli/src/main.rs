//! `auxmarket`: solve, verify and sweep the borrowing-constrained portfolio
//! problems from the command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 the closed form does not
//! apply to the inputs, 3 a verification ran but at least one check failed.

mod format;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use auxmarket::simulator::SimConfig;
use auxmarket::verification::{Problem, VerificationReport};
use auxmarket::{build_derived, DerivedMarket, ErrorClass, MarketSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::solve::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "auxmarket", version, about = "Closed-form optimal strategies under a borrowing constraint")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the optimal strategy and value at x.
    Solve(CommonArgs),
    /// Cross-check the closed form against oracles, HJB residuals and Monte Carlo.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Solve over a grid of one input and emit one row per grid point.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Market JSON file.
    #[arg(long)]
    market: PathBuf,
    #[arg(long = "L")]
    lower: Option<f64>,
    #[arg(long = "U")]
    upper: Option<f64>,
    /// Initial wealth.
    #[arg(long)]
    x: f64,
    /// Discount rate for the reward and penalty problems.
    #[arg(long)]
    rho: Option<f64>,
    /// Defaults to `table`, or `csv` for sweeps.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 500.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Brownian-bridge barrier-crossing correction between grid points.
    #[arg(long)]
    bridge: bool,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long, requires_all = ["to", "step"], conflicts_with = "values", allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Explicit grid, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<f64>>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProblemArg {
    Goal,
    Survive,
    Reach,
    RewardMax,
    PenaltyMin,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Goal => Problem::Goal,
            ProblemArg::Survive => Problem::Survive,
            ProblemArg::Reach => Problem::Reach,
            ProblemArg::RewardMax => Problem::RewardMax,
            ProblemArg::PenaltyMin => Problem::PenaltyMin,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SweepParam {
    X,
    #[value(name = "c_net")]
    CNet,
    Rho,
    #[value(name = "L")]
    Lower,
    #[value(name = "U")]
    Upper,
}

/// Error surfaced to the user with its exit-code class.
#[derive(Debug)]
pub struct CliError {
    kind: String,
    class: ErrorClass,
    message: String,
}

impl CliError {
    fn config(kind: &str, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), class: ErrorClass::Config, message: message.into() }
    }

    pub fn missing(message: &str) -> Self {
        Self::config("MissingArgument", message)
    }

    fn exit_code(&self) -> u8 {
        match self.class {
            ErrorClass::Config => 1,
            ErrorClass::Regime => 2,
        }
    }
}

impl From<auxmarket::Error> for CliError {
    fn from(e: auxmarket::Error) -> Self {
        Self { kind: e.kind().into(), class: e.class(), message: e.to_string() }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    class: ErrorClass,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    error: ErrorBody<'a>,
}

fn load_market(path: &PathBuf) -> Result<MarketSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("MarketFile", format!("cannot read {}: {e}", path.display())))?;
    MarketSpec::from_json(&text).map_err(|e| CliError::config("MarketFile", format!("invalid market file {}: {e}", path.display())))
}

fn run_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    RunConfig::new(common.problem.into(), common.lower, common.upper, common.x, common.rho)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialise")
}

fn run_solve(common: &CommonArgs) -> Result<String, CliError> {
    let cfg = run_config(common)?;
    let dm = build_derived(load_market(&common.market)?)?;
    let out = solve::solve(&dm, &cfg)?;
    Ok(match common.format.unwrap_or(Format::Table) {
        Format::Json => to_json(&out),
        Format::Csv => format!("{}\n{}", format::solve_csv_header(dm.n()), format::solve_csv_row(&out, dm.c_net())),
        Format::Table => format::solve_table(&out),
    })
}

fn run_verify(common: &CommonArgs, sim: &SimArgs) -> Result<(String, VerificationReport), CliError> {
    let cfg = run_config(common)?;
    let dm = build_derived(load_market(&common.market)?)?;
    let sim = SimConfig {
        n_paths: sim.paths,
        dt: sim.dt,
        horizon: sim.horizon,
        seed: sim.seed,
        bridge_correction: sim.bridge,
    };
    let report = solve::verify(&dm, &cfg, &sim)?;
    let text = match common.format.unwrap_or(Format::Table) {
        Format::Json => to_json(&report),
        Format::Csv => format::report_csv(&report),
        Format::Table => format::report_table(&report),
    };
    Ok((text, report))
}

/// Grid points, inclusive of `to` up to rounding.
fn grid_points(grid: &GridArgs) -> Result<Vec<f64>, CliError> {
    let points = match (&grid.values, grid.from, grid.to, grid.step) {
        (Some(v), _, _, _) => v.clone(),
        (None, Some(from), Some(to), Some(step)) => {
            if !(step > 0.0 && step.is_finite() && from.is_finite() && to.is_finite()) {
                return Err(CliError::config("InvalidGrid", "step must be positive and bounds finite"));
            }
            if to < from {
                Vec::new()
            } else {
                let count = ((to - from) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| from + step * i as f64).collect()
            }
        }
        _ => return Err(CliError::config("InvalidGrid", "give --values or all of --from, --to and --step")),
    };
    if points.is_empty() {
        return Err(CliError::config("InvalidGrid", "empty sweep grid"));
    }
    Ok(points)
}

fn run_sweep(common: &CommonArgs, grid: &GridArgs) -> Result<(String, bool), CliError> {
    let base = run_config(common)?;
    let spec = load_market(&common.market)?;
    let points = grid_points(grid)?;
    let (need_l, need_u, need_rho) = solve::requirements(base.problem);
    let applies = match grid.param {
        SweepParam::X | SweepParam::CNet => true,
        SweepParam::Rho => need_rho,
        SweepParam::Lower => need_l,
        SweepParam::Upper => need_u,
    };
    if !applies {
        return Err(CliError::config("InvalidGrid", format!("parameter {:?} does not apply to this problem", grid.param)));
    }
    let format = common.format.unwrap_or(Format::Csv);
    let n = spec.asset_count();
    let base_market = build_derived(spec.clone())?;
    let problem_name = serde_json::to_value(base.problem).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();

    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    let mut all_ok = true;
    for p in points {
        let mut cfg = base;
        let mut row_spec = None;
        match grid.param {
            SweepParam::X => cfg.x = p,
            SweepParam::Rho => cfg.rho = Some(p),
            SweepParam::Lower => cfg.lower = Some(p),
            SweepParam::Upper => cfg.upper = Some(p),
            SweepParam::CNet => row_spec = Some(MarketSpec { c_net: p, ..spec.clone() }),
        }
        let rebuilt: DerivedMarket;
        let dm = match row_spec {
            Some(s) => {
                rebuilt = build_derived(s)?;
                &rebuilt
            }
            None => &base_market,
        };
        match solve::solve(dm, &cfg) {
            Ok(out) => {
                rows.push(format::solve_csv_row(&out, dm.c_net()));
                outputs.push(serde_json::to_value(&out).expect("serialisable"));
            }
            Err(e) if e.class == ErrorClass::Regime => {
                all_ok = false;
                let inputs = [Some(cfg.x), cfg.lower, cfg.upper, cfg.rho, Some(dm.c_net())];
                rows.push(format::failed_csv_row(&problem_name, inputs, &e.kind, n));
                outputs.push(serde_json::json!({ "x": cfg.x, "error": { "kind": e.kind, "message": e.message } }));
            }
            Err(e) => return Err(e),
        }
    }
    let text = match format {
        Format::Json => to_json(&outputs),
        Format::Csv | Format::Table => format!("{}\n{}", format::solve_csv_header(n), rows.join("\n")),
    };
    Ok((text, all_ok))
}

fn wants_json(cli: &Cli) -> bool {
    let common = match &cli.command {
        Command::Solve(c) => c,
        Command::Verify { common, .. } | Command::Sweep { common, .. } => common,
    };
    common.format == Some(Format::Json)
}

fn report_error(err: &CliError, json: bool) -> ExitCode {
    if json {
        let env = ErrorEnvelope { error: ErrorBody { kind: &err.kind, class: err.class, message: &err.message } };
        println!("{}", to_json(&env));
    } else {
        eprintln!("error ({}): {}", err.kind, err.message);
    }
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let json = wants_json(&cli);
    let result = match &cli.command {
        Command::Solve(common) => run_solve(common).map(|text| (text, 0)),
        Command::Verify { common, sim } => run_verify(common, sim).map(|(text, report)| {
            let code = if report.passed {
                0
            } else if report.checks.iter().any(|c| c.name == "precondition") {
                2
            } else {
                3
            };
            (text, code)
        }),
        Command::Sweep { common, grid } => run_sweep(common, grid).map(|(text, ok)| (text, if ok { 0 } else { 2 })),
    };
    match result {
        Ok((text, code)) => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            ExitCode::from(code)
        }
        Err(e) => report_error(&e, json),
    }
}
