//! Command-line interface: solve an instance, tabulate its value function,
//! verify it, estimate rule performance by simulation, and tabulate the
//! high-switch-rate diffusion limit.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 sub-critical
//! parameters, 3 verification failure.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit::limit_sequence;
use crate::model::{ModelParams, TrendState};
use crate::simulate::{mc_reward, McEstimate, StoppingRule};
use crate::thresholds::{solve, Solution};
use crate::value::{eval, Region};
use crate::verify::run_battery;

#[derive(Parser)]
#[command(
    name = "telsell",
    version,
    about = "Optimal selling thresholds for a price with a two-state random trend"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the thresholds and value-function constants
    Solve(SolveArgs),
    /// Tabulate the value function on a price grid
    Curve(CurveArgs),
    /// Run the analytic and Monte Carlo verification battery
    Verify(VerifyArgs),
    /// Estimate the expected reward of the optimal rule by simulation
    Simulate(SimulateArgs),
    /// Tabulate convergence to the diffusion limit as the switch rate grows
    Limit(LimitArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Discount rate
    #[arg(long)]
    rho: Option<f64>,
    /// Mean growth rate
    #[arg(long)]
    mu: Option<f64>,
    /// Trend amplitude
    #[arg(long)]
    sigma: Option<f64>,
    /// Trend switch rate
    #[arg(long)]
    lambda: Option<f64>,
    /// Sale cost
    #[arg(long)]
    a: Option<f64>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of grid points
    #[arg(long)]
    points: Option<usize>,
    /// Upper end of the price grid (default: past the largest finite threshold)
    #[arg(long)]
    y_max: Option<f64>,
}

#[derive(Args)]
struct McArgs {
    /// Initial price
    #[arg(long)]
    y0: Option<f64>,
    /// Initial trend state, +1 or -1
    #[arg(long, allow_hyphen_values = true)]
    s0: Option<i64>,
    /// Number of simulated paths
    #[arg(long)]
    n: Option<u64>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    mc: McArgs,
    /// Shift the solved thresholds before checking (the battery must then fail)
    #[arg(long, hide = true)]
    corrupt_solution: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct LimitArgs {
    /// Discount rate
    #[arg(long)]
    rho: f64,
    /// Mean growth rate
    #[arg(long)]
    mu: f64,
    /// Limiting volatility; the trend amplitude is sigma0 * sqrt(lambda)
    #[arg(long)]
    sigma0: f64,
    /// Sale cost
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Comma-separated switch rates
    #[arg(long, default_value = "1e2,1e3,1e4,1e5,1e6")]
    lambdas: String,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// configuration file

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    y0: Option<f64>,
    s0: Option<i64>,
    params: Option<ParamsSection>,
    mc: Option<McSection>,
    curve: Option<CurveSection>,
    output: Option<OutputSection>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    rho: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    lambda: Option<f64>,
    a: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct McSection {
    n: Option<u64>,
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CurveSection {
    points: Option<usize>,
    y_max: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    format: Option<String>,
    out: Option<PathBuf>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

struct Resolved {
    params: ModelParams,
    /// `None` when neither a flag nor the config file picked a format; each
    /// command applies its own default.
    format: Option<Format>,
    out: Option<PathBuf>,
    file: FileConfig,
}

fn resolve(common: &CommonArgs) -> Result<Resolved> {
    let file = load_config(&common.config)?;
    let section = file.params.as_ref();
    let pick = |flag: Option<f64>, from_file: Option<f64>, name: &str| {
        flag.or(from_file)
            .ok_or_else(|| Error::Config(format!("missing parameter `{name}`")))
    };
    let params = ModelParams::new(
        pick(common.rho, section.and_then(|s| s.rho), "rho")?,
        pick(common.mu, section.and_then(|s| s.mu), "mu")?,
        pick(common.sigma, section.and_then(|s| s.sigma), "sigma")?,
        pick(common.lambda, section.and_then(|s| s.lambda), "lambda")?,
        pick(common.a, section.and_then(|s| s.a), "a")?,
    )?;
    let format = common.format.or_else(|| parse_format(&file));
    let out = common
        .out
        .clone()
        .or_else(|| file.output.as_ref().and_then(|o| o.out.clone()));
    Ok(Resolved {
        params,
        format,
        out,
        file,
    })
}

fn parse_format(file: &FileConfig) -> Option<Format> {
    match file.output.as_ref()?.format.as_deref()? {
        "json" => Some(Format::Json),
        "csv" => Some(Format::Csv),
        _ => None,
    }
}

fn mc_settings(args: &McArgs, file: &FileConfig) -> Result<(f64, TrendState, u64, u64)> {
    let y0 = args.y0.or(file.y0).unwrap_or(1.0);
    if !(y0 > 0.0) || !y0.is_finite() {
        return Err(Error::Config(format!("y0 must be positive, got {y0}")));
    }
    let s0 = TrendState::from_sign(args.s0.or(file.s0).unwrap_or(1))?;
    let mc = file.mc.as_ref();
    let n = args.n.or(mc.and_then(|m| m.n)).unwrap_or(100_000);
    if n < 2 {
        return Err(Error::Config(format!("n must be at least 2, got {n}")));
    }
    let seed = args.seed.or(mc.and_then(|m| m.seed)).unwrap_or(1);
    Ok((y0, s0, n, seed))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    let terminated;
    let text = if text.ends_with('\n') {
        text
    } else {
        terminated = format!("{text}\n");
        &terminated
    };
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output")
}

/// All numeric CSV output uses 17 significant digits, enough to round-trip f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// subcommands

fn solution_csv(sol: &Solution) -> String {
    let p = &sol.params;
    let f = &sol.forms;
    let mut rows = vec![
        ("rho".to_string(), num(p.rho)),
        ("mu".to_string(), num(p.mu)),
        ("sigma".to_string(), num(p.sigma)),
        ("lambda".to_string(), num(p.lambda)),
        ("a".to_string(), num(p.a)),
        ("regime".to_string(), sol.regime.to_string()),
        ("u_minus".to_string(), num(sol.u_minus)),
        (
            "u_plus".to_string(),
            if sol.u_plus.is_finite() {
                num(sol.u_plus.value())
            } else {
                "inf".to_string()
            },
        ),
        ("c_minus".to_string(), num(sol.c_minus)),
        ("c_plus".to_string(), num(sol.c_plus)),
        ("c_cont".to_string(), num(sol.c_cont)),
        ("omega_minus_exp".to_string(), num(f.omega_minus_exp)),
        ("omega_plus_exp".to_string(), num(f.omega_plus_exp)),
        ("w_minus".to_string(), num(f.w_minus)),
        ("w_plus".to_string(), num(f.w_plus)),
        ("b".to_string(), num(f.b)),
        ("big_omega".to_string(), num(f.big_omega)),
        ("kappa1".to_string(), num(f.kappa1)),
        ("kappa2".to_string(), num(f.kappa2)),
    ];
    if let Some(ot) = f.omega_tilde {
        rows.push(("omega_tilde".to_string(), num(ot)));
    }
    let mut out = String::from("field,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let sol = solve(&r.params)?;
    let text = match r.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&sol),
        Format::Csv => solution_csv(&sol),
    };
    emit(&text, &r.out)
}

#[derive(Serialize)]
struct CurveRow {
    y: f64,
    g_down: f64,
    g_up: f64,
    region_down: Region,
    region_up: Region,
}

fn region_label(r: Region) -> &'static str {
    match r {
        Region::Continue => "continue",
        Region::Stop => "stop",
    }
}

fn cmd_curve(args: &CurveArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let sol = solve(&r.params)?;
    let section = r.file.curve.as_ref();
    let points = args.points.or(section.and_then(|c| c.points)).unwrap_or(101);
    if points < 2 {
        return Err(Error::Config(format!("need at least 2 grid points, got {points}")));
    }
    let default_max = if sol.u_plus.is_finite() {
        1.2 * sol.u_plus.value()
    } else {
        1.5 * sol.u_minus
    };
    let y_max = args.y_max.or(section.and_then(|c| c.y_max)).unwrap_or(default_max);
    if !(y_max > 0.0) || !y_max.is_finite() {
        return Err(Error::Config(format!("y_max must be positive and finite, got {y_max}")));
    }
    let rows: Vec<CurveRow> = (0..points)
        .map(|i| {
            let y = y_max * i as f64 / (points - 1) as f64;
            let down = eval(&sol, y, TrendState::Down).expect("valid grid point");
            let up = eval(&sol, y, TrendState::Up).expect("valid grid point");
            CurveRow {
                y,
                g_down: down.g,
                g_up: up.g,
                region_down: down.region,
                region_up: up.region,
            }
        })
        .collect();
    let text = match r.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = format!("# u_minus={} u_plus={}\n", sol.u_minus, sol.u_plus);
            out.push_str("y,g_down,g_up,region_down,region_up\n");
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    num(row.y),
                    num(row.g_down),
                    num(row.g_up),
                    region_label(row.region_down),
                    region_label(row.region_up)
                ));
            }
            out
        }
    };
    emit(&text, &r.out)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let r = resolve(&args.common)?;
    let (y0, s0, n, seed) = mc_settings(&args.mc, &r.file)?;
    let report = run_battery(&r.params, y0, s0, n, seed, args.corrupt_solution)?;
    // default: the plain-text report; JSON only on request
    let text = match r.format {
        Some(Format::Json) => to_json(&report),
        _ => report.render(),
    };
    emit(&text, &r.out)?;
    Ok(report.passed)
}

#[derive(Serialize)]
struct SimulateOutput {
    params: ModelParams,
    rule: StoppingRule,
    y0: f64,
    s0: TrendState,
    estimate: McEstimate,
    analytic_value: f64,
    diff: f64,
    within_three_std_err: bool,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let (y0, s0, n, seed) = mc_settings(&args.mc, &r.file)?;
    let sol = solve(&r.params)?;
    let rule = StoppingRule::from(&sol);
    let estimate = mc_reward(&r.params, &rule, y0, s0, n, seed);
    let analytic_value = eval(&sol, y0, s0)?.g;
    let diff = estimate.mean - analytic_value;
    let output = SimulateOutput {
        params: r.params,
        rule,
        y0,
        s0,
        estimate,
        analytic_value,
        diff,
        within_three_std_err: diff.abs() <= 3.0 * estimate.std_err + estimate.bias_bound,
    };
    let text = match r.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&output),
        Format::Csv => {
            let mut out = String::from("field,value\n");
            for (k, v) in [
                ("mean", output.estimate.mean),
                ("std_err", output.estimate.std_err),
                ("n", output.estimate.n as f64),
                ("seed", output.estimate.seed as f64),
                ("horizon", output.estimate.horizon),
                ("bias_bound", output.estimate.bias_bound),
                ("analytic_value", output.analytic_value),
                ("diff", output.diff),
            ] {
                out.push_str(&format!("{k},{}\n", num(v)));
            }
            out
        }
    };
    emit(&text, &r.out)
}

fn cmd_limit(args: &LimitArgs) -> Result<()> {
    let mut lambdas = Vec::new();
    for part in args.lambdas.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad switch rate `{part}`")))?;
        lambdas.push(v);
    }
    let (bs, rows) = limit_sequence(args.rho, args.mu, args.sigma0, args.a, &lambdas)?;
    #[derive(Serialize)]
    struct LimitOutput<'a> {
        diffusion: &'a crate::limit::BsSolution,
        rows: &'a [crate::limit::LimitRow],
    }
    let format = args.format.unwrap_or(Format::Json);
    let text = match format {
        Format::Json => to_json(&LimitOutput {
            diffusion: &bs,
            rows: &rows,
        }),
        Format::Csv => {
            let mut out = format!("# omega0={} u={}\n", bs.omega0, bs.u);
            out.push_str("lambda,u_minus,u_rewritten,u_err,value_err\n");
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    num(row.lambda),
                    num(row.u_minus),
                    num(row.u_rewritten),
                    num(row.u_err),
                    num(row.value_err)
                ));
            }
            out
        }
    };
    emit(&text, &args.out)
}

// ---------------------------------------------------------------------------

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::SubCritical { .. } => 2,
        _ => 1,
    }
}

/// Parses arguments, runs the selected command, and returns the process exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Limit(args) => cmd_limit(args),
        Command::Verify(args) => {
            return match cmd_verify(args) {
                Ok(true) => 0,
                Ok(false) => 3,
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                }
            };
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
