//! The `prophet` command line: constants, exact values, threshold rules,
//! bound curves, the inequality sweep, Monte Carlo estimation, and the
//! renewal model, with CSV or JSON output.
//!
//! Exit codes: 0 on success, 1 on usage or domain errors (diagnostic on
//! stderr), 2 when the verification sweep finds a bound violation (the
//! offending instance is serialized to stderr).  Stochastic outputs always
//! carry their seed; a repeated invocation with the same seed emits
//! identical bytes.  Numbers are printed in round-trip-exact form.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use poisson_prophet::bounds::{self, BoundsError, SharpnessKind, SweepConfig};
use poisson_prophet::distributions::FiniteDist;
use poisson_prophet::hill_kertz;
use poisson_prophet::poisson_stopping::{expected_max, value_ode, Policy, ValueProfile};
use poisson_prophet::renewal::{self, RenewalDist};
use poisson_prophet::simulate::{estimate_policy, estimate_prophet, SimConfig};
use poisson_prophet::thresholds;

/// Environment variable consulted for the seed when `--seed` is absent.
pub const SEED_ENV: &str = "PROPHET_SEED";

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "prophet",
    version,
    about = "Optimal stopping vs. full-foresight values for offers at Poisson or renewal arrival times"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the sharp i.i.d. constants alpha_n, beta_n and the limit alpha_0.
    Constants {
        /// Orders to solve: comma list with integer ranges, e.g. "2..10,100,1e6".
        #[arg(long, default_value = "2..10,100,1e4,1e6")]
        n: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Bracket-width tolerance of the bisection solvers.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Exact V(t) with an ODE cross-check, M(t), and their ratio/difference.
    Value {
        /// Offer law as "a1:p1,a2:p2,...".
        #[arg(long)]
        dist: Option<String>,
        /// Offer law as a JSON file {"atoms":[...],"probs":[...]}.
        #[arg(long)]
        dist_file: Option<PathBuf>,
        /// Horizon grid: comma list with ranges "0.1..5" (101 points) or "0.1..5:0.05".
        #[arg(long)]
        t: String,
    },
    /// Threshold-rule values: one threshold, the best one, or the minimax design.
    Threshold {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        dist_file: Option<PathBuf>,
        #[arg(long)]
        t: f64,
        /// Evaluate the rule "accept the first offer >= c".
        #[arg(long)]
        c: Option<f64>,
        /// Report the best pure threshold (the default mode).
        #[arg(long)]
        best: bool,
        /// Minimax threshold design for offers in [a, b]: --minimax <A> <B>.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        minimax: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Long- and short-range bound values at one horizon.
    Bounds {
        #[arg(long)]
        t: f64,
        /// Order used by the finite-n difference bound and sharpness horizons.
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Support interval [a, b] for the difference bounds.
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Bound curves on a horizon grid (CSV).
    Curve {
        /// Comma list among f, g, fhat, ghat, long, fcap (fcap = min(f, long)).
        #[arg(long, default_value = "f,g,fcap")]
        which: String,
        #[arg(long, default_value = "0.01..5")]
        t: String,
    },
    /// Replay every inequality on random instances; exit 2 on any violation.
    Verify {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Horizon grid (defaults to 0.1,0.5,1,2,5,10,50).
        #[arg(long)]
        t_grid: Option<String>,
        /// Write the report CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of M(t) or of a stopping rule's value (JSON).
    Simulate {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        dist_file: Option<PathBuf>,
        #[arg(long)]
        t: f64,
        /// One of "optimal", "prophet", or "threshold:<c>".
        #[arg(long, default_value = "optimal")]
        policy: String,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Pair paths antithetically (requires an even path count).
        #[arg(long)]
        antithetic: bool,
    },
    /// Renewal-time values and the two-gap counterexample family.
    Renewal(RenewalArgs),
}

#[derive(Args)]
struct RenewalArgs {
    #[command(subcommand)]
    action: Option<RenewalAction>,
    /// Gap law as "k1:p1,k2:p2,..." over positive integers.
    #[arg(long = "T")]
    gaps: Option<String>,
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    dist_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum RenewalAction {
    /// Closed-form R_n and D_n for the two-gap family, with an engine cross-check.
    Counterexample {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        pi: f64,
    },
    /// Grid exploration of the two-gap family's ratio and difference.
    Explore {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
}

/// Runs the CLI against explicit argv and output streams, returning the
/// process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(failure) => {
            let _ = writeln!(err, "{}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

fn fail<E: std::fmt::Display>(e: E) -> Failure {
    Failure::usage(format!("error: {e}"))
}

/// Exit code for a sweep outcome: violations are exit 2, anything else is a
/// usage/domain error.
pub fn sweep_exit_code(error: &BoundsError) -> u8 {
    match error {
        BoundsError::SweepViolation { .. } => 2,
        _ => 1,
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Constants { n, format, tol } => constants(&n, format, tol, out),
        Command::Value { dist, dist_file, t } => value(load_dist(dist, dist_file)?, &t, out),
        Command::Threshold {
            dist,
            dist_file,
            t,
            c,
            best,
            minimax,
            format,
        } => threshold(
            load_dist(dist, dist_file)?,
            t,
            c,
            best,
            minimax,
            format,
            out,
        ),
        Command::Bounds { t, n, a, b, format } => bound_values(t, n, a, b, format, out),
        Command::Curve { which, t } => curves(&which, &t, out),
        Command::Verify {
            count,
            seed,
            t_grid,
            out: out_path,
        } => verify(count, resolve_seed(seed), t_grid, out_path, out, err),
        Command::Simulate {
            dist,
            dist_file,
            t,
            policy,
            paths,
            seed,
            antithetic,
        } => simulate(
            load_dist(dist, dist_file)?,
            t,
            &policy,
            paths,
            resolve_seed(seed),
            antithetic,
            out,
        ),
        Command::Renewal(args) => renewal_cmd(args, out),
    }
}

/// `--seed` wins, then the environment, then zero.
fn resolve_seed(cli: Option<u64>) -> u64 {
    cli.or_else(|| {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
    })
    .unwrap_or(0)
}

/// Parses an order list such as "2..10,100,1e4,1e6".
pub fn parse_n_list(spec: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = token.split_once("..") {
            let lo: u64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad range start {lo:?}"))?;
            let hi: u64 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad range end {hi:?}"))?;
            if hi < lo {
                return Err(format!("empty range {token:?}"));
            }
            out.extend(lo..=hi);
        } else {
            let v: f64 = token.parse().map_err(|_| format!("bad order {token:?}"))?;
            if !v.is_finite() || v < 1.0 || v.fract() != 0.0 {
                return Err(format!("order {token:?} is not a positive integer"));
            }
            out.push(v as u64);
        }
    }
    if out.is_empty() {
        return Err("no orders given".into());
    }
    Ok(out)
}

/// Parses a horizon grid: comma-separated values and ranges.  A bare range
/// "a..b" yields 101 evenly spaced points; "a..b:step" walks by `step`.
pub fn parse_t_grid(spec: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if let Some((lo, rest)) = token.split_once("..") {
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad range start {lo:?}"))?;
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => {
                    let hi: f64 = hi
                        .trim()
                        .parse()
                        .map_err(|_| format!("bad range end {hi:?}"))?;
                    let step: f64 = step
                        .trim()
                        .parse()
                        .map_err(|_| format!("bad step {step:?}"))?;
                    if step <= 0.0 {
                        return Err(format!("step must be positive in {token:?}"));
                    }
                    (hi, step)
                }
                None => {
                    let hi: f64 = rest
                        .trim()
                        .parse()
                        .map_err(|_| format!("bad range end {rest:?}"))?;
                    (hi, (hi - lo) / 100.0)
                }
            };
            if hi < lo {
                return Err(format!("empty range {token:?}"));
            }
            let mut x = lo;
            let fudge = 1e-9 * (hi - lo).max(step);
            while x <= hi + fudge {
                out.push(x.min(hi));
                x += step;
            }
        } else {
            out.push(
                token
                    .parse()
                    .map_err(|_| format!("bad horizon {token:?}"))?,
            );
        }
    }
    if out.is_empty() {
        return Err("no horizons given".into());
    }
    Ok(out)
}

fn load_dist(inline: Option<String>, file: Option<PathBuf>) -> Result<FiniteDist, Failure> {
    match (inline, file) {
        (Some(spec), None) => FiniteDist::parse_spec(&spec).map_err(fail),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::usage(format!("error reading {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(fail)
        }
        (None, None) => Err(Failure::usage(
            "error: one of --dist or --dist-file is required",
        )),
        (Some(_), Some(_)) => Err(Failure::usage(
            "error: give only one of --dist / --dist-file",
        )),
    }
}

fn csv_header(out: &mut dyn Write, command: &str, seed: Option<u64>) -> Result<(), Failure> {
    writeln!(out, "# prophet {VERSION}").map_err(fail)?;
    writeln!(out, "# command: {command}").map_err(fail)?;
    if let Some(seed) = seed {
        writeln!(out, "# seed: {seed}").map_err(fail)?;
    }
    Ok(())
}

fn envelope(
    command: &str,
    params: serde_json::Value,
    seed: Option<u64>,
    result: serde_json::Value,
) -> serde_json::Value {
    let mut doc = json!({
        "command": command,
        "params": params,
        "version": VERSION,
        "result": result,
    });
    if let Some(seed) = seed {
        doc["seed"] = json!(seed);
    }
    doc
}

fn emit_json(out: &mut dyn Write, doc: &serde_json::Value) -> Result<(), Failure> {
    writeln!(out, "{doc:#}").map_err(fail)
}

fn constants(spec: &str, format: Format, tol: f64, out: &mut dyn Write) -> Result<(), Failure> {
    let orders = parse_n_list(spec).map_err(Failure::usage)?;
    let mut rows = Vec::with_capacity(orders.len());
    for n in orders {
        let c = hill_kertz::HkConstants::solve(n, tol).map_err(fail)?;
        rows.push((n, c.alpha, c.beta));
    }
    let alpha_0 = hill_kertz::alpha_zero(tol.max(1e-10)).map_err(fail)?;
    match format {
        Format::Csv => {
            csv_header(out, "constants", None)?;
            writeln!(out, "n,alpha_n,beta_n,a_n,b_n").map_err(fail)?;
            for (n, alpha, beta) in &rows {
                writeln!(out, "{n},{alpha},{beta},{},{beta}", 1.0 + alpha).map_err(fail)?;
            }
            writeln!(out, "# alpha_0 = {alpha_0}").map_err(fail)?;
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(n, alpha, beta)| {
                    json!({"n": n, "alpha_n": alpha, "beta_n": beta, "a_n": 1.0 + alpha, "b_n": beta})
                })
                .collect();
            let doc = envelope(
                "constants",
                json!({"tol": tol}),
                None,
                json!({"rows": rows, "alpha_0": alpha_0}),
            );
            emit_json(out, &doc)?;
        }
    }
    Ok(())
}

fn value(d: FiniteDist, grid: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let grid = parse_t_grid(grid).map_err(Failure::usage)?;
    let profile = ValueProfile::new(&d);
    csv_header(out, "value", None)?;
    writeln!(out, "# dist: {}", d.spec_string()).map_err(fail)?;
    writeln!(out, "t,V_exact,V_ode,M,ratio,diff").map_err(fail)?;
    for &t in &grid {
        let v = profile.value(t).map_err(fail)?;
        let v_ode = value_ode(|c| d.mean_excess(c).expect("c >= 0"), t, 1e-10).map_err(fail)?;
        let m = expected_max(&d, t).map_err(fail)?;
        writeln!(out, "{t},{v},{v_ode},{m},{},{}", m / v, m - v).map_err(fail)?;
    }
    Ok(())
}

fn threshold(
    d: FiniteDist,
    t: f64,
    c: Option<f64>,
    best: bool,
    minimax: Option<Vec<f64>>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let modes = usize::from(c.is_some()) + usize::from(best) + usize::from(minimax.is_some());
    if modes > 1 {
        return Err(Failure::usage(
            "error: choose one of --c, --best, --minimax",
        ));
    }
    let result = if let Some(ab) = minimax {
        let (a, b) = (ab[0], ab[1]);
        let c_star = thresholds::minimax_threshold(a, b, t).map_err(fail)?;
        let guarantee = thresholds::minimax_guarantee(a, b, t).map_err(fail)?;
        let diff_bound = thresholds::difference_bound(a, b, t).map_err(fail)?;
        let w = thresholds::threshold_value(&d, c_star, t).map_err(fail)?;
        let gap = expected_max(&d, t).map_err(fail)? - w;
        json!({
            "mode": "minimax", "a": a, "b": b, "c_star": c_star,
            "guarantee": guarantee, "difference_bound": diff_bound,
            "value": w, "achieved_gap": gap,
        })
    } else if let Some(c) = c {
        let w = thresholds::threshold_value(&d, c, t).map_err(fail)?;
        json!({"mode": "fixed", "c": c, "value": w})
    } else {
        let (c_best, w) = thresholds::best_threshold(&d, t).map_err(fail)?;
        json!({"mode": "best", "c": c_best, "value": w})
    };
    match format {
        Format::Csv => {
            csv_header(out, "threshold", None)?;
            writeln!(out, "# dist: {}", d.spec_string()).map_err(fail)?;
            let obj = result.as_object().expect("object result");
            let keys: Vec<_> = obj.keys().cloned().collect();
            writeln!(out, "{}", keys.join(",")).map_err(fail)?;
            let cells: Vec<String> = keys
                .iter()
                .map(|k| match &obj[k] {
                    serde_json::Value::String(s) => s.clone(),
                    v => v.to_string(),
                })
                .collect();
            writeln!(out, "{}", cells.join(",")).map_err(fail)?;
        }
        Format::Json => {
            let doc = envelope(
                "threshold",
                json!({"dist": d.spec_string(), "t": t}),
                None,
                result,
            );
            emit_json(out, &doc)?;
        }
    }
    Ok(())
}

fn bound_values(
    t: f64,
    n: u64,
    a: f64,
    b: f64,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let ratio_long = bounds::ratio_bound_long();
    let diff_precise = bounds::diff_bound_precise(t, n).map_err(fail)?;
    let sharp_ratio = bounds::sharpness_threshold(n, SharpnessKind::Ratio).map_err(fail)?;
    let sharp_diff = bounds::sharpness_threshold(n, SharpnessKind::Difference).map_err(fail)?;
    let c_star = thresholds::minimax_threshold(a, b, t).map_err(fail)?;
    let guarantee = thresholds::minimax_guarantee(a, b, t).map_err(fail)?;
    let diff_bound = thresholds::difference_bound(a, b, t).map_err(fail)?;
    let result = json!({
        "t": t, "n": n, "a": a, "b": b,
        "ratio_bound_long": ratio_long,
        "diff_bound_precise": diff_precise,
        "sharpness_horizon_ratio": sharp_ratio,
        "sharpness_horizon_difference": sharp_diff,
        "c_star": c_star,
        "minimax_guarantee": guarantee,
        "difference_bound": diff_bound,
    });
    match format {
        Format::Csv => {
            csv_header(out, "bounds", None)?;
            let obj = result.as_object().expect("object result");
            let keys: Vec<_> = obj.keys().cloned().collect();
            writeln!(out, "{}", keys.join(",")).map_err(fail)?;
            let cells: Vec<String> = keys.iter().map(|k| obj[k].to_string()).collect();
            writeln!(out, "{}", cells.join(",")).map_err(fail)?;
        }
        Format::Json => {
            let doc = envelope(
                "bounds",
                json!({"t": t, "n": n, "a": a, "b": b}),
                None,
                result,
            );
            emit_json(out, &doc)?;
        }
    }
    Ok(())
}

fn curves(which: &str, grid: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let grid = parse_t_grid(grid).map_err(Failure::usage)?;
    let names: Vec<&str> = which
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    for name in &names {
        if !matches!(*name, "f" | "g" | "fhat" | "ghat" | "long" | "fcap") {
            return Err(Failure::usage(format!(
                "error: unknown curve {name:?} (expected f, g, fhat, ghat, long, fcap)"
            )));
        }
    }
    if names.is_empty() {
        return Err(Failure::usage("error: no curves requested"));
    }
    let long = bounds::ratio_bound_long();
    csv_header(out, "curve", None)?;
    writeln!(out, "t,{}", names.join(",")).map_err(fail)?;
    for &t in &grid {
        let mut row = String::new();
        write!(row, "{t}").map_err(fail)?;
        for name in &names {
            let v = match *name {
                "f" => bounds::curve_f(t).map_err(fail)?,
                "g" => bounds::curve_g(t).map_err(fail)?,
                "fhat" => bounds::curve_fhat(t).map_err(fail)?,
                "ghat" => bounds::curve_ghat(t).map_err(fail)?,
                "long" => long,
                "fcap" => bounds::curve_f(t).map_err(fail)?.min(long),
                _ => unreachable!("validated above"),
            };
            write!(row, ",{v}").map_err(fail)?;
        }
        writeln!(out, "{row}").map_err(fail)?;
    }
    Ok(())
}

fn verify(
    count: usize,
    seed: u64,
    t_grid: Option<String>,
    out_path: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let mut config = SweepConfig {
        count,
        seed,
        ..SweepConfig::default()
    };
    if let Some(grid) = t_grid {
        config.t_grid = parse_t_grid(&grid).map_err(Failure::usage)?;
    }
    let reports = bounds::verify_sweep(&config).map_err(|e| {
        let code = sweep_exit_code(&e);
        let message = match &e {
            BoundsError::SweepViolation {
                check,
                instance,
                t,
                margin,
            } => format!(
                "{}",
                json!({
                    "violation": check,
                    "instance": instance,
                    "t": t,
                    "margin": margin,
                    "seed": seed,
                })
            ),
            other => format!("error: {other}"),
        };
        Failure { code, message }
    })?;

    let mut csv = String::new();
    let _ = writeln!(csv, "# prophet {VERSION}");
    let _ = writeln!(csv, "# command: verify");
    let _ = writeln!(csv, "# seed: {seed}");
    let _ = writeln!(csv, "instance,t,check,bound,achieved,margin");
    for report in &reports {
        for check in &report.checks {
            let _ = writeln!(
                csv,
                "\"{}\",{},{},{},{},{}",
                report.instance, report.t, check.name, check.bound, check.achieved, check.margin
            );
        }
    }
    match out_path {
        Some(path) => std::fs::write(&path, csv)
            .map_err(|e| Failure::usage(format!("error writing {}: {e}", path.display())))?,
        None => write!(out, "{csv}").map_err(fail)?,
    }
    writeln!(
        err,
        "verified {count} instances x {} horizons: 0 violations",
        config.t_grid.len()
    )
    .map_err(fail)?;
    Ok(())
}

/// What the simulator should estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    /// The full-foresight value M(t).
    Prophet,
    /// The optimal stopping rule's value V(t).
    Optimal,
    /// A fixed threshold rule's value W_c(t).
    Threshold(f64),
}

/// Parses "optimal", "prophet", or "threshold:<c>".
pub fn parse_policy(spec: &str) -> Result<PolicySpec, String> {
    match spec {
        "prophet" => Ok(PolicySpec::Prophet),
        "optimal" => Ok(PolicySpec::Optimal),
        other => match other.split_once(':') {
            Some(("threshold", c)) => {
                let c: f64 = c.parse().map_err(|_| format!("bad threshold {c:?}"))?;
                if !c.is_finite() || c < 0.0 {
                    return Err(format!("threshold {c} must be nonnegative"));
                }
                Ok(PolicySpec::Threshold(c))
            }
            _ => Err(format!(
                "unknown policy {other:?} (expected optimal, prophet, or threshold:<c>)"
            )),
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    d: FiniteDist,
    t: f64,
    policy_spec: &str,
    paths: u64,
    seed: u64,
    antithetic: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut cfg = SimConfig::new(t, paths, seed).map_err(fail)?;
    if antithetic {
        cfg = cfg.antithetic().map_err(fail)?;
    }
    let (kind, result) = match parse_policy(policy_spec).map_err(Failure::usage)? {
        PolicySpec::Prophet => ("prophet", estimate_prophet(&d, &cfg)),
        PolicySpec::Optimal => (
            "optimal",
            estimate_policy(&d, &Policy::optimal_for(&d), &cfg),
        ),
        PolicySpec::Threshold(c) => (
            "threshold",
            estimate_policy(&d, &Policy::Threshold(c), &cfg),
        ),
    };
    let doc = envelope(
        "simulate",
        json!({
            "dist": d.spec_string(),
            "t": t,
            "policy": policy_spec,
            "kind": kind,
            "paths": paths,
            "antithetic": antithetic,
        }),
        Some(seed),
        serde_json::to_value(&result).map_err(fail)?,
    );
    emit_json(out, &doc)
}

fn renewal_cmd(args: RenewalArgs, out: &mut dyn Write) -> Result<(), Failure> {
    match args.action {
        Some(RenewalAction::Counterexample { n, p, pi }) => {
            let (ratio, diff) = renewal::counterexample_metrics(n, p, pi).map_err(fail)?;
            let (gaps, offers) = renewal::counterexample_instance(n, p, pi).map_err(fail)?;
            let m = renewal::renewal_prophet_value(&gaps, &offers, n).map_err(fail)?;
            let v = renewal::renewal_optimal_value(&gaps, &offers, n).map_err(fail)?;
            let sup = renewal::counterexample_ratio_sup(n).map_err(fail)?;
            let doc = envelope(
                "renewal counterexample",
                json!({"n": n, "p": p, "pi": pi}),
                None,
                json!({
                    "ratio": ratio,
                    "difference": diff,
                    "engine_ratio": m / v,
                    "engine_difference": m - v,
                    "ratio_sup": sup,
                    "gaps": gaps.spec_string(),
                    "offers": offers.spec_string(),
                }),
            );
            emit_json(out, &doc)
        }
        Some(RenewalAction::Explore { n, grid }) => {
            let found = renewal::explore_counterexample(n, grid).map_err(fail)?;
            let doc = envelope(
                "renewal explore",
                json!({"n": n, "grid": grid}),
                None,
                json!({
                    "max_ratio": found.max_ratio,
                    "ratio_at": {"p": found.ratio_at.0, "pi": found.ratio_at.1},
                    "max_difference": found.max_diff,
                    "difference_at": {"p": found.diff_at.0, "pi": found.diff_at.1},
                }),
            );
            emit_json(out, &doc)
        }
        None => {
            let gap_spec = args
                .gaps
                .ok_or_else(|| Failure::usage("error: --T <gap spec> is required"))?;
            let gaps = RenewalDist::parse_spec(&gap_spec).map_err(fail)?;
            let d = load_dist(args.dist, args.dist_file)?;
            let n = args
                .n
                .ok_or_else(|| Failure::usage("error: --n <horizon> is required"))?;
            let m = renewal::renewal_prophet_value(&gaps, &d, n).map_err(fail)?;
            let v = renewal::renewal_optimal_value(&gaps, &d, n).map_err(fail)?;
            match args.format {
                Format::Csv => {
                    csv_header(out, "renewal", None)?;
                    writeln!(out, "# T: {}", gaps.spec_string()).map_err(fail)?;
                    writeln!(out, "# dist: {}", d.spec_string()).map_err(fail)?;
                    writeln!(out, "n,M,V,ratio,diff").map_err(fail)?;
                    writeln!(out, "{n},{m},{v},{},{}", m / v, m - v).map_err(fail)?;
                }
                Format::Json => {
                    let doc = envelope(
                        "renewal",
                        json!({"T": gaps.spec_string(), "dist": d.spec_string(), "n": n}),
                        None,
                        json!({"M": m, "V": v, "ratio": m / v, "diff": m - v}),
                    );
                    emit_json(out, &doc)?;
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_list_parsing() {
        assert_eq!(parse_n_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(
            parse_n_list("2..4,100,1e4").unwrap(),
            vec![2, 3, 4, 100, 10_000]
        );
        assert!(parse_n_list("5..2").is_err());
        assert!(parse_n_list("1.5").is_err());
        assert!(parse_n_list("").is_err());
    }

    #[test]
    fn t_grid_parsing() {
        assert_eq!(parse_t_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let grid = parse_t_grid("0..1").unwrap();
        assert_eq!(grid.len(), 101);
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 1.0);
        let stepped = parse_t_grid("1..2:0.5").unwrap();
        assert_eq!(stepped, vec![1.0, 1.5, 2.0]);
        assert!(parse_t_grid("2..1").is_err());
        assert!(parse_t_grid("1..2:-1").is_err());
    }

    #[test]
    fn policy_parsing() {
        assert_eq!(parse_policy("prophet").unwrap(), PolicySpec::Prophet);
        assert_eq!(parse_policy("optimal").unwrap(), PolicySpec::Optimal);
        assert_eq!(
            parse_policy("threshold:0.5").unwrap(),
            PolicySpec::Threshold(0.5)
        );
        assert!(parse_policy("threshold:-1").is_err());
        assert!(parse_policy("nonsense").is_err());
    }

    #[test]
    fn violation_maps_to_exit_two() {
        let violation = BoundsError::SweepViolation {
            check: "short_ratio",
            instance: "1:1".into(),
            t: 1.0,
            margin: -0.5,
        };
        assert_eq!(sweep_exit_code(&violation), 2);
        assert_eq!(sweep_exit_code(&BoundsError::BadHorizon(0.0)), 1);
    }

    #[test]
    fn run_reports_usage_errors_on_stderr() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(["prophet", "constants", "--n", "oops"], &mut out, &mut err);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }

    #[test]
    fn run_help_exits_zero() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(["prophet", "--help"], &mut out, &mut err);
        assert_eq!(code, 0);
        assert!(String::from_utf8(out).unwrap().contains("Usage"));
    }
}
