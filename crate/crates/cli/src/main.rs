//! `dcs`: exact counts and asymptotics for weighted partitions (multisets),
//! selections and assemblies.
//!
//! Subcommands: `count`, `compare`, `delta`, `llt`, `check`, `special`,
//! `asymptote`. Exit codes: 0 success, 2 usage/config error, 3 domain
//! precondition failure (the failed rule is printed), 4 numerical
//! indeterminacy (a condition check that the grid could not decide).

mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dcs_core::asymptotics::{delta_asymptotic, khintchine_estimate, meinardus_estimate};
use dcs_core::exact::count_exact;
use dcs_core::khintchine::{solve_saddle, TiltedEnsemble, CONVOLUTION_LIMIT};
use dcs_core::special;
use dcs_core::verify::{
    check_condition_iii, check_condition_iii_prime, Condition, ConditionReport, Verdict,
};
use dcs_core::weights::{StructureKind, WeightSequence};

use config::{resolve_weights, OutputFormat, RunConfig, SizeRange};
use output::{fmt_float, fmt_float_15, Cell, Table};

#[derive(Parser)]
#[command(
    name = "dcs",
    version,
    about = "Exact counting and asymptotic enumeration of decomposable combinatorial structures"
)]
struct Cli {
    /// Output format: csv, json or table.
    #[arg(long, global = true, default_value = "table")]
    format: String,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print the canonical form of the parsed configuration and exit
    /// (count and compare only).
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct WeightsArg {
    /// Weight family (`power-law:rho=1,r=1`, `example2`, `example3`,
    /// `forest`) or `@path` to a tabulated file.
    #[arg(long)]
    weights: String,
}

#[derive(Subcommand)]
enum Command {
    /// Exact counts c_n (and labelled counts s_n for assemblies).
    Count {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        kind: String,
        /// Single size.
        #[arg(long)]
        n: Option<u64>,
        /// Size range A:B or A:B:STEP.
        #[arg(long)]
        n_range: Option<String>,
        /// Also emit labelled counts s_n (assemblies only).
        #[arg(long)]
        labelled: bool,
        /// Also emit ln c_n.
        #[arg(long)]
        log: bool,
    },
    /// Exact counts joined with both asymptotic estimates over a range.
    Compare {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n_range: String,
    },
    /// Solve the saddle equation E Z_n = n.
    Delta {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u64,
    },
    /// Point probability P(Z_n = n) by convolution and quadrature, with the
    /// Gaussian prediction.
    Llt {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u64,
    },
    /// Grid verification of the trigonometric conditions.
    Check {
        #[command(flatten)]
        weights: WeightsArg,
        /// `iii` (classical) or `iii-prime` (weakened).
        #[arg(long)]
        condition: String,
        /// Structure kind (required for iii-prime, sets M^(i)).
        #[arg(long)]
        kind: Option<String>,
        /// Comma-separated tilt grid, e.g. `1e-2,1e-3,1e-4`.
        #[arg(long, default_value = "1e-2,3e-3,1e-3")]
        delta_grid: String,
        /// Probe exponent (iii) or additive slack (iii-prime).
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
    /// Ad-hoc special function evaluation (debugging aid).
    Special {
        /// gamma | zeta | zeta-prime | bose-log-integral
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Asymptotic estimate decomposed into its three parts.
    Asymptote {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u64,
        /// meinardus | khintchine | both
        #[arg(long, default_value = "both")]
        method: String,
    },
}

/// Failures routed to exit codes.
enum CliError {
    /// Bad flags or config: exit 2.
    Usage(String),
    /// Domain precondition named by the core library: exit 3.
    Domain(String),
}

impl From<dcs_core::Error> for CliError {
    fn from(e: dcs_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn parse_kind(s: &str) -> CliResult<StructureKind> {
    StructureKind::parse(s).map_err(|e| CliError::Usage(e.to_string()))
}

fn weights_of(arg: &WeightsArg) -> CliResult<WeightSequence> {
    resolve_weights(&arg.weights).map_err(CliError::Usage)
}

/// Renders the canonical config line, verifying the round-trip invariant
/// (the canonical text must re-parse to the identical configuration).
fn dump_canonical(config: &RunConfig) -> CliResult<String> {
    let text = config.canonical();
    let reparsed = RunConfig::parse_canonical(&text).map_err(CliError::Usage)?;
    if &reparsed != config {
        return Err(CliError::Domain(
            "canonical config failed to round-trip".to_string(),
        ));
    }
    Ok(text)
}

fn sizes_from(n: Option<u64>, n_range: &Option<String>) -> CliResult<Vec<u64>> {
    match (n, n_range) {
        (Some(v), None) => Ok(vec![v]),
        (None, Some(spec)) => {
            let range = SizeRange::parse(spec).map_err(CliError::Usage)?;
            Ok(range.iter().collect())
        }
        (Some(_), Some(_)) => usage("pass either --n or --n-range, not both"),
        (None, None) => usage("one of --n or --n-range is required"),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_count(
    weights: &WeightsArg,
    kind: &str,
    n: Option<u64>,
    n_range: &Option<String>,
    labelled: bool,
    log: bool,
    format: OutputFormat,
) -> CliResult<(Table, RunConfig)> {
    let kind = parse_kind(kind)?;
    if labelled && kind != StructureKind::Assembly {
        return usage("--labelled applies to assemblies only");
    }
    let w = weights_of(weights)?;
    let sizes = sizes_from(n, n_range)?;
    let max = *sizes.iter().max().expect("nonempty");
    let table = count_exact(&w, kind, max)?;

    let mut columns = vec!["n", "c_n"];
    if labelled {
        columns.push("s_n");
    }
    if log {
        columns.push("log_c_n");
    }
    let mut out = Table::new(columns);
    for &size in &sizes {
        let mut row = vec![Cell::Int(size), Cell::Text(table.count_decimal(size))];
        if labelled {
            let s = &table.labelled().expect("assembly table")[size as usize];
            row.push(Cell::Text(s.to_string()));
        }
        if log {
            match table.log_count(size) {
                Ok(v) => row.push(Cell::Float(v)),
                Err(_) => row.push(Cell::Text("-inf".to_string())),
            }
        }
        out.push(row);
    }
    let config = RunConfig {
        command: "count".to_string(),
        weights_spec: weights.weights.clone(),
        kind: Some(kind),
        n,
        n_range: n_range
            .as_deref()
            .map(SizeRange::parse)
            .transpose()
            .map_err(CliError::Usage)?,
        format,
        labelled,
        log,
    };
    Ok((out, config))
}

fn cmd_compare(
    weights: &WeightsArg,
    kind: &str,
    n_range: &str,
    format: OutputFormat,
) -> CliResult<(Table, RunConfig)> {
    let kind = parse_kind(kind)?;
    let w = weights_of(weights)?;
    let range = SizeRange::parse(n_range).map_err(CliError::Usage)?;
    let sizes: Vec<u64> = range.iter().collect();
    let max = *sizes.iter().max().expect("nonempty");
    let table = count_exact(&w, kind, max)?;
    let mut out = Table::new(vec![
        "n",
        "log_exact",
        "log_meinardus",
        "log_khintchine",
        "ratio_meinardus",
        "ratio_khintchine",
    ]);
    for &size in &sizes {
        let log_exact = table.log_count(size)?;
        let mein = meinardus_estimate(&w, kind, size)?;
        let khin = khintchine_estimate(&w, kind, size)?;
        out.push(vec![
            Cell::Int(size),
            Cell::Float(log_exact),
            Cell::Float(mein.log_value),
            Cell::Float(khin.log_value),
            Cell::Float((mein.log_value - log_exact).exp()),
            Cell::Float((khin.log_value - log_exact).exp()),
        ]);
    }
    let config = RunConfig {
        command: "compare".to_string(),
        weights_spec: weights.weights.clone(),
        kind: Some(kind),
        n: None,
        n_range: Some(range),
        format,
        labelled: false,
        log: false,
    };
    Ok((out, config))
}

fn cmd_delta(weights: &WeightsArg, kind: &str, n: u64) -> CliResult<Table> {
    let kind = parse_kind(kind)?;
    let w = weights_of(weights)?;
    let sp = solve_saddle(&w, kind, n)?;
    let mut out = Table::new(vec![
        "kind",
        "n",
        "delta_n",
        "residual",
        "mean",
        "variance",
        "third_cumulant",
        "iterations",
        "delta_asymptotic",
        "solved_over_asymptotic",
    ]);
    let (asym, ratio) = match delta_asymptotic(&w, kind, n) {
        Ok(a) => (Cell::Float(a), Cell::Float(sp.delta_n / a)),
        Err(_) => (Cell::Text("none".to_string()), Cell::Text("none".to_string())),
    };
    out.push(vec![
        Cell::Text(kind.label().to_string()),
        Cell::Int(n),
        Cell::Float(sp.delta_n),
        Cell::Float(sp.residual),
        Cell::Float(sp.mean),
        Cell::Float(sp.variance),
        Cell::Float(sp.third_cumulant),
        Cell::Int(u64::from(sp.iterations)),
        asym,
        ratio,
    ]);
    Ok(out)
}

fn cmd_llt(weights: &WeightsArg, kind: &str, n: u64) -> CliResult<Table> {
    let kind = parse_kind(kind)?;
    let w = weights_of(weights)?;
    let sp = solve_saddle(&w, kind, n)?;
    let ens = TiltedEnsemble::new(&w, kind, n, sp.delta_n)?;
    let gaussian = 1.0 / (2.0 * std::f64::consts::PI * sp.variance).sqrt();
    let quad = ens.point_prob_quadrature()?;
    let mut out = Table::new(vec![
        "n",
        "delta_n",
        "variance",
        "p_convolution",
        "p_quadrature",
        "gaussian_prediction",
        "conv_over_gaussian",
        "quad_over_gaussian",
        "quad_error_estimate",
        "quad_imag_residual",
    ]);
    let (p_conv, conv_ratio) = if n <= CONVOLUTION_LIMIT {
        let p = ens.point_prob_convolution()?;
        (Cell::Float(p.value), Cell::Float(p.value / gaussian))
    } else {
        (
            Cell::Text("none".to_string()),
            Cell::Text("none".to_string()),
        )
    };
    out.push(vec![
        Cell::Int(n),
        Cell::Float(sp.delta_n),
        Cell::Float(sp.variance),
        p_conv,
        Cell::Float(quad.value),
        Cell::Float(gaussian),
        conv_ratio,
        Cell::Float(quad.value / gaussian),
        Cell::Float(quad.error_estimate),
        Cell::Float(quad.imaginary_residual),
    ]);
    Ok(out)
}

fn condition_summary(report: &ConditionReport) -> Table {
    let mut out = Table::new(vec![
        "delta",
        "min_margin",
        "witness_alpha",
        "truncation_k",
        "truncation_bound",
        "verdict",
    ]);
    for (i, &delta) in report.delta_grid.iter().enumerate() {
        let (wd, wa) = report.witness.unwrap_or((f64::NAN, f64::NAN));
        let witness_alpha = if wd == delta {
            Cell::Float(wa)
        } else {
            let min = report.minima[i];
            let idx = report.margins[i]
                .iter()
                .position(|&m| m == min)
                .unwrap_or(0);
            Cell::Float(report.alpha_grids[i][idx])
        };
        out.push(vec![
            Cell::Float(delta),
            Cell::Float(report.minima[i]),
            witness_alpha,
            Cell::Int(report.truncation_k),
            Cell::Float(report.truncation_bound),
            Cell::Text(report.verdict.label().to_string()),
        ]);
    }
    out
}

fn condition_json(report: &ConditionReport) -> serde_json::Value {
    serde_json::json!({
        "condition": report.condition.label(),
        "kind": report.kind.map(|k| k.label()),
        "epsilon": report.epsilon,
        "verdict": report.verdict.label(),
        "resolution_stable": report.resolution_stable,
        "delta_grid": report.delta_grid,
        "minima": report.minima,
        "witness": report.witness.map(|(d, a)| serde_json::json!({"delta": d, "alpha": a})),
        "alpha_grid_spec": report.alpha_grid_spec,
        "truncation_k": report.truncation_k,
        "truncation_bound": report.truncation_bound,
        "semantics": "grid evidence at the stated resolution, not a proof",
    })
}

fn cmd_check(
    weights: &WeightsArg,
    condition: &str,
    kind: &Option<String>,
    delta_grid: &str,
    epsilon: f64,
) -> CliResult<(ConditionReport, Table, serde_json::Value)> {
    let w = weights_of(weights)?;
    let deltas: Vec<f64> = delta_grid
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad delta `{t}` in grid")))
        })
        .collect::<CliResult<_>>()?;
    let report = match condition {
        "iii" => check_condition_iii(&w, &deltas, epsilon)?,
        "iii-prime" => {
            let kind = match kind {
                Some(k) => parse_kind(k)?,
                None => return usage("--kind is required for condition iii-prime"),
            };
            check_condition_iii_prime(&w, kind, &deltas, epsilon)?
        }
        other => return usage(format!("unknown condition `{other}` (iii|iii-prime)")),
    };
    let summary = condition_summary(&report);
    let json = condition_json(&report);
    Ok((report, summary, json))
}

fn cmd_special(function: &str, x: f64) -> CliResult<Table> {
    let value = match function {
        "gamma" => special::gamma(x)?,
        "zeta" => special::zeta(x)?,
        "zeta-prime" => special::zeta_prime(x)?,
        "bose-log-integral" => special::bose_log_integral(x)?,
        other => {
            return usage(format!(
                "unknown function `{other}` (gamma|zeta|zeta-prime|bose-log-integral)"
            ))
        }
    };
    let mut out = Table::new(vec!["function", "x", "value"]);
    out.push(vec![
        Cell::Text(function.to_string()),
        Cell::Float(x),
        Cell::Text(fmt_float_15(value)),
    ]);
    Ok(out)
}

fn cmd_asymptote(weights: &WeightsArg, kind: &str, n: u64, method: &str) -> CliResult<Table> {
    let kind = parse_kind(kind)?;
    let w = weights_of(weights)?;
    let mut out = Table::new(vec![
        "method",
        "kind",
        "n",
        "log_constant",
        "power_exponent",
        "exponent_coeff",
        "size_exponent",
        "log_value",
    ]);
    let mut push = |name: &str, e: &dcs_core::asymptotics::AsymptoticEstimate| {
        out.push(vec![
            Cell::Text(name.to_string()),
            Cell::Text(kind.label().to_string()),
            Cell::Int(n),
            Cell::Float(e.log_constant),
            Cell::Float(e.power_exponent),
            Cell::Float(e.exponent_coeff),
            Cell::Float(e.size_exponent),
            Cell::Float(e.log_value),
        ]);
    };
    match method {
        "meinardus" => push("meinardus", &meinardus_estimate(&w, kind, n)?),
        "khintchine" => push("khintchine", &khintchine_estimate(&w, kind, n)?),
        "both" => {
            push("meinardus", &meinardus_estimate(&w, kind, n)?);
            push("khintchine", &khintchine_estimate(&w, kind, n)?);
        }
        other => return usage(format!("unknown method `{other}` (meinardus|khintchine|both)")),
    }
    Ok(out)
}

fn write_out(cli_output: &Option<PathBuf>, body: &[u8]) -> CliResult<()> {
    match cli_output {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Usage(format!("cannot write `{}`: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(body)
            .map_err(|e| CliError::Domain(format!("stdout: {e}"))),
    }
}

fn run(cli: &Cli) -> CliResult<u8> {
    let format = OutputFormat::parse(&cli.format).map_err(CliError::Usage)?;
    let mut buf = Vec::new();
    let mut exit = 0u8;
    if cli.dump_config && !matches!(cli.command, Command::Count { .. } | Command::Compare { .. }) {
        return usage("--dump-config is supported for count and compare");
    }
    match &cli.command {
        Command::Count {
            weights,
            kind,
            n,
            n_range,
            labelled,
            log,
        } => {
            let (table, config) =
                cmd_count(weights, kind, *n, n_range, *labelled, *log, format)?;
            if cli.dump_config {
                buf.extend_from_slice(dump_canonical(&config)?.as_bytes());
                buf.push(b'\n');
            } else {
                table
                    .write(format, &mut buf)
                    .map_err(|e| CliError::Domain(e.to_string()))?;
            }
        }
        Command::Compare {
            weights,
            kind,
            n_range,
        } => {
            let (table, config) = cmd_compare(weights, kind, n_range, format)?;
            if cli.dump_config {
                buf.extend_from_slice(dump_canonical(&config)?.as_bytes());
                buf.push(b'\n');
            } else {
                table
                    .write(format, &mut buf)
                    .map_err(|e| CliError::Domain(e.to_string()))?;
            }
        }
        Command::Delta { weights, kind, n } => {
            let table = cmd_delta(weights, kind, *n)?;
            table
                .write(format, &mut buf)
                .map_err(|e| CliError::Domain(e.to_string()))?;
        }
        Command::Llt { weights, kind, n } => {
            let table = cmd_llt(weights, kind, *n)?;
            table
                .write(format, &mut buf)
                .map_err(|e| CliError::Domain(e.to_string()))?;
        }
        Command::Check {
            weights,
            condition,
            kind,
            delta_grid,
            epsilon,
        } => {
            let (report, summary, json) =
                cmd_check(weights, condition, kind, delta_grid, *epsilon)?;
            match format {
                OutputFormat::Json => {
                    buf.extend_from_slice(serde_json::to_string_pretty(&json).unwrap().as_bytes());
                    buf.push(b'\n');
                }
                other => {
                    summary
                        .write(other, &mut buf)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    if other == OutputFormat::Table {
                        buf.extend_from_slice(
                            format!(
                                "verdict: {} ({})\n",
                                report.verdict.label(),
                                if report.resolution_stable {
                                    "stable under grid doubling"
                                } else {
                                    "flipped under grid doubling"
                                }
                            )
                            .as_bytes(),
                        );
                        if matches!(report.condition, Condition::MeinardusIii) {
                            if let Some((d, a)) = report.witness {
                                buf.extend_from_slice(
                                    format!(
                                        "witness: delta={} alpha={}\n",
                                        fmt_float(d),
                                        fmt_float(a)
                                    )
                                    .as_bytes(),
                                );
                            }
                        }
                    }
                }
            }
            if report.verdict == Verdict::Indeterminate {
                exit = 4;
            }
        }
        Command::Special { function, x } => {
            let table = cmd_special(function, *x)?;
            table
                .write(format, &mut buf)
                .map_err(|e| CliError::Domain(e.to_string()))?;
        }
        Command::Asymptote {
            weights,
            kind,
            n,
            method,
        } => {
            let table = cmd_asymptote(weights, kind, *n, method)?;
            table
                .write(format, &mut buf)
                .map_err(|e| CliError::Domain(e.to_string()))?;
        }
    }
    write_out(&cli.output, &buf)?;
    Ok(exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
