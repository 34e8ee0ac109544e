//! Command-line front end: argument parsing, the four subcommands, and
//! CSV/JSON table output.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numeric failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::convexity::{convexity_at, convexity_threshold};
use crate::error::Error;
use crate::estimators::{difference_exact, gap_curve, taylor_expansion, TailComparison};
use crate::exec::Execution;
use crate::family::{Family, ParamVector, Sample};
use crate::montecarlo::{run_experiment, ARule, ExperimentConfig};
use crate::posterior::{moments, PosteriorSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const VERDICT_CODES: &str = "1=convex_tail,0=indefinite,-1=concave_tail";

#[derive(Debug, Parser)]
#[command(
    name = "tailgap",
    version,
    about = "Bayesian versus plug-in tail probability estimates"
)]
struct Cli {
    /// Emit one JSON document instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Disable data-parallel sweeps.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Both estimators, the exact gap and its Taylor approximation.
    Estimate(EstimateArgs),
    /// F(a|θ) over a parameter grid, or the gap over a threshold grid.
    Curve(CurveArgs),
    /// Convexity verdicts of the tail in θ over a threshold grid.
    Convexity(ConvexityArgs),
    /// Seeded repeated-sampling experiment.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Exponential,
    Pareto,
    Normal,
}

impl FamilyArg {
    fn family(self) -> Family {
        match self {
            FamilyArg::Exponential => Family::Exponential,
            FamilyArg::Pareto => Family::Pareto,
            FamilyArg::Normal => Family::Normal,
        }
    }

    fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyArg::Exponential => &["lambda"],
            FamilyArg::Pareto => &["alpha"],
            FamilyArg::Normal => &["mu", "sigma"],
        }
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Comma-separated observations.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "data_file"
    )]
    data: Vec<f64>,
    /// File with one observation per line; `#` starts a comment.
    #[arg(long)]
    data_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[command(flatten)]
    data: DataArgs,
    /// Thresholds.
    #[arg(long = "a", value_delimiter = ',', allow_hyphen_values = true)]
    a: Vec<f64>,
    /// Thresholds given as quantiles of the fitted (plug-in) distribution.
    #[arg(long, value_delimiter = ',', conflicts_with = "a")]
    a_quantile: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CurveMode {
    CdfVsTheta,
    Gap,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Explicit comma-separated grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Vec<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    to: Option<f64>,
    #[arg(long, default_value_t = 50)]
    points: usize,
}

impl GridArgs {
    fn resolve(&self) -> Result<Vec<f64>, CliError> {
        if !self.grid.is_empty() {
            return Ok(self.grid.clone());
        }
        let (Some(lo), Some(hi)) = (self.from, self.to) else {
            return Err(usage("give --grid or both --from and --to"));
        };
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(usage(format!("invalid range {lo}..{hi}")));
        }
        Ok(match self.points {
            0 => return Err(usage("--points must be positive")),
            1 => vec![lo],
            k => (0..k)
                .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
                .collect(),
        })
    }
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "gap")]
    mode: CurveMode,
    #[command(flatten)]
    data: DataArgs,
    /// Fixed threshold (cdf-vs-theta mode).
    #[arg(long = "a", allow_hyphen_values = true)]
    a: Option<f64>,
    /// Base parameter vector (cdf-vs-theta mode).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Index of the parameter that varies (cdf-vs-theta mode).
    #[arg(long, default_value_t = 0)]
    vary: usize,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct ConvexityArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    theta: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Report only the convexity onset a*.
    #[arg(long)]
    threshold: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// True parameter vector.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    theta: Vec<f64>,
    /// Sample size per replication.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    reps: usize,
    /// Thresholds as quantiles of the true distribution.
    #[arg(long, value_delimiter = ',')]
    quantiles: Vec<f64>,
    /// Fixed thresholds.
    #[arg(
        long = "a",
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "quantiles"
    )]
    a: Vec<f64>,
    #[arg(long, env = "TAILGAP_SEED")]
    seed: u64,
}

/// Tabular command output: a header, numeric rows and key/value metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::InvalidConfig(_) | Error::Unsupported(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl OutputTable {
    fn new(columns: &[&str]) -> Self {
        Self {
            column_names: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: vec![
                ("tool".into(), "tailgap".into()),
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ],
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.column_names.len());
        self.rows.push(row);
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_names.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// `# key: value` lines, a header, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", self.column_names.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// `{metadata, columns, rows}`; non-finite cells become `null`.
    pub fn to_json(&self) -> String {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Array(
                    r.iter()
                        .map(|&x| {
                            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = json!({ "metadata": metadata, "columns": self.column_names, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut metadata = Vec::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = loop {
            let line = lines.next().ok_or("missing header")?;
            match line.strip_prefix("# ") {
                Some(m) => {
                    let (k, v) = m
                        .split_once(": ")
                        .ok_or_else(|| format!("bad metadata line {line:?}"))?;
                    metadata.push((k.to_string(), v.to_string()));
                }
                None => break line,
            }
        };
        let column_names: Vec<String> = header.split(',').map(str::to_string).collect();
        let rows = lines
            .map(|line| {
                let row = line
                    .split(',')
                    .map(|c| c.parse::<f64>().map_err(|e| format!("bad cell {c:?}: {e}")))
                    .collect::<Result<Vec<_>, _>>()?;
                if row.len() != column_names.len() {
                    return Err(format!(
                        "row has {} cells, header has {}",
                        row.len(),
                        column_names.len()
                    ));
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(Self {
            column_names,
            rows,
            metadata,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let metadata = doc["metadata"]
            .as_object()
            .ok_or("missing metadata")?
            .iter()
            .map(|(k, v)| {
                Ok((
                    k.clone(),
                    v.as_str().ok_or("metadata values are strings")?.to_string(),
                ))
            })
            .collect::<Result<Vec<_>, String>>()?;
        let column_names = doc["columns"]
            .as_array()
            .ok_or("missing columns")?
            .iter()
            .map(|c| {
                c.as_str()
                    .map(str::to_string)
                    .ok_or("column names are strings")
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows = doc["rows"]
            .as_array()
            .ok_or("missing rows")?
            .iter()
            .map(|r| {
                let cells = r.as_array().ok_or("rows are arrays")?;
                if cells.len() != column_names.len() {
                    return Err("row arity differs from header".to_string());
                }
                cells
                    .iter()
                    .map(|c| match c {
                        Value::Null => Ok(f64::NAN),
                        v => v.as_f64().ok_or_else(|| "cells are numbers".to_string()),
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(Self {
            column_names,
            rows,
            metadata,
        })
    }
}

fn read_sample(d: &DataArgs) -> Result<Sample, CliError> {
    let values = match &d.data_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let mut v = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let body = line.split('#').next().unwrap_or("").trim();
                if body.is_empty() {
                    continue;
                }
                v.push(
                    body.parse::<f64>()
                        .map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1)))?,
                );
            }
            v
        }
        None => d.data.clone(),
    };
    if values.is_empty() {
        return Err(usage("no observations: give --data or --data-file"));
    }
    Ok(Sample::new(values)?)
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn posterior_table(columns: &[&str], fam: FamilyArg, spec: &PosteriorSpec) -> OutputTable {
    let mut t = OutputTable::new(columns);
    t.meta("family", spec.family().name());
    t.meta("n", spec.sample().n());
    t.meta("theta_hat", fmt_vec(spec.theta_hat().coords()));
    t.meta("parameters", fam.param_names().join(";"));
    if spec.mle().out_of_model {
        t.meta("warning", "MLE outside the model parameter space");
    }
    t
}

fn verdict_code(family: &Family, theta: &ParamVector, a: f64) -> f64 {
    convexity_at(family, theta, a, None).map_or(f64::NAN, |r| r.verdict.code() as f64)
}

fn comparison_row(c: &TailComparison, verdict: f64) -> Vec<f64> {
    vec![
        c.a,
        c.p_bayes,
        c.p_freq,
        c.d_exact,
        c.d_taylor().unwrap_or(f64::NAN),
        verdict,
        c.ln_p_bayes,
        c.ln_p_freq,
    ]
}

const COMPARISON_COLUMNS: [&str; 8] = [
    "a",
    "p_bayes",
    "p_freq",
    "d_exact",
    "d_taylor",
    "verdict",
    "ln_p_bayes",
    "ln_p_freq",
];

fn cmd_estimate(args: &EstimateArgs) -> Result<OutputTable, CliError> {
    let family = args.family.family();
    let spec = PosteriorSpec::with_default_prior(family.clone(), read_sample(&args.data)?)?;
    let thresholds: Vec<f64> = if !args.a.is_empty() {
        args.a.clone()
    } else if !args.a_quantile.is_empty() {
        args.a_quantile
            .iter()
            .map(|&p| family.quantile(spec.theta_hat(), p))
            .collect::<Result<_, _>>()?
    } else {
        return Err(usage("give --a or --a-quantile"));
    };
    let m = moments(&spec).ok();
    let mut table = posterior_table(&COMPARISON_COLUMNS, args.family, &spec);
    table.meta("verdict_codes", VERDICT_CODES);
    for a in thresholds {
        let mut c = difference_exact(&spec, a)?;
        if let Some(m) = &m {
            c.taylor = taylor_expansion(&family, spec.theta_hat(), a, m).ok();
        }
        table.push(comparison_row(
            &c,
            verdict_code(&family, spec.theta_hat(), a),
        ));
    }
    Ok(table)
}

fn cmd_curve(args: &CurveArgs, exec: Execution) -> Result<OutputTable, CliError> {
    let family = args.family.family();
    let grid = args.grid.resolve()?;
    match args.mode {
        CurveMode::CdfVsTheta => {
            let a = args.a.ok_or_else(|| usage("cdf-vs-theta needs --a"))?;
            let names = args.family.param_names();
            if args.theta.len() != names.len() {
                return Err(usage(format!(
                    "--theta needs {} values ({})",
                    names.len(),
                    names.join(",")
                )));
            }
            let name = *names
                .get(args.vary)
                .ok_or_else(|| usage(format!("--vary must be below {}", names.len())))?;
            let base = ParamVector::new(args.theta.clone());
            let mut table = OutputTable::new(&[name, "cdf", "tail"]);
            table.meta("family", family.name());
            table.meta("mode", "cdf-vs-theta");
            table.meta("a", a);
            table.meta("theta", fmt_vec(&args.theta));
            for x in grid {
                let theta = base.with(args.vary, x);
                table.push(vec![x, family.cdf(&theta, a)?, family.tail(&theta, a)?]);
            }
            Ok(table)
        }
        CurveMode::Gap => {
            let spec = PosteriorSpec::with_default_prior(family.clone(), read_sample(&args.data)?)?;
            let points = gap_curve(&spec, &grid, exec)?;
            let mut table = posterior_table(&COMPARISON_COLUMNS, args.family, &spec);
            table.meta("mode", "gap");
            table.meta("verdict_codes", VERDICT_CODES);
            let mut failed = 0;
            for (a, p) in grid.iter().zip(points) {
                match p {
                    Ok(c) => table.push(comparison_row(
                        &c,
                        verdict_code(&family, spec.theta_hat(), *a),
                    )),
                    Err(_) => {
                        failed += 1;
                        let mut row = vec![f64::NAN; COMPARISON_COLUMNS.len()];
                        row[0] = *a;
                        table.push(row);
                    }
                }
            }
            table.meta("failed_points", failed);
            Ok(table)
        }
    }
}

fn cmd_convexity(args: &ConvexityArgs, exec: Execution) -> Result<OutputTable, CliError> {
    let family = args.family.family();
    let theta = ParamVector::new(args.theta.clone());
    family.check_theta(&theta)?;
    let grid = args.grid.resolve()?;
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    if lo < family.support_lower() {
        return Err(usage(format!(
            "threshold range starts at {lo}, below the support edge {}",
            family.support_lower()
        )));
    }
    let columns: &[&str] = if args.threshold {
        &["a_star"]
    } else {
        &["a", "max_eigenvalue", "verdict"]
    };
    let mut table = OutputTable::new(columns);
    table.meta("family", family.name());
    table.meta("theta", fmt_vec(&args.theta));
    if args.threshold {
        let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a_star = convexity_threshold(&family, &theta, (lo, hi), grid.len().max(2), exec)?;
        table.meta("threshold", if a_star.is_some() { "found" } else { "none" });
        table.push(vec![a_star.unwrap_or(f64::NAN)]);
    } else {
        table.meta("verdict_codes", VERDICT_CODES);
        for a in grid {
            let r = convexity_at(&family, &theta, a, None)?;
            table.push(vec![a, r.max_eigenvalue, r.verdict.code() as f64]);
        }
    }
    Ok(table)
}

fn cmd_simulate(args: &SimulateArgs, exec: Execution) -> Result<OutputTable, CliError> {
    let a_rule = if !args.a.is_empty() {
        ARule::FixedList(args.a.clone())
    } else if !args.quantiles.is_empty() {
        ARule::QuantileOfTruth(args.quantiles.clone())
    } else {
        return Err(usage("give --quantiles or --a"));
    };
    let config = ExperimentConfig {
        family: args.family.family(),
        true_theta: ParamVector::new(args.theta.clone()),
        n: args.n,
        reps: args.reps,
        a_rule,
        seed: args.seed,
    };
    if config.true_theta.dim() != config.family.param_dim() {
        return Err(usage(format!(
            "--theta needs {} values",
            config.family.param_dim()
        )));
    }
    let summary = run_experiment(&config, exec).map_err(|e| match e {
        // every replication failing is a numeric outcome, not a usage error
        Error::InvalidConfig(msg) if msg.starts_with("all ") => CliError::Numeric(msg),
        e => e.into(),
    })?;
    let mut table = OutputTable::new(&[
        "a",
        "frac_bayes_higher",
        "mean_d",
        "mean_log_ratio",
        "true_tail",
    ]);
    table.meta("family", config.family.name());
    table.meta("theta", fmt_vec(&args.theta));
    table.meta("n", args.n);
    table.meta("reps", args.reps);
    table.meta("seed", args.seed);
    table.meta("rep_failures", summary.rep_failures);
    for s in summary.per_a {
        table.push(vec![
            s.a,
            s.frac_bayes_higher,
            s.mean_d,
            s.mean_log_ratio,
            s.true_tail,
        ]);
    }
    Ok(table)
}

/// Parses `args` (including the program name), runs the command and writes
/// the table to `out`; diagnostics go to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Curve(a) => cmd_curve(a, exec),
        Command::Convexity(a) => cmd_convexity(a, exec),
        Command::Simulate(a) => cmd_simulate(a, exec),
    };
    match result {
        Ok(table) => {
            let text = if cli.json {
                table.to_json()
            } else {
                table.to_csv()
            };
            match out.write_all(text.as_bytes()) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Numeric(msg)) => {
            let _ = writeln!(err, "numeric failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("tailgap").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn estimate_closed_form_row() {
        let (code, out, _) = run_str(&[
            "estimate",
            "--family",
            "exponential",
            "--data",
            "1,2,3",
            "--a",
            "10",
        ]);
        assert_eq!(code, 0);
        let t = OutputTable::from_csv(&out).unwrap();
        let pb = t.column("p_bayes").unwrap()[0];
        assert!(((pb - (6.0f64 / 16.0).powi(3)) / pb).abs() < 1e-15);
        assert!(t.column("d_taylor").unwrap()[0].is_nan());
        assert_eq!(t.metadata_value("n"), Some("3"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["estimate", "--data", "1,2"]).0, EXIT_USAGE);
        assert_eq!(
            run_str(&[
                "estimate",
                "--family",
                "exponential",
                "--data",
                "1,x",
                "--a",
                "1"
            ])
            .0,
            EXIT_USAGE
        );
        assert_eq!(
            run_str(&[
                "estimate",
                "--family",
                "exponential",
                "--data",
                "1,-2",
                "--a",
                "1"
            ])
            .0,
            EXIT_USAGE
        );
        assert_eq!(
            run_str(&["estimate", "--family", "exponential", "--data", "1,2"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_str(&["--version"]).0, EXIT_OK);
    }

    #[test]
    fn json_round_trip() {
        let (code, out, _) = run_str(&[
            "--json",
            "estimate",
            "--family",
            "pareto",
            "--data",
            "2,3,5",
            "--a-quantile",
            "0.99",
        ]);
        assert_eq!(code, 0);
        let t = OutputTable::from_json(&out).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.column_names.len(), t.rows[0].len());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut t = OutputTable::new(&["x", "y"]);
        t.push(vec![std::f64::consts::PI, 1e-300]);
        t.push(vec![f64::NAN, -0.1]);
        let back = OutputTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back.rows[0], t.rows[0]);
        assert!(back.rows[1][0].is_nan());
        assert_eq!(back.rows[1][1], -0.1);
        assert_eq!(back.metadata, t.metadata);
    }
}
