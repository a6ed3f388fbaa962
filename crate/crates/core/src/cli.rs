//! Command-line driver.
//!
//! Every subcommand computes its result first and then writes it once,
//! either as one JSON object or as an RFC 4180 CSV table, to stdout or to
//! `--output`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::beta::{solve_beta_first_best, solve_beta_second_best, BetaParams};
use crate::error::{invalid, Error};
use crate::first_best::{size_bound, solve_first_best, DEFAULT_TOL};
use crate::model::{lambda_star, Database, ModelParams};
use crate::numeric::linspace;
use crate::posterior::McConfig;
use crate::second_best::{
    compare_fb_sb, iso_marginal_curves, menu_for_database, solve_second_best, sweep, SweepAxis,
    SweepRow,
};
use crate::validate::run_validation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Exact header of sweep tables.
pub const SWEEP_HEADER: [&str; 17] = [
    "axis_value",
    "regime",
    "n0_fb",
    "n1_fb",
    "profit_fb",
    "n0_sb",
    "n1_sb",
    "q0_L",
    "q1_L",
    "q0_S",
    "q1_S",
    "p_L",
    "p_S",
    "profit_sb",
    "lambda_star",
    "total_fb",
    "total_sb",
];

#[derive(Debug, Parser)]
#[command(
    name = "datadump",
    version,
    about = "Optimal storage and screening menus for a monopolistic data seller"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Lambda,
    Cost,
    SigmaMuSq,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Lambda => SweepAxis::Lambda,
            AxisArg::Cost => SweepAxis::Cost,
            AxisArg::SigmaMuSq => SweepAxis::SigmaMuSq,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Prior variance of the long-run mean.
    #[arg(long, conflicts_with = "sigma_mu")]
    pub sigma_mu_sq: Option<f64>,
    /// Prior standard deviation of the long-run mean.
    #[arg(long)]
    pub sigma_mu: Option<f64>,
    /// Storage cost per observation.
    #[arg(long)]
    pub cost: Option<f64>,
    /// Fraction of nowcasters.
    #[arg(long)]
    pub lambda: Option<f64>,
}

impl ModelArgs {
    /// Validated parameters; `swept` names an axis whose value is supplied
    /// by a sweep instead of a flag.
    fn params(&self, swept: Option<SweepAxis>, placeholder: f64) -> Result<ModelParams, Error> {
        let fill = |axis: SweepAxis, v: Option<f64>, name: &'static str| match (v, swept) {
            (Some(v), _) => Ok(v),
            (None, Some(a)) if a == axis => Ok(placeholder),
            (None, _) => Err(invalid(name, "required")),
        };
        let cost = fill(SweepAxis::Cost, self.cost, "cost")?;
        let lambda = fill(SweepAxis::Lambda, self.lambda, "lambda")?;
        match (self.sigma_mu_sq, self.sigma_mu) {
            (_, Some(sd)) => ModelParams::from_sigma_mu(sd, cost, lambda),
            (v, None) => {
                let var = fill(SweepAxis::SigmaMuSq, v, "sigma_mu_sq")?;
                ModelParams::new(var, cost, lambda)
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BetaArgs {
    /// Location of the narrow type (0 < r < s).
    #[arg(long)]
    pub r: f64,
    /// Location of the broad type (s < 1/2).
    #[arg(long)]
    pub s: f64,
    /// Probability of type r (and of 1 - r).
    #[arg(long)]
    pub p_r: f64,
    /// Observation noise variance.
    #[arg(long)]
    pub sigma_sq: f64,
    /// Storage cost per observation.
    #[arg(long)]
    pub cost: f64,
}

impl BetaArgs {
    fn params(&self) -> Result<BetaParams, Error> {
        BetaParams::new(self.r, self.s, self.p_r, self.sigma_sq, self.cost)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full-information database and fees.
    FirstBest {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Second-best database and screening menu.
    SecondBest {
        #[command(flatten)]
        model: ModelArgs,
        /// Require at least as much current as historical data.
        #[arg(long)]
        markov: bool,
    },
    /// Optimal menu for a fixed database.
    Menu {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n0: f64,
        #[arg(long)]
        n1: f64,
    },
    /// First best versus second best.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Solve both problems over a grid of one parameter.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long)]
        markov: bool,
    },
    /// Iso-marginal-value curves over a grid of historical sample sizes.
    Curves {
        #[command(flatten)]
        model: ModelArgs,
        /// Marginal value level; defaults to the storage cost.
        #[arg(long)]
        level: Option<f64>,
        /// Largest historical sample size; defaults to a bound on optimal sizes.
        #[arg(long)]
        n0_max: Option<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Four-type model, full information.
    BetaFirstBest {
        #[command(flatten)]
        beta: BetaArgs,
    },
    /// Four-type model, private types.
    BetaSecondBest {
        #[command(flatten)]
        beta: BetaArgs,
    },
    /// Run the oracle and property suite.
    Validate {
        /// Monte Carlo draws per case.
        #[arg(long, default_value_t = 1_000_000)]
        draws: u64,
        /// Monte Carlo and sampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("validation suite failed")]
    ValidationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(Error::InvalidParameter { .. }) => EXIT_INVALID,
            CliError::Model(Error::NonConvergence { .. }) => EXIT_NON_CONVERGENCE,
            CliError::ValidationFailed => EXIT_VALIDATION,
            _ => EXIT_OTHER,
        }
    }
}

/// Rendered output of one run.
struct Output {
    json: Value,
    csv_header: Vec<String>,
    csv_rows: Vec<Vec<String>>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn label<T: std::fmt::Debug>(x: &T) -> String {
    format!("{x:?}")
}

fn envelope<P: Serialize, R: Serialize>(command: &str, params: &P, tol: f64, result: &R) -> Value {
    json!({ "command": command, "params": params, "tol": tol, "result": result })
}

fn sweep_record(row: &SweepRow) -> Vec<String> {
    match (&row.first_best, &row.second_best) {
        (Some(fb), Some(sb)) => vec![
            num(row.axis_value),
            label(&sb.regime),
            num(fb.db.n0),
            num(fb.db.n1),
            num(fb.profit),
            num(sb.db.n0),
            num(sb.db.n1),
            num(sb.menu.plan_l.q0),
            num(sb.menu.plan_l.q1),
            num(sb.menu.plan_s.q0),
            num(sb.menu.plan_s.q1),
            num(sb.menu.plan_l.fee),
            num(sb.menu.plan_s.fee),
            num(sb.profit),
            num(sb.lambda_star_at_solution),
            num(fb.db.total()),
            num(sb.db.total()),
        ],
        _ => {
            let mut cells = vec![num(row.axis_value), "error".to_string()];
            cells.resize(SWEEP_HEADER.len(), String::new());
            cells
        }
    }
}

fn sweep_json(row: &SweepRow) -> Value {
    let cells = sweep_record(row);
    let mut obj = serde_json::Map::new();
    for (name, cell) in SWEEP_HEADER.iter().zip(cells) {
        let value = match *name {
            "regime" => Value::String(cell),
            _ if cell.is_empty() => Value::Null,
            _ => json!(cell.parse::<f64>().expect("formatted float")),
        };
        obj.insert(name.to_string(), value);
    }
    if let Some(e) = &row.error {
        obj.insert("error".into(), Value::String(e.clone()));
    }
    Value::Object(obj)
}

fn compute(cli: &Cli) -> Result<Output, CliError> {
    let tol = cli.tol;
    let out = match &cli.command {
        Command::FirstBest { model } => {
            let p = model.params(None, 0.0)?;
            let sol = solve_first_best(&p, tol)?;
            Output {
                json: envelope("first-best", &p, tol, &sol),
                csv_header: header(&["regime", "n0", "n1", "profit", "fee_S", "fee_L"]),
                csv_rows: vec![vec![
                    label(&sol.regime),
                    num(sol.db.n0),
                    num(sol.db.n1),
                    num(sol.profit),
                    num(sol.fees.nowcaster),
                    num(sol.fees.forecaster),
                ]],
            }
        }
        Command::SecondBest { model, markov } => {
            let p = model.params(None, 0.0)?;
            let sol = solve_second_best(&p, *markov, tol)?;
            let mut json = envelope("second-best", &p, tol, &sol);
            json["markov"] = json!(markov);
            let reversed = sol.db.n0 > sol.db.n1;
            json["result"]["composition_reversed"] = json!(reversed);
            Output {
                json,
                csv_header: header(&[
                    "regime", "n0", "n1", "q0_L", "q1_L", "q0_S", "q1_S", "p_L", "p_S", "profit",
                    "lambda_star", "composition_reversed",
                ]),
                csv_rows: vec![vec![
                    label(&sol.regime),
                    num(sol.db.n0),
                    num(sol.db.n1),
                    num(sol.menu.plan_l.q0),
                    num(sol.menu.plan_l.q1),
                    num(sol.menu.plan_s.q0),
                    num(sol.menu.plan_s.q1),
                    num(sol.menu.plan_l.fee),
                    num(sol.menu.plan_s.fee),
                    num(sol.profit),
                    num(sol.lambda_star_at_solution),
                    reversed.to_string(),
                ]],
            }
        }
        Command::Menu { model, n0, n1 } => {
            let p = model.params(None, 0.0)?;
            let db = Database::new(*n0, *n1)?;
            let menu = menu_for_database(db, &p);
            let threshold = lambda_star(db.n0, &p);
            let result = json!({
                "db": db,
                "menu": menu,
                "revenue": menu.revenue(p.lambda),
                "lambda_star": threshold,
                "pooled": menu.is_pooled(),
            });
            Output {
                json: envelope("menu", &p, tol, &result),
                csv_header: header(&[
                    "n0", "n1", "q0_L", "q1_L", "q0_S", "q1_S", "p_L", "p_S", "revenue",
                    "lambda_star",
                ]),
                csv_rows: vec![vec![
                    num(db.n0),
                    num(db.n1),
                    num(menu.plan_l.q0),
                    num(menu.plan_l.q1),
                    num(menu.plan_s.q0),
                    num(menu.plan_s.q1),
                    num(menu.plan_l.fee),
                    num(menu.plan_s.fee),
                    num(menu.revenue(p.lambda)),
                    num(threshold),
                ]],
            }
        }
        Command::Compare { model } => {
            let p = model.params(None, 0.0)?;
            let report = compare_fb_sb(&p)?;
            Output {
                json: envelope("compare", &p, tol, &report),
                csv_header: header(&[
                    "n0_fb",
                    "n1_fb",
                    "n0_sb",
                    "n1_sb",
                    "delta_n0",
                    "delta_n1",
                    "delta_total",
                    "composition_reversed",
                    "historical_shift",
                ]),
                csv_rows: vec![vec![
                    num(report.fb.db.n0),
                    num(report.fb.db.n1),
                    num(report.sb.db.n0),
                    num(report.sb.db.n1),
                    num(report.delta_n0),
                    num(report.delta_n1),
                    num(report.delta_total),
                    report.composition_reversed.to_string(),
                    report.historical_shift.map(|b| b.to_string()).unwrap_or_default(),
                ]],
            }
        }
        Command::Sweep {
            model,
            axis,
            from,
            to,
            steps,
            markov,
        } => {
            if *steps < 1 {
                return Err(invalid("steps", "must be at least 1").into());
            }
            if !(from.is_finite() && to.is_finite()) {
                return Err(invalid("from, to", "must be finite").into());
            }
            let axis = SweepAxis::from(*axis);
            let base = model.params(Some(axis), *from)?;
            let grid = linspace(*from, *to, *steps);
            let rows = sweep(&base, axis, &grid, *markov)?;
            Output {
                json: json!({
                    "command": "sweep",
                    "params": base,
                    "tol": tol,
                    "axis": axis,
                    "markov": markov,
                    "rows": rows.iter().map(sweep_json).collect::<Vec<_>>(),
                }),
                csv_header: header(&SWEEP_HEADER),
                csv_rows: rows.iter().map(sweep_record).collect(),
            }
        }
        Command::Curves {
            model,
            level,
            n0_max,
            points,
        } => {
            let p = model.params(None, 0.0)?;
            let level = level.unwrap_or(p.cost);
            let n0_max = n0_max.unwrap_or_else(|| size_bound(&p));
            if !(n0_max.is_finite() && n0_max > 0.0) || *points < 2 {
                return Err(invalid("n0_max, points", "need n0_max > 0 and points >= 2").into());
            }
            let set = iso_marginal_curves(&p, level, &linspace(0.0, n0_max, *points))?;
            Output {
                json: envelope("curves", &p, tol, &set),
                csv_header: header(&["n0", "f0", "f1", "g0", "g1"]),
                csv_rows: set
                    .points
                    .iter()
                    .map(|pt| vec![num(pt.n0), opt_num(pt.f0), opt_num(pt.f1), opt_num(pt.g0), opt_num(pt.g1)])
                    .collect(),
            }
        }
        Command::BetaFirstBest { beta } => {
            let bp = beta.params()?;
            let fb = solve_beta_first_best(&bp, tol)?;
            Output {
                json: envelope("beta-first-best", &bp, tol, &fb),
                csv_header: header(&["n_star", "profit"]),
                csv_rows: vec![vec![num(fb.n_star), num(fb.profit)]],
            }
        }
        Command::BetaSecondBest { beta } => {
            let bp = beta.params()?;
            let sol = solve_beta_second_best(&bp, tol)?;
            let mut row = vec![label(&sol.regime), num(sol.n_store), num(sol.q_broad)];
            row.extend(sol.fees.iter().map(|&t| num(t)));
            row.extend([num(sol.profit), num(sol.first_best_n)]);
            Output {
                json: envelope("beta-second-best", &bp, tol, &sol),
                csv_header: header(&[
                    "regime",
                    "n_store",
                    "q_broad",
                    "t_r",
                    "t_s",
                    "t_1_minus_s",
                    "t_1_minus_r",
                    "profit",
                    "first_best_n",
                ]),
                csv_rows: vec![row],
            }
        }
        Command::Validate { draws, seed } => {
            let summary = run_validation(&McConfig {
                draws: *draws,
                seed: *seed,
            })?;
            for c in &summary.checks {
                eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let out = Output {
                json: json!({ "command": "validate", "result": summary }),
                csv_header: header(&["check", "pass", "detail"]),
                csv_rows: summary
                    .checks
                    .iter()
                    .map(|c| vec![c.name.to_string(), c.pass.to_string(), c.detail.clone()])
                    .collect(),
            };
            if !summary.pass {
                emit(cli, &out)?;
                return Err(CliError::ValidationFailed);
            }
            out
        }
    };
    Ok(out)
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match cli.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &out.json)?;
            writeln!(sink)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(&out.csv_header)?;
            for row in &out.csv_rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(invalid("tol", format!("must be finite and > 0, got {}", cli.tol)).into());
    }
    let out = compute(cli)?;
    emit(cli, &out)
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
