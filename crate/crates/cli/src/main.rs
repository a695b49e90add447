//! `urgp`: solve, sweep, and validate geometric programs with uncertain random
//! coefficients.

mod fmt;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use urgp::gp::{build_dual, eval_posynomial};
use urgp::pipeline::parse_alpha_grid;
use urgp::problem_file::parse_problem;
use urgp::reformulate::{lift, to_deterministic, to_stochastic};
use urgp::solver::{solve_dual, solve_primal_from};
use urgp::validate::{check_chance, EndpointPolicy, McConfig};
use urgp::{
    solve_urgp, sweep_alpha, Criterion, CriterionKind, Error, PipelineSolution, SolveConfig, SolveStatus, UrgpProblem,
};

use crate::fmt::sig6;

#[derive(Parser)]
#[command(name = "urgp", version, about = "Geometric programs with uncertain random coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at one confidence level.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        /// Write the full solution as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the dual certificate.
        #[arg(long)]
        no_dual: bool,
    },
    /// Solve over a grid of confidence levels and print CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid as start:stop:step, strictly inside (0, 1).
        #[arg(long)]
        alpha_grid: String,
        #[arg(long)]
        parallel: bool,
    },
    /// Optimal objective against alpha, as two-column CSV.
    Curve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha_grid: String,
        #[arg(long)]
        parallel: bool,
    },
    /// Monte Carlo check of every chance constraint at a solution.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = McConfig::default().seed)]
        seed: u64,
        /// Check the point stored in a `solve --out` file instead of solving.
        #[arg(long)]
        at: Option<PathBuf>,
    },
    /// Solve the dual program and recover the primal point.
    Dual {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON).
    file: PathBuf,
    #[arg(long)]
    criterion: CriterionKind,
    /// Per-row violation probability, in (0, 0.5].
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = SolveConfig::default().kkt_tol)]
    kkt_tol: f64,
    #[arg(long, default_value_t = SolveConfig::default().max_iter)]
    max_iter: usize,
}

impl Common {
    fn config(&self) -> Result<SolveConfig, Failure> {
        let cfg = SolveConfig { kkt_tol: self.kkt_tol, max_iter: self.max_iter, ..SolveConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    fn problem(&self) -> Result<UrgpProblem, Failure> {
        Ok(parse_problem(&self.file)?)
    }
}

/// Outcome classes, one per exit code.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Solver(anyhow::Error),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Validation(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::InvalidParameter(_) | Error::DimensionMismatch(_) | Error::Parse { .. } => {
                Failure::Input(e.into())
            }
            Error::NegativeDegreeOfDifficulty { .. }
            | Error::DegenerateRecovery { .. }
            | Error::DualInfeasible(_)
            | Error::Numerical(_) => Failure::Solver(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn criterion(kind: CriterionKind, alpha: Option<f64>) -> Result<Criterion, Failure> {
    match (kind, alpha) {
        (CriterionKind::Expected, _) => Ok(Criterion::Expected),
        (_, Some(a)) => Ok(kind.with_alpha(a)?),
        (_, None) => Err(Failure::Input(anyhow::anyhow!("--alpha is required for the {kind} criterion"))),
    }
}

fn require_optimal(s: &PipelineSolution) -> Result<(), Failure> {
    if s.is_optimal() {
        Ok(())
    } else {
        Err(Failure::Solver(anyhow::anyhow!(
            "solver stopped with status {} (kkt residual {})",
            s.primal.status,
            sig6(s.primal.kkt_residual)
        )))
    }
}

fn describe(c: Criterion) -> String {
    match c {
        Criterion::Optimistic(a) | Criterion::Pessimistic(a) => format!("{} (alpha = {})", c.kind(), a.value()),
        Criterion::Expected => "expected".into(),
    }
}

fn run_solve(common: &Common, alpha: Option<f64>, out: Option<&Path>, no_dual: bool) -> Result<(), Failure> {
    let c = criterion(common.criterion, alpha)?;
    let p = common.problem()?;
    let mut cfg = common.config()?;
    cfg.dual_enabled = !no_dual;
    let s = solve_urgp(&p, c, common.epsilon, &cfg)?;
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&s).expect("solution serializes");
        std::fs::write(path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Input)?;
    }

    let mut o = std::io::stdout().lock();
    writeln!(o, "criterion     {}", describe(c))?;
    writeln!(o, "epsilon       {} (quantile {})", common.epsilon, sig6(s.quantile))?;
    writeln!(o, "status        {} after {} Newton steps", s.primal.status, s.primal.iterations)?;
    writeln!(o, "objective     {}", sig6(s.primal.objective))?;
    for (name, v) in s.var_names.iter().zip(&s.primal.x) {
        writeln!(o, "  {name:<11} {}", sig6(*v))?;
    }
    writeln!(o, "kkt residual  {}", sig6(s.primal.kkt_residual))?;
    match (&s.dual, s.gap, &s.dual_error) {
        (Some(d), Some(gap), _) => writeln!(o, "dual value    {} (gap {})", sig6(d.dual_objective.exp()), sig6(gap))?,
        (_, _, Some(e)) => writeln!(o, "dual value    unavailable: {e}")?,
        _ => {}
    }
    require_optimal(&s)
}

fn sweep_rows(common: &Common, grid: &str, parallel: bool) -> Result<(Vec<urgp::SweepRow>, Vec<String>), Failure> {
    let grid = parse_alpha_grid(grid)?;
    let p = common.problem()?;
    let cfg = common.config()?;
    let rows = sweep_alpha(&p, common.criterion, common.epsilon, &grid, &cfg, parallel);
    // The lifted variable list does not depend on alpha.
    let c = common.criterion.with_alpha(0.5)?;
    let names = lift(&to_deterministic(&to_stochastic(&p, c), common.epsilon)?)?.gp.var_names().to_vec();
    Ok((rows, names))
}

/// Prints each row error to stderr and turns the first one into the exit
/// status, after all rows have been written.
fn row_failures(rows: &[urgp::SweepRow]) -> Result<(), Failure> {
    let mut first = None;
    for row in rows {
        let err = match &row.outcome {
            Err(e) => Some(Failure::from(e.clone())),
            Ok(s) => require_optimal(s).err(),
        };
        if let Some(f) = err {
            eprintln!("urgp: alpha = {}: {}", row.alpha, message(&f));
            first.get_or_insert(f);
        }
    }
    first.map_or(Ok(()), Err)
}

fn run_sweep(common: &Common, grid: &str, parallel: bool) -> Result<(), Failure> {
    let (rows, names) = sweep_rows(common, grid, parallel)?;
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    let mut header = vec!["alpha".to_string()];
    header.extend(names.iter().cloned());
    header.push("objective".into());
    w.write_record(&header)?;
    for row in &rows {
        let mut rec = vec![row.alpha.to_string()];
        match &row.outcome {
            Ok(s) if s.is_optimal() => {
                rec.extend(s.primal.x.iter().map(f64::to_string));
                rec.push(s.primal.objective.to_string());
            }
            _ => rec.extend(std::iter::repeat_n(String::new(), names.len() + 1)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    row_failures(&rows)
}

fn run_curve(common: &Common, grid: &str, parallel: bool) -> Result<(), Failure> {
    let (rows, _) = sweep_rows(common, grid, parallel)?;
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    w.write_record(["alpha", "objective"])?;
    for row in &rows {
        let obj = match &row.outcome {
            Ok(s) if s.is_optimal() => s.primal.objective.to_string(),
            _ => String::new(),
        };
        w.write_record([row.alpha.to_string(), obj])?;
    }
    w.flush()?;
    row_failures(&rows)
}

#[derive(Deserialize)]
struct SavedPrimal {
    x: Vec<f64>,
}

#[derive(Deserialize)]
struct SavedSolution {
    var_names: Vec<String>,
    primal: SavedPrimal,
}

fn load_point(path: &Path, p: &UrgpProblem) -> Result<Vec<f64>, Failure> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Input)?;
    let saved: SavedSolution = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a solution file", path.display()))
        .map_err(Failure::Input)?;
    p.var_names
        .iter()
        .map(|name| {
            saved
                .var_names
                .iter()
                .position(|n| n == name)
                .and_then(|j| saved.primal.x.get(j).copied())
                .ok_or_else(|| Failure::Input(anyhow::anyhow!("{} has no value for `{name}`", path.display())))
        })
        .collect()
}

fn run_validate(
    common: &Common,
    alpha: Option<f64>,
    samples: usize,
    seed: u64,
    at: Option<&Path>,
) -> Result<(), Failure> {
    let c = criterion(common.criterion, alpha)?;
    let p = common.problem()?;
    let mc = McConfig { samples, seed, endpoint_policy: EndpointPolicy::AsIs };
    mc.validate()?;
    let x = match at {
        Some(path) => load_point(path, &p)?,
        None => {
            let cfg = SolveConfig { dual_enabled: false, ..common.config()? };
            let s = solve_urgp(&p, c, common.epsilon, &cfg)?;
            require_optimal(&s)?;
            s.original_x().to_vec()
        }
    };
    let reports = check_chance(&to_stochastic(&p, c), &x, common.epsilon, &mc)?;
    let level = 1.0 - common.epsilon;
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    w.write_record(["row", "estimate", "stderr", "samples", "seed", "pass"])?;
    let mut failed = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        let name = if k == 0 { "objective".to_string() } else { format!("constraint{k}") };
        let pass = r.estimate + 3.0 * r.stderr >= level;
        if !pass {
            failed.push(name.clone());
        }
        w.write_record([
            name,
            r.estimate.to_string(),
            r.stderr.to_string(),
            r.samples_used.to_string(),
            r.seed.to_string(),
            pass.to_string(),
        ])?;
    }
    w.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("estimate + 3 stderr below {level} for {}", failed.join(", "))))
    }
}

fn run_dual(common: &Common, alpha: Option<f64>) -> Result<(), Failure> {
    let c = criterion(common.criterion, alpha)?;
    let p = common.problem()?;
    let cfg = common.config()?;
    let det = to_deterministic(&to_stochastic(&p, c), common.epsilon)?;
    let lifted = lift(&det)?;
    let dp = build_dual(&lifted.gp);
    let d = solve_dual(&dp, &cfg)?;
    let x = urgp::gp::recover_primal(&lifted.gp, &d, cfg.drop_threshold)?;
    let start = lifted.initial_point(&det, &vec![1.0; p.var_count()])?;
    let primal = solve_primal_from(&lifted.gp, &cfg, &start)?;

    let mut o = std::io::stdout().lock();
    writeln!(o, "criterion     {}", describe(c))?;
    writeln!(o, "terms         {} in {} groups, {} variables", dp.term_count(), dp.group_count, dp.var_count())?;
    writeln!(o, "difficulty    {}", dp.degree_of_difficulty())?;
    writeln!(o, "dual value    {} (log {})", sig6(d.dual_objective.exp()), sig6(d.dual_objective))?;
    writeln!(o, "converged     {} after {} Newton steps", d.converged, d.iterations)?;
    writeln!(
        o,
        "residuals     normality {}, orthogonality {}",
        sig6(d.residual_normality),
        sig6(d.residual_orthogonality)
    )?;
    writeln!(o, "weights")?;
    let mut within = vec![0usize; dp.group_count];
    for (i, delta) in d.delta.iter().enumerate() {
        let g = dp.group_of_term[i];
        let label = if g == 0 { format!("objective[{}]", within[g]) } else { format!("constraint{g}[{}]", within[g]) };
        within[g] += 1;
        writeln!(o, "  {label:<16} {}", sig6(*delta))?;
    }
    writeln!(o, "recovered x")?;
    for (name, v) in lifted.gp.var_names().iter().zip(&x) {
        writeln!(o, "  {name:<16} {}", sig6(*v))?;
    }
    writeln!(o, "value at x    {}", sig6(eval_posynomial(lifted.gp.objective(), &x)?))?;
    if primal.status == SolveStatus::Optimal {
        writeln!(o, "primal value  {}", sig6(primal.objective))?;
        writeln!(o, "gap           {}", sig6(urgp::solver::certify(&primal, &d)))?;
    } else {
        writeln!(o, "primal value  unavailable ({})", primal.status)?;
    }
    if d.converged {
        Ok(())
    } else {
        Err(Failure::Solver(anyhow::anyhow!("dual solver did not converge")))
    }
}

fn message(f: &Failure) -> String {
    match f {
        Failure::Input(e) | Failure::Solver(e) => format!("{e:#}"),
        Failure::Validation(m) => m.clone(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common, alpha, out, no_dual } => run_solve(common, *alpha, out.as_deref(), *no_dual),
        Command::Sweep { common, alpha_grid, parallel } => run_sweep(common, alpha_grid, *parallel),
        Command::Curve { common, alpha_grid, parallel } => run_curve(common, alpha_grid, *parallel),
        Command::Validate { common, alpha, samples, seed, at } => {
            run_validate(common, *alpha, *samples, *seed, at.as_deref())
        }
        Command::Dual { common, alpha } => run_dual(common, *alpha),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("urgp: {}", message(&f));
            ExitCode::from(f.code())
        }
    }
}
