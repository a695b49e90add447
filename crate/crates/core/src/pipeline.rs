//! End-to-end solve: criterion transform, deterministic reformulation, lift,
//! primal solve, and optional dual certification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gp::{build_dual, DualSolution};
use crate::reformulate::{lift, to_deterministic, to_stochastic, DeterministicProgram, LiftedGp, UrgpProblem};
use crate::solver::{certify, solve_dual, solve_primal_from, PrimalSolution, SolveConfig, SolveStatus};
use crate::urv::{Criterion, CriterionKind};

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSolution {
    pub criterion: CriterionKind,
    /// Confidence level, absent for the expected-value criterion.
    pub alpha: Option<f64>,
    pub epsilon: f64,
    pub quantile: f64,
    #[serde(skip)]
    pub deterministic: DeterministicProgram,
    #[serde(skip)]
    pub lifted: LiftedGp,
    pub var_names: Vec<String>,
    pub primal: PrimalSolution,
    /// Deterministic (unlifted) objective at the original variables.
    pub unlifted_objective: f64,
    pub dual: Option<DualSolution>,
    pub gap: Option<f64>,
    /// Present when the dual solve was requested but failed.
    pub dual_error: Option<String>,
}

impl PipelineSolution {
    pub fn original_x(&self) -> &[f64] {
        self.lifted.original(&self.primal.x)
    }

    pub fn is_optimal(&self) -> bool {
        self.primal.status == SolveStatus::Optimal
    }
}

fn alpha_of(c: Criterion) -> Option<f64> {
    match c {
        Criterion::Optimistic(a) | Criterion::Pessimistic(a) => Some(a.value()),
        Criterion::Expected => None,
    }
}

/// Runs the full pipeline for one criterion and tolerance.
pub fn solve_urgp(p: &UrgpProblem, c: Criterion, epsilon: f64, cfg: &SolveConfig) -> Result<PipelineSolution> {
    let stochastic = to_stochastic(p, c);
    let deterministic = to_deterministic(&stochastic, epsilon)?;
    let lifted = lift(&deterministic)?;
    let start = lifted.initial_point(&deterministic, &vec![1.0; p.var_count()])?;
    let primal = solve_primal_from(&lifted.gp, cfg, &start)?;
    let unlifted_objective = deterministic.objective_value(lifted.original(&primal.x))?;

    let (dual, gap, dual_error) = if cfg.dual_enabled && primal.status != SolveStatus::Infeasible {
        match solve_dual(&build_dual(&lifted.gp), cfg) {
            Ok(d) => {
                let gap = certify(&primal, &d);
                (Some(d), Some(gap), None)
            }
            Err(e) => (None, None, Some(e.to_string())),
        }
    } else {
        (None, None, None)
    };
    Ok(PipelineSolution {
        criterion: c.kind(),
        alpha: alpha_of(c),
        epsilon,
        quantile: deterministic.quantile,
        var_names: lifted.gp.var_names().to_vec(),
        deterministic,
        lifted,
        primal,
        unlifted_objective,
        dual,
        gap,
        dual_error,
    })
}

/// One grid point of a sweep; solver errors are kept in the row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub alpha: f64,
    pub outcome: Result<PipelineSolution, Error>,
}

/// Solves at every `alpha` in `grid`, in grid order. With `parallel`, rows are
/// dispatched to the worker pool; the output order does not change.
pub fn sweep_alpha(
    p: &UrgpProblem,
    kind: CriterionKind,
    epsilon: f64,
    grid: &[f64],
    cfg: &SolveConfig,
    parallel: bool,
) -> Vec<SweepRow> {
    let row =
        |&alpha: &f64| SweepRow { alpha, outcome: kind.with_alpha(alpha).and_then(|c| solve_urgp(p, c, epsilon, cfg)) };
    if parallel {
        crate::parallel::with_pool(|| grid.par_iter().map(row).collect())
    } else {
        grid.iter().map(row).collect()
    }
}

/// Parses `start:stop:step` into grid points strictly inside (0, 1).
pub fn parse_alpha_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Parse { context: format!("alpha grid `{spec}`"), message: msg.to_string() };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step"));
    }
    let nums =
        parts.iter().map(|s| s.trim().parse::<f64>().map_err(|_| bad("not a number"))).collect::<Result<Vec<_>>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(start <= stop) {
        return Err(bad("need step > 0 and start <= stop"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect();
    if grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(bad("grid points must lie strictly inside (0, 1)"));
    }
    Ok(grid)
}
