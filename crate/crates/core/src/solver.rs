//! Interior-point solvers for posynomial geometric programs.
//!
//! The primal path works on `y = ln x`, where the program becomes
//! `min F_0(y)` s.t. `F_k(y) ≤ 0` with every `F` a log-sum-exp of affine
//! functions. It follows the log-barrier central path
//! `min F_0(y) − μ Σ ln(−F_k(y))` with damped Newton centering, after a
//! phase-I solve when the start is infeasible.
//!
//! The dual path maximizes the concave `log V(δ)` over the normality and
//! orthogonality equalities with an infeasible-start Newton method on the
//! barrier `−log V(δ) − μ Σ ln δ_i`. It certifies the primal optimum by the
//! duality gap.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{build_dual, recover_primal, DualProblem, DualSolution, GpProblem, Monomial, Posynomial};

/// Tuning for both solve paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Target for the KKT residual (barrier duality measure plus final Newton
    /// decrement).
    pub kkt_tol: f64,
    /// Cap on barrier outer iterations, and separately on Newton steps per
    /// centering.
    pub max_iter: usize,
    pub barrier_mu_init: f64,
    pub barrier_shrink: f64,
    pub dual_enabled: bool,
    /// Dual weights below this are dropped from primal recovery.
    pub drop_threshold: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            kkt_tol: 1e-8,
            max_iter: 200,
            barrier_mu_init: 1.0,
            barrier_shrink: 0.2,
            dual_enabled: true,
            drop_threshold: 1e-8,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kkt_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("kkt_tol must be positive, got {}", self.kkt_tol)));
        }
        if !(self.barrier_shrink > 0.0 && self.barrier_shrink < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "barrier_shrink must lie in (0, 1), got {}",
                self.barrier_shrink
            )));
        }
        if !(self.barrier_mu_init > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("barrier_mu_init and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::Infeasible => "infeasible",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    /// Total Newton steps over both phases.
    pub iterations: usize,
    pub status: SolveStatus,
    /// Objective at the end of each barrier centering.
    pub path: Vec<f64>,
    /// Objective at every phase-II iterate; all of them are strictly feasible.
    pub trace: Vec<f64>,
}

/// Constraint activity threshold `|f_k(x) − 1| ≤ 1e-6`.
pub const ACTIVE_TOL: f64 = 1e-6;
/// Slack allowed on `f_k(x) ≤ 1` for a solution reported as optimal.
pub const FEAS_TOL: f64 = 1e-8;

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-14;
/// Half-width in log space of the box phase I searches in.
const PHASE_ONE_BOX: f64 = 40.0;

/// A program `min F_0` s.t. `F_k ≤ 0` in log space.
struct LogProgram<'a> {
    objective: &'a Posynomial,
    constraints: &'a [Posynomial],
}

struct Centered {
    y: Vec<f64>,
    steps: usize,
    decrement: f64,
    stopped_early: bool,
}

impl LogProgram<'_> {
    fn n(&self) -> usize {
        self.objective.var_count()
    }

    /// Barrier value, or `None` outside the strict domain.
    fn barrier(&self, y: &[f64], mu: f64) -> Option<f64> {
        let mut v = self.objective.log_value(y);
        for c in self.constraints {
            let f = c.log_value(y);
            if !(f < 0.0) {
                return None;
            }
            v -= mu * (-f).ln();
        }
        v.is_finite().then_some(v)
    }

    fn grad_hess(&self, y: &[f64], mu: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n();
        let mut h = DMatrix::zeros(n, n);
        let ev = self.objective.eval_log_space(y);
        let mut g = DVector::from_vec(ev.gradient.clone());
        self.objective.add_log_hessian(&ev, 1.0, &mut h);
        for c in self.constraints {
            let ev = c.eval_log_space(y);
            let s = -ev.value;
            let gc = DVector::from_column_slice(&ev.gradient);
            g.axpy(mu / s, &gc, 1.0);
            c.add_log_hessian(&ev, mu / s, &mut h);
            h.ger(mu / (s * s), &gc, &gc, 1.0);
        }
        (g, h)
    }

    /// Damped Newton minimization of the barrier at fixed `mu`.
    fn center(
        &self,
        mut y: Vec<f64>,
        mu: f64,
        max_steps: usize,
        mut on_iterate: impl FnMut(&[f64]) -> bool,
    ) -> Centered {
        let mut phi = self.barrier(&y, mu).expect("centering starts strictly feasible");
        let mut decrement = f64::INFINITY;
        for step in 0..max_steps {
            let (g, h) = self.grad_hess(&y, mu);
            let d = newton_direction(h, &g);
            let slope = g.dot(&d);
            decrement = -slope;
            if !(decrement > 0.0) || decrement * 0.5 <= 1e-14 * phi.abs().max(1.0) {
                return Centered { y, steps: step, decrement: decrement.max(0.0), stopped_early: false };
            }
            let mut t = 1.0;
            let mut accepted = None;
            while t >= MIN_STEP {
                let trial: Vec<f64> = y.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                if let Some(v) = self.barrier(&trial, mu) {
                    if v <= phi + ARMIJO_C * t * slope {
                        accepted = Some((trial, v));
                        break;
                    }
                }
                t *= BACKTRACK;
            }
            let Some((next, v)) = accepted else {
                return Centered { y, steps: step + 1, decrement, stopped_early: false };
            };
            y = next;
            phi = v;
            if on_iterate(&y) {
                return Centered { y, steps: step + 1, decrement, stopped_early: true };
            }
        }
        Centered { y, steps: max_steps, decrement, stopped_early: false }
    }
}

/// Solves `H d = −g`, regularizing `H` when it is not numerically positive
/// definite.
fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let n = h.nrows();
    let scale = h.diagonal().amax().max(1.0);
    let mut ridge = 0.0;
    for _ in 0..20 {
        let mut hr = h.clone();
        for i in 0..n {
            hr[(i, i)] += ridge;
        }
        if let Some(ch) = hr.cholesky() {
            return -ch.solve(g);
        }
        ridge = if ridge == 0.0 { 1e-12 * scale } else { ridge * 10.0 };
    }
    -g.clone()
}

/// Phase I: `min s` s.t. `F_k(y) − s ≤ 0`, stopped as soon as `s < 0`.
/// Returns a strictly feasible `y` or `None`.
fn phase_one(gp: &GpProblem, y0: &[f64], cfg: &SolveConfig, steps: &mut usize) -> Option<Vec<f64>> {
    let n = gp.var_count();
    let worst = gp.constraints().iter().map(|c| c.log_value(y0)).fold(f64::NEG_INFINITY, f64::max);
    if worst < 0.0 {
        return Some(y0.to_vec());
    }
    let mut s_exp = vec![0.0; n + 1];
    s_exp[n] = 1.0;
    let objective = Posynomial::new(vec![Monomial::new(1.0, s_exp).ok()?]).ok()?;
    let constraints: Vec<Posynomial> = gp
        .constraints()
        .iter()
        .map(|c| {
            let terms = c
                .terms()
                .iter()
                .map(|t| {
                    let mut e = t.exponents().to_vec();
                    e.push(-1.0);
                    Monomial::new(t.coeff(), e).expect("valid term")
                })
                .collect();
            Posynomial::new(terms).expect("nonempty")
        })
        .collect();
    // Phase I is unbounded as y → −∞ whenever every constraint shrinks
    // there; a wide box around the start keeps the iterates finite.
    let mut constraints = constraints;
    for j in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n + 1];
            e[j] = sign;
            let coeff = (-sign * y0[j] - PHASE_ONE_BOX).exp();
            constraints.push(Posynomial::new(vec![Monomial::new(coeff, e).ok()?]).ok()?);
        }
    }
    let prog = LogProgram { objective: &objective, constraints: &constraints };
    let mut z = y0.to_vec();
    z.push(worst + 1.0);
    let m = constraints.len() as f64;
    let mut mu = cfg.barrier_mu_init;
    for _ in 0..cfg.max_iter {
        let c = prog.center(z, mu, cfg.max_iter, |z| z[n] < 0.0);
        *steps += c.steps;
        z = c.y;
        if c.stopped_early || z[n] < 0.0 {
            z.truncate(n);
            return Some(z);
        }
        if m * mu <= 0.5 * cfg.kkt_tol {
            return None;
        }
        mu *= cfg.barrier_shrink;
    }
    None
}

/// Solves `gp` from `x = 1`.
pub fn solve_primal(gp: &GpProblem, cfg: &SolveConfig) -> Result<PrimalSolution> {
    solve_primal_from(gp, cfg, &vec![1.0; gp.var_count()])
}

/// Solves `gp` from the positive start `x0`, running phase I first when `x0`
/// violates a constraint.
pub fn solve_primal_from(gp: &GpProblem, cfg: &SolveConfig, x0: &[f64]) -> Result<PrimalSolution> {
    cfg.validate()?;
    if x0.len() != gp.var_count() || x0.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("start point must be positive with one entry per variable".into()));
    }
    let y0: Vec<f64> = x0.iter().map(|v| v.ln()).collect();
    let mut steps = 0;
    let Some(mut y) = phase_one(gp, &y0, cfg, &mut steps) else {
        let x: Vec<f64> = y0.iter().map(|v| v.exp()).collect();
        return Ok(PrimalSolution {
            objective: gp.objective().eval(&x)?,
            x,
            kkt_residual: f64::INFINITY,
            iterations: steps,
            status: SolveStatus::Infeasible,
            path: Vec::new(),
            trace: Vec::new(),
        });
    };

    let prog = LogProgram { objective: gp.objective(), constraints: gp.constraints() };
    let m = gp.constraints().len() as f64;
    let mut mu = if m == 0.0 { 0.0 } else { cfg.barrier_mu_init };
    let mut path = Vec::new();
    let mut trace = vec![gp.objective().log_value(&y).exp()];
    let mut kkt = f64::INFINITY;
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let c = prog.center(y, mu, cfg.max_iter, |yi| {
            trace.push(gp.objective().log_value(yi).exp());
            false
        });
        steps += c.steps;
        y = c.y;
        path.push(gp.objective().log_value(&y).exp());
        kkt = m * mu + 0.5 * c.decrement;
        if m * mu <= 0.5 * cfg.kkt_tol {
            converged = kkt <= cfg.kkt_tol;
            break;
        }
        mu *= cfg.barrier_shrink;
    }
    let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    let feasible = gp.max_constraint(&x)?.is_none_or(|v| v <= 1.0 + FEAS_TOL);
    Ok(PrimalSolution {
        objective: gp.objective().eval(&x)?,
        x,
        kkt_residual: kkt,
        iterations: steps,
        status: if converged && feasible { SolveStatus::Optimal } else { SolveStatus::MaxIter },
        path,
        trace,
    })
}

/// Maximizes `log V(δ)` over `δ ≥ 0` and the normality/orthogonality
/// equalities.
pub fn solve_dual(dp: &DualProblem, cfg: &SolveConfig) -> Result<DualSolution> {
    cfg.validate()?;
    let degree = dp.effective_degree_of_difficulty();
    if degree < 0 {
        return Err(Error::NegativeDegreeOfDifficulty { degree });
    }
    let (a_full, b_full) = dp.equality_system();
    let (a, b) = reduce_rows(&a_full, &b_full)?;
    let terms = dp.term_count();

    let objective_terms = dp.group_of_term.iter().filter(|&&g| g == 0).count() as f64;
    let mut delta = DVector::from_element(terms, 1.0 / objective_terms);
    let mut nu = DVector::zeros(a.nrows());
    let mut history = Vec::new();
    let mut steps = 0;
    let mut mu = cfg.barrier_mu_init;
    let mut converged = false;
    let record = |delta: &DVector<f64>, history: &mut Vec<f64>| {
        let (rn, ro) = dp.residuals(delta.as_slice());
        if rn <= 1e-9 && ro <= 1e-9 {
            history.push(dp.dual_objective_unchecked(delta.as_slice()));
        }
    };
    for _ in 0..cfg.max_iter {
        for _ in 0..cfg.max_iter {
            let (g, h) = dual_grad_hess(dp, &delta, mu);
            let r_dual = &g + a.transpose() * &nu;
            let r_pri = &a * &delta - &b;
            let norm = r_dual.norm_squared().sqrt().hypot(r_pri.norm());
            if r_pri.amax() <= 1e-12 && r_dual.amax() <= 1e-10 {
                break;
            }
            let Some((d_delta, d_nu)) = kkt_step(&h, &a, &r_dual, &r_pri) else {
                break;
            };
            // Fraction-to-boundary keeps δ strictly positive.
            let mut t: f64 = 1.0;
            for (d, dd) in delta.iter().zip(d_delta.iter()) {
                if *dd < 0.0 {
                    t = t.min(-0.99 * d / dd);
                }
            }
            let mut accepted = false;
            while t >= MIN_STEP {
                let trial_d = &delta + t * &d_delta;
                let trial_n = &nu + t * &d_nu;
                let (tg, _) = dual_grad_hess(dp, &trial_d, mu);
                let tr_dual = &tg + a.transpose() * &trial_n;
                let tr_pri = &a * &trial_d - &b;
                let trial_norm = tr_dual.norm().hypot(tr_pri.norm());
                if trial_norm <= (1.0 - 0.01 * t) * norm {
                    delta = trial_d;
                    nu = trial_n;
                    accepted = true;
                    break;
                }
                t *= BACKTRACK;
            }
            steps += 1;
            if !accepted {
                break;
            }
            record(&delta, &mut history);
        }
        if terms as f64 * mu <= 0.5 * cfg.kkt_tol {
            let (rn, ro) = dp.residuals(delta.as_slice());
            converged = rn <= 1e-9 && ro <= 1e-9;
            break;
        }
        mu *= cfg.barrier_shrink;
    }
    let (residual_normality, residual_orthogonality) = dp.residuals(delta.as_slice());
    let delta: Vec<f64> = delta.iter().copied().collect();
    Ok(DualSolution {
        dual_objective: dp.dual_objective_unchecked(&delta),
        delta,
        residual_normality,
        residual_orthogonality,
        iterations: steps,
        converged,
        history,
    })
}

/// Gradient and Hessian of `−log V(δ) − μ Σ ln δ_i`.
fn dual_grad_hess(dp: &DualProblem, delta: &DVector<f64>, mu: f64) -> (DVector<f64>, DMatrix<f64>) {
    let terms = dp.term_count();
    let lambdas = dp.group_sums(delta.as_slice());
    let mut g = DVector::zeros(terms);
    let mut h = DMatrix::zeros(terms, terms);
    for i in 0..terms {
        let d = delta[i];
        let k = dp.group_of_term[i];
        g[i] = d.ln() + 1.0 - dp.term_coeffs[i].ln() - mu / d;
        if k > 0 {
            g[i] -= lambdas[k].ln() + 1.0;
        }
        h[(i, i)] = 1.0 / d + mu / (d * d);
    }
    for i in 0..terms {
        let k = dp.group_of_term[i];
        if k == 0 {
            continue;
        }
        for j in 0..terms {
            if dp.group_of_term[j] == k {
                h[(i, j)] -= 1.0 / lambdas[k];
            }
        }
    }
    (g, h)
}

/// Solves the equality-constrained Newton system
/// `[H Aᵀ; A 0] [Δδ; Δν] = −[r_dual; r_pri]`.
fn kkt_step(
    h: &DMatrix<f64>,
    a: &DMatrix<f64>,
    r_dual: &DVector<f64>,
    r_pri: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = h.nrows();
    let m = a.nrows();
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(h);
    k.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    k.view_mut((n, 0), (m, n)).copy_from(a);
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-r_dual));
    rhs.rows_mut(n, m).copy_from(&(-r_pri));
    let sol = k.full_piv_lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((sol.rows(0, n).into_owned(), sol.rows(n, m).into_owned()))
}

/// Replaces `A δ = b` by an equivalent full-row-rank system.
fn reduce_rows(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12 * a.nrows().max(a.ncols()) as f64;
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    let r = keep.len();
    let mut a_r = DMatrix::zeros(r, a.ncols());
    let mut b_r = DVector::zeros(r);
    let mut projected = DVector::zeros(b.len());
    for (row, &i) in keep.iter().enumerate() {
        let ui = u.column(i);
        let coef = ui.dot(b);
        b_r[row] = coef;
        projected.axpy(coef, &ui, 1.0);
        for j in 0..a.ncols() {
            a_r[(row, j)] = svd.singular_values[i] * v_t[(i, j)];
        }
    }
    if (projected - b).amax() > 1e-9 {
        return Err(Error::DualInfeasible("normality and orthogonality conditions are inconsistent".into()));
    }
    Ok((a_r, b_r))
}

/// Relative duality gap `|f_0 − V| / max(1, f_0)`.
pub fn certify(primal: &PrimalSolution, dual: &DualSolution) -> f64 {
    (primal.objective - dual.dual_objective.exp()).abs() / primal.objective.max(1.0)
}

/// Dual solve followed by primal recovery.
pub fn solve_via_dual(gp: &GpProblem, cfg: &SolveConfig) -> Result<(DualSolution, Vec<f64>)> {
    let dual = solve_dual(&build_dual(gp), cfg)?;
    let x = recover_primal(gp, &dual, cfg.drop_threshold)?;
    Ok((dual, x))
}
