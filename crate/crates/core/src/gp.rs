//! Posynomial geometric programs, their log-space form, and the dual program.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `coeff · Π x_j^{exponents[j]}` with `coeff > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    coeff: f64,
    exponents: Vec<f64>,
}

impl Monomial {
    pub fn new(coeff: f64, exponents: Vec<f64>) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "monomial coefficient must be positive and finite, got {coeff}"
            )));
        }
        if exponents.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("monomial exponents must be finite".into()));
        }
        Ok(Self { coeff, exponents })
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn var_count(&self) -> usize {
        self.exponents.len()
    }

    /// `log coeff + a·y`.
    pub fn log_eval(&self, y: &[f64]) -> f64 {
        self.coeff.ln() + dot(&self.exponents, y)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents.iter().zip(x).fold(self.coeff, |acc, (&a, &xj)| if a == 0.0 { acc } else { acc * xj.powf(a) })
    }

    /// Same monomial over `n` variables, zero-padding new trailing exponents.
    pub fn padded(&self, n: usize) -> Self {
        let mut exponents = self.exponents.clone();
        exponents.resize(n, 0.0);
        Self { coeff: self.coeff, exponents }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Log-sum-exp value, gradient, and Hessian of a posynomial in `y = ln x`.
#[derive(Debug, Clone)]
pub struct LogEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Softmax weights of the terms.
    pub weights: Vec<f64>,
}

/// A nonempty sum of monomials over a common variable set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posynomial {
    terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidParameter("posynomial needs at least one term".into()));
        };
        let n = first.var_count();
        if terms.iter().any(|t| t.var_count() != n) {
            return Err(Error::DimensionMismatch("posynomial terms have differing variable counts".into()));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn var_count(&self) -> usize {
        self.terms[0].var_count()
    }

    /// Direct evaluation at a strictly positive point.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_positive(x, self.var_count())?;
        Ok(self.terms.iter().map(|t| t.eval(x)).sum())
    }

    /// `log Σ exp(log c_i + a_i·y)` with max-shift, plus its gradient.
    pub fn eval_log_space(&self, y: &[f64]) -> LogEval {
        let logs: Vec<f64> = self.terms.iter().map(|t| t.log_eval(y)).collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut weights: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= s;
        }
        let n = self.var_count();
        let mut gradient = vec![0.0; n];
        for (t, &w) in self.terms.iter().zip(&weights) {
            for (g, &a) in gradient.iter_mut().zip(&t.exponents) {
                *g += w * a;
            }
        }
        LogEval { value: m + s.ln(), gradient, weights }
    }

    /// Log-space value only.
    pub fn log_value(&self, y: &[f64]) -> f64 {
        let logs: Vec<f64> = self.terms.iter().map(|t| t.log_eval(y)).collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
    }

    /// Adds the log-space Hessian `Σ w_i a_i a_iᵀ − g gᵀ`, scaled by `scale`,
    /// into `h`.
    pub fn add_log_hessian(&self, ev: &LogEval, scale: f64, h: &mut DMatrix<f64>) {
        let n = self.var_count();
        for (t, &w) in self.terms.iter().zip(&ev.weights) {
            if w == 0.0 {
                continue;
            }
            let a = &t.exponents;
            for i in 0..n {
                if a[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    h[(i, j)] += scale * w * a[i] * a[j];
                }
            }
        }
        let g = &ev.gradient;
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= scale * g[i] * g[j];
            }
        }
    }

    pub fn padded(&self, n: usize) -> Self {
        Self { terms: self.terms.iter().map(|t| t.padded(n)).collect() }
    }
}

fn check_positive(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!("point has {} coordinates, expected {n}", x.len())));
    }
    if let Some(bad) = x.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("posynomial variables must be positive, got {bad}")));
    }
    Ok(())
}

/// `min f_0(x)` subject to `f_k(x) ≤ 1`, all `f` posynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpProblem {
    objective: Posynomial,
    constraints: Vec<Posynomial>,
    var_names: Vec<String>,
}

impl GpProblem {
    pub fn new(objective: Posynomial, constraints: Vec<Posynomial>, var_names: Vec<String>) -> Result<Self> {
        let n = var_names.len();
        if n == 0 {
            return Err(Error::InvalidParameter("problem needs at least one variable".into()));
        }
        if objective.var_count() != n || constraints.iter().any(|c| c.var_count() != n) {
            return Err(Error::DimensionMismatch(format!("every exponent vector must have length {n}")));
        }
        Ok(Self { objective, constraints, var_names })
    }

    /// Problem with variables named `x1..xn`.
    pub fn with_default_names(objective: Posynomial, constraints: Vec<Posynomial>) -> Result<Self> {
        let names = (1..=objective.var_count()).map(|j| format!("x{j}")).collect();
        Self::new(objective, constraints, names)
    }

    pub fn objective(&self) -> &Posynomial {
        &self.objective
    }

    pub fn constraints(&self) -> &[Posynomial] {
        &self.constraints
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn term_count(&self) -> usize {
        self.objective.len() + self.constraints.iter().map(Posynomial::len).sum::<usize>()
    }

    /// `N − n − 1`.
    pub fn degree_of_difficulty(&self) -> i64 {
        self.term_count() as i64 - self.var_count() as i64 - 1
    }

    /// Largest constraint value at `x`, or `None` when unconstrained.
    pub fn max_constraint(&self, x: &[f64]) -> Result<Option<f64>> {
        let mut worst: Option<f64> = None;
        for c in &self.constraints {
            let v = c.eval(x)?;
            worst = Some(worst.map_or(v, |w| w.max(v)));
        }
        Ok(worst)
    }
}

/// Free-function form of [`Posynomial::eval`].
pub fn eval_posynomial(p: &Posynomial, x: &[f64]) -> Result<f64> {
    p.eval(x)
}

/// Free-function form of [`Posynomial::eval_log_space`].
pub fn eval_log_space(p: &Posynomial, y: &[f64]) -> (f64, Vec<f64>) {
    let ev = p.eval_log_space(y);
    (ev.value, ev.gradient)
}

pub fn degree_of_difficulty(gp: &GpProblem) -> i64 {
    gp.degree_of_difficulty()
}

/// Dual program data. Terms are ordered objective first, then constraint
/// groups in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct DualProblem {
    pub term_coeffs: Vec<f64>,
    /// Rows are terms, columns are variables.
    pub exponent_matrix: DMatrix<f64>,
    /// Group index per term; 0 is the objective.
    pub group_of_term: Vec<usize>,
    pub group_count: usize,
}

/// Dual weights with their objective and feasibility residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualSolution {
    pub delta: Vec<f64>,
    /// `log V(δ)`.
    pub dual_objective: f64,
    pub residual_normality: f64,
    pub residual_orthogonality: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `log V` at every dual-feasible iterate, in visit order.
    pub history: Vec<f64>,
}

impl DualProblem {
    pub fn term_count(&self) -> usize {
        self.term_coeffs.len()
    }

    pub fn var_count(&self) -> usize {
        self.exponent_matrix.ncols()
    }

    pub fn degree_of_difficulty(&self) -> i64 {
        self.term_count() as i64 - self.var_count() as i64 - 1
    }

    /// Degree of difficulty counting only variables that appear in some term.
    /// A variable with an all-zero exponent column contributes a vacuous
    /// orthogonality condition.
    pub fn effective_degree_of_difficulty(&self) -> i64 {
        let used = (0..self.var_count()).filter(|&j| self.exponent_matrix.column(j).iter().any(|a| *a != 0.0)).count();
        self.term_count() as i64 - used as i64 - 1
    }

    /// Equality system `A δ = b`: the normality row followed by one
    /// orthogonality row per variable.
    pub fn equality_system(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.var_count();
        let terms = self.term_count();
        let mut a = DMatrix::zeros(n + 1, terms);
        for (i, &g) in self.group_of_term.iter().enumerate() {
            if g == 0 {
                a[(0, i)] = 1.0;
            }
            for j in 0..n {
                a[(j + 1, i)] = self.exponent_matrix[(i, j)];
            }
        }
        let mut b = DVector::zeros(n + 1);
        b[0] = 1.0;
        (a, b)
    }

    /// `λ_k = Σ_{i ∈ k} δ_i` for every group.
    pub fn group_sums(&self, delta: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.group_count];
        for (&g, &d) in self.group_of_term.iter().zip(delta) {
            sums[g] += d;
        }
        sums
    }

    /// Normality and orthogonality residuals (max-abs) at `delta`.
    pub fn residuals(&self, delta: &[f64]) -> (f64, f64) {
        let normality = (self.group_sums(delta)[0] - 1.0).abs();
        let d = DVector::from_column_slice(delta);
        let orth = self.exponent_matrix.transpose() * d;
        (normality, orth.amax())
    }

    /// `log V(δ) = Σ δ_i (log β_i − log δ_i) + Σ_{k≥1} λ_k log λ_k`, with
    /// `0·log 0 = 0`.
    pub fn dual_objective(&self, delta: &[f64]) -> Result<f64> {
        if delta.len() != self.term_count() {
            return Err(Error::DimensionMismatch(format!(
                "dual point has {} entries, expected {}",
                delta.len(),
                self.term_count()
            )));
        }
        if let Some(bad) = delta.iter().find(|d| !(**d >= 0.0)) {
            return Err(Error::Domain(format!("dual weights must be nonnegative, got {bad}")));
        }
        Ok(self.dual_objective_unchecked(delta))
    }

    pub(crate) fn dual_objective_unchecked(&self, delta: &[f64]) -> f64 {
        let mut v = 0.0;
        for (&d, &beta) in delta.iter().zip(&self.term_coeffs) {
            if d > 0.0 {
                v += d * (beta.ln() - d.ln());
            }
        }
        for &lambda in self.group_sums(delta).iter().skip(1) {
            if lambda > 0.0 {
                v += lambda * lambda.ln();
            }
        }
        v
    }
}

/// Builds the dual program of `gp`.
pub fn build_dual(gp: &GpProblem) -> DualProblem {
    let n = gp.var_count();
    let groups: Vec<&Posynomial> = std::iter::once(gp.objective()).chain(gp.constraints()).collect();
    let total = gp.term_count();
    let mut term_coeffs = Vec::with_capacity(total);
    let mut group_of_term = Vec::with_capacity(total);
    let mut exponent_matrix = DMatrix::zeros(total, n);
    let mut row = 0;
    for (k, p) in groups.iter().enumerate() {
        for t in p.terms() {
            term_coeffs.push(t.coeff());
            group_of_term.push(k);
            for (j, &a) in t.exponents().iter().enumerate() {
                exponent_matrix[(row, j)] = a;
            }
            row += 1;
        }
    }
    DualProblem { term_coeffs, exponent_matrix, group_of_term, group_count: groups.len() }
}

pub fn dual_objective(dp: &DualProblem, delta: &[f64]) -> Result<f64> {
    dp.dual_objective(delta)
}

/// Recovers `x` from dual weights through the primal-dual relations
///
/// `a_i · ln x = ln(δ_i f_0* / β_i)` for objective terms and
/// `a_i · ln x = ln(δ_i / (λ_k β_i))` for constraint terms,
///
/// solved in the least-squares sense over rows with `δ_i ≥ drop_threshold`.
/// `f_0*` is taken as `exp(dual_objective)`.
pub fn recover_primal(gp: &GpProblem, ds: &DualSolution, drop_threshold: f64) -> Result<Vec<f64>> {
    let dp = build_dual(gp);
    if ds.delta.len() != dp.term_count() {
        return Err(Error::DimensionMismatch("dual solution does not match problem".into()));
    }
    let lambdas = dp.group_sums(&ds.delta);
    let log_f0 = ds.dual_objective;
    let n = gp.var_count();
    let rows: Vec<usize> = (0..dp.term_count()).filter(|&i| ds.delta[i] >= drop_threshold).collect();
    let mut a = DMatrix::zeros(rows.len(), n);
    let mut rhs = DVector::zeros(rows.len());
    for (r, &i) in rows.iter().enumerate() {
        for j in 0..n {
            a[(r, j)] = dp.exponent_matrix[(i, j)];
        }
        let g = dp.group_of_term[i];
        let log_beta = dp.term_coeffs[i].ln();
        rhs[r] =
            if g == 0 { ds.delta[i].ln() + log_f0 - log_beta } else { ds.delta[i].ln() - lambdas[g].ln() - log_beta };
    }
    if rows.len() < n {
        return Err(Error::DegenerateRecovery { rank: rows.len(), vars: n, residual: f64::NAN });
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10 * (rows.len().max(n) as f64);
    let rank = svd.rank(tol);
    let y = svd.solve(&rhs, tol).map_err(|e| Error::Numerical(format!("least squares failed: {e}")))?;
    let residual = (&a * &y - &rhs).amax();
    if rank < n {
        return Err(Error::DegenerateRecovery { rank, vars: n, residual });
    }
    Ok(y.iter().map(|v| v.exp()).collect())
}
