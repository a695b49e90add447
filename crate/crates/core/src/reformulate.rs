//! From uncertain random coefficients to a posynomial program.
//!
//! The chain is: criterion transform (uncertain random → normal coefficients),
//! row-wise chance constraints made deterministic as
//! `mean(x) + Φ⁻¹(1−ε)·√variance(x) ≤ 1`, and finally a lift that bounds each
//! variance posynomial by an auxiliary variable so the square roots become
//! monomials `Φ⁻¹(1−ε)·t^{1/2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{GpProblem, Monomial, Posynomial};
use crate::urv::{self, Criterion, LinearNormalUrv, NormalRv};

/// One term of a program with random coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term<C> {
    pub coeff: C,
    pub exponents: Vec<f64>,
}

/// A posynomial-shaped program whose coefficients are of type `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomProgram<C> {
    pub objective: Vec<Term<C>>,
    pub constraints: Vec<Vec<Term<C>>>,
    pub var_names: Vec<String>,
}

/// Geometric program with linear-normal uncertain random coefficients.
pub type UrgpProblem = RandomProgram<LinearNormalUrv>;
/// Geometric program with independent normal coefficients.
pub type StochasticGp = RandomProgram<NormalRv>;

impl<C> RandomProgram<C> {
    pub fn new(objective: Vec<Term<C>>, constraints: Vec<Vec<Term<C>>>, var_names: Vec<String>) -> Result<Self> {
        let n = var_names.len();
        if n == 0 {
            return Err(Error::InvalidParameter("problem needs at least one variable".into()));
        }
        if objective.is_empty() {
            return Err(Error::InvalidParameter("objective needs at least one term".into()));
        }
        if let Some(k) = constraints.iter().position(Vec::is_empty) {
            return Err(Error::InvalidParameter(format!("constraint {} has no terms", k + 1)));
        }
        let rows = std::iter::once(&objective).chain(&constraints);
        if rows.flatten().any(|t| t.exponents.len() != n) {
            return Err(Error::DimensionMismatch(format!("every exponent vector must have length {n}")));
        }
        Ok(Self { objective, constraints, var_names })
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    /// Objective row followed by constraint rows.
    pub fn rows(&self) -> impl Iterator<Item = &[Term<C>]> {
        std::iter::once(self.objective.as_slice()).chain(self.constraints.iter().map(Vec::as_slice))
    }

    fn map_coeffs<D>(&self, f: impl Fn(&C) -> D) -> RandomProgram<D> {
        let map_row = |row: &Vec<Term<C>>| {
            row.iter().map(|t| Term { coeff: f(&t.coeff), exponents: t.exponents.clone() }).collect()
        };
        RandomProgram {
            objective: map_row(&self.objective),
            constraints: self.constraints.iter().map(map_row).collect(),
            var_names: self.var_names.clone(),
        }
    }
}

/// Replaces every coefficient with its criterion transform.
pub fn to_stochastic(p: &UrgpProblem, c: Criterion) -> StochasticGp {
    p.map_coeffs(|xi| urv::transform(xi, c))
}

/// Validated chance tolerance `ε ∈ (0, 0.5]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps <= 0.5 {
            Ok(Self(eps))
        } else {
            Err(Error::Domain(format!("epsilon must lie in (0, 0.5], got {eps}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `Φ⁻¹(1 − ε)`, which is `≥ 0` on the admissible range.
    pub fn quantile(self) -> f64 {
        if self.0 == 0.5 {
            0.0
        } else {
            crate::special::quantile_unchecked(1.0 - self.0)
        }
    }
}

/// Deterministic form of one chance-constrained row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChanceRow {
    /// Term means as coefficients.
    pub mean: Posynomial,
    /// Term variances as coefficients, exponents doubled.
    pub variance: Posynomial,
}

impl ChanceRow {
    /// `mean(x) + q·√variance(x)`.
    pub fn lhs(&self, x: &[f64], quantile: f64) -> Result<f64> {
        Ok(self.mean.eval(x)? + quantile * self.variance.eval(x)?.sqrt())
    }
}

/// `min mean_0 + q√var_0` s.t. `mean_k + q√var_k ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicProgram {
    pub objective: ChanceRow,
    pub constraints: Vec<ChanceRow>,
    pub quantile: f64,
    pub epsilon: f64,
    pub var_names: Vec<String>,
}

impl DeterministicProgram {
    pub fn rows(&self) -> impl Iterator<Item = &ChanceRow> {
        std::iter::once(&self.objective).chain(&self.constraints)
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    /// Deterministic objective value at the original variables.
    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        self.objective.lhs(x, self.quantile)
    }
}

fn chance_row(row: &[Term<NormalRv>]) -> Result<ChanceRow> {
    let mut mean = Vec::with_capacity(row.len());
    let mut variance = Vec::with_capacity(row.len());
    for t in row {
        if t.coeff.mu() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "transformed coefficient mean {} is not positive; the deterministic program is not a posynomial",
                t.coeff.mu()
            )));
        }
        mean.push(Monomial::new(t.coeff.mu(), t.exponents.clone())?);
        let doubled = t.exponents.iter().map(|a| 2.0 * a).collect();
        variance.push(Monomial::new(t.coeff.variance(), doubled)?);
    }
    Ok(ChanceRow { mean: Posynomial::new(mean)?, variance: Posynomial::new(variance)? })
}

/// Applies the row-wise deterministic equivalent of
/// `Pr(Σ ξ_l U_l ≤ 1) ≥ 1 − ε` for independent normal `ξ_l`.
pub fn to_deterministic(s: &StochasticGp, epsilon: f64) -> Result<DeterministicProgram> {
    let eps = Epsilon::new(epsilon)?;
    Ok(DeterministicProgram {
        objective: chance_row(&s.objective)?,
        constraints: s.constraints.iter().map(|r| chance_row(r)).collect::<Result<_>>()?,
        quantile: eps.quantile(),
        epsilon,
        var_names: s.var_names.clone(),
    })
}

/// Which deterministic row an auxiliary variable bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "row", content = "index")]
pub enum RowRef {
    Objective,
    /// Zero-based index into the original constraints.
    Constraint(usize),
}

/// An auxiliary variable `t ≥ variance(x)` introduced by the lift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxVar {
    pub name: String,
    pub var_index: usize,
    pub row: RowRef,
    /// Index of the `variance·t⁻¹ ≤ 1` constraint in the lifted problem.
    pub constraint_index: usize,
}

/// Posynomial program equivalent to a [`DeterministicProgram`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftedGp {
    pub gp: GpProblem,
    pub aux: Vec<AuxVar>,
    pub original_var_count: usize,
}

impl LiftedGp {
    /// Original variables followed by auxiliaries set to `2·variance(x)`.
    pub fn initial_point(&self, det: &DeterministicProgram, x: &[f64]) -> Result<Vec<f64>> {
        let mut point = x.to_vec();
        for (aux, row) in self.aux.iter().zip(det.rows()) {
            debug_assert_eq!(aux.var_index, point.len());
            point.push(2.0 * row.variance.eval(x)?);
        }
        Ok(point)
    }

    pub fn original<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.original_var_count]
    }

    /// Value of each auxiliary constraint `variance·t⁻¹` at `x`.
    pub fn aux_constraint_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.aux.iter().map(|a| self.gp.constraints()[a.constraint_index].eval(x)).collect()
    }
}

/// Introduces one auxiliary `t` per square root: the row's root term becomes
/// `q·t^{1/2}` and `variance·t⁻¹ ≤ 1` is appended. Auxiliaries are named
/// `t0` (objective) and `t1..tK` (constraints) and come after the original
/// variables; the auxiliary constraints follow the original ones.
///
/// With `q = 0` the root terms vanish and the mean-only program is returned
/// without auxiliaries.
pub fn lift(d: &DeterministicProgram) -> Result<LiftedGp> {
    let n = d.var_count();
    if d.quantile == 0.0 {
        let gp = GpProblem::new(
            d.objective.mean.clone(),
            d.constraints.iter().map(|r| r.mean.clone()).collect(),
            d.var_names.clone(),
        )?;
        return Ok(LiftedGp { gp, aux: Vec::new(), original_var_count: n });
    }
    if !(d.quantile > 0.0) {
        return Err(Error::Domain(format!("quantile must be nonnegative, got {}", d.quantile)));
    }
    let rows: Vec<&ChanceRow> = d.rows().collect();
    let total = n + rows.len();
    let mut names = d.var_names.clone();
    names.extend((0..rows.len()).map(|k| format!("t{k}")));

    let mut lifted_rows = Vec::with_capacity(rows.len());
    let mut aux_constraints = Vec::with_capacity(rows.len());
    let mut aux = Vec::with_capacity(rows.len());
    let k_orig = d.constraints.len();
    for (k, row) in rows.iter().enumerate() {
        let t_index = n + k;
        let mut terms: Vec<Monomial> = row.mean.padded(total).terms().to_vec();
        let mut root = vec![0.0; total];
        root[t_index] = 0.5;
        terms.push(Monomial::new(d.quantile, root)?);
        lifted_rows.push(Posynomial::new(terms)?);

        let bound = row
            .variance
            .terms()
            .iter()
            .map(|t| {
                let mut e = t.exponents().to_vec();
                e.resize(total, 0.0);
                e[t_index] = -1.0;
                Monomial::new(t.coeff(), e)
            })
            .collect::<Result<Vec<_>>>()?;
        aux_constraints.push(Posynomial::new(bound)?);
        aux.push(AuxVar {
            name: names[t_index].clone(),
            var_index: t_index,
            row: if k == 0 { RowRef::Objective } else { RowRef::Constraint(k - 1) },
            constraint_index: k_orig + k,
        });
    }
    let mut lifted_rows = lifted_rows.into_iter();
    let objective = lifted_rows.next().expect("objective row");
    let constraints = lifted_rows.chain(aux_constraints).collect();
    Ok(LiftedGp { gp: GpProblem::new(objective, constraints, names)?, aux, original_var_count: n })
}
