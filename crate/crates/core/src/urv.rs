//! Normal random variables, linear uncertain variables, and the critical-value
//! transforms that collapse a linear-normal uncertain random variable into a
//! single normal random variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// A normal random variable `N(mu, sigma)`, parameterized by its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNormal")]
pub struct NormalRv {
    mu: f64,
    sigma: f64,
}

#[derive(Deserialize)]
struct RawNormal {
    mu: f64,
    sigma: f64,
}

impl TryFrom<RawNormal> for NormalRv {
    type Error = Error;
    fn try_from(raw: RawNormal) -> Result<Self> {
        NormalRv::new(raw.mu, raw.sigma)
    }
}

impl NormalRv {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("normal mean must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("normal sigma must be positive and finite, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn standard() -> Self {
        Self { mu: 0.0, sigma: 1.0 }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x, self)
    }

    /// Quantile at probability `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.mu + self.sigma * special::std_normal_quantile(p)?)
    }
}

/// `½[1 + erf((x − μ)/(σ√2))]`.
pub fn normal_cdf(x: f64, rv: &NormalRv) -> f64 {
    special::std_normal_cdf((x - rv.mu) / rv.sigma)
}

/// Standard normal quantile `Φ⁻¹(p) = √2·erf⁻¹(2p − 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    special::std_normal_quantile(p)
}

/// A linear uncertain variable `L(a, b)` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearUncertain {
    a: f64,
    b: f64,
}

impl LinearUncertain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!(
                "linear uncertain variable needs finite a < b, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Uncertainty distribution of `L(a, b)`: a linear ramp from `a` to `b`.
pub fn linear_cdf(x: f64, u: &LinearUncertain) -> f64 {
    if x <= u.a {
        0.0
    } else if x >= u.b {
        1.0
    } else {
        (x - u.a) / (u.b - u.a)
    }
}

/// Confidence level strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain(format!("alpha must lie strictly inside (0, 1), got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 − α`, which is again a valid level.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

/// Critical-value criterion used to collapse uncertainty into a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// α-optimistic value `sup{r : M{ξ ≥ r} ≥ α}`.
    Optimistic(Alpha),
    /// α-pessimistic value `inf{r : M{ξ ≤ r} ≥ α}`.
    Pessimistic(Alpha),
    /// Expected value.
    Expected,
}

/// Criterion family without its confidence level, as selected on a command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Optimistic,
    Pessimistic,
    Expected,
}

impl CriterionKind {
    /// Attach a level; `Expected` ignores it.
    pub fn with_alpha(self, alpha: f64) -> Result<Criterion> {
        Ok(match self {
            CriterionKind::Optimistic => Criterion::Optimistic(Alpha::new(alpha)?),
            CriterionKind::Pessimistic => Criterion::Pessimistic(Alpha::new(alpha)?),
            CriterionKind::Expected => Criterion::Expected,
        })
    }
}

impl std::str::FromStr for CriterionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optimistic" => Ok(Self::Optimistic),
            "pessimistic" => Ok(Self::Pessimistic),
            "expected" => Ok(Self::Expected),
            other => Err(Error::InvalidParameter(format!("unknown criterion `{other}`"))),
        }
    }
}

impl std::fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Optimistic => "optimistic",
            Self::Pessimistic => "pessimistic",
            Self::Expected => "expected",
        })
    }
}

impl Criterion {
    pub fn kind(&self) -> CriterionKind {
        match self {
            Criterion::Optimistic(_) => CriterionKind::Optimistic,
            Criterion::Pessimistic(_) => CriterionKind::Pessimistic,
            Criterion::Expected => CriterionKind::Expected,
        }
    }

    /// Weights `(w_a, w_b)` such that the critical value is `w_a·a + w_b·b`.
    pub fn endpoint_weights(&self) -> (f64, f64) {
        match *self {
            Criterion::Optimistic(alpha) => (alpha.0, 1.0 - alpha.0),
            Criterion::Pessimistic(alpha) => (1.0 - alpha.0, alpha.0),
            Criterion::Expected => (0.5, 0.5),
        }
    }

    /// Critical value of the affine endpoint pair `(a, b)`. Unlike
    /// [`critical_value`], `a < b` is not required.
    pub fn combine(&self, a: f64, b: f64) -> f64 {
        match self {
            Criterion::Expected => (a + b) / 2.0,
            _ => {
                let (wa, wb) = self.endpoint_weights();
                wa * a + wb * b
            }
        }
    }
}

/// Optimistic, pessimistic, or expected value of `L(a, b)`.
pub fn critical_value(u: &LinearUncertain, c: Criterion) -> f64 {
    c.combine(u.a, u.b)
}

/// Linear uncertain variable whose endpoints are independent normal random
/// variables, `LN(A, B)`. No ordering between `A` and `B` is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearNormalUrv {
    #[serde(rename = "A")]
    pub lower: NormalRv,
    #[serde(rename = "B")]
    pub upper: NormalRv,
}

impl LinearNormalUrv {
    pub fn new(lower: NormalRv, upper: NormalRv) -> Self {
        Self { lower, upper }
    }

    /// Convenience constructor from raw endpoint parameters.
    pub fn from_params(mu_a: f64, sigma_a: f64, mu_b: f64, sigma_b: f64) -> Result<Self> {
        Ok(Self::new(NormalRv::new(mu_a, sigma_a)?, NormalRv::new(mu_b, sigma_b)?))
    }
}

/// Distribution of the critical value `w_a·A + w_b·B` for independent normal
/// endpoints.
pub fn transform(xi: &LinearNormalUrv, c: Criterion) -> NormalRv {
    let (a, b) = (&xi.lower, &xi.upper);
    let (mu, sigma) = match c {
        Criterion::Expected => ((a.mu + b.mu) / 2.0, (a.variance() + b.variance()).sqrt() / 2.0),
        _ => {
            let (wa, wb) = c.endpoint_weights();
            let sa = wa * a.sigma;
            let sb = wb * b.sigma;
            (wa * a.mu + wb * b.mu, (sa * sa + sb * sb).sqrt())
        }
    };
    // Both weights are positive on (0,1), so sigma stays strictly positive.
    NormalRv { mu, sigma }
}

/// CDF of the transformed random variable at `x`.
pub fn transformed_cdf(xi: &LinearNormalUrv, c: Criterion, x: f64) -> f64 {
    normal_cdf(x, &transform(xi, c))
}
