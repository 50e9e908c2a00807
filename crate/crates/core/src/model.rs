//! Model parameters, spectral points and the vertex weights `a`, `b`, `c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::IndexSubset;

pub type C64 = Complex64;

/// Default lower bound on `|sinh(x − y)|` between distinct parameters.
pub const DEFAULT_SEPARATION: f64 = 1e-3;

/// Fixed data of the model: anisotropy `γ` and inhomogeneities `μ₀..μ_{L−1}`.
///
/// The lattice length is `mu.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    gamma: C64,
    mu: Vec<C64>,
    separation: f64,
}

impl ModelParams {
    /// Strict construction with the default separation tolerance.
    pub fn new(gamma: C64, mu: Vec<C64>) -> Result<Self> {
        Self::with_separation(gamma, mu, DEFAULT_SEPARATION)
    }

    /// Construction with an explicit separation tolerance. A tolerance of
    /// `0.0` disables the guard on `μ` and `λ`; kernels still refuse exact
    /// zero denominators.
    pub fn with_separation(gamma: C64, mu: Vec<C64>, separation: f64) -> Result<Self> {
        let p = Self::allow_coincident_mu_with(gamma, mu, separation)?;
        check_separation(&p.mu, separation, "mu")?;
        Ok(p)
    }

    /// Default tolerance for spectral points, no guard on `μ`. Coinciding
    /// inhomogeneities are harmless for the transfer matrix and kernels.
    pub fn allow_coincident_mu(gamma: C64, mu: Vec<C64>) -> Result<Self> {
        Self::allow_coincident_mu_with(gamma, mu, DEFAULT_SEPARATION)
    }

    fn allow_coincident_mu_with(gamma: C64, mu: Vec<C64>, separation: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidParams("lattice length must be at least 1".into()));
        }
        if !(separation >= 0.0) {
            return Err(Error::InvalidParams("separation tolerance must be >= 0".into()));
        }
        if !gamma.is_finite() || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(ModelParams { gamma, mu, separation })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    pub fn mu(&self) -> &[C64] {
        &self.mu
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Same `γ` and tolerance with inhomogeneity `j` removed.
    pub fn without_mu(&self, j: usize) -> Result<Self> {
        if j >= self.mu.len() {
            return Err(Error::IndexOutOfRange { what: "mu", index: j });
        }
        let mu = self
            .mu
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &m)| m)
            .collect();
        Self::allow_coincident_mu_with(self.gamma, mu, self.separation)
    }

    pub fn a(&self, lambda: C64) -> C64 {
        weight_a(lambda, self)
    }

    pub fn b(&self, lambda: C64) -> C64 {
        weight_b(lambda)
    }

    pub fn c(&self) -> C64 {
        weight_c(self)
    }
}

/// `a(λ) = sinh(λ + γ)`
pub fn weight_a(lambda: C64, params: &ModelParams) -> C64 {
    (lambda + params.gamma).sinh()
}

/// `b(λ) = sinh(λ)`
pub fn weight_b(lambda: C64) -> C64 {
    lambda.sinh()
}

/// `c = sinh(γ)`, constant in the spectral parameter.
pub fn weight_c(params: &ModelParams) -> C64 {
    params.gamma.sinh()
}

/// The `L` spectral parameters `λ₀..λ_{L−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoints {
    lambda: Vec<C64>,
}

impl SpectralPoints {
    /// Validates length against `params` and pairwise separation with the
    /// tolerance carried by `params`.
    pub fn new(lambda: Vec<C64>, params: &ModelParams) -> Result<Self> {
        if lambda.len() != params.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} spectral points, got {}",
                params.len(),
                lambda.len()
            )));
        }
        if lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("spectral points"));
        }
        check_separation(&lambda, params.separation, "lambda")?;
        Ok(SpectralPoints { lambda })
    }

    pub fn values(&self) -> &[C64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Points with index `i` removed, for the `L − 1` lattice.
    pub fn without(&self, i: usize) -> Result<Self> {
        if i >= self.lambda.len() {
            return Err(Error::IndexOutOfRange { what: "lambda", index: i });
        }
        let lambda = self
            .lambda
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &l)| l)
            .collect();
        Ok(SpectralPoints { lambda })
    }

    pub(crate) fn from_raw(lambda: Vec<C64>) -> Self {
        SpectralPoints { lambda }
    }
}

/// Checks `|sinh(x_i − x_j)| ≥ tol` for all `i ≠ j`; a zero tolerance
/// disables the check.
pub fn check_separation(values: &[C64], tol: f64, what: &str) -> Result<()> {
    if tol == 0.0 {
        return Ok(());
    }
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let v = (values[i] - values[j]).sinh().norm();
            if !(v >= tol) {
                return Err(Error::Separation {
                    what: format!("{what}[{i}] - {what}[{j}]"),
                    value: v,
                    tol,
                });
            }
        }
    }
    Ok(())
}

/// `(λ_{s₀}, λ_{s₁}, …)` for the ground-set indices `s₀ < s₁ < …` not removed.
pub fn ordered_complement(subset: &IndexSubset, points: &SpectralPoints) -> Result<Vec<C64>> {
    let l = points.len();
    if subset.removed().iter().any(|&r| r >= l) {
        let index = *subset.removed().iter().max().unwrap();
        return Err(Error::IndexOutOfRange { what: "subset", index });
    }
    Ok(subset
        .complement(l)
        .into_iter()
        .map(|s| points.lambda[s])
        .collect())
}
