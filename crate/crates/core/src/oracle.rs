//! Independent evaluators of the domain-wall partition function `Z`.
//!
//! Vertex at row `i`, column `j` carries spectral argument `λ_i − μ_j`.
//! With `α` the horizontal arrow entering from the left and `β` the vertical
//! arrow entering from above: `α = β` gives `a`, `α ≠ β` with the horizontal
//! arrow passing straight through gives `b`, and a turning arrow gives `c`.
//! Every row starts with a down arrow on the left and ends with an up arrow on
//! the right; the vertical edges start all up and end all down.

use serde::Serialize;

use crate::determinant;
use crate::error::{Error, Result};
use crate::kernel;
use crate::model::{ModelParams, SpectralPoints, C64};
use crate::wide;
use crate::transfer::{apply_row_operator, SpectrumTable};

pub const MAX_ENUMERATE_L: usize = 6;
pub const MAX_CONTRACT_L: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OracleMethod {
    Enumeration,
    Contraction,
    Izergin,
    ClosedFormL2,
    ClosedFormL3Hom,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CostInfo {
    /// Admissible ice configurations visited (enumeration only).
    pub configurations: u64,
    /// Complex multiply-adds, roughly.
    pub flops: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: C64,
    pub method: OracleMethod,
    pub cost: CostInfo,
}

impl OracleResult {
    fn new(value: C64, method: OracleMethod, cost: CostInfo) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite("partition function"));
        }
        Ok(OracleResult { value, method, cost })
    }
}

fn check_points(params: &ModelParams, points: &SpectralPoints) -> Result<()> {
    if points.len() != params.len() {
        return Err(Error::InvalidParams(format!(
            "expected {} spectral points, got {}",
            params.len(),
            points.len()
        )));
    }
    Ok(())
}

/// Sum over all domain-wall ice configurations.
pub fn z_enumerate(params: &ModelParams, points: &SpectralPoints) -> Result<OracleResult> {
    enumerate(params, points, false)
}

/// Enumeration with the sign of every `b` weight in the first row flipped.
/// Negative control for the self-test.
pub(crate) fn z_enumerate_corrupted(params: &ModelParams, points: &SpectralPoints) -> Result<OracleResult> {
    enumerate(params, points, true)
}

struct Enumerator<'a> {
    l: usize,
    a: Vec<Vec<C64>>,
    b: Vec<Vec<C64>>,
    c: C64,
    masks_by_weight: Vec<Vec<usize>>,
    flip_first_row_b: bool,
    cost: &'a mut CostInfo,
}

impl Enumerator<'_> {
    /// Weight of row `i` taking vertical state `top` to `bottom`, or `None`
    /// when no horizontal completion obeys the ice rule.
    fn row_weight(&mut self, i: usize, top: usize, bottom: usize) -> Option<C64> {
        let mut h = 1u8;
        let mut w = C64::new(1.0, 0.0);
        for j in 0..self.l {
            let s_in = ((top >> j) & 1) as u8;
            let s_out = ((bottom >> j) & 1) as u8;
            let total = h + s_in;
            if total < s_out || total - s_out > 1 {
                return None;
            }
            let h_out = total - s_out;
            let vertex = if h == s_in {
                self.a[i][j]
            } else if h_out == h {
                if i == 0 && self.flip_first_row_b {
                    -self.b[i][j]
                } else {
                    self.b[i][j]
                }
            } else {
                self.c
            };
            w *= vertex;
            h = h_out;
        }
        self.cost.flops += self.l as u64;
        (h == 0).then_some(w)
    }

    fn rows_from(&mut self, i: usize, top: usize) -> C64 {
        if i == self.l {
            self.cost.configurations += 1;
            return C64::new(1.0, 0.0);
        }
        let mut total = C64::new(0.0, 0.0);
        for k in 0..self.masks_by_weight[i + 1].len() {
            let bottom = self.masks_by_weight[i + 1][k];
            if let Some(w) = self.row_weight(i, top, bottom) {
                total += w * self.rows_from(i + 1, bottom);
            }
        }
        total
    }
}

fn enumerate(params: &ModelParams, points: &SpectralPoints, flip: bool) -> Result<OracleResult> {
    check_points(params, points)?;
    let l = params.len();
    if l > MAX_ENUMERATE_L {
        return Err(Error::SizeGuard { what: "configuration enumeration", l, max: MAX_ENUMERATE_L });
    }
    let lam = points.values();
    let mu = params.mu();
    let table = |f: &dyn Fn(C64) -> C64| -> Vec<Vec<C64>> {
        lam.iter().map(|&x| mu.iter().map(|&m| f(x - m)).collect()).collect()
    };
    let mut masks_by_weight = vec![Vec::new(); l + 1];
    for m in 0..1usize << l {
        masks_by_weight[m.count_ones() as usize].push(m);
    }
    let mut cost = CostInfo::default();
    let mut e = Enumerator {
        l,
        a: table(&|x| params.a(x)),
        b: table(&|x| params.b(x)),
        c: params.c(),
        masks_by_weight,
        flip_first_row_b: flip,
        cost: &mut cost,
    };
    let value = e.rows_from(0, 0);
    OracleResult::new(value, OracleMethod::Enumeration, cost)
}

/// `⟨⇓| B(λ_{L−1}) ⋯ B(λ₀) |⇑⟩` with the row operators of [`crate::transfer`].
pub fn z_contract(params: &ModelParams, points: &SpectralPoints) -> Result<OracleResult> {
    check_points(params, points)?;
    let l = params.len();
    if l > MAX_CONTRACT_L {
        return Err(Error::SizeGuard { what: "row-operator contraction", l, max: MAX_CONTRACT_L });
    }
    let dim = 1usize << l;
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[0] = C64::new(1.0, 0.0);
    for &x in points.values() {
        v = apply_row_operator(params, x, &v);
    }
    let cost = CostInfo { configurations: 0, flops: (4 * l * l * dim) as u64 };
    OracleResult::new(v[dim - 1], OracleMethod::Contraction, cost)
}

/// Izergin-Korepin determinant
/// `∏_{i,j} a(λ_i−μ_j) b(λ_i−μ_j) / ∏_{i<j} b(λ_i−λ_j) b(μ_j−μ_i) · det[c / (a(λ_i−μ_j) b(λ_i−μ_j))]`,
/// evaluated in extended precision.
pub fn z_izergin(params: &ModelParams, points: &SpectralPoints) -> Result<OracleResult> {
    check_points(params, points)?;
    let l = params.len();
    let (lam, mu) = (points.values(), params.mu());
    let tol = params.separation();
    for i in 0..l {
        for j in 0..l {
            let x = lam[i] - mu[j];
            let (a, b) = (params.a(x), params.b(x));
            if !(b.norm() >= tol) || b.norm() == 0.0 {
                return Err(Error::PoleProximity { what: format!("b(lambda[{i}] - mu[{j}])"), value: b.norm(), tol });
            }
            if !(a.norm() >= tol) || a.norm() == 0.0 {
                return Err(Error::PoleProximity { what: format!("a(lambda[{i}] - mu[{j}])"), value: a.norm(), tol });
            }
        }
    }
    let value = wide::izergin(params.gamma(), lam, mu)?;
    let cost = CostInfo { configurations: 0, flops: (l * l * l + 2 * l * l) as u64 };
    OracleResult::new(value, OracleMethod::Izergin, cost)
}

/// `Z(μ₀, …, μ_{L−1}) = c^L ∏_{i<j} a(μ_i−μ_j) a(μ_j−μ_i)`: a single
/// configuration survives at the diagonal point.
pub fn diagonal_value(params: &ModelParams) -> C64 {
    let mu = params.mu();
    let mut v = params.c().powu(params.len() as u32);
    for i in 0..mu.len() {
        for j in i + 1..mu.len() {
            v *= params.a(mu[i] - mu[j]) * params.a(mu[j] - mu[i]);
        }
    }
    v
}

/// Prefactor of the Korepin recurrence, pinned against the oracles:
/// `c ∏_{k≠j} b(λ_i − μ_k) ∏_{l≠i} b(λ_l − μ_j)`.
pub fn korepin_factor(params: &ModelParams, points: &SpectralPoints, i: usize, j: usize) -> C64 {
    let (lam, mu) = (points.values(), params.mu());
    let across: C64 = (0..mu.len()).filter(|&k| k != j).map(|k| params.b(lam[i] - mu[k])).product();
    let down: C64 = (0..lam.len()).filter(|&l| l != i).map(|l| params.b(lam[l] - mu[j])).product();
    params.c() * across * down
}

/// The prefactor exactly as it is usually printed,
/// `−c ∏_{l,m=1}^{L} b(λ_l − μ_i) b(λ_m − μ_j)`, kept for comparison only.
pub fn korepin_factor_printed(params: &ModelParams, points: &SpectralPoints, i: usize, j: usize) -> C64 {
    let (lam, mu) = (points.values(), params.mu());
    let mut v = -params.c();
    for &ll in lam {
        for &lm in lam {
            v *= params.b(ll - mu[i]) * params.b(lm - mu[j]);
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KorepinCheck {
    pub residual: f64,
    pub z_full: C64,
    pub z_reduced: C64,
    pub factor: C64,
    pub printed_factor: C64,
    /// `printed_factor / factor`; 1 would mean the printed form works.
    pub printed_ratio: C64,
}

/// Checks `Z_L|_{λ_i = μ_j − γ} = factor · Z_{L−1}(λ without i; μ without j)`
/// using [`z_contract`] on both sides.
pub fn korepin_residual(params: &ModelParams, points: &SpectralPoints, i: usize, j: usize) -> Result<KorepinCheck> {
    check_points(params, points)?;
    let l = params.len();
    if i >= l || j >= l {
        return Err(Error::IndexOutOfRange { what: "korepin indices", index: i.max(j) });
    }
    let target = params.mu()[j] - params.gamma();
    let lam_i = points.values()[i];
    if (lam_i - target).norm() > 1e-12 * (1.0 + target.norm()) {
        return Err(Error::Precondition(format!(
            "korepin recurrence needs lambda[{i}] = mu[{j}] - gamma"
        )));
    }
    let reduced_params = params.without_mu(j)?;
    let reduced_points = points.without(i)?;
    let z_full = z_contract(params, points)?.value;
    let z_reduced = z_contract(&reduced_params, &reduced_points)?.value;
    let factor = korepin_factor(params, points, i, j);
    let printed_factor = korepin_factor_printed(params, points, i, j);
    let residual = (z_full - factor * z_reduced).norm() / z_full.norm();
    Ok(KorepinCheck {
        residual,
        z_full,
        z_reduced,
        factor,
        printed_factor,
        printed_ratio: printed_factor / factor,
    })
}

/// Homogeneous `L = 2` value `κ₀ [Λ(λ)² − M₁^{(1)}(λ, λ)]` using the pole-free
/// closed form of the kernel.
pub fn homogeneous_z2(params: &ModelParams, lambda: C64, spectrum: &SpectrumTable, branch: usize) -> Result<C64> {
    if params.len() != 2 {
        return Err(Error::Precondition(format!(
            "homogeneous formula holds for L = 2 only, got L = {}",
            params.len()
        )));
    }
    let (eig, _) = spectrum.eigenvalue_at(branch, lambda)?;
    let kappa = determinant::kappa0(params, spectrum, branch)?;
    let m = kernel::m1_closed_form_l2(params, lambda, lambda)?;
    Ok(kappa * (eig * eig - m))
}

/// Points that skip the separation guard, for deliberate specializations.
pub fn points_unchecked(params: &ModelParams, lambda: Vec<C64>) -> Result<SpectralPoints> {
    if lambda.len() != params.len() {
        return Err(Error::InvalidParams("spectral point count mismatch".into()));
    }
    Ok(SpectralPoints::from_raw(lambda))
}
