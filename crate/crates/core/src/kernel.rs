//! Coefficient functions `M_i^{(n)}` and `N_{j,i}^{(n)}`.
//!
//! Both are evaluated term by term by direct product accumulation. The
//! argument tuple is `(λ₀, λ₁, …, λ_n)`; the `∏_{l}` factors run over all `L`
//! inhomogeneities of the model.

use crate::error::{Error, Result};
use crate::model::{ModelParams, C64};

fn check_b(params: &ModelParams, x: C64, what: impl FnOnce() -> String) -> Result<C64> {
    let b = params.b(x);
    let tol = params.separation();
    if !(b.norm() >= tol) || b.norm() == 0.0 {
        return Err(Error::Separation { what: what(), value: b.norm(), tol });
    }
    Ok(b)
}

fn check_a(params: &ModelParams, x: C64, what: impl FnOnce() -> String) -> Result<C64> {
    let a = params.a(x);
    let tol = params.separation();
    if !(a.norm() >= tol) || a.norm() == 0.0 {
        return Err(Error::PoleProximity { what: what(), value: a.norm(), tol });
    }
    Ok(a)
}

fn check_arity(params: &ModelParams, n: usize, args: &[C64]) -> Result<()> {
    if n == 0 || n > params.len() {
        return Err(Error::Precondition(format!("kernel order n = {n} outside 1..={}", params.len())));
    }
    if args.len() != n + 1 {
        return Err(Error::Precondition(format!(
            "kernel of order {n} needs {} arguments, got {}",
            n + 1,
            args.len()
        )));
    }
    Ok(())
}

/// `a(x)/b(x)` with the denominator guarded.
fn ratio(params: &ModelParams, x: C64, p: usize, q: usize) -> Result<C64> {
    let b = check_b(params, x, || format!("lambda[{p}] - lambda[{q}]"))?;
    Ok(params.a(x) / b)
}

fn mu_product(params: &ModelParams, a_arg: C64, b_arg: C64) -> C64 {
    params
        .mu()
        .iter()
        .map(|&m| params.a(a_arg - m) * params.b(b_arg - m))
        .product()
}

/// `M_i^{(n)}(λ₀, …, λ_n)` for `1 ≤ i ≤ n ≤ L`.
pub fn coeff_m(params: &ModelParams, n: usize, i: usize, args: &[C64]) -> Result<C64> {
    check_arity(params, n, args)?;
    if i == 0 || i > n {
        return Err(Error::Precondition(format!("M index i = {i} outside 1..={n}")));
    }
    let c = params.c();
    let (l0, li) = (args[0], args[i]);

    let mut t1 = c / check_b(params, li - l0, || format!("lambda[{i}] - lambda[0]"))?;
    let mut t2 = c / check_b(params, l0 - li, || format!("lambda[0] - lambda[{i}]"))?;
    for k in (1..=n).filter(|&k| k != i) {
        let lk = args[k];
        t1 *= ratio(params, li - lk, i, k)? * ratio(params, lk - l0, k, 0)?;
        t2 *= ratio(params, l0 - lk, 0, k)? * ratio(params, lk - li, k, i)?;
    }
    t1 *= mu_product(params, l0, li);
    t2 *= mu_product(params, li, l0);
    Ok(t1 + t2)
}

/// `N_{j,i}^{(n)}(λ₀, …, λ_n)` for `1 ≤ i < j ≤ n ≤ L`.
pub fn coeff_n(params: &ModelParams, n: usize, j: usize, i: usize, args: &[C64]) -> Result<C64> {
    check_arity(params, n, args)?;
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::Precondition(format!("N indices (j, i) = ({j}, {i}) need 1 <= i < j <= {n}")));
    }
    let c = params.c();
    let (l0, li, lj) = (args[0], args[i], args[j]);

    let mut t1 = c / check_a(params, lj - l0, || format!("a(lambda[{j}] - lambda[0])"))?
        * c
        / check_a(params, l0 - li, || format!("a(lambda[0] - lambda[{i}])"))?
        * ratio(params, lj - li, j, i)?;
    let mut t2 = c / check_a(params, li - l0, || format!("a(lambda[{i}] - lambda[0])"))?
        * c
        / check_a(params, l0 - lj, || format!("a(lambda[0] - lambda[{j}])"))?
        * ratio(params, li - lj, i, j)?;
    for k in (0..=n).filter(|&k| k != i && k != j) {
        let lk = args[k];
        t1 *= ratio(params, lj - lk, j, k)? * ratio(params, lk - li, k, i)?;
        t2 *= ratio(params, li - lk, i, k)? * ratio(params, lk - lj, k, j)?;
    }
    t1 *= mu_product(params, li, lj);
    t2 *= mu_product(params, lj, li);
    Ok(t1 + t2)
}

/// Pole-free closed form of `M₁^{(1)}(λ₀, λ₁)` valid for `L = 2`:
/// `−(c²/2)[cosh(λ₀−λ₁+γ) + cosh(λ₁−λ₀+γ) − Σ_j cosh(λ₀+λ₁+γ−2μ_j)]`.
pub fn m1_closed_form_l2(params: &ModelParams, l0: C64, l1: C64) -> Result<C64> {
    if params.len() != 2 {
        return Err(Error::Precondition(format!(
            "closed form of M_1^(1) holds for L = 2 only, got L = {}",
            params.len()
        )));
    }
    let g = params.gamma();
    let c = params.c();
    let sum: C64 = params.mu().iter().map(|&m| (l0 + l1 + g - 2.0 * m).cosh()).sum();
    Ok(-(c * c / 2.0) * ((l0 - l1 + g).cosh() + (l1 - l0 + g).cosh() - sum))
}
