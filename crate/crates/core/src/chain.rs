//! The sequence `F₀, F₁, …, F_L` generated by the functional equations
//! `F_{n+1}(λ₀..λ_n) = Λ(λ₀) F_n(λ₁..λ_n) − Σ_i M_i^{(n)} F_{n−1}(λ₁..λ_n ∖ λ_i)
//!                     − Σ_{i<j} N_{j,i}^{(n)} F_{n−1}(λ₀..λ_n ∖ {λ_i, λ_j})`
//! for one eigenvalue branch, starting from `F₀ = f0`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kernel::{coeff_m, coeff_n};
use crate::model::{ModelParams, SpectralPoints, C64};
use crate::oracle;
use crate::transfer::SpectrumTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub branch: usize,
    pub f0: C64,
}

impl ChainConfig {
    pub fn new(branch: usize) -> Self {
        ChainConfig { branch, f0: C64::new(1.0, 0.0) }
    }

    pub fn with_f0(mut self, f0: C64) -> Self {
        self.f0 = f0;
        self
    }
}

type Key = Vec<(u64, u64)>;

fn key(args: &[C64]) -> Key {
    args.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

/// Evaluation context with its own memo table.
///
/// By default values are cached per *ordered* tuple, so every ordering of
/// the arguments is computed through its own recursion. Canonical mode sorts
/// tuples on `(re, im)` before lookup and shares values across orderings,
/// which is valid once symmetry has been established.
pub struct FunctionalChain<'a> {
    params: &'a ModelParams,
    spectrum: &'a SpectrumTable,
    config: ChainConfig,
    canonical: bool,
    memo: HashMap<Key, C64>,
    eigen: HashMap<(u64, u64), C64>,
}

impl<'a> FunctionalChain<'a> {
    pub fn new(params: &'a ModelParams, spectrum: &'a SpectrumTable, config: ChainConfig) -> Result<Self> {
        if config.f0 == C64::new(0.0, 0.0) || !config.f0.is_finite() {
            return Err(Error::Precondition("F_0 normalization must be finite and nonzero".into()));
        }
        if config.branch >= spectrum.branch_count() {
            return Err(Error::BranchOutOfRange { branch: config.branch, count: spectrum.branch_count() });
        }
        Ok(FunctionalChain {
            params,
            spectrum,
            config,
            canonical: false,
            memo: HashMap::new(),
            eigen: HashMap::new(),
        })
    }

    pub fn canonical(mut self, on: bool) -> Self {
        self.canonical = on;
        self
    }

    pub fn config(&self) -> ChainConfig {
        self.config
    }

    fn eigenvalue(&mut self, x: C64) -> Result<C64> {
        let k = (x.re.to_bits(), x.im.to_bits());
        if let Some(&v) = self.eigen.get(&k) {
            return Ok(v);
        }
        let (v, _) = self.spectrum.eigenvalue_at(self.config.branch, x)?;
        self.eigen.insert(k, v);
        Ok(v)
    }

    /// `F_n(args)` with `n = args.len() ≤ L`; the first element plays `λ₀`.
    pub fn eval(&mut self, args: &[C64]) -> Result<C64> {
        let n = args.len();
        if n > self.params.len() {
            return Err(Error::Precondition(format!("F_{n} requested but L = {}", self.params.len())));
        }
        if n == 0 {
            return Ok(self.config.f0);
        }
        let k = if self.canonical {
            let mut sorted = args.to_vec();
            sorted.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            key(&sorted)
        } else {
            key(args)
        };
        if let Some(&v) = self.memo.get(&k) {
            return Ok(v);
        }

        let order = n - 1;
        let mut value = self.eigenvalue(args[0])? * self.eval(&args[1..])?;
        if order >= 1 {
            let without = |skip: &[usize]| -> Vec<C64> {
                args.iter().enumerate().filter(|(p, _)| !skip.contains(p)).map(|(_, &z)| z).collect()
            };
            for i in 1..=order {
                let m = coeff_m(self.params, order, i, args)?;
                value -= m * self.eval(&without(&[0, i]))?;
            }
            for i in 1..=order {
                for j in i + 1..=order {
                    let nn = coeff_n(self.params, order, j, i, args)?;
                    value -= nn * self.eval(&without(&[i, j]))?;
                }
            }
        }
        self.memo.insert(k, value);
        Ok(value)
    }
}

/// Largest relative change of `F_n` under adjacent transpositions of its
/// arguments; zero for `n ≤ 1`.
pub fn symmetry_residual(params: &ModelParams, spectrum: &SpectrumTable, config: ChainConfig, args: &[C64]) -> Result<f64> {
    if args.len() <= 1 {
        return Ok(0.0);
    }
    let mut chain = FunctionalChain::new(params, spectrum, config)?;
    let base = chain.eval(args)?;
    let mut worst = 0.0f64;
    for p in 0..args.len() - 1 {
        let mut swapped = args.to_vec();
        swapped.swap(p, p + 1);
        let v = chain.eval(&swapped)?;
        worst = worst.max((v - base).norm() / base.norm());
    }
    Ok(worst)
}

/// `F_L(points) / Z(points)` with `Z` from [`oracle::z_contract`]. For a
/// consistent branch this equals `f0 / κ₀`.
pub fn fl_vs_z(params: &ModelParams, spectrum: &SpectrumTable, config: ChainConfig, points: &SpectralPoints) -> Result<C64> {
    let z = oracle::z_contract(params, points)?.value;
    if !(z.norm() > 0.0) {
        return Err(Error::Precondition("partition function vanishes at the sampled point".into()));
    }
    let mut chain = FunctionalChain::new(params, spectrum, config)?.canonical(true);
    Ok(chain.eval(points.values())? / z)
}

/// Maximum deviation of the ratios from their mean, relative to the mean.
pub fn ratio_spread(ratios: &[C64]) -> f64 {
    if ratios.is_empty() {
        return 0.0;
    }
    let mean: C64 = ratios.iter().sum::<C64>() / ratios.len() as f64;
    ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::diagonalize_default;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params(l: usize) -> ModelParams {
        let mu = (0..l).map(|k| c(0.27 * k as f64 - 0.3, 0.05 * k as f64)).collect();
        ModelParams::new(c(0.66, 0.21), mu).unwrap()
    }

    #[test]
    fn first_orders() {
        let p = params(3);
        let t = diagonalize_default(&p).unwrap();
        let (l0, l1) = (c(0.2, 0.1), c(-0.45, 0.3));
        for k in 0..t.branch_count() {
            let mut chain = FunctionalChain::new(&p, &t, ChainConfig::new(k)).unwrap();
            let (e0, _) = t.eigenvalue_at(k, l0).unwrap();
            let (e1, _) = t.eigenvalue_at(k, l1).unwrap();
            assert!((chain.eval(&[l0]).unwrap() - e0).norm() < 1e-12 * e0.norm());
            let m = coeff_m(&p, 1, 1, &[l0, l1]).unwrap();
            let f2 = e0 * e1 - m;
            assert!((chain.eval(&[l0, l1]).unwrap() - f2).norm() < 1e-12 * f2.norm());
        }
    }

    #[test]
    fn rejects_zero_normalization() {
        let p = params(2);
        let t = diagonalize_default(&p).unwrap();
        assert!(FunctionalChain::new(&p, &t, ChainConfig::new(0).with_f0(c(0.0, 0.0))).is_err());
        assert!(FunctionalChain::new(&p, &t, ChainConfig::new(4)).is_err());
        let mut chain = FunctionalChain::new(&p, &t, ChainConfig::new(0)).unwrap();
        assert!(chain.eval(&[c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0)]).is_err());
    }

    #[test]
    fn single_argument_has_no_transpositions() {
        let p = params(2);
        let t = diagonalize_default(&p).unwrap();
        assert_eq!(symmetry_residual(&p, &t, ChainConfig::new(0), &[c(0.3, 0.1)]).unwrap(), 0.0);
    }
}
