//! Extended-precision complex arithmetic for the Izergin-Korepin oracle.
//!
//! The Cauchy-like matrix becomes badly conditioned when spectral points or
//! inhomogeneities cluster; at 53 bits a relative perturbation of the entries
//! at the unit roundoff already moves the determinant by ~1e-9 inside the
//! default sampling box. Entries, products and elimination are carried out at
//! [`PRECISION`] bits and rounded once at the end.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::error::{Error, Result};
use crate::model::C64;

pub const PRECISION: usize = 192;
const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone)]
struct Wide {
    re: BigFloat,
    im: BigFloat,
}

impl Wide {
    fn from_c64(z: C64) -> Self {
        Wide { re: BigFloat::from_f64(z.re, PRECISION), im: BigFloat::from_f64(z.im, PRECISION) }
    }

    fn one() -> Self {
        Wide::from_c64(C64::new(1.0, 0.0))
    }

    fn add(&self, o: &Wide) -> Wide {
        Wide { re: self.re.add(&o.re, PRECISION, RM), im: self.im.add(&o.im, PRECISION, RM) }
    }

    fn sub(&self, o: &Wide) -> Wide {
        Wide { re: self.re.sub(&o.re, PRECISION, RM), im: self.im.sub(&o.im, PRECISION, RM) }
    }

    fn mul(&self, o: &Wide) -> Wide {
        let p = PRECISION;
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        Wide { re, im }
    }

    fn div(&self, o: &Wide) -> Wide {
        let p = PRECISION;
        let den = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        let re = self.re.mul(&o.re, p, RM).add(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.im.mul(&o.re, p, RM).sub(&self.re.mul(&o.im, p, RM), p, RM);
        Wide { re: re.div(&den, p, RM), im: im.div(&den, p, RM) }
    }

    fn sinh(&self, cc: &mut Consts) -> Wide {
        let p = PRECISION;
        let re = self.re.sinh(p, RM, cc).mul(&self.im.cos(p, RM, cc), p, RM);
        let im = self.re.cosh(p, RM, cc).mul(&self.im.sin(p, RM, cc), p, RM);
        Wide { re, im }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// The larger of `|re|`, `|im|`.
    fn dominant(&self) -> BigFloat {
        let (re, im) = (self.re.abs(), self.im.abs());
        if re.cmp(&im).is_some_and(|s| s >= 0) {
            re
        } else {
            im
        }
    }

    fn to_c64(&self) -> C64 {
        C64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

// Display prints enough decimal digits for the parser's correct rounding.
fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().unwrap_or(f64::NAN)
}

fn determinant(mut m: Vec<Vec<Wide>>) -> Wide {
    let n = m.len();
    let mut det = Wide::one();
    for k in 0..n {
        let pivot = (k..n)
            .reduce(|best, r| {
                if m[r][k].dominant().cmp(&m[best][k].dominant()).is_some_and(|s| s > 0) {
                    r
                } else {
                    best
                }
            })
            .unwrap();
        if m[pivot][k].is_zero() {
            return Wide::from_c64(C64::new(0.0, 0.0));
        }
        if pivot != k {
            m.swap(pivot, k);
            det = Wide::from_c64(C64::new(0.0, 0.0)).sub(&det);
        }
        det = det.mul(&m[k][k]);
        for r in k + 1..n {
            let f = m[r][k].div(&m[k][k]);
            for col in k + 1..n {
                let t = f.mul(&m[k][col]);
                m[r][col] = m[r][col].sub(&t);
            }
        }
    }
    det
}

/// Determinant of a double-precision matrix with elimination at [`PRECISION`] bits.
pub fn determinant_of(m: &crate::linalg::CMatrix) -> C64 {
    let rows = m.row_iter().map(|r| r.iter().map(|&z| Wide::from_c64(z)).collect()).collect();
    determinant(rows).to_c64()
}

/// `∏ a b / ∏_{i<j} b(λ_i−λ_j) b(μ_j−μ_i) · det[c / (a b)]` with every
/// argument difference formed exactly from the double inputs.
pub fn izergin(gamma: C64, lam: &[C64], mu: &[C64]) -> Result<C64> {
    let mut cc = Consts::new().map_err(|_| Error::NonFinite("extended-precision constants"))?;
    let g = Wide::from_c64(gamma);
    let c = g.sinh(&mut cc);
    let lam: Vec<Wide> = lam.iter().map(|&x| Wide::from_c64(x)).collect();
    let mu: Vec<Wide> = mu.iter().map(|&x| Wide::from_c64(x)).collect();
    let l = lam.len();

    let mut prefactor = Wide::one();
    let mut rows = Vec::with_capacity(l);
    for li in &lam {
        let mut row = Vec::with_capacity(l);
        for mj in &mu {
            let x = li.sub(mj);
            let ab = x.add(&g).sinh(&mut cc).mul(&x.sinh(&mut cc));
            prefactor = prefactor.mul(&ab);
            row.push(c.div(&ab));
        }
        rows.push(row);
    }
    let mut denominator = Wide::one();
    for i in 0..l {
        for j in i + 1..l {
            let bl = lam[i].sub(&lam[j]).sinh(&mut cc);
            let bm = mu[j].sub(&mu[i]).sinh(&mut cc);
            denominator = denominator.mul(&bl).mul(&bm);
        }
    }
    Ok(prefactor.div(&denominator).mul(&determinant(rows)).to_c64())
}
