//! Univariate laws: moments, free cumulants and the conversions between them.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::TruncLaurent;

#[derive(Debug, Clone, PartialEq)]
enum Source {
    /// κ_1..κ_L, all later cumulants zero.
    Cumulants(Vec<Scalar>),
    /// m_0..m_L, nothing known beyond.
    Moments(Vec<Scalar>),
    Semicircle(Scalar),
    BernoulliPm1,
    FreePoisson(Scalar),
    PointMass(Scalar),
}

/// A law given by its free cumulants or its moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Law {
    source: Source,
}

impl Law {
    /// A law with the given cumulants `κ_1, κ_2, ...` and zero cumulants beyond the list.
    pub fn from_cumulants(kappa: Vec<Scalar>) -> Law {
        Law {
            source: Source::Cumulants(kappa),
        }
    }

    /// A law known through the moments `m_0..m_L`.
    pub fn from_moments(moments: Vec<Scalar>) -> Result<Law> {
        match moments.first() {
            Some(m0) if m0.is_one() => Ok(Law {
                source: Source::Moments(moments),
            }),
            Some(m0) => Err(Error::NotAState(m0.to_string())),
            None => Err(Error::NotAState("missing".into())),
        }
    }

    pub fn semicircle(variance: Scalar) -> Law {
        Law {
            source: Source::Semicircle(variance),
        }
    }

    /// The law of a variable taking the values ±1 with equal weight.
    pub fn bernoulli_pm1() -> Law {
        Law {
            source: Source::BernoulliPm1,
        }
    }

    /// Free Poisson law of rate λ: every free cumulant equals λ.
    pub fn free_poisson(lambda: Scalar) -> Law {
        Law {
            source: Source::FreePoisson(lambda),
        }
    }

    pub fn point_mass(c: Scalar) -> Law {
        Law {
            source: Source::PointMass(c),
        }
    }

    /// Looks up a named preset. Parameters: `variance` for `semicircle`,
    /// `lambda` for `free_poisson`, `c` for `point_mass`.
    pub fn preset(name: &str, params: &BTreeMap<String, Scalar>) -> Result<Law> {
        let param = |key: &str, default: i64| {
            params.get(key).cloned().unwrap_or_else(|| Scalar::from(default))
        };
        match name {
            "semicircle" => Ok(Law::semicircle(param("variance", 1))),
            "bernoulli_pm1" => Ok(Law::bernoulli_pm1()),
            "free_poisson" => Ok(Law::free_poisson(param("lambda", 1))),
            "point_mass" => Ok(Law::point_mass(param("c", 0))),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn tag(&self) -> Option<&'static str> {
        match self.source {
            Source::Semicircle(_) => Some("semicircle"),
            Source::BernoulliPm1 => Some("bernoulli_pm1"),
            Source::FreePoisson(_) => Some("free_poisson"),
            Source::PointMass(_) => Some("point_mass"),
            _ => None,
        }
    }

    /// Index of the last nonzero cumulant when the cumulant sequence is finitely
    /// supported, `None` otherwise (or when it is unknown beyond some order).
    pub fn cumulant_support(&self) -> Option<usize> {
        match &self.source {
            Source::Cumulants(k) => Some(k.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1)),
            Source::Semicircle(v) => Some(if v.is_zero() { 0 } else { 2 }),
            Source::PointMass(c) => Some(if c.is_zero() { 0 } else { 1 }),
            Source::FreePoisson(l) if l.is_zero() => Some(0),
            _ => None,
        }
    }

    /// Highest order for which moments and cumulants are available, `None` if unbounded.
    pub fn known_order(&self) -> Option<usize> {
        match &self.source {
            Source::Moments(m) => Some(m.len() - 1),
            _ => None,
        }
    }

    /// The cumulants `κ_1..κ_order`.
    pub fn cumulants(&self, order: usize) -> Result<Vec<Scalar>> {
        let zeros = || vec![Scalar::zero(); order];
        Ok(match &self.source {
            Source::Cumulants(k) => {
                let mut out = zeros();
                for (o, c) in out.iter_mut().zip(k) {
                    *o = c.clone();
                }
                out
            }
            Source::Moments(m) => {
                if m.len() <= order {
                    return Err(Error::InsufficientOrder(format!(
                        "cumulant of order {order} needs moments through m_{order}, only m_{} given",
                        m.len() - 1
                    )));
                }
                moments_to_cumulants(&m[..=order], order)?
            }
            Source::Semicircle(v) => {
                let mut out = zeros();
                if order >= 2 {
                    out[1] = v.clone();
                }
                out
            }
            Source::BernoulliPm1 => {
                // κ_{2k} = (-1)^{k-1} Catalan(k-1), odd cumulants vanish
                let mut cat = vec![Scalar::one()];
                let mut out = zeros();
                for n in 1..=order {
                    if n % 2 == 1 {
                        continue;
                    }
                    let k = n / 2;
                    while cat.len() < k {
                        let j = cat.len();
                        let next: Scalar = (0..j).map(|i| &cat[i] * &cat[j - 1 - i]).sum();
                        cat.push(next);
                    }
                    let c = cat[k - 1].clone();
                    out[n - 1] = if k % 2 == 1 { c } else { -c };
                }
                out
            }
            Source::FreePoisson(l) => vec![l.clone(); order],
            Source::PointMass(c) => {
                let mut out = zeros();
                if order >= 1 {
                    out[0] = c.clone();
                }
                out
            }
        })
    }

    /// The moments `m_0..m_order`.
    pub fn moments(&self, order: usize) -> Result<Vec<Scalar>> {
        match &self.source {
            Source::Moments(m) => {
                if m.len() <= order {
                    return Err(Error::InsufficientOrder(format!(
                        "moment m_{order} requested, only m_{} given",
                        m.len() - 1
                    )));
                }
                Ok(m[..=order].to_vec())
            }
            Source::BernoulliPm1 => Ok((0..=order)
                .map(|n| if n % 2 == 0 { Scalar::one() } else { Scalar::zero() })
                .collect()),
            Source::PointMass(c) => Ok((0..=order).map(|n| c.pow(n as u32)).collect()),
            _ => Ok(cumulants_to_moments(&self.cumulants(order)?, order)),
        }
    }

    /// `Σ_{n<T} m_n z^{-n-1}` with precision floor `-T`.
    pub fn stieltjes(&self, t: usize) -> Result<TruncLaurent> {
        if t == 0 {
            return Ok(TruncLaurent::zero_to(0));
        }
        let m = self.moments(t - 1)?;
        Ok(moments_to_stieltjes(&m))
    }
}

/// The series `Σ m_n z^{-n-1}` for the given moments, with floor `-(len)`.
pub fn moments_to_stieltjes(m: &[Scalar]) -> TruncLaurent {
    let t = m.len() as i64;
    TruncLaurent::from_terms(
        m.iter().enumerate().map(|(n, c)| (-(n as i64) - 1, c.clone())),
        Some(-t),
    )
}

/// Moments `m_0..m_order` of the law whose free cumulants are `kappa`
/// (entries beyond the slice are taken as zero).
pub fn cumulants_to_moments(kappa: &[Scalar], order: usize) -> Vec<Scalar> {
    let m = order as i64;
    // R(z) = z + Σ κ_n z^{1-n}, known through z^{1-M}
    let terms = std::iter::once((1, Scalar::one())).chain(
        kappa
            .iter()
            .take(order)
            .enumerate()
            .map(|(i, k)| (-(i as i64), k.clone())),
    );
    let r = TruncLaurent::from_terms(terms, Some(1 - m));
    let rinv = r
        .comp_inverse(1 - m)
        .expect("z + O(1) always has a compositional inverse");
    let s = rinv.inv(-m - 1).expect("series of valuation 1 is invertible");
    (0..=order).map(|n| s.coeff(-(n as i64) - 1)).collect()
}

/// Free cumulants `κ_1..κ_order` of the law with moments `m_0..m_order`.
pub fn moments_to_cumulants(moments: &[Scalar], order: usize) -> Result<Vec<Scalar>> {
    match moments.first() {
        Some(m0) if m0.is_one() => {}
        Some(m0) => return Err(Error::NotAState(m0.to_string())),
        None => return Err(Error::NotAState("missing".into())),
    }
    if moments.len() <= order {
        return Err(Error::InsufficientOrder(format!(
            "{} moments cannot determine {order} cumulants",
            moments.len()
        )));
    }
    let m = order as i64;
    let s = moments_to_stieltjes(&moments[..=order]);
    let recip = s.inv(1 - m)?;
    let r = recip.comp_inverse(1 - m)?;
    Ok((1..=order).map(|n| r.coeff(1 - n as i64)).collect())
}

/// Moments `m_0..m_order` read off as `(H^k)(0,0)` for the truncated
/// Hessenberg-Toeplitz matrix `H` with ones on the subdiagonal and `κ_{j+1}`
/// on the `j`-th superdiagonal.
pub fn ht_oracle_moments(kappa: &[Scalar], order: usize) -> Vec<Scalar> {
    let n = order + 1;
    let kap = |j: usize| kappa.get(j).cloned().unwrap_or_else(Scalar::zero);
    // h[i][j] for row i, column j
    let h: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j + 1 == i {
                        Scalar::one()
                    } else if j >= i {
                        kap(j - i)
                    } else {
                        Scalar::zero()
                    }
                })
                .collect()
        })
        .collect();
    // row vector e_0^T H^k
    let mut row = vec![Scalar::zero(); n];
    row[0] = Scalar::one();
    let mut out = vec![Scalar::one()];
    for _ in 1..=order {
        let next: Vec<Scalar> = (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&i| !row[i].is_zero() && !h[i][j].is_zero())
                    .map(|i| &row[i] * &h[i][j])
                    .sum()
            })
            .collect();
        row = next;
        out.push(row[0].clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Scalar::from(x)).collect()
    }

    #[test]
    fn point_mass_moments() {
        let c = Scalar::new(3, 2);
        let m = cumulants_to_moments(&[c.clone()], 6);
        for (n, mn) in m.iter().enumerate() {
            assert_eq!(*mn, c.pow(n as u32));
        }
    }

    #[test]
    fn semicircle_catalan() {
        let want = ints(&[1, 0, 1, 0, 2, 0, 5, 0, 14]);
        assert_eq!(cumulants_to_moments(&ints(&[0, 1]), 8), want);
        assert_eq!(ht_oracle_moments(&ints(&[0, 1]), 8), want);
        assert_eq!(cumulants_to_moments(&[], 5), ints(&[1, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn bernoulli_cumulants() {
        let m = ints(&[1, 0, 1, 0, 1, 0, 1, 0, 1]);
        let k = moments_to_cumulants(&m, 8).unwrap();
        assert_eq!(k, ints(&[0, 1, 0, -1, 0, 2, 0, -5]));
        assert_eq!(Law::bernoulli_pm1().cumulants(8).unwrap(), k);
        assert_eq!(ht_oracle_moments(&k, 8), m);
    }

    #[test]
    fn moments_to_cumulants_errors() {
        assert!(matches!(
            moments_to_cumulants(&ints(&[2, 0, 1]), 2),
            Err(Error::NotAState(_))
        ));
        assert_eq!(moments_to_cumulants(&ints(&[1, 0, 0, 0]), 3).unwrap(), ints(&[0, 0, 0]));
    }

    #[test]
    fn presets() {
        let mut params = BTreeMap::new();
        assert_eq!(
            Law::preset("semicircle", &params).unwrap().cumulants(4).unwrap(),
            ints(&[0, 1, 0, 0])
        );
        assert_eq!(
            Law::preset("free_poisson", &params).unwrap().moments(4).unwrap(),
            ints(&[1, 1, 2, 5, 14])
        );
        params.insert("c".to_string(), Scalar::from(2));
        assert_eq!(
            Law::preset("point_mass", &params).unwrap().moments(3).unwrap(),
            ints(&[1, 2, 4, 8])
        );
        assert!(matches!(Law::preset("cauchy", &params), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn stieltjes_examples() {
        let s = Law::point_mass(Scalar::zero()).stieltjes(6).unwrap();
        assert_eq!(s, TruncLaurent::from_terms([(-1, Scalar::one())], Some(-6)));
        let s = Law::point_mass(Scalar::one()).stieltjes(6).unwrap();
        for e in -6..=-1 {
            assert_eq!(s.coeff(e), Scalar::one());
        }
        let s = Law::semicircle(Scalar::one()).stieltjes(8).unwrap();
        assert_eq!(s.coeff(-5), Scalar::from(2));
        assert_eq!(s.coeff(-7), Scalar::from(5));
    }

    #[test]
    fn truncated_moment_law() {
        let law = Law::from_moments(ints(&[1, 0, 1, 0])).unwrap();
        assert_eq!(law.cumulants(3).unwrap(), ints(&[0, 1, 0]));
        assert!(matches!(law.cumulants(4), Err(Error::InsufficientOrder(_))));
        assert!(matches!(Law::from_moments(ints(&[0, 1])), Err(Error::NotAState(_))));
    }
}
