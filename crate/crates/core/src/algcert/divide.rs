use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse polynomial over ℚ in `nvars` commuting variables, keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], c)])
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Self::from_terms(nvars, [(e, Scalar::one())])
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Scalar)>) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            out.add_term(e, &c);
        }
        out
    }

    fn add_term(&mut self, e: Vec<u32>, c: &Scalar) {
        let slot = self.terms.entry(e.clone()).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Scalar)> + '_ {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Degree in variable `k`; zero for the zero polynomial.
    pub fn deg_in(&self, k: usize) -> u32 {
        self.terms.keys().map(|e| e[k]).max().unwrap_or(0)
    }

    /// Coefficient of `v_k^d`, as a polynomial in the remaining variables.
    pub fn coeff_in(&self, k: usize, d: u32) -> MPoly {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(e, _)| e[k] == d).map(|(e, c)| {
                let mut e = e.clone();
                e[k] = 0;
                (e, c.clone())
            }),
        )
    }

    fn shifted(&self, k: usize, d: u32) -> MPoly {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| {
                let mut e = e.clone();
                e[k] += d;
                (e, c.clone())
            }),
        )
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self + &(-rhs)
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let e = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.add_term(e, &(x * y));
            }
        }
        out
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.signum() < 0;
            if n > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            let mut factors = Vec::new();
            let mag = c.abs();
            if !mag.is_one() || e.iter().all(|&d| d == 0) {
                factors.push(mag.to_string());
            }
            for (k, &d) in e.iter().enumerate() {
                match d {
                    0 => {}
                    1 => factors.push(format!("v{k}")),
                    _ => factors.push(format!("v{k}^{d}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

/// Division of `f` by `d` as polynomials in variable `var` with coefficients
/// in the other variables. `d` must have leading coefficient 1 in `var`.
/// Returns `(quotient, remainder)` with `deg_var remainder < deg_var d`.
pub fn poly_divide_monic(f: &MPoly, d: &MPoly, var: usize) -> Result<(MPoly, MPoly)> {
    if f.nvars != d.nvars || var >= d.nvars {
        return Err(Error::Input("variable count mismatch".into()));
    }
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let dd = d.deg_in(var);
    if d.coeff_in(var, dd) != MPoly::constant(d.nvars, Scalar::one()) {
        return Err(Error::NotMonic);
    }
    let mut q = MPoly::zero(f.nvars);
    let mut r = f.clone();
    while !r.is_zero() && r.deg_in(var) >= dd {
        let k = r.deg_in(var);
        let lead = r.coeff_in(var, k).shifted(var, k - dd);
        q = &q + &lead;
        r = &r - &(&lead * d);
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: i64) -> MPoly {
        MPoly::constant(2, Scalar::from(x))
    }

    #[test]
    fn divides_over_coefficient_ring() {
        let t = MPoly::var(2, 0);
        let u = MPoly::var(2, 1);
        // (t^2 + u t + 1)(t - u) + (u^2 t + 3)
        let d = &(&(&t * &t) + &(&u * &t)) + &c(1);
        let q = &t - &u;
        let r = &(&(&u * &u) * &t) + &c(3);
        let f = &(&d * &q) + &r;
        let (q2, r2) = poly_divide_monic(&f, &d, 0).unwrap();
        assert_eq!(q2, q);
        assert_eq!(r2, r);
        assert!(r2.deg_in(0) < d.deg_in(0));
    }

    #[test]
    fn rejects_non_monic() {
        let t = MPoly::var(2, 0);
        let u = MPoly::var(2, 1);
        let d = &(&u * &t) + &c(1);
        assert_eq!(poly_divide_monic(&t, &d, 0), Err(Error::NotMonic));
        assert_eq!(poly_divide_monic(&t, &MPoly::zero(2), 0), Err(Error::DivisionByZero));
    }

    #[test]
    fn display() {
        let t = MPoly::var(2, 0);
        let u = MPoly::var(2, 1);
        assert_eq!((&(&t * &t) - &(&u * &c(2))).to_string(), "v0^2 - 2*v1");
    }
}
