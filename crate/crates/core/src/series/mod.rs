//! Truncated formal Laurent series in `z` over exact rationals.
//!
//! A series stores a contiguous window of coefficients and an optional
//! precision floor. With `prec = Some(p)` every coefficient at an exponent
//! `>= p` is known and everything below `p` is unknown; with `prec = None`
//! the series is an exact Laurent polynomial.

mod matrix;

pub use matrix::MatSeries;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The valuation of a series: its leading exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    NegInfinity,
    Finite(i64),
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::NegInfinity => None,
            Valuation::Finite(v) => Some(v),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::NegInfinity => f.write_str("-inf"),
            Valuation::Finite(v) => write!(f, "{v}"),
        }
    }
}

fn max_floor(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// A truncated formal Laurent series.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncLaurent {
    low: i64,
    coeffs: Vec<Scalar>,
    prec: Option<i64>,
}

impl TruncLaurent {
    fn normalized(mut low: i64, mut coeffs: Vec<Scalar>, prec: Option<i64>) -> Self {
        if let Some(p) = prec {
            if low < p {
                let cut = ((p - low) as usize).min(coeffs.len());
                coeffs.drain(..cut);
                low = p;
            }
        }
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            coeffs.drain(..lead);
            low += lead as i64;
        }
        if coeffs.is_empty() {
            low = 0;
        }
        TruncLaurent { low, coeffs, prec }
    }

    /// The exact zero series.
    pub fn zero() -> Self {
        TruncLaurent {
            low: 0,
            coeffs: Vec::new(),
            prec: None,
        }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    /// The series `z`.
    pub fn z() -> Self {
        Self::monomial(Scalar::one(), 1)
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(c, 0)
    }

    /// The exact monomial `c z^e`.
    pub fn monomial(c: Scalar, e: i64) -> Self {
        Self::normalized(e, vec![c], None)
    }

    /// A series known to vanish at every exponent `>= prec`.
    pub fn zero_to(prec: i64) -> Self {
        TruncLaurent {
            low: 0,
            coeffs: Vec::new(),
            prec: Some(prec),
        }
    }

    /// Builds a series from `(exponent, coefficient)` pairs; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (i64, Scalar)>>(terms: I, prec: Option<i64>) -> Self {
        let terms: Vec<(i64, Scalar)> = terms.into_iter().collect();
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return TruncLaurent {
                low: 0,
                coeffs: Vec::new(),
                prec,
            };
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap_or(lo);
        let mut coeffs = vec![Scalar::zero(); (hi - lo + 1) as usize];
        for (e, c) in terms {
            coeffs[(e - lo) as usize] += &c;
        }
        Self::normalized(lo, coeffs, prec)
    }

    /// Builds a series from consecutive coefficients starting at exponent `low`.
    pub fn from_dense(low: i64, coeffs: Vec<Scalar>, prec: Option<i64>) -> Self {
        Self::normalized(low, coeffs, prec)
    }

    /// `Σ c_k z^{top-k}`: coefficients listed from the exponent `top` downward.
    pub fn from_descending(top: i64, coeffs: &[Scalar], prec: Option<i64>) -> Self {
        let low = top - coeffs.len() as i64 + 1;
        Self::normalized(low, coeffs.iter().rev().cloned().collect(), prec)
    }

    pub fn prec(&self) -> Option<i64> {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.prec.is_none() && self.coeffs.is_empty()
    }

    /// True when no nonzero coefficient is stored (exact zero or zero to precision).
    pub fn is_zero_window(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest exponent with a stored nonzero coefficient.
    pub fn top(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.low + self.coeffs.len() as i64 - 1)
        }
    }

    /// Lowest exponent with a stored nonzero coefficient.
    pub fn bottom(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.low)
        }
    }

    /// Coefficient of `z^e`; zero outside the stored window.
    pub fn coeff(&self, e: i64) -> Scalar {
        if e < self.low {
            return Scalar::zero();
        }
        self.coeffs
            .get((e - self.low) as usize)
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Coefficient of `z^e`, or `None` if it lies below the precision floor.
    pub fn known_coeff(&self, e: i64) -> Option<Scalar> {
        match self.prec {
            Some(p) if e < p => None,
            _ => Some(self.coeff(e)),
        }
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &Scalar)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    pub fn leading_coeff(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn val(&self) -> Result<Valuation> {
        match (self.top(), self.prec) {
            (Some(t), _) => Ok(Valuation::Finite(t)),
            (None, None) => Ok(Valuation::NegInfinity),
            (None, Some(p)) => Err(Error::IndeterminateValuation { prec: p }),
        }
    }

    /// An upper bound for the valuation: the true valuation when a nonzero
    /// coefficient is stored, `prec - 1` for a series that is zero to precision,
    /// and `None` for the exact zero.
    pub fn val_bound(&self) -> Option<i64> {
        match (self.top(), self.prec) {
            (Some(t), _) => Some(t),
            (None, Some(p)) => Some(p - 1),
            (None, None) => None,
        }
    }

    /// Forgets every coefficient below `floor`.
    pub fn truncate(&self, floor: i64) -> Self {
        let prec = Some(self.prec.map_or(floor, |p| p.max(floor)));
        Self::normalized(self.low, self.coeffs.clone(), prec)
    }

    /// Truncates only if the current floor is lower than `floor`.
    pub fn truncate_if_finer(self, floor: Option<i64>) -> Self {
        match floor {
            Some(f) if self.prec.map_or(true, |p| p < f) => Self::normalized(self.low, self.coeffs, Some(f)),
            _ => self,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        TruncLaurent {
            low: self.low,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            prec: self.prec,
        }
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        TruncLaurent {
            low: if self.coeffs.is_empty() { 0 } else { self.low + k },
            coeffs: self.coeffs.clone(),
            prec: self.prec.map(|p| p + k),
        }
    }

    fn add_ref(&self, other: &Self) -> Self {
        let prec = max_floor(self.prec, other.prec);
        if self.coeffs.is_empty() {
            return other.clone().truncate_if_finer(prec);
        }
        if other.coeffs.is_empty() {
            return self.clone().truncate_if_finer(prec);
        }
        let mut lo = self.low.min(other.low);
        if let Some(p) = prec {
            lo = lo.max(p);
        }
        let hi = self.top().unwrap().max(other.top().unwrap());
        if hi < lo {
            return Self::normalized(0, Vec::new(), prec);
        }
        let mut coeffs = Vec::with_capacity((hi - lo + 1) as usize);
        for e in lo..=hi {
            let a = self.coeff_ref(e);
            let b = other.coeff_ref(e);
            coeffs.push(match (a, b) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => Scalar::zero(),
            });
        }
        Self::normalized(lo, coeffs, prec)
    }

    fn coeff_ref(&self, e: i64) -> Option<&Scalar> {
        if e < self.low {
            return None;
        }
        self.coeffs.get((e - self.low) as usize)
    }

    /// Precision floor of a product, given the floors and valuation bounds of the factors.
    fn product_floor(&self, other: &Self) -> Option<i64> {
        let a = match (self.val_bound(), other.prec) {
            (Some(v), Some(p)) => Some(v + p),
            _ => None,
        };
        let b = match (other.val_bound(), self.prec) {
            (Some(v), Some(p)) => Some(v + p),
            _ => None,
        };
        max_floor(a, b)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero();
        }
        let prec = self.product_floor(other);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::normalized(0, Vec::new(), prec);
        }
        let top = self.top().unwrap() + other.top().unwrap();
        let mut lo = self.low + other.low;
        if let Some(p) = prec {
            lo = lo.max(p);
        }
        if top < lo {
            return Self::normalized(0, Vec::new(), prec);
        }
        let mut out = vec![Scalar::zero(); (top - lo + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = self.low + i as i64;
            let jstart = (lo - ea - other.low).max(0) as usize;
            for (j, b) in other.coeffs.iter().enumerate().skip(jstart) {
                if b.is_zero() {
                    continue;
                }
                let e = ea + other.low + j as i64;
                out[(e - lo) as usize] += &(a * b);
            }
        }
        Self::normalized(lo, out, prec)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse, computed down to `floor` or to the floor the
    /// input's precision justifies, whichever is higher.
    pub fn inv(&self, floor: i64) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        let v = match self.val()? {
            Valuation::Finite(v) => v,
            Valuation::NegInfinity => return Err(Error::DivisionByZero),
        };
        let lead = self.leading_coeff().unwrap();
        let lead_inv = lead.recip().ok_or(Error::DivisionByZero)?;
        let out_floor = match self.prec {
            Some(p) => floor.max(p - 2 * v),
            None => floor,
        };
        let top = -v;
        if top < out_floor {
            return Ok(Self::zero_to(out_floor));
        }
        let len = (top - out_floor + 1) as usize;
        // h[k] is the coefficient of z^{top-k}; f[k] the coefficient of z^{v-k}.
        let f: Vec<Scalar> = (0..len).map(|k| self.coeff(v - k as i64)).collect();
        let mut h: Vec<Scalar> = Vec::with_capacity(len);
        h.push(lead_inv.clone());
        for k in 1..len {
            let mut acc = Scalar::zero();
            for i in 1..=k {
                if !f[i].is_zero() && !h[k - i].is_zero() {
                    acc += &(&f[i] * &h[k - i]);
                }
            }
            h.push(-(acc * &lead_inv));
        }
        Ok(Self::from_descending(top, &h, Some(out_floor)))
    }

    /// `self / other` down to `floor`.
    pub fn div(&self, other: &Self, floor: i64) -> Result<Self> {
        if self.is_exact_zero() {
            if other.is_exact_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(Self::zero());
        }
        let vb = self.val_bound().unwrap_or(0);
        let inv = other.inv(floor - vb)?;
        Ok((self * &inv).truncate_if_finer(Some(floor)))
    }

    fn check_composable(g: &Self) -> Result<()> {
        match g.val() {
            Ok(Valuation::Finite(1)) => Ok(()),
            Ok(v) => Err(Error::CompositionDomain(v.to_string())),
            Err(_) => Err(Error::CompositionDomain(format!(
                "unknown (below {})",
                g.prec.unwrap_or(0)
            ))),
        }
    }

    /// The substitution `self(g)` for `g` of valuation exactly 1, computed down to `floor`.
    pub fn compose(&self, g: &Self, floor: i64) -> Result<Self> {
        Self::check_composable(g)?;
        if self.is_exact_zero() {
            return Ok(Self::zero());
        }
        let mut result = Self::zero();
        if let Some(p) = self.prec {
            result = Self::zero_to(p);
        }
        let Some(top) = self.top() else {
            return Ok(result.truncate_if_finer(Some(floor)));
        };
        // a polynomial in z composed with an exact g stays exact
        let exact = self.is_exact() && g.is_exact() && self.low >= 0;
        let work = if exact { None } else { Some(floor) };
        let bottom = if exact { self.low } else { self.low.max(floor) };
        if top >= 1 {
            let mut gp = g.clone().truncate_if_finer(work);
            for e in 1..=top {
                if e >= bottom {
                    let c = self.coeff(e);
                    if !c.is_zero() {
                        result = &result + &gp.scale(&c);
                    }
                }
                if e < top {
                    gp = (&gp * g).truncate_if_finer(work);
                }
            }
        }
        if bottom <= 0 && top >= 0 {
            let c = self.coeff(0);
            if !c.is_zero() {
                result = &result + &Self::constant(c);
            }
        }
        if bottom < 0 {
            let ginv = g.inv(floor - 1)?;
            let mut gp = ginv.clone();
            for e in (bottom..0).rev() {
                if e <= top {
                    let c = self.coeff(e);
                    if !c.is_zero() {
                        result = &result + &gp.scale(&c);
                    }
                }
                if e > bottom {
                    gp = (&gp * &ginv).truncate_if_finer(Some(floor));
                }
            }
        }
        Ok(result.truncate_if_finer(work))
    }

    /// The compositional inverse of a series of the form `z + c_0 + c_1 z^{-1} + ...`,
    /// computed down to `floor`.
    pub fn comp_inverse(&self, floor: i64) -> Result<Self> {
        Self::check_composable(self)?;
        if self.leading_coeff() != Some(&Scalar::one()) {
            return Err(Error::CompositionDomain(
                "leading coefficient must be 1".into(),
            ));
        }
        let floor = self.prec.map_or(floor, |p| p.max(floor));
        let c0 = self.coeff(0);
        // tail h(z) = f - z - c0, of valuation <= -1
        let tail = Self::from_terms(
            self.terms().filter(|(e, _)| *e < 0).map(|(e, c)| (e, c.clone())),
            self.prec,
        );
        let base = &Self::z() - &Self::constant(c0);
        let mut g = base.truncate(floor);
        let max_iter = (2 - floor).max(2) as usize + 2;
        for _ in 0..max_iter {
            let next = (&base - &tail.compose(&g, floor)?).truncate_if_finer(Some(floor));
            if next == g {
                return Ok(g);
            }
            g = next;
        }
        Ok(g)
    }

    /// Highest exponent at which `self` and `other` are known to differ, or
    /// `None` if they agree on their common known window.
    pub fn disagreement(&self, other: &Self) -> Option<i64> {
        let d = self - other;
        d.top()
    }

    /// True when the two series agree at every exponent known for both.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.disagreement(other).is_none()
    }
}

impl Zero for TruncLaurent {
    fn zero() -> Self {
        TruncLaurent::zero()
    }
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
}

impl From<Scalar> for TruncLaurent {
    fn from(c: Scalar) -> Self {
        TruncLaurent::constant(c)
    }
}

impl Neg for &TruncLaurent {
    type Output = TruncLaurent;
    fn neg(self) -> TruncLaurent {
        TruncLaurent {
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }
}

impl Neg for TruncLaurent {
    type Output = TruncLaurent;
    fn neg(self) -> TruncLaurent {
        -&self
    }
}

macro_rules! series_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&TruncLaurent> for &TruncLaurent {
            type Output = TruncLaurent;
            fn $method(self, rhs: &TruncLaurent) -> TruncLaurent {
                let f: fn(&TruncLaurent, &TruncLaurent) -> TruncLaurent = $body;
                f(self, rhs)
            }
        }
        impl $trait<TruncLaurent> for TruncLaurent {
            type Output = TruncLaurent;
            fn $method(self, rhs: TruncLaurent) -> TruncLaurent {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&TruncLaurent> for TruncLaurent {
            type Output = TruncLaurent;
            fn $method(self, rhs: &TruncLaurent) -> TruncLaurent {
                (&self).$method(rhs)
            }
        }
    };
}

series_binop!(Add, add, |a, b| a.add_ref(b));
series_binop!(Sub, sub, |a, b| a.add_ref(&-b));
series_binop!(Mul, mul, |a, b| a.mul_ref(b));

impl fmt::Display for TruncLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms().rev() {
            let neg = c.signum() < 0;
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag == Scalar::one();
            match e {
                0 => write!(f, "{mag}")?,
                1 if unit => f.write_str("z")?,
                1 => write!(f, "{mag}*z")?,
                _ if unit => write!(f, "z^{e}")?,
                _ => write!(f, "{mag}*z^{e}")?,
            }
        }
        match self.prec {
            Some(p) => {
                if !first {
                    f.write_str(" + ")?;
                }
                write!(f, "O(z^{})", p - 1)
            }
            None if first => f.write_str("0"),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for TruncLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for TruncLaurent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<(i64, String)> = self
            .terms()
            .rev()
            .map(|(e, c)| (e, c.to_ratio_string()))
            .collect();
        let mut s = serializer.serialize_struct("TruncLaurent", 2)?;
        s.serialize_field("terms", &terms)?;
        s.serialize_field("prec", &self.prec)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::from(n)
    }

    fn poly(terms: &[(i64, i64)]) -> TruncLaurent {
        TruncLaurent::from_terms(terms.iter().map(|&(e, c)| (e, q(c))), None)
    }

    /// z^{-1} + z^{-3} + 2 z^{-5} + 5 z^{-7} + ... (Catalan numbers at odd exponents)
    fn catalan_series(floor: i64) -> TruncLaurent {
        let mut cat = vec![q(1)];
        for k in 1..=20usize {
            let next: Scalar = (0..k).map(|i| &cat[i] * &cat[k - 1 - i]).sum();
            cat.push(next);
        }
        let terms = (0..=20).map(|k| (-(2 * k as i64) - 1, cat[k].clone()));
        TruncLaurent::from_terms(terms, Some(floor))
    }

    #[test]
    fn valuation_basics() {
        assert_eq!(poly(&[(3, 2), (-1, 1)]).val().unwrap(), Valuation::Finite(3));
        assert_eq!(TruncLaurent::zero().val().unwrap(), Valuation::NegInfinity);
        assert!(TruncLaurent::zero_to(-3).val().is_err());
        let f = poly(&[(2, 1), (0, 5)]);
        let g = poly(&[(-1, 3)]);
        assert_eq!((&f * &g).val().unwrap(), Valuation::Finite(1));
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(&poly(&[(1, 1), (0, 1)]) + &poly(&[(1, -1)]), TruncLaurent::one());
        assert_eq!(&poly(&[(-1, 1)]) * &poly(&[(-1, 1)]), poly(&[(-2, 1)]));
        let f = poly(&[(3, 1)]);
        let g = poly(&[(1, 1)]);
        assert_eq!((&f + &g).val().unwrap(), Valuation::Finite(3));
    }

    #[test]
    fn product_precision_floor() {
        let f = TruncLaurent::from_terms([(0, q(1)), (-1, q(1))], Some(-5));
        let g = TruncLaurent::from_terms([(2, q(1))], Some(-3));
        let h = &f * &g;
        // max(0 + (-3), 2 + (-5)) = -3
        assert_eq!(h.prec(), Some(-3));
        assert_eq!(h.coeff(2), q(1));
        assert_eq!(h.coeff(1), q(1));
    }

    #[test]
    fn inverse_examples() {
        let z = TruncLaurent::z();
        assert_eq!(z.inv(-10).unwrap().truncate(-10), poly(&[(-1, 1)]).truncate(-10));
        let zm1 = poly(&[(1, 1), (0, -1)]);
        let inv = zm1.inv(-8).unwrap();
        for e in -8..=-1 {
            assert_eq!(inv.coeff(e), q(1));
        }
        assert_eq!(inv.prec(), Some(-8));
        let s = catalan_series(-30);
        let r = s.inv(-20).unwrap();
        // 1/S = z - z^{-1} - z^{-3} - 2 z^{-5} - ...
        assert_eq!(r.coeff(1), q(1));
        assert_eq!(r.coeff(-1), q(-1));
        assert_eq!(r.coeff(-3), q(-1));
        assert_eq!(r.coeff(-5), q(-2));
        let back = &s * &r;
        assert!(back.agrees_with(&TruncLaurent::one()));
        assert!(back.prec().unwrap() <= -20);
    }

    #[test]
    fn inverse_precision_from_input() {
        let s = catalan_series(-12);
        let r = s.inv(-100).unwrap();
        // p - 2v = -12 + 2
        assert_eq!(r.prec(), Some(-10));
        assert_eq!(r.inv(-100).unwrap().agrees_with(&s), true);
    }

    #[test]
    fn composition_examples() {
        let z2 = poly(&[(2, 1)]);
        let g = poly(&[(1, 1), (-1, 1)]);
        assert_eq!(z2.compose(&g, -10).unwrap(), poly(&[(2, 1), (0, 2), (-2, 1)]));
        let f = poly(&[(3, 2), (0, 1), (-2, 5)]);
        assert!(f.compose(&TruncLaurent::z(), -10).unwrap().agrees_with(&f));
        assert!(matches!(
            f.compose(&poly(&[(0, 1)]), -10),
            Err(Error::CompositionDomain(_))
        ));
    }

    #[test]
    fn compositional_inverse_examples() {
        assert_eq!(TruncLaurent::z().comp_inverse(-10).unwrap().truncate(-10), TruncLaurent::z().truncate(-10));
        let zc = poly(&[(1, 1), (0, 3)]);
        assert!(zc.comp_inverse(-10).unwrap().agrees_with(&poly(&[(1, 1), (0, -3)])));
        let f = poly(&[(1, 1), (-1, 1)]);
        let g = f.comp_inverse(-15).unwrap();
        let expected = [(1, 1), (-1, -1), (-3, -1), (-5, -2), (-7, -5), (-9, -14)];
        for (e, c) in expected {
            assert_eq!(g.coeff(e), q(c), "exponent {e}");
        }
        let fg = f.compose(&g, -15).unwrap();
        assert!(fg.agrees_with(&TruncLaurent::z()));
        assert!(fg.prec().unwrap() <= -14);
        let gf = g.compose(&f, -15).unwrap();
        assert!(gf.agrees_with(&TruncLaurent::z()));
        assert!(gf.prec().unwrap() <= -14);
    }

    #[test]
    fn display_and_serialize() {
        let f = TruncLaurent::from_terms([(-1, q(1)), (-3, Scalar::new(-1, 2))], Some(-5));
        assert_eq!(f.to_string(), "z^-1 - 1/2*z^-3 + O(z^-6)");
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"terms":[[-1,"1/1"],[-3,"-1/2"]],"prec":-5}"#);
    }
}
