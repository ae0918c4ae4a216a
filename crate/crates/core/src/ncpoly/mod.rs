//! Noncommutative polynomials in generators `x1..xq`, square matrices of them,
//! and substitution of concrete operators.

mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::scalar::Scalar;

pub use parse::parse;

/// A word in the generators, as 1-based generator indices. Ordered by length,
/// then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub Vec<usize>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut w = self.0.clone();
        w.extend_from_slice(&other.0);
        Monomial(w)
    }

    pub fn reversed(&self) -> Monomial {
        Monomial(self.0.iter().rev().copied().collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A noncommutative polynomial with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NCPoly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::term(Monomial::unit(), c)
    }

    /// The generator `x_i`, with `i` counted from 1.
    pub fn var(i: usize) -> Self {
        Self::term(Monomial(vec![i]), Scalar::one())
    }

    pub fn term(w: Monomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        NCPoly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = NCPoly::zero();
        for (w, c) in terms {
            p.add_term(w, &c);
        }
        p
    }

    fn add_term(&mut self, w: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Monomial) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Monomial::unit())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Monomial::len)
    }

    /// Largest generator index occurring, 0 if none.
    pub fn max_var(&self) -> usize {
        self.terms.keys().flat_map(|w| w.0.iter().copied()).max().unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.degree().map_or(true, |d| d <= 1)
    }

    pub fn add(&self, other: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &NCPoly) -> NCPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NCPoly {
        self.scale(&-Scalar::one())
    }

    pub fn scale(&self, c: &Scalar) -> NCPoly {
        if c.is_zero() {
            return NCPoly::zero();
        }
        NCPoly {
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &NCPoly) -> NCPoly {
        let mut out = NCPoly::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), &(c1 * c2));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> NCPoly {
        (0..k).fold(NCPoly::one(), |acc, _| acc.mul(self))
    }

    /// The polynomial with every word reversed.
    pub fn reversed(&self) -> NCPoly {
        NCPoly {
            terms: self.terms.iter().map(|(w, c)| (w.reversed(), c.clone())).collect(),
        }
    }
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let neg = c.signum() < 0;
            let mag = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let vars: Vec<String> = w.0.iter().map(|i| format!("x{i}")).collect();
            if w.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A `p x p` matrix of noncommutative polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatNCPoly {
    p: usize,
    entries: Vec<NCPoly>,
}

impl MatNCPoly {
    pub fn new(p: usize, entries: Vec<NCPoly>) -> Result<Self> {
        if entries.len() != p * p {
            return Err(Error::dims(format!("{} entries for a {p}x{p} matrix", entries.len())));
        }
        Ok(MatNCPoly { p, entries })
    }

    pub fn scalar(f: NCPoly) -> Self {
        MatNCPoly {
            p: 1,
            entries: vec![f],
        }
    }

    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> NCPoly) -> Self {
        let mut entries = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                entries.push(f(i, j));
            }
        }
        MatNCPoly { p, entries }
    }

    pub fn identity(p: usize) -> Self {
        Self::from_fn(p, |i, j| if i == j { NCPoly::one() } else { NCPoly::zero() })
    }

    /// The constant matrix `m`.
    pub fn from_qmatrix(m: &QMatrix) -> Self {
        Self::from_fn(m.rows(), |i, j| NCPoly::constant(m.get(i, j).clone()))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> &NCPoly {
        &self.entries[i * self.p + j]
    }

    pub fn entries(&self) -> &[NCPoly] {
        &self.entries
    }

    pub fn degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(NCPoly::degree).max()
    }

    pub fn max_var(&self) -> usize {
        self.entries.iter().map(NCPoly::max_var).max().unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.entries.iter().all(NCPoly::is_affine)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(NCPoly::is_zero)
    }

    /// Coefficient matrix of the word `w`.
    pub fn coeff_matrix(&self, w: &Monomial) -> QMatrix {
        QMatrix::from_fn(self.p, self.p, |i, j| self.get(i, j).coeff(w))
    }

    /// All words with a nonzero coefficient in some entry, in canonical order.
    pub fn support(&self) -> Vec<Monomial> {
        let mut words: Vec<Monomial> = self
            .entries
            .iter()
            .flat_map(|e| e.terms().map(|(w, _)| w.clone()))
            .collect();
        words.sort();
        words.dedup();
        words
    }

    fn check(&self, other: &MatNCPoly) -> Result<()> {
        if self.p != other.p {
            return Err(Error::dims(format!("{0}x{0} and {1}x{1}", self.p, other.p)));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatNCPoly) -> Result<MatNCPoly> {
        self.check(other)?;
        Ok(Self::from_fn(self.p, |i, j| self.get(i, j).add(other.get(i, j))))
    }

    pub fn sub(&self, other: &MatNCPoly) -> Result<MatNCPoly> {
        self.check(other)?;
        Ok(Self::from_fn(self.p, |i, j| self.get(i, j).sub(other.get(i, j))))
    }

    pub fn mul(&self, other: &MatNCPoly) -> Result<MatNCPoly> {
        self.check(other)?;
        Ok(Self::from_fn(self.p, |i, j| {
            (0..self.p).fold(NCPoly::zero(), |acc, k| acc.add(&self.get(i, k).mul(other.get(k, j))))
        }))
    }

    pub fn scale(&self, c: &Scalar) -> MatNCPoly {
        Self::from_fn(self.p, |i, j| self.get(i, j).scale(c))
    }

    pub fn neg(&self) -> MatNCPoly {
        self.scale(&-Scalar::one())
    }

    pub fn pow(&self, k: u32) -> MatNCPoly {
        (0..k).fold(Self::identity(self.p), |acc, _| acc.mul(self).expect("same size"))
    }

    /// The formal transpose: entry `(i, j)` is entry `(j, i)` with every word
    /// reversed. Evaluating it at the transposed generators gives the transpose
    /// of the evaluation.
    pub fn transpose(&self) -> MatNCPoly {
        Self::from_fn(self.p, |i, j| self.get(j, i).reversed())
    }
}

impl fmt::Display for MatNCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 1 {
            return write!(f, "{}", self.entries[0]);
        }
        f.write_str("[")?;
        for i in 0..self.p {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.p {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Linear operators that polynomials can be evaluated at.
pub trait Operator: Clone {
    fn dim(&self) -> usize;
    fn identity(dim: usize) -> Self;
    fn zero(dim: usize) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: &Scalar) -> Self;
}

impl Operator for QMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn identity(dim: usize) -> Self {
        QMatrix::identity(dim)
    }

    fn zero(dim: usize) -> Self {
        QMatrix::zeros(dim, dim)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn scale(&self, c: &Scalar) -> Self {
        QMatrix::scale(self, c)
    }
}

/// Substitutes `ops[i-1]` for `x_i` in every entry of `f`. Returns the `p x p`
/// grid of results in row-major order.
pub fn evaluate<O: Operator>(f: &MatNCPoly, ops: &[O]) -> Result<Vec<O>> {
    let Some(dim) = ops.first().map(Operator::dim) else {
        if f.max_var() > 0 {
            return Err(Error::dims("no operators supplied"));
        }
        return Ok(f.entries.iter().map(|e| O::identity(0).scale(&e.constant_term())).collect());
    };
    if ops.iter().any(|o| o.dim() != dim) {
        return Err(Error::dims("operators of different sizes"));
    }
    if f.max_var() > ops.len() {
        return Err(Error::dims(format!(
            "x{} used but only {} operators supplied",
            f.max_var(),
            ops.len()
        )));
    }
    // products of all words in the support, built from their prefixes
    let mut words: HashMap<Monomial, O> = HashMap::new();
    words.insert(Monomial::unit(), O::identity(dim));
    for w in f.support() {
        word_value(&w, ops, &mut words);
    }
    Ok(f
        .entries
        .iter()
        .map(|e| {
            e.terms().fold(O::zero(dim), |acc, (w, c)| acc.add(&words[w].scale(c)))
        })
        .collect())
}

fn word_value<O: Operator>(w: &Monomial, ops: &[O], cache: &mut HashMap<Monomial, O>) {
    if cache.contains_key(w) {
        return;
    }
    let prefix = Monomial(w.0[..w.len() - 1].to_vec());
    word_value(&prefix, ops, cache);
    let last = &ops[w.0[w.len() - 1] - 1];
    let v = cache[&prefix].mul(last);
    cache.insert(w.clone(), v);
}

/// Evaluates a single polynomial.
pub fn evaluate_poly<O: Operator>(f: &NCPoly, ops: &[O]) -> Result<O> {
    Ok(evaluate(&MatNCPoly::scalar(f.clone()), ops)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> NCPoly {
        NCPoly::var(i)
    }

    #[test]
    fn arithmetic() {
        let p = x(1).mul(&x(2));
        assert_eq!(p.terms().next().unwrap().0, &Monomial(vec![1, 2]));
        assert_eq!(x(1).mul(&NCPoly::one()), x(1));
        let s = x(1).add(&x(2)).pow(2);
        assert_eq!(s.num_terms(), 4);
        assert_eq!(s.to_string(), "x1*x1 + x1*x2 + x2*x1 + x2*x2");
        let c = x(1).mul(&x(2)).sub(&x(2).mul(&x(1)));
        assert_eq!(c.to_string(), "x1*x2 - x2*x1");
        assert_eq!(c.degree(), Some(2));
        assert!(x(1).sub(&x(1)).is_zero());
    }

    #[test]
    fn display_forms() {
        let p = NCPoly::from_terms([
            (Monomial::unit(), Scalar::new(-3, 2)),
            (Monomial(vec![2]), Scalar::new(1, 3)),
            (Monomial(vec![1, 1]), -Scalar::one()),
        ]);
        assert_eq!(p.to_string(), "-3/2 + 1/3*x2 - x1*x1");
    }

    #[test]
    fn evaluation() {
        let m1 = QMatrix::from_ints(&[&[1, 2, 0], &[0, 1, 3], &[4, 0, 1]]);
        let m2 = QMatrix::from_ints(&[&[0, 1, 0], &[1, 0, 0], &[2, 2, 5]]);
        let f = MatNCPoly::scalar(x(1).mul(&x(2)));
        let v = evaluate(&f, &[m1.clone(), m2.clone()]).unwrap();
        assert_eq!(v[0], &m1 * &m2);
        let one = evaluate(&MatNCPoly::identity(1), &[m1.clone()]).unwrap();
        assert_eq!(one[0], QMatrix::identity(3));
        assert_eq!(evaluate_poly(&x(1), &[m1.clone()]).unwrap(), m1);
        assert!(evaluate_poly(&x(3), &[m1.clone(), m2.clone()]).is_err());
    }

    #[test]
    fn transpose_commutes_with_evaluation() {
        let m1 = QMatrix::from_ints(&[&[1, 2], &[0, 1]]);
        let m2 = QMatrix::from_ints(&[&[0, 1], &[3, 2]]);
        let f = parse("[[x1*x2, 2], [x2*x2*x1 - x1, x1]]").unwrap();
        let ops = [m1.clone(), m2.clone()];
        let t_ops = [m1.transpose(), m2.transpose()];
        let v = evaluate(&f, &ops).unwrap();
        let vt = evaluate(&f.transpose(), &t_ops).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(vt[i * 2 + j], v[j * 2 + i].transpose());
            }
        }
    }
}
