use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{max_floor, TruncLaurent};
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::scalar::Scalar;

/// A matrix of truncated Laurent series sharing one precision floor.
///
/// Entries are stored row-major. Square matrices are the common case, but
/// rectangular shapes are allowed so that low-rank factors can be carried.
#[derive(Clone, PartialEq, Eq)]
pub struct MatSeries {
    rows: usize,
    cols: usize,
    entries: Vec<TruncLaurent>,
}

impl MatSeries {
    /// Builds a matrix and raises every entry to the common (highest) floor.
    pub fn new(rows: usize, cols: usize, entries: Vec<TruncLaurent>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let floor = entries.iter().fold(None, |acc, e| max_floor(acc, e.prec()));
        let entries = match floor {
            Some(_) => entries.into_iter().map(|e| e.truncate_if_finer(floor)).collect(),
            None => entries,
        };
        MatSeries {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> TruncLaurent) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatSeries {
            rows,
            cols,
            entries: vec![TruncLaurent::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                TruncLaurent::one()
            } else {
                TruncLaurent::zero()
            }
        })
    }

    pub fn from_qmatrix(m: &QMatrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| TruncLaurent::constant(m.get(i, j).clone()))
    }

    /// The exact matrix `a + z b`.
    pub fn pencil(a: &QMatrix, b: &QMatrix) -> Self {
        assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
        Self::from_fn(a.rows(), a.cols(), |i, j| {
            TruncLaurent::from_terms(
                [(0, a.get(i, j).clone()), (1, b.get(i, j).clone())],
                None,
            )
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncLaurent {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[TruncLaurent] {
        &self.entries
    }

    /// The common precision floor, `None` when every entry is exact.
    pub fn floor(&self) -> Option<i64> {
        self.entries.iter().fold(None, |acc, e| max_floor(acc, e.prec()))
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(TruncLaurent::is_exact)
    }

    /// Upper bound for the matrix valuation (maximum over entries); `None` for the exact zero matrix.
    pub fn val_bound(&self) -> Option<i64> {
        self.entries.iter().filter_map(TruncLaurent::val_bound).max()
    }

    /// True when every stored coefficient is zero.
    pub fn is_zero_window(&self) -> bool {
        self.entries.iter().all(TruncLaurent::is_zero_window)
    }

    pub fn truncate(&self, floor: i64) -> Self {
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.truncate(floor)).collect(),
        }
    }

    pub fn truncate_if_finer(self, floor: Option<i64>) -> Self {
        if floor.is_none() {
            return self;
        }
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.into_iter().map(|e| e.truncate_if_finer(floor)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&TruncLaurent) -> TruncLaurent) -> Self {
        Self::new(self.rows, self.cols, self.entries.iter().map(f).collect())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|e| e.scale(c))
    }

    pub fn scale_series(&self, s: &TruncLaurent) -> Self {
        self.map(|e| e * s)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn submatrix(&self, r: usize, c: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r + i, c + j).clone())
    }

    pub fn trace(&self) -> TruncLaurent {
        (0..self.rows.min(self.cols)).fold(TruncLaurent::zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dims(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = TruncLaurent::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.push(acc);
            }
        }
        Ok(Self::new(self.rows, other.cols, out))
    }

    /// Left multiplication by a constant matrix, skipping its zero entries.
    pub fn left_mul_q(q: &QMatrix, m: &Self) -> Self {
        assert_eq!(q.cols(), m.rows);
        let mut out = vec![TruncLaurent::zero(); q.rows() * m.cols];
        for (i, k, c) in q.nonzeros() {
            for j in 0..m.cols {
                let e = m.get(k, j);
                if !e.is_exact_zero() {
                    let idx = i * m.cols + j;
                    out[idx] = &out[idx] + &e.scale(c);
                }
            }
        }
        let floor = m.floor();
        Self::new(q.rows(), m.cols, out).truncate_if_finer(floor)
    }

    /// Right multiplication by a constant matrix, skipping its zero entries.
    pub fn right_mul_q(m: &Self, q: &QMatrix) -> Self {
        assert_eq!(m.cols, q.rows());
        let mut out = vec![TruncLaurent::zero(); m.rows * q.cols()];
        for (k, j, c) in q.nonzeros() {
            for i in 0..m.rows {
                let e = m.get(i, k);
                if !e.is_exact_zero() {
                    let idx = i * q.cols() + j;
                    out[idx] = &out[idx] + &e.scale(c);
                }
            }
        }
        let floor = m.floor();
        Self::new(m.rows, q.cols(), out).truncate_if_finer(floor)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::dims(format!("{what} needs a square matrix, got {}x{}", self.rows, self.cols)))
        }
    }

    /// Faddeev-LeVerrier: returns the characteristic coefficients `c_0..c_n`
    /// of `det(tI - A) = Σ c_i t^i` and the final auxiliary matrix `M_n`.
    fn faddeev_leverrier(&self) -> (Vec<TruncLaurent>, MatSeries) {
        let n = self.rows;
        let mut c = vec![TruncLaurent::zero(); n + 1];
        c[n] = TruncLaurent::one();
        let id = Self::identity(n);
        let mut m = id.clone();
        let mut am = self.clone();
        c[n - 1] = -am.trace();
        for k in 2..=n {
            m = &am + &id.scale_series(&c[n - k + 1]);
            am = self * &m;
            c[n - k] = am.trace().scale(&Scalar::new(-1, k as i64));
        }
        (c, m)
    }

    /// The vector `e(A) = (e_1, ..., e_n)` with `det(tI - A) = t^n + Σ (-1)^i e_i t^{n-i}`.
    pub fn charpoly_e(&self) -> Result<Vec<TruncLaurent>> {
        self.require_square("charpoly_e")?;
        let n = self.rows;
        if n == 0 {
            return Ok(Vec::new());
        }
        let (c, _) = self.faddeev_leverrier();
        Ok((1..=n)
            .map(|i| {
                let ci = &c[n - i];
                if i % 2 == 0 {
                    ci.clone()
                } else {
                    -ci
                }
            })
            .collect())
    }

    /// Determinant via the characteristic polynomial (division-free apart from small integers).
    pub fn det(&self) -> Result<TruncLaurent> {
        self.require_square("det")?;
        let n = self.rows;
        if n == 0 {
            return Ok(TruncLaurent::one());
        }
        let (c, _) = self.faddeev_leverrier();
        Ok(if n % 2 == 0 { c[0].clone() } else { -&c[0] })
    }

    /// Inverse down to `floor`.
    ///
    /// Exact (Laurent polynomial) matrices go through the adjugate and an exact
    /// determinant; truncated matrices use elimination with pivots of maximal valuation.
    pub fn mat_inv(&self, floor: i64) -> Result<Self> {
        self.require_square("mat_inv")?;
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        if self.is_exact() {
            let (c, m) = self.faddeev_leverrier();
            if c[0].is_exact_zero() {
                return Err(Error::SingularMatrix(String::new()));
            }
            let vb = m.val_bound().unwrap_or(0);
            let inv_c0 = c[0].inv(floor - vb)?;
            let out = m.scale_series(&-inv_c0);
            return Ok(out.truncate_if_finer(Some(floor)));
        }
        self.gauss_jordan_inverse(floor)
    }

    fn gauss_jordan_inverse(&self, floor: i64) -> Result<Self> {
        let n = self.rows;
        let mut a: Vec<Vec<TruncLaurent>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut b: Vec<Vec<TruncLaurent>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { TruncLaurent::one() } else { TruncLaurent::zero() })
                    .collect()
            })
            .collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pr, pc) = pivot_position(&a, k).ok_or_else(|| {
                Error::SingularMatrix(" to working precision".into())
            })?;
            a.swap(k, pr);
            b.swap(k, pr);
            for row in a.iter_mut() {
                row.swap(k, pc);
            }
            col_perm.swap(k, pc);
            let piv = a[k][k].clone();
            let v = piv.val_bound().unwrap();
            let piv_inv = piv.inv(floor - 2 * v.max(0) - n as i64)?;
            for j in 0..n {
                a[k][j] = &a[k][j] * &piv_inv;
                b[k][j] = &b[k][j] * &piv_inv;
            }
            for i in 0..n {
                if i == k || a[i][k].is_exact_zero() {
                    continue;
                }
                let factor = a[i][k].clone();
                for j in 0..n {
                    if !a[k][j].is_exact_zero() {
                        a[i][j] = &a[i][j] - &(&factor * &a[k][j]);
                    }
                    if !b[k][j].is_exact_zero() {
                        b[i][j] = &b[i][j] - &(&factor * &b[k][j]);
                    }
                }
            }
        }
        // rows of b correspond to permuted columns of the original matrix
        let mut out = vec![TruncLaurent::zero(); n * n];
        for (k, &orig) in col_perm.iter().enumerate() {
            for j in 0..n {
                out[orig * n + j] = b[k][j].clone();
            }
        }
        Ok(Self::new(n, n, out).truncate_if_finer(Some(floor)))
    }

    /// Determinant by elimination with pivots of maximal valuation, with every
    /// entry first truncated to `work_floor`. A result that is zero to precision
    /// means the determinant could not be resolved at this floor.
    pub fn det_elimination(&self, work_floor: i64) -> Result<TruncLaurent> {
        self.require_square("det_elimination")?;
        let n = self.rows;
        let mut a: Vec<Vec<TruncLaurent>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).truncate(work_floor)).collect())
            .collect();
        let mut det = TruncLaurent::one();
        let mut negate = false;
        for k in 0..n {
            let Some((pr, pc)) = pivot_position(&a, k) else {
                let floor = a[k..]
                    .iter()
                    .flat_map(|r| r[k..].iter())
                    .filter_map(TruncLaurent::prec)
                    .max()
                    .unwrap_or(work_floor);
                let rest = TruncLaurent::zero_to(floor);
                return Ok(&det * &rest);
            };
            if pr != k {
                a.swap(k, pr);
                negate = !negate;
            }
            if pc != k {
                for row in a.iter_mut() {
                    row.swap(k, pc);
                }
                negate = !negate;
            }
            let piv = a[k][k].clone();
            let v = piv.val_bound().unwrap();
            det = &det * &piv;
            let piv_inv = piv.inv(work_floor - 2 * v)?;
            for i in k + 1..n {
                if a[i][k].is_exact_zero() {
                    continue;
                }
                let factor = &a[i][k] * &piv_inv;
                for j in k + 1..n {
                    if !a[k][j].is_exact_zero() {
                        a[i][j] = &a[i][j] - &(&factor * &a[k][j]);
                    }
                }
            }
        }
        Ok(if negate { -det } else { det })
    }
}

/// Position of an entry of maximal determinate valuation in the trailing block `[k.., k..]`.
fn pivot_position(a: &[Vec<TruncLaurent>], k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(i64, usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(k) {
        for (j, e) in row.iter().enumerate().skip(k) {
            if let Some(t) = e.top() {
                if best.map_or(true, |(bv, _, _)| t > bv) {
                    best = Some((t, i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

impl Add for &MatSeries {
    type Output = MatSeries;
    fn add(self, rhs: &MatSeries) -> MatSeries {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        MatSeries::new(
            self.rows,
            self.cols,
            self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &MatSeries {
    type Output = MatSeries;
    fn sub(self, rhs: &MatSeries) -> MatSeries {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        MatSeries::new(
            self.rows,
            self.cols,
            self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Neg for &MatSeries {
    type Output = MatSeries;
    fn neg(self) -> MatSeries {
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| -e).collect(),
        }
    }
}

impl Mul for &MatSeries {
    type Output = MatSeries;
    fn mul(self, rhs: &MatSeries) -> MatSeries {
        self.try_mul(rhs).expect("matrix dimensions")
    }
}

impl fmt::Debug for MatSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatSeries {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                writeln!(f, "  ({i},{j}): {}", self.get(i, j))?;
            }
        }
        f.write_str("]")
    }
}

impl Serialize for MatSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[TruncLaurent]> = self.entries.chunks(self.cols.max(1)).collect();
        let mut s = serializer.serialize_struct("MatSeries", 3)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        s.serialize_field("entries", &rows)?;
        s.end()
    }
}

impl Mul for MatSeries {
    type Output = MatSeries;
    fn mul(self, rhs: MatSeries) -> MatSeries {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::from(n)
    }

    fn mono(c: i64, e: i64) -> TruncLaurent {
        TruncLaurent::monomial(q(c), e)
    }

    #[test]
    fn inverse_examples() {
        let id = MatSeries::identity(2);
        assert!(id.mat_inv(-10).unwrap().truncate(-10) == id.truncate(-10));
        let zi = MatSeries::from_fn(2, 2, |i, j| if i == j { mono(1, 1) } else { TruncLaurent::zero() });
        let inv = zi.mat_inv(-10).unwrap();
        assert_eq!(inv.get(0, 0).coeff(-1), q(1));
        assert!(inv.get(0, 1).is_zero_window());
        assert_eq!(inv.get(0, 0).terms().count(), 1);
    }

    #[test]
    fn charpoly_examples() {
        let a = MatSeries::from_fn(2, 2, |i, j| if i != j { mono(1, -1) } else { TruncLaurent::zero() });
        let e = a.charpoly_e().unwrap();
        assert!(e[0].is_exact_zero());
        assert_eq!(e[1], mono(-1, -2));
        let e = MatSeries::identity(2).charpoly_e().unwrap();
        assert_eq!(e, vec![mono(2, 0), mono(1, 0)]);
    }

    #[test]
    fn truncated_inverse_matches_exact() {
        let a = MatSeries::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => TruncLaurent::from_terms([(1, q(1)), (0, q(2))], None),
            (0, 1) => mono(3, 0),
            (1, 1) => TruncLaurent::from_terms([(1, q(1)), (-1, q(-1))], None),
            (1, 2) => mono(1, -1),
            (2, 0) => mono(1, 0),
            (2, 2) => TruncLaurent::from_terms([(1, q(2)), (0, q(1))], None),
            _ => TruncLaurent::zero(),
        });
        let exact = a.mat_inv(-12).unwrap();
        let approx = a.truncate(-30).mat_inv(-12).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(exact.get(i, j).agrees_with(approx.get(i, j)));
            }
        }
        assert!(approx.floor().unwrap() <= -12);
        let prod = &a * &exact;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { TruncLaurent::one() } else { TruncLaurent::zero() };
                assert!(prod.get(i, j).agrees_with(&want));
            }
        }
    }

    #[test]
    fn elimination_determinant_matches_charpoly() {
        let a = MatSeries::from_fn(3, 3, |i, j| mono((i * 3 + j) as i64 % 5 - 2, (i as i64 - j as i64).clamp(-1, 1)));
        let exact = a.det().unwrap();
        let elim = a.det_elimination(-20).unwrap();
        assert!(exact.agrees_with(&elim));
    }

    #[test]
    fn singular_is_reported() {
        let a = MatSeries::from_fn(2, 2, |_, _| mono(1, 1));
        assert!(matches!(a.mat_inv(-5), Err(Error::SingularMatrix(_))));
    }
}
