//! Comparison of blocks of the inverse of the depth-truncated Fock operator
//! with products `g aθ1 g ⋯ aθk g`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fock::Monoid;
use crate::realize::SDData;
use crate::scalar::Scalar;
use crate::series::{MatSeries, TruncLaurent};

/// Sparse matrix on the flattened index `word * n + a`, stored by rows.
struct Sparse {
    rows: Vec<BTreeMap<usize, Scalar>>,
}

impl Sparse {
    fn apply(&self, v: &[Scalar], keep: impl Fn(usize) -> bool) -> Vec<Scalar> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                if !keep(r) {
                    return Scalar::zero();
                }
                row.iter()
                    .filter(|(c, _)| !v[**c].is_zero())
                    .map(|(c, a)| a * &v[*c])
                    .sum()
            })
            .collect()
    }
}

struct Pencil {
    n: usize,
    dim: usize,
    /// `in_s[k]` when index `k` carries the `z` part.
    in_s: Vec<bool>,
    c: Sparse,
}

impl Pencil {
    /// `C' = 1 ⊗ a0_const + Σ_θ (prepend θ + Σ_{j≥1} κ_{j+1} strip θ^j) ⊗ aθ`
    /// on words of length at most `depth`.
    fn new(data: &SDData, depth: usize, cap: usize) -> Result<Pencil> {
        let n = data.n;
        let q = data.q();
        let monoid = Monoid::new(q);
        let words = monoid.count_upto(depth);
        let dim = words * n;
        if dim > cap {
            return Err(Error::DepthOverflow { dim, cap });
        }
        let mut in_s = vec![false; dim];
        for a in 0..n {
            for b in 0..n {
                let v = data.a0_z.get(a, b);
                let ok = if a == b { v.is_zero() || v.is_one() } else { v.is_zero() };
                if !ok {
                    return Err(Error::Input("the z part of a0 must be a diagonal projection".into()));
                }
            }
            if data.a0_z.get(a, a).is_one() {
                for w in 0..words {
                    in_s[w * n + a] = true;
                }
            }
        }
        let mut rows = vec![BTreeMap::new(); dim];
        let mut put = |r: usize, c: usize, v: Scalar| {
            if v.is_zero() {
                return;
            }
            let slot: &mut Scalar = rows[r].entry(c).or_insert_with(Scalar::zero);
            *slot += &v;
        };
        for w in 0..words {
            for (a, b, v) in data.a0_const.nonzeros() {
                put(w * n + a, w * n + b, v.clone());
            }
        }
        for theta in 1..=q {
            let at = &data.a[theta - 1];
            if at.is_zero() {
                continue;
            }
            for k in 0..words as u64 {
                let digits = monoid.digits(k);
                if digits.len() < depth {
                    let up = monoid.star(theta as u64, k) as usize;
                    for (a, b, v) in at.nonzeros() {
                        put(up * n + a, k as usize * n + b, v.clone());
                    }
                }
                // column θ^j ⋆ k feeds row k with weight κ_{j+1}
                let mut longer = k;
                for j in 1..=depth - digits.len() {
                    longer = monoid.star(theta as u64, longer);
                    let kappa = data.kappa_j(theta - 1, j + 1)?;
                    if kappa.is_zero() {
                        continue;
                    }
                    for (a, b, v) in at.nonzeros() {
                        put(k as usize * n + a, longer as usize * n + b, v * &kappa);
                    }
                }
            }
        }
        for row in rows.iter_mut() {
            row.retain(|_, v: &mut Scalar| !v.is_zero());
        }
        Ok(Pencil {
            n,
            dim,
            in_s,
            c: Sparse { rows },
        })
    }

    fn restrict(&self, v: &[Scalar], to_s: bool) -> Vec<Scalar> {
        v.iter()
            .zip(&self.in_s)
            .map(|(x, &s)| if s == to_s { x.clone() } else { Scalar::zero() })
            .collect()
    }

    /// `C'_XY v` for `v` supported on `Y`.
    fn block(&self, v: &[Scalar], rows_s: bool) -> Vec<Scalar> {
        self.c.apply(v, |r| self.in_s[r] == rows_s)
    }

    /// `C'_RR^{-1} v` by the terminating Neumann series of the unipotent block.
    fn solve_rr(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        let mut acc = v.to_vec();
        let mut x = v.to_vec();
        for _ in 0..=self.dim {
            // x ← (I - C'_RR) x
            let cx = self.block(&x, false);
            x = x.iter().zip(&cx).map(|(a, b)| a - b).collect();
            if x.iter().all(Zero::is_zero) {
                return Ok(acc);
            }
            for (a, b) in acc.iter_mut().zip(&x) {
                *a += b;
            }
        }
        Err(Error::NotSummable("the constant block of the pencil is not unipotent".into()))
    }

    /// `K' v = C'_SR C'_RR^{-1} C'_RS v - C'_SS v` for `v` supported on `S`.
    fn k_apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        let rs = self.block(v, false);
        let t = self.solve_rr(&rs)?;
        let back = self.block(&t, true);
        let ss = self.block(v, true);
        Ok(back.iter().zip(&ss).map(|(a, b)| a - b).collect())
    }

    /// Column `col` of `(z P + C')^{-1}` as coefficient vectors: entry 0 is the
    /// constant term, entry `k + 1` the coefficient of `z^{-k-1}`, for `k < terms`.
    fn inverse_column(&self, col: usize, terms: usize) -> Result<Vec<Vec<Scalar>>> {
        let mut e = vec![Scalar::zero(); self.dim];
        e[col] = Scalar::one();
        let mut out = vec![vec![Scalar::zero(); self.dim]; terms + 1];
        let (mut s, sign) = if self.in_s[col] {
            (e, Scalar::one())
        } else {
            let r0 = self.solve_rr(&e)?;
            for (o, x) in out[0].iter_mut().zip(&r0) {
                *o = x.clone();
            }
            (self.block(&r0, true), -Scalar::one())
        };
        // Σ^{-1} s = Σ_k z^{-k-1} K'^k s, and the R part follows by -C'_RR^{-1} C'_RS
        for slot in out.iter_mut().skip(1) {
            let r_part = self.solve_rr(&self.block(&s, false))?;
            for k in 0..self.dim {
                if self.in_s[k] {
                    slot[k] = &s[k] * &sign;
                } else {
                    slot[k] = -(&r_part[k] * &sign);
                }
            }
            s = self.restrict(&self.k_apply(&s)?, true);
        }
        Ok(out)
    }
}

/// Compares the block `G⟨w, 0⟩` of the inverse of the depth-`depth` truncation
/// of the Fock operator with `g a^{w_1} g ⋯ a^{w_k} g`, at the exponents
/// `>= -(depth - |w|)` where the truncation has no effect.
pub fn exploit_check(data: &SDData, g: &MatSeries, w: &[usize], depth: usize, cap: usize) -> Result<bool> {
    if w.len() >= depth {
        return Err(Error::Input(format!("word of length {} needs depth above it", w.len())));
    }
    if w.iter().any(|&t| t == 0 || t > data.q()) {
        return Err(Error::Input("word letters must lie in 1..=q".into()));
    }
    let n = data.n;
    let window = (depth - w.len()) as i64;
    let pencil = Pencil::new(data, depth, cap)?;
    let monoid = Monoid::new(data.q());
    let row_word = monoid.index(w) as usize;
    let terms = window as usize;
    let mut block = vec![TruncLaurent::zero(); n * n];
    for c in 0..n {
        let col = pencil.inverse_column(c, terms)?;
        for a in 0..n {
            let idx = row_word * pencil.n + a;
            let coeffs = col
                .iter()
                .enumerate()
                .map(|(k, v)| (if k == 0 { 0 } else { -(k as i64) }, -v[idx].clone()));
            block[a * n + c] = TruncLaurent::from_terms(coeffs, Some(-window));
        }
    }
    let block = MatSeries::new(n, n, block);
    let mut prod = g.clone();
    for &t in w {
        prod = &MatSeries::right_mul_q(&prod, &data.a[t - 1]) * g;
    }
    if prod.floor().is_some_and(|f| f > -window) {
        return Err(Error::InsufficientPrecision(format!(
            "product known only to z^{}, window reaches z^{}",
            prod.floor().unwrap(),
            -window
        )));
    }
    let prod = prod.truncate(-window);
    Ok(block.entries().iter().zip(prod.entries()).all(|(a, b)| a == b))
}
