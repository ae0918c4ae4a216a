//! Linear realizations `f = b d^{-1} c` of matrix polynomials and the
//! Schwinger-Dyson data built from them.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::laws::Law;
use crate::linalg::QMatrix;
use crate::ncpoly::{MatNCPoly, Monomial, NCPoly};
use crate::scalar::Scalar;

/// `f = b d^{-1} c` with `d = d0 + Σ_θ dθ x_θ`, where `d0 - I` and every `dθ`
/// are strictly upper triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub p: usize,
    pub n_internal: usize,
    pub b: QMatrix,
    pub c: QMatrix,
    pub d0: QMatrix,
    pub d: Vec<QMatrix>,
}

impl Realization {
    pub fn q(&self) -> usize {
        self.d.len()
    }

    /// Pads with zero coefficient matrices up to `q` generators.
    pub fn with_generators(mut self, q: usize) -> Self {
        while self.d.len() < q {
            self.d.push(QMatrix::zeros(self.n_internal, self.n_internal));
        }
        self
    }

    fn is_well_formed(&self) -> bool {
        let n = self.n_internal;
        let shifted = &self.d0 - &QMatrix::identity(n);
        shifted.is_strictly_upper() && self.d.iter().all(QMatrix::is_strictly_upper)
    }
}

/// Realization of a matrix whose entries all lie in the span of `1, x_1, ..., x_q`.
pub fn atom_realization(f: &MatNCPoly) -> Result<Realization> {
    let p = f.p();
    for i in 0..p {
        for j in 0..p {
            if !f.get(i, j).is_affine() {
                return Err(Error::NotAffine { row: i, col: j });
            }
        }
    }
    let q = f.max_var();
    let n = 2 * p;
    let mut b = QMatrix::zeros(p, n);
    b.place(0, 0, &QMatrix::identity(p));
    let mut c = QMatrix::zeros(n, p);
    c.place(p, 0, &QMatrix::identity(p));
    let mut d0 = QMatrix::identity(n);
    d0.place(0, p, &f.coeff_matrix(&Monomial::unit()).scale(&-Scalar::one()));
    let d = (1..=q)
        .map(|t| {
            let mut m = QMatrix::zeros(n, n);
            m.place(0, p, &f.coeff_matrix(&Monomial(vec![t])).scale(&-Scalar::one()));
            m
        })
        .collect();
    Ok(Realization {
        p,
        n_internal: n,
        b,
        c,
        d0,
        d,
    })
}

fn check_pair(r1: &Realization, r2: &Realization) -> Result<usize> {
    if r1.p != r2.p {
        return Err(Error::dims(format!("output sizes {} and {}", r1.p, r2.p)));
    }
    Ok(r1.q().max(r2.q()))
}

/// Realization of `f1 + f2`.
pub fn sum_realization(r1: &Realization, r2: &Realization) -> Result<Realization> {
    let q = check_pair(r1, r2)?;
    let (r1, r2) = (r1.clone().with_generators(q), r2.clone().with_generators(q));
    Ok(Realization {
        p: r1.p,
        n_internal: r1.n_internal + r2.n_internal,
        b: QMatrix::hstack(&r1.b, &r2.b)?,
        c: QMatrix::vstack(&r1.c, &r2.c)?,
        d0: QMatrix::block_diag(&r1.d0, &r2.d0),
        d: r1.d.iter().zip(&r2.d).map(|(a, b)| QMatrix::block_diag(a, b)).collect(),
    })
}

/// Realization of `f1 f2`, with `d = [[d1, c1, 0], [0, I, b2], [0, 0, d2]]`.
pub fn prod_realization(r1: &Realization, r2: &Realization) -> Result<Realization> {
    let q = check_pair(r1, r2)?;
    let (r1, r2) = (r1.clone().with_generators(q), r2.clone().with_generators(q));
    let p = r1.p;
    let (n1, n2) = (r1.n_internal, r2.n_internal);
    let n = n1 + p + n2;
    let mut b = QMatrix::zeros(p, n);
    b.place(0, 0, &r1.b);
    let mut c = QMatrix::zeros(n, p);
    c.place(n1 + p, 0, &r2.c);
    let mut d0 = QMatrix::identity(n);
    d0.place(0, 0, &r1.d0);
    d0.place(0, n1, &r1.c);
    d0.place(n1, n1 + p, &r2.b);
    d0.place(n1 + p, n1 + p, &r2.d0);
    let d = r1
        .d
        .iter()
        .zip(&r2.d)
        .map(|(a, b)| {
            let mut m = QMatrix::zeros(n, n);
            m.place(0, 0, a);
            m.place(n1 + p, n1 + p, b);
            m
        })
        .collect();
    Ok(Realization {
        p,
        n_internal: n,
        b,
        c,
        d0,
        d,
    })
}

/// Realization over the prefix tree of the support of `f`: one block of size
/// `p` per prefix, `d = I - Σ E[u, uθ] x_θ` and `c` carrying the coefficient of
/// each word at its node.
pub fn trie_realization(f: &MatNCPoly) -> Realization {
    let p = f.p();
    let q = f.max_var();
    let mut nodes: BTreeMap<Monomial, usize> = BTreeMap::new();
    for w in f.support() {
        for k in 0..=w.len() {
            nodes.insert(Monomial(w.0[..k].to_vec()), 0);
        }
    }
    nodes.insert(Monomial::unit(), 0);
    // canonical order (length, then lexicographic) puts parents before children
    for (k, v) in nodes.values_mut().enumerate() {
        *v = k;
    }
    let n = nodes.len() * p;
    let mut b = QMatrix::zeros(p, n);
    b.place(0, 0, &QMatrix::identity(p));
    let mut c = QMatrix::zeros(n, p);
    let mut d = vec![QMatrix::zeros(n, n); q];
    let minus = QMatrix::identity(p).scale(&-Scalar::one());
    for (w, &k) in &nodes {
        c.place(k * p, 0, &f.coeff_matrix(w));
        if let Some((&last, prefix)) = w.0.split_last() {
            let parent = nodes[&Monomial(prefix.to_vec())];
            d[last - 1].place(parent * p, k * p, &minus);
        }
    }
    Realization {
        p,
        n_internal: n,
        b,
        c,
        d0: QMatrix::identity(n),
        d,
    }
}

/// Realizes `f`: a single atom when every entry is affine, the prefix tree otherwise.
pub fn realize(f: &MatNCPoly) -> Realization {
    let r = if f.is_affine() {
        atom_realization(f).expect("affine entries")
    } else {
        trie_realization(f)
    };
    debug_assert!(r.is_well_formed());
    r
}

/// Checks `b d^{-1} c = f` exactly by expanding the terminating Neumann series.
pub fn verify_realization(r: &Realization, f: &MatNCPoly) -> bool {
    if r.p != f.p() || !r.is_well_formed() {
        return false;
    }
    let n = r.n_internal;
    let p = r.p;
    // (I - d) as a matrix of affine polynomials
    let nil: Vec<NCPoly> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let mut e = NCPoly::constant(-r.d0.get(i, j));
            if i == j {
                e = e.add(&NCPoly::one());
            }
            for (t, dt) in r.d.iter().enumerate() {
                let coef = dt.get(i, j);
                if !coef.is_zero() {
                    e = e.sub(&NCPoly::var(t + 1).scale(coef));
                }
            }
            e
        })
        .collect();
    let mut v: Vec<NCPoly> = (0..n * p).map(|k| NCPoly::constant(r.c.get(k / p, k % p).clone())).collect();
    let mut acc = vec![NCPoly::zero(); p * p];
    for _ in 0..=n {
        if v.iter().all(NCPoly::is_zero) {
            break;
        }
        for i in 0..p {
            for j in 0..p {
                for k in 0..n {
                    let bk = r.b.get(i, k);
                    if !bk.is_zero() && !v[k * p + j].is_zero() {
                        acc[i * p + j] = acc[i * p + j].add(&v[k * p + j].scale(bk));
                    }
                }
            }
        }
        v = (0..n * p)
            .map(|idx| {
                let (i, j) = (idx / p, idx % p);
                (0..n).fold(NCPoly::zero(), |s, k| {
                    let a = &nil[i * n + k];
                    if a.is_zero() || v[k * p + j].is_zero() {
                        s
                    } else {
                        s.add(&a.mul(&v[k * p + j]))
                    }
                })
            })
            .collect();
    }
    v.iter().all(NCPoly::is_zero) && acc.as_slice() == f.entries()
}

/// Input data of the generalized Schwinger-Dyson equation
/// `I + a0 g + Σ_θ Σ_{j≥2} κ_j^θ (aθ g)^j = 0` with `a0 = a0_const + z a0_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SDData {
    pub n: usize,
    pub p: usize,
    pub a0_const: QMatrix,
    pub a0_z: QMatrix,
    pub a: Vec<QMatrix>,
    /// `kappa[θ][j - 2]` is κ_j of law θ, for `j ≥ 2`.
    pub kappa: Vec<Vec<Scalar>>,
    /// Whether `kappa[θ]` lists every nonzero cumulant of order ≥ 2.
    pub kappa_complete: Vec<bool>,
}

impl SDData {
    pub fn q(&self) -> usize {
        self.a.len()
    }

    /// κ_j of law θ, or `InsufficientOrder` when it was not supplied.
    pub fn kappa_j(&self, theta: usize, j: usize) -> Result<Scalar> {
        match self.kappa[theta].get(j - 2) {
            Some(k) => Ok(k.clone()),
            None if self.kappa_complete[theta] => Ok(Scalar::zero()),
            None => Err(Error::InsufficientOrder(format!(
                "cumulant κ_{j} of law {} not available",
                theta + 1
            ))),
        }
    }
}

/// Assembles the Schwinger-Dyson data for `r` with the given laws, using
/// cumulants up to `order` (or as far as known) for laws with infinite cumulant support.
///
/// With `L0 = [[0, b], [c, d0]]` and `Lθ = [[0, 0], [0, dθ]]` this sets
/// `a0 = L0 + diag(z I_p, 0) + Σ_θ κ_1^θ Lθ` and `aθ = Lθ`.
pub fn build_sd_data(r: &Realization, laws: &[Law], order: usize) -> Result<SDData> {
    if r.q() > laws.len() {
        return Err(Error::dims(format!("{} generators but {} laws", r.q(), laws.len())));
    }
    let r = r.clone().with_generators(laws.len());
    let (p, nn) = (r.p, r.n_internal);
    let n = p + nn;
    let mut l0 = QMatrix::zeros(n, n);
    l0.place(0, p, &r.b);
    l0.place(p, 0, &r.c);
    l0.place(p, p, &r.d0);
    let a: Vec<QMatrix> = r
        .d
        .iter()
        .map(|dt| {
            let mut m = QMatrix::zeros(n, n);
            m.place(p, p, dt);
            m
        })
        .collect();
    let mut a0_const = l0;
    let mut kappa = Vec::new();
    let mut complete = Vec::new();
    for (law, at) in laws.iter().zip(&a) {
        let (len, full) = match law.cumulant_support() {
            Some(s) => (s.max(1), true),
            None => (law.known_order().map_or(order, |k| k.min(order)).max(1), false),
        };
        let k = law.cumulants(len)?;
        if !k[0].is_zero() {
            a0_const = &a0_const + &at.scale(&k[0]);
        }
        let mut rest = k[1..].to_vec();
        while rest.last().is_some_and(Zero::is_zero) && full {
            rest.pop();
        }
        kappa.push(rest);
        complete.push(full);
    }
    let mut a0_z = QMatrix::zeros(n, n);
    a0_z.place(0, 0, &QMatrix::identity(p));
    Ok(SDData {
        n,
        p,
        a0_const,
        a0_z,
        a,
        kappa,
        kappa_complete: complete,
    })
}
