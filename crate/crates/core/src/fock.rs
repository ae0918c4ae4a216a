//! Words over `1..q` indexed in improper base `q`, and the free Fock model of
//! variables with prescribed free cumulants, used as a brute-force moment oracle.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::laws::Law;
use crate::ncpoly::{evaluate, MatNCPoly, Operator};
use crate::scalar::Scalar;

/// Default cap on operator dimension and on sparse vector support.
pub const DEFAULT_CAP: usize = 2_000_000;

/// The free monoid on `q` letters, with each word identified with the integer
/// its digit string denotes in improper base `q` (digits `1..=q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monoid {
    q: u64,
}

impl Monoid {
    pub fn new(q: usize) -> Self {
        assert!(q >= 1, "alphabet must be nonempty");
        Monoid { q: q as u64 }
    }

    pub fn q(&self) -> usize {
        self.q as usize
    }

    /// Number of digits of `x`.
    pub fn len(&self, mut x: u64) -> usize {
        let mut l = 0;
        while x > 0 {
            let d = (x - 1) % self.q + 1;
            x = (x - d) / self.q;
            l += 1;
        }
        l
    }

    /// Digits of `x`, most significant first.
    pub fn digits(&self, mut x: u64) -> Vec<usize> {
        let mut out = Vec::new();
        while x > 0 {
            let d = (x - 1) % self.q + 1;
            out.push(d as usize);
            x = (x - d) / self.q;
        }
        out.reverse();
        out
    }

    /// The integer with the given digits, each in `1..=q`.
    pub fn index(&self, digits: &[usize]) -> u64 {
        digits.iter().fold(0, |acc, &d| {
            assert!((1..=self.q as usize).contains(&d), "digit {d} out of range");
            acc * self.q + d as u64
        })
    }

    /// Concatenation of digit strings: `x q^len(y) + y`.
    pub fn star(&self, x: u64, y: u64) -> u64 {
        x * self.q.pow(self.len(y) as u32) + y
    }

    /// The `k`-fold star power of `x`.
    pub fn diamond(&self, x: u64, k: usize) -> u64 {
        (0..k).fold(0, |acc, _| self.star(acc, x))
    }

    /// Number of words of length at most `d`.
    pub fn count_upto(&self, d: usize) -> usize {
        (0..=d).map(|l| (self.q as usize).pow(l as u32)).sum()
    }
}

/// A sparse square matrix over the words of length at most some depth,
/// stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    cols: Vec<BTreeMap<usize, Scalar>>,
}

impl FockOperator {
    pub fn get(&self, row: usize, col: usize) -> Scalar {
        self.cols[col].get(&row).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(BTreeMap::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(&r, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.dim());
        for (r, c, v) in self.entries() {
            out.cols[r].insert(c, v.clone());
        }
        out
    }

    /// Matrix-vector product on a dense vector.
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.dim()];
        for (c, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (&r, a) in &self.cols[c] {
                out[r] += &(a * x);
            }
        }
        out
    }

    fn add_entry(col: &mut BTreeMap<usize, Scalar>, row: usize, v: Scalar) {
        if v.is_zero() {
            return;
        }
        let slot = col.entry(row).or_insert_with(Scalar::zero);
        *slot += &v;
        if slot.is_zero() {
            col.remove(&row);
        }
    }
}

impl Operator for FockOperator {
    fn dim(&self) -> usize {
        self.cols.len()
    }

    fn identity(dim: usize) -> Self {
        FockOperator {
            cols: (0..dim).map(|i| BTreeMap::from([(i, Scalar::one())])).collect(),
        }
    }

    fn zero(dim: usize) -> Self {
        FockOperator {
            cols: vec![BTreeMap::new(); dim],
        }
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, c, v) in other.entries() {
            Self::add_entry(&mut out.cols[c], r, v.clone());
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim());
        for (j, col) in other.cols.iter().enumerate() {
            for (&k, b) in col {
                for (&i, a) in &self.cols[k] {
                    Self::add_entry(&mut out.cols[j], i, a * b);
                }
            }
        }
        out
    }

    fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim());
        }
        FockOperator {
            cols: self
                .cols
                .iter()
                .map(|col| col.iter().map(|(&r, v)| (r, v * c)).collect())
                .collect(),
        }
    }
}

/// The generator `x_θ = (prepend θ) + Σ_{j≥0} κ_{j+1} (strip θ^j)` restricted to
/// the words of length at most `depth`. `kappa` lists `κ_1, κ_2, ...`.
pub fn build_generator(theta: usize, q: usize, kappa: &[Scalar], depth: usize) -> FockOperator {
    let monoid = Monoid::new(q);
    let dim = monoid.count_upto(depth);
    let mut op = FockOperator::zero(dim);
    for k in 0..dim as u64 {
        let digits = monoid.digits(k);
        let col = &mut op.cols[k as usize];
        if digits.len() < depth {
            col.insert(monoid.star(theta as u64, k) as usize, Scalar::one());
        }
        let run = digits.iter().take_while(|&&d| d == theta).count();
        for j in 0..=run {
            if let Some(c) = kappa.get(j).filter(|c| !c.is_zero()) {
                let row = monoid.index(&digits[j..]) as usize;
                FockOperator::add_entry(col, row, c.clone());
            }
        }
    }
    op
}

/// Words as (length, code) with code the plain base-q value of the digits
/// shifted down by one.
type Key = (u32, u64);
type SparseVec = HashMap<Key, Scalar>;

fn add_to(v: &mut SparseVec, k: Key, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match v.get_mut(&k) {
        Some(x) => {
            *x += &c;
            if x.is_zero() {
                v.remove(&k);
            }
        }
        None => {
            v.insert(k, c);
        }
    }
}

fn dot(a: &SparseVec, b: &SparseVec) -> Scalar {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum()
}

struct Model {
    q: u64,
    pow: Vec<u64>,
    kappa: Vec<Vec<Scalar>>,
}

impl Model {
    fn new(laws: &[Law], max_len: usize) -> Result<Model> {
        let q = laws.len() as u64;
        let mut pow = vec![1u64];
        for _ in 0..=max_len {
            let next = pow.last().unwrap().checked_mul(q).ok_or(Error::DepthOverflow {
                dim: usize::MAX,
                cap: u64::MAX as usize,
            })?;
            pow.push(next);
        }
        let kappa = laws
            .iter()
            .map(|l| l.cumulants(max_len + 1))
            .collect::<Result<_>>()?;
        Ok(Model { q, pow, kappa })
    }

    fn leading_run(&self, len: u32, code: u64, digit: u64) -> u32 {
        let mut r = 0;
        while r < len && (code / self.pow[(len - 1 - r) as usize]) % self.q == digit {
            r += 1;
        }
        r
    }

    /// `x_θ v` (or its transpose), dropping words longer than `cap`.
    fn apply(&self, theta: usize, transposed: bool, v: &SparseVec, cap: u32) -> SparseVec {
        let t = (theta - 1) as u64;
        let kap = &self.kappa[theta - 1];
        let mut out = SparseVec::with_capacity(v.len() * 2);
        for (&(len, code), c) in v {
            if !transposed {
                if len < cap {
                    add_to(&mut out, (len + 1, code + t * self.pow[len as usize]), c.clone());
                }
                let run = self.leading_run(len, code, t);
                for j in 0..=run {
                    let k = &kap[j as usize];
                    if !k.is_zero() {
                        let l = len - j;
                        add_to(&mut out, (l, code % self.pow[l as usize]), c * k);
                    }
                }
            } else {
                if len > 0 && code / self.pow[(len - 1) as usize] == t {
                    add_to(&mut out, (len - 1, code % self.pow[(len - 1) as usize]), c.clone());
                }
                let mut nc = code;
                let mut l = len;
                for k in kap {
                    if l > cap {
                        break;
                    }
                    if !k.is_zero() {
                        add_to(&mut out, (l, nc), c * k);
                    }
                    nc += t * self.pow[l as usize];
                    l += 1;
                }
            }
        }
        out
    }

    /// `F v` for a block vector, where `F` is `f` evaluated at the generators.
    fn apply_poly(&self, f: &MatNCPoly, transposed: bool, v: &[SparseVec], cap: u32) -> Vec<SparseVec> {
        let p = f.p();
        let deg = f.degree().unwrap_or(0) as u32;
        let mut out = vec![SparseVec::new(); p];
        for (s, vs) in v.iter().enumerate() {
            if vs.is_empty() {
                continue;
            }
            let mut cache: HashMap<Vec<usize>, SparseVec> = HashMap::new();
            cache.insert(Vec::new(), vs.clone());
            for (r, o) in out.iter_mut().enumerate() {
                for (w, c) in f.get(r, s).terms() {
                    let val = self.word_value(&w.0, transposed, cap, deg, &mut cache);
                    for (k, x) in val {
                        add_to(o, *k, x * c);
                    }
                }
            }
        }
        out
    }

    fn word_value<'c>(
        &self,
        w: &[usize],
        transposed: bool,
        cap: u32,
        deg: u32,
        cache: &'c mut HashMap<Vec<usize>, SparseVec>,
    ) -> &'c SparseVec {
        if !cache.contains_key(w) {
            self.word_value(&w[1..], transposed, cap, deg, cache);
            // each remaining letter shortens a word by at most one
            let slack = deg - w.len() as u32;
            let v = self.apply(w[0], transposed, &cache[&w[1..]], cap + slack);
            cache.insert(w.to_vec(), v);
        }
        &cache[w]
    }
}

fn check_support(v: &[SparseVec], cap: usize) -> Result<()> {
    let dim: usize = v.iter().map(HashMap::len).sum();
    if dim > cap {
        return Err(Error::DepthOverflow { dim, cap });
    }
    Ok(())
}

fn check_vars(f: &MatNCPoly, laws: &[Law]) -> Result<()> {
    if f.max_var() > laws.len() {
        return Err(Error::dims(format!(
            "x{} used but only {} laws given",
            f.max_var(),
            laws.len()
        )));
    }
    if laws.is_empty() {
        return Err(Error::Input("at least one law is required".into()));
    }
    Ok(())
}

/// Moments `φ_p(F^k)`, `k = 0..=m`, of `F = f(x_1, ..., x_q)` with `x_θ` free
/// with the given laws, by exact computation in the Fock model.
///
/// Meets in the middle: `φ(F^k) = ⟨(F^T)^{k-a} e, F^a e⟩` with `a = ⌈k/2⌉`,
/// on sparse vectors. Fails with `DepthOverflow` once a vector's support
/// exceeds `cap`.
pub fn moment_oracle(f: &MatNCPoly, laws: &[Law], m: usize, cap: usize) -> Result<Vec<Scalar>> {
    check_vars(f, laws)?;
    let p = f.p();
    let deg = f.degree().unwrap_or(0);
    let max_len = deg * m;
    let model = Model::new(laws, max_len + deg)?;
    let ft = f.transpose();
    let half_up = m.div_ceil(2);
    let half_down = m / 2;
    let mut moments = vec![Scalar::zero(); m + 1];
    for i in 0..p {
        let mut start = vec![SparseVec::new(); p];
        start[i].insert((0, 0), Scalar::one());
        let mut vs = vec![start.clone()];
        for a in 1..=half_up {
            let next = model.apply_poly(f, false, &vs[a - 1], (a * deg) as u32);
            check_support(&next, cap)?;
            vs.push(next);
        }
        let mut ws = vec![start];
        for b in 1..=half_down {
            let next = model.apply_poly(&ft, true, &ws[b - 1], ((m - b) * deg) as u32);
            check_support(&next, cap)?;
            ws.push(next);
        }
        for (k, mk) in moments.iter_mut().enumerate() {
            let a = k.div_ceil(2);
            let b = k - a;
            *mk += &vs[a].iter().zip(&ws[b]).map(|(x, y)| dot(x, y)).sum::<Scalar>();
        }
    }
    let inv_p = Scalar::new(1, p as i64);
    Ok(moments.into_iter().map(|x| x * &inv_p).collect())
}

/// Same moments as [`moment_oracle`], by materializing the generators at depth
/// `deg(f) m` and evaluating `f` on them.
pub fn moment_oracle_dense(f: &MatNCPoly, laws: &[Law], m: usize, cap: usize) -> Result<Vec<Scalar>> {
    check_vars(f, laws)?;
    let q = laws.len();
    let p = f.p();
    let depth = f.degree().unwrap_or(0) * m;
    let monoid = Monoid::new(q);
    let dim = (0..=depth).try_fold(0usize, |acc, l| {
        q.checked_pow(l as u32).and_then(|x| acc.checked_add(x))
    });
    match dim {
        Some(d) if d.saturating_mul(p) <= cap => {}
        _ => {
            return Err(Error::DepthOverflow {
                dim: dim.map_or(usize::MAX, |d| d.saturating_mul(p)),
                cap,
            })
        }
    }
    let ops: Vec<FockOperator> = laws
        .iter()
        .enumerate()
        .map(|(t, law)| Ok(build_generator(t + 1, q, &law.cumulants(depth + 1)?, depth)))
        .collect::<Result<_>>()?;
    let blocks = evaluate(f, &ops)?;
    let dim = monoid.count_upto(depth);
    let mut moments = vec![Scalar::zero(); m + 1];
    for i in 0..p {
        let mut v = vec![vec![Scalar::zero(); dim]; p];
        v[i][0] = Scalar::one();
        for (k, mk) in moments.iter_mut().enumerate() {
            if k > 0 {
                v = (0..p)
                    .map(|r| {
                        (0..p).fold(vec![Scalar::zero(); dim], |mut acc, s| {
                            for (a, x) in acc.iter_mut().zip(blocks[r * p + s].apply(&v[s])) {
                                *a += &x;
                            }
                            acc
                        })
                    })
                    .collect();
            }
            *mk += &v[i][0];
        }
    }
    let inv_p = Scalar::new(1, p as i64);
    Ok(moments.into_iter().map(|x| x * &inv_p).collect())
}

/// `φ(x̂_{θ_1}^{a_1} ⋯ x̂_{θ_k}^{a_k})` where `x̂^a = x^a - φ(x^a)`, computed on
/// words of length at most `depth`.
pub fn centered_product_moment(laws: &[Law], depth: usize, factors: &[(usize, u32)]) -> Result<Scalar> {
    let model = Model::new(laws, depth)?;
    let mut u = SparseVec::new();
    u.insert((0, 0), Scalar::one());
    for &(theta, a) in factors.iter().rev() {
        let mean = laws[theta - 1].moments(a as usize)?[a as usize].clone();
        let mut next = u.clone();
        for _ in 0..a {
            next = model.apply(theta, false, &next, depth as u32);
        }
        for (k, x) in &u {
            add_to(&mut next, *k, -(x * &mean));
        }
        u = next;
    }
    Ok(u.get(&(0, 0)).cloned().unwrap_or_else(Scalar::zero))
}

/// Checks that every alternating product of `k` centered powers (exponents 1
/// and 2) of distinct neighbouring generators has vanishing state.
pub fn free_independence_check(laws: &[Law], depth: usize, k: usize) -> Result<bool> {
    let q = laws.len();
    let mut seqs: Vec<Vec<(usize, u32)>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &seqs {
            for theta in 1..=q {
                if s.last().is_some_and(|&(t, _)| t == theta) {
                    continue;
                }
                for a in 1..=2 {
                    let mut e = s.clone();
                    e.push((theta, a));
                    next.push(e);
                }
            }
        }
        seqs = next;
    }
    for s in &seqs {
        if !centered_product_moment(laws, depth, s)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
