//! Independent oracles and seeded generators shared by the integration tests.
#![allow(dead_code)]

use freealg::algcert::BivarPoly;
use freealg::ncpoly::{MatNCPoly, Monomial, NCPoly};
use freealg::Scalar;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn ints(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::from(x)).collect()
}

/// `C(2k, k)` by the product formula.
pub fn central_binomial(k: u64) -> Scalar {
    (1..=k).fold(Scalar::from(1), |acc, i| acc * Scalar::new((k + i) as i64, i as i64))
}

/// Closed walks of each length `0..len` from the root of the `d`-regular tree,
/// by dynamic programming over the distance from the root.
pub fn tree_closed_walks(d: u64, len: usize) -> Vec<Scalar> {
    let mut dist = vec![Scalar::from(1)];
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(dist[0].clone());
        let mut next = vec![Scalar::from(0); dist.len() + 1];
        for (k, c) in dist.iter().enumerate() {
            if k == 0 {
                next[1] = &next[1] + &(c * &Scalar::from(d as i64));
            } else {
                next[k - 1] = &next[k - 1] + c;
                next[k + 1] = &next[k + 1] + &(c * &Scalar::from(d as i64 - 1));
            }
        }
        dist = next;
    }
    out
}

/// Number of words of each length `0..len` in two involutions `s1, s2` that
/// reduce to the identity of the free product of two groups of order two.
pub fn dihedral_identity_words(len: usize) -> Vec<Scalar> {
    // state: reduced word given by its length and last letter
    let mut states: std::collections::BTreeMap<(usize, u8), u64> = [((0, 0), 1)].into();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(Scalar::from(*states.get(&(0, 0)).unwrap_or(&0) as i64));
        let mut next = std::collections::BTreeMap::new();
        for (&(l, last), &c) in &states {
            for letter in [1u8, 2] {
                let key = if l > 0 && last == letter {
                    // cancel; the new last letter is the other one unless empty
                    if l == 1 {
                        (0, 0)
                    } else {
                        (l - 1, 3 - letter)
                    }
                } else {
                    (l + 1, letter)
                };
                *next.entry(key).or_insert(0) += c;
            }
        }
        states = next;
    }
    out
}

/// Roots of `Σ a_j y^j` (leading coefficient nonzero) by the Aberth iteration,
/// started on circles whose radii come from the magnitudes of the coefficients.
/// `None` when the iteration does not settle.
pub fn polynomial_roots(a: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.len() - 1;
    if n == 0 {
        return Some(Vec::new());
    }
    let logs: Vec<f64> = a.iter().map(|c| if c.norm() > 0.0 { c.norm().ln() } else { f64::NEG_INFINITY }).collect();
    let mut hull: Vec<usize> = Vec::new();
    for j in 0..=n {
        if logs[j] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let (i0, i1) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (i1 - i0) as f64 * (logs[j] - logs[i0]) - (logs[i1] - logs[i0]) * (j - i0) as f64;
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut z = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let k = w[1] - w[0];
        let r = ((logs[w[0]] - logs[w[1]]) / k as f64).exp();
        for m in 0..k {
            let angle = 2.0 * std::f64::consts::PI * (m as f64 + 0.25) / k as f64 + 0.4 * z.len() as f64;
            z.push(Complex64::from_polar(r, angle));
        }
    }
    if z.len() != n {
        return None;
    }
    let eval = |x: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in a.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= step;
            worst = worst.max(step.norm() / z[i].norm().max(f64::MIN_POSITIVE));
        }
        if worst < 1e-13 {
            return Some(z);
        }
    }
    None
}

/// Root valuations of `P(1/z, y)` in `y`, with the zero roots removed,
/// estimated from the root magnitudes at `z = 10^6` and `z = 10^8`.
/// `None` when the numerics do not settle.
pub fn numeric_valuation_oracle(p: &BivarPoly) -> Option<Vec<f64>> {
    let degy = p.degy();
    let content = (0..=degy).find(|&j| !p.y_coeff(j).is_empty())?;
    let roots_at = |z: f64| {
        let x = 1.0 / z;
        let coeffs: Vec<Complex64> = (content..=degy)
            .map(|j| {
                let v: f64 = p.y_coeff(j).iter().map(|(i, c)| c.to_f64() * x.powi(*i as i32)).sum();
                Complex64::new(v, 0.0)
            })
            .collect();
        let mut r = polynomial_roots(&coeffs)?;
        r.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        Some(r)
    };
    let (z1, z2) = (1e6_f64, 1e8_f64);
    let r1 = roots_at(z1)?;
    let r2 = roots_at(z2)?;
    let mut v: Vec<f64> = r1
        .iter()
        .zip(&r2)
        .map(|(a, b)| (b.norm().ln() - a.norm().ln()) / (z2.ln() - z1.ln()))
        .collect();
    if v.iter().any(|x| !x.is_finite()) {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v)
}

/// A random polynomial with `deg_x, deg_y <= max_deg`, coefficients in
/// `-c..=c` and a nonzero `x^0` part.
pub fn random_bivar(rng: &mut ChaCha8Rng, max_deg: u32, c: i64) -> BivarPoly {
    loop {
        let mut terms = Vec::new();
        for i in 0..=max_deg {
            for j in 0..=max_deg {
                if rng.gen_bool(0.4) {
                    terms.push((i, j, rng.gen_range(-c..=c)));
                }
            }
        }
        let p = BivarPoly::from_ints(&terms);
        let x_free = p.terms().any(|(i, _, _)| i == 0);
        if x_free && p.degy() >= 1 {
            return p;
        }
    }
}

/// A random NC polynomial with at most `terms` terms of degree at most `deg`
/// in `x1..xq`, coefficients in `-2..=2`.
pub fn random_ncpoly(rng: &mut ChaCha8Rng, q: usize, deg: usize, terms: usize) -> NCPoly {
    let count = rng.gen_range(1..=terms);
    let mut out = NCPoly::zero();
    for _ in 0..count {
        let len = rng.gen_range(0..=deg);
        let word: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=q)).collect();
        let c = rng.gen_range(-2..=2);
        out = out.add(&NCPoly::term(Monomial(word), Scalar::from(c)));
    }
    out
}

pub fn random_matncpoly(rng: &mut ChaCha8Rng, p: usize, q: usize, deg: usize, terms: usize) -> MatNCPoly {
    let entries: Vec<NCPoly> = (0..p * p).map(|_| random_ncpoly(rng, q, deg, terms)).collect();
    MatNCPoly::new(p, entries).expect("square")
}
