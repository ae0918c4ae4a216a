//! Fixed-point solution of the generalized Schwinger-Dyson equation
//! `I + a0 g + Σ_θ Σ_{j≥2} κ_j^θ (aθ g)^j = 0` and checks of its side conditions.

mod exploit;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::realize::SDData;
use crate::scalar::Scalar;
use crate::series::{MatSeries, TruncLaurent};

pub use exploit::exploit_check;

/// Outcome of the nondegeneracy check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nondegeneracy {
    /// The linearized map has a determinant of determinate finite valuation.
    Holds,
    /// The determinant is exactly zero.
    Fails,
    /// The determinant vanished to every working precision tried.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SDSolution {
    pub g: MatSeries,
    pub order: usize,
    /// Valuation bound of the residual; `None` when it is exactly zero.
    pub residual_val: Option<i64>,
    pub spectral_ok: Vec<bool>,
    pub nondegenerate: Nondegeneracy,
    pub iterations: usize,
}

/// Rank factorization `aθ = U V` of each coefficient matrix.
struct Factors {
    u: Vec<QMatrix>,
    v: Vec<QMatrix>,
}

impl Factors {
    fn new(data: &SDData) -> Self {
        let (u, v) = data.a.iter().map(QMatrix::rank_factorization).unzip();
        Factors { u, v }
    }

    /// `W = V g U`, which carries the spectrum of `aθ g` apart from zeros.
    fn w(&self, theta: usize, g: &MatSeries) -> MatSeries {
        let vg = MatSeries::left_mul_q(&self.v[theta], g);
        MatSeries::right_mul_q(&vg, &self.u[theta])
    }
}

/// Powers `W^0, W^1, ...` up to the point where `W.n()` consecutive powers vanish
/// at a floor no higher than `target`.
fn powers_until_zero(w: &MatSeries, target: Option<i64>) -> Result<Vec<MatSeries>> {
    let r = w.n();
    let mut out = vec![MatSeries::identity(r)];
    if r == 0 {
        return Ok(out);
    }
    let cap = 4 * (target.map_or(12, |t| t.unsigned_abs().min(10_000)) as usize + 4) * (r + 1);
    let mut run = 0;
    while run < r {
        if out.len() > cap {
            return Err(Error::NotSummable(format!(
                "powers of a {r}x{r} matrix still nonzero after {cap} steps"
            )));
        }
        let next = (out.last().unwrap() * w).truncate_if_finer(target);
        if vanishes(&next, target) {
            run += 1;
        } else {
            run = 0;
        }
        out.push(next);
    }
    // the trailing vanishing powers carry no information
    out.truncate(out.len() - r);
    Ok(out)
}

fn vanishes(m: &MatSeries, target: Option<i64>) -> bool {
    m.is_zero_window()
        && match (m.floor(), target) {
            (None, _) => true,
            (Some(f), Some(t)) => f <= t,
            (Some(_), None) => false,
        }
}

/// `Φ = Σ_{j≥2} κ_j W^{j-1}` from precomputed powers.
fn power_sum(data: &SDData, theta: usize, powers: &[MatSeries], target: Option<i64>) -> Result<MatSeries> {
    let r = powers[0].n();
    let mut acc = MatSeries::zeros(r, r);
    for (k, pw) in powers.iter().enumerate().skip(1) {
        if vanishes(pw, target) {
            continue;
        }
        if data.kappa_complete[theta] && k + 1 > data.kappa[theta].len() + 1 {
            break;
        }
        let kappa = data.kappa_j(theta, k + 1)?;
        if !kappa.is_zero() {
            acc = &acc + &pw.scale(&kappa);
        }
    }
    Ok(acc)
}

/// `Σ_θ Σ_{j≥2} κ_j (aθ g)^j`, truncated at `target`.
fn nonlinear_term(data: &SDData, f: &Factors, g: &MatSeries, target: Option<i64>) -> Result<MatSeries> {
    let n = data.n;
    let mut acc = MatSeries::zeros(n, n);
    for theta in 0..data.q() {
        if f.u[theta].cols() == 0 || (data.kappa_complete[theta] && data.kappa[theta].is_empty()) {
            continue;
        }
        let w = f.w(theta, g);
        let powers = powers_until_zero(&w, target)?;
        let phi = power_sum(data, theta, &powers, target)?;
        if phi.entries().iter().all(TruncLaurent::is_exact_zero) {
            continue;
        }
        let vg = MatSeries::left_mul_q(&f.v[theta], g);
        let term = MatSeries::left_mul_q(&f.u[theta], &(&phi * &vg));
        acc = &acc + &term;
    }
    Ok(acc.truncate_if_finer(target))
}

fn a0_series(data: &SDData) -> MatSeries {
    MatSeries::pencil(&data.a0_const, &data.a0_z)
}

/// Left side of the equation, evaluated on the truncation of `g`.
pub fn residual(data: &SDData, g: &MatSeries) -> Result<MatSeries> {
    let f = Factors::new(data);
    let target = g.floor();
    let lin = &a0_series(data) * g;
    let nl = nonlinear_term(data, &f, g, target)?;
    Ok(&(&MatSeries::identity(data.n) + &lin) + &nl)
}

/// Iterates `g ← -a0^{-1} (I + Σ_θ Σ_j κ_j (aθ g)^j)` from `g = -a0^{-1}` at a
/// working floor below `-order` until two iterates agree.
fn fixed_point(data: &SDData, order: usize) -> Result<(MatSeries, usize)> {
    let n = data.n;
    let a0 = a0_series(data);
    if a0.det()?.is_exact_zero() {
        return Err(Error::SingularA0);
    }
    let f = Factors::new(data);
    let t = order as i64;
    let mut slack = n as i64 + 2;
    for _ in 0..4 {
        let work = -t - slack;
        let a0_inv = a0.mat_inv(work)?;
        let mut g = -&a0_inv;
        let mut best: Option<i64> = None;
        let mut stall = 0;
        let mut iterations = 0;
        let max_iter = (t + slack) as usize * (n + 1) + 10;
        let converged = loop {
            iterations += 1;
            let rhs = &MatSeries::identity(n) + &nonlinear_term(data, &f, &g, Some(work))?;
            let next = -&(&a0_inv * &rhs);
            let diff = next
                .entries()
                .iter()
                .zip(g.entries())
                .filter_map(|(a, b)| a.disagreement(b))
                .max();
            g = next;
            match diff {
                None => break true,
                Some(d) if best.map_or(true, |b| d < b) => {
                    best = Some(d);
                    stall = 0;
                }
                Some(_) => {
                    stall += 1;
                    if stall >= n.max(2) {
                        return Err(Error::NonContractive {
                            iterations,
                            floor: best.unwrap_or(work),
                        });
                    }
                }
            }
            if iterations >= max_iter {
                break false;
            }
        };
        if !converged {
            return Err(Error::NonContractive {
                iterations,
                floor: best.unwrap_or(work),
            });
        }
        if g.floor().map_or(true, |fl| fl <= -t) {
            return Ok((g, iterations));
        }
        slack *= 2;
    }
    Err(Error::InsufficientPrecision(format!(
        "solution could not be carried down to z^-{order}"
    )))
}

/// When every cumulant of order two and up vanishes the equation is linear,
/// `I + a0 g = 0`; if the truncated solution is a Laurent polynomial that
/// solves it exactly, it is returned without truncation.
fn exact_linear_solution(data: &SDData, g: &MatSeries) -> Result<Option<MatSeries>> {
    let linear = data.kappa.iter().all(Vec::is_empty) && data.kappa_complete.iter().all(|&c| c);
    if !linear {
        return Ok(None);
    }
    let exact = g.map(|e| TruncLaurent::from_terms(e.terms().map(|(k, c)| (k, c.clone())), None));
    let res = &MatSeries::identity(data.n) + &(&a0_series(data) * &exact);
    Ok(res.entries().iter().all(TruncLaurent::is_exact_zero).then_some(exact))
}

/// Solves the equation through `z^{-order}` and runs the side-condition checks.
pub fn solve_gsde(data: &SDData, order: usize) -> Result<SDSolution> {
    let (mut g, iterations) = fixed_point(data, order)?;
    if let Some(exact) = exact_linear_solution(data, &g)? {
        g = exact;
    }
    let res = residual(data, &g)?;
    let residual_val = if res.entries().iter().all(TruncLaurent::is_exact_zero) {
        None
    } else {
        res.val_bound()
    };
    let spectral_ok = check_gsde1(data, &g)?;
    let nondegenerate = check_gsde3(data, &g, order)?;
    Ok(SDSolution {
        g,
        order,
        residual_val,
        spectral_ok,
        nondegenerate,
        iterations,
    })
}

/// `-(1/p) Σ_{i<p} g(i, i)`.
pub fn stieltjes_from_g(g: &MatSeries, p: usize) -> Result<TruncLaurent> {
    if p == 0 || p > g.rows() || p > g.cols() {
        return Err(Error::dims(format!("p = {p} for a {}x{} matrix", g.rows(), g.cols())));
    }
    let tr = (0..p).fold(TruncLaurent::zero(), |acc, i| &acc + g.get(i, i));
    Ok(tr.scale(&Scalar::new(-1, p as i64)))
}

/// True when every `e_i(m)` lies in `z^{-1} Q[[z^{-1}]]`.
pub fn spectral_condition(m: &MatSeries) -> Result<bool> {
    for e in m.charpoly_e()? {
        if let Some(v) = e.val_bound() {
            if v > -1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The spectral condition on `aθ g` for every θ.
pub fn check_gsde1(data: &SDData, g: &MatSeries) -> Result<Vec<bool>> {
    let f = Factors::new(data);
    (0..data.q()).map(|t| spectral_condition(&f.w(t, g))).collect()
}

/// Checks that the derivative of the equation's left side in `g`,
/// `h ↦ a0 h + Σ_θ Σ_j κ_j Σ_ν (aθ g)^ν (aθ h) (aθ g)^{j-1-ν}`, is invertible,
/// using cumulants through order `j`. Floors are refined from `-4` down to `-j`.
pub fn check_gsde3(data: &SDData, g: &MatSeries, j: usize) -> Result<Nondegeneracy> {
    let j = j as i64;
    let mut floor = -(4.min(j));
    loop {
        let lin = linearized_map(data, g, floor, j as usize)?;
        let det = lin.det_elimination(floor)?;
        if det.is_exact_zero() {
            return Ok(Nondegeneracy::Fails);
        }
        if det.top().is_some() {
            return Ok(Nondegeneracy::Holds);
        }
        if floor <= -j {
            return Ok(Nondegeneracy::Inconclusive);
        }
        floor = (2 * floor).max(-j);
    }
}

/// The `n² x n²` matrix of the linearized map at `floor`; column `(i, j)` is the
/// image of the matrix unit `E_ij`, row `(r, s)` its entry.
fn linearized_map(data: &SDData, g: &MatSeries, floor: i64, max_j: usize) -> Result<MatSeries> {
    let n = data.n;
    let g = g.truncate(floor);
    let f = Factors::new(data);
    let a0 = a0_series(data);
    let mut m = vec![TruncLaurent::zero(); n * n * n * n];
    let idx = |r: usize, s: usize, i: usize, j: usize| (r * n + s) * n * n + (i * n + j);
    for r in 0..n {
        for i in 0..n {
            let a = a0.get(r, i);
            if !a.is_exact_zero() {
                for j in 0..n {
                    m[idx(r, j, i, j)] = a.clone();
                }
            }
        }
    }
    for theta in 0..data.q() {
        let (u, v) = (&f.u[theta], &f.v[theta]);
        if u.cols() == 0 {
            continue;
        }
        let w = f.w(theta, &g);
        let powers = powers_until_zero(&w, Some(floor))?;
        let vg = MatSeries::left_mul_q(v, &g);
        let kap = |k: usize| -> Result<Scalar> {
            if k < 2 || k > max_j {
                return Ok(Scalar::zero());
            }
            data.kappa_j(theta, k)
        };
        // (aθ g)^μ = U W^{μ-1} V g for μ ≥ 1
        let k_max = powers.len();
        for mu in 0..=k_max {
            // Ψ_μ = Σ_ν κ_{ν+μ+1} W^ν
            let mut psi = MatSeries::zeros(u.cols(), u.cols());
            for (nu, pw) in powers.iter().enumerate() {
                if nu + mu == 0 || vanishes(pw, Some(floor)) {
                    continue;
                }
                let k = kap(nu + mu + 1)?;
                if !k.is_zero() {
                    psi = &psi + &pw.scale(&k);
                }
            }
            if psi.entries().iter().all(TruncLaurent::is_exact_zero) {
                continue;
            }
            let x = MatSeries::right_mul_q(&MatSeries::left_mul_q(u, &psi), v);
            let y = if mu == 0 {
                MatSeries::identity(n)
            } else {
                let pw = &powers[mu - 1];
                if vanishes(pw, Some(floor)) {
                    continue;
                }
                MatSeries::left_mul_q(u, &(pw * &vg))
            };
            for (r, i) in (0..n).flat_map(|r| (0..n).map(move |i| (r, i))) {
                let xe = x.get(r, i);
                if xe.is_zero_window() {
                    continue;
                }
                for jj in 0..n {
                    for s in 0..n {
                        let ye = y.get(jj, s);
                        if ye.is_zero_window() {
                            continue;
                        }
                        let k = idx(r, s, i, jj);
                        m[k] = &m[k] + &(xe * ye);
                    }
                }
            }
        }
    }
    Ok(MatSeries::new(n * n, n * n, m).truncate_if_finer(Some(floor)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::laws::{cumulants_to_moments, Law};
    use crate::ncpoly::parse;
    use crate::realize::{build_sd_data, realize};

    fn semicircle_data() -> SDData {
        SDData {
            n: 1,
            p: 1,
            a0_const: QMatrix::zeros(1, 1),
            a0_z: QMatrix::identity(1),
            a: vec![QMatrix::identity(1)],
            kappa: vec![vec![Scalar::one()]],
            kappa_complete: vec![true],
        }
    }

    #[test]
    fn scalar_semicircle() {
        let data = semicircle_data();
        let sol = solve_gsde(&data, 12).unwrap();
        let g = sol.g.get(0, 0);
        let catalan = [1, 1, 2, 5, 14, 42];
        for (k, c) in catalan.iter().enumerate() {
            assert_eq!(g.coeff(-(2 * k as i64) - 1), Scalar::from(-c));
            assert!(g.coeff(-(2 * k as i64) - 2).is_zero());
        }
        assert!(sol.residual_val.map_or(true, |v| v <= -12));
        assert_eq!(sol.spectral_ok, vec![true]);
        assert_eq!(sol.nondegenerate, Nondegeneracy::Holds);
        let s = stieltjes_from_g(&sol.g, 1).unwrap();
        assert_eq!(s.coeff(-5), Scalar::from(2));
    }

    #[test]
    fn residual_examples() {
        let data = semicircle_data();
        let r = residual(&data, &MatSeries::zeros(1, 1)).unwrap();
        assert_eq!(r, MatSeries::identity(1));
        let sol = solve_gsde(&data, 10).unwrap();
        let bump = MatSeries::from_fn(1, 1, |_, _| TruncLaurent::monomial(Scalar::one(), -1));
        let r = residual(&data, &(&sol.g + &bump)).unwrap();
        assert!(r.val_bound().unwrap() >= -1);
    }

    #[test]
    fn no_cumulants_gives_inverse() {
        let mut data = semicircle_data();
        data.kappa = vec![vec![]];
        data.a0_const = QMatrix::from_ints(&[&[2]]);
        let sol = solve_gsde(&data, 8).unwrap();
        let want = MatSeries::pencil(&data.a0_const, &data.a0_z).mat_inv(-8).unwrap();
        assert!(sol.g.get(0, 0).agrees_with(&-want.get(0, 0)));
        assert!(sol.residual_val.unwrap() <= -8);
        data.a0_z = QMatrix::zeros(1, 1);
        data.a0_const = QMatrix::zeros(1, 1);
        assert!(matches!(solve_gsde(&data, 8), Err(Error::SingularA0)));
    }

    #[test]
    fn spectral_examples() {
        let t = |c: i64, e: i64| TruncLaurent::monomial(Scalar::from(c), e);
        let m = MatSeries::new(2, 2, vec![t(1, 0), TruncLaurent::zero(), TruncLaurent::zero(), t(1, -1)]);
        assert!(!spectral_condition(&m).unwrap());
        let m = MatSeries::new(2, 2, vec![t(1, -1), t(1, 0), TruncLaurent::zero(), t(1, -1)]);
        assert!(spectral_condition(&m).unwrap());
    }

    #[test]
    fn pipeline_matches_cumulant_moments() {
        let cases: Vec<(&str, Vec<Law>)> = vec![
            ("x1", vec![Law::semicircle(Scalar::one())]),
            ("x1", vec![Law::point_mass(Scalar::from(2))]),
            ("x1", vec![Law::from_cumulants(vec![Scalar::from(1), Scalar::from(-1), Scalar::from(2)])]),
        ];
        for (text, laws) in cases {
            let f = parse(text).unwrap();
            let data = build_sd_data(&realize(&f), &laws, 12).unwrap();
            let sol = solve_gsde(&data, 10).unwrap();
            let s = stieltjes_from_g(&sol.g, data.p).unwrap();
            let m = cumulants_to_moments(&laws[0].cumulants(10).unwrap(), 9);
            for (k, mk) in m.iter().enumerate() {
                assert_eq!(&s.coeff(-(k as i64) - 1), mk, "{text} m_{k}");
            }
        }
    }

    #[test]
    fn arcsine_pipeline() {
        let f = parse("x1 + x2").unwrap();
        let laws = [Law::bernoulli_pm1(), Law::bernoulli_pm1()];
        let data = build_sd_data(&realize(&f), &laws, 60).unwrap();
        let sol = solve_gsde(&data, 12).unwrap();
        let s = stieltjes_from_g(&sol.g, 1).unwrap();
        for (k, c) in [1, 2, 6, 20, 70, 252].iter().enumerate() {
            assert_eq!(s.coeff(-(2 * k as i64) - 1), Scalar::from(*c));
        }
        assert!(sol.spectral_ok.iter().all(|&b| b));
        assert_eq!(sol.nondegenerate, Nondegeneracy::Holds);
    }

    #[test]
    fn exploit_blocks() {
        let f = parse("x1").unwrap();
        let data = build_sd_data(&realize(&f), &[Law::semicircle(Scalar::one())], 20).unwrap();
        let sol = solve_gsde(&data, 10).unwrap();
        assert!(exploit_check(&data, &sol.g, &[], 5, 10_000).unwrap());
        assert!(exploit_check(&data, &sol.g, &[1], 5, 10_000).unwrap());
        let f = parse("x1 + x2").unwrap();
        let laws = [Law::bernoulli_pm1(), Law::bernoulli_pm1()];
        let data = build_sd_data(&realize(&f), &laws, 40).unwrap();
        let sol = solve_gsde(&data, 10).unwrap();
        for w in [&[][..], &[1], &[2, 1], &[1, 1]] {
            assert!(exploit_check(&data, &sol.g, w, 5, 10_000).unwrap(), "{w:?}");
        }
        // a perturbed g is rejected
        let bump = MatSeries::from_fn(data.n, data.n, |i, j| {
            if i == 0 && j == 0 {
                TruncLaurent::monomial(Scalar::one(), -3)
            } else {
                TruncLaurent::zero()
            }
        });
        assert!(!exploit_check(&data, &(&sol.g + &bump), &[], 5, 10_000).unwrap());
    }

    #[test]
    fn pipeline_matches_fock_oracle() {
        use crate::fock::{moment_oracle, DEFAULT_CAP};
        let laws = [
            Law::from_cumulants(vec![Scalar::from(1), Scalar::from(-1), Scalar::from(2)]),
            Law::from_cumulants(vec![Scalar::from(0), Scalar::from(2), Scalar::from(0), Scalar::from(1)]),
        ];
        for text in ["x1*x2 - x2*x1", "[[x1, 1], [x2*x1, 2 - x2]]", "x1*x1 + 1/2*x2", "[[0, x1], [x2, 0]]"] {
            let f = parse(text).unwrap();
            let data = build_sd_data(&realize(&f), &laws, 30).unwrap();
            let sol = solve_gsde(&data, 8).unwrap();
            let s = stieltjes_from_g(&sol.g, data.p).unwrap();
            let m = moment_oracle(&f, &laws, 7, DEFAULT_CAP).unwrap();
            for (k, mk) in m.iter().enumerate() {
                assert_eq!(&s.coeff(-(k as i64) - 1), mk, "{text} m_{k}");
            }
        }
    }
}
