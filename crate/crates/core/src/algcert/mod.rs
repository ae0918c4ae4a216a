//! Annihilating polynomials `P(1/z, f) = 0` for truncated series: exact
//! reconstruction, residual certification and Newton-polygon diagnostics.

mod divide;
mod newton;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::scalar::{primitive_scale, Scalar};
use crate::series::TruncLaurent;

pub use divide::{poly_divide_monic, MPoly};
pub use newton::{count_negative_valuation_roots, newton_polygon, NewtonPolygon};

/// Default number of extra vanishing coefficients demanded beyond the solve window.
pub const DEFAULT_GUARD: usize = 10;

/// A polynomial in `x` and `y`; `(i, j)` indexes the coefficient of `x^i y^j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BivarPoly {
    coeffs: BTreeMap<(u32, u32), Scalar>,
}

/// Sort key of the term order: total degree, then `y`-degree, then `x`-degree.
fn term_key(&(i, j): &(u32, u32)) -> (u32, u32, u32) {
    (i + j, j, i)
}

impl BivarPoly {
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, Scalar)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (i, j, c) in terms {
            let slot: &mut Scalar = coeffs.entry((i, j)).or_insert_with(Scalar::zero);
            *slot += &c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        BivarPoly { coeffs }
    }

    /// Integer-coefficient convenience constructor.
    pub fn from_ints(terms: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(i, j, c)| (i, j, Scalar::from(c))))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Scalar {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &Scalar)> + '_ {
        self.coeffs.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn degx(&self) -> u32 {
        self.coeffs.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn degy(&self) -> u32 {
        self.coeffs.keys().map(|k| k.1).max().unwrap_or(0)
    }

    /// The coefficient of `y^j` as a map from `x`-degree to coefficient.
    pub fn y_coeff(&self, j: u32) -> BTreeMap<u32, Scalar> {
        self.coeffs
            .iter()
            .filter(|(k, _)| k.1 == j)
            .map(|(k, c)| (k.0, c.clone()))
            .collect()
    }

    fn leading(&self) -> Option<&Scalar> {
        self.coeffs.iter().max_by_key(|(k, _)| term_key(k)).map(|(_, c)| c)
    }

    /// Scales to integer coefficients with gcd 1 and a positive leading coefficient.
    pub fn normalized(&self) -> BivarPoly {
        let Some(lead) = self.leading() else {
            return self.clone();
        };
        let mut k = primitive_scale(self.coeffs.values());
        if lead.signum() < 0 {
            k = -k;
        }
        BivarPoly {
            coeffs: self.coeffs.iter().map(|(key, c)| (*key, c * &k)).collect(),
        }
    }

    /// `P(1/z, f)`.
    pub fn eval_series(&self, f: &TruncLaurent) -> TruncLaurent {
        let mut pow = TruncLaurent::one();
        let mut acc = TruncLaurent::zero();
        for j in 0..=self.degy() {
            if j > 0 {
                pow = &pow * f;
            }
            let row = self.y_coeff(j);
            if row.is_empty() {
                continue;
            }
            let a = TruncLaurent::from_terms(row.into_iter().map(|(i, c)| (-(i as i64), c)), None);
            acc = &acc + &(&a * &pow);
        }
        acc
    }

    /// `∂P/∂y`.
    pub fn dy(&self) -> BivarPoly {
        Self::from_terms(
            self.terms()
                .filter(|t| t.1 > 0)
                .map(|(i, j, c)| (i, j - 1, c * &Scalar::from(j as i64))),
        )
    }

    /// `P(x0, y0)` at rational points.
    pub fn eval(&self, x0: &Scalar, y0: &Scalar) -> Scalar {
        self.terms().map(|(i, j, c)| c * &x0.pow(i) * y0.pow(j)).sum()
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.coeffs.iter().collect();
        terms.sort_by_key(|(k, _)| std::cmp::Reverse(term_key(k)));
        for (n, (&(i, j), c)) in terms.into_iter().enumerate() {
            let neg = c.signum() < 0;
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors = Vec::new();
            let mag = c.abs();
            if !mag.is_one() || (i == 0 && j == 0) {
                factors.push(mag.to_string());
            }
            for (name, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl Serialize for BivarPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for (&(i, j), c) in &self.coeffs {
            seq.serialize_element(&(i, j, c.to_ratio_string()))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for BivarPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<(u32, u32, Scalar)> = Vec::deserialize(d)?;
        Ok(BivarPoly::from_terms(raw))
    }
}

/// Number of coefficients `P(1/z, f)` is known to vanish at, counted from `z^0`
/// downwards, or `None` if some known coefficient is nonzero.
pub fn vanishing_window(p: &BivarPoly, f: &TruncLaurent) -> Option<usize> {
    let r = p.eval_series(f);
    if !r.is_zero_window() {
        return None;
    }
    Some(match r.prec() {
        None => usize::MAX,
        Some(fl) => (1 - fl).max(0) as usize,
    })
}

/// True when `P(1/z, f)` vanishes on a window exceeding the number of
/// unknowns of a `degx x degy` ansatz by at least `guard` coefficients.
pub fn verify_annihilator(p: &BivarPoly, f: &TruncLaurent, guard: usize) -> bool {
    if p.is_zero() {
        return false;
    }
    let unknowns = (p.degx() as usize + 1) * (p.degy() as usize + 1);
    vanishing_window(p, f).is_some_and(|w| w >= unknowns + guard)
}

/// Finds the nonzero `P` with `deg_x P <= degx`, `deg_y P <= degy` whose
/// leading term is least and for which `P(1/z, f)` vanishes on the known
/// coefficients, solving on all but the last `guard` of them and checking the rest.
pub fn reconstruct_annihilator(f: &TruncLaurent, degx: u32, degy: u32, guard: usize) -> Result<BivarPoly> {
    if f.top().is_some_and(|t| t > 0) {
        return Err(Error::Input("series must have valuation at most 0".into()));
    }
    let Some(floor) = f.prec() else {
        return Err(Error::Input("series must be truncated".into()));
    };
    let mut cols: Vec<(u32, u32)> = (0..=degx).flat_map(|i| (0..=degy).map(move |j| (i, j))).collect();
    cols.sort_by_key(|k| std::cmp::Reverse(term_key(k)));
    let unknowns = cols.len();
    let mut powers = vec![TruncLaurent::one()];
    for j in 1..=degy as usize {
        let next = &powers[j - 1] * f;
        powers.push(next);
    }
    // every product z^{-i} f^j is known at exponents >= this
    let known_floor = powers.iter().filter_map(TruncLaurent::prec).max().unwrap_or(floor);
    let equations = (1 - known_floor).max(0) as usize;
    if equations < unknowns + guard {
        return Err(Error::InsufficientPrecision(format!(
            "{equations} coefficients known, {} needed for a {degx}x{degy} ansatz with guard {guard}",
            unknowns + guard
        )));
    }
    let system = QMatrix::from_fn(equations, unknowns, |r, c| {
        let (i, j) = cols[c];
        powers[j as usize].coeff(-(r as i64) + i as i64)
    });
    let solve = system.submatrix(0, 0, equations - guard, unknowns);
    let basis = solve.nullspace();
    if basis.is_empty() {
        return Err(Error::NotFound(format!("no annihilator with degx {degx}, degy {degy}")));
    }
    let rows: Vec<Vec<Scalar>> = basis;
    let (rref, pivots) = QMatrix::from_rows(rows)?.rref();
    let last = pivots.len() - 1;
    let v: Vec<Scalar> = (0..unknowns).map(|c| rref.get(last, c).clone()).collect();
    if system.mul_vec(&v).iter().any(|x| !x.is_zero()) {
        return Err(Error::NotFound(format!(
            "least solution with degx {degx}, degy {degy} fails the guard"
        )));
    }
    Ok(BivarPoly::from_terms(cols.iter().zip(v).map(|(&(i, j), c)| (i, j, c))).normalized())
}

/// Degree bounds and caps for [`search_annihilator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub degx: u32,
    pub degy: u32,
    pub max_degx: u32,
    pub max_degy: u32,
    pub guard: usize,
}

impl SearchBounds {
    /// Series order needed for an ansatz of the given degrees.
    pub fn order_for(&self, degx: u32, degy: u32) -> usize {
        (degx as usize + 1) * (degy as usize + 1) + self.guard + 2
    }
}

/// Result of an escalating search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub poly: Option<BivarPoly>,
    /// Every `(degx, degy)` tried, in order.
    pub tried: Vec<(u32, u32)>,
}

/// Tries `reconstruct_annihilator` with `degy` raised first and then `degx`,
/// up to the caps. `series(order)` must return the series through `z^{-order}`.
pub fn search_annihilator(
    bounds: SearchBounds,
    mut series: impl FnMut(usize) -> Result<TruncLaurent>,
) -> Result<SearchOutcome> {
    let mut tried = Vec::new();
    for dx in bounds.degx..=bounds.max_degx.max(bounds.degx) {
        for dy in bounds.degy..=bounds.max_degy.max(bounds.degy) {
            tried.push((dx, dy));
            let f = series(bounds.order_for(dx, dy))?;
            match reconstruct_annihilator(&f, dx, dy, bounds.guard) {
                Ok(p) => {
                    return Ok(SearchOutcome {
                        poly: Some(p),
                        tried,
                    })
                }
                Err(Error::NotFound(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(SearchOutcome { poly: None, tried })
}

/// Whether `∂P/∂y (0, f_0) != 0`, with `f_0` the constant term of `f`.
pub fn check_nonsingular(p: &BivarPoly, f: &TruncLaurent) -> bool {
    !p.dy().eval(&Scalar::zero(), &f.coeff(0)).is_zero()
}

/// `Σ_{i>=n} c_{i+n} z^{-i}` from the coefficients `c_0, c_1, ...` of a power
/// series in `1/z`, truncated where the input runs out.
pub fn shifted_series(c: &[Scalar], n: usize) -> TruncLaurent {
    let len = c.len();
    let terms = (n..).take_while(|i| i + n < len).map(|i| (-(i as i64), c[i + n].clone()));
    let top = len as i64 - 1 - n as i64;
    TruncLaurent::from_terms(terms, Some(-top))
}

/// The least `N <= n_max` for which the reconstructed annihilator of the
/// shifted series is nonsingular at the origin.
pub fn desingularize_shift(
    c: &[Scalar],
    n_max: usize,
    degx: u32,
    degy: u32,
    guard: usize,
) -> Result<(usize, BivarPoly)> {
    for n in 0..=n_max {
        let f = shifted_series(c, n);
        match reconstruct_annihilator(&f, degx, degy, guard) {
            Ok(p) if check_nonsingular(&p, &f) => return Ok((n, p)),
            Ok(_) | Err(Error::NotFound(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotFoundWithin(n_max))
}
