use num_traits::ToPrimitive;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::BivarPoly;
use crate::scalar::Scalar;

/// Upper Newton polygon of `P(1/z, y)` viewed as a polynomial in `y` over
/// Laurent series in `z`. A segment of slope `s` and length `l` accounts for
/// `l` roots of valuation `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// `(slope, length)` with slopes nonincreasing.
    pub segments: Vec<(Scalar, usize)>,
    /// Power of `y` dividing `P`; these roots are identically zero.
    pub y_content: u32,
}

impl NewtonPolygon {
    /// Roots counted by the segments, excluding the zero roots.
    pub fn degree(&self) -> usize {
        self.segments.iter().map(|s| s.1).sum()
    }
}

impl Serialize for NewtonPolygon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.segments.len()))?;
        for (slope, len) in &self.segments {
            let num = slope.numer().to_i64().unwrap_or(i64::MAX);
            let den = slope.denom().to_i64().unwrap_or(i64::MAX);
            seq.serialize_element(&(num, den, *len))?;
        }
        seq.end()
    }
}

/// Valuation in `z` of a polynomial in `x = 1/z`, given by its `x`-degrees.
fn z_val(row: &std::collections::BTreeMap<u32, Scalar>) -> Option<i64> {
    row.keys().next().map(|&i| -(i as i64))
}

pub fn newton_polygon(p: &BivarPoly) -> NewtonPolygon {
    let degy = p.degy();
    let y_content = (0..=degy).find(|&j| !p.y_coeff(j).is_empty()).unwrap_or(0);
    let n = degy - y_content;
    // point (i, val a_i) for the coefficient a_i of y^{n-i} in P / y^content
    let points: Vec<(i64, i64)> = (0..=n)
        .filter_map(|i| z_val(&p.y_coeff(degy - i)).map(|v| (i as i64, v)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord from a to pt
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross >= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            (Scalar::new(w[1].1 - w[0].1, len), len as usize)
        })
        .collect();
    NewtonPolygon { segments, y_content }
}

/// Roots of negative valuation, counting each zero root as one of them.
pub fn count_negative_valuation_roots(p: &BivarPoly) -> usize {
    let poly = newton_polygon(p);
    let negative: usize = poly
        .segments
        .iter()
        .filter(|(s, _)| s.signum() < 0)
        .map(|s| s.1)
        .sum();
    negative + poly.y_content as usize
}
