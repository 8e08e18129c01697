//! Strictly monotone piecewise-linear maps with exact rational breakpoints.
//!
//! Used for tabulated connection functions and tabulated transfer maps;
//! evaluation and inversion stay within the breakpoint range.

use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PwlError {
    #[error("need at least two breakpoints")]
    TooFewPoints,
    #[error("breakpoint abscissas must be strictly increasing")]
    NonMonotoneAbscissa,
    #[error("breakpoint values must be strictly monotone")]
    NonMonotoneValue,
    #[error("query {0} outside the tabulated range [{1}, {2}]")]
    OutOfRange(Rat, Rat, Rat),
}

/// Piecewise-linear interpolant through `(x_i, y_i)` with strictly
/// increasing `x_i` and strictly monotone `y_i` (either direction).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    points: Vec<(Rat, Rat)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(Rat, Rat)>) -> Result<Self, PwlError> {
        if points.len() < 2 {
            return Err(PwlError::TooFewPoints);
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(PwlError::NonMonotoneAbscissa);
            }
        }
        let increasing = points[0].1 < points[1].1;
        for w in points.windows(2) {
            let ok = if increasing {
                w[0].1 < w[1].1
            } else {
                w[0].1 > w[1].1
            };
            if !ok {
                return Err(PwlError::NonMonotoneValue);
            }
        }
        Ok(PiecewiseLinear { points })
    }

    pub fn points(&self) -> &[(Rat, Rat)] {
        &self.points
    }

    pub fn is_increasing(&self) -> bool {
        self.points[0].1 < self.points[1].1
    }

    pub fn domain(&self) -> (&Rat, &Rat) {
        (&self.points[0].0, &self.points.last().unwrap().0)
    }

    pub fn range(&self) -> (Rat, Rat) {
        let first = self.points[0].1.clone();
        let last = self.points.last().unwrap().1.clone();
        if first <= last {
            (first, last)
        } else {
            (last, first)
        }
    }

    pub fn eval(&self, x: &Rat) -> Result<Rat, PwlError> {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return Err(PwlError::OutOfRange(x.clone(), lo.clone(), hi.clone()));
        }
        for w in self.points.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            if x <= x1 {
                let t = (x - x0) / &(x1 - x0);
                return Ok(y0 + &((y1 - y0) * t));
            }
        }
        unreachable!("x within [lo, hi]")
    }

    /// Inverse by strict monotonicity of the values.
    pub fn inverse_eval(&self, y: &Rat) -> Result<Rat, PwlError> {
        let (lo, hi) = self.range();
        if *y < lo || *y > hi {
            return Err(PwlError::OutOfRange(y.clone(), lo, hi));
        }
        let inc = self.is_increasing();
        for w in self.points.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            let inside = if inc { y <= y1 } else { y >= y1 };
            if inside {
                let t = (y - y0) / &(y1 - y0);
                return Ok(x0 + &((x1 - x0) * t));
            }
        }
        unreachable!("y within range")
    }

    /// Composition `self(other^{-1}(-x))` as a new strictly increasing map;
    /// this is the connection shape `U(V^{-1}(-p))` for increasing `self`
    /// and decreasing `other`.
    pub fn compose_neg_inverse(&self, other: &PiecewiseLinear) -> Result<PiecewiseLinear, PwlError> {
        // Candidate abscissas: -other(w) at every breakpoint w of either map
        // that lies in both domains.
        let mut ws: Vec<Rat> = Vec::new();
        let (lo_s, hi_s) = self.domain();
        let (lo_o, hi_o) = other.domain();
        let lo = lo_s.clone().max(lo_o.clone());
        let hi = hi_s.clone().min(hi_o.clone());
        for (w, _) in self.points.iter().chain(other.points.iter()) {
            if *w >= lo && *w <= hi && !ws.contains(w) {
                ws.push(w.clone());
            }
        }
        ws.sort();
        if ws.len() < 2 {
            return Err(PwlError::TooFewPoints);
        }
        let mut pts = Vec::with_capacity(ws.len());
        for w in &ws {
            let x = -&other.eval(w)?;
            let y = self.eval(w)?;
            pts.push((x, y));
        }
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        PiecewiseLinear::new(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn pwl(pts: &[(&str, &str)]) -> PiecewiseLinear {
        PiecewiseLinear::new(pts.iter().map(|(x, y)| (rat(x), rat(y))).collect()).unwrap()
    }

    #[test]
    fn interpolates_linearly() {
        let f = pwl(&[("0", "0"), ("2", "1")]);
        assert_eq!(f.eval(&rat("1")).unwrap(), rat("1/2"));
        assert_eq!(f.inverse_eval(&rat("1/2")).unwrap(), rat("1"));
    }

    #[test]
    fn decreasing_maps_invert() {
        let f = pwl(&[("0", "4"), ("1", "2"), ("3", "1")]);
        assert!(!f.is_increasing());
        assert_eq!(f.eval(&rat("1/2")).unwrap(), rat("3"));
        assert_eq!(f.inverse_eval(&rat("3")).unwrap(), rat("1/2"));
    }

    #[test]
    fn rejects_out_of_range() {
        let f = pwl(&[("0", "0"), ("1", "1")]);
        assert!(matches!(f.eval(&rat("2")), Err(PwlError::OutOfRange(..))));
        assert!(matches!(
            f.inverse_eval(&rat("-1")),
            Err(PwlError::OutOfRange(..))
        ));
    }

    #[test]
    fn composition_matches_affine_algebra() {
        // U(w) = 1 + 2w, V(w) = 3 - w on w in [0, 4].
        let u = pwl(&[("0", "1"), ("4", "9")]);
        let v = pwl(&[("0", "3"), ("4", "-1")]);
        let g = u.compose_neg_inverse(&v).unwrap();
        // G(p) = U(V^{-1}(-p)) = 1 + 2(3 + p) = 7 + 2p on p in [-3, 1].
        assert!(g.is_increasing());
        assert_eq!(g.eval(&rat("0")).unwrap(), rat("7"));
        assert_eq!(g.eval(&rat("1")).unwrap(), rat("9"));
        assert_eq!(g.eval(&rat("-3")).unwrap(), rat("1"));
        assert_eq!(g.eval(&rat("-1/2")).unwrap(), rat("6"));
    }
}
