//! Price/quantity vectors with the coordinatewise lattice structure, and
//! finite sublattice grids.

use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A vector of exact rationals ordered coordinatewise.
///
/// `Ord` is the lexicographic order and is used only to keep scans and
/// witnesses deterministic; the economic order is [`Point::le`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<Rat>);

impl Point {
    pub fn new(coords: Vec<Rat>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| Rat::int(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Point(vec![Rat::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rat> {
        self.0
    }

    pub fn get(&self, z: usize) -> &Rat {
        &self.0[z]
    }

    /// Componentwise partial order; both points must share a dimension.
    pub fn le(&self, other: &Point) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn ge(&self, other: &Point) -> bool {
        other.le(self)
    }

    /// Strict order in the product sense: `self <= other` and not equal.
    pub fn lt(&self, other: &Point) -> bool {
        self.le(other) && self != other
    }

    pub fn meet(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone().min(b.clone()))
                .collect(),
        )
    }

    pub fn join(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone().max(b.clone()))
                .collect(),
        )
    }

    pub fn dot(&self, other: &Point) -> Rat {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn coord_sum(&self) -> Rat {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &Rat) -> Point {
        Point(self.0.iter().map(|a| a * k).collect())
    }

    pub fn negate(&self) -> Point {
        Point(self.0.iter().map(|a| -a).collect())
    }

    /// Componentwise positive part, `(self - other)^+`.
    pub fn pos_part_minus(&self, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a - b).max(Rat::zero()))
                .collect(),
        )
    }

    pub fn project(&self, coords: &[usize]) -> Point {
        Point(coords.iter().map(|&z| self.0[z].clone()).collect())
    }

    pub fn push(&self, extra: Rat) -> Point {
        let mut c = self.0.clone();
        c.push(extra);
        Point(c)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// The first pair of grid points whose meet or join escapes the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureFailure {
    pub a: Point,
    pub b: Point,
    pub missing: Point,
    pub is_join: bool,
}

/// A finite set of price points; sublattice closure is validated, never
/// assumed.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceGrid {
    points: BTreeSet<Point>,
}

impl PriceGrid {
    pub fn new(points: impl IntoIterator<Item = Point>) -> Self {
        PriceGrid {
            points: points.into_iter().collect(),
        }
    }

    /// Full product grid with the same levels on every axis.
    pub fn product(dim: usize, levels: &[Rat]) -> Self {
        let per_axis: Vec<Vec<Rat>> = (0..dim).map(|_| levels.to_vec()).collect();
        Self::product_of(&per_axis)
    }

    /// Product grid with per-axis level sets.
    pub fn product_of(levels: &[Vec<Rat>]) -> Self {
        let mut points = vec![Vec::new()];
        for axis in levels {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for stem in &points {
                for v in axis {
                    let mut p = stem.clone();
                    p.push(v.clone());
                    next.push(p);
                }
            }
            points = next;
        }
        PriceGrid {
            points: points.into_iter().map(Point::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.iter().next().map(Point::dim)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.points.iter()
    }

    pub fn points(&self) -> &BTreeSet<Point> {
        &self.points
    }

    /// Reports the first (in lexicographic scan order) closure violation.
    pub fn closure_failure(&self) -> Option<ClosureFailure> {
        for a in &self.points {
            for b in &self.points {
                let m = a.meet(b);
                if !self.points.contains(&m) {
                    return Some(ClosureFailure {
                        a: a.clone(),
                        b: b.clone(),
                        missing: m,
                        is_join: false,
                    });
                }
                let j = a.join(b);
                if !self.points.contains(&j) {
                    return Some(ClosureFailure {
                        a: a.clone(),
                        b: b.clone(),
                        missing: j,
                        is_join: true,
                    });
                }
            }
        }
        None
    }

    pub fn is_sublattice(&self) -> bool {
        !self.points.is_empty() && self.closure_failure().is_none()
    }
}

impl fmt::Debug for PriceGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.points.iter()).finish()
    }
}

impl FromIterator<Point> for PriceGrid {
    fn from_iter<T: IntoIterator<Item = Point>>(iter: T) -> Self {
        PriceGrid::new(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meet_join_coordinatewise() {
        let p = Point::from_ints(&[1, 2]);
        let q = Point::from_ints(&[2, 1]);
        assert_eq!(p.meet(&q), Point::from_ints(&[1, 1]));
        assert_eq!(p.join(&q), Point::from_ints(&[2, 2]));
        // Idempotence.
        assert_eq!(p.meet(&p), p);
        assert_eq!(p.join(&p), p);
    }

    #[test]
    fn four_dim_meet_join() {
        let p = Point::from_ints(&[1, 1, 2, 2]);
        let q = Point::from_ints(&[2, 2, 1, 1]);
        assert_eq!(p.meet(&q), Point::from_ints(&[1, 1, 1, 1]));
        assert_eq!(p.join(&q), Point::from_ints(&[2, 2, 2, 2]));
    }

    #[test]
    fn chain_is_sublattice_antichain_is_not() {
        let chain = PriceGrid::new([Point::from_ints(&[0, 0]), Point::from_ints(&[1, 1])]);
        assert!(chain.is_sublattice());

        let anti = PriceGrid::new([Point::from_ints(&[0, 1]), Point::from_ints(&[1, 0])]);
        let fail = anti.closure_failure().unwrap();
        assert_eq!(fail.missing, Point::from_ints(&[0, 0]));

        let full = PriceGrid::product(2, &[Rat::int(0), Rat::int(1)]);
        assert!(full.is_sublattice());
        assert_eq!(full.len(), 4);
    }

    #[test]
    fn product_grid_has_expected_size() {
        let g = PriceGrid::product(3, &[Rat::int(0), Rat::int(1), Rat::int(2)]);
        assert_eq!(g.len(), 27);
        assert!(g.is_sublattice());
    }
}
