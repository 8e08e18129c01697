//! Finite correspondences on price sublattices and the battery of
//! substitutes / monotonicity checkers.
//!
//! Everything here is exact: verdicts are decided by full enumeration over
//! the supplied grid, and a failed verdict always carries the first
//! falsifying tuple in lexicographic scan order of `(p, p', q, q')`.

mod classify;
mod monotonicity;
mod substitutes;
mod transform;

pub use classify::{classify, Taxonomy, TaxonomyLabel};
pub use monotonicity::{check_monotonicity, MonotonicityProperty};
pub use substitutes::{check_substitutes, SubstitutesNotion};

use crate::point::{Point, PriceGrid};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorrError {
    #[error("image point has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty image set at {0}")]
    EmptyImage(Point),
    #[error("empty correspondence")]
    EmptyDomain,
    #[error("domain is not a sublattice: {} of {a} and {b} is missing", if *.is_join { "join" } else { "meet" })]
    NotASublattice {
        a: Point,
        b: Point,
        is_join: bool,
    },
    #[error("wgs_function requires a point-valued correspondence; {0} has {1} image points")]
    SetValued(Point, usize),
    #[error("monetize requires nonnegative prices; domain contains {0}")]
    NegativePrice(Point),
    #[error("aggregate requires identical domains and dimensions")]
    DomainMismatch,
    #[error("weight vector must be strictly positive")]
    NonPositiveWeight,
    #[error("weight vector has length {found}, expected {expected}")]
    WeightLength { expected: usize, found: usize },
}

/// The tuple of points that falsifies (or certifies) a property.
///
/// Only the fields relevant to the property at hand are populated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_meet: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_join: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coord: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Rat>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Witness {
    pub fn pair(p: &Point, p_prime: &Point) -> Self {
        Witness {
            p: Some(p.clone()),
            p_prime: Some(p_prime.clone()),
            ..Default::default()
        }
    }

    pub fn with_q(mut self, q: &Point) -> Self {
        self.q = Some(q.clone());
        self
    }

    pub fn with_q_prime(mut self, q: &Point) -> Self {
        self.q_prime = Some(q.clone());
        self
    }

    pub fn with_coord(mut self, z: usize) -> Self {
        self.coord = Some(z);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(p) = &self.p {
            parts.push(format!("p={}", p));
        }
        if let Some(p) = &self.p_prime {
            parts.push(format!("p'={}", p));
        }
        if let Some(q) = &self.q {
            parts.push(format!("q={}", q));
        }
        if let Some(q) = &self.q_prime {
            parts.push(format!("q'={}", q));
        }
        if let Some(q) = &self.q_meet {
            parts.push(format!("q^={}", q));
        }
        if let Some(q) = &self.q_join {
            parts.push(format!("qv={}", q));
        }
        if let Some(z) = self.coord {
            parts.push(format!("z={}", z));
        }
        if let Some(b) = &self.subset {
            parts.push(format!("B={:?}", b));
        }
        if let Some(k) = &self.weights {
            let k: Vec<String> = k.iter().map(|v| v.to_string()).collect();
            parts.push(format!("k=[{}]", k.join(", ")));
        }
        if let Some(n) = &self.note {
            parts.push(n.clone());
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// Outcome of a property check over the supplied grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn pass(property: impl Into<String>) -> Self {
        Verdict {
            property: property.into(),
            holds: true,
            witness: None,
        }
    }

    pub fn fail(property: impl Into<String>, witness: Witness) -> Self {
        Verdict {
            property: property.into(),
            holds: false,
            witness: Some(witness),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            write!(f, "{}: holds", self.property)
        } else {
            match &self.witness {
                Some(w) => write!(f, "{}: fails [{}]", self.property, w),
                None => write!(f, "{}: fails", self.property),
            }
        }
    }
}

/// A finite sublattice price grid mapped to nonempty finite sets of quantity
/// vectors. The domain is the key set of `map`; closure under meet and join
/// is validated by [`validate_domain`], not assumed at construction, so the
/// same type can carry inverse correspondences whose domain is ragged.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteCorrespondence {
    dim: usize,
    map: BTreeMap<Point, BTreeSet<Point>>,
}

impl FiniteCorrespondence {
    pub fn new(
        dim: usize,
        map: BTreeMap<Point, BTreeSet<Point>>,
    ) -> Result<Self, CorrError> {
        if map.is_empty() {
            return Err(CorrError::EmptyDomain);
        }
        for (p, qs) in &map {
            if p.dim() != dim {
                return Err(CorrError::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if qs.is_empty() {
                return Err(CorrError::EmptyImage(p.clone()));
            }
            for q in qs {
                if q.dim() != dim {
                    return Err(CorrError::DimensionMismatch {
                        expected: dim,
                        found: q.dim(),
                    });
                }
            }
        }
        Ok(FiniteCorrespondence { dim, map })
    }

    /// Builds `Q(p) = { f(p) }` over the grid.
    pub fn from_function(
        grid: &PriceGrid,
        mut f: impl FnMut(&Point) -> Point,
    ) -> Result<Self, CorrError> {
        let dim = grid.dim().ok_or(CorrError::EmptyDomain)?;
        let mut map = BTreeMap::new();
        for p in grid.iter() {
            let q = f(p);
            map.insert(p.clone(), BTreeSet::from([q]));
        }
        FiniteCorrespondence::new(dim, map)
    }

    /// Internal constructor for transforms whose output is known valid,
    /// except that image dimensions may legitimately differ from the stated
    /// rules above (e.g. partial inverses of dimension zero).
    pub(crate) fn from_parts_unchecked(
        dim: usize,
        map: BTreeMap<Point, BTreeSet<Point>>,
    ) -> Self {
        FiniteCorrespondence { dim, map }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> impl Iterator<Item = &Point> + Clone {
        self.map.keys()
    }

    pub fn domain_len(&self) -> usize {
        self.map.len()
    }

    pub fn domain_grid(&self) -> PriceGrid {
        PriceGrid::new(self.map.keys().cloned())
    }

    pub fn image(&self, p: &Point) -> Option<&BTreeSet<Point>> {
        self.map.get(p)
    }

    pub fn contains(&self, p: &Point, q: &Point) -> bool {
        self.map.get(p).is_some_and(|qs| qs.contains(q))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Point, &BTreeSet<Point>)> {
        self.map.iter()
    }

    /// Every quantity point that appears in some image.
    pub fn quantity_points(&self) -> BTreeSet<Point> {
        self.map.values().flatten().cloned().collect()
    }

    pub fn is_point_valued(&self) -> bool {
        self.map.values().all(|qs| qs.len() == 1)
    }

    pub fn graph_len(&self) -> usize {
        self.map.values().map(|qs| qs.len()).sum()
    }

    /// Fibers of the inverse: quantity point -> set of prices mapping to it.
    pub fn fibers(&self) -> BTreeMap<Point, BTreeSet<Point>> {
        let mut fibers: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
        for (p, qs) in &self.map {
            for q in qs {
                fibers.entry(q.clone()).or_default().insert(p.clone());
            }
        }
        fibers
    }

    /// Orientation flip for demand-side data: negates every quantity so the
    /// supply-form checkers apply unchanged.
    pub fn negate_quantities(&self) -> FiniteCorrespondence {
        let map = self
            .map
            .iter()
            .map(|(p, qs)| (p.clone(), qs.iter().map(Point::negate).collect()))
            .collect();
        FiniteCorrespondence {
            dim: self.dim,
            map,
        }
    }

    /// Checks that the domain is closed under meet and join.
    pub fn validate_domain(&self) -> Verdict {
        match self.domain_grid().closure_failure() {
            None => Verdict::pass("domain_sublattice"),
            Some(fail) => Verdict::fail(
                "domain_sublattice",
                Witness::pair(&fail.a, &fail.b).with_note(format!(
                    "{} {} missing from domain",
                    if fail.is_join { "join" } else { "meet" },
                    fail.missing
                )),
            ),
        }
    }

    pub(crate) fn require_sublattice(&self) -> Result<(), CorrError> {
        match self.domain_grid().closure_failure() {
            None => Ok(()),
            Some(f) => Err(CorrError::NotASublattice {
                a: f.a,
                b: f.b,
                is_join: f.is_join,
            }),
        }
    }
}

impl fmt::Debug for FiniteCorrespondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FiniteCorrespondence(dim={})", self.dim)?;
        for (p, qs) in &self.map {
            let qs: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
            writeln!(f, "  {} -> {{{}}}", p, qs.join(", "))?;
        }
        Ok(())
    }
}

// Instance file schema: { "dim": N, "map": [ { "p": [...], "qs": [[...]] } ] }.

#[derive(Serialize, Deserialize)]
struct CorrEntry {
    p: Point,
    qs: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct CorrFile {
    dim: usize,
    map: Vec<CorrEntry>,
}

impl Serialize for FiniteCorrespondence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let file = CorrFile {
            dim: self.dim,
            map: self
                .map
                .iter()
                .map(|(p, qs)| CorrEntry {
                    p: p.clone(),
                    qs: qs.iter().cloned().collect(),
                })
                .collect(),
        };
        file.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiniteCorrespondence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = CorrFile::deserialize(deserializer)?;
        let mut map = BTreeMap::new();
        for entry in file.map {
            map.insert(entry.p, entry.qs.into_iter().collect());
        }
        FiniteCorrespondence::new(file.dim, map).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn pt(coords: &[i64]) -> Point {
        Point::from_ints(coords)
    }

    #[test]
    fn construction_checks_invariants() {
        let mut map = BTreeMap::new();
        map.insert(pt(&[0, 0]), BTreeSet::from([pt(&[1, 1])]));
        assert!(FiniteCorrespondence::new(2, map.clone()).is_ok());

        map.insert(pt(&[1, 1]), BTreeSet::new());
        assert!(matches!(
            FiniteCorrespondence::new(2, map),
            Err(CorrError::EmptyImage(_))
        ));
    }

    #[test]
    fn validate_domain_reports_missing_join() {
        let mut map = BTreeMap::new();
        map.insert(pt(&[0, 1]), BTreeSet::from([pt(&[0, 0])]));
        map.insert(pt(&[1, 0]), BTreeSet::from([pt(&[0, 0])]));
        let q = FiniteCorrespondence::new(2, map).unwrap();
        let verdict = q.validate_domain();
        assert!(!verdict.holds);
        let note = verdict.witness.unwrap().note.unwrap();
        assert!(note.contains("(0, 0)") || note.contains("(1, 1)"));
    }

    #[test]
    fn json_round_trip() {
        let mut map = BTreeMap::new();
        map.insert(
            Point::new(vec![crate::rat::rat("1/2"), crate::rat::rat("3")]),
            BTreeSet::from([pt(&[0, 1]), pt(&[1, 0])]),
        );
        let q = FiniteCorrespondence::new(2, map).unwrap();
        let js = serde_json::to_string(&q).unwrap();
        let back: FiniteCorrespondence = serde_json::from_str(&js).unwrap();
        assert_eq!(back, q);
        assert!(js.contains("\"1/2\""));
    }
}
