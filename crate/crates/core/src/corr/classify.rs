//! Taxonomy of substitutes correspondences by point-valuedness of the map
//! and of its inverse.

use super::{
    check_monotonicity, check_substitutes, CorrError, FiniteCorrespondence,
    MonotonicityProperty, SubstitutesNotion,
};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Cell of the taxonomy table. `label` is the partition cell, so an
/// M-function is reported as such rather than under the weaker inclusive
/// names; the booleans allow inclusive queries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub ugs: bool,
    pub nonreversing: bool,
    pub point_valued: bool,
    pub inverse_point_valued: bool,
    pub label: TaxonomyLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaxonomyLabel {
    MFunction,
    M0Function,
    MCorrespondence,
    M0Correspondence,
    None,
}

impl fmt::Display for TaxonomyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TaxonomyLabel::MFunction => "M-function",
            TaxonomyLabel::M0Function => "M0-function",
            TaxonomyLabel::MCorrespondence => "M-correspondence",
            TaxonomyLabel::M0Correspondence => "M0-correspondence",
            TaxonomyLabel::None => "none",
        };
        f.write_str(s)
    }
}

impl Taxonomy {
    /// Point-valued M0-correspondence in the inclusive sense.
    pub fn is_m0_function(&self) -> bool {
        self.ugs && self.nonreversing && self.point_valued
    }

    pub fn is_m0_correspondence(&self) -> bool {
        self.ugs && self.nonreversing
    }
}

pub fn classify(q: &FiniteCorrespondence) -> Result<Taxonomy, CorrError> {
    let ugs = check_substitutes(q, SubstitutesNotion::Ugs)?.holds;
    let nonreversing = check_monotonicity(q, &MonotonicityProperty::Nonreversing)?.holds;
    let point_valued = q.is_point_valued();
    let inverse_point_valued = q.fibers().values().all(|ps| ps.len() == 1);
    let label = if !(ugs && nonreversing) {
        TaxonomyLabel::None
    } else {
        match (point_valued, inverse_point_valued) {
            (true, true) => TaxonomyLabel::MFunction,
            (true, false) => TaxonomyLabel::M0Function,
            (false, true) => TaxonomyLabel::MCorrespondence,
            (false, false) => TaxonomyLabel::M0Correspondence,
        }
    };
    Ok(Taxonomy {
        ugs,
        nonreversing,
        point_valued,
        inverse_point_valued,
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{Point, PriceGrid};
    use crate::rat::Rat;

    #[test]
    fn constant_correspondence_is_m0_function() {
        let grid = PriceGrid::product(2, &[Rat::int(0), Rat::int(1)]);
        let q0 = Point::from_ints(&[1, 1]);
        let c = FiniteCorrespondence::from_function(&grid, |_| q0.clone()).unwrap();
        let t = classify(&c).unwrap();
        assert_eq!(t.label, TaxonomyLabel::M0Function);
        assert!(t.point_valued && !t.inverse_point_valued);
        assert!(t.is_m0_function());
    }

    #[test]
    fn identity_is_m_function() {
        let grid = PriceGrid::product(2, &[Rat::int(0), Rat::int(1)]);
        let c = FiniteCorrespondence::from_function(&grid, Point::clone).unwrap();
        assert_eq!(classify(&c).unwrap().label, TaxonomyLabel::MFunction);
    }

    #[test]
    fn complements_classify_none() {
        let grid = PriceGrid::product(2, &[Rat::int(0), Rat::int(1)]);
        let c = FiniteCorrespondence::from_function(&grid, |p| {
            Point::new(vec![p.get(1).clone(), p.get(0).clone()])
        })
        .unwrap();
        assert_eq!(classify(&c).unwrap().label, TaxonomyLabel::None);
    }
}
