//! Inverse-correspondence construction, inverse-isotonicity checkers, and
//! sub/supersolution structure.

use crate::corr::{
    check_monotonicity, check_substitutes, classify, CorrError, FiniteCorrespondence,
    MonotonicityProperty, SubstitutesNotion, TaxonomyLabel, Verdict, Witness,
};
use crate::point::Point;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LattError {
    #[error(transparent)]
    Corr(#[from] CorrError),
    #[error("no grid point matches the fixed coordinates")]
    EmptySlice,
    #[error("coordinate {0} out of range for dimension {1}")]
    CoordOutOfRange(usize, usize),
    #[error("fixed values must cover exactly the complement of X")]
    FixedCoverage,
    #[error("target has dimension {found}, expected {expected}")]
    TargetDimension { expected: usize, found: usize },
    #[error("checker inconsistency (implementation bug): {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseProperty {
    /// Definition with the coordinate split collapsed to the pointwise test
    /// `p_z <= p'_z or q_z <= q'_z`.
    TotallyIsotone,
    /// Same restricted to `q <= q'` (strong set order isotonicity of the
    /// inverse).
    SsoIsotone,
    /// Every fiber `Q^{-1}(q)` is closed under meet and join.
    SublatticeFibers,
    /// Every fiber is a singleton.
    PointValued,
}

impl InverseProperty {
    pub fn name(self) -> &'static str {
        match self {
            InverseProperty::TotallyIsotone => "totally_isotone",
            InverseProperty::SsoIsotone => "sso_isotone",
            InverseProperty::SublatticeFibers => "sublattice_fibers",
            InverseProperty::PointValued => "point_valued",
        }
    }
}

impl fmt::Display for InverseProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Membership transpose: domain is the set of quantity points, image of `q`
/// is its fiber of prices. The returned verdict flags whether the inverse
/// domain happens to be a sublattice (it need not be).
pub fn invert(q: &FiniteCorrespondence) -> (FiniteCorrespondence, Verdict) {
    let fibers = q.fibers();
    let inv = FiniteCorrespondence::from_parts_unchecked(q.dim(), fibers);
    let closure = inv.validate_domain();
    (inv, closure)
}

pub fn check_inverse(
    q: &FiniteCorrespondence,
    property: InverseProperty,
) -> Result<Verdict, CorrError> {
    q.require_sublattice()?;
    match property {
        InverseProperty::TotallyIsotone => Ok(check_isotone(q, true)),
        InverseProperty::SsoIsotone => Ok(check_isotone(q, false)),
        InverseProperty::SublatticeFibers => Ok(check_sublattice_fibers(q)),
        InverseProperty::PointValued => Ok(check_point_valued_fibers(q)),
    }
}

fn check_isotone(corr: &FiniteCorrespondence, total: bool) -> Verdict {
    let name = if total { "totally_isotone" } else { "sso_isotone" };
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            for q in qs {
                for qp in qps {
                    let triggered = if total {
                        (0..corr.dim()).all(|z| p.get(z) <= pp.get(z) || q.get(z) <= qp.get(z))
                    } else {
                        q.le(qp)
                    };
                    if !triggered {
                        continue;
                    }
                    let meet_ok = corr.contains(&p.meet(pp), q);
                    let join_ok = corr.contains(&p.join(pp), qp);
                    if !meet_ok || !join_ok {
                        let note = if !meet_ok {
                            "q missing from Q(p^p')"
                        } else {
                            "q' missing from Q(pvp')"
                        };
                        return Verdict::fail(
                            name,
                            Witness::pair(p, pp).with_q(q).with_q_prime(qp).with_note(note),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass(name)
}

fn check_sublattice_fibers(corr: &FiniteCorrespondence) -> Verdict {
    for (q, fiber) in corr.fibers() {
        for p in &fiber {
            for pp in &fiber {
                for (cand, is_join) in [(p.meet(pp), false), (p.join(pp), true)] {
                    if !fiber.contains(&cand) {
                        return Verdict::fail(
                            "sublattice_fibers",
                            Witness::pair(p, pp).with_q(&q).with_note(format!(
                                "fiber misses {} {}",
                                if is_join { "join" } else { "meet" },
                                cand
                            )),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("sublattice_fibers")
}

fn check_point_valued_fibers(corr: &FiniteCorrespondence) -> Verdict {
    for (q, fiber) in corr.fibers() {
        if fiber.len() > 1 {
            let mut it = fiber.iter();
            let a = it.next().unwrap();
            let b = it.next().unwrap();
            return Verdict::fail(
                "point_valued",
                Witness::pair(a, b)
                    .with_q(&q)
                    .with_note("two prices share this quantity"),
            );
        }
    }
    Verdict::pass("point_valued")
}

/// Strong-set-order isotonicity of an arbitrary finite map `x -> set`,
/// evaluated on its raw domain points. Used for partial inverses, whose
/// domain need not be a sublattice.
pub fn sso_isotone_map(map: &FiniteCorrespondence) -> Verdict {
    for (x, imgs) in map.entries() {
        for (xp, imgps) in map.entries() {
            if !x.le(xp) {
                continue;
            }
            for a in imgs {
                for ap in imgps {
                    let meet_ok = map.contains(x, &a.meet(ap));
                    let join_ok = map.contains(xp, &a.join(ap));
                    if !meet_ok || !join_ok {
                        return Verdict::fail(
                            "sso_isotone_map",
                            Witness::pair(x, xp)
                                .with_q(a)
                                .with_q_prime(ap)
                                .with_note("meet/join escape the image sets"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("sso_isotone_map")
}

/// Partial inverse at coordinate set `x_coords`, holding the complementary
/// price coordinates at `fixed`. Maps each realized `q_X` to the set of
/// `p_X` values achieving it, together with the strong-set-order verdict.
pub fn partial_inverse(
    q: &FiniteCorrespondence,
    x_coords: &[usize],
    fixed: &[(usize, crate::rat::Rat)],
) -> Result<(FiniteCorrespondence, Verdict), LattError> {
    let dim = q.dim();
    for &z in x_coords {
        if z >= dim {
            return Err(LattError::CoordOutOfRange(z, dim));
        }
    }
    let mut covered: BTreeSet<usize> = x_coords.iter().copied().collect();
    for (z, _) in fixed {
        if *z >= dim {
            return Err(LattError::CoordOutOfRange(*z, dim));
        }
        if !covered.insert(*z) {
            return Err(LattError::FixedCoverage);
        }
    }
    if covered.len() != dim {
        return Err(LattError::FixedCoverage);
    }

    let mut map: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
    let mut matched = false;
    for (p, qs) in q.entries() {
        if fixed.iter().any(|(z, v)| p.get(*z) != v) {
            continue;
        }
        matched = true;
        let p_x = p.project(x_coords);
        for qq in qs {
            map.entry(qq.project(x_coords))
                .or_default()
                .insert(p_x.clone());
        }
    }
    if !matched {
        return Err(LattError::EmptySlice);
    }
    let inv = FiniteCorrespondence::from_parts_unchecked(x_coords.len(), map);
    let verdict = sso_isotone_map(&inv);
    Ok((inv, verdict))
}

/// Verdicts of the two inverse-isotonicity theorems plus the raw inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub ugs: bool,
    pub nonreversing: bool,
    pub totally_isotone_inverse: bool,
    pub strongly_nonreversing: bool,
    pub inverse_point_valued_isotone: bool,
    pub theorem1_consistent: bool,
    pub theorem2_consistent: bool,
}

/// `q in Q(p), q' in Q(p'), q <= q'  implies  p <= p'` (point-valued isotone
/// inverse, condition (ii) of the second theorem).
fn inverse_point_valued_isotone(corr: &FiniteCorrespondence) -> bool {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            for q in qs {
                for qp in qps {
                    if q.le(qp) && !p.le(pp) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Runs every component checker and cross-validates the two equivalence
/// theorems on this instance. A consistency failure indicates a bug in the
/// checkers, never new mathematics, and aborts with a diagnostic.
pub fn equivalence_suite(q: &FiniteCorrespondence) -> Result<EquivalenceReport, LattError> {
    let ugs = check_substitutes(q, SubstitutesNotion::Ugs)?.holds;
    let nonreversing = check_monotonicity(q, &MonotonicityProperty::Nonreversing)?.holds;
    let totally = check_inverse(q, InverseProperty::TotallyIsotone)?.holds;
    let strongly =
        check_monotonicity(q, &MonotonicityProperty::StronglyNonreversing)?.holds;
    let ipvi = inverse_point_valued_isotone(q);
    let taxonomy = classify(q)?;

    let theorem1_consistent = !ugs || (nonreversing == totally);
    let m_correspondence = taxonomy.label == TaxonomyLabel::MFunction
        || taxonomy.label == TaxonomyLabel::MCorrespondence;
    let theorem2_consistent = !ugs || (strongly == ipvi && strongly == m_correspondence);

    let report = EquivalenceReport {
        ugs,
        nonreversing,
        totally_isotone_inverse: totally,
        strongly_nonreversing: strongly,
        inverse_point_valued_isotone: ipvi,
        theorem1_consistent,
        theorem2_consistent,
    };
    if !theorem1_consistent {
        return Err(LattError::Inconsistent(format!(
            "nonreversing={} but totally_isotone={} under ugs",
            nonreversing, totally
        )));
    }
    if !theorem2_consistent {
        return Err(LattError::Inconsistent(format!(
            "strongly_nonreversing={}, inverse_point_valued_isotone={}, m_correspondence={} under ugs",
            strongly, ipvi, m_correspondence
        )));
    }
    Ok(report)
}

/// Grid points classified against a target quantity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSets {
    pub subsolutions: BTreeSet<Point>,
    pub supersolutions: BTreeSet<Point>,
    pub solutions: BTreeSet<Point>,
    pub target: Point,
}

/// Closure facts about the solution sets. `None` marks a check that did not
/// apply (ugs absent, or the coincidence precondition unmet).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionStructure {
    pub ugs: bool,
    pub subsolutions_join_closed: Option<Verdict>,
    pub supersolutions_meet_closed: Option<Verdict>,
    pub max_subsolution_is_solution: Option<Verdict>,
}

pub fn solution_sets(
    q: &FiniteCorrespondence,
    target: &Point,
) -> Result<(SolutionSets, SolutionStructure), LattError> {
    if target.dim() != q.dim() {
        return Err(LattError::TargetDimension {
            expected: q.dim(),
            found: target.dim(),
        });
    }
    q.require_sublattice()?;

    let mut sets = SolutionSets {
        subsolutions: BTreeSet::new(),
        supersolutions: BTreeSet::new(),
        solutions: BTreeSet::new(),
        target: target.clone(),
    };
    for (p, qs) in q.entries() {
        if qs.iter().any(|v| v.le(target)) {
            sets.subsolutions.insert(p.clone());
        }
        if qs.iter().any(|v| target.le(v)) {
            sets.supersolutions.insert(p.clone());
        }
        if qs.contains(target) {
            sets.solutions.insert(p.clone());
        }
    }

    let ugs = check_substitutes(q, SubstitutesNotion::Ugs)?.holds;
    let mut structure = SolutionStructure {
        ugs,
        subsolutions_join_closed: None,
        supersolutions_meet_closed: None,
        max_subsolution_is_solution: None,
    };
    if ugs {
        structure.subsolutions_join_closed =
            Some(closed_under(&sets.subsolutions, true, "subsolutions_join_closed"));
        structure.supersolutions_meet_closed = Some(closed_under(
            &sets.supersolutions,
            false,
            "supersolutions_meet_closed",
        ));
        let taxonomy = classify(q)?;
        if taxonomy.is_m0_correspondence()
            && !sets.solutions.is_empty()
            && !sets.subsolutions.is_empty()
        {
            // Join-closure gives the finite subsolution set a top element.
            let top = sets
                .subsolutions
                .iter()
                .skip(1)
                .fold(sets.subsolutions.iter().next().unwrap().clone(), |acc, p| {
                    acc.join(p)
                });
            let verdict = if sets.subsolutions.contains(&top) && sets.solutions.contains(&top) {
                Verdict::pass("max_subsolution_is_solution")
            } else {
                Verdict::fail(
                    "max_subsolution_is_solution",
                    Witness {
                        p: Some(top),
                        ..Default::default()
                    }
                    .with_note("maximal subsolution is not a solution"),
                )
            };
            structure.max_subsolution_is_solution = Some(verdict);
        }
    }
    Ok((sets, structure))
}

fn closed_under(set: &BTreeSet<Point>, join: bool, name: &str) -> Verdict {
    for a in set {
        for b in set {
            let c = if join { a.join(b) } else { a.meet(b) };
            if !set.contains(&c) {
                return Verdict::fail(
                    name,
                    Witness::pair(a, b).with_note(format!("missing {}", c)),
                );
            }
        }
    }
    Verdict::pass(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::PriceGrid;
    use crate::rat::Rat;
    use std::collections::BTreeMap;

    fn pt(coords: &[i64]) -> Point {
        Point::from_ints(coords)
    }

    fn grid012(dim: usize) -> PriceGrid {
        PriceGrid::product(dim, &[Rat::int(0), Rat::int(1), Rat::int(2)])
    }

    #[test]
    fn invert_is_membership_transpose() {
        let mut map = BTreeMap::new();
        map.insert(pt(&[0]), BTreeSet::from([pt(&[0]), pt(&[1])]));
        map.insert(pt(&[1]), BTreeSet::from([pt(&[1])]));
        let q = FiniteCorrespondence::new(1, map).unwrap();
        let (inv, closure) = invert(&q);
        assert!(closure.holds);
        assert_eq!(
            inv.image(&pt(&[1])).unwrap(),
            &BTreeSet::from([pt(&[0]), pt(&[1])])
        );
        assert_eq!(inv.image(&pt(&[0])).unwrap(), &BTreeSet::from([pt(&[0])]));
    }

    #[test]
    fn invert_twice_restores_graph() {
        let grid = grid012(2);
        let q = FiniteCorrespondence::from_function(&grid, |p| p.meet(&pt(&[1, 1]))).unwrap();
        let (inv, _) = invert(&q);
        let (back, _) = invert(&inv);
        for (p, qs) in q.entries() {
            for v in qs {
                assert!(back.contains(p, v));
            }
        }
        assert_eq!(back.graph_len(), q.graph_len());
    }

    #[test]
    fn identity_passes_all_inverse_properties() {
        let q = FiniteCorrespondence::from_function(&grid012(2), Point::clone).unwrap();
        for prop in [
            InverseProperty::TotallyIsotone,
            InverseProperty::SsoIsotone,
            InverseProperty::SublatticeFibers,
            InverseProperty::PointValued,
        ] {
            assert!(check_inverse(&q, prop).unwrap().holds, "{prop}");
        }
        let report = equivalence_suite(&q).unwrap();
        assert!(report.ugs && report.strongly_nonreversing && report.theorem2_consistent);
    }

    #[test]
    fn constant_correspondence_has_whole_grid_fiber() {
        let grid = PriceGrid::product(2, &[Rat::int(0), Rat::int(1)]);
        let q0 = pt(&[1, 1]);
        let q = FiniteCorrespondence::from_function(&grid, |_| q0.clone()).unwrap();
        assert!(check_inverse(&q, InverseProperty::SublatticeFibers)
            .unwrap()
            .holds);
        assert!(!check_inverse(&q, InverseProperty::PointValued).unwrap().holds);
    }

    #[test]
    fn partial_inverse_full_set_equals_invert() {
        let q = FiniteCorrespondence::from_function(&grid012(2), |p| {
            p.meet(&pt(&[1, 1]))
        })
        .unwrap();
        let (full, _) = partial_inverse(&q, &[0, 1], &[]).unwrap();
        let (inv, _) = invert(&q);
        assert_eq!(full, inv);
    }

    #[test]
    fn partial_inverse_empty_coordinate_set_is_degenerate() {
        let q = FiniteCorrespondence::from_function(&grid012(1), Point::clone).unwrap();
        let (deg, verdict) = partial_inverse(&q, &[], &[(0, Rat::int(1))]).unwrap();
        assert_eq!(deg.domain_len(), 1);
        assert!(verdict.holds);
    }

    #[test]
    fn partial_inverse_rejects_empty_slice() {
        let q = FiniteCorrespondence::from_function(&grid012(2), Point::clone).unwrap();
        assert!(matches!(
            partial_inverse(&q, &[0], &[(1, Rat::int(9))]),
            Err(LattError::EmptySlice)
        ));
    }

    #[test]
    fn monotone_shift_solution_sets() {
        // Q(p) = { p - (1,1) } on {0,1,2}^2 with target 0.
        let q = FiniteCorrespondence::from_function(&grid012(2), |p| {
            p.sub(&pt(&[1, 1]))
        })
        .unwrap();
        let (sets, structure) = solution_sets(&q, &Point::zero(2)).unwrap();
        let top = pt(&[1, 1]);
        let expected: BTreeSet<Point> = grid012(2)
            .iter()
            .filter(|p| Point::le(p, &top))
            .cloned()
            .collect();
        assert_eq!(sets.subsolutions, expected);
        assert_eq!(sets.solutions, BTreeSet::from([pt(&[1, 1])]));
        assert!(structure.subsolutions_join_closed.unwrap().holds);
        assert!(structure.supersolutions_meet_closed.unwrap().holds);
        assert!(structure.max_subsolution_is_solution.unwrap().holds);
    }

    #[test]
    fn empty_solution_set_skips_coincidence() {
        let q = FiniteCorrespondence::from_function(&grid012(1), |p| p.add(&pt(&[5]))).unwrap();
        let (sets, structure) = solution_sets(&q, &Point::zero(1)).unwrap();
        assert!(sets.solutions.is_empty());
        assert!(structure.max_subsolution_is_solution.is_none());
    }
}
