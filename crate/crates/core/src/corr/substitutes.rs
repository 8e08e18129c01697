//! Substitutes-property checkers: unified gross substitutes and the notions
//! it is compared against.

use super::{CorrError, FiniteCorrespondence, Verdict, Witness};
use crate::point::Point;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstitutesNotion {
    /// Definition of unified gross substitutes: a single pair `(q^, qv)` at
    /// the meet/join prices covering both coordinate families, with a weak
    /// antecedent on `p_z <= p'_z` and a strict one on `p'_z < p_z`.
    Ugs,
    /// The rejected variant with both antecedents weak.
    UgsStrongAntecedent,
    /// For `p' <= p` and `q` in `Q(p)` there is `q'` in `Q(p')` with
    /// `q'_z >= q_z` wherever `p_z = p'_z`.
    KelsoCrawford,
    /// For `p <= p'` it is never the case that every constant-price
    /// coordinate strictly gains.
    PolterovichSpivak,
    /// Textbook weak gross substitutes for point-valued data: on comparable
    /// grid pairs, raising other prices never raises a constant-price
    /// coordinate.
    WgsFunction,
}

impl SubstitutesNotion {
    pub fn name(self) -> &'static str {
        match self {
            SubstitutesNotion::Ugs => "ugs",
            SubstitutesNotion::UgsStrongAntecedent => "ugs_strong_antecedent",
            SubstitutesNotion::KelsoCrawford => "kelso_crawford",
            SubstitutesNotion::PolterovichSpivak => "polterovich_spivak",
            SubstitutesNotion::WgsFunction => "wgs_function",
        }
    }
}

impl fmt::Display for SubstitutesNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn check_substitutes(
    q: &FiniteCorrespondence,
    notion: SubstitutesNotion,
) -> Result<Verdict, CorrError> {
    q.require_sublattice()?;
    match notion {
        SubstitutesNotion::Ugs => Ok(check_ugs(q, false)),
        SubstitutesNotion::UgsStrongAntecedent => Ok(check_ugs(q, true)),
        SubstitutesNotion::KelsoCrawford => Ok(check_kelso_crawford(q)),
        SubstitutesNotion::PolterovichSpivak => Ok(check_polterovich_spivak(q)),
        SubstitutesNotion::WgsFunction => check_wgs_function(q),
    }
}

/// Lower bound that `q^` must dominate and upper bound that `qv` must stay
/// under, per Definition 1. With `strong_antecedent` the equality coordinates
/// constrain both sides.
fn ugs_bounds(p: &Point, pp: &Point, q: &Point, qp: &Point, strong: bool) -> (Point, Point) {
    let n = p.dim();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for z in 0..n {
        let (pz, ppz) = (p.get(z), pp.get(z));
        let (qz, qpz) = (q.get(z), qp.get(z));
        if strong && pz == ppz {
            lower.push(qz.clone().max(qpz.clone()));
            upper.push(qz.clone().min(qpz.clone()));
        } else if pz <= ppz {
            lower.push(qz.clone());
            upper.push(qpz.clone());
        } else {
            lower.push(qpz.clone());
            upper.push(qz.clone());
        }
    }
    (Point::new(lower), Point::new(upper))
}

fn check_ugs(corr: &FiniteCorrespondence, strong: bool) -> Verdict {
    let name = if strong {
        "ugs_strong_antecedent"
    } else {
        "ugs"
    };
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            let meet_image = corr.image(&p.meet(pp)).expect("domain is a sublattice");
            let join_image = corr.image(&p.join(pp)).expect("domain is a sublattice");
            for q in qs {
                for qp in qps {
                    let (lower, upper) = ugs_bounds(p, pp, q, qp, strong);
                    let meet_ok = meet_image.iter().any(|c| lower.le(c));
                    let join_ok = join_image.iter().any(|c| c.le(&upper));
                    if !meet_ok || !join_ok {
                        let side = if !meet_ok {
                            format!("no q^ in Q(p^p') dominates {}", lower)
                        } else {
                            format!("no qv in Q(pvp') below {}", upper)
                        };
                        return Verdict::fail(
                            name,
                            Witness::pair(p, pp).with_q(q).with_q_prime(qp).with_note(side),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass(name)
}

fn check_kelso_crawford(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            if !pp.le(p) {
                continue;
            }
            let constant: Vec<usize> = (0..corr.dim())
                .filter(|&z| p.get(z) == pp.get(z))
                .collect();
            for q in qs {
                let ok = qps
                    .iter()
                    .any(|qp| constant.iter().all(|&z| qp.get(z) >= q.get(z)));
                if !ok {
                    return Verdict::fail(
                        "kelso_crawford",
                        Witness::pair(p, pp)
                            .with_q(q)
                            .with_note("no q' in Q(p') dominates q on constant-price coordinates"),
                    );
                }
            }
        }
    }
    Verdict::pass("kelso_crawford")
}

fn check_polterovich_spivak(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            if !p.le(pp) {
                continue;
            }
            let constant: Vec<usize> = (0..corr.dim())
                .filter(|&z| p.get(z) == pp.get(z))
                .collect();
            if constant.is_empty() {
                // No good keeps a constant price, so the condition is silent.
                continue;
            }
            for q in qs {
                for qp in qps {
                    if constant.iter().all(|&z| qp.get(z) > q.get(z)) {
                        return Verdict::fail(
                            "polterovich_spivak",
                            Witness::pair(p, pp)
                                .with_q(q)
                                .with_q_prime(qp)
                                .with_note("every constant-price coordinate strictly increases"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("polterovich_spivak")
}

fn check_wgs_function(corr: &FiniteCorrespondence) -> Result<Verdict, CorrError> {
    for (p, qs) in corr.entries() {
        if qs.len() != 1 {
            return Err(CorrError::SetValued(p.clone(), qs.len()));
        }
    }
    let value = |p: &Point| corr.image(p).unwrap().iter().next().unwrap();
    for (p, _) in corr.entries() {
        for (pp, _) in corr.entries() {
            if !p.le(pp) || p == pp {
                continue;
            }
            let (q, qp) = (value(p), value(pp));
            for z in 0..corr.dim() {
                if p.get(z) == pp.get(z) && qp.get(z) > q.get(z) {
                    return Ok(Verdict::fail(
                        "wgs_function",
                        Witness::pair(p, pp)
                            .with_q(q)
                            .with_q_prime(qp)
                            .with_coord(z)
                            .with_note("coordinate rises with other prices"),
                    ));
                }
            }
        }
    }
    Ok(Verdict::pass("wgs_function"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{Point, PriceGrid};
    use crate::rat::Rat;
    use std::collections::{BTreeMap, BTreeSet};

    fn pt(coords: &[i64]) -> Point {
        Point::from_ints(coords)
    }

    fn corr_of(dim: usize, entries: &[(&[i64], &[&[i64]])]) -> FiniteCorrespondence {
        let mut map = BTreeMap::new();
        for (p, qs) in entries {
            map.insert(
                Point::from_ints(p),
                qs.iter().map(|q| Point::from_ints(q)).collect::<BTreeSet<_>>(),
            );
        }
        FiniteCorrespondence::new(dim, map).unwrap()
    }

    #[test]
    fn constant_correspondence_satisfies_everything() {
        let grid = PriceGrid::product(2, &[Rat::int(0), Rat::int(1)]);
        let q0 = pt(&[3, 4]);
        let c = FiniteCorrespondence::from_function(&grid, |_| q0.clone()).unwrap();
        for notion in [
            SubstitutesNotion::Ugs,
            SubstitutesNotion::UgsStrongAntecedent,
            SubstitutesNotion::KelsoCrawford,
            SubstitutesNotion::PolterovichSpivak,
            SubstitutesNotion::WgsFunction,
        ] {
            assert!(check_substitutes(&c, notion).unwrap().holds, "{notion}");
        }
    }

    #[test]
    fn rejects_non_sublattice_domain() {
        let c = corr_of(2, &[(&[0, 1], &[&[0, 0]]), (&[1, 0], &[&[0, 0]])]);
        assert!(matches!(
            check_substitutes(&c, SubstitutesNotion::Ugs),
            Err(CorrError::NotASublattice { .. })
        ));
    }

    #[test]
    fn wgs_requires_point_valued() {
        let c = corr_of(1, &[(&[0], &[&[0], &[1]])]);
        assert!(matches!(
            check_substitutes(&c, SubstitutesNotion::WgsFunction),
            Err(CorrError::SetValued(..))
        ));
    }

    /// Two-good supply with one increasing coordinate: raising p2 raises q1,
    /// which violates weak gross substitutes and ugs alike.
    #[test]
    fn complements_fail_wgs_and_ugs() {
        let grid = PriceGrid::product(2, &[Rat::int(0), Rat::int(1)]);
        let c = FiniteCorrespondence::from_function(&grid, |p| {
            Point::new(vec![p.get(1).clone(), p.get(0).clone()])
        })
        .unwrap();
        // The involution q(p) = (p2, p1) is pure complements.
        assert!(!check_substitutes(&c, SubstitutesNotion::WgsFunction)
            .unwrap()
            .holds);
        assert!(!check_substitutes(&c, SubstitutesNotion::Ugs).unwrap().holds);
    }

    /// Independence fixture: ugs holds, Polterovich-Spivak fails.
    #[test]
    fn ugs_without_polterovich_spivak() {
        let c = corr_of(
            2,
            &[
                (&[1, 1], &[&[1, 0], &[3, 0]]),
                (&[1, 2], &[&[0, 0], &[2, 0]]),
            ],
        );
        assert!(check_substitutes(&c, SubstitutesNotion::Ugs).unwrap().holds);
        let ps = check_substitutes(&c, SubstitutesNotion::PolterovichSpivak).unwrap();
        assert!(!ps.holds);
        let w = ps.witness.unwrap();
        assert_eq!(w.p.unwrap(), pt(&[1, 1]));
        assert_eq!(w.p_prime.unwrap(), pt(&[1, 2]));
    }
}
