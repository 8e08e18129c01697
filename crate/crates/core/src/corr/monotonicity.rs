//! Nonreversingness and the monotonicity-style properties that imply it.

use super::{CorrError, FiniteCorrespondence, Verdict, Witness};
use crate::lp::{Cmp, LinearProgram};
use crate::point::Point;
use crate::rat::Rat;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonotonicityProperty {
    /// Ordered prices with oppositely ordered quantities force both
    /// memberships to cross over.
    Nonreversing,
    /// Same antecedent, but the prices must coincide.
    StronglyNonreversing,
    /// `sum_z k_z q_z` is the same for every graph element, for the supplied
    /// strictly positive weights.
    ConstantAggregateOutput(Vec<Rat>),
    /// `p >= p'` implies `sum q >= sum q'` across images.
    MonotoneTotalOutput,
    /// `p >= p'` and `q < q'` never hold together.
    AggregateMonotonicity,
    /// For every tuple some strictly positive weight vector makes the
    /// meet/join quantities monotone; decided by exact linear feasibility
    /// with the normalization `k_z >= 1`.
    WeightedMonotonicity,
    /// `p . q = 0` on the whole graph.
    Walras,
    /// The P-correspondence implication: the nonreversingness antecedent
    /// forces `p = p'`.
    PCorrespondence,
    /// Connected-strict-substitutes style condition: for `p > p'` with
    /// equality pattern `B`, quantities `q <= q'` must strictly gain on some
    /// coordinate of `B` or on the synthesized outside good `q_0 = -sum q`.
    Bgh3,
}

impl MonotonicityProperty {
    pub fn name(&self) -> &'static str {
        match self {
            MonotonicityProperty::Nonreversing => "nonreversing",
            MonotonicityProperty::StronglyNonreversing => "strongly_nonreversing",
            MonotonicityProperty::ConstantAggregateOutput(_) => "constant_aggregate_output",
            MonotonicityProperty::MonotoneTotalOutput => "monotone_total_output",
            MonotonicityProperty::AggregateMonotonicity => "aggregate_monotonicity",
            MonotonicityProperty::WeightedMonotonicity => "weighted_monotonicity",
            MonotonicityProperty::Walras => "walras",
            MonotonicityProperty::PCorrespondence => "p_correspondence",
            MonotonicityProperty::Bgh3 => "bgh3",
        }
    }
}

impl fmt::Display for MonotonicityProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn check_monotonicity(
    q: &FiniteCorrespondence,
    property: &MonotonicityProperty,
) -> Result<Verdict, CorrError> {
    q.require_sublattice()?;
    match property {
        MonotonicityProperty::Nonreversing => Ok(check_nonreversing(q)),
        MonotonicityProperty::StronglyNonreversing => {
            Ok(check_strongly_nonreversing(q, "strongly_nonreversing"))
        }
        MonotonicityProperty::PCorrespondence => {
            Ok(check_strongly_nonreversing(q, "p_correspondence"))
        }
        MonotonicityProperty::ConstantAggregateOutput(k) => check_constant_aggregate(q, k),
        MonotonicityProperty::MonotoneTotalOutput => Ok(check_monotone_total_output(q)),
        MonotonicityProperty::AggregateMonotonicity => Ok(check_aggregate_monotonicity(q)),
        MonotonicityProperty::WeightedMonotonicity => Ok(check_weighted_monotonicity(q)),
        MonotonicityProperty::Walras => Ok(check_walras(q)),
        MonotonicityProperty::Bgh3 => Ok(check_bgh3(q)),
    }
}

fn check_nonreversing(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            if !pp.le(p) {
                continue;
            }
            for q in qs {
                for qp in qps {
                    if q.le(qp) && !(corr.contains(pp, q) && corr.contains(p, qp)) {
                        return Verdict::fail(
                            "nonreversing",
                            Witness::pair(p, pp)
                                .with_q(q)
                                .with_q_prime(qp)
                                .with_note("memberships do not cross over"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("nonreversing")
}

fn check_strongly_nonreversing(corr: &FiniteCorrespondence, name: &str) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            if !pp.le(p) || p == pp {
                continue;
            }
            for q in qs {
                for qp in qps {
                    if q.le(qp) {
                        return Verdict::fail(
                            name,
                            Witness::pair(p, pp)
                                .with_q(q)
                                .with_q_prime(qp)
                                .with_note("ordered quantities at distinct ordered prices"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass(name)
}

fn check_constant_aggregate(
    corr: &FiniteCorrespondence,
    k: &[Rat],
) -> Result<Verdict, CorrError> {
    if k.len() != corr.dim() {
        return Err(CorrError::WeightLength {
            expected: corr.dim(),
            found: k.len(),
        });
    }
    if !k.iter().all(Rat::is_positive) {
        return Err(CorrError::NonPositiveWeight);
    }
    let weighted = |q: &Point| -> Rat {
        q.coords()
            .iter()
            .zip(k)
            .map(|(qz, kz)| qz * kz)
            .sum()
    };
    let mut first: Option<(Point, Point, Rat)> = None;
    for (p, qs) in corr.entries() {
        for q in qs {
            let s = weighted(q);
            match &first {
                None => first = Some((p.clone(), q.clone(), s)),
                Some((p0, q0, s0)) => {
                    if s != *s0 {
                        return Ok(Verdict::fail(
                            "constant_aggregate_output",
                            Witness::pair(p0, p)
                                .with_q(q0)
                                .with_q_prime(q)
                                .with_note(format!("weighted sums {} vs {}", s0, s)),
                        ));
                    }
                }
            }
        }
    }
    Ok(Verdict::pass("constant_aggregate_output"))
}

fn check_monotone_total_output(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            if !pp.le(p) {
                continue;
            }
            for q in qs {
                for qp in qps {
                    if q.coord_sum() < qp.coord_sum() {
                        return Verdict::fail(
                            "monotone_total_output",
                            Witness::pair(p, pp)
                                .with_q(q)
                                .with_q_prime(qp)
                                .with_note("total output falls as prices rise"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("monotone_total_output")
}

fn check_aggregate_monotonicity(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            if !pp.le(p) {
                continue;
            }
            for q in qs {
                for qp in qps {
                    if q.lt(qp) {
                        return Verdict::fail(
                            "aggregate_monotonicity",
                            Witness::pair(p, pp)
                                .with_q(q)
                                .with_q_prime(qp)
                                .with_note("q < q' with p >= p'"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("aggregate_monotonicity")
}

/// Exact feasibility of `k . a >= 0`, `k . b >= 0`, `k >= 1`, solved with
/// `k = 1 + t`, `t >= 0`.
pub(crate) fn feasible_weight(a: &Point, b: &Point) -> Option<Vec<Rat>> {
    let n = a.dim();
    let ones_a: Rat = a.coords().iter().sum();
    let ones_b: Rat = b.coords().iter().sum();
    let mut lp = LinearProgram::new(n);
    lp.constraint(a.coords().to_vec(), Cmp::Ge, -ones_a);
    lp.constraint(b.coords().to_vec(), Cmp::Ge, -ones_b);
    lp.feasible_point().map(|t| {
        t.into_iter()
            .map(|tz| tz + Rat::one())
            .collect()
    })
}

fn check_weighted_monotonicity(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            let meet_image = corr.image(&p.meet(pp)).expect("sublattice");
            let join_image = corr.image(&p.join(pp)).expect("sublattice");
            for q in qs {
                for qp in qps {
                    let mut found = false;
                    'search: for qm in meet_image {
                        for qj in join_image {
                            let a = q.sub(qm);
                            let b = qj.sub(qp);
                            if feasible_weight(&a, &b).is_some() {
                                found = true;
                                break 'search;
                            }
                        }
                    }
                    if !found {
                        return Verdict::fail(
                            "weighted_monotonicity",
                            Witness::pair(p, pp)
                                .with_q(q)
                                .with_q_prime(qp)
                                .with_note("no strictly positive weights for any meet/join pair"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("weighted_monotonicity")
}

fn check_walras(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for q in qs {
            let v = p.dot(q);
            if !v.is_zero() {
                return Verdict::fail(
                    "walras",
                    Witness::pair(p, p)
                        .with_q(q)
                        .with_note(format!("p.q = {}", v)),
                );
            }
        }
    }
    Verdict::pass("walras")
}

fn check_bgh3(corr: &FiniteCorrespondence) -> Verdict {
    for (p, qs) in corr.entries() {
        for (pp, qps) in corr.entries() {
            if !pp.le(p) || p == pp {
                continue;
            }
            let b: Vec<usize> = (0..corr.dim())
                .filter(|&z| p.get(z) == pp.get(z))
                .collect();
            for q in qs {
                for qp in qps {
                    if !q.le(qp) {
                        continue;
                    }
                    let inside = b.iter().any(|&z| q.get(z) < qp.get(z));
                    let outside = -q.coord_sum() < -qp.coord_sum();
                    if !inside && !outside {
                        let mut w = Witness::pair(p, pp).with_q(q).with_q_prime(qp);
                        w.subset = Some(b.clone());
                        return Verdict::fail(
                            "bgh3",
                            w.with_note("no excess coordinate in B or the outside good"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass("bgh3")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{Point, PriceGrid};
    use crate::rat::{rat, Rat};

    fn pt(coords: &[i64]) -> Point {
        Point::from_ints(coords)
    }

    fn identity_on(levels: &[i64], dim: usize) -> FiniteCorrespondence {
        let levels: Vec<Rat> = levels.iter().map(|&v| Rat::int(v)).collect();
        let grid = PriceGrid::product(dim, &levels);
        FiniteCorrespondence::from_function(&grid, Point::clone).unwrap()
    }

    #[test]
    fn identity_is_strongly_nonreversing() {
        let c = identity_on(&[0, 1, 2], 2);
        for prop in [
            MonotonicityProperty::Nonreversing,
            MonotonicityProperty::StronglyNonreversing,
            MonotonicityProperty::PCorrespondence,
        ] {
            assert!(check_monotonicity(&c, &prop).unwrap().holds, "{prop}");
        }
    }

    #[test]
    fn constant_aggregate_needs_positive_weights() {
        let c = identity_on(&[0, 1], 2);
        let bad = MonotonicityProperty::ConstantAggregateOutput(vec![Rat::int(1), Rat::int(0)]);
        assert!(matches!(
            check_monotonicity(&c, &bad),
            Err(CorrError::NonPositiveWeight)
        ));
        // The identity map changes weighted output across prices.
        let k = MonotonicityProperty::ConstantAggregateOutput(vec![Rat::one(), Rat::one()]);
        assert!(!check_monotonicity(&c, &k).unwrap().holds);
    }

    /// Walras-law data measured in money has constant unit-weighted output
    /// and is therefore nonreversing.
    #[test]
    fn walras_then_monetize_chain() {
        // q(p) orthogonal to p on a positive grid: q = (p2, -p1) . p = 0.
        let grid = PriceGrid::product(2, &[Rat::int(1), Rat::int(2)]);
        let c = FiniteCorrespondence::from_function(&grid, |p| {
            Point::new(vec![p.get(1).clone(), -p.get(0)])
        })
        .unwrap();
        assert!(check_monotonicity(&c, &MonotonicityProperty::Walras)
            .unwrap()
            .holds);
        let money = c.monetize().unwrap();
        let k = MonotonicityProperty::ConstantAggregateOutput(vec![Rat::one(), Rat::one()]);
        assert!(check_monotonicity(&money, &k).unwrap().holds);
        assert!(
            check_monotonicity(&money, &MonotonicityProperty::Nonreversing)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn weight_feasibility_matches_hand_check() {
        // k.(1,-1) >= 0 and k.(-1,1) >= 0 force k1 = k2: feasible.
        assert!(feasible_weight(&pt(&[1, -1]), &pt(&[-1, 1])).is_some());
        // k.(-1,0) >= 0 with k >= 1 is impossible.
        assert!(feasible_weight(&pt(&[-1, 0]), &pt(&[0, 0])).is_none());
        let k = feasible_weight(&pt(&[5, -2, -4]), &pt(&[5, -2, -4])).unwrap();
        let dot: Rat = k
            .iter()
            .zip([5i64, -2, -4])
            .map(|(kz, v)| kz * &rat(&v.to_string()))
            .sum();
        assert!(dot >= Rat::zero());
    }
}
