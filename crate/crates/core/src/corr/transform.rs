//! Correspondence transforms: monetary measurement, aggregation, and the
//! outside-good extension.

use super::{CorrError, FiniteCorrespondence};
use crate::point::Point;
use crate::rat::Rat;
use std::collections::{BTreeMap, BTreeSet};

impl FiniteCorrespondence {
    /// Entrywise monetary measurement `q_z -> p_z q_z`; prices must be
    /// nonnegative for the equivalence with the raw correspondence to hold.
    pub fn monetize(&self) -> Result<FiniteCorrespondence, CorrError> {
        for p in self.domain() {
            if p.coords().iter().any(Rat::is_negative) {
                return Err(CorrError::NegativePrice(p.clone()));
            }
        }
        let map = self
            .entries()
            .map(|(p, qs)| {
                let monetized: BTreeSet<Point> = qs
                    .iter()
                    .map(|q| {
                        Point::new(
                            p.coords()
                                .iter()
                                .zip(q.coords())
                                .map(|(pz, qz)| pz * qz)
                                .collect(),
                        )
                    })
                    .collect();
                (p.clone(), monetized)
            })
            .collect();
        Ok(FiniteCorrespondence::from_parts_unchecked(self.dim(), map))
    }

    /// Minkowski combination `lambda Q + mu Q2` on a shared domain.
    pub fn aggregate(
        &self,
        other: &FiniteCorrespondence,
        lambda: &Rat,
        mu: &Rat,
    ) -> Result<FiniteCorrespondence, CorrError> {
        if lambda.is_negative() || mu.is_negative() {
            return Err(CorrError::NonPositiveWeight);
        }
        if self.dim() != other.dim() || self.domain_len() != other.domain_len() {
            return Err(CorrError::DomainMismatch);
        }
        let mut map = BTreeMap::new();
        for (p, qs) in self.entries() {
            let qs2 = other.image(p).ok_or(CorrError::DomainMismatch)?;
            let mut combined = BTreeSet::new();
            for q1 in qs {
                for q2 in qs2 {
                    combined.insert(q1.scale(lambda).add(&q2.scale(mu)));
                }
            }
            map.insert(p.clone(), combined);
        }
        Ok(FiniteCorrespondence::from_parts_unchecked(self.dim(), map))
    }

    /// Appends an outside good with quantity `p0 - k . q` and constant price
    /// coordinate `p0`.
    pub fn extend_outside_good(
        &self,
        k: &[Rat],
        p0: &Rat,
    ) -> Result<FiniteCorrespondence, CorrError> {
        if k.len() != self.dim() {
            return Err(CorrError::WeightLength {
                expected: self.dim(),
                found: k.len(),
            });
        }
        if !k.iter().all(Rat::is_positive) {
            return Err(CorrError::NonPositiveWeight);
        }
        let map = self
            .entries()
            .map(|(p, qs)| {
                let extended: BTreeSet<Point> = qs
                    .iter()
                    .map(|q| {
                        let weighted: Rat = q
                            .coords()
                            .iter()
                            .zip(k)
                            .map(|(qz, kz)| qz * kz)
                            .sum();
                        q.push(p0 - &weighted)
                    })
                    .collect();
                (p.push(p0.clone()), extended)
            })
            .collect();
        Ok(FiniteCorrespondence::from_parts_unchecked(self.dim() + 1, map))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::{check_monotonicity, check_substitutes, MonotonicityProperty, SubstitutesNotion};
    use crate::point::PriceGrid;
    use crate::rat::Rat;

    fn pt(coords: &[i64]) -> Point {
        Point::from_ints(coords)
    }

    fn single(dim: usize, entries: &[(&[i64], &[&[i64]])]) -> FiniteCorrespondence {
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
    fn monetize_is_componentwise_product() {
        let c = single(2, &[(&[1, 2], &[&[2, 3]])]);
        let m = c.monetize().unwrap();
        assert_eq!(
            m.image(&pt(&[1, 2])).unwrap().iter().next().unwrap(),
            &pt(&[2, 6])
        );
    }

    #[test]
    fn monetize_rejects_negative_prices() {
        let c = single(1, &[(&[-1], &[&[0]])]);
        assert!(matches!(c.monetize(), Err(CorrError::NegativePrice(_))));
    }

    #[test]
    fn aggregate_is_minkowski_sum() {
        let c = single(2, &[(&[0, 0], &[&[0, 1], &[1, 0]])]);
        let s = c.aggregate(&c, &Rat::one(), &Rat::one()).unwrap();
        let image = s.image(&pt(&[0, 0])).unwrap();
        let expected: BTreeSet<Point> =
            [pt(&[0, 2]), pt(&[1, 1]), pt(&[2, 0])].into_iter().collect();
        assert_eq!(image, &expected);
    }

    #[test]
    fn extension_appends_budget_coordinate() {
        let c = single(2, &[(&[1, 1], &[&[2, 3]])]);
        let e = c
            .extend_outside_good(&[Rat::one(), Rat::one()], &Rat::int(10))
            .unwrap();
        assert_eq!(e.dim(), 3);
        let p = pt(&[1, 1, 10]);
        assert_eq!(e.image(&p).unwrap().iter().next().unwrap(), &pt(&[2, 3, 5]));
    }

    /// Extension lemma: ugs of the extended correspondence implies ugs and
    /// weighted monotonicity of the base.
    #[test]
    fn extension_lemma_on_small_instance() {
        let levels = [Rat::int(0), Rat::int(1)];
        let grid = PriceGrid::product(2, &levels);
        // Unit-sum constant-output map: q(p) picks the cheaper good.
        let c = FiniteCorrespondence::from_function(&grid, |p| {
            if p.get(0) <= p.get(1) {
                pt(&[1, 0])
            } else {
                pt(&[0, 1])
            }
        })
        .unwrap();
        let ones = vec![Rat::one(), Rat::one()];
        let ext = c.extend_outside_good(&ones, &Rat::int(1)).unwrap();
        if check_substitutes(&ext, SubstitutesNotion::Ugs).unwrap().holds {
            assert!(check_substitutes(&c, SubstitutesNotion::Ugs).unwrap().holds);
            assert!(check_monotonicity(&c, &MonotonicityProperty::WeightedMonotonicity)
                .unwrap()
                .holds);
        }
    }
}
