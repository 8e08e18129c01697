//! Catalog of fixed instances reproducing the counterexamples and small
//! demonstration markets, with the exact printed values.

use crate::io::{InstanceFile, Payload};
use anyhow::{bail, Result};
use equistat_core::corr::FiniteCorrespondence;
use equistat_core::flow::{Arc, ConnectionFunction, FlowProblem, Network};
use equistat_core::markets::{HedonicMarket, ItuMarket, MonotoneMap, NtuMarket, TransferPair};
use equistat_core::point::{Point, PriceGrid};
use equistat_core::producer::{argmax_correspondence, DiscreteProducer, LogitModel, ObjectiveTable};
use equistat_core::rat::{rat, Rat};
use std::collections::{BTreeMap, BTreeSet};

pub const CATALOG: &[&str] = &[
    "a2_sum_m0",
    "a3_kelso_crawford",
    "a4_ps_not_ugs",
    "a4_ugs_not_ps",
    "a6_topkis_not_ugs",
    "a6_ugs_not_milgrom_shannon",
    "b1_simplex_argmax",
    "b2_kettle",
    "figure2_style_flow",
    "demo_ntu_2x2",
    "demo_tu_2x2",
    "demo_hedonic_1x1x1",
];

pub fn fixture(name: &str) -> Result<InstanceFile> {
    let payload = match name {
        "a2_sum_m0" => Payload::Correspondence(a2_components().2),
        "a3_kelso_crawford" => Payload::Correspondence(a3_kelso_crawford()),
        "a4_ps_not_ugs" => Payload::Correspondence(a4_ps_not_ugs()),
        "a4_ugs_not_ps" => Payload::Correspondence(a4_ugs_not_ps()),
        "a6_topkis_not_ugs" => Payload::Correspondence(a6_topkis()),
        "a6_ugs_not_milgrom_shannon" => Payload::Correspondence(a6_involution()),
        "b1_simplex_argmax" => Payload::Correspondence(b1_simplex_argmax()),
        "b2_kettle" => Payload::Correspondence(b2_kettle()),
        "figure2_style_flow" => Payload::Network(figure2_style_flow()),
        "demo_ntu_2x2" => Payload::Ntu(demo_ntu_2x2()),
        "demo_tu_2x2" => Payload::Itu(demo_tu_2x2()),
        "demo_hedonic_1x1x1" => Payload::Hedonic(demo_hedonic_1x1x1()),
        other => bail!("unknown fixture `{other}`"),
    };
    Ok(InstanceFile::new(payload))
}

/// Linear map tabulated on a grid: `Q(p) = { M p }`.
pub fn linear_correspondence(matrix: &[Vec<Rat>], grid: &PriceGrid) -> FiniteCorrespondence {
    FiniteCorrespondence::from_function(grid, |p| {
        Point::new(
            matrix
                .iter()
                .map(|row| row.iter().zip(p.coords()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    })
    .expect("grid is nonempty")
}

fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| Rat::int(v)).collect())
        .collect()
}

fn grid012(dim: usize) -> PriceGrid {
    PriceGrid::product(dim, &[Rat::int(0), Rat::int(1), Rat::int(2)])
}

/// The two M0-functions `p -> Mp` and `p -> M^T p` and their Minkowski sum,
/// all on the grid `{0,1,2}^2`.
pub fn a2_components() -> (
    FiniteCorrespondence,
    FiniteCorrespondence,
    FiniteCorrespondence,
) {
    let grid = grid012(2);
    let m = int_matrix(&[&[5, -1], &[-4, 1]]);
    let mt = int_matrix(&[&[5, -4], &[-1, 1]]);
    let q1 = linear_correspondence(&m, &grid);
    let q2 = linear_correspondence(&mt, &grid);
    let sum = q1
        .aggregate(&q2, &Rat::one(), &Rat::one())
        .expect("shared domain");
    (q1, q2, sum)
}

fn corr_from(dim: usize, entries: &[(&[i64], &[&[i64]])]) -> FiniteCorrespondence {
    let mut map = BTreeMap::new();
    for (p, qs) in entries {
        map.insert(
            Point::from_ints(p),
            qs.iter().map(|q| Point::from_ints(q)).collect::<BTreeSet<_>>(),
        );
    }
    FiniteCorrespondence::new(dim, map).expect("fixture well formed")
}

/// The four-price table separating the Kelso-Crawford property from unified
/// gross substitutes. The printed tables are demand-oriented; quantities are
/// negated here (the documented orientation flip) so the supply-form
/// checkers read them directly.
pub fn a3_kelso_crawford() -> FiniteCorrespondence {
    corr_from(
        4,
        &[
            (&[1, 1, 1, 1], &[&[-1, 0, 0, 0], &[0, 0, 0, -1]]),
            (&[1, 1, 2, 2], &[&[-1, 0, -1, -1], &[0, -1, -1, 0]]),
            (&[2, 2, 1, 1], &[&[-1, -1, 0, -1], &[0, -1, -1, 0]]),
            (&[2, 2, 2, 2], &[&[-1, -1, -1, 0], &[0, -1, -1, -1]]),
        ],
    )
}

/// The repeated quantity point of the table above, after the orientation
/// flip; it belongs to both off-diagonal images but not to the meet image.
pub fn a3_repeated_point() -> Point {
    Point::from_ints(&[0, -1, -1, 0])
}

/// Supply table satisfying Polterovich-Spivak substitutability but not
/// unified gross substitutes.
pub fn a4_ps_not_ugs() -> FiniteCorrespondence {
    corr_from(
        4,
        &[
            (&[1, 1, 1, 1], &[&[1, 0, 2, 1]]),
            (&[1, 1, 2, 2], &[&[0, 1, 2, 1]]),
            (&[2, 2, 1, 1], &[&[1, 2, 2, 0]]),
            (&[2, 2, 2, 2], &[&[0, 2, 2, 0]]),
        ],
    )
}

/// Two-point chain satisfying unified gross substitutes but not
/// Polterovich-Spivak.
pub fn a4_ugs_not_ps() -> FiniteCorrespondence {
    corr_from(
        2,
        &[
            (&[1, 1], &[&[1, 0], &[3, 0]]),
            (&[1, 2], &[&[0, 0], &[2, 0]]),
        ],
    )
}

/// `Q(p) = Yp` for the positive-inverse matrix that fails weak gross
/// substitutes yet has an isotone inverse.
pub fn a6_topkis() -> FiniteCorrespondence {
    let y: Vec<Vec<Rat>> = [
        [63i64, -28, -28],
        [-28, 16, 12],
        [-28, 12, 16],
    ]
    .iter()
    .map(|row| row.iter().map(|&v| Rat::new(v, 28)).collect())
    .collect();
    linear_correspondence(&y, &grid012(3))
}

/// The coordinate-swap involution `q(p) = (p2, p1)`: unified gross
/// substitutes and nonreversing, yet its objective table fails single
/// crossing.
pub fn a6_involution() -> FiniteCorrespondence {
    FiniteCorrespondence::from_function(&grid012(2), |p| {
        Point::new(vec![p.get(1).clone(), p.get(0).clone()])
    })
    .expect("grid nonempty")
}

/// Indicator objective of the involution: `g(p, q) = 1` iff `q = (p2, p1)`.
pub fn a6_involution_table() -> ObjectiveTable {
    let grid = grid012(2);
    let q_grid: Vec<Point> = grid.iter().cloned().collect();
    let mut values = BTreeMap::new();
    for p in grid.iter() {
        let swap = Point::new(vec![p.get(1).clone(), p.get(0).clone()]);
        for q in &q_grid {
            let v = if *q == swap { Rat::one() } else { Rat::zero() };
            values.insert((p.clone(), q.clone()), v);
        }
    }
    ObjectiveTable {
        p_grid: grid,
        q_grid,
        values,
    }
}

/// Payoff-maximizing mixture over two pure outcomes, tabulated on `{1,2}^2`
/// so the first scan hits the printed failing tuple.
pub fn b1_simplex_argmax() -> FiniteCorrespondence {
    let prod = b1_producer();
    let grid = PriceGrid::product(2, &[Rat::int(1), Rat::int(2)]);
    argmax_correspondence(&prod, &grid).expect("valid grid")
}

pub fn b1_producer() -> DiscreteProducer {
    DiscreteProducer::free(2, vec![Point::from_ints(&[1, 0]), Point::from_ints(&[0, 1])])
        .expect("two vertices")
}

/// Quadratic-cost supply `q(p) = (1/2) C^{-1} p` with the printed inverse,
/// tabulated exactly (denominators of 180) on `{0,1,2}^3`.
pub fn b2_kettle() -> FiniteCorrespondence {
    let half_c_inv: Vec<Vec<Rat>> = [
        [50i64, -20, -40],
        [-20, 98, -20],
        [-40, -20, 50],
    ]
    .iter()
    .map(|row| row.iter().map(|&v| Rat::new(v, 180)).collect())
    .collect();
    linear_correspondence(&half_c_inv, &grid012(3))
}

/// Three-node network in the style of the worked equilibrium-flow example:
/// a two-hop route priced against a direct arc, with a unit shipment.
pub fn figure2_style_flow() -> FlowProblem {
    let nodes = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let arcs = vec![
        Arc {
            from: 0,
            to: 1,
            connection: ConnectionFunction::additive(Rat::one()),
        },
        Arc {
            from: 1,
            to: 2,
            connection: ConnectionFunction::additive(Rat::one()),
        },
        Arc {
            from: 0,
            to: 2,
            connection: ConnectionFunction::additive(Rat::int(2)),
        },
    ];
    let network = Network::new(nodes, arcs).expect("valid network");
    FlowProblem::new(network, vec![Rat::int(-1), Rat::zero(), Rat::int(1)]).expect("balanced")
}

/// Opposed preferences: men rank their own index first, women the opposite,
/// giving exactly two stable matchings.
pub fn demo_ntu_2x2() -> NtuMarket {
    NtuMarket {
        alpha: vec![vec![rat("2"), rat("1")], vec![rat("1"), rat("2")]],
        alpha0: vec![rat("0"), rat("0")],
        gamma: vec![vec![rat("1"), rat("2")], vec![rat("2"), rat("1")]],
        gamma0: vec![rat("0"), rat("0")],
    }
}

/// Assortative two-by-two transferable-utility market with singles.
pub fn demo_tu_2x2() -> ItuMarket {
    let alpha = [[2i64, 1], [1, 0]];
    let gamma = [[2i64, 1], [1, 0]];
    let mut pairs = BTreeMap::new();
    for x in 0..2 {
        for y in 0..2 {
            pairs.insert(
                (x, y),
                TransferPair::Tu {
                    alpha: Rat::int(alpha[x][y]),
                    gamma: Rat::int(gamma[x][y]),
                },
            );
        }
    }
    ItuMarket {
        workers: vec![("x0".into(), 1), ("x1".into(), 1)],
        firms: vec![("y0".into(), 1), ("y1".into(), 1)],
        pairs,
        with_singles: true,
    }
}

/// One producer, one quality, one consumer; gains from trade of three.
pub fn demo_hedonic_1x1x1() -> HedonicMarket {
    HedonicMarket {
        producers: vec![("a".into(), 1)],
        consumers: vec![("b".into(), 1)],
        qualities: vec!["w".into()],
        pi: BTreeMap::from([(
            (0, 0),
            MonotoneMap::Affine {
                slope: rat("1"),
                intercept: rat("-1"),
            },
        )]),
        s: BTreeMap::from([(
            (0, 0),
            MonotoneMap::Affine {
                slope: rat("-1"),
                intercept: rat("4"),
            },
        )]),
    }
}

/// Unnormalized three-good logit model with common unit slopes, so the
/// supply function is translation invariant.
pub fn demo_logit() -> LogitModel {
    LogitModel {
        counts: vec![3, 2],
        coeffs: vec![
            vec![
                (Rat::one(), Rat::zero()),
                (Rat::one(), Rat::one()),
                (Rat::one(), Rat::int(-1)),
            ],
            vec![
                (Rat::one(), Rat::int(1)),
                (Rat::one(), Rat::zero()),
                (Rat::one(), Rat::int(2)),
            ],
        ],
        normalization: None,
    }
}

/// The same model with the last price normalized to one.
pub fn demo_logit_normalized() -> LogitModel {
    let mut m = demo_logit();
    m.normalization = Some(Rat::one());
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete() {
        for name in CATALOG {
            fixture(name).unwrap();
        }
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn a3_domain_is_a_sublattice() {
        let c = a3_kelso_crawford();
        assert!(c.validate_domain().holds);
        assert!(c.contains(&Point::from_ints(&[1, 1, 2, 2]), &a3_repeated_point()));
        assert!(c.contains(&Point::from_ints(&[2, 2, 1, 1]), &a3_repeated_point()));
    }

    #[test]
    fn kettle_matches_formula_at_unit_price() {
        let c = b2_kettle();
        let q = c
            .image(&Point::from_ints(&[2, 0, 0]))
            .unwrap()
            .iter()
            .next()
            .unwrap()
            .clone();
        // (1/2) C^{-1} (2,0,0) = (100, -40, -80)/180 = (5/9, -2/9, -4/9).
        assert_eq!(
            q,
            Point::new(vec![rat("5/9"), rat("-2/9"), rat("-4/9")])
        );
    }
}
