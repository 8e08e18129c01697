//! Discrete producer problems: argmax supply correspondences, indirect
//! profit, submodularity, no-complementarities, single crossing, and the
//! logit examples (the one floating-point corner of the crate).

use crate::corr::{
    check_monotonicity, check_substitutes, CorrError, FiniteCorrespondence,
    MonotonicityProperty, SubstitutesNotion, Verdict, Witness,
};
use crate::point::{Point, PriceGrid};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProducerError {
    #[error("empty quantity set")]
    EmptyQuantitySet,
    #[error("cost missing for quantity {0}")]
    MissingCost(Point),
    #[error("quantity has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid is empty or has a different dimension")]
    BadGrid,
    #[error("grid is not a sublattice")]
    GridNotSublattice,
    #[error("objective table is missing an entry for ({0}, {1})")]
    MissingTableEntry(Point, Point),
    #[error(transparent)]
    Corr(#[from] CorrError),
}

/// Finite quantity set with a tabulated cost; convexity is never assumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteProducer {
    pub dim: usize,
    pub quantities: Vec<Point>,
    pub cost: BTreeMap<Point, Rat>,
}

// File schema: { "dim": N, "points": [...], "cost": [...] } with parallel
// arrays.

#[derive(Serialize, Deserialize)]
struct ProducerFile {
    dim: usize,
    points: Vec<Point>,
    cost: Vec<Rat>,
}

impl Serialize for DiscreteProducer {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let file = ProducerFile {
            dim: self.dim,
            points: self.quantities.clone(),
            cost: self.quantities.iter().map(|q| self.cost[q].clone()).collect(),
        };
        file.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscreteProducer {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = ProducerFile::deserialize(deserializer)?;
        if file.points.len() != file.cost.len() {
            return Err(serde::de::Error::custom(
                "points and cost must have the same length",
            ));
        }
        let cost: BTreeMap<Point, Rat> =
            file.points.iter().cloned().zip(file.cost).collect();
        DiscreteProducer::new(file.dim, file.points, cost).map_err(serde::de::Error::custom)
    }
}

impl DiscreteProducer {
    pub fn new(dim: usize, quantities: Vec<Point>, cost: BTreeMap<Point, Rat>) -> Result<Self, ProducerError> {
        if quantities.is_empty() {
            return Err(ProducerError::EmptyQuantitySet);
        }
        let mut seen = BTreeSet::new();
        let mut qs = Vec::new();
        for q in quantities {
            if q.dim() != dim {
                return Err(ProducerError::DimensionMismatch {
                    expected: dim,
                    found: q.dim(),
                });
            }
            if !cost.contains_key(&q) {
                return Err(ProducerError::MissingCost(q));
            }
            if seen.insert(q.clone()) {
                qs.push(q);
            }
        }
        qs.sort();
        Ok(DiscreteProducer {
            dim,
            quantities: qs,
            cost,
        })
    }

    /// Zero-cost producer over the given quantity points.
    pub fn free(dim: usize, quantities: Vec<Point>) -> Result<Self, ProducerError> {
        let cost = quantities.iter().map(|q| (q.clone(), Rat::zero())).collect();
        DiscreteProducer::new(dim, quantities, cost)
    }

    pub fn profit(&self, p: &Point, q: &Point) -> Rat {
        p.dot(q) - self.cost.get(q).expect("cost defined on every quantity")
    }

    pub fn argmax(&self, p: &Point) -> BTreeSet<Point> {
        let mut best: Option<Rat> = None;
        let mut arg = BTreeSet::new();
        for q in &self.quantities {
            let v = self.profit(p, q);
            match &best {
                Some(b) if v < *b => {}
                Some(b) if v == *b => {
                    arg.insert(q.clone());
                }
                _ => {
                    best = Some(v);
                    arg = BTreeSet::from([q.clone()]);
                }
            }
        }
        arg
    }

    /// Per-coordinate value sets of the quantity points.
    pub fn coordinate_levels(&self) -> Vec<Vec<Rat>> {
        (0..self.dim)
            .map(|z| {
                let mut vals: Vec<Rat> = self
                    .quantities
                    .iter()
                    .map(|q| q.get(z).clone())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                vals.sort();
                vals
            })
            .collect()
    }

    /// Whether the quantity set is the full product of its coordinate levels.
    pub fn is_grid_quantity_set(&self) -> bool {
        let size: usize = self.coordinate_levels().iter().map(Vec::len).product();
        size == self.quantities.len()
    }

    /// Discrete midpoint convexity on the quantity set: whenever the exact
    /// midpoint of two quantity points is itself a quantity point, its cost
    /// is at most the average.
    pub fn is_discretely_convex(&self) -> bool {
        let half = Rat::new(1, 2);
        for (i, a) in self.quantities.iter().enumerate() {
            for b in &self.quantities[i + 1..] {
                let mid = a.add(b).scale(&half);
                if let Some(cm) = self.cost.get(&mid) {
                    let avg = (self.cost[a].clone() + self.cost[b].clone()) * half.clone();
                    if *cm > avg {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Supply correspondence `Q(p) = argmax { p.q - c(q) }` tabulated on a grid.
pub fn argmax_correspondence(
    prod: &DiscreteProducer,
    grid: &PriceGrid,
) -> Result<FiniteCorrespondence, ProducerError> {
    let dim = grid.dim().ok_or(ProducerError::BadGrid)?;
    if dim != prod.dim {
        return Err(ProducerError::BadGrid);
    }
    let mut map = BTreeMap::new();
    for p in grid.iter() {
        map.insert(p.clone(), prod.argmax(p));
    }
    Ok(FiniteCorrespondence::new(dim, map)?)
}

/// A rational-valued function on a price grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFunction {
    pub grid: PriceGrid,
    pub values: BTreeMap<Point, Rat>,
}

impl GridFunction {
    pub fn value(&self, p: &Point) -> &Rat {
        &self.values[p]
    }
}

pub fn indirect_profit(
    prod: &DiscreteProducer,
    grid: &PriceGrid,
) -> Result<GridFunction, ProducerError> {
    let dim = grid.dim().ok_or(ProducerError::BadGrid)?;
    if dim != prod.dim {
        return Err(ProducerError::BadGrid);
    }
    let mut values = BTreeMap::new();
    for p in grid.iter() {
        let best = prod
            .quantities
            .iter()
            .map(|q| prod.profit(p, q))
            .max()
            .expect("nonempty quantity set");
        values.insert(p.clone(), best);
    }
    Ok(GridFunction {
        grid: grid.clone(),
        values,
    })
}

/// `f(p^p') + f(pvp') <= f(p) + f(p')` over all grid pairs.
pub fn check_submodular(f: &GridFunction) -> Result<Verdict, ProducerError> {
    if !f.grid.is_sublattice() {
        return Err(ProducerError::GridNotSublattice);
    }
    let points: Vec<&Point> = f.grid.iter().collect();
    for p in &points {
        for pp in &points {
            let lhs = f.value(&p.meet(pp)).clone() + f.value(&p.join(pp)).clone();
            let rhs = f.value(p).clone() + f.value(pp).clone();
            if lhs > rhs {
                return Ok(Verdict::fail(
                    "submodular",
                    Witness::pair(p, pp)
                        .with_note(format!("f(^)+f(v) = {} > {} = f(p)+f(p')", lhs, rhs)),
                ));
            }
        }
    }
    Ok(Verdict::pass("submodular"))
}

/// Instance-level check of the indirect-profit equivalence: submodularity of
/// the indirect profit versus unified gross substitutes of the argmax
/// correspondence, with the argmax nonreversingness cross-check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfitEquivalence {
    pub submodular: Verdict,
    pub ugs: Verdict,
    pub nonreversing: Verdict,
    /// Verdict equality between the first two; argmax correspondences are
    /// always nonreversing, so this also settles the M0 equivalence.
    pub consistent: bool,
}

pub fn spice_equivalence(
    prod: &DiscreteProducer,
    grid: &PriceGrid,
) -> Result<ProfitEquivalence, ProducerError> {
    let profit = indirect_profit(prod, grid)?;
    let submodular = check_submodular(&profit)?;
    let corr = argmax_correspondence(prod, grid)?;
    let ugs = check_substitutes(&corr, SubstitutesNotion::Ugs)?;
    let nonreversing = check_monotonicity(&corr, &MonotonicityProperty::Nonreversing)?;
    let consistent = submodular.holds == ugs.holds && nonreversing.holds;
    Ok(ProfitEquivalence {
        submodular,
        ugs,
        nonreversing,
        consistent,
    })
}

fn nonneg_diffs(levels: &[Rat]) -> Vec<Rat> {
    let mut out = BTreeSet::new();
    for a in levels {
        for b in levels {
            if a >= b {
                out.insert(a - b);
            }
        }
    }
    out.into_iter().collect()
}

/// Enumerates the feasible moves `delta` on the coordinate-difference lattice
/// with `0 <= delta <= bound`.
fn enumerate_deltas(diffs: &[Vec<Rat>], bound: &Point) -> Vec<Point> {
    let mut acc: Vec<Vec<Rat>> = vec![Vec::new()];
    for (z, dz) in diffs.iter().enumerate() {
        let mut next = Vec::new();
        for stem in &acc {
            for d in dz {
                if d <= bound.get(z) {
                    let mut s = stem.clone();
                    s.push(d.clone());
                    next.push(s);
                }
            }
        }
        acc = next;
    }
    acc.into_iter().map(Point::new).collect()
}

/// No-complementarities at a price, with the move set restricted to the
/// finite lattice of coordinatewise differences of quantity points. On
/// product-grid quantity sets this restriction is exact for the piecewise
/// linear profits at hand.
pub fn check_no_complementarities(
    prod: &DiscreteProducer,
    p: &Point,
) -> Result<Verdict, ProducerError> {
    if p.dim() != prod.dim {
        return Err(ProducerError::DimensionMismatch {
            expected: prod.dim,
            found: p.dim(),
        });
    }
    let diffs: Vec<Vec<Rat>> = prod
        .coordinate_levels()
        .iter()
        .map(|levels| nonneg_diffs(levels))
        .collect();
    let quantity_set: BTreeSet<&Point> = prod.quantities.iter().collect();
    for q in prod.argmax(p) {
        for qp in &prod.quantities {
            if *qp == q {
                continue;
            }
            let up_bound = q.pos_part_minus(qp); // room to add to q'
            let down_bound = qp.pos_part_minus(&q); // room to remove from q'
            let baseline = prod.profit(p, qp);
            for d1 in enumerate_deltas(&diffs, &down_bound) {
                let ok = enumerate_deltas(&diffs, &up_bound).into_iter().any(|d2| {
                    let y = qp.add(&d2).sub(&d1);
                    quantity_set.contains(&y) && prod.profit(p, &y) >= baseline
                });
                if !ok {
                    return Ok(Verdict::fail(
                        "no_complementarities",
                        Witness {
                            p: Some(p.clone()),
                            q: Some(q.clone()),
                            q_prime: Some(qp.clone()),
                            ..Default::default()
                        }
                        .with_note(format!("no completion for removal {}", d1)),
                    ));
                }
            }
        }
    }
    Ok(Verdict::pass("no_complementarities"))
}

/// Rational objective tabulated on a product of finite price and quantity
/// grids.
#[derive(Debug, Clone)]
pub struct ObjectiveTable {
    pub p_grid: PriceGrid,
    pub q_grid: Vec<Point>,
    pub values: BTreeMap<(Point, Point), Rat>,
}

// File schema: values as a row-major table over (p_grid, q_grid).

#[derive(Serialize, Deserialize)]
struct TableFile {
    p_grid: Vec<Point>,
    q_grid: Vec<Point>,
    values: Vec<Vec<Rat>>,
}

impl Serialize for ObjectiveTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let ps: Vec<Point> = self.p_grid.iter().cloned().collect();
        let values = ps
            .iter()
            .map(|p| {
                self.q_grid
                    .iter()
                    .map(|q| self.values[&(p.clone(), q.clone())].clone())
                    .collect()
            })
            .collect();
        TableFile {
            p_grid: ps,
            q_grid: self.q_grid.clone(),
            values,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ObjectiveTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = TableFile::deserialize(deserializer)?;
        let mut values = BTreeMap::new();
        if file.values.len() != file.p_grid.len()
            || file.values.iter().any(|row| row.len() != file.q_grid.len())
        {
            return Err(serde::de::Error::custom("table shape mismatch"));
        }
        for (p, row) in file.p_grid.iter().zip(&file.values) {
            for (q, v) in file.q_grid.iter().zip(row) {
                values.insert((p.clone(), q.clone()), v.clone());
            }
        }
        Ok(ObjectiveTable {
            p_grid: PriceGrid::new(file.p_grid),
            q_grid: file.q_grid,
            values,
        })
    }
}

impl ObjectiveTable {
    pub fn value(&self, p: &Point, q: &Point) -> Result<&Rat, ProducerError> {
        self.values
            .get(&(p.clone(), q.clone()))
            .ok_or_else(|| ProducerError::MissingTableEntry(p.clone(), q.clone()))
    }

    pub fn argmax(&self, p: &Point) -> Result<BTreeSet<Point>, ProducerError> {
        let mut best: Option<Rat> = None;
        let mut arg = BTreeSet::new();
        for q in &self.q_grid {
            let v = self.value(p, q)?.clone();
            match &best {
                Some(b) if v < *b => {}
                Some(b) if v == *b => {
                    arg.insert(q.clone());
                }
                _ => {
                    best = Some(v);
                    arg = BTreeSet::from([q.clone()]);
                }
            }
        }
        Ok(arg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleCrossingReport {
    pub single_crossing: Verdict,
    pub argmax_nonreversing: Verdict,
    /// Single crossing must imply a nonreversing argmax.
    pub consistent: bool,
}

/// Single crossing of `phi(p, q)` in `(p, q)`: for `p' >= p` and `q' <= q`,
/// if `phi(p', q) <= phi(p', q')` and `phi(p, q) >= phi(p, q')` then both
/// hold with equality.
pub fn check_single_crossing(tab: &ObjectiveTable) -> Result<SingleCrossingReport, ProducerError> {
    let mut sc = Verdict::pass("single_crossing");
    'outer: for p in tab.p_grid.iter() {
        for pp in tab.p_grid.iter() {
            if !p.le(pp) {
                continue;
            }
            for q in &tab.q_grid {
                for qp in &tab.q_grid {
                    if !qp.le(q) {
                        continue;
                    }
                    let hi_q = tab.value(pp, q)?;
                    let hi_qp = tab.value(pp, qp)?;
                    let lo_q = tab.value(p, q)?;
                    let lo_qp = tab.value(p, qp)?;
                    if hi_q <= hi_qp && lo_q >= lo_qp && !(hi_q == hi_qp && lo_q == lo_qp) {
                        sc = Verdict::fail(
                            "single_crossing",
                            Witness::pair(p, pp)
                                .with_q(q)
                                .with_q_prime(qp)
                                .with_note("weak inequalities fail to bind"),
                        );
                        break 'outer;
                    }
                }
            }
        }
    }

    let dim = tab.p_grid.dim().ok_or(ProducerError::BadGrid)?;
    let mut map = BTreeMap::new();
    for p in tab.p_grid.iter() {
        map.insert(p.clone(), tab.argmax(p)?);
    }
    let corr = FiniteCorrespondence::new(dim, map)?;
    let nr = check_monotonicity(&corr, &MonotonicityProperty::Nonreversing)?;
    let consistent = !sc.holds || nr.holds;
    Ok(SingleCrossingReport {
        single_crossing: sc,
        argmax_nonreversing: nr,
        consistent,
    })
}

/// Logit supply model: producer types with counts and affine profit indices
/// `pi_xz(p) = a_xz p + b_xz`, `a_xz > 0`. Optionally the last price is
/// normalized to a fixed value and dropped from the arguments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogitModel {
    pub counts: Vec<u64>,
    /// `coeffs[x][z] = (a, b)`.
    pub coeffs: Vec<Vec<(Rat, Rat)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Rat>,
}

impl LogitModel {
    pub fn num_goods(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    /// Dimension of the price argument (one less under normalization).
    pub fn input_dim(&self) -> usize {
        match self.normalization {
            Some(_) => self.num_goods() - 1,
            None => self.num_goods(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.counts.iter().map(|&n| n as f64).sum()
    }

    fn full_prices(&self, p: &[f64]) -> Vec<f64> {
        match &self.normalization {
            Some(fixed) => {
                let mut full = p.to_vec();
                full.push(fixed.to_f64());
                full
            }
            None => p.to_vec(),
        }
    }
}

/// Softmax aggregate supply; overflow guarded by max-subtraction. Output has
/// the same dimension as the input (the normalized good is dropped under
/// normalization).
pub fn logit_supply(model: &LogitModel, p: &[f64]) -> Vec<f64> {
    assert_eq!(p.len(), model.input_dim());
    let full = model.full_prices(p);
    let goods = model.num_goods();
    let mut out = vec![0.0; goods];
    for (x, &n) in model.counts.iter().enumerate() {
        let idx: Vec<f64> = (0..goods)
            .map(|z| {
                let (a, b) = &model.coeffs[x][z];
                a.to_f64() * full[z] + b.to_f64()
            })
            .collect();
        let m = idx.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = idx.iter().map(|v| (v - m).exp()).collect();
        let denom: f64 = exps.iter().sum();
        for z in 0..goods {
            out[z] += n as f64 * exps[z] / denom;
        }
    }
    out.truncate(model.input_dim());
    out
}

/// Taxonomy decision on a float grid with tolerance `eps` on every
/// comparison. Mirrors the exact classifier: unified gross substitutes via
/// the function form, nonreversingness, and point-valuedness of map and
/// inverse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogitTaxonomy {
    pub wgs_within_eps: bool,
    pub nonreversing_within_eps: bool,
    pub inverse_point_valued_within_eps: bool,
    pub label: &'static str,
}

pub fn logit_taxonomy(model: &LogitModel, grid: &[Vec<f64>], eps: f64) -> LogitTaxonomy {
    let values: Vec<Vec<f64>> = grid.iter().map(|p| logit_supply(model, p)).collect();
    let dim = model.input_dim();
    let le = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| *x <= y + eps);
    let close = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
    };

    let mut wgs = true;
    let mut nonreversing = true;
    let mut inverse_point_valued = true;
    for (i, p) in grid.iter().enumerate() {
        for (j, pp) in grid.iter().enumerate() {
            if i == j {
                continue;
            }
            let p_le = p.iter().zip(pp).all(|(a, b)| a <= b);
            if p_le {
                for z in 0..dim {
                    if (p[z] - pp[z]).abs() == 0.0 && values[j][z] > values[i][z] + eps {
                        wgs = false;
                    }
                }
                // Antecedent of nonreversingness with pp >= p in prices.
                if le(&values[j], &values[i]) && !close(&values[i], &values[j]) {
                    nonreversing = false;
                }
            }
            if close(&values[i], &values[j]) {
                inverse_point_valued = false;
            }
        }
    }
    let label = if wgs && nonreversing {
        if inverse_point_valued {
            "M-function"
        } else {
            "M0-function"
        }
    } else {
        "none"
    };
    LogitTaxonomy {
        wgs_within_eps: wgs,
        nonreversing_within_eps: nonreversing,
        inverse_point_valued_within_eps: inverse_point_valued,
        label,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn pt(coords: &[i64]) -> Point {
        Point::from_ints(coords)
    }

    fn grid(dim: usize, levels: &[i64]) -> PriceGrid {
        let levels: Vec<Rat> = levels.iter().map(|&v| Rat::int(v)).collect();
        PriceGrid::product(dim, &levels)
    }

    #[test]
    fn sign_of_price_drives_binary_argmax() {
        let prod = DiscreteProducer::free(1, vec![pt(&[0]), pt(&[1])]).unwrap();
        let g = grid(1, &[-1, 1]);
        let corr = argmax_correspondence(&prod, &g).unwrap();
        assert_eq!(
            corr.image(&pt(&[-1])).unwrap(),
            &BTreeSet::from([pt(&[0])])
        );
        assert_eq!(corr.image(&pt(&[1])).unwrap(), &BTreeSet::from([pt(&[1])]));
    }

    #[test]
    fn simplex_vertices_give_coordinate_max_profit() {
        let prod =
            DiscreteProducer::free(2, vec![pt(&[1, 0]), pt(&[0, 1])]).unwrap();
        let g = grid(2, &[0, 1, 2]);
        let f = indirect_profit(&prod, &g).unwrap();
        for p in g.iter() {
            let expect = p.get(0).clone().max(p.get(1).clone());
            assert_eq!(f.value(p), &expect);
        }
        assert!(check_submodular(&f).unwrap().holds);
        // Ties on the diagonal are preserved as sets.
        let corr = argmax_correspondence(&prod, &g).unwrap();
        assert_eq!(corr.image(&pt(&[1, 1])).unwrap().len(), 2);
    }

    #[test]
    fn product_fails_submodularity() {
        let g = grid(2, &[0, 1]);
        let values = g
            .iter()
            .map(|p| (p.clone(), p.get(0) * p.get(1)))
            .collect();
        let f = GridFunction {
            grid: g,
            values,
        };
        let v = check_submodular(&f).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        let pair = BTreeSet::from([w.p.unwrap(), w.p_prime.unwrap()]);
        assert_eq!(pair, BTreeSet::from([pt(&[0, 1]), pt(&[1, 0])]));
    }

    #[test]
    fn indirect_profit_dominates_every_quantity() {
        let mut cost = BTreeMap::new();
        cost.insert(pt(&[0, 0]), rat("0"));
        cost.insert(pt(&[1, 0]), rat("1/3"));
        cost.insert(pt(&[0, 1]), rat("1/2"));
        cost.insert(pt(&[1, 1]), rat("2"));
        let prod = DiscreteProducer::new(
            2,
            cost.keys().cloned().collect(),
            cost,
        )
        .unwrap();
        let g = grid(2, &[0, 1, 2]);
        let f = indirect_profit(&prod, &g).unwrap();
        for p in g.iter() {
            for q in &prod.quantities {
                assert!(f.value(p) >= &prod.profit(p, q));
            }
            let arg = prod.argmax(p);
            for q in &arg {
                assert_eq!(f.value(p), &prod.profit(p, q));
            }
        }
    }

    #[test]
    fn single_quantity_no_complementarities_is_vacuous() {
        let prod = DiscreteProducer::free(2, vec![pt(&[1, 1])]).unwrap();
        assert!(check_no_complementarities(&prod, &pt(&[0, 0]))
            .unwrap()
            .holds);
    }

    #[test]
    fn bundle_discount_fails_no_complementarities() {
        // Strictly supermodular cost discount on the bundle.
        let mut cost = BTreeMap::new();
        cost.insert(pt(&[0, 0]), rat("0"));
        cost.insert(pt(&[1, 0]), rat("2"));
        cost.insert(pt(&[0, 1]), rat("2"));
        cost.insert(pt(&[1, 1]), rat("1"));
        let prod = DiscreteProducer::new(2, cost.keys().cloned().collect(), cost).unwrap();
        // At (1,0) both (0,0) and (1,1) are optimal; removing the second leg
        // of the bundle strands the first at a loss.
        let v = check_no_complementarities(&prod, &pt(&[1, 0])).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.q_prime.unwrap(), pt(&[1, 1]));
    }

    #[test]
    fn supermodular_objective_has_single_crossing() {
        let pg = grid(1, &[0, 1, 2]);
        let qs = vec![pt(&[0]), pt(&[1])];
        let mut values = BTreeMap::new();
        for p in pg.iter() {
            for q in &qs {
                values.insert((p.clone(), q.clone()), p.dot(q));
            }
        }
        let tab = ObjectiveTable {
            p_grid: pg,
            q_grid: qs,
            values,
        };
        let rep = check_single_crossing(&tab).unwrap();
        assert!(rep.single_crossing.holds);
        assert!(rep.argmax_nonreversing.holds);
        assert!(rep.consistent);
    }

    #[test]
    fn constant_objective_single_crossing_and_full_argmax() {
        let pg = grid(2, &[0, 1]);
        let qs = vec![pt(&[0, 0]), pt(&[1, 1])];
        let mut values = BTreeMap::new();
        for p in pg.iter() {
            for q in &qs {
                values.insert((p.clone(), q.clone()), Rat::zero());
            }
        }
        let tab = ObjectiveTable {
            p_grid: pg,
            q_grid: qs.clone(),
            values,
        };
        let rep = check_single_crossing(&tab).unwrap();
        assert!(rep.single_crossing.holds);
        assert!(rep.argmax_nonreversing.holds);
        assert_eq!(tab.argmax(&pt(&[0, 0])).unwrap().len(), qs.len());
    }

    #[test]
    fn symmetric_logit_splits_mass_evenly() {
        let model = LogitModel {
            counts: vec![4],
            coeffs: vec![vec![(Rat::one(), Rat::zero()), (Rat::one(), Rat::zero())]],
            normalization: None,
        };
        let q = logit_supply(&model, &[0.0, 0.0]);
        assert!((q[0] - 2.0).abs() < 1e-12);
        assert!((q[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn logit_mass_is_conserved() {
        let model = LogitModel {
            counts: vec![3, 2],
            coeffs: vec![
                vec![(Rat::one(), Rat::zero()), (Rat::int(2), Rat::one()), (Rat::one(), Rat::int(-1))],
                vec![(Rat::int(1), Rat::int(2)), (Rat::one(), Rat::zero()), (Rat::int(3), Rat::zero())],
            ],
            normalization: None,
        };
        for p in [[0.0, 0.0, 0.0], [1.0, 2.0, 0.5], [100.0, -50.0, 3.0]] {
            let q = logit_supply(&model, &p);
            let total: f64 = q.iter().sum();
            assert!((total - model.total_mass()).abs() < 1e-12);
        }
    }
}
