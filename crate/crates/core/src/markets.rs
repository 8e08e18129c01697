//! Matching with (fully or imperfectly) transferable utility, matching
//! without transfers, and hedonic pricing, each reduced to or checked
//! against the equilibrium flow formulation.

use crate::corr::{
    check_monotonicity, check_substitutes, classify, FiniteCorrespondence,
    MonotonicityProperty, SubstitutesNotion, Taxonomy, Verdict, Witness,
};
use crate::flow::{Arc, ConnectionFunction, FlowError, FlowOutcome, FlowProblem, Network};
use crate::lp::{Cmp, LinearProgram, LpResult};
use crate::point::{Point, PriceGrid};
use crate::pwl::{PiecewiseLinear, PwlError};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("without singles the worker and firm totals must agree ({0} vs {1})")]
    CountMismatch(u64, u64),
    #[error("missing transfer map for pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("transfer map slopes must be strictly positive")]
    BadSlope,
    #[error("tabulated transfer map: worker side must increase and firm side decrease in the wage")]
    BadTabulatedDirection,
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("strict preferences violated: {0}")]
    StrictPreferences(String),
    #[error("matching assigns {0} a mass different from its count")]
    InfeasibleMass(String),
    #[error("matching is not zero/one on pair ({0}, {1})")]
    NonIntegral(String, String),
    #[error("empty wage interval on a flow-carrying arc ({0}, {1})")]
    EmptyWageInterval(usize, usize),
    #[error("reservation node price must be normalized to zero, got {0}")]
    UnnormalizedReservation(Rat),
    #[error("outcome shape does not match the market")]
    Shape,
    #[error("payoff grid must be a sublattice")]
    GridNotSublattice,
    #[error(transparent)]
    Corr(#[from] crate::corr::CorrError),
}

// ---------------------------------------------------------------------------
// Matching with transfers.

/// Transfer technology of one worker-firm pair: worker utility increasing in
/// the wage, firm utility decreasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TransferPair {
    /// `U = alpha + w`, `V = gamma - w`.
    Tu { alpha: Rat, gamma: Rat },
    /// `U = alpha + a w`, `V = gamma - b w` with `a, b > 0`.
    Affine { alpha: Rat, a: Rat, gamma: Rat, b: Rat },
    /// Tabulated monotone maps of the wage.
    Tabulated { u: PiecewiseLinear, v: PiecewiseLinear },
}

impl TransferPair {
    fn validate(&self) -> Result<(), MarketError> {
        match self {
            TransferPair::Tu { .. } => Ok(()),
            TransferPair::Affine { a, b, .. } => {
                if a.is_positive() && b.is_positive() {
                    Ok(())
                } else {
                    Err(MarketError::BadSlope)
                }
            }
            TransferPair::Tabulated { u, v } => {
                if u.is_increasing() && !v.is_increasing() {
                    Ok(())
                } else {
                    Err(MarketError::BadTabulatedDirection)
                }
            }
        }
    }

    pub fn worker_utility(&self, w: &Rat) -> Result<Rat, MarketError> {
        match self {
            TransferPair::Tu { alpha, .. } => Ok(alpha + w),
            TransferPair::Affine { alpha, a, .. } => Ok(alpha + &(a * w)),
            TransferPair::Tabulated { u, .. } => Ok(u.eval(w)?),
        }
    }

    pub fn firm_utility(&self, w: &Rat) -> Result<Rat, MarketError> {
        match self {
            TransferPair::Tu { gamma, .. } => Ok(gamma - w),
            TransferPair::Affine { gamma, b, .. } => Ok(gamma - &(b * w)),
            TransferPair::Tabulated { v, .. } => Ok(v.eval(w)?),
        }
    }

    pub fn wage_for_worker_utility(&self, u: &Rat) -> Result<Rat, MarketError> {
        match self {
            TransferPair::Tu { alpha, .. } => Ok(u - alpha),
            TransferPair::Affine { alpha, a, .. } => Ok(&(u - alpha) / a),
            TransferPair::Tabulated { u: map, .. } => Ok(map.inverse_eval(u)?),
        }
    }

    pub fn wage_for_firm_utility(&self, v: &Rat) -> Result<Rat, MarketError> {
        match self {
            TransferPair::Tu { gamma, .. } => Ok(gamma - v),
            TransferPair::Affine { gamma, b, .. } => Ok(&(gamma - v) / b),
            TransferPair::Tabulated { v: map, .. } => Ok(map.inverse_eval(v)?),
        }
    }

    /// Break-even connection `G(p_y) = U(V^{-1}(-p_y))`.
    pub fn connection(&self) -> Result<ConnectionFunction, MarketError> {
        match self {
            TransferPair::Tu { alpha, gamma } => {
                Ok(ConnectionFunction::additive(-(alpha + gamma)))
            }
            TransferPair::Affine { alpha, a, gamma, b } => {
                let slope = a / b;
                let intercept = alpha + &(&slope * gamma);
                Ok(ConnectionFunction::affine(slope, intercept))
            }
            TransferPair::Tabulated { u, v } => {
                let g = u.compose_neg_inverse(v)?;
                Ok(ConnectionFunction::from_pwl(&g)?)
            }
        }
    }
}

/// One-to-one matching market with type counts and per-pair transfer maps.
#[derive(Debug, Clone)]
pub struct ItuMarket {
    pub workers: Vec<(String, u64)>,
    pub firms: Vec<(String, u64)>,
    /// Keyed by worker and firm index; every pair must be present.
    pub pairs: BTreeMap<(usize, usize), TransferPair>,
    pub with_singles: bool,
}

#[derive(Serialize, Deserialize)]
struct CountFile {
    name: String,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct PairFile {
    x: usize,
    y: usize,
    #[serde(flatten)]
    map: TransferPair,
}

#[derive(Serialize, Deserialize)]
struct ItuFile {
    workers: Vec<CountFile>,
    firms: Vec<CountFile>,
    pairs: Vec<PairFile>,
    #[serde(default)]
    with_singles: bool,
}

impl Serialize for ItuMarket {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ItuFile {
            workers: self
                .workers
                .iter()
                .map(|(name, count)| CountFile {
                    name: name.clone(),
                    count: *count,
                })
                .collect(),
            firms: self
                .firms
                .iter()
                .map(|(name, count)| CountFile {
                    name: name.clone(),
                    count: *count,
                })
                .collect(),
            pairs: self
                .pairs
                .iter()
                .map(|(&(x, y), map)| PairFile {
                    x,
                    y,
                    map: map.clone(),
                })
                .collect(),
            with_singles: self.with_singles,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ItuMarket {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = ItuFile::deserialize(deserializer)?;
        let market = ItuMarket {
            workers: file.workers.into_iter().map(|c| (c.name, c.count)).collect(),
            firms: file.firms.into_iter().map(|c| (c.name, c.count)).collect(),
            pairs: file
                .pairs
                .into_iter()
                .map(|p| ((p.x, p.y), p.map))
                .collect(),
            with_singles: file.with_singles,
        };
        market.validate().map_err(serde::de::Error::custom)?;
        Ok(market)
    }
}

impl ItuMarket {
    pub fn validate(&self) -> Result<(), MarketError> {
        let n: u64 = self.workers.iter().map(|(_, c)| c).sum();
        let m: u64 = self.firms.iter().map(|(_, c)| c).sum();
        if !self.with_singles && n != m {
            return Err(MarketError::CountMismatch(n, m));
        }
        for x in 0..self.workers.len() {
            for y in 0..self.firms.len() {
                let pair = self
                    .pairs
                    .get(&(x, y))
                    .ok_or(MarketError::MissingPair(x, y))?;
                pair.validate()?;
            }
        }
        Ok(())
    }

    pub fn pair(&self, x: usize, y: usize) -> &TransferPair {
        &self.pairs[&(x, y)]
    }

    /// Fully transferable surplus `alpha + gamma` per pair, when every pair
    /// is of the plain transferable kind.
    pub fn tu_surplus(&self) -> Option<Vec<Vec<Rat>>> {
        let mut phi = vec![vec![Rat::zero(); self.firms.len()]; self.workers.len()];
        for x in 0..self.workers.len() {
            for y in 0..self.firms.len() {
                match self.pairs.get(&(x, y))? {
                    TransferPair::Tu { alpha, gamma } => phi[x][y] = alpha + gamma,
                    _ => return None,
                }
            }
        }
        Some(phi)
    }
}

/// Node layout of the reduction network: workers, then firms, then the
/// reservation node when singles are allowed.
#[derive(Debug, Clone, Copy)]
pub struct ItuNodeMap {
    pub num_workers: usize,
    pub num_firms: usize,
    pub reservation: Option<usize>,
}

impl ItuNodeMap {
    pub fn worker(&self, x: usize) -> usize {
        x
    }

    pub fn firm(&self, y: usize) -> usize {
        self.num_workers + y
    }
}

/// Reduction to an equilibrium flow problem along the network dictionary:
/// worker prices are utilities, firm prices are negated utilities, exiting
/// flows are `-n` on workers and `+m` on firms.
pub fn itu_to_flow(m: &ItuMarket) -> Result<(FlowProblem, ItuNodeMap), MarketError> {
    m.validate()?;
    let nw = m.workers.len();
    let nf = m.firms.len();
    let mut nodes: Vec<String> = m.workers.iter().map(|(n, _)| format!("w:{n}")).collect();
    nodes.extend(m.firms.iter().map(|(n, _)| format!("f:{n}")));
    let reservation = if m.with_singles {
        nodes.push("0".to_string());
        Some(nw + nf)
    } else {
        None
    };
    let map = ItuNodeMap {
        num_workers: nw,
        num_firms: nf,
        reservation,
    };

    let mut arcs = Vec::new();
    for x in 0..nw {
        for y in 0..nf {
            arcs.push(Arc {
                from: map.worker(x),
                to: map.firm(y),
                connection: m.pair(x, y).connection()?,
            });
        }
    }
    if let Some(zero) = reservation {
        let identity = || ConnectionFunction::affine(Rat::one(), Rat::zero());
        for x in 0..nw {
            arcs.push(Arc {
                from: map.worker(x),
                to: zero,
                connection: identity(),
            });
        }
        for y in 0..nf {
            arcs.push(Arc {
                from: zero,
                to: map.firm(y),
                connection: identity(),
            });
        }
    }
    let network = Network::new(nodes, arcs)?;

    let mut q = Vec::with_capacity(network.num_nodes());
    for (_, c) in &m.workers {
        q.push(Rat::int(-(*c as i64)));
    }
    for (_, c) in &m.firms {
        q.push(Rat::int(*c as i64));
    }
    if reservation.is_some() {
        let n: i64 = m.workers.iter().map(|(_, c)| *c as i64).sum();
        let f: i64 = m.firms.iter().map(|(_, c)| *c as i64).sum();
        q.push(Rat::int(n - f));
    }
    Ok((FlowProblem::new(network, q)?, map))
}

/// Masses per pair, with `None` on a side standing for the reservation
/// option; wages are recorded for matched worker-firm pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub mu: BTreeMap<(Option<usize>, Option<usize>), Rat>,
    pub wages: BTreeMap<(usize, usize), Rat>,
}

#[derive(Serialize, Deserialize)]
struct MassFile {
    x: Option<usize>,
    y: Option<usize>,
    mass: Rat,
}

#[derive(Serialize, Deserialize)]
struct WageFile {
    x: usize,
    y: usize,
    wage: Rat,
}

#[derive(Serialize, Deserialize)]
struct MatchingFile {
    mu: Vec<MassFile>,
    wages: Vec<WageFile>,
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatchingFile {
            mu: self
                .mu
                .iter()
                .map(|(&(x, y), mass)| MassFile {
                    x,
                    y,
                    mass: mass.clone(),
                })
                .collect(),
            wages: self
                .wages
                .iter()
                .map(|(&(x, y), wage)| WageFile {
                    x,
                    y,
                    wage: wage.clone(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = MatchingFile::deserialize(deserializer)?;
        for m in &file.mu {
            if m.x.is_none() && m.y.is_none() {
                return Err(serde::de::Error::custom("mass on the empty pair"));
            }
        }
        Ok(Matching {
            mu: file.mu.into_iter().map(|m| ((m.x, m.y), m.mass)).collect(),
            wages: file
                .wages
                .into_iter()
                .map(|w| ((w.x, w.y), w.wage))
                .collect(),
        })
    }
}

impl Matching {
    pub fn mass(&self, x: Option<usize>, y: Option<usize>) -> Rat {
        self.mu.get(&(x, y)).cloned().unwrap_or_else(Rat::zero)
    }
}

/// Extracts a matching from an equilibrium flow outcome: masses are copied
/// from the internal flows and wages picked from the admissible interval
/// `[V^{-1}(-p_y), U^{-1}(p_x)]`, midpoint for slack pairs and the forced
/// value on tight ones.
pub fn flow_to_matching(
    m: &ItuMarket,
    node_map: &ItuNodeMap,
    out: &FlowOutcome,
) -> Result<Matching, MarketError> {
    if let Some(zero) = node_map.reservation {
        if !out.p[zero].is_zero() {
            return Err(MarketError::UnnormalizedReservation(out.p[zero].clone()));
        }
    }
    let nw = node_map.num_workers;
    let nf = node_map.num_firms;
    let mut mu = BTreeMap::new();
    let mut wages = BTreeMap::new();
    // Arc order in itu_to_flow: worker-firm pairs first, then reservations.
    let mut idx = 0;
    for x in 0..nw {
        for y in 0..nf {
            let mass = out.mu[idx].clone();
            idx += 1;
            let pair = m.pair(x, y);
            let lo = pair.wage_for_firm_utility(&-&out.p[node_map.firm(y)])?;
            let hi = pair.wage_for_worker_utility(&out.p[node_map.worker(x)])?;
            if mass.is_positive() {
                if lo > hi {
                    return Err(MarketError::EmptyWageInterval(x, y));
                }
                mu.insert((Some(x), Some(y)), mass);
                wages.insert((x, y), (lo + hi) * Rat::new(1, 2));
            } else if lo <= hi {
                wages.insert((x, y), (lo + hi) * Rat::new(1, 2));
            }
        }
    }
    if node_map.reservation.is_some() {
        for x in 0..nw {
            let mass = out.mu[idx].clone();
            idx += 1;
            if mass.is_positive() {
                mu.insert((Some(x), None), mass);
            }
        }
        for y in 0..nf {
            let mass = out.mu[idx].clone();
            idx += 1;
            if mass.is_positive() {
                mu.insert((None, Some(y)), mass);
            }
        }
    }
    Ok(Matching { mu, wages })
}

/// Feasibility plus the two argmax conditions of stability, with the
/// blocking test run through the break-even composition `u_x >= G_xy(-v_y)`.
pub fn check_stability_itu(m: &ItuMarket, matching: &Matching) -> Result<Verdict, MarketError> {
    m.validate()?;
    let nw = m.workers.len();
    let nf = m.firms.len();

    // Feasibility sums.
    for (x, (name, count)) in m.workers.iter().enumerate() {
        let total: Rat = (0..nf)
            .map(|y| matching.mass(Some(x), Some(y)))
            .sum::<Rat>()
            + matching.mass(Some(x), None);
        if total != Rat::int(*count as i64) {
            return Ok(Verdict::fail(
                "itu_stability",
                Witness::default().with_note(format!("worker {name} mass {total} != {count}")),
            ));
        }
    }
    for (y, (name, count)) in m.firms.iter().enumerate() {
        let total: Rat = (0..nw)
            .map(|x| matching.mass(Some(x), Some(y)))
            .sum::<Rat>()
            + matching.mass(None, Some(y));
        if total != Rat::int(*count as i64) {
            return Ok(Verdict::fail(
                "itu_stability",
                Witness::default().with_note(format!("firm {name} mass {total} != {count}")),
            ));
        }
    }

    // Utilities from matched options; every carried option must attain them.
    let mut u: Vec<Option<Rat>> = vec![None; nw];
    let mut v: Vec<Option<Rat>> = vec![None; nf];
    let mut matched_options: Vec<((usize, usize), Rat, Rat)> = Vec::new();
    for ((xs, ys), mass) in &matching.mu {
        if !mass.is_positive() {
            continue;
        }
        match (xs, ys) {
            (Some(x), Some(y)) => {
                let w = matching
                    .wages
                    .get(&(*x, *y))
                    .ok_or(MarketError::EmptyWageInterval(*x, *y))?;
                let uw = m.pair(*x, *y).worker_utility(w)?;
                let vw = m.pair(*x, *y).firm_utility(w)?;
                matched_options.push(((*x, *y), uw.clone(), vw.clone()));
                u[*x] = Some(match &u[*x] {
                    Some(cur) => cur.clone().max(uw),
                    None => uw,
                });
                v[*y] = Some(match &v[*y] {
                    Some(cur) => cur.clone().max(vw),
                    None => vw,
                });
            }
            (Some(x), None) => {
                u[*x] = Some(match &u[*x] {
                    Some(cur) => cur.clone().max(Rat::zero()),
                    None => Rat::zero(),
                });
            }
            (None, Some(y)) => {
                v[*y] = Some(match &v[*y] {
                    Some(cur) => cur.clone().max(Rat::zero()),
                    None => Rat::zero(),
                });
            }
            (None, None) => {}
        }
    }
    for ((x, y), uw, vw) in &matched_options {
        if u[*x].as_ref() != Some(uw) {
            return Ok(Verdict::fail(
                "itu_stability",
                Witness::default().with_note(format!(
                    "worker {x} carries pair ({x},{y}) below the best matched utility"
                )),
            ));
        }
        if v[*y].as_ref() != Some(vw) {
            return Ok(Verdict::fail(
                "itu_stability",
                Witness::default()
                    .with_note(format!("firm {y} carries pair ({x},{y}) below its best")),
            ));
        }
    }
    if m.with_singles {
        for x in 0..nw {
            if matching.mass(Some(x), None).is_positive() && u[x] != Some(Rat::zero()) {
                return Ok(Verdict::fail(
                    "itu_stability",
                    Witness::default()
                        .with_note(format!("worker {x} is partly single above zero utility")),
                ));
            }
            if let Some(ux) = &u[x] {
                if ux.is_negative() {
                    return Ok(Verdict::fail(
                        "itu_stability",
                        Witness::default().with_note(format!("worker {x} below reservation")),
                    ));
                }
            }
        }
        for y in 0..nf {
            if matching.mass(None, Some(y)).is_positive() && v[y] != Some(Rat::zero()) {
                return Ok(Verdict::fail(
                    "itu_stability",
                    Witness::default()
                        .with_note(format!("firm {y} is partly single above zero utility")),
                ));
            }
            if let Some(vy) = &v[y] {
                if vy.is_negative() {
                    return Ok(Verdict::fail(
                        "itu_stability",
                        Witness::default().with_note(format!("firm {y} below reservation")),
                    ));
                }
            }
        }
    }

    // Blocking pairs: a pair blocks iff U(V^{-1}(v_y)) > u_x.
    for x in 0..nw {
        for y in 0..nf {
            let (Some(ux), Some(vy)) = (&u[x], &v[y]) else {
                continue;
            };
            let g = m.pair(x, y).connection()?.eval(&-vy)?;
            if *ux < g {
                return Ok(Verdict::fail(
                    "itu_stability",
                    Witness::default()
                        .with_coord(x)
                        .with_note(format!("pair ({x},{y}) blocks: u={ux} < G(-v)={g}")),
                ));
            }
        }
    }
    Ok(Verdict::pass("itu_stability"))
}

/// Dual-feasibility view of transferable-utility payoffs: with singles,
/// `(u, v) >= 0`, `u_x + v_y >= phi_xy`, and total payoff equal to the
/// assignment optimum characterize equilibrium payoff vectors.
pub fn tu_payoff_is_equilibrium(
    m: &ItuMarket,
    u: &[Rat],
    v: &[Rat],
    optimum: &Rat,
) -> Result<bool, MarketError> {
    let phi = m.tu_surplus().ok_or(MarketError::Shape)?;
    if u.len() != m.workers.len() || v.len() != m.firms.len() {
        return Err(MarketError::Shape);
    }
    if m.with_singles && (u.iter().any(Rat::is_negative) || v.iter().any(Rat::is_negative)) {
        return Ok(false);
    }
    for (x, row) in phi.iter().enumerate() {
        for (y, f) in row.iter().enumerate() {
            if &(&u[x] + &v[y]) < f {
                return Ok(false);
            }
        }
    }
    let total: Rat = u
        .iter()
        .zip(&m.workers)
        .map(|(ux, (_, c))| ux * &Rat::int(*c as i64))
        .sum::<Rat>()
        + v.iter()
            .zip(&m.firms)
            .map(|(vy, (_, c))| vy * &Rat::int(*c as i64))
            .sum::<Rat>();
    Ok(total == *optimum)
}

/// Worker-optimal and firm-optimal vertices of the dual-optimal face, for
/// plain transferable utility with singles.
pub fn tu_extreme_payoffs(
    m: &ItuMarket,
    optimum: &Rat,
) -> Result<Option<(Point, Point)>, MarketError> {
    let phi = match (m.tu_surplus(), m.with_singles) {
        (Some(phi), true) => phi,
        _ => return Ok(None),
    };
    let nw = m.workers.len();
    let nf = m.firms.len();
    let nvars = nw + nf;
    let build = |max_workers: bool| -> LpResult {
        let mut lp = LinearProgram::new(nvars);
        for (x, row) in phi.iter().enumerate() {
            for (y, f) in row.iter().enumerate() {
                let mut coeffs = vec![Rat::zero(); nvars];
                coeffs[x] = Rat::one();
                coeffs[nw + y] = Rat::one();
                lp.constraint(coeffs, Cmp::Ge, f.clone());
            }
        }
        let mut total = vec![Rat::zero(); nvars];
        for (x, (_, c)) in m.workers.iter().enumerate() {
            total[x] = Rat::int(*c as i64);
        }
        for (y, (_, c)) in m.firms.iter().enumerate() {
            total[nw + y] = Rat::int(*c as i64);
        }
        lp.constraint(total, Cmp::Eq, optimum.clone());
        let mut obj = vec![Rat::zero(); nvars];
        for (x, (_, c)) in m.workers.iter().enumerate() {
            obj[x] = Rat::int(*c as i64);
        }
        if max_workers {
            lp.maximize(obj);
        } else {
            lp.minimize(obj);
        }
        lp.solve()
    };
    let worker_best = match build(true) {
        LpResult::Optimal { x, .. } => Point::new(x),
        _ => return Ok(None),
    };
    let firm_best = match build(false) {
        LpResult::Optimal { x, .. } => Point::new(x),
        _ => return Ok(None),
    };
    Ok(Some((worker_best, firm_best)))
}

// ---------------------------------------------------------------------------
// Matching without transfers.

/// Marriage market with strict preferences enforced at load time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NtuMarket {
    pub alpha: Vec<Vec<Rat>>,
    pub alpha0: Vec<Rat>,
    pub gamma: Vec<Vec<Rat>>,
    pub gamma0: Vec<Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposingSide {
    Men,
    Women,
}

impl NtuMarket {
    pub fn num_men(&self) -> usize {
        self.alpha.len()
    }

    pub fn num_women(&self) -> usize {
        self.gamma0.len()
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        let nx = self.num_men();
        let ny = self.num_women();
        if self.alpha0.len() != nx
            || self.gamma.len() != nx
            || self.alpha.iter().any(|r| r.len() != ny)
            || self.gamma.iter().any(|r| r.len() != ny)
        {
            return Err(MarketError::Shape);
        }
        for x in 0..nx {
            let mut seen = BTreeSet::new();
            for y in 0..ny {
                if !seen.insert(self.alpha[x][y].clone()) {
                    return Err(MarketError::StrictPreferences(format!(
                        "man {x} ties two options at {}",
                        self.alpha[x][y]
                    )));
                }
            }
            if !seen.insert(self.alpha0[x].clone()) {
                return Err(MarketError::StrictPreferences(format!(
                    "man {x} ties a match with staying single"
                )));
            }
        }
        for y in 0..ny {
            let mut seen = BTreeSet::new();
            for x in 0..nx {
                if !seen.insert(self.gamma[x][y].clone()) {
                    return Err(MarketError::StrictPreferences(format!(
                        "woman {y} ties two options at {}",
                        self.gamma[x][y]
                    )));
                }
            }
            if !seen.insert(self.gamma0[y].clone()) {
                return Err(MarketError::StrictPreferences(format!(
                    "woman {y} ties a match with staying single"
                )));
            }
        }
        Ok(())
    }

    /// The unique best option of man `x` among women whose requirement `v_y`
    /// he meets (`gamma_xy >= v_y`) and staying single.
    pub fn man_choice(&self, v: &[Rat], x: usize) -> Option<usize> {
        let mut best: Option<(Rat, Option<usize>)> = Some((self.alpha0[x].clone(), None));
        for y in 0..self.num_women() {
            if self.gamma[x][y] >= v[y] {
                let cand = (self.alpha[x][y].clone(), Some(y));
                if cand.0 > best.as_ref().unwrap().0 {
                    best = Some(cand);
                }
            }
        }
        best.unwrap().1
    }

    pub fn candidate_levels(&self, y: usize) -> Vec<Rat> {
        let mut levels: BTreeSet<Rat> = (0..self.num_men())
            .map(|x| self.gamma[x][y].clone())
            .collect();
        levels.insert(self.gamma0[y].clone());
        levels.into_iter().collect()
    }
}

/// Excess supply of each woman at requirement vector `v`.
pub fn ntu_excess_supply(m: &NtuMarket, v: &[Rat]) -> Result<Vec<Rat>, MarketError> {
    m.validate()?;
    if v.len() != m.num_women() {
        return Err(MarketError::Shape);
    }
    let mut demand = vec![0i64; m.num_women()];
    for x in 0..m.num_men() {
        if let Some(y) = m.man_choice(v, x) {
            demand[y] += 1;
        }
    }
    Ok((0..m.num_women())
        .map(|y| {
            let single = i64::from(m.gamma0[y] >= v[y]);
            Rat::int(1 - demand[y] - single)
        })
        .collect())
}

/// Stable outcome: a zero/one matching with its payoff vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NtuOutcome {
    pub matching: Matching,
    pub u: Vec<Rat>,
    pub v: Vec<Rat>,
}

fn matching_from_choices(m: &NtuMarket, v: &[Rat]) -> Matching {
    let mut mu = BTreeMap::new();
    for x in 0..m.num_men() {
        match m.man_choice(v, x) {
            Some(y) => {
                mu.insert((Some(x), Some(y)), Rat::one());
            }
            None => {
                mu.insert((Some(x), None), Rat::one());
            }
        }
    }
    for y in 0..m.num_women() {
        if m.gamma0[y] >= v[y] {
            mu.insert((None, Some(y)), Rat::one());
        }
    }
    Matching {
        mu,
        wages: BTreeMap::new(),
    }
}

/// Realized payoffs of a zero/one matching.
pub fn ntu_payoffs(m: &NtuMarket, matching: &Matching) -> Result<(Vec<Rat>, Vec<Rat>), MarketError> {
    let mut u: Vec<Rat> = self_or(&m.alpha0);
    let mut v: Vec<Rat> = self_or(&m.gamma0);
    for ((xs, ys), mass) in &matching.mu {
        if !mass.is_positive() {
            continue;
        }
        if let (Some(x), Some(y)) = (xs, ys) {
            u[*x] = m.alpha[*x][*y].clone();
            v[*y] = m.gamma[*x][*y].clone();
        }
    }
    Ok((u, v))
}

fn self_or(base: &[Rat]) -> Vec<Rat> {
    base.to_vec()
}

/// Enumerates the finite candidate grid of payoff requirements, keeps the
/// zeros of the excess supply map, and reconstructs the stable matchings.
/// Outcomes are canonicalized to their realized payoffs and deduplicated.
pub fn ntu_solve(m: &NtuMarket) -> Result<Vec<NtuOutcome>, MarketError> {
    m.validate()?;
    let ny = m.num_women();
    let levels: Vec<Vec<Rat>> = (0..ny).map(|y| m.candidate_levels(y)).collect();
    let mut outcomes: BTreeMap<Vec<Rat>, NtuOutcome> = BTreeMap::new();
    let mut idx = vec![0usize; ny];
    loop {
        let v: Vec<Rat> = idx
            .iter()
            .enumerate()
            .map(|(y, &i)| levels[y][i].clone())
            .collect();
        let excess = ntu_excess_supply(m, &v)?;
        if excess.iter().all(Rat::is_zero) {
            let matching = matching_from_choices(m, &v);
            let verdict = check_stability_ntu(m, &matching)?;
            debug_assert!(verdict.holds, "reconstructed matching must be stable");
            if verdict.holds {
                let (u, realized_v) = ntu_payoffs(m, &matching)?;
                outcomes.entry(realized_v.clone()).or_insert(NtuOutcome {
                    matching,
                    u,
                    v: realized_v,
                });
            }
        }
        // Odometer.
        let mut y = 0;
        loop {
            if y == ny {
                return Ok(outcomes.into_values().collect());
            }
            idx[y] += 1;
            if idx[y] < levels[y].len() {
                break;
            }
            idx[y] = 0;
            y += 1;
        }
    }
}

/// Deferred acceptance with individual-rationality cutoffs.
pub fn gale_shapley(m: &NtuMarket, proposing: ProposingSide) -> Result<Matching, MarketError> {
    m.validate()?;
    match proposing {
        ProposingSide::Men => Ok(deferred_acceptance(
            m.num_men(),
            m.num_women(),
            |x, y| &m.alpha[x][y],
            |x| &m.alpha0[x],
            |y, x| &m.gamma[x][y],
            |y| &m.gamma0[y],
            false,
        )),
        ProposingSide::Women => Ok(deferred_acceptance(
            m.num_women(),
            m.num_men(),
            |y, x| &m.gamma[x][y],
            |y| &m.gamma0[y],
            |x, y| &m.alpha[x][y],
            |x| &m.alpha0[x],
            true,
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn deferred_acceptance<'a>(
    np: usize,
    nr: usize,
    prop_val: impl Fn(usize, usize) -> &'a Rat,
    prop_single: impl Fn(usize) -> &'a Rat,
    recv_val: impl Fn(usize, usize) -> &'a Rat,
    recv_single: impl Fn(usize) -> &'a Rat,
    swapped: bool,
) -> Matching {
    // Each proposer works down its acceptable list; receivers hold the best
    // acceptable proposal.
    let mut prefs: Vec<Vec<usize>> = (0..np)
        .map(|p| {
            let mut ys: Vec<usize> = (0..nr)
                .filter(|&r| prop_val(p, r) > prop_single(p))
                .collect();
            ys.sort_by(|&a, &b| prop_val(p, b).cmp(prop_val(p, a)));
            ys
        })
        .collect();
    let mut held: Vec<Option<usize>> = vec![None; nr];
    let mut queue: Vec<usize> = (0..np).rev().collect();
    while let Some(p) = queue.pop() {
        while let Some(r) = prefs[p].first().copied() {
            prefs[p].remove(0);
            if recv_val(r, p) <= recv_single(r) {
                continue;
            }
            match held[r] {
                None => {
                    held[r] = Some(p);
                    break;
                }
                Some(cur) if recv_val(r, p) > recv_val(r, cur) => {
                    held[r] = Some(p);
                    queue.push(cur);
                    break;
                }
                Some(_) => {}
            }
        }
    }
    let mut mu = BTreeMap::new();
    let mut matched_proposers = vec![false; np];
    for (r, slot) in held.iter().enumerate() {
        if let Some(p) = slot {
            matched_proposers[*p] = true;
            let key = if swapped {
                (Some(r), Some(*p))
            } else {
                (Some(*p), Some(r))
            };
            mu.insert(key, Rat::one());
        } else {
            let key = if swapped { (Some(r), None) } else { (None, Some(r)) };
            mu.insert(key, Rat::one());
        }
    }
    for (p, matched) in matched_proposers.iter().enumerate() {
        if !matched {
            let key = if swapped { (None, Some(p)) } else { (Some(p), None) };
            mu.insert(key, Rat::one());
        }
    }
    Matching {
        mu,
        wages: BTreeMap::new(),
    }
}

/// Zero/one feasibility, individual rationality, and absence of blocking
/// pairs.
pub fn check_stability_ntu(m: &NtuMarket, matching: &Matching) -> Result<Verdict, MarketError> {
    m.validate()?;
    let nx = m.num_men();
    let ny = m.num_women();
    for ((xs, ys), mass) in &matching.mu {
        if !mass.is_zero() && *mass != Rat::one() {
            return Err(MarketError::NonIntegral(
                xs.map_or("0".into(), |x| x.to_string()),
                ys.map_or("0".into(), |y| y.to_string()),
            ));
        }
    }
    for x in 0..nx {
        let total: Rat = matching
            .mu
            .iter()
            .filter(|((xs, _), _)| *xs == Some(x))
            .map(|(_, m)| m)
            .sum();
        if total != Rat::one() {
            return Err(MarketError::InfeasibleMass(format!("man {x}")));
        }
    }
    for y in 0..ny {
        let total: Rat = matching
            .mu
            .iter()
            .filter(|((_, ys), _)| *ys == Some(y))
            .map(|(_, m)| m)
            .sum();
        if total != Rat::one() {
            return Err(MarketError::InfeasibleMass(format!("woman {y}")));
        }
    }
    let (u, v) = ntu_payoffs(m, matching)?;
    for x in 0..nx {
        if u[x] < m.alpha0[x] {
            return Ok(Verdict::fail(
                "ntu_stability",
                Witness::default().with_note(format!("man {x} below reservation")),
            ));
        }
    }
    for y in 0..ny {
        if v[y] < m.gamma0[y] {
            return Ok(Verdict::fail(
                "ntu_stability",
                Witness::default().with_note(format!("woman {y} below reservation")),
            ));
        }
    }
    for x in 0..nx {
        for y in 0..ny {
            if m.alpha[x][y] > u[x] && m.gamma[x][y] > v[y] {
                return Ok(Verdict::fail(
                    "ntu_stability",
                    Witness::default()
                        .with_coord(x)
                        .with_note(format!("blocking pair ({x}, {y})")),
                ));
            }
        }
    }
    Ok(Verdict::pass("ntu_stability"))
}

/// Tabulated taxonomy check of the excess supply map on a payoff sublattice
/// grid: weak gross substitutes, monotone total output, and the point-valued
/// M0 classification (inclusive of the M-function cell).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NtuM0Report {
    pub wgs: Verdict,
    pub monotone_total_output: Verdict,
    pub taxonomy: Taxonomy,
    pub is_m0_function: bool,
}

pub fn ntu_m0_check(m: &NtuMarket, grid: &PriceGrid) -> Result<NtuM0Report, MarketError> {
    if !grid.is_sublattice() {
        return Err(MarketError::GridNotSublattice);
    }
    let mut map = BTreeMap::new();
    for v in grid.iter() {
        let q = ntu_excess_supply(m, v.coords())?;
        map.insert(v.clone(), BTreeSet::from([Point::new(q)]));
    }
    let corr = FiniteCorrespondence::new(m.num_women(), map)?;
    let wgs = check_substitutes(&corr, SubstitutesNotion::WgsFunction)?;
    let mto = check_monotonicity(&corr, &MonotonicityProperty::MonotoneTotalOutput)?;
    let taxonomy = classify(&corr)?;
    let is_m0_function = taxonomy.is_m0_function();
    Ok(NtuM0Report {
        wgs,
        monotone_total_output: mto,
        taxonomy,
        is_m0_function,
    })
}

// ---------------------------------------------------------------------------
// Hedonic pricing.

/// Strictly monotone map of a price, affine or tabulated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MonotoneMap {
    Affine { slope: Rat, intercept: Rat },
    Tabulated { points: Vec<(Rat, Rat)> },
}

impl MonotoneMap {
    pub fn eval(&self, p: &Rat) -> Result<Rat, MarketError> {
        match self {
            MonotoneMap::Affine { slope, intercept } => Ok(&(slope * p) + intercept),
            MonotoneMap::Tabulated { points } => {
                Ok(PiecewiseLinear::new(points.clone())?.eval(p)?)
            }
        }
    }

    fn is_increasing(&self) -> Result<bool, MarketError> {
        match self {
            MonotoneMap::Affine { slope, .. } => {
                if slope.is_zero() {
                    Err(MarketError::BadSlope)
                } else {
                    Ok(slope.is_positive())
                }
            }
            MonotoneMap::Tabulated { points } => {
                Ok(PiecewiseLinear::new(points.clone())?.is_increasing())
            }
        }
    }

    /// Connection `G(p_y) = f^{-1}(-p_y)` for a decreasing `f` (the consumer
    /// side of the hedonic reduction).
    fn neg_inverse_connection(&self) -> Result<ConnectionFunction, MarketError> {
        match self {
            MonotoneMap::Affine { slope, intercept } => {
                // f(p) = s p + t, s < 0: f^{-1}(-x) = (-x - t)/s.
                let a = -(&Rat::one() / slope);
                let b = -(intercept / slope);
                Ok(ConnectionFunction::affine(a, b))
            }
            MonotoneMap::Tabulated { points } => {
                let mut flipped: Vec<(Rat, Rat)> = points
                    .iter()
                    .map(|(pw, s)| (-s, pw.clone()))
                    .collect();
                flipped.sort_by(|a, b| a.0.cmp(&b.0));
                Ok(ConnectionFunction::tabulated(flipped)?)
            }
        }
    }

    fn direct_connection(&self) -> Result<ConnectionFunction, MarketError> {
        match self {
            MonotoneMap::Affine { slope, intercept } => Ok(ConnectionFunction::affine(
                slope.clone(),
                intercept.clone(),
            )),
            MonotoneMap::Tabulated { points } => Ok(ConnectionFunction::tabulated(points.clone())?),
        }
    }
}

/// Producers choosing a quality to make, consumers choosing one to buy.
#[derive(Debug, Clone)]
pub struct HedonicMarket {
    pub producers: Vec<(String, u64)>,
    pub consumers: Vec<(String, u64)>,
    pub qualities: Vec<String>,
    /// Profit `pi_xw(p_w)`, strictly increasing.
    pub pi: BTreeMap<(usize, usize), MonotoneMap>,
    /// Surplus `s_yw(p_w)`, strictly decreasing.
    pub s: BTreeMap<(usize, usize), MonotoneMap>,
}

#[derive(Serialize, Deserialize)]
struct QualityMapFile {
    agent: usize,
    quality: usize,
    #[serde(flatten)]
    map: MonotoneMap,
}

#[derive(Serialize, Deserialize)]
struct HedonicFile {
    producers: Vec<CountFile>,
    consumers: Vec<CountFile>,
    qualities: Vec<String>,
    pi: Vec<QualityMapFile>,
    s: Vec<QualityMapFile>,
}

impl Serialize for HedonicMarket {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries = |m: &BTreeMap<(usize, usize), MonotoneMap>| {
            m.iter()
                .map(|(&(agent, quality), map)| QualityMapFile {
                    agent,
                    quality,
                    map: map.clone(),
                })
                .collect()
        };
        HedonicFile {
            producers: self
                .producers
                .iter()
                .map(|(name, count)| CountFile {
                    name: name.clone(),
                    count: *count,
                })
                .collect(),
            consumers: self
                .consumers
                .iter()
                .map(|(name, count)| CountFile {
                    name: name.clone(),
                    count: *count,
                })
                .collect(),
            qualities: self.qualities.clone(),
            pi: entries(&self.pi),
            s: entries(&self.s),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HedonicMarket {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = HedonicFile::deserialize(deserializer)?;
        let market = HedonicMarket {
            producers: file
                .producers
                .into_iter()
                .map(|c| (c.name, c.count))
                .collect(),
            consumers: file
                .consumers
                .into_iter()
                .map(|c| (c.name, c.count))
                .collect(),
            qualities: file.qualities,
            pi: file
                .pi
                .into_iter()
                .map(|e| ((e.agent, e.quality), e.map))
                .collect(),
            s: file
                .s
                .into_iter()
                .map(|e| ((e.agent, e.quality), e.map))
                .collect(),
        };
        market.validate().map_err(serde::de::Error::custom)?;
        Ok(market)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HedonicNodeMap {
    pub num_producers: usize,
    pub num_qualities: usize,
    pub num_consumers: usize,
}

impl HedonicNodeMap {
    pub fn producer(&self, x: usize) -> usize {
        x
    }

    pub fn quality(&self, w: usize) -> usize {
        self.num_producers + w
    }

    pub fn consumer(&self, y: usize) -> usize {
        self.num_producers + self.num_qualities + y
    }

    pub fn reservation(&self) -> usize {
        self.num_producers + self.num_qualities + self.num_consumers
    }
}

impl HedonicMarket {
    pub fn validate(&self) -> Result<(), MarketError> {
        for x in 0..self.producers.len() {
            for w in 0..self.qualities.len() {
                let map = self
                    .pi
                    .get(&(x, w))
                    .ok_or(MarketError::MissingPair(x, w))?;
                if !map.is_increasing()? {
                    return Err(MarketError::BadSlope);
                }
            }
        }
        for y in 0..self.consumers.len() {
            for w in 0..self.qualities.len() {
                let map = self
                    .s
                    .get(&(y, w))
                    .ok_or(MarketError::MissingPair(y, w))?;
                if map.is_increasing()? {
                    return Err(MarketError::BadSlope);
                }
            }
        }
        Ok(())
    }

    pub fn producer_indirect(&self, x: usize, p: &[Rat]) -> Result<Rat, MarketError> {
        let mut best = Rat::zero();
        for w in 0..self.qualities.len() {
            let profit = self.pi[&(x, w)].eval(&p[w])?;
            best = best.max(profit);
        }
        Ok(best)
    }

    pub fn consumer_indirect(&self, y: usize, p: &[Rat]) -> Result<Rat, MarketError> {
        let mut best = Rat::zero();
        for w in 0..self.qualities.len() {
            let surplus = self.s[&(y, w)].eval(&p[w])?;
            best = best.max(surplus);
        }
        Ok(best)
    }
}

/// Reduction to an equilibrium flow problem: producers feed qualities,
/// qualities feed consumers, and the reservation node absorbs imbalance.
pub fn hedonic_to_flow(m: &HedonicMarket) -> Result<(FlowProblem, HedonicNodeMap), MarketError> {
    m.validate()?;
    let map = HedonicNodeMap {
        num_producers: m.producers.len(),
        num_qualities: m.qualities.len(),
        num_consumers: m.consumers.len(),
    };
    let mut nodes: Vec<String> = m.producers.iter().map(|(n, _)| format!("x:{n}")).collect();
    nodes.extend(m.qualities.iter().map(|n| format!("q:{n}")));
    nodes.extend(m.consumers.iter().map(|(n, _)| format!("y:{n}")));
    nodes.push("0".into());

    let identity = || ConnectionFunction::affine(Rat::one(), Rat::zero());
    let mut arcs = Vec::new();
    for x in 0..m.producers.len() {
        for w in 0..m.qualities.len() {
            arcs.push(Arc {
                from: map.producer(x),
                to: map.quality(w),
                connection: m.pi[&(x, w)].direct_connection()?,
            });
        }
    }
    for x in 0..m.producers.len() {
        arcs.push(Arc {
            from: map.producer(x),
            to: map.reservation(),
            connection: identity(),
        });
    }
    for w in 0..m.qualities.len() {
        for y in 0..m.consumers.len() {
            arcs.push(Arc {
                from: map.quality(w),
                to: map.consumer(y),
                connection: m.s[&(y, w)].neg_inverse_connection()?,
            });
        }
    }
    for y in 0..m.consumers.len() {
        arcs.push(Arc {
            from: map.reservation(),
            to: map.consumer(y),
            connection: identity(),
        });
    }
    let network = Network::new(nodes, arcs)?;
    let mut q = Vec::with_capacity(network.num_nodes());
    for (_, c) in &m.producers {
        q.push(Rat::int(-(*c as i64)));
    }
    for _ in &m.qualities {
        q.push(Rat::zero());
    }
    for (_, c) in &m.consumers {
        q.push(Rat::int(*c as i64));
    }
    let n: i64 = m.producers.iter().map(|(_, c)| *c as i64).sum();
    let c: i64 = m.consumers.iter().map(|(_, c)| *c as i64).sum();
    q.push(Rat::int(n - c));
    Ok((FlowProblem::new(network, q)?, map))
}

/// Allocation masses of a hedonic market.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HedonicAllocation {
    pub produce: BTreeMap<(usize, usize), Rat>,
    pub consume: BTreeMap<(usize, usize), Rat>,
    pub producer_out: BTreeMap<usize, Rat>,
    pub consumer_out: BTreeMap<usize, Rat>,
}

impl HedonicAllocation {
    fn get(map: &BTreeMap<(usize, usize), Rat>, k: (usize, usize)) -> Rat {
        map.get(&k).cloned().unwrap_or_else(Rat::zero)
    }

    /// Reads the allocation off a flow outcome of the reduction network.
    pub fn from_flow(m: &HedonicMarket, out: &FlowOutcome) -> Self {
        let nx = m.producers.len();
        let nw = m.qualities.len();
        let ny = m.consumers.len();
        let mut alloc = HedonicAllocation::default();
        let mut idx = 0;
        for x in 0..nx {
            for w in 0..nw {
                if out.mu[idx].is_positive() {
                    alloc.produce.insert((x, w), out.mu[idx].clone());
                }
                idx += 1;
            }
        }
        for x in 0..nx {
            if out.mu[idx].is_positive() {
                alloc.producer_out.insert(x, out.mu[idx].clone());
            }
            idx += 1;
        }
        for w in 0..nw {
            for y in 0..ny {
                if out.mu[idx].is_positive() {
                    alloc.consume.insert((w, y), out.mu[idx].clone());
                }
                idx += 1;
            }
        }
        for y in 0..ny {
            if out.mu[idx].is_positive() {
                alloc.consumer_out.insert(y, out.mu[idx].clone());
            }
            idx += 1;
        }
        alloc
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HedonicVerdict {
    pub holds: bool,
    pub violations: Vec<String>,
}

/// Checks feasibility, market balance on every quality, and the four
/// complementary optimality relations, with utilities recomputed as indirect
/// maxima.
pub fn verify_hedonic(
    m: &HedonicMarket,
    p: &[Rat],
    alloc: &HedonicAllocation,
    eps: &Rat,
) -> Result<HedonicVerdict, MarketError> {
    m.validate()?;
    if p.len() != m.qualities.len() {
        return Err(MarketError::Shape);
    }
    let nx = m.producers.len();
    let nw = m.qualities.len();
    let ny = m.consumers.len();
    let mut violations = Vec::new();

    let all_masses = alloc
        .produce
        .values()
        .chain(alloc.consume.values())
        .chain(alloc.producer_out.values())
        .chain(alloc.consumer_out.values());
    for mass in all_masses {
        if mass.is_negative() {
            return Err(MarketError::Shape);
        }
    }

    for (x, (name, count)) in m.producers.iter().enumerate() {
        let total: Rat = (0..nw)
            .map(|w| HedonicAllocation::get(&alloc.produce, (x, w)))
            .sum::<Rat>()
            + alloc.producer_out.get(&x).cloned().unwrap_or_else(Rat::zero);
        if (total.clone() - Rat::int(*count as i64)).abs() > *eps {
            violations.push(format!("producer {name}: mass {total} != {count}"));
        }
    }
    for (y, (name, count)) in m.consumers.iter().enumerate() {
        let total: Rat = (0..nw)
            .map(|w| HedonicAllocation::get(&alloc.consume, (w, y)))
            .sum::<Rat>()
            + alloc.consumer_out.get(&y).cloned().unwrap_or_else(Rat::zero);
        if (total.clone() - Rat::int(*count as i64)).abs() > *eps {
            violations.push(format!("consumer {name}: mass {total} != {count}"));
        }
    }
    for (w, name) in m.qualities.iter().enumerate() {
        let made: Rat = (0..nx)
            .map(|x| HedonicAllocation::get(&alloc.produce, (x, w)))
            .sum();
        let used: Rat = (0..ny)
            .map(|y| HedonicAllocation::get(&alloc.consume, (w, y)))
            .sum();
        if (made - used).abs() > *eps {
            violations.push(format!("quality {name}: production != consumption"));
        }
    }

    let u: Vec<Rat> = (0..nx)
        .map(|x| m.producer_indirect(x, p))
        .collect::<Result<_, _>>()?;
    let v: Vec<Rat> = (0..ny)
        .map(|y| m.consumer_indirect(y, p))
        .collect::<Result<_, _>>()?;
    for ((x, w), mass) in &alloc.produce {
        if mass.is_positive() {
            let profit = m.pi[&(*x, *w)].eval(&p[*w])?;
            if (&u[*x] - &profit).abs() > *eps {
                violations.push(format!("producer {x} makes {w} below its best profit"));
            }
        }
    }
    for (x, mass) in &alloc.producer_out {
        if mass.is_positive() && u[*x].abs() > *eps {
            violations.push(format!("producer {x} opts out above zero profit"));
        }
    }
    for ((w, y), mass) in &alloc.consume {
        if mass.is_positive() {
            let surplus = m.s[&(*y, *w)].eval(&p[*w])?;
            if (&v[*y] - &surplus).abs() > *eps {
                violations.push(format!("consumer {y} buys {w} below its best surplus"));
            }
        }
    }
    for (y, mass) in &alloc.consumer_out {
        if mass.is_positive() && v[*y].abs() > *eps {
            violations.push(format!("consumer {y} opts out above zero surplus"));
        }
    }

    Ok(HedonicVerdict {
        holds: violations.is_empty(),
        violations,
    })
}

// ---------------------------------------------------------------------------
// Lattice structure of equilibrium payoff sets.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosureReport {
    pub pairs_checked: usize,
    pub holds: bool,
    pub failures: Vec<(Point, Point, Point)>,
}

/// Re-verifies every pairwise meet and join of a set of payoff vectors.
pub fn meet_join_closure(
    points: &BTreeSet<Point>,
    mut verify: impl FnMut(&Point) -> bool,
) -> ClosureReport {
    let mut report = ClosureReport {
        pairs_checked: 0,
        holds: true,
        failures: Vec::new(),
    };
    for a in points {
        for b in points {
            if a >= b {
                continue;
            }
            report.pairs_checked += 1;
            for cand in [a.meet(b), a.join(b)] {
                if !verify(&cand) {
                    report.holds = false;
                    report.failures.push((a.clone(), b.clone(), cand));
                }
            }
        }
    }
    report
}

/// Strong-set-order dominance `after <= before` on sampled pairs: the meet
/// must re-verify in the after-market and the join in the before-market.
pub fn sso_decrease(
    after: &BTreeSet<Point>,
    before: &BTreeSet<Point>,
    mut verify_after: impl FnMut(&Point) -> bool,
    mut verify_before: impl FnMut(&Point) -> bool,
) -> ClosureReport {
    let mut report = ClosureReport {
        pairs_checked: 0,
        holds: true,
        failures: Vec::new(),
    };
    for a in after {
        for b in before {
            report.pairs_checked += 1;
            let meet = a.meet(b);
            let join = a.join(b);
            if !verify_after(&meet) {
                report.holds = false;
                report.failures.push((a.clone(), b.clone(), meet));
            }
            if !verify_before(&join) {
                report.holds = false;
                report.failures.push((a.clone(), b.clone(), join));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{solve_additive, verify_equilibrium, ConnectionKind};
    use crate::rat::rat;

    fn tu_market(alpha: &[&[i64]], gamma: &[&[i64]], with_singles: bool) -> ItuMarket {
        let nw = alpha.len();
        let nf = alpha[0].len();
        let mut pairs = BTreeMap::new();
        for x in 0..nw {
            for y in 0..nf {
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
            workers: (0..nw).map(|x| (format!("x{x}"), 1)).collect(),
            firms: (0..nf).map(|y| (format!("y{y}"), 1)).collect(),
            pairs,
            with_singles,
        }
    }

    #[test]
    fn tu_pair_composes_to_additive_connection() {
        let pair = TransferPair::Tu {
            alpha: rat("2"),
            gamma: rat("3"),
        };
        let g = pair.connection().unwrap();
        match g.kind {
            ConnectionKind::Additive { ref c } => assert_eq!(*c, rat("-5")),
            _ => panic!("expected additive"),
        }
        assert_eq!(g.eval(&rat("1")).unwrap(), rat("6"));
    }

    #[test]
    fn affine_pair_composes_symbolically() {
        // U = 1 + 2w, V = 3 - w: G(p) = 1 + 2(3 + p) = 7 + 2p.
        let pair = TransferPair::Affine {
            alpha: rat("1"),
            a: rat("2"),
            gamma: rat("3"),
            b: rat("1"),
        };
        let g = pair.connection().unwrap();
        assert_eq!(g.eval(&rat("0")).unwrap(), rat("7"));
        assert_eq!(g.eval(&rat("2")).unwrap(), rat("11"));
        // Cross-check against the tabulated composition of the same maps.
        let tab = TransferPair::Tabulated {
            u: PiecewiseLinear::new(vec![(rat("-10"), rat("-19")), (rat("10"), rat("21"))])
                .unwrap(),
            v: PiecewiseLinear::new(vec![(rat("-10"), rat("13")), (rat("10"), rat("-7"))])
                .unwrap(),
        };
        let gt = tab.connection().unwrap();
        for p in ["-5", "0", "2", "13/2"] {
            assert_eq!(gt.eval(&rat(p)).unwrap(), g.eval(&rat(p)).unwrap(), "at {p}");
        }
    }

    #[test]
    fn one_by_one_market_reduces_and_solves() {
        let m = tu_market(&[&[2]], &[&[1]], false);
        let (prob, node_map) = itu_to_flow(&m).unwrap();
        assert_eq!(prob.network.num_nodes(), 2);
        assert_eq!(prob.q, vec![Rat::int(-1), Rat::int(1)]);
        let out = solve_additive(&prob).unwrap();
        assert!(verify_equilibrium(&prob, &out, &Rat::zero()).unwrap().holds);
        let matching = flow_to_matching(&m, &node_map, &out).unwrap();
        assert_eq!(matching.mass(Some(0), Some(0)), Rat::one());
        assert!(check_stability_itu(&m, &matching).unwrap().holds);
    }

    #[test]
    fn with_singles_network_shape() {
        let m = tu_market(&[&[1, 2], &[3, 4]], &[&[1, 1], &[1, 1]], true);
        let (prob, node_map) = itu_to_flow(&m).unwrap();
        assert_eq!(prob.network.num_nodes(), 5);
        assert_eq!(prob.network.num_arcs(), 4 + 2 + 2);
        assert_eq!(node_map.reservation, Some(4));
        let total: Rat = prob.q.iter().sum();
        assert!(total.is_zero());
    }

    #[test]
    fn anti_assortative_matching_is_blocked() {
        // Assortative surplus: diagonal is efficient.
        let m = tu_market(&[&[4, 1], &[1, 0]], &[&[4, 1], &[1, 0]], false);
        let mut mu = BTreeMap::new();
        mu.insert((Some(0), Some(1)), Rat::one());
        mu.insert((Some(1), Some(0)), Rat::one());
        let mut wages = BTreeMap::new();
        wages.insert((0usize, 1usize), Rat::zero());
        wages.insert((1usize, 0usize), Rat::zero());
        let matching = Matching { mu, wages };
        let verdict = check_stability_itu(&m, &matching).unwrap();
        assert!(!verdict.holds);
        assert!(verdict.witness.unwrap().note.unwrap().contains("blocks"));
    }

    fn two_by_two_opposed() -> NtuMarket {
        // Men prefer their own index, women the opposite: two stable
        // matchings.
        NtuMarket {
            alpha: vec![vec![rat("2"), rat("1")], vec![rat("1"), rat("2")]],
            alpha0: vec![rat("0"), rat("0")],
            gamma: vec![vec![rat("1"), rat("2")], vec![rat("2"), rat("1")]],
            gamma0: vec![rat("0"), rat("0")],
        }
    }

    #[test]
    fn ntu_excess_supply_counts() {
        let m = two_by_two_opposed();
        // Requirements too high for everyone: both women unmatched on both
        // counts.
        let q = ntu_excess_supply(&m, &[rat("5"), rat("5")]).unwrap();
        assert_eq!(q, vec![Rat::one(), Rat::one()]);
    }

    #[test]
    fn opposed_preferences_have_two_stable_outcomes() {
        let m = two_by_two_opposed();
        let outcomes = ntu_solve(&m).unwrap();
        assert_eq!(outcomes.len(), 2);
        for o in &outcomes {
            assert!(check_stability_ntu(&m, &o.matching).unwrap().holds);
        }
        // Men-proposing deferred acceptance lands on the v-minimal outcome.
        let men = gale_shapley(&m, ProposingSide::Men).unwrap();
        let (_, v_men) = ntu_payoffs(&m, &men).unwrap();
        let v_min = outcomes
            .iter()
            .map(|o| Point::new(o.v.clone()))
            .fold(None::<Point>, |acc, p| {
                Some(match acc {
                    None => p,
                    Some(a) => a.meet(&p),
                })
            })
            .unwrap();
        assert_eq!(Point::new(v_men), v_min);
        let women = gale_shapley(&m, ProposingSide::Women).unwrap();
        assert!(check_stability_ntu(&m, &women).unwrap().holds);
    }

    #[test]
    fn all_unacceptable_everyone_single() {
        let m = NtuMarket {
            alpha: vec![vec![rat("-1")]],
            alpha0: vec![rat("0")],
            gamma: vec![vec![rat("-2")]],
            gamma0: vec![rat("0")],
        };
        let out = gale_shapley(&m, ProposingSide::Men).unwrap();
        assert_eq!(out.mass(Some(0), None), Rat::one());
        assert_eq!(out.mass(None, Some(0)), Rat::one());
        assert!(check_stability_ntu(&m, &out).unwrap().holds);
    }

    #[test]
    fn mutually_top_pair_blocks_single_matching() {
        let m = NtuMarket {
            alpha: vec![vec![rat("5")]],
            alpha0: vec![rat("0")],
            gamma: vec![vec![rat("5")]],
            gamma0: vec![rat("0")],
        };
        let mut mu = BTreeMap::new();
        mu.insert((Some(0), None), Rat::one());
        mu.insert((None, Some(0)), Rat::one());
        let matching = Matching {
            mu,
            wages: BTreeMap::new(),
        };
        assert!(!check_stability_ntu(&m, &matching).unwrap().holds);
    }

    #[test]
    fn ntu_strict_preferences_enforced() {
        let m = NtuMarket {
            alpha: vec![vec![rat("1"), rat("1")]],
            alpha0: vec![rat("0")],
            gamma: vec![vec![rat("1"), rat("2")]],
            gamma0: vec![rat("0"), rat("0")],
        };
        assert!(matches!(
            m.validate(),
            Err(MarketError::StrictPreferences(_))
        ));
    }

    #[test]
    fn ntu_m0_on_one_by_one() {
        let m = NtuMarket {
            alpha: vec![vec![rat("2")]],
            alpha0: vec![rat("0")],
            gamma: vec![vec![rat("3")]],
            gamma0: vec![rat("1")],
        };
        let grid = PriceGrid::new(
            m.candidate_levels(0)
                .into_iter()
                .map(|v| Point::new(vec![v])),
        );
        let report = ntu_m0_check(&m, &grid).unwrap();
        assert!(report.wgs.holds);
        assert!(report.monotone_total_output.holds);
        assert!(report.is_m0_function);
    }

    fn small_hedonic() -> HedonicMarket {
        let mut pi = BTreeMap::new();
        pi.insert(
            (0, 0),
            MonotoneMap::Affine {
                slope: rat("1"),
                intercept: rat("-1"),
            },
        );
        let mut s = BTreeMap::new();
        s.insert(
            (0, 0),
            MonotoneMap::Affine {
                slope: rat("-1"),
                intercept: rat("4"),
            },
        );
        HedonicMarket {
            producers: vec![("a".into(), 1)],
            consumers: vec![("b".into(), 1)],
            qualities: vec!["w".into()],
            pi,
            s,
        }
    }

    #[test]
    fn hedonic_reduction_solves_additively() {
        let m = small_hedonic();
        let (prob, node_map) = hedonic_to_flow(&m).unwrap();
        // Path x -> w -> y plus the two reservation arcs through 0.
        assert_eq!(prob.network.num_nodes(), 4);
        assert_eq!(prob.network.num_arcs(), 4);
        let out = solve_additive(&prob).unwrap();
        assert!(verify_equilibrium(&prob, &out, &Rat::zero()).unwrap().holds);
        // Normalize the reservation price to zero (additive networks are
        // shift-invariant).
        let shift = out.p[node_map.reservation()].clone();
        let p: Vec<Rat> = out.p.iter().map(|v| v - &shift).collect();
        let out = FlowOutcome {
            q: out.q,
            mu: out.mu,
            p,
        };
        let alloc = HedonicAllocation::from_flow(&m, &out);
        let pw = vec![out.p[node_map.quality(0)].clone()];
        let verdict = verify_hedonic(&m, &pw, &alloc, &Rat::zero()).unwrap();
        assert!(verdict.holds, "{:?}", verdict.violations);
        assert_eq!(alloc.produce.get(&(0, 0)), Some(&Rat::one()));
    }

    #[test]
    fn inactive_hedonic_market_is_an_equilibrium() {
        let mut m = small_hedonic();
        // Make both sides lose at any price: pi <= 0 and s <= 0 at p = 2.
        m.pi.insert(
            (0, 0),
            MonotoneMap::Affine {
                slope: rat("1"),
                intercept: rat("-5"),
            },
        );
        m.s.insert(
            (0, 0),
            MonotoneMap::Affine {
                slope: rat("-1"),
                intercept: rat("-1"),
            },
        );
        let alloc = HedonicAllocation {
            producer_out: BTreeMap::from([(0, Rat::one())]),
            consumer_out: BTreeMap::from([(0, Rat::one())]),
            ..Default::default()
        };
        let verdict = verify_hedonic(&m, &[rat("2")], &alloc, &Rat::zero()).unwrap();
        assert!(verdict.holds, "{:?}", verdict.violations);
    }

    #[test]
    fn perturbed_price_breaks_hedonic_equality() {
        let m = small_hedonic();
        let (prob, node_map) = hedonic_to_flow(&m).unwrap();
        let out = solve_additive(&prob).unwrap();
        let shift = out.p[node_map.reservation()].clone();
        let p: Vec<Rat> = out.p.iter().map(|v| v - &shift).collect();
        let alloc = HedonicAllocation::from_flow(
            &m,
            &FlowOutcome {
                q: out.q.clone(),
                mu: out.mu.clone(),
                p: p.clone(),
            },
        );
        let good = vec![p[node_map.quality(0)].clone()];
        assert!(verify_hedonic(&m, &good, &alloc, &Rat::zero()).unwrap().holds);
        // Push the traded quality's price past the consumer's outside
        // option: the surplus equality in (iii) breaks.
        let bumped = vec![&good[0] + &rat("4")];
        let verdict = verify_hedonic(&m, &bumped, &alloc, &Rat::zero()).unwrap();
        assert!(!verdict.holds);
        assert!(verdict.violations.iter().any(|v| v.contains("surplus")));
    }

    #[test]
    fn closure_report_flags_failures() {
        let points: BTreeSet<Point> = [
            Point::from_ints(&[0, 1]),
            Point::from_ints(&[1, 0]),
        ]
        .into_iter()
        .collect();
        let ok = meet_join_closure(&points, |_| true);
        assert!(ok.holds);
        let bad = meet_join_closure(&points, |p| *p != Point::from_ints(&[1, 1]));
        assert!(!bad.holds);
        assert_eq!(bad.failures.len(), 1);
    }
}
