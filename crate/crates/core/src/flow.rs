//! Equilibrium flow on networks with increasing connection functions:
//! verification against the three equilibrium conditions, the additive
//! min-cost-flow solver with dual prices, the nonadditive latest-departure
//! solver, the equilibrium-correspondence sampler, and a damped
//! price-adjustment solver for the general case.

use crate::corr::FiniteCorrespondence;
use crate::lp::{Cmp, LinearProgram, LpResult};
use crate::point::{Point, PriceGrid};
use crate::pwl::{PiecewiseLinear, PwlError};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(String, String),
    #[error("affine connection slope must be strictly positive")]
    NonPositiveSlope,
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error("exiting flows must sum to zero, got {0}")]
    Unbalanced(Rat),
    #[error("negative internal flow on arc {0} -> {1}")]
    NegativeFlow(String, String),
    #[error("negative-cost cycle reachable in the additive network")]
    NegativeCycle,
    #[error("solver requires an all-additive network")]
    NotAdditive,
    #[error("no feasible flow routes the required balance")]
    Infeasible,
    #[error("connection on arc {0} -> {1} does not make strict progress at {2}")]
    NonProgress(String, String, Rat),
    #[error("destination `{0}` unreachable from `{1}`")]
    NoPath(String, String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("every grid price violates the no-positive-rent condition")]
    EmptyRetainedGrid,
    #[error("negative tolerance")]
    NegativeTolerance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConnectionKind {
    /// `G(p) = p - c`.
    Additive { c: Rat },
    /// `G(p) = a p + b`, `a > 0`.
    Affine { a: Rat, b: Rat },
    /// Strictly increasing piecewise-linear interpolation.
    Tabulated { points: Vec<(Rat, Rat)> },
}

/// Per-arc break-even price map; strictly increasing in the downstream
/// price. `strict_progress` marks arcs meant for latest-departure use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionFunction {
    #[serde(flatten)]
    pub kind: ConnectionKind,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict_progress: bool,
}

impl ConnectionFunction {
    pub fn additive(c: Rat) -> Self {
        ConnectionFunction {
            kind: ConnectionKind::Additive { c },
            strict_progress: false,
        }
    }

    pub fn affine(a: Rat, b: Rat) -> Self {
        ConnectionFunction {
            kind: ConnectionKind::Affine { a, b },
            strict_progress: false,
        }
    }

    pub fn tabulated(points: Vec<(Rat, Rat)>) -> Result<Self, FlowError> {
        let pwl = PiecewiseLinear::new(points)?;
        if !pwl.is_increasing() {
            return Err(FlowError::Pwl(PwlError::NonMonotoneValue));
        }
        Ok(ConnectionFunction {
            kind: ConnectionKind::Tabulated {
                points: pwl.points().to_vec(),
            },
            strict_progress: false,
        })
    }

    pub fn from_pwl(pwl: &PiecewiseLinear) -> Result<Self, FlowError> {
        Self::tabulated(pwl.points().to_vec())
    }

    fn validate(&self) -> Result<(), FlowError> {
        match &self.kind {
            ConnectionKind::Additive { .. } => Ok(()),
            ConnectionKind::Affine { a, .. } => {
                if a.is_positive() {
                    Ok(())
                } else {
                    Err(FlowError::NonPositiveSlope)
                }
            }
            ConnectionKind::Tabulated { points } => {
                let pwl = PiecewiseLinear::new(points.clone())?;
                if pwl.is_increasing() {
                    Ok(())
                } else {
                    Err(FlowError::Pwl(PwlError::NonMonotoneValue))
                }
            }
        }
    }

    pub fn eval(&self, p_y: &Rat) -> Result<Rat, FlowError> {
        match &self.kind {
            ConnectionKind::Additive { c } => Ok(p_y - c),
            ConnectionKind::Affine { a, b } => Ok(a * p_y + b.clone()),
            ConnectionKind::Tabulated { points } => {
                let pwl = PiecewiseLinear::new(points.clone())?;
                Ok(pwl.eval(p_y)?)
            }
        }
    }

    /// Inverse of the (strictly increasing) connection.
    pub fn inverse_eval(&self, p_x: &Rat) -> Result<Rat, FlowError> {
        match &self.kind {
            ConnectionKind::Additive { c } => Ok(p_x + c),
            ConnectionKind::Affine { a, b } => Ok(&(p_x - b) / a),
            ConnectionKind::Tabulated { points } => {
                let pwl = PiecewiseLinear::new(points.clone())?;
                Ok(pwl.inverse_eval(p_x)?)
            }
        }
    }

    fn eval_f64(&self, p_y: f64) -> f64 {
        match &self.kind {
            ConnectionKind::Additive { c } => p_y - c.to_f64(),
            ConnectionKind::Affine { a, b } => a.to_f64() * p_y + b.to_f64(),
            ConnectionKind::Tabulated { points } => {
                // Clamped linear extension keeps the float solver total.
                let first = &points[0];
                let last = points.last().unwrap();
                let x = p_y;
                if x <= first.0.to_f64() {
                    return first.1.to_f64();
                }
                if x >= last.0.to_f64() {
                    return last.1.to_f64();
                }
                for w in points.windows(2) {
                    let (x0, y0) = (w[0].0.to_f64(), w[0].1.to_f64());
                    let (x1, y1) = (w[1].0.to_f64(), w[1].1.to_f64());
                    if x <= x1 {
                        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
                    }
                }
                last.1.to_f64()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub connection: ConnectionFunction,
}

/// Directed network with no self-loops and at most one arc per ordered pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    nodes: Vec<String>,
    arcs: Vec<Arc>,
}

impl Network {
    pub fn new(nodes: Vec<String>, arcs: Vec<Arc>) -> Result<Self, FlowError> {
        let mut seen = BTreeSet::new();
        for arc in &arcs {
            if arc.from >= nodes.len() {
                return Err(FlowError::UnknownNode(format!("#{}", arc.from)));
            }
            if arc.to >= nodes.len() {
                return Err(FlowError::UnknownNode(format!("#{}", arc.to)));
            }
            if arc.from == arc.to {
                return Err(FlowError::SelfLoop(nodes[arc.from].clone()));
            }
            if !seen.insert((arc.from, arc.to)) {
                return Err(FlowError::DuplicateArc(
                    nodes[arc.from].clone(),
                    nodes[arc.to].clone(),
                ));
            }
            arc.connection.validate()?;
        }
        Ok(Network { nodes, arcs })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// All-additive cost view, when available; unit-slope affine arcs count
    /// as additive with cost `-b`.
    pub fn additive_costs(&self) -> Option<Vec<Rat>> {
        self.arcs
            .iter()
            .map(|a| match &a.connection.kind {
                ConnectionKind::Additive { c } => Some(c.clone()),
                ConnectionKind::Affine { a, b } if *a == Rat::one() => Some(-b),
                _ => None,
            })
            .collect()
    }
}

/// Arc-node incidence matrix: +1 at the head, -1 at the tail.
pub fn incidence(net: &Network) -> Vec<Vec<i32>> {
    let mut m = vec![vec![0; net.num_nodes()]; net.num_arcs()];
    for (a, arc) in net.arcs.iter().enumerate() {
        m[a][arc.to] = 1;
        m[a][arc.from] = -1;
    }
    m
}

/// `(incidence)^T mu`: net inflow per node.
pub fn divergence(net: &Network, mu: &[Rat]) -> Vec<Rat> {
    let mut q = vec![Rat::zero(); net.num_nodes()];
    for (a, arc) in net.arcs.iter().enumerate() {
        q[arc.to] += &mu[a];
        q[arc.from] -= &mu[a];
    }
    q
}

#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub network: Network,
    pub q: Vec<Rat>,
}

impl FlowProblem {
    pub fn new(network: Network, q: Vec<Rat>) -> Result<Self, FlowError> {
        if q.len() != network.num_nodes() {
            return Err(FlowError::Dimension {
                expected: network.num_nodes(),
                found: q.len(),
            });
        }
        Ok(FlowProblem { network, q })
    }
}

// File schema: arcs reference nodes by name and carry the connection under
// "g"; exiting flows are keyed by node name and default to zero.

#[derive(Serialize, Deserialize)]
struct ArcFile {
    from: String,
    to: String,
    g: ConnectionFunction,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    nodes: Vec<String>,
    arcs: Vec<ArcFile>,
    #[serde(default)]
    q: BTreeMap<String, Rat>,
}

impl Serialize for FlowProblem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let file = NetworkFile {
            nodes: self.network.nodes.clone(),
            arcs: self
                .network
                .arcs
                .iter()
                .map(|a| ArcFile {
                    from: self.network.nodes[a.from].clone(),
                    to: self.network.nodes[a.to].clone(),
                    g: a.connection.clone(),
                })
                .collect(),
            q: self
                .network
                .nodes
                .iter()
                .cloned()
                .zip(self.q.iter().cloned())
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        };
        file.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FlowProblem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = NetworkFile::deserialize(deserializer)?;
        let index = |name: &str| {
            file.nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown node `{name}`")))
        };
        let mut arcs = Vec::with_capacity(file.arcs.len());
        for a in &file.arcs {
            arcs.push(Arc {
                from: index(&a.from)?,
                to: index(&a.to)?,
                connection: a.g.clone(),
            });
        }
        let mut q = vec![Rat::zero(); file.nodes.len()];
        for (name, v) in &file.q {
            let i = index(name)?;
            q[i] = v.clone();
        }
        let network =
            Network::new(file.nodes, arcs).map_err(serde::de::Error::custom)?;
        FlowProblem::new(network, q).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowOutcome {
    pub q: Vec<Rat>,
    pub mu: Vec<Rat>,
    pub p: Vec<Rat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowViolation {
    MassBalance { node: String, residual: Rat },
    Rent { from: String, to: String, residual: Rat },
    Slackness { from: String, to: String, residual: Rat },
}

/// Per-condition residual report for Definition of equilibrium flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowVerdict {
    pub holds: bool,
    pub violations: Vec<FlowViolation>,
}

pub fn verify_equilibrium(
    prob: &FlowProblem,
    out: &FlowOutcome,
    eps: &Rat,
) -> Result<FlowVerdict, FlowError> {
    if eps.is_negative() {
        return Err(FlowError::NegativeTolerance);
    }
    let net = &prob.network;
    if out.mu.len() != net.num_arcs()
        || out.p.len() != net.num_nodes()
        || out.q.len() != net.num_nodes()
    {
        return Err(FlowError::Dimension {
            expected: net.num_arcs(),
            found: out.mu.len(),
        });
    }
    for (a, arc) in net.arcs.iter().enumerate() {
        if out.mu[a].is_negative() {
            return Err(FlowError::NegativeFlow(
                net.nodes[arc.from].clone(),
                net.nodes[arc.to].clone(),
            ));
        }
    }
    let mut violations = Vec::new();
    // (i) mass balance.
    let div = divergence(net, &out.mu);
    for (z, (have, want)) in div.iter().zip(&out.q).enumerate() {
        let residual = have - want;
        if residual.abs() > *eps {
            violations.push(FlowViolation::MassBalance {
                node: net.nodes[z].clone(),
                residual,
            });
        }
    }
    // (ii) no positive rent, (iii) complementary slackness.
    for (a, arc) in net.arcs.iter().enumerate() {
        let g = arc.connection.eval(&out.p[arc.to])?;
        let gap = &out.p[arc.from] - &g;
        if gap < -eps.clone() {
            violations.push(FlowViolation::Rent {
                from: net.nodes[arc.from].clone(),
                to: net.nodes[arc.to].clone(),
                residual: gap.clone(),
            });
        }
        let slack = &out.mu[a] * &gap;
        if slack > *eps {
            violations.push(FlowViolation::Slackness {
                from: net.nodes[arc.from].clone(),
                to: net.nodes[arc.to].clone(),
                residual: slack,
            });
        }
    }
    Ok(FlowVerdict {
        holds: violations.is_empty(),
        violations,
    })
}

/// Successive shortest paths with node potentials; returns internal flows
/// and dual prices that verify exactly (`eps = 0`).
pub fn solve_additive(prob: &FlowProblem) -> Result<FlowOutcome, FlowError> {
    let net = &prob.network;
    let costs = net.additive_costs().ok_or(FlowError::NotAdditive)?;
    let n = net.num_nodes();
    let m = net.num_arcs();
    let total: Rat = prob.q.iter().sum();
    if !total.is_zero() {
        return Err(FlowError::Unbalanced(total));
    }

    // Bellman-Ford from a virtual source: initial feasible potentials and
    // negative-cycle rejection.
    let mut pot = vec![Rat::zero(); n];
    for round in 0..=n {
        let mut changed = false;
        for (a, arc) in net.arcs.iter().enumerate() {
            let cand = &pot[arc.from] + &costs[a];
            if cand < pot[arc.to] {
                pot[arc.to] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if round == n {
            return Err(FlowError::NegativeCycle);
        }
    }

    // b > 0: must ship out; b < 0: must receive.
    let mut b: Vec<Rat> = prob.q.iter().map(|qz| -qz).collect();
    let mut mu = vec![Rat::zero(); m];
    let infinite: Option<Rat> = None;

    loop {
        let s = match (0..n).find(|&z| b[z].is_positive()) {
            Some(s) => s,
            None => break,
        };
        // Dijkstra over the residual graph with reduced costs.
        let mut dist: Vec<Option<Rat>> = vec![infinite.clone(); n];
        let mut prev: Vec<Option<(usize, bool)>> = vec![None; n]; // (arc, forward)
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[s] = Some(Rat::zero());
        heap.push(Reverse((Rat::zero(), s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for (a, arc) in net.arcs.iter().enumerate() {
                if arc.from == u {
                    let red = &costs[a] + &pot[arc.from] - &pot[arc.to];
                    debug_assert!(!red.is_negative());
                    let nd = &d + &red;
                    if dist[arc.to].as_ref().map_or(true, |old| nd < *old) {
                        dist[arc.to] = Some(nd.clone());
                        prev[arc.to] = Some((a, true));
                        heap.push(Reverse((nd, arc.to)));
                    }
                } else if arc.to == u && mu[a].is_positive() {
                    let red = &pot[arc.to] - &pot[arc.from] - &costs[a];
                    debug_assert!(!red.is_negative());
                    let nd = &d + &red;
                    if dist[arc.from].as_ref().map_or(true, |old| nd < *old) {
                        dist[arc.from] = Some(nd.clone());
                        prev[arc.from] = Some((a, false));
                        heap.push(Reverse((nd, arc.from)));
                    }
                }
            }
        }
        let t = (0..n)
            .filter(|&z| b[z].is_negative() && dist[z].is_some())
            .min_by_key(|&z| (dist[z].clone().unwrap(), z))
            .ok_or(FlowError::Infeasible)?;
        let dt = dist[t].clone().unwrap();
        for z in 0..n {
            let shift = match &dist[z] {
                Some(d) if *d < dt => d.clone(),
                _ => dt.clone(),
            };
            pot[z] += shift;
        }
        // Amount: bounded by supply, demand, and backward residuals.
        let mut amount = b[s].clone().min(-b[t].clone());
        let mut z = t;
        while z != s {
            let (a, forward) = prev[z].expect("path back to source");
            if !forward {
                amount = amount.min(mu[a].clone());
            }
            z = if forward { net.arcs[a].from } else { net.arcs[a].to };
        }
        let mut z = t;
        while z != s {
            let (a, forward) = prev[z].expect("path back to source");
            if forward {
                mu[a] += &amount;
                z = net.arcs[a].from;
            } else {
                mu[a] -= &amount;
                z = net.arcs[a].to;
            }
        }
        b[s] -= &amount;
        b[t] += &amount;
    }

    Ok(FlowOutcome {
        q: prob.q.clone(),
        mu,
        p: pot,
    })
}

/// Total additive cost of a flow.
pub fn flow_cost(net: &Network, mu: &[Rat]) -> Option<Rat> {
    let costs = net.additive_costs()?;
    Some(mu.iter().zip(&costs).map(|(m, c)| m * c).sum())
}

#[derive(Debug, Clone)]
pub struct LatestDeparture {
    /// Latest consistent passage time per node; `None` when the destination
    /// cannot be reached.
    pub prices: Vec<Option<Rat>>,
    /// Tight outgoing arc chosen at each priced non-destination node.
    pub successor: Vec<Option<usize>>,
}

impl LatestDeparture {
    /// Node path from `origin` to the destination along tight arcs.
    pub fn path(&self, net: &Network, origin: usize) -> Option<Vec<usize>> {
        self.prices[origin].as_ref()?;
        let mut path = vec![origin];
        let mut cur = origin;
        while let Some(a) = self.successor[cur] {
            cur = net.arcs()[a].to;
            path.push(cur);
            if path.len() > net.num_nodes() {
                return None;
            }
        }
        Some(path)
    }
}

/// Bellman-style fixed point of `p_x = max_{xy} G_xy(p_y)`, seeded at the
/// destination. Every connection must make strict progress on the values it
/// is evaluated at.
pub fn solve_latest_departure(
    net: &Network,
    destination: usize,
    p_d: Rat,
) -> Result<LatestDeparture, FlowError> {
    let n = net.num_nodes();
    if destination >= n {
        return Err(FlowError::UnknownNode(format!("#{destination}")));
    }
    let mut prices: Vec<Option<Rat>> = vec![None; n];
    let mut successor: Vec<Option<usize>> = vec![None; n];
    prices[destination] = Some(p_d);

    for round in 0..=n {
        let mut changed = false;
        for (a, arc) in net.arcs().iter().enumerate() {
            if arc.from == destination {
                continue;
            }
            let Some(py) = prices[arc.to].clone() else {
                continue;
            };
            let g = arc.connection.eval(&py)?;
            if g >= py {
                return Err(FlowError::NonProgress(
                    net.nodes[arc.from].clone(),
                    net.nodes[arc.to].clone(),
                    py,
                ));
            }
            if prices[arc.from].as_ref().map_or(true, |cur| g > *cur) {
                prices[arc.from] = Some(g);
                successor[arc.from] = Some(a);
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if round == n {
            return Err(FlowError::NonProgress(
                "cycle".into(),
                "cycle".into(),
                Rat::zero(),
            ));
        }
    }
    Ok(LatestDeparture { prices, successor })
}

#[derive(Debug, Clone)]
pub struct SampledCorrespondence {
    pub corr: FiniteCorrespondence,
    pub retained: usize,
    pub filtered: usize,
}

/// Equilibrium flow correspondence truncated to integer flows `0..=cap` on
/// the exactly tight arcs of each retained grid price.
pub fn sample_equilibrium_correspondence(
    net: &Network,
    grid: &PriceGrid,
    cap: u32,
) -> Result<SampledCorrespondence, FlowError> {
    let n = net.num_nodes();
    match grid.dim() {
        Some(d) if d == n => {}
        other => {
            return Err(FlowError::Dimension {
                expected: n,
                found: other.unwrap_or(0),
            })
        }
    }
    let mut map: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
    let mut filtered = 0;
    'grid: for p in grid.iter() {
        let mut tight = Vec::new();
        for (a, arc) in net.arcs().iter().enumerate() {
            let g = arc.connection.eval(p.get(arc.to))?;
            let px = p.get(arc.from);
            if *px < g {
                filtered += 1;
                continue 'grid;
            }
            if *px == g {
                tight.push(a);
            }
        }
        let mut images = BTreeSet::new();
        let mut levels = vec![0u32; tight.len()];
        loop {
            let mut mu = vec![Rat::zero(); net.num_arcs()];
            for (i, &a) in tight.iter().enumerate() {
                mu[a] = Rat::int(levels[i] as i64);
            }
            images.insert(Point::new(divergence(net, &mu)));
            // Odometer over {0..cap}^tight.
            let mut i = 0;
            loop {
                if i == levels.len() {
                    break;
                }
                if levels[i] < cap {
                    levels[i] += 1;
                    break;
                }
                levels[i] = 0;
                i += 1;
            }
            if i == levels.len() {
                break;
            }
        }
        map.insert(p.clone(), images);
    }
    if map.is_empty() {
        return Err(FlowError::EmptyRetainedGrid);
    }
    let retained = map.len();
    let corr = FiniteCorrespondence::from_parts_unchecked(n, map);
    Ok(SampledCorrespondence {
        corr,
        retained,
        filtered,
    })
}

#[derive(Debug, Clone)]
pub struct GeneralOpts {
    pub damping: f64,
    pub max_iter: usize,
    pub eps: f64,
    /// Nodes whose price is pinned (e.g. a numeraire normalization).
    pub fixed_nodes: Vec<usize>,
    pub initial: Option<Vec<f64>>,
}

impl Default for GeneralOpts {
    fn default() -> Self {
        GeneralOpts {
            damping: 0.5,
            max_iter: 400,
            eps: 1e-9,
            fixed_nodes: Vec::new(),
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum GeneralOutcome {
    Converged {
        outcome: FlowOutcome,
        iterations: usize,
    },
    /// Budget exhausted; inconclusive, never a nonexistence claim.
    Exhausted {
        residual_trace: Vec<f64>,
        last_prices: Vec<f64>,
    },
}

fn quantize(x: f64) -> Rat {
    let scaled = (x * 1e12).round();
    Rat::from_big(num_rational::BigRational::new(
        num_bigint::BigInt::from(scaled as i128),
        num_bigint::BigInt::from(1_000_000_000_000i64),
    ))
}

/// Recover flows supported on the eps-tight arcs minimizing total imbalance.
fn recover_flows(
    net: &Network,
    q: &[Rat],
    p: &[Rat],
    tight_tol: &Rat,
) -> Result<(Vec<Rat>, Vec<Rat>), FlowError> {
    let n = net.num_nodes();
    let mut tight = Vec::new();
    for (a, arc) in net.arcs().iter().enumerate() {
        let g = arc.connection.eval(&p[arc.to])?;
        let gap = &p[arc.from] - &g;
        if gap.abs() <= *tight_tol {
            tight.push(a);
        }
    }
    // Variables: mu on tight arcs, then s+ and s- per node.
    let nt = tight.len();
    let mut lp = LinearProgram::new(nt + 2 * n);
    for z in 0..n {
        let mut row = vec![Rat::zero(); nt + 2 * n];
        for (i, &a) in tight.iter().enumerate() {
            let arc = &net.arcs()[a];
            if arc.to == z {
                row[i] = Rat::one();
            } else if arc.from == z {
                row[i] = -Rat::one();
            }
        }
        row[nt + z] = Rat::one();
        row[nt + n + z] = -Rat::one();
        lp.constraint(row, Cmp::Eq, q[z].clone());
    }
    let mut c = vec![Rat::zero(); nt + 2 * n];
    for item in c.iter_mut().skip(nt) {
        *item = Rat::one();
    }
    lp.minimize(c);
    match lp.solve() {
        LpResult::Optimal { x, .. } => {
            let mut mu = vec![Rat::zero(); net.num_arcs()];
            for (i, &a) in tight.iter().enumerate() {
                mu[a] = x[i].clone();
            }
            let div = divergence(net, &mu);
            let excess: Vec<Rat> = div.iter().zip(q).map(|(d, qz)| d - qz).collect();
            Ok((mu, excess))
        }
        _ => Err(FlowError::Infeasible),
    }
}

/// Damped coordinatewise price adjustment: raise prices where inflow falls
/// short of the required exiting flows, lower them where it overshoots, and
/// keep the no-positive-rent condition by projection. Inconclusive on
/// budget exhaustion.
pub fn solve_general(prob: &FlowProblem, opts: &GeneralOpts) -> Result<GeneralOutcome, FlowError> {
    let net = &prob.network;
    let n = net.num_nodes();
    let mut p: Vec<f64> = opts.initial.clone().unwrap_or_else(|| vec![0.0; n]);
    if p.len() != n {
        return Err(FlowError::Dimension {
            expected: n,
            found: p.len(),
        });
    }
    let pinned: BTreeSet<usize> = opts.fixed_nodes.iter().copied().collect();
    let mut trace = Vec::new();
    let mut damping = opts.damping;
    let mut best = f64::INFINITY;
    let mut stale = 0usize;

    let total_demand: f64 = prob
        .q
        .iter()
        .map(|v| v.to_f64().abs())
        .sum::<f64>()
        .max(1.0);
    let tight_tol = opts.eps / (2.0 * total_demand);

    for iter in 0..opts.max_iter {
        // Projection: push prices up to the break-even requirement; pinned
        // nodes instead push the offending downstream price down.
        for _ in 0..(2 * n + 4) {
            let mut moved = false;
            for (_, arc) in net.arcs().iter().enumerate() {
                let g = arc.connection.eval_f64(p[arc.to]);
                if p[arc.from] < g - tight_tol / 4.0 {
                    if !pinned.contains(&arc.from) {
                        p[arc.from] = g;
                        moved = true;
                    } else if !pinned.contains(&arc.to) {
                        // Invert: choose p_to with G(p_to) = p_from.
                        let target = quantize(p[arc.from]);
                        if let Ok(inv) = arc.connection.inverse_eval(&target) {
                            p[arc.to] = inv.to_f64();
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                break;
            }
        }

        let p_rat: Vec<Rat> = p.iter().map(|&x| quantize(x)).collect();
        let (mu, excess) = recover_flows(net, &prob.q, &p_rat, &quantize(tight_tol))?;
        let imbalance: f64 = excess.iter().map(|e| e.to_f64().abs()).sum();
        trace.push(imbalance);

        if imbalance <= opts.eps / 2.0 {
            let outcome = FlowOutcome {
                q: prob.q.clone(),
                mu,
                p: p_rat.clone(),
            };
            let verdict = verify_equilibrium(prob, &outcome, &quantize(opts.eps))?;
            if verdict.holds {
                return Ok(GeneralOutcome::Converged {
                    outcome,
                    iterations: iter + 1,
                });
            }
        }

        if imbalance + 1e-15 < best {
            best = imbalance;
            stale = 0;
        } else {
            stale += 1;
            if stale >= 25 {
                damping *= 0.5;
                stale = 0;
            }
        }

        for z in 0..n {
            if pinned.contains(&z) {
                continue;
            }
            p[z] -= damping * excess[z].to_f64();
        }
    }
    Ok(GeneralOutcome::Exhausted {
        residual_trace: trace,
        last_prices: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn additive_net(nodes: &[&str], arcs: &[(&str, &str, i64)]) -> Network {
        let names: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        let arcs = arcs
            .iter()
            .map(|(f, t, c)| Arc {
                from: names.iter().position(|n| n == f).unwrap(),
                to: names.iter().position(|n| n == t).unwrap(),
                connection: ConnectionFunction::additive(Rat::int(*c)),
            })
            .collect();
        Network::new(names, arcs).unwrap()
    }

    #[test]
    fn incidence_matches_definition() {
        let net = additive_net(&["a", "b", "c"], &[("a", "b", 1), ("b", "c", 1), ("c", "a", 1)]);
        let m = incidence(&net);
        assert_eq!(m[0], vec![-1, 1, 0]);
        for row in &m {
            assert_eq!(row.iter().sum::<i32>(), 0);
        }
        // Path flow telescopes.
        let path = additive_net(&["a", "b", "c"], &[("a", "b", 0), ("b", "c", 0)]);
        let q = divergence(&path, &[Rat::one(), Rat::one()]);
        assert_eq!(q, vec![Rat::int(-1), Rat::zero(), Rat::int(1)]);
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let nodes = vec!["a".to_string(), "b".to_string()];
        let loop_arc = Arc {
            from: 0,
            to: 0,
            connection: ConnectionFunction::additive(Rat::zero()),
        };
        assert!(matches!(
            Network::new(nodes.clone(), vec![loop_arc]),
            Err(FlowError::SelfLoop(_))
        ));
        let dup = Arc {
            from: 0,
            to: 1,
            connection: ConnectionFunction::additive(Rat::zero()),
        };
        assert!(matches!(
            Network::new(nodes, vec![dup.clone(), dup]),
            Err(FlowError::DuplicateArc(..))
        ));
    }

    #[test]
    fn connection_evaluation() {
        let add = ConnectionFunction::additive(Rat::int(2));
        assert_eq!(add.eval(&Rat::int(5)).unwrap(), Rat::int(3));
        assert_eq!(add.inverse_eval(&Rat::int(3)).unwrap(), Rat::int(5));

        let id = ConnectionFunction::affine(Rat::one(), Rat::zero());
        assert_eq!(id.eval(&rat("7/3")).unwrap(), rat("7/3"));
        assert_eq!(id.inverse_eval(&rat("7/3")).unwrap(), rat("7/3"));

        let tab =
            ConnectionFunction::tabulated(vec![(rat("0"), rat("0")), (rat("2"), rat("1"))])
                .unwrap();
        assert_eq!(tab.eval(&rat("1")).unwrap(), rat("1/2"));
        assert!(tab.eval(&rat("5")).is_err());
    }

    #[test]
    fn zero_flow_verifies_when_rents_are_nonpositive() {
        let net = additive_net(&["a", "b"], &[("a", "b", 1)]);
        let prob = FlowProblem::new(net, vec![Rat::zero(), Rat::zero()]).unwrap();
        let out = FlowOutcome {
            q: vec![Rat::zero(), Rat::zero()],
            mu: vec![Rat::zero()],
            p: vec![Rat::zero(), Rat::zero()],
        };
        assert!(verify_equilibrium(&prob, &out, &Rat::zero()).unwrap().holds);
    }

    #[test]
    fn scaling_preserves_equilibrium() {
        let net = additive_net(&["a", "b"], &[("a", "b", 1)]);
        let base = FlowOutcome {
            q: vec![Rat::int(-1), Rat::int(1)],
            mu: vec![Rat::one()],
            p: vec![Rat::zero(), Rat::one()],
        };
        for lambda in [rat("0"), rat("1"), rat("7/2")] {
            let scaled = FlowOutcome {
                q: base.q.iter().map(|v| v * &lambda).collect(),
                mu: base.mu.iter().map(|v| v * &lambda).collect(),
                p: base.p.clone(),
            };
            let prob =
                FlowProblem::new(net.clone(), scaled.q.clone()).unwrap();
            assert!(verify_equilibrium(&prob, &scaled, &Rat::zero()).unwrap().holds);
        }
    }

    #[test]
    fn single_arc_additive_solve() {
        let net = additive_net(&["a", "b"], &[("a", "b", 1)]);
        let prob = FlowProblem::new(net, vec![Rat::int(-1), Rat::int(1)]).unwrap();
        let out = solve_additive(&prob).unwrap();
        assert_eq!(out.mu, vec![Rat::one()]);
        assert_eq!(&out.p[1] - &out.p[0], Rat::one());
        assert!(verify_equilibrium(&prob, &out, &Rat::zero()).unwrap().holds);
    }

    #[test]
    fn parallel_paths_use_the_cheap_one() {
        let net = additive_net(
            &["s", "m", "t"],
            &[("s", "m", 0), ("m", "t", 1), ("s", "t", 3)],
        );
        let prob = FlowProblem::new(net.clone(), vec![Rat::int(-1), Rat::zero(), Rat::int(1)])
            .unwrap();
        let out = solve_additive(&prob).unwrap();
        assert_eq!(flow_cost(&net, &out.mu).unwrap(), Rat::one());
        assert_eq!(out.mu[2], Rat::zero());
        assert_eq!(&out.p[2] - &out.p[0], Rat::one());
        assert!(verify_equilibrium(&prob, &out, &Rat::zero()).unwrap().holds);
    }

    #[test]
    fn rejects_negative_cycles_and_imbalance() {
        let net = additive_net(&["a", "b"], &[("a", "b", -2), ("b", "a", 1)]);
        let prob = FlowProblem::new(net, vec![Rat::zero(), Rat::zero()]).unwrap();
        assert!(matches!(solve_additive(&prob), Err(FlowError::NegativeCycle)));

        let net = additive_net(&["a", "b"], &[("a", "b", 1)]);
        let prob = FlowProblem::new(net, vec![Rat::one(), Rat::one()]).unwrap();
        assert!(matches!(solve_additive(&prob), Err(FlowError::Unbalanced(_))));
    }

    #[test]
    fn infeasible_when_sink_unreachable() {
        let net = additive_net(&["a", "b"], &[("b", "a", 1)]);
        let prob = FlowProblem::new(net, vec![Rat::int(-1), Rat::int(1)]).unwrap();
        assert!(matches!(solve_additive(&prob), Err(FlowError::Infeasible)));
    }

    #[test]
    fn latest_departure_chain() {
        let net = additive_net(&["o", "m", "d"], &[("o", "m", 1), ("m", "d", 2)]);
        let d = net.node_index("d").unwrap();
        let res = solve_latest_departure(&net, d, Rat::int(10)).unwrap();
        assert_eq!(res.prices[1], Some(Rat::int(8)));
        assert_eq!(res.prices[0], Some(Rat::int(7)));
        assert_eq!(res.path(&net, 0).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn latest_departure_rejects_nonprogress() {
        let net = additive_net(&["o", "d"], &[("o", "d", 0)]);
        assert!(matches!(
            solve_latest_departure(&net, 1, Rat::int(5)),
            Err(FlowError::NonProgress(..))
        ));
    }

    #[test]
    fn sampler_counts_tight_arcs() {
        let net = additive_net(&["a", "b"], &[("a", "b", 1)]);
        // p = (0,1): tight. p = (5,0): slack. p = (0,5): violates (ii).
        let grid = PriceGrid::new([
            Point::from_ints(&[0, 1]),
            Point::from_ints(&[5, 0]),
            Point::from_ints(&[5, 1]),
            Point::from_ints(&[0, 0]),
        ]);
        let sampled = sample_equilibrium_correspondence(&net, &grid, 1).unwrap();
        assert_eq!(sampled.retained, 4);
        let tight_image = sampled.corr.image(&Point::from_ints(&[0, 1])).unwrap();
        assert_eq!(tight_image.len(), 2);
        assert!(tight_image.contains(&Point::from_ints(&[-1, 1])));
        let slack_image = sampled.corr.image(&Point::from_ints(&[5, 0])).unwrap();
        assert_eq!(slack_image.len(), 1);
    }

    #[test]
    fn general_solver_handles_zero_demand() {
        let net = additive_net(&["a", "b"], &[("a", "b", 1)]);
        let prob = FlowProblem::new(net, vec![Rat::zero(), Rat::zero()]).unwrap();
        match solve_general(&prob, &GeneralOpts::default()).unwrap() {
            GeneralOutcome::Converged { outcome, .. } => {
                assert!(outcome.mu.iter().all(Rat::is_zero));
            }
            GeneralOutcome::Exhausted { .. } => panic!("trivial instance must converge"),
        }
    }
}
