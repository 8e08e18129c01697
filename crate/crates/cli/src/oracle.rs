//! Independent brute-force oracles used to cross-validate the solvers.
//!
//! Each oracle takes a different algorithmic route from the implementation
//! it checks: basis enumeration against successive shortest paths, path
//! enumeration against the Bellman fixed point, matching enumeration
//! against deferred acceptance and the excess-supply zero set.

use equistat_core::flow::{FlowProblem, Network};
use equistat_core::lp::{Cmp, LinearProgram, LpResult};
use equistat_core::markets::{check_stability_ntu, ItuMarket, Matching, NtuMarket};
use equistat_core::rat::Rat;
use std::collections::BTreeMap;

/// Exact Gaussian solve of `A x = b`; returns `None` unless the system has
/// a unique solution on the given columns.
fn solve_unique(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(sel) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            return None; // rank-deficient column: not a unique solve
        };
        m.swap(pivot_row, sel);
        let inv = m[pivot_row][col].recip();
        for v in m[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..=cols {
                    let delta = &f * &m[pivot_row][c];
                    m[r][c] -= &delta;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    // Consistency of the remaining rows.
    for r in pivot_row..rows {
        if !m[r][cols].is_zero() {
            return None;
        }
    }
    if pivots.len() < cols {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = m[r][cols].clone();
    }
    Some(x)
}

/// Minimum-cost flow by exhaustive enumeration of basic supports: every
/// vertex of the flow polyhedron has linearly independent arc columns, so
/// enumerating all arc subsets with a unique nonnegative solve covers the
/// optimum whenever no negative cycle exists.
pub fn exhaustive_min_cost_flow(prob: &FlowProblem) -> Option<(Rat, Vec<Rat>)> {
    let net = &prob.network;
    let costs = net.additive_costs()?;
    let m = net.num_arcs();
    let n = net.num_nodes();
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    for mask in 0u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|a| mask & (1 << a) != 0).collect();
        // Columns of the transposed incidence matrix restricted to subset.
        let a: Vec<Vec<Rat>> = (0..n)
            .map(|z| {
                subset
                    .iter()
                    .map(|&arc| {
                        let arc = &net.arcs()[arc];
                        if arc.to == z {
                            Rat::one()
                        } else if arc.from == z {
                            -Rat::one()
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let x = if subset.is_empty() {
            if prob.q.iter().all(Rat::is_zero) {
                Some(Vec::new())
            } else {
                None
            }
        } else {
            solve_unique(&a, &prob.q)
        };
        let Some(x) = x else { continue };
        if x.iter().any(Rat::is_negative) {
            continue;
        }
        let mut mu = vec![Rat::zero(); m];
        for (i, &arc) in subset.iter().enumerate() {
            mu[arc] = x[i].clone();
        }
        let cost: Rat = mu.iter().zip(&costs).map(|(f, c)| f * c).sum();
        match &best {
            Some((b, _)) if *b <= cost => {}
            _ => best = Some((cost, mu)),
        }
    }
    best
}

/// Bellman-Ford distance on the additive costs.
pub fn shortest_path_additive(net: &Network, from: usize, to: usize) -> Option<Rat> {
    let costs = net.additive_costs()?;
    let n = net.num_nodes();
    let mut dist: Vec<Option<Rat>> = vec![None; n];
    dist[from] = Some(Rat::zero());
    for _ in 0..n {
        let mut changed = false;
        for (a, arc) in net.arcs().iter().enumerate() {
            if let Some(d) = dist[arc.from].clone() {
                let cand = d + costs[a].clone();
                if dist[arc.to].as_ref().map_or(true, |old| cand < *old) {
                    dist[arc.to] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist[to].clone()
}

/// Latest departure by enumerating every simple path and composing the
/// connection functions backwards from the arrival time.
pub fn latest_departure_brute(
    net: &Network,
    origin: usize,
    destination: usize,
    p_d: &Rat,
) -> Option<Rat> {
    fn dfs(
        net: &Network,
        node: usize,
        destination: usize,
        visited: &mut Vec<bool>,
        p_d: &Rat,
        best: &mut Option<Rat>,
    ) -> Option<Rat> {
        if node == destination {
            return Some(p_d.clone());
        }
        let mut local_best: Option<Rat> = None;
        for arc in net.arcs() {
            if arc.from != node || visited[arc.to] {
                continue;
            }
            visited[arc.to] = true;
            if let Some(arrival) = dfs(net, arc.to, destination, visited, p_d, best) {
                if let Ok(depart) = arc.connection.eval(&arrival) {
                    if local_best.as_ref().map_or(true, |b| depart > *b) {
                        local_best = Some(depart);
                    }
                }
            }
            visited[arc.to] = false;
        }
        local_best
    }
    let mut visited = vec![false; net.num_nodes()];
    visited[origin] = true;
    let mut best = None;
    dfs(net, origin, destination, &mut visited, p_d, &mut best)
}

/// All stable zero/one matchings by full enumeration of feasible matchings.
pub fn ntu_stable_brute(m: &NtuMarket) -> Vec<Matching> {
    let nx = m.num_men();
    let ny = m.num_women();
    let mut out = Vec::new();
    let mut assignment: Vec<Option<usize>> = vec![None; nx];
    fn rec(
        m: &NtuMarket,
        x: usize,
        used: &mut Vec<bool>,
        assignment: &mut Vec<Option<usize>>,
        out: &mut Vec<Matching>,
    ) {
        let nx = m.num_men();
        if x == nx {
            let mut mu = BTreeMap::new();
            for (man, choice) in assignment.iter().enumerate() {
                match choice {
                    Some(y) => {
                        mu.insert((Some(man), Some(*y)), Rat::one());
                    }
                    None => {
                        mu.insert((Some(man), None), Rat::one());
                    }
                }
            }
            for (y, taken) in used.iter().enumerate() {
                if !taken {
                    mu.insert((None, Some(y)), Rat::one());
                }
            }
            let matching = Matching {
                mu,
                wages: BTreeMap::new(),
            };
            if check_stability_ntu(m, &matching)
                .map(|v| v.holds)
                .unwrap_or(false)
            {
                out.push(matching);
            }
            return;
        }
        assignment[x] = None;
        rec(m, x + 1, used, assignment, out);
        for y in 0..m.num_women() {
            if !used[y] {
                used[y] = true;
                assignment[x] = Some(y);
                rec(m, x + 1, used, assignment, out);
                assignment[x] = None;
                used[y] = false;
            }
        }
    }
    let mut used = vec![false; ny];
    rec(m, 0, &mut used, &mut assignment, &mut out);
    out
}

/// Assignment optimum for unit-count fully transferable markets by
/// exhaustive search over injective assignments.
pub fn tu_assignment_optimum(m: &ItuMarket) -> Option<Rat> {
    let phi = m.tu_surplus()?;
    if m.workers.iter().any(|(_, c)| *c != 1) || m.firms.iter().any(|(_, c)| *c != 1) {
        return None;
    }
    let nx = m.workers.len();
    let ny = m.firms.len();
    fn rec(
        phi: &[Vec<Rat>],
        with_singles: bool,
        x: usize,
        used: &mut Vec<bool>,
        acc: Rat,
        best: &mut Option<Rat>,
    ) {
        let nx = phi.len();
        if x == nx {
            let all_used = used.iter().all(|u| *u);
            if with_singles || all_used {
                if best.as_ref().map_or(true, |b| acc > *b) {
                    *best = Some(acc);
                }
            }
            return;
        }
        if with_singles {
            rec(phi, with_singles, x + 1, used, acc.clone(), best);
        }
        for y in 0..used.len() {
            if !used[y] {
                used[y] = true;
                rec(
                    phi,
                    with_singles,
                    x + 1,
                    used,
                    acc.clone() + phi[x][y].clone(),
                    best,
                );
                used[y] = false;
            }
        }
    }
    let mut best = None;
    let mut used = vec![false; ny];
    if !m.with_singles && nx != ny {
        return None;
    }
    rec(&phi, m.with_singles, 0, &mut used, Rat::zero(), &mut best);
    best
}

/// Extreme dual price vectors of an additive instance on the optimal face:
/// feasibility, complementary slackness with the given optimal flow, an
/// optional pinned node, and the total price extremized both ways.
pub fn additive_dual_extremes(
    prob: &FlowProblem,
    mu: &[Rat],
    pinned: Option<usize>,
) -> Option<(Vec<Rat>, Vec<Rat>)> {
    let net = &prob.network;
    let costs = net.additive_costs()?;
    let n = net.num_nodes();
    // Free prices via the split p = a - b with a, b >= 0.
    let var = 2 * n;
    let solve = |maximize: bool| -> Option<Vec<Rat>> {
        let mut lp = LinearProgram::new(var);
        for (a, arc) in net.arcs().iter().enumerate() {
            let mut row = vec![Rat::zero(); var];
            row[arc.to] = Rat::one();
            row[n + arc.to] = -Rat::one();
            row[arc.from] -= &Rat::one();
            row[n + arc.from] += &Rat::one();
            let cmp = if mu[a].is_positive() { Cmp::Eq } else { Cmp::Le };
            lp.constraint(row, cmp, costs[a].clone());
        }
        if let Some(z) = pinned {
            let mut row = vec![Rat::zero(); var];
            row[z] = Rat::one();
            row[n + z] = -Rat::one();
            lp.constraint(row, Cmp::Eq, Rat::zero());
        }
        let mut obj = vec![Rat::zero(); var];
        for z in 0..n {
            obj[z] = Rat::one();
            obj[n + z] = -Rat::one();
        }
        if maximize {
            lp.maximize(obj);
        } else {
            lp.minimize(obj);
        }
        match lp.solve() {
            LpResult::Optimal { x, .. } => Some(
                (0..n)
                    .map(|z| x[z].clone() - x[n + z].clone())
                    .collect(),
            ),
            _ => None,
        }
    };
    Some((solve(false)?, solve(true)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use equistat_core::flow::{solve_additive, Arc, ConnectionFunction};

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
    fn basis_enumeration_matches_solver_on_a_triangle() {
        let net = additive_net(
            &["a", "b", "c"],
            &[("a", "b", 1), ("b", "c", 1), ("a", "c", 3)],
        );
        let prob =
            FlowProblem::new(net, vec![Rat::int(-2), Rat::zero(), Rat::int(2)]).unwrap();
        let (oracle_cost, _) = exhaustive_min_cost_flow(&prob).unwrap();
        let out = solve_additive(&prob).unwrap();
        let solver_cost = equistat_core::flow::flow_cost(&prob.network, &out.mu).unwrap();
        assert_eq!(oracle_cost, Rat::int(4));
        assert_eq!(oracle_cost, solver_cost);
    }

    #[test]
    fn path_enumeration_composes_connections() {
        let net = additive_net(&["o", "m", "d"], &[("o", "m", 1), ("m", "d", 2), ("o", "d", 9)]);
        let best = latest_departure_brute(&net, 0, 2, &Rat::int(10)).unwrap();
        // Via m: 10 - 2 - 1 = 7; direct: 1.
        assert_eq!(best, Rat::int(7));
    }
}
