//! Dense two-phase simplex over exact rationals.
//!
//! Sized for desk-scale feasibility and optimization subproblems (weight
//! searches, dual payoff extremes, flow recovery); Bland's rule keeps it
//! finite on degenerate tableaus.

use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

/// Minimize `objective . x` subject to `constraints`, with every `x_j >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<(Vec<Rat>, Cmp, Rat)>,
    objective: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { x: Vec<Rat>, value: Rat },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
            objective: vec![Rat::zero(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraint(&mut self, coeffs: Vec<Rat>, cmp: Cmp, rhs: Rat) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push((coeffs, cmp, rhs));
        self
    }

    pub fn minimize(&mut self, objective: Vec<Rat>) -> &mut Self {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self
    }

    pub fn maximize(&mut self, objective: Vec<Rat>) -> &mut Self {
        self.objective = objective.into_iter().map(|c| -c).collect();
        self
    }

    /// Phase-1 only: any feasible point, or `None`.
    pub fn feasible_point(&self) -> Option<Vec<Rat>> {
        match self.solve() {
            LpResult::Optimal { x, .. } => Some(x),
            LpResult::Unbounded => unreachable!("feasibility phase cannot be unbounded"),
            LpResult::Infeasible => None,
        }
    }

    pub fn solve(&self) -> LpResult {
        let n = self.num_vars;
        let m = self.constraints.len();

        // Column layout: structural | slack/surplus | artificial.
        let mut num_slack = 0;
        for (_, cmp, _) in &self.constraints {
            if *cmp != Cmp::Eq {
                num_slack += 1;
            }
        }
        let total = n + num_slack + m; // one artificial reserved per row
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut slack_idx = n;
        let art_base = n + num_slack;
        let mut artificials: Vec<usize> = Vec::new();

        for (i, (coeffs, cmp, rhs)) in self.constraints.iter().enumerate() {
            let mut row = vec![Rat::zero(); total + 1];
            let flip = rhs.is_negative();
            for (j, c) in coeffs.iter().enumerate() {
                row[j] = if flip { -c } else { c.clone() };
            }
            row[total] = if flip { -rhs } else { rhs.clone() };
            let eff_cmp = match (cmp, flip) {
                (Cmp::Eq, _) => Cmp::Eq,
                (Cmp::Le, false) | (Cmp::Ge, true) => Cmp::Le,
                (Cmp::Ge, false) | (Cmp::Le, true) => Cmp::Ge,
            };
            match eff_cmp {
                Cmp::Le => {
                    row[slack_idx] = Rat::one();
                    basis.push(slack_idx);
                    slack_idx += 1;
                }
                Cmp::Ge => {
                    row[slack_idx] = -Rat::one();
                    slack_idx += 1;
                    row[art_base + i] = Rat::one();
                    basis.push(art_base + i);
                    artificials.push(art_base + i);
                }
                Cmp::Eq => {
                    row[art_base + i] = Rat::one();
                    basis.push(art_base + i);
                    artificials.push(art_base + i);
                }
            }
            rows.push(row);
        }

        // Phase 1: minimize the sum of artificials.
        if !artificials.is_empty() {
            let mut obj = vec![Rat::zero(); total + 1];
            for &a in &artificials {
                obj[a] = Rat::one();
            }
            canonicalize(&mut obj, &rows, &basis);
            if !run_simplex(&mut rows, &mut basis, &mut obj, total) {
                unreachable!("phase 1 is bounded below by zero");
            }
            let value = -obj[total].clone();
            if !value.is_zero() {
                return LpResult::Infeasible;
            }
            // Pivot any artificial still in the basis out, or drop its row.
            let is_art = |j: usize| j >= art_base;
            let mut r = 0;
            while r < rows.len() {
                if is_art(basis[r]) {
                    let pivot_col = (0..art_base).find(|&j| !rows[r][j].is_zero());
                    match pivot_col {
                        Some(j) => pivot(&mut rows, &mut basis, &mut obj, r, j, total),
                        None => {
                            rows.remove(r);
                            basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
            // Freeze artificial columns at zero.
            for row in rows.iter_mut() {
                for &a in &artificials {
                    row[a] = Rat::zero();
                }
            }
        }

        // Phase 2.
        let mut obj = vec![Rat::zero(); total + 1];
        obj[..n].clone_from_slice(&self.objective);
        canonicalize(&mut obj, &rows, &basis);
        // Artificials must stay out.
        for &a in &artificials {
            obj[a] = Rat::zero();
        }
        if !run_simplex(&mut rows, &mut basis, &mut obj, total) {
            return LpResult::Unbounded;
        }

        let mut x = vec![Rat::zero(); n];
        for (r, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = rows[r][total].clone();
            }
        }
        let value = -obj[total].clone();
        LpResult::Optimal { x, value }
    }
}

fn canonicalize(obj: &mut [Rat], rows: &[Vec<Rat>], basis: &[usize]) {
    for (r, &b) in basis.iter().enumerate() {
        if !obj[b].is_zero() {
            let factor = obj[b].clone();
            for (o, v) in obj.iter_mut().zip(rows[r].iter()) {
                *o -= &(&factor * v);
            }
        }
    }
}

fn pivot(
    rows: &mut [Vec<Rat>],
    basis: &mut [usize],
    obj: &mut [Rat],
    r: usize,
    j: usize,
    total: usize,
) {
    let piv = rows[r][j].clone();
    for v in rows[r].iter_mut() {
        *v /= &piv;
    }
    for i in 0..rows.len() {
        if i != r && !rows[i][j].is_zero() {
            let factor = rows[i][j].clone();
            for k in 0..=total {
                let delta = &factor * &rows[r][k];
                rows[i][k] -= &delta;
            }
        }
    }
    if !obj[j].is_zero() {
        let factor = obj[j].clone();
        for k in 0..=total {
            let delta = &factor * &rows[r][k];
            obj[k] -= &delta;
        }
    }
    basis[r] = j;
}

/// Returns false when unbounded. Bland's rule on both choices.
fn run_simplex(
    rows: &mut Vec<Vec<Rat>>,
    basis: &mut Vec<usize>,
    obj: &mut Vec<Rat>,
    total: usize,
) -> bool {
    loop {
        let entering = (0..total).find(|&j| obj[j].is_negative());
        let j = match entering {
            Some(j) => j,
            None => return true,
        };
        let mut best: Option<(Rat, usize, usize)> = None; // (ratio, basis var, row)
        for (r, row) in rows.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = &row[total] / &row[j];
                let key = (ratio, basis[r], r);
                best = match best {
                    None => Some(key),
                    Some(cur) => {
                        if (key.0.clone(), key.1) < (cur.0.clone(), cur.1) {
                            Some(key)
                        } else {
                            Some(cur)
                        }
                    }
                };
            }
        }
        match best {
            Some((_, _, r)) => pivot(rows, basis, obj, r, j, total),
            None => return false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn r(s: &str) -> Rat {
        rat(s)
    }

    #[test]
    fn small_optimum() {
        // min -x1 - 2 x2 s.t. x1 + x2 <= 4, x2 <= 3
        let mut lp = LinearProgram::new(2);
        lp.constraint(vec![r("1"), r("1")], Cmp::Le, r("4"));
        lp.constraint(vec![r("0"), r("1")], Cmp::Le, r("3"));
        lp.minimize(vec![r("-1"), r("-2")]);
        match lp.solve() {
            LpResult::Optimal { x, value } => {
                assert_eq!(x, vec![r("1"), r("3")]);
                assert_eq!(value, r("-7"));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.constraint(vec![r("1")], Cmp::Ge, r("2"));
        lp.constraint(vec![r("1")], Cmp::Le, r("1"));
        assert_eq!(lp.solve(), LpResult::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constraint(vec![r("1")], Cmp::Ge, r("1"));
        lp.minimize(vec![r("-1")]);
        assert_eq!(lp.solve(), LpResult::Unbounded);
    }

    #[test]
    fn equality_constraints() {
        // min x1 + x2 s.t. x1 + 2 x2 = 3, x1 - x2 = 0 -> x = (1,1)
        let mut lp = LinearProgram::new(2);
        lp.constraint(vec![r("1"), r("2")], Cmp::Eq, r("3"));
        lp.constraint(vec![r("1"), r("-1")], Cmp::Eq, r("0"));
        lp.minimize(vec![r("1"), r("1")]);
        match lp.solve() {
            LpResult::Optimal { x, value } => {
                assert_eq!(x, vec![r("1"), r("1")]);
                assert_eq!(value, r("2"));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn fractional_answers_are_exact() {
        // min -x s.t. 3x <= 1
        let mut lp = LinearProgram::new(1);
        lp.constraint(vec![r("3")], Cmp::Le, r("1"));
        lp.minimize(vec![r("-1")]);
        match lp.solve() {
            LpResult::Optimal { x, value } => {
                assert_eq!(x[0], r("1/3"));
                assert_eq!(value, r("-1/3"));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // x >= 2 written as -x <= -2.
        let mut lp = LinearProgram::new(1);
        lp.constraint(vec![r("-1")], Cmp::Le, r("-2"));
        lp.minimize(vec![r("1")]);
        match lp.solve() {
            LpResult::Optimal { x, .. } => assert_eq!(x[0], r("2")),
            other => panic!("unexpected {:?}", other),
        }
    }
}
