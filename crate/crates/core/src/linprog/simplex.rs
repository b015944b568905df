//! Bounded-variable revised simplex with a dense explicit basis inverse.
//!
//! Every constraint row gets a slack column so the initial basis is
//! diagonal; rows whose slack would start outside its bounds get an
//! artificial column instead, and phase one drives those to zero. Pricing is
//! Dantzig's rule with a Harris two-pass ratio test, falling back to Bland's
//! smallest-index rule after a run of degenerate pivots.

use super::problem::{LpProblem, Relation};
use super::{LpSolution, LpStatus};

/// Primal feasibility tolerance (absolute).
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Reduced-cost optimality tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Smallest pivot magnitude accepted by the ratio test.
pub const PIVOT_TOL: f64 = 1e-9;
/// Bound relaxation used by the first pass of the Harris ratio test.
const HARRIS_TOL: f64 = 1e-10;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERACY_THRESHOLD: usize = 50;
/// Pivots between checks of the primal residual.
const CHECK_EVERY: usize = 100;
/// Pivots between scheduled refactorizations.
const REFACTOR_EVERY: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

pub(super) struct Simplex {
    rows: usize,
    structural: usize,
    columns: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    rhs: Vec<f64>,
    artificial_start: usize,
    iterations: usize,
    max_iterations: usize,
}

impl Simplex {
    pub(super) fn new(problem: &LpProblem, max_iterations: Option<usize>) -> Self {
        let rows = problem.num_constraints();
        let structural = problem.num_vars();
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); structural];
        for (r, con) in problem.constraints().iter().enumerate() {
            for &(k, c) in &con.coeffs {
                if c != 0.0 {
                    columns[k].push((r, c));
                }
            }
        }
        // Merge repeated coefficients for the same variable in one row.
        for col in &mut columns {
            col.sort_by_key(|&(r, _)| r);
            col.dedup_by(|next, prev| {
                if next.0 == prev.0 {
                    prev.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }
        let mut cost = problem.objective().to_vec();
        let mut lower = Vec::with_capacity(structural + 2 * rows);
        let mut upper = Vec::with_capacity(structural + 2 * rows);
        let mut x = Vec::with_capacity(structural + 2 * rows);
        let mut state = Vec::with_capacity(structural + 2 * rows);
        for k in 0..structural {
            let (lo, hi) = problem.bounds(k);
            lower.push(lo);
            upper.push(hi);
            if lo.is_finite() {
                x.push(lo);
                state.push(State::AtLower);
            } else if hi.is_finite() {
                x.push(hi);
                state.push(State::AtUpper);
            } else {
                x.push(0.0);
                state.push(State::Free);
            }
        }

        let rhs: Vec<f64> = problem.constraints().iter().map(|c| c.rhs).collect();
        let mut residual = rhs.clone();
        for (k, col) in columns.iter().enumerate() {
            if x[k] != 0.0 {
                for &(r, c) in col {
                    residual[r] -= c * x[k];
                }
            }
        }

        // Slacks.
        for (r, con) in problem.constraints().iter().enumerate() {
            let (lo, hi) = match con.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            columns.push(vec![(r, 1.0)]);
            cost.push(0.0);
            lower.push(lo);
            upper.push(hi);
            x.push(0.0);
            state.push(State::AtLower);
        }

        let artificial_start = columns.len();
        let mut basis = vec![usize::MAX; rows];
        let mut binv = vec![0.0; rows * rows];
        for r in 0..rows {
            let slack = structural + r;
            let v = residual[r];
            if v >= lower[slack] && v <= upper[slack] {
                x[slack] = v;
                state[slack] = State::Basic(r);
                basis[r] = slack;
                binv[r * rows + r] = 1.0;
            } else {
                let bound = if v < lower[slack] {
                    lower[slack]
                } else {
                    upper[slack]
                };
                x[slack] = bound;
                state[slack] = if bound == lower[slack] {
                    State::AtLower
                } else {
                    State::AtUpper
                };
                let sign = if v > bound { 1.0 } else { -1.0 };
                let a = columns.len();
                columns.push(vec![(r, sign)]);
                cost.push(0.0);
                lower.push(0.0);
                upper.push(f64::INFINITY);
                x.push((v - bound).abs());
                state.push(State::Basic(r));
                basis[r] = a;
                binv[r * rows + r] = sign;
            }
        }
        let max_iterations =
            max_iterations.unwrap_or(50 * (rows + structural + rows).max(1));
        Self {
            rows,
            structural,
            columns,
            cost,
            lower,
            upper,
            x,
            state,
            basis,
            binv,
            rhs,
            artificial_start,
            iterations: 0,
            max_iterations,
        }
    }

    pub(super) fn solve(mut self) -> LpSolution {
        let n = self.columns.len();
        if n > self.artificial_start {
            let phase1: Vec<f64> = (0..n)
                .map(|k| if k >= self.artificial_start { 1.0 } else { 0.0 })
                .collect();
            match self.run(&phase1) {
                Outcome::IterationLimit => return self.finish(LpStatus::IterationLimit, &phase1),
                Outcome::Unbounded | Outcome::Optimal => {}
            }
            let infeasibility: f64 = (self.artificial_start..n).map(|k| self.x[k]).sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            if infeasibility > FEASIBILITY_TOL * scale {
                let cost = self.cost.clone();
                return self.finish(LpStatus::Infeasible, &cost);
            }
            for k in self.artificial_start..n {
                self.upper[k] = 0.0;
                if !matches!(self.state[k], State::Basic(_)) {
                    self.x[k] = 0.0;
                    self.state[k] = State::AtLower;
                }
            }
        }
        let cost = self.cost.clone();
        let status = match self.run(&cost) {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterationLimit => LpStatus::IterationLimit,
        };
        self.finish(status, &cost)
    }

    fn finish(self, status: LpStatus, cost: &[f64]) -> LpSolution {
        let duals = self.duals(cost);
        let x: Vec<f64> = self.x[..self.structural].to_vec();
        let objective = self.cost[..self.structural]
            .iter()
            .zip(&x)
            .map(|(c, v)| c * v)
            .sum();
        LpSolution {
            status,
            x,
            objective,
            duals,
            iterations: self.iterations,
        }
    }

    fn run(&mut self, cost: &[f64]) -> Outcome {
        let mut y = self.duals(cost);
        let mut degenerate_run = 0usize;
        let mut since_refactor = 0usize;
        let mut verified = false;
        loop {
            let bland = degenerate_run >= DEGENERACY_THRESHOLD;
            let Some((q, dir, dq)) = self.price(cost, &y, bland) else {
                if verified {
                    return Outcome::Optimal;
                }
                self.refactor();
                y = self.duals(cost);
                since_refactor = 0;
                verified = true;
                continue;
            };
            if self.iterations >= self.max_iterations {
                return Outcome::IterationLimit;
            }
            verified = false;
            let alpha = self.ftran(q);
            let Some(step) = self.ratio_test(q, dir, &alpha, bland) else {
                return Outcome::Unbounded;
            };
            self.iterations += 1;
            since_refactor += 1;
            let theta = step.theta;
            if theta.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            // Move along the edge.
            self.x[q] += dir * theta;
            for (i, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[i]] -= dir * theta * a;
                }
            }
            match step.leaving {
                None => {
                    // Entering variable runs to its opposite bound.
                    if dir > 0.0 {
                        self.x[q] = self.upper[q];
                        self.state[q] = State::AtUpper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = State::AtLower;
                    }
                }
                Some((p, to_upper)) => {
                    let leaving = self.basis[p];
                    if to_upper {
                        self.x[leaving] = self.upper[leaving];
                        self.state[leaving] = State::AtUpper;
                    } else {
                        self.x[leaving] = self.lower[leaving];
                        self.state[leaving] = State::AtLower;
                    }
                    self.basis[p] = q;
                    self.state[q] = State::Basic(p);
                    self.pivot(p, &alpha);
                    let row = &self.binv[p * self.rows..(p + 1) * self.rows];
                    for (yr, b) in y.iter_mut().zip(row) {
                        *yr += dq * b;
                    }
                }
            }

            let drifted = since_refactor % CHECK_EVERY == 0 && self.primal_residual() > 1e-9;
            if since_refactor >= REFACTOR_EVERY || drifted {
                self.refactor();
                y = self.duals(cost);
                since_refactor = 0;
            }
        }
    }

    /// Choose an entering column. Returns (column, direction, reduced cost).
    fn price(&self, cost: &[f64], y: &[f64], bland: bool) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        let mut best_score = 0.0;
        for k in 0..self.columns.len() {
            let st = self.state[k];
            if matches!(st, State::Basic(_)) || self.lower[k] == self.upper[k] {
                continue;
            }
            let d = cost[k] - self.columns[k].iter().map(|&(r, a)| y[r] * a).sum::<f64>();
            let dir = match st {
                State::AtLower if d < -OPTIMALITY_TOL => 1.0,
                State::AtUpper if d > OPTIMALITY_TOL => -1.0,
                State::Free if d.abs() > OPTIMALITY_TOL => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((k, dir, d));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((k, dir, d));
            }
        }
        best
    }

    fn ftran(&self, q: usize) -> Vec<f64> {
        let mut alpha = vec![0.0; self.rows];
        for &(r, a) in &self.columns[q] {
            for (i, al) in alpha.iter_mut().enumerate() {
                *al += self.binv[i * self.rows + r] * a;
            }
        }
        alpha
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Option<Step> {
        let flip = self.upper[q] - self.lower[q];
        // Rate of change of each basic variable per unit step.
        let limit = |i: usize, relax: f64| -> Option<(f64, bool)> {
            let g = -dir * alpha[i];
            let b = self.basis[i];
            if g < -PIVOT_TOL && self.lower[b].is_finite() {
                Some(((self.x[b] - self.lower[b] + relax) / -g, false))
            } else if g > PIVOT_TOL && self.upper[b].is_finite() {
                Some(((self.upper[b] - self.x[b] + relax) / g, true))
            } else {
                None
            }
        };

        if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for i in 0..self.rows {
                if let Some((t, up)) = limit(i, 0.0) {
                    let t = t.max(0.0);
                    let better = match best {
                        None => true,
                        Some((bi, bt, _)) => {
                            t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((i, t, up));
                    }
                }
            }
            return match best {
                Some((_, t, _)) if flip <= t => Some(Step::flip(flip)),
                Some((i, t, up)) => Some(Step::pivot(i, t, up)),
                None if flip.is_finite() => Some(Step::flip(flip)),
                None => None,
            };
        }

        let mut theta_max = f64::INFINITY;
        for i in 0..self.rows {
            if let Some((t, _)) = limit(i, HARRIS_TOL) {
                theta_max = theta_max.min(t);
            }
        }
        if flip <= theta_max {
            return if flip.is_finite() {
                Some(Step::flip(flip))
            } else {
                None
            };
        }
        let mut best: Option<(usize, f64, bool)> = None;
        let mut best_pivot = 0.0;
        for i in 0..self.rows {
            if let Some((t, up)) = limit(i, 0.0) {
                if t <= theta_max && alpha[i].abs() > best_pivot {
                    best_pivot = alpha[i].abs();
                    best = Some((i, t.max(0.0), up));
                }
            }
        }
        best.map(|(i, t, up)| Step::pivot(i, t, up))
    }

    /// Gauss-Jordan update of the explicit inverse for a pivot at row `p`.
    fn pivot(&mut self, p: usize, alpha: &[f64]) {
        let n = self.rows;
        let inv = 1.0 / alpha[p];
        let (head, rest) = self.binv.split_at_mut(p * n);
        let (prow, tail) = rest.split_at_mut(n);
        for v in prow.iter_mut() {
            *v *= inv;
        }
        for (i, row) in head.chunks_exact_mut(n).enumerate() {
            let a = alpha[i];
            if a != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= a * pv;
                }
            }
        }
        for (i, row) in tail.chunks_exact_mut(n).enumerate() {
            let a = alpha[p + 1 + i];
            if a != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= a * pv;
                }
            }
        }
    }

    /// Simplex multipliers y = c_B B⁻¹.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let n = self.rows;
        let mut y = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            let c = cost[b];
            if c != 0.0 {
                for (yr, v) in y.iter_mut().zip(&self.binv[i * n..(i + 1) * n]) {
                    *yr += c * v;
                }
            }
        }
        y
    }

    /// Max |B x_B + N x_N − b|.
    fn primal_residual(&self) -> f64 {
        let mut r = self.rhs.clone();
        for (k, col) in self.columns.iter().enumerate() {
            let v = self.x[k];
            if v != 0.0 {
                for &(row, a) in col {
                    r[row] -= a * v;
                }
            }
        }
        r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rebuild B⁻¹ from the basis columns and recompute the basic values.
    fn refactor(&mut self) {
        let n = self.rows;
        if n == 0 {
            return;
        }
        let mut a = vec![0.0; n * n];
        for (i, &b) in self.basis.iter().enumerate() {
            for &(r, v) in &self.columns[b] {
                a[r * n + i] = v;
            }
        }
        let Some(inv) = invert(a, n) else {
            // Keep the updated inverse if the rebuilt basis is numerically singular.
            return;
        };
        self.binv = inv;

        let mut r = self.rhs.clone();
        for (k, col) in self.columns.iter().enumerate() {
            if matches!(self.state[k], State::Basic(_)) {
                continue;
            }
            let v = self.x[k];
            if v != 0.0 {
                for &(row, c) in col {
                    r[row] -= c * v;
                }
            }
        }
        for i in 0..n {
            let v: f64 = self.binv[i * n..(i + 1) * n]
                .iter()
                .zip(&r)
                .map(|(b, r)| b * r)
                .sum();
            self.x[self.basis[i]] = v;
        }
    }
}

struct Step {
    theta: f64,
    /// Basis position leaving and whether it leaves at its upper bound;
    /// `None` for a bound flip of the entering variable.
    leaving: Option<(usize, bool)>,
}

impl Step {
    fn flip(theta: f64) -> Self {
        Self {
            theta,
            leaving: None,
        }
    }

    fn pivot(p: usize, theta: f64, to_upper: bool) -> Self {
        Self {
            theta,
            leaving: Some((p, to_upper)),
        }
    }
}

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
fn invert(mut a: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let (piv, max) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, 0.0), |best, c| if c.1 > best.1 { c } else { best });
        if max < 1e-12 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let d = 1.0 / a[col * n + col];
        for k in 0..n {
            a[col * n + k] *= d;
            inv[col * n + k] *= d;
        }
        let prow_a = a[col * n..(col + 1) * n].to_vec();
        let prow_i = inv[col * n..(col + 1) * n].to_vec();
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                a[r * n + k] -= f * prow_a[k];
                inv[r * n + k] -= f * prow_i[k];
            }
        }
    }
    Some(inv)
}
