//! A small self-contained linear-programming solver.
//!
//! Problems are stated as "minimize c·x subject to sparse rows and variable
//! bounds" ([`LpProblem`]) and solved by a bounded-variable revised simplex
//! ([`lp_solve`]). The solver is deterministic: pivot choices depend only on
//! the problem data.

mod lp_format;
mod problem;
mod simplex;

pub use lp_format::write_lp;
pub use problem::{Constraint, LpProblem, Relation};
pub use simplex::{FEASIBILITY_TOL, OPTIMALITY_TOL, PIVOT_TOL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable index {index} out of range for {vars} variables")]
    BadIndex { index: usize, vars: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("empty bounds for variable {var}: [{lower}, {upper}]")]
    EmptyBounds { var: usize, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the problem's variables.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Simplex multiplier per constraint row: reduced costs are
    /// `c_k − Σ_r duals[r]·a_rk`, so `duals[r]` is the rate of change of the
    /// optimum with the row's right-hand side.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solve with the default iteration cap of 50·(rows + columns).
pub fn lp_solve(problem: &LpProblem) -> LpSolution {
    simplex::Simplex::new(problem, None).solve()
}

pub fn lp_solve_with_limit(problem: &LpProblem, max_iterations: usize) -> LpSolution {
    simplex::Simplex::new(problem, Some(max_iterations)).solve()
}
