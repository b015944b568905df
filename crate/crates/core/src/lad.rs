//! Least-absolute-deviations fitting of the additive model.
//!
//! Two routes are provided. [`fit_lad_alternating`] alternates median
//! updates of ν and μ until nothing moves; it never increases the L1 loss but
//! may stop short of the optimum on sparse books. [`fit_lad_lp`] solves the
//! problem exactly as a linear program.
//!
//! The LP in its direct form,
//!
//! ```text
//! minimize Σ t_ij  s.t.  −t_ij ≤ X_ij − μ_i − ν_j ≤ t_ij,  Σ_j ν_j = 0,
//! ```
//!
//! has two rows per grade. [`fit_lad_lp`] instead drops the Σν = 0 row
//! (the loss is unchanged by μ + c, ν − c, and the shift is fixed after
//! solving) and solves the dual,
//!
//! ```text
//! maximize Σ X_ij w_ij  s.t.  Σ_{j∈J_i} w_ij = 0 (each student),
//!                             Σ_{i∈I_j} w_ij = 0 (each course),
//!                             −1 ≤ w_ij ≤ 1,
//! ```
//!
//! whose basis has one row per student and course, and reads μ and ν off the
//! simplex multipliers. Strong duality gives a certificate: the L1 loss at the
//! recovered (μ, ν) must equal the dual objective.

use thiserror::Error;

use crate::fit::{mean_abs_residual, normalize, residuals, Diagnostics, FitResult, Method};
use crate::linprog::{lp_solve, lp_solve_with_limit, LpProblem, LpSolution, LpStatus, Relation};
use crate::model::{connected_components, GradeBook};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LadError {
    #[error("median of an empty list")]
    EmptyMedian,
}

/// Middle order statistic; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Result<f64, LadError> {
    if values.is_empty() {
        return Err(LadError::EmptyMedian);
    }
    let mut v = values.to_vec();
    Ok(median_in_place(&mut v))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Cap on full sweeps of the alternating-medians iteration.
pub const MAX_SWEEPS: usize = 1_000;
/// A sweep that moves no estimate by more than this is a fixed point.
pub const SWEEP_TOLERANCE: f64 = 1e-12;

/// Alternating medians: start from ν = 0 and μ_i = median of student i's
/// grades, then repeat ν_j ← median_{I_j}(X − μ), μ_i ← median_{J_i}(X − ν)
/// until a sweep changes nothing.
pub fn fit_lad_alternating(book: &GradeBook) -> FitResult {
    alternating(book, None)
}

/// As [`fit_lad_alternating`], also returning the mean absolute residual
/// after the initial step and after every half-sweep.
pub fn fit_lad_alternating_traced(book: &GradeBook) -> (FitResult, Vec<f64>) {
    let mut trace = Vec::new();
    let fit = alternating(book, Some(&mut trace));
    (fit, trace)
}

fn alternating(book: &GradeBook, mut trace: Option<&mut Vec<f64>>) -> FitResult {
    let labels = connected_components(book);
    let entries = book.entries();
    let m = book.num_students();
    let n = book.num_courses();
    let mut buf = Vec::new();

    let mut nu = vec![0.0; n];
    let mut mu: Vec<f64> = (0..m)
        .map(|i| {
            buf.clear();
            buf.extend(book.courses_of(i).iter().map(|&k| entries[k].grade));
            median_in_place(&mut buf)
        })
        .collect();
    let mut record = |mu: &[f64], nu: &[f64]| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(mean_abs_residual(book, mu, nu));
        }
    };
    record(&mu, &nu);

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut change = 0.0f64;
        for (j, v) in nu.iter_mut().enumerate() {
            buf.clear();
            buf.extend(
                book.students_of(j)
                    .iter()
                    .map(|&k| entries[k].grade - mu[entries[k].student]),
            );
            let new = median_in_place(&mut buf);
            change = change.max((new - *v).abs());
            *v = new;
        }
        record(&mu, &nu);
        for (i, u) in mu.iter_mut().enumerate() {
            buf.clear();
            buf.extend(
                book.courses_of(i)
                    .iter()
                    .map(|&k| entries[k].grade - nu[entries[k].course]),
            );
            let new = median_in_place(&mut buf);
            change = change.max((new - *u).abs());
            *u = new;
        }
        record(&mu, &nu);
        if change <= SWEEP_TOLERANCE {
            converged = true;
            break;
        }
    }
    normalize(&mut mu, &mut nu, &labels);

    let mut notes = Vec::new();
    if labels.count() > 1 {
        notes.push(format!(
            "enrollment graph has {} connected components; estimates are only comparable within a component",
            labels.count()
        ));
    }
    if !converged {
        notes.push(format!("alternating medians hit the sweep cap ({MAX_SWEEPS})"));
    }
    let diagnostics = Diagnostics {
        iterations: sweeps,
        converged,
        components: labels.count(),
        stationarity: None,
        duality_gap: None,
        notes,
    };
    FitResult::assemble(book, Method::LadAlternating, mu, nu, diagnostics)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadOptions {
    /// Among alternative LAD optima, prefer the one whose ν are least spread
    /// out (smallest Σ|ν_j − c| over shifts c), before normalizing. The value
    /// is the penalty weight used to find it; `None` returns the first
    /// optimal vertex found.
    pub tie_break: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl Default for LadOptions {
    fn default() -> Self {
        Self {
            tie_break: Some(1e-6),
            max_iterations: None,
        }
    }
}

/// Relative tolerance for accepting a tie-broken solution as still optimal
/// and for the primal/dual certificate.
const CERTIFICATE_TOL: f64 = 1e-9;

pub fn fit_lad_lp(book: &GradeBook) -> FitResult {
    fit_lad_lp_with(book, &LadOptions::default())
}

pub fn fit_lad_lp_with(book: &GradeBook, opts: &LadOptions) -> FitResult {
    let labels = connected_components(book);
    let pure = solve_dual(book, 0.0, opts.max_iterations);
    let mut iterations = pure.iterations;
    let mut chosen = pure;

    if let Some(eps) = opts.tie_break.filter(|e| *e > 0.0) {
        if chosen.status == LpStatus::Optimal && chosen.gap <= CERTIFICATE_TOL {
            let alt = solve_dual(book, eps, opts.max_iterations);
            iterations += alt.iterations;
            let bound = chosen.loss + CERTIFICATE_TOL * chosen.loss.max(1.0);
            if alt.status == LpStatus::Optimal && alt.loss <= bound {
                chosen = DualFit {
                    gap: chosen.gap,
                    ..alt
                };
            }
        }
    }

    let DualFit {
        mut mu,
        mut nu,
        status,
        gap,
        ..
    } = chosen;
    normalize(&mut mu, &mut nu, &labels);

    let converged = status == LpStatus::Optimal && gap <= CERTIFICATE_TOL;
    let mut notes = Vec::new();
    if labels.count() > 1 {
        notes.push(format!(
            "enrollment graph has {} connected components; estimates are only comparable within a component",
            labels.count()
        ));
    }
    if status != LpStatus::Optimal {
        notes.push(format!("LP solver stopped with status {status:?}"));
    } else if gap > CERTIFICATE_TOL {
        notes.push(format!("primal/dual objective gap {gap:.3e} exceeds tolerance"));
    }
    let diagnostics = Diagnostics {
        iterations,
        converged,
        components: labels.count(),
        stationarity: None,
        duality_gap: Some(gap),
        notes,
    };
    FitResult::assemble(book, Method::LadLp, mu, nu, diagnostics)
}

struct DualFit {
    mu: Vec<f64>,
    nu: Vec<f64>,
    status: LpStatus,
    /// Total L1 loss at (mu, nu).
    loss: f64,
    /// |loss − dual objective| / max(1, loss), for the unpenalized problem.
    gap: f64,
    iterations: usize,
}

fn solve_dual(book: &GradeBook, penalty: f64, max_iterations: Option<usize>) -> DualFit {
    let lp = lad_dual_problem(book, penalty);
    let sol = match max_iterations {
        Some(cap) => lp_solve_with_limit(&lp, cap),
        None => lp_solve(&lp),
    };
    let (mu, nu) = multipliers_to_estimates(book, &sol);
    let loss: f64 = residuals(book, &mu, &nu).map(f64::abs).sum();
    let penalty_term: f64 = penalty * nu.iter().map(|v| v.abs()).sum::<f64>();
    let dual_objective = -sol.objective;
    let gap = (loss + penalty_term - dual_objective).abs() / loss.max(1.0);
    DualFit {
        mu,
        nu,
        status: sol.status,
        loss,
        gap,
        iterations: sol.iterations,
    }
}

fn multipliers_to_estimates(book: &GradeBook, sol: &LpSolution) -> (Vec<f64>, Vec<f64>) {
    let m = book.num_students();
    let mu = sol.duals[..m].iter().map(|y| -y).collect();
    let nu = sol.duals[m..m + book.num_courses()]
        .iter()
        .map(|y| -y)
        .collect();
    (mu, nu)
}

/// Dual of the LAD program, stated as a minimization.
///
/// The primal here leaves out the Σν = 0 row: its optimum is then only
/// fixed up to the shift (μ + c, ν − c), which [`normalize`] removes
/// afterwards. Without that row the dual's constraint matrix is the
/// student–course incidence matrix, so every basis is a spanning forest
/// and simplex updates stay sparse.
///
/// Variables: one `w` per grade in `[-1, 1]` (entry order), then, when
/// `penalty > 0`, one `z_j` per course in `[-penalty, penalty]`. Rows: one
/// per student, then one per course. A positive penalty adds
/// `penalty · Σ|ν_j|` to the primal objective.
pub fn lad_dual_problem(book: &GradeBook, penalty: f64) -> LpProblem {
    let m = book.num_students();
    let n = book.num_courses();
    let entries = book.entries();
    let z_count = if penalty > 0.0 { n } else { 0 };
    let nvars = entries.len() + z_count;

    let mut objective = vec![0.0; nvars];
    for (k, e) in entries.iter().enumerate() {
        objective[k] = -e.grade;
    }
    let mut lp = LpProblem::new(objective).expect("finite grades");
    for k in 0..entries.len() {
        lp.set_bounds(k, -1.0, 1.0).expect("valid bounds");
    }
    for j in 0..z_count {
        lp.set_bounds(entries.len() + j, -penalty, penalty)
            .expect("valid bounds");
    }

    for i in 0..m {
        let coeffs = book.courses_of(i).iter().map(|&k| (k, 1.0)).collect();
        lp.add_constraint(coeffs, Relation::Eq, 0.0)
            .expect("valid row");
    }
    for j in 0..n {
        let mut coeffs: Vec<(usize, f64)> = book.students_of(j).iter().map(|&k| (k, 1.0)).collect();
        if z_count > 0 {
            coeffs.push((entries.len() + j, 1.0));
        }
        lp.add_constraint(coeffs, Relation::Eq, 0.0)
            .expect("valid row");
    }
    lp
}

/// The LAD program in its direct form: variables μ (free), ν (free) and
/// t ≥ 0 per grade; two rows per grade and the Σν = 0 row last.
pub fn lad_primal_problem(book: &GradeBook) -> LpProblem {
    let m = book.num_students();
    let n = book.num_courses();
    let entries = book.entries();
    let nvars = m + n + entries.len();
    let mut objective = vec![0.0; nvars];
    for c in &mut objective[m + n..] {
        *c = 1.0;
    }
    let mut lp = LpProblem::new(objective).expect("finite objective");
    for v in 0..m + n {
        lp.set_free(v).expect("valid index");
    }
    let names = (0..m)
        .map(|i| format!("mu{i}"))
        .chain((0..n).map(|j| format!("nu{j}")))
        .chain((0..entries.len()).map(|k| format!("t{k}")))
        .collect();
    lp.set_names(names).expect("one name per variable");
    for (k, e) in entries.iter().enumerate() {
        let t = m + n + k;
        let (mu, nu) = (e.student, m + e.course);
        // X − μ − ν ≤ t
        lp.add_constraint(vec![(t, 1.0), (mu, 1.0), (nu, 1.0)], Relation::Ge, e.grade)
            .expect("valid row");
        // −t ≤ X − μ − ν
        lp.add_constraint(vec![(t, 1.0), (mu, -1.0), (nu, -1.0)], Relation::Ge, -e.grade)
            .expect("valid row");
    }
    lp.add_constraint((m..m + n).map(|v| (v, 1.0)).collect(), Relation::Eq, 0.0)
        .expect("valid row");
    lp
}

/// Mean L1 loss of a least-squares (or any) fit, for comparison with LAD.
pub fn l1_loss(book: &GradeBook, fit: &FitResult) -> f64 {
    mean_abs_residual(book, &fit.mu, &fit.nu)
}
