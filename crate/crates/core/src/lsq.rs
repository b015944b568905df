//! Least-squares fitting of the additive model.
//!
//! The sparse solver works on the normal equations
//!
//! ```text
//! n_i μ_i + Σ_{j∈J_i} ν_j = Σ_{j∈J_i} X_ij      (one row per student)
//! m_j ν_j + Σ_{i∈I_j} μ_i = Σ_{i∈I_j} X_ij      (one row per course)
//! ```
//!
//! whose residuals are exactly the stationarity conditions of the squared
//! loss. The system is positive semidefinite with a one-dimensional null
//! space per connected component (shift μ up, ν down); conjugate gradients
//! converge on the consistent singular system and the null-space component
//! is fixed afterwards by [`normalize`].

use thiserror::Error;

use crate::fit::{normalize, Diagnostics, FitResult, Method};
use crate::model::{connected_components, GradeBook};

pub use crate::fit::{rms_residual as estimate_scale, standard_errors, standard_errors_complete};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LsqError {
    #[error("book is not complete: {grades} grades for {students} students and {courses} courses")]
    Incomplete {
        grades: usize,
        students: usize,
        courses: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsOptions {
    pub max_iterations: usize,
    /// Stop when ‖stationarity residual‖₂ < tolerance · √N.
    pub tolerance: f64,
    /// Stop when no component moves by more than this in one step.
    pub step_tolerance: f64,
}

impl Default for LsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
            step_tolerance: 1e-10,
        }
    }
}

/// Closed form for complete books: μ_i is the row mean, ν_j the column mean
/// less the grand mean.
pub fn fit_ls_complete(book: &GradeBook) -> Result<FitResult, LsqError> {
    if !book.is_complete() {
        return Err(LsqError::Incomplete {
            grades: book.len(),
            students: book.num_students(),
            courses: book.num_courses(),
        });
    }
    let (m, n) = (book.num_students(), book.num_courses());
    let mut row = vec![0.0; m];
    let mut col = vec![0.0; n];
    let mut total = 0.0;
    for e in book.entries() {
        row[e.student] += e.grade;
        col[e.course] += e.grade;
        total += e.grade;
    }
    let grand = total / (m * n) as f64;
    let mu = row.iter().map(|s| s / n as f64).collect();
    let nu = col.iter().map(|s| s / m as f64 - grand).collect();
    let diagnostics = Diagnostics {
        iterations: 0,
        converged: true,
        components: 1,
        stationarity: None,
        duality_gap: None,
        notes: Vec::new(),
    };
    let mut fit = FitResult::assemble(book, Method::LsComplete, mu, nu, diagnostics);
    fit.diagnostics.stationarity = Some(max_stationarity(book, &fit.mu, &fit.nu));
    Ok(fit)
}

pub fn fit_ls(book: &GradeBook) -> FitResult {
    fit_ls_with(book, &LsOptions::default())
}

pub fn fit_ls_with(book: &GradeBook, opts: &LsOptions) -> FitResult {
    let labels = connected_components(book);
    let system = NormalEquations::new(book);
    let (mut x, iterations, converged) = system.solve_pcg(opts);
    let m = book.num_students();
    let mut nu = x.split_off(m);
    let mut mu = x;
    normalize(&mut mu, &mut nu, &labels);

    let mut notes = Vec::new();
    if labels.count() > 1 {
        notes.push(format!(
            "enrollment graph has {} connected components; estimates are only comparable within a component",
            labels.count()
        ));
    }
    if !converged {
        notes.push(format!(
            "conjugate gradients stopped at the iteration cap ({})",
            opts.max_iterations
        ));
    }
    let diagnostics = Diagnostics {
        iterations,
        converged,
        components: labels.count(),
        stationarity: Some(max_stationarity(book, &mu, &nu)),
        duality_gap: None,
        notes,
    };
    FitResult::assemble(book, Method::Ls, mu, nu, diagnostics)
}

/// Largest stationarity violation, scaled per equation:
/// max over students of |Σ_{J_i} r| / n_i and over courses of |Σ_{I_j} r| / m_j.
pub fn max_stationarity(book: &GradeBook, mu: &[f64], nu: &[f64]) -> f64 {
    let (by_student, by_course) = stationarity_sums(book, mu, nu);
    let s = by_student
        .iter()
        .zip(book.student_counts())
        .map(|(r, c)| r.abs() / c as f64);
    let c = by_course
        .iter()
        .zip(book.course_counts())
        .map(|(r, c)| r.abs() / c as f64);
    s.chain(c).fold(0.0, f64::max)
}

/// Per-student and per-course residual sums.
pub fn stationarity_sums(book: &GradeBook, mu: &[f64], nu: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut by_student = vec![0.0; book.num_students()];
    let mut by_course = vec![0.0; book.num_courses()];
    for e in book.entries() {
        let r = e.grade - mu[e.student] - nu[e.course];
        by_student[e.student] += r;
        by_course[e.course] += r;
    }
    (by_student, by_course)
}

struct NormalEquations<'a> {
    book: &'a GradeBook,
    diag: Vec<f64>,
    rhs: Vec<f64>,
}

impl<'a> NormalEquations<'a> {
    fn new(book: &'a GradeBook) -> Self {
        let m = book.num_students();
        let mut diag = vec![0.0; m + book.num_courses()];
        let mut rhs = vec![0.0; diag.len()];
        for e in book.entries() {
            diag[e.student] += 1.0;
            diag[m + e.course] += 1.0;
            rhs[e.student] += e.grade;
            rhs[m + e.course] += e.grade;
        }
        Self { book, diag, rhs }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.book.num_students();
        for (o, (d, xi)) in out.iter_mut().zip(self.diag.iter().zip(x)) {
            *o = d * xi;
        }
        for e in self.book.entries() {
            out[e.student] += x[m + e.course];
            out[m + e.course] += x[e.student];
        }
    }

    fn residual(&self, x: &[f64], r: &mut [f64]) {
        self.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(&self.rhs) {
            *ri = bi - *ri;
        }
    }

    /// Jacobi-preconditioned conjugate gradients from x = 0.
    fn solve_pcg(&self, opts: &LsOptions) -> (Vec<f64>, usize, bool) {
        let dim = self.diag.len();
        let threshold = opts.tolerance * (self.book.len() as f64).sqrt();
        let mut x = vec![0.0; dim];
        let mut r = self.rhs.clone();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut q = vec![0.0; dim];
        let mut rz = dot(&r, &z);

        if norm(&r) < threshold {
            return (x, 0, true);
        }
        for it in 1..=opts.max_iterations {
            self.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 {
                // p lies in the null space; nothing left to reduce.
                self.residual(&x, &mut r);
                return (x, it, norm(&r) < threshold);
            }
            let alpha = rz / pq;
            let mut step = 0.0f64;
            for k in 0..dim {
                let dx = alpha * p[k];
                x[k] += dx;
                step = step.max(dx.abs());
                r[k] -= alpha * q[k];
            }
            // Recompute the true residual now and then to stop drift.
            if it % 50 == 0 {
                self.residual(&x, &mut r);
            }
            let rnorm = norm(&r);
            if rnorm < threshold {
                self.residual(&x, &mut r);
                if norm(&r) < threshold {
                    return (x, it, true);
                }
            }
            if step < opts.step_tolerance {
                self.residual(&x, &mut r);
                let ok = norm(&r) < threshold.max(1e-8);
                return (x, it, ok);
            }
            for k in 0..dim {
                z[k] = r[k] / self.diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..dim {
                p[k] = z[k] + beta * p[k];
            }
        }
        self.residual(&x, &mut r);
        let ok = norm(&r) < threshold;
        (x, opts.max_iterations, ok)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
