//! The fitted additive model and the pieces shared by every fitting method.

use std::fmt;

use crate::model::{ComponentLabeling, GradeBook};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Sparse least squares.
    Ls,
    /// Closed-form least squares for complete books.
    LsComplete,
    /// Least absolute deviations by linear programming.
    LadLp,
    /// Least absolute deviations by alternating medians.
    LadAlternating,
}

impl Method {
    pub fn is_lad(self) -> bool {
        matches!(self, Method::LadLp | Method::LadAlternating)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ls => "LS",
            Method::LsComplete => "LS-complete",
            Method::LadLp => "LAD-LP",
            Method::LadAlternating => "LAD-alternating",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Number of connected components; normalization is per component.
    pub components: usize,
    /// Largest |Σ residual| / count over the stationarity equations (LS only).
    pub stationarity: Option<f64>,
    /// Relative primal/dual objective gap (LP only).
    pub duality_gap: Option<f64>,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn disconnected(&self) -> bool {
        self.components > 1
    }
}

/// Aptitude and inflatedness estimates, indexed like the grade book's
/// students and courses.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub method: Method,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    /// Residual scale: root mean squared residual at the fit.
    pub scale: f64,
    pub stderr_mu: Vec<f64>,
    pub stderr_nu: Vec<f64>,
    pub student_counts: Vec<usize>,
    pub course_counts: Vec<usize>,
    /// Mean loss at the fit: squared residuals for LS, absolute for LAD.
    pub objective: f64,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    /// Assemble a result from normalized estimates, filling in scale,
    /// error bars and objective from the book.
    pub(crate) fn assemble(
        book: &GradeBook,
        method: Method,
        mu: Vec<f64>,
        nu: Vec<f64>,
        diagnostics: Diagnostics,
    ) -> Self {
        let scale = rms_residual(book, &mu, &nu);
        let student_counts = book.student_counts();
        let course_counts = book.course_counts();
        let (stderr_mu, stderr_nu) = standard_errors(scale, &student_counts, &course_counts);
        let objective = if method.is_lad() {
            mean_abs_residual(book, &mu, &nu)
        } else {
            scale * scale
        };
        Self {
            method,
            mu,
            nu,
            scale,
            stderr_mu,
            stderr_nu,
            student_counts,
            course_counts,
            objective,
            diagnostics,
        }
    }

    pub fn mu_of(&self, book: &GradeBook, student: &str) -> Option<f64> {
        book.student_index(student).map(|i| self.mu[i])
    }

    pub fn nu_of(&self, book: &GradeBook, course: &str) -> Option<f64> {
        book.course_index(course).map(|j| self.nu[j])
    }

    pub fn residuals<'a>(&'a self, book: &'a GradeBook) -> impl Iterator<Item = f64> + 'a {
        residuals(book, &self.mu, &self.nu)
    }
}

pub fn residuals<'a>(
    book: &'a GradeBook,
    mu: &'a [f64],
    nu: &'a [f64],
) -> impl Iterator<Item = f64> + 'a {
    book.entries()
        .iter()
        .map(move |e| e.grade - mu[e.student] - nu[e.course])
}

/// Mean squared residual: the least-squares loss.
pub fn mean_squared_residual(book: &GradeBook, mu: &[f64], nu: &[f64]) -> f64 {
    residuals(book, mu, nu).map(|r| r * r).sum::<f64>() / book.len() as f64
}

/// Mean absolute residual: the least-absolute-deviations loss.
pub fn mean_abs_residual(book: &GradeBook, mu: &[f64], nu: &[f64]) -> f64 {
    residuals(book, mu, nu).map(f64::abs).sum::<f64>() / book.len() as f64
}

/// Residual scale: the square root of the mean squared residual, divisor N.
pub fn rms_residual(book: &GradeBook, mu: &[f64], nu: &[f64]) -> f64 {
    mean_squared_residual(book, mu, nu).sqrt()
}

/// Error bars from a residual scale: scale/√n_i for students and
/// scale/√m_j for courses.
pub fn standard_errors(
    scale: f64,
    student_counts: &[usize],
    course_counts: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let se = |c: &usize| scale / (*c as f64).sqrt();
    (
        student_counts.iter().map(se).collect(),
        course_counts.iter().map(se).collect(),
    )
}

/// Exact error bars for a complete m×n book: σ/√n for each aptitude and
/// σ·√((1 − 1/n)/m) for each inflatedness.
pub fn standard_errors_complete(scale: f64, m: usize, n: usize) -> (f64, f64) {
    let (m, n) = (m as f64, n as f64);
    (scale / n.sqrt(), scale * ((1.0 - 1.0 / n) / m).sqrt())
}

/// Move a constant between μ and ν within each component so that the ν of
/// every component sum to zero.
pub fn normalize(mu: &mut [f64], nu: &mut [f64], labels: &ComponentLabeling) {
    let k = labels.count();
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (j, &c) in labels.course_components().iter().enumerate() {
        sum[c] += nu[j];
        count[c] += 1;
    }
    let shift: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    for (j, &c) in labels.course_components().iter().enumerate() {
        nu[j] -= shift[c];
    }
    for (i, &c) in labels.student_components().iter().enumerate() {
        mu[i] += shift[c];
    }
}
