//! Synthetic schools with known aptitudes and inflatedness, and metrics for
//! how well a fit recovers them.
//!
//! Generation is split into a design (who takes what, and the true μ and ν)
//! and a realization (the noisy grades), so experiments can hold the design
//! fixed and redraw only the noise. Both draw from ChaCha8 streams seeded
//! from the 64-bit seed, which are identical on every platform.

use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::fit::{normalize, FitResult};
use crate::model::{connected_components, GradeBook, GradeRecord, GradeScale};

const DESIGN_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
/// Enrollment redraws before giving up on a connected design.
pub const MAX_CONNECT_ATTEMPTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("infeasible enrollment: {per_student} courses per student but only {courses} courses")]
    Infeasible { per_student: usize, courses: usize },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("entity sets differ: {0}")]
    EntityMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Dist {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Dist::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Dist::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
        }
    }

    fn validate(&self) -> Result<(), SimulateError> {
        let ok = match *self {
            Dist::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Dist::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SimulateError::InvalidSpec(format!("bad distribution {self:?}")))
        }
    }
}

/// Courses per student: a fixed count or a uniform draw from an inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enrollment {
    Fixed(usize),
    Range(usize, usize),
}

impl Enrollment {
    fn max(self) -> usize {
        match self {
            Enrollment::Fixed(k) => k,
            Enrollment::Range(_, hi) => hi,
        }
    }

    fn min(self) -> usize {
        match self {
            Enrollment::Fixed(k) => k,
            Enrollment::Range(lo, _) => lo,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub students: usize,
    pub courses: usize,
    pub enrollment: Enrollment,
    pub mu_dist: Dist,
    pub nu_dist: Dist,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Snap each grade to the nearest rung of this ladder.
    pub quantize: Option<GradeScale>,
}

impl SyntheticSpec {
    /// Defaults: μ ~ U[2, 4], ν ~ U[−1, 1] (re-centered), σ = 0.
    pub fn new(students: usize, courses: usize, per_student: usize) -> Self {
        Self {
            students,
            courses,
            enrollment: Enrollment::Fixed(per_student),
            mu_dist: Dist::Uniform { low: 2.0, high: 4.0 },
            nu_dist: Dist::Uniform {
                low: -1.0,
                high: 1.0,
            },
            noise_sigma: 0.0,
            seed: 0,
            quantize: None,
        }
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        if self.students == 0 || self.courses == 0 {
            return Err(SimulateError::InvalidSpec(
                "need at least one student and one course".into(),
            ));
        }
        let (lo, hi) = (self.enrollment.min(), self.enrollment.max());
        if lo == 0 || lo > hi {
            return Err(SimulateError::InvalidSpec(format!(
                "bad enrollment {:?}",
                self.enrollment
            )));
        }
        if hi > self.courses {
            return Err(SimulateError::Infeasible {
                per_student: hi,
                courses: self.courses,
            });
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(SimulateError::InvalidSpec("noise sigma must be ≥ 0".into()));
        }
        self.mu_dist.validate()?;
        self.nu_dist.validate()
    }
}

/// True parameters keyed by entity id.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub mu: Vec<(String, f64)>,
    pub nu: Vec<(String, f64)>,
}

/// Enrollment and true parameters, without grades.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    /// Course indices taken by each student, ascending.
    pub enrollment: Vec<Vec<usize>>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub connected: bool,
    pub attempts: usize,
    quantize: Option<GradeScale>,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub book: GradeBook,
    pub truth: GroundTruth,
    pub connected: bool,
    pub attempts: usize,
}

pub fn student_id(i: usize) -> String {
    format!("s{i}")
}

pub fn course_id(j: usize) -> String {
    format!("c{j}")
}

pub fn generate(spec: &SyntheticSpec) -> Result<Synthetic, SimulateError> {
    Ok(design(spec)?.realize(spec.noise_sigma, spec.seed))
}

pub fn design(spec: &SyntheticSpec) -> Result<Design, SimulateError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(DESIGN_STREAM);

    let mu: Vec<f64> = (0..spec.students)
        .map(|_| spec.mu_dist.sample(&mut rng))
        .collect();
    let mut nu: Vec<f64> = (0..spec.courses)
        .map(|_| spec.nu_dist.sample(&mut rng))
        .collect();
    let mean = nu.iter().sum::<f64>() / nu.len() as f64;
    for v in &mut nu {
        *v -= mean;
    }

    let mut enrollment = Vec::new();
    let mut connected = false;
    let mut attempts = 0;
    while attempts < MAX_CONNECT_ATTEMPTS && !connected {
        attempts += 1;
        enrollment = (0..spec.students)
            .map(|_| {
                let k = match spec.enrollment {
                    Enrollment::Fixed(k) => k,
                    Enrollment::Range(lo, hi) => rng.random_range(lo..=hi),
                };
                let mut picked = index::sample(&mut rng, spec.courses, k).into_vec();
                picked.sort_unstable();
                picked
            })
            .collect();
        connected = is_connected(&enrollment, spec.courses);
    }
    Ok(Design {
        enrollment,
        mu,
        nu,
        connected,
        attempts,
        quantize: spec.quantize.clone(),
    })
}

impl Design {
    /// Draw grades X_ij = μ_i + ν_j + ε_ij with ε ~ N(0, σ²).
    pub fn realize(&self, sigma: f64, noise_seed: u64) -> Synthetic {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        rng.set_stream(NOISE_STREAM);
        let noise = Normal::new(0.0, sigma).expect("sigma validated");
        let mut records = Vec::new();
        for (i, courses) in self.enrollment.iter().enumerate() {
            for &j in courses {
                let eps = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                let mut x = self.mu[i] + self.nu[j] + eps;
                if let Some(scale) = &self.quantize {
                    x = snap(scale, x);
                }
                records.push(GradeRecord::new(student_id(i), course_id(j), x));
            }
        }
        let book = GradeBook::build(records).expect("generated book is valid");
        let truth = GroundTruth {
            mu: self
                .mu
                .iter()
                .enumerate()
                .map(|(i, v)| (student_id(i), *v))
                .collect(),
            nu: self
                .nu
                .iter()
                .enumerate()
                .filter(|(j, _)| book.course_index(&course_id(*j)).is_some())
                .map(|(j, v)| (course_id(j), *v))
                .collect(),
        };
        Synthetic {
            book,
            truth,
            connected: self.connected,
            attempts: self.attempts,
        }
    }
}

fn snap(scale: &GradeScale, x: f64) -> f64 {
    scale
        .entries()
        .iter()
        .map(|(_, p)| *p)
        .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
        .expect("ladder is non-empty")
}

fn is_connected(enrollment: &[Vec<usize>], courses: usize) -> bool {
    let m = enrollment.len();
    let mut uf = crate::model::UnionFind::new(m + courses);
    for (i, cs) in enrollment.iter().enumerate() {
        for &j in cs {
            uf.union(i, m + j);
        }
    }
    // Courses nobody took are not part of the book.
    let root = uf.find(0);
    let mut taken = vec![false; courses];
    for cs in enrollment {
        for &j in cs {
            taken[j] = true;
        }
    }
    (0..m).all(|i| uf.find(i) == root)
        && (0..courses).filter(|&j| taken[j]).all(|j| uf.find(m + j) == root)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMetrics {
    pub mu_rmse: f64,
    pub mu_max_abs: f64,
    pub nu_rmse: f64,
    pub nu_max_abs: f64,
    /// Spearman rank correlation between true and fitted μ (NaN when either
    /// side is constant).
    pub mu_rank_correlation: f64,
}

/// Compare a fit with the truth after putting both on the same
/// normalization (Σν = 0 within each connected component of `book`).
pub fn recovery_metrics(
    book: &GradeBook,
    truth: &GroundTruth,
    fit: &FitResult,
) -> Result<RecoveryMetrics, SimulateError> {
    let m = book.num_students();
    let n = book.num_courses();
    if fit.mu.len() != m || fit.nu.len() != n {
        return Err(SimulateError::EntityMismatch(format!(
            "fit has {} students and {} courses, book has {m} and {n}",
            fit.mu.len(),
            fit.nu.len()
        )));
    }
    let true_mu = align(&truth.mu, book.student_ids(), "student")?;
    let true_nu = align(&truth.nu, book.course_ids(), "course")?;

    let labels = connected_components(book);
    let (mut tm, mut tn) = (true_mu, true_nu);
    normalize(&mut tm, &mut tn, &labels);
    let (mut fm, mut fn_) = (fit.mu.clone(), fit.nu.clone());
    normalize(&mut fm, &mut fn_, &labels);

    let (mu_rmse, mu_max_abs) = errors(&tm, &fm);
    let (nu_rmse, nu_max_abs) = errors(&tn, &fn_);
    Ok(RecoveryMetrics {
        mu_rmse,
        mu_max_abs,
        nu_rmse,
        nu_max_abs,
        mu_rank_correlation: spearman(&tm, &fm),
    })
}

fn align(
    truth: &[(String, f64)],
    ids: &[String],
    kind: &str,
) -> Result<Vec<f64>, SimulateError> {
    let map: HashMap<&str, f64> = truth.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    if map.len() != ids.len() {
        return Err(SimulateError::EntityMismatch(format!(
            "truth has {} {kind}s, book has {}",
            map.len(),
            ids.len()
        )));
    }
    ids.iter()
        .map(|id| {
            map.get(id.as_str())
                .copied()
                .ok_or_else(|| SimulateError::EntityMismatch(format!("{kind} {id:?} missing from truth")))
        })
        .collect()
}

fn errors(truth: &[f64], fit: &[f64]) -> (f64, f64) {
    let (sq, max) = truth
        .iter()
        .zip(fit)
        .fold((0.0, 0.0f64), |(sq, max), (t, f)| {
            let d = (t - f).abs();
            (sq + d * d, max.max(d))
        });
    ((sq / truth.len() as f64).sqrt(), max)
}

/// Average ranks (ties share the mean rank).
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let r = (start + end - 1) as f64 / 2.0 + 1.0;
        for &k in &order[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return f64::NAN;
    }
    cov / (va * vb).sqrt()
}
