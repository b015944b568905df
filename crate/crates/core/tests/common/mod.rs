//! Oracles, strategies and property checks shared by the property suite
//! and the acceptance runner. Nothing here calls into the solvers to decide
//! what the right answer is.

#![allow(dead_code)]

use std::collections::HashSet;

use gradefit::fit::{mean_abs_residual, mean_squared_residual};
use gradefit::lad::{fit_lad_alternating, fit_lad_alternating_traced, fit_lad_lp};
use gradefit::linprog::{lp_solve, LpProblem, LpStatus, Relation};
use gradefit::lsq::{fit_ls, fit_ls_complete};
use gradefit::model::{all_course_averages, all_gpas, connected_components};
use gradefit::records::{parse_book_str, render_book, ParseOptions};
use gradefit::report::{course_rows, estimates_csv, parse_estimates_csv, student_rows, EntityKind};
use gradefit::simulate::{generate, SyntheticSpec};
use gradefit::{FitResult, GradeBook, GradeRecord};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), TestCaseError>;

// ---------------------------------------------------------------- linear algebra

/// Solve a square system by Gaussian elimination with partial pivoting.
/// `None` when the matrix is numerically singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------- book oracles

/// Component partition by boolean transitive closure over students + courses.
/// Returns, for each node, the smallest node index it reaches.
pub fn closure_components(book: &GradeBook) -> Vec<usize> {
    let m = book.num_students();
    let size = m + book.num_courses();
    let mut reach = vec![vec![false; size]; size];
    for (v, row) in reach.iter_mut().enumerate() {
        row[v] = true;
    }
    for e in book.entries() {
        reach[e.student][m + e.course] = true;
        reach[m + e.course][e.student] = true;
    }
    for k in 0..size {
        for i in 0..size {
            if reach[i][k] {
                for j in 0..size {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..size)
        .map(|v| (0..size).find(|&u| reach[v][u]).unwrap())
        .collect()
}

/// Rows of the dense design: one per grade, plus one Σν = 0 row per
/// component. Columns are μ then ν.
fn design_rows(book: &GradeBook) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = book.num_students();
    let size = m + book.num_courses();
    let a = book
        .entries()
        .iter()
        .map(|e| {
            let mut row = vec![0.0; size];
            row[e.student] = 1.0;
            row[m + e.course] = 1.0;
            row
        })
        .collect();
    let reps = closure_components(book);
    let roots: Vec<usize> = reps.iter().copied().collect::<HashSet<_>>().into_iter().collect();
    let c = roots
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; size];
            for j in 0..book.num_courses() {
                if reps[m + j] == r {
                    row[m + j] = 1.0;
                }
            }
            row
        })
        .collect();
    (a, c)
}

/// Least squares through the KKT system of the normal equations with one
/// Σν = 0 row per component.
pub fn dense_ls(book: &GradeBook) -> (Vec<f64>, Vec<f64>) {
    let m = book.num_students();
    let size = m + book.num_courses();
    let (a, c) = design_rows(book);
    let k = size + c.len();
    let mut kkt = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for (row, e) in a.iter().zip(book.entries()) {
        for p in 0..size {
            if row[p] != 0.0 {
                rhs[p] += row[p] * e.grade;
                for q in 0..size {
                    kkt[p][q] += row[p] * row[q];
                }
            }
        }
    }
    for (r, crow) in c.iter().enumerate() {
        for p in 0..size {
            kkt[size + r][p] = crow[p];
            kkt[p][size + r] = crow[p];
        }
    }
    let x = solve_dense(kkt, rhs).expect("KKT system is nonsingular");
    (x[..m].to_vec(), x[m..size].to_vec())
}

/// Exhaustive LAD: an optimum sits where m + n − (#components) independent
/// residuals vanish, so try every such subset of grades.
pub fn brute_force_lad(book: &GradeBook) -> f64 {
    let m = book.num_students();
    let size = m + book.num_courses();
    let (a, c) = design_rows(book);
    let p = size - c.len();
    let grades: Vec<f64> = book.entries().iter().map(|e| e.grade).collect();
    let mut best = f64::INFINITY;
    combinations(a.len(), p, |subset| {
        let mut mat: Vec<Vec<f64>> = subset.iter().map(|&k| a[k].clone()).collect();
        let mut rhs: Vec<f64> = subset.iter().map(|&k| grades[k]).collect();
        mat.extend(c.iter().cloned());
        rhs.extend(std::iter::repeat(0.0).take(c.len()));
        if let Some(x) = solve_dense(mat, rhs) {
            best = best.min(mean_abs_residual(book, &x[..m], &x[m..]));
        }
    });
    best
}

// ---------------------------------------------------------------- LP oracle

#[derive(Debug, Clone)]
pub struct SmallLp {
    pub cost: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl SmallLp {
    pub fn problem(&self) -> LpProblem {
        let mut lp = LpProblem::new(self.cost.clone()).unwrap();
        for (k, &(l, u)) in self.bounds.iter().enumerate() {
            lp.set_bounds(k, l, u).unwrap();
        }
        for (a, rel, b) in &self.rows {
            let coeffs = a.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
            lp.add_constraint(coeffs, *rel, *b).unwrap();
        }
        lp
    }

    fn feasible(&self, x: &[f64], tol: f64) -> bool {
        self.bounds
            .iter()
            .zip(x)
            .all(|(&(l, u), &v)| v >= l - tol && v <= u + tol)
            && self.rows.iter().all(|(a, rel, b)| {
                let s: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                match rel {
                    Relation::Le => s <= b + tol,
                    Relation::Ge => s >= b - tol,
                    Relation::Eq => (s - b).abs() <= tol,
                }
            })
    }

    /// Minimum over every vertex (n independent active hyperplanes drawn
    /// from the rows and the box faces). `None` if no vertex is feasible.
    pub fn vertex_enumeration(&self) -> Option<f64> {
        let n = self.cost.len();
        let mut planes: Vec<(Vec<f64>, f64)> =
            self.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
        for (k, &(l, u)) in self.bounds.iter().enumerate() {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            planes.push((e.clone(), l));
            planes.push((e, u));
        }
        let mut best: Option<f64> = None;
        combinations(planes.len(), n, |subset| {
            let mat = subset.iter().map(|&k| planes[k].0.clone()).collect();
            let rhs = subset.iter().map(|&k| planes[k].1).collect();
            if let Some(x) = solve_dense(mat, rhs) {
                if self.feasible(&x, 1e-9) {
                    let obj: f64 = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
        });
        best
    }
}

// ---------------------------------------------------------------- strategies

fn dedupe(raw: Vec<(usize, usize, f64)>) -> GradeBook {
    let mut seen = HashSet::new();
    let records: Vec<GradeRecord> = raw
        .into_iter()
        .filter(|(s, c, _)| seen.insert((*s, *c)))
        .map(|(s, c, g)| GradeRecord::new(format!("s{s}"), format!("c{c}"), g))
        .collect();
    GradeBook::build(records).unwrap()
}

/// Sparse books with arbitrary real grades in [0, 4].
pub fn arb_book(max_ids: usize, max_records: usize) -> impl Strategy<Value = GradeBook> {
    prop::collection::vec((0..max_ids, 0..max_ids, 0.0..4.0f64), 1..=max_records).prop_map(dedupe)
}

/// Sparse books whose grades come from the thirds ladder (lots of ties).
pub fn arb_coarse_book(max_ids: usize, max_records: usize) -> impl Strategy<Value = GradeBook> {
    prop::collection::vec((0..max_ids, 0..max_ids, 0..=12u8), 1..=max_records)
        .prop_map(|v| dedupe(v.into_iter().map(|(s, c, g)| (s, c, g as f64 / 3.0)).collect()))
}

pub fn arb_complete_book(max_m: usize, max_n: usize) -> impl Strategy<Value = GradeBook> {
    (1..=max_m, 1..=max_n)
        .prop_flat_map(|(m, n)| prop::collection::vec(0.0..4.0f64, m * n).prop_map(move |g| (m, n, g)))
        .prop_map(|(m, n, g)| {
            dedupe(
                (0..m)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .zip(g)
                    .map(|((i, j), x)| (i, j, x))
                    .collect(),
            )
        })
}

/// Bounded LPs: every variable boxed, integer data. With `allow_infeasible`
/// roughly one in four instances is left unanchored and may be infeasible;
/// otherwise every instance has a feasible point.
pub fn arb_small_lp(allow_infeasible: bool) -> impl Strategy<Value = SmallLp> {
    (1..=6usize, 0..=8usize)
        .prop_flat_map(move |(n, rows)| {
            (
                prop::collection::vec(-5..=5i32, n),
                prop::collection::vec((-4..=0i32, 1..=5i32), n),
                prop::collection::vec((prop::collection::vec(-4..=4i32, n), 0..3u8, 0..=6i32), rows),
                any::<u64>(),
                if allow_infeasible { 0..4u8 } else { 1..4u8 },
            )
        })
        .prop_map(|(cost, boxes, rows, seed, anchor)| {
            let bounds: Vec<(f64, f64)> = boxes.iter().map(|&(l, w)| (l as f64, (l + w) as f64)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // A point inside the box; anchored rows are satisfied there.
            let x0: Vec<f64> = bounds
                .iter()
                .map(|&(l, u)| l + (u - l) * rng.random_range(0..=4) as f64 / 4.0)
                .collect();
            let rows = rows
                .into_iter()
                .map(|(a, rel, slack)| {
                    let a: Vec<f64> = a.into_iter().map(f64::from).collect();
                    let at: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
                    let (rel, b) = match (rel, anchor) {
                        (0, 0) => (Relation::Le, at - slack as f64),
                        (0, _) => (Relation::Le, at + slack as f64),
                        (1, _) => (Relation::Ge, at - slack as f64),
                        _ => (Relation::Eq, at),
                    };
                    (a, rel, b)
                })
                .collect();
            SmallLp {
                cost: cost.into_iter().map(f64::from).collect(),
                bounds,
                rows,
            }
        })
}

// ---------------------------------------------------------------- helpers

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(TestCaseError::fail(format!($($fmt)+)));
        }
    };
}

/// Same book with every grade mapped through `f`.
pub fn map_grades(book: &GradeBook, f: impl Fn(f64) -> f64) -> GradeBook {
    GradeBook::build(book.records().map(|r| GradeRecord::new(r.student, r.course, f(r.grade)))).unwrap()
}

/// Relabel ids (new names sort differently) and reverse the record order.
pub fn relabel(book: &GradeBook) -> GradeBook {
    let mut records: Vec<GradeRecord> = book
        .records()
        .map(|r| GradeRecord::new(format!("x{}", r.student), format!("y{}", r.course), r.grade))
        .collect();
    records.reverse();
    GradeBook::build(records).unwrap()
}

// ---------------------------------------------------------------- model

pub fn counts_sum(book: &GradeBook) -> Check {
    let n = book.len();
    ensure!(book.student_counts().iter().sum::<usize>() == n, "student counts");
    ensure!(book.course_counts().iter().sum::<usize>() == n, "course counts");
    Ok(())
}

pub fn components_match_closure(book: &GradeBook) -> Check {
    let labels = connected_components(book);
    let reps = closure_components(book);
    let m = book.num_students();
    let label = |v: usize| {
        if v < m {
            labels.of_student(v)
        } else {
            labels.of_course(v - m)
        }
    };
    for u in 0..reps.len() {
        for v in 0..reps.len() {
            ensure!(
                (reps[u] == reps[v]) == (label(u) == label(v)),
                "nodes {u} and {v} disagree"
            );
        }
    }
    let distinct: HashSet<usize> = reps.iter().copied().collect();
    ensure!(labels.count() == distinct.len(), "component count");
    Ok(())
}

pub fn baselines_reorder_invariant(book: &GradeBook) -> Check {
    let reversed = GradeBook::build(book.records().collect::<Vec<_>>().into_iter().rev()).unwrap();
    for id in book.student_ids() {
        let a = gradefit::model::gpa(book, id).unwrap();
        let b = gradefit::model::gpa(&reversed, id).unwrap();
        ensure!(close(a, b, 1e-12), "gpa of {id}: {a} vs {b}");
    }
    for id in book.course_ids() {
        let a = gradefit::model::course_average(book, id).unwrap();
        let b = gradefit::model::course_average(&reversed, id).unwrap();
        ensure!(close(a, b, 1e-12), "average of {id}: {a} vs {b}");
    }
    Ok(())
}

pub fn baselines_translate(book: &GradeBook, c: f64) -> Check {
    let shifted = map_grades(book, |x| x + c);
    for (a, b) in all_gpas(book).iter().zip(all_gpas(&shifted)) {
        ensure!(close(a + c, b, 1e-12), "gpa {a} + {c} vs {b}");
    }
    for (a, b) in all_course_averages(book).iter().zip(all_course_averages(&shifted)) {
        ensure!(close(a + c, b, 1e-12), "average {a} + {c} vs {b}");
    }
    Ok(())
}

// ---------------------------------------------------------------- lsq

pub fn ls_stationary(book: &GradeBook) -> Check {
    let fit = fit_ls(book);
    let mut by_student = vec![0.0; book.num_students()];
    let mut by_course = vec![0.0; book.num_courses()];
    for e in book.entries() {
        let r = e.grade - fit.mu[e.student] - fit.nu[e.course];
        by_student[e.student] += r;
        by_course[e.course] += r;
    }
    for (i, (s, n)) in by_student.iter().zip(book.student_counts()).enumerate() {
        ensure!(s.abs() <= 1e-8 * n as f64, "student {i} residual sum {s}");
    }
    for (j, (s, m)) in by_course.iter().zip(book.course_counts()).enumerate() {
        ensure!(s.abs() <= 1e-8 * m as f64, "course {j} residual sum {s}");
    }
    Ok(())
}

pub fn ls_matches_complete(book: &GradeBook) -> Check {
    let sparse = fit_ls(book);
    let closed = fit_ls_complete(book).unwrap();
    for (a, b) in sparse.mu.iter().zip(&closed.mu).chain(sparse.nu.iter().zip(&closed.nu)) {
        ensure!(close(*a, *b, 1e-8), "{a} vs {b}");
    }
    // And the textbook closed form: row means, column means less the grand mean.
    let (m, n) = (book.num_students(), book.num_courses());
    let mut rows = vec![0.0; m];
    let mut cols = vec![0.0; n];
    for e in book.entries() {
        rows[e.student] += e.grade / n as f64;
        cols[e.course] += e.grade / m as f64;
    }
    let grand = rows.iter().sum::<f64>() / m as f64;
    for (i, r) in rows.iter().enumerate() {
        ensure!(close(sparse.mu[i], *r, 1e-8), "row mean {i}");
    }
    for (j, c) in cols.iter().enumerate() {
        ensure!(close(sparse.nu[j], c - grand, 1e-8), "column mean {j}");
    }
    Ok(())
}

pub fn ls_matches_dense(book: &GradeBook) -> Check {
    let fit = fit_ls(book);
    let (mu, nu) = dense_ls(book);
    let want = mean_squared_residual(book, &mu, &nu);
    ensure!(close(fit.objective, want, 1e-6), "objective {} vs {want}", fit.objective);
    for (a, b) in fit.mu.iter().zip(&mu).chain(fit.nu.iter().zip(&nu)) {
        ensure!(close(*a, *b, 1e-6), "parameter {a} vs {b}");
    }
    Ok(())
}

pub fn ls_translation(book: &GradeBook, c: f64) -> Check {
    let a = fit_ls(book);
    let b = fit_ls(&map_grades(book, |x| x + c));
    for (p, q) in a.mu.iter().zip(&b.mu) {
        ensure!(close(p + c, *q, 1e-8), "μ {p} + {c} vs {q}");
    }
    for (p, q) in a.nu.iter().zip(&b.nu) {
        ensure!(close(*p, *q, 1e-8), "ν {p} vs {q}");
    }
    ensure!(close(a.objective, b.objective, 1e-8), "objective");
    Ok(())
}

pub fn ls_scaling(book: &GradeBook, alpha: f64) -> Check {
    let a = fit_ls(book);
    let b = fit_ls(&map_grades(book, |x| alpha * x));
    let tol = 1e-8 * alpha.max(1.0);
    for (p, q) in a.mu.iter().zip(&b.mu).chain(a.nu.iter().zip(&b.nu)) {
        ensure!(close(alpha * p, *q, tol), "{alpha}·{p} vs {q}");
    }
    let want = alpha * alpha * a.objective;
    ensure!(close(want, b.objective, 1e-8 * want.max(1.0)), "objective");
    Ok(())
}

pub fn ls_permutation(book: &GradeBook) -> Check {
    let other = relabel(book);
    let a = fit_ls(book);
    let b = fit_ls(&other);
    for (i, id) in book.student_ids().iter().enumerate() {
        let q = b.mu_of(&other, &format!("x{id}")).unwrap();
        ensure!(close(a.mu[i], q, 1e-8), "μ of {id}");
    }
    for (j, id) in book.course_ids().iter().enumerate() {
        let q = b.nu_of(&other, &format!("y{id}")).unwrap();
        ensure!(close(a.nu[j], q, 1e-8), "ν of {id}");
    }
    ensure!(close(a.objective, b.objective, 1e-10), "objective");
    ensure!(close(a.scale, b.scale, 1e-10), "scale");
    Ok(())
}

pub fn ls_component_normalized(book: &GradeBook) -> Check {
    let fit = fit_ls(book);
    let reps = closure_components(book);
    let m = book.num_students();
    let roots: HashSet<usize> = reps.iter().copied().collect();
    for r in roots {
        let members: Vec<usize> = (0..book.num_courses()).filter(|&j| reps[m + j] == r).collect();
        let size = members.len() + (0..m).filter(|&i| reps[i] == r).count();
        let sum: f64 = members.iter().map(|&j| fit.nu[j]).sum();
        ensure!(sum.abs() <= 1e-8 * size as f64, "component sum {sum}");
    }
    Ok(())
}

pub fn ls_locally_optimal(book: &GradeBook, seed: u64) -> Check {
    let fit = fit_ls(book);
    let base = mean_squared_residual(book, &fit.mu, &fit.nu);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let mu: Vec<f64> = fit.mu.iter().map(|v| v + rng.random_range(-1e-3..=1e-3)).collect();
        let nu: Vec<f64> = fit.nu.iter().map(|v| v + rng.random_range(-1e-3..=1e-3)).collect();
        let obj = mean_squared_residual(book, &mu, &nu);
        ensure!(obj >= base - 1e-12, "perturbation lowered {base} to {obj}");
    }
    Ok(())
}

// ---------------------------------------------------------------- lad

pub fn lad_lp_beats_heuristics(book: &GradeBook) -> Check {
    let lp = fit_lad_lp(book);
    ensure!(lp.diagnostics.converged, "LP not optimal: {:?}", lp.diagnostics);
    let alt = fit_lad_alternating(book);
    let ls = fit_ls(book);
    let ls_l1 = mean_abs_residual(book, &ls.mu, &ls.nu);
    let tol = 1e-9;
    ensure!(lp.objective <= alt.objective + tol, "LP {} > alternating {}", lp.objective, alt.objective);
    ensure!(lp.objective <= ls_l1 + tol, "LP {} > LS L1 {ls_l1}", lp.objective);
    Ok(())
}

pub fn lad_matches_breakpoints(book: &GradeBook) -> Check {
    let lp = fit_lad_lp(book);
    let want = brute_force_lad(book);
    ensure!(close(lp.objective, want, 1e-6), "LP {} vs exhaustive {want}", lp.objective);
    Ok(())
}

pub fn lad_objective_equivariant(book: &GradeBook, c: f64) -> Check {
    let base = fit_lad_lp(book).objective;
    let shifted = fit_lad_lp(&map_grades(book, |x| x + c)).objective;
    ensure!(close(base, shifted, 1e-8), "translation: {base} vs {shifted}");
    let relabelled = fit_lad_lp(&relabel(book)).objective;
    ensure!(close(base, relabelled, 1e-8), "permutation: {base} vs {relabelled}");
    Ok(())
}

pub fn lad_alternating_descends(book: &GradeBook) -> Check {
    let (_, trace) = fit_lad_alternating_traced(book);
    for w in trace.windows(2) {
        ensure!(w[1] <= w[0] + 1e-12, "objective rose from {} to {}", w[0], w[1]);
    }
    Ok(())
}

// ---------------------------------------------------------------- linprog

pub fn lp_matches_vertices(lp: &SmallLp) -> Check {
    let problem = lp.problem();
    let sol = lp_solve(&problem);
    match lp.vertex_enumeration() {
        None => ensure!(sol.status == LpStatus::Infeasible, "expected infeasible, got {:?}", sol.status),
        Some(best) => {
            ensure!(sol.status == LpStatus::Optimal, "expected optimal, got {:?}", sol.status);
            ensure!(close(sol.objective, best, 1e-6), "objective {} vs vertex {best}", sol.objective);
            ensure!(
                problem.max_violation(&sol.x) <= 1e-8,
                "violation {}",
                problem.max_violation(&sol.x)
            );
            ensure!(
                close(problem.evaluate(&sol.x), sol.objective, 1e-9),
                "reported objective does not match x"
            );
        }
    }
    Ok(())
}

pub fn lp_objective_scaling(lp: &SmallLp, alpha: f64) -> Check {
    let base = lp_solve(&lp.problem());
    if base.status != LpStatus::Optimal {
        return Ok(());
    }
    let mut scaled = lp.clone();
    scaled.cost.iter_mut().for_each(|c| *c *= alpha);
    let sol = lp_solve(&scaled.problem());
    ensure!(sol.status == LpStatus::Optimal, "scaled LP not optimal");
    let want = alpha * base.objective;
    ensure!(close(sol.objective, want, 1e-6 * want.abs().max(1.0)), "{} vs {want}", sol.objective);
    // The scaled argmin is optimal for the original cost as well.
    let back = lp.problem().evaluate(&sol.x);
    ensure!(close(back, base.objective, 1e-6 * base.objective.abs().max(1.0)), "argmin moved");
    Ok(())
}

// ---------------------------------------------------------------- simulate

/// Largest |fit − truth| over μ and ν after centering the true ν on the
/// courses present (the book must be connected).
pub fn recovery_error(book: &GradeBook, truth: &gradefit::simulate::GroundTruth, fit: &FitResult) -> f64 {
    let shift = truth.nu.iter().map(|(_, v)| v).sum::<f64>() / truth.nu.len() as f64;
    let mut worst = 0.0f64;
    for (id, v) in &truth.mu {
        if let Some(est) = fit.mu_of(book, id) {
            worst = worst.max((est - (v + shift)).abs());
        }
    }
    for (id, v) in &truth.nu {
        let est = fit.nu_of(book, id).expect("course in book");
        worst = worst.max((est - (v - shift)).abs());
    }
    worst
}

pub fn zero_noise_recovered(spec: &SyntheticSpec, tol: f64) -> Check {
    let syn = generate(spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    if !syn.connected {
        return Err(TestCaseError::reject("disconnected design"));
    }
    for fit in [fit_ls(&syn.book), fit_lad_lp(&syn.book)] {
        let err = recovery_error(&syn.book, &syn.truth, &fit);
        ensure!(err <= tol, "{} recovery error {err}", fit.method);
    }
    Ok(())
}

pub fn generation_deterministic(spec: &SyntheticSpec) -> Check {
    let a = generate(spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = generate(spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure!(render_book(&a.book) == render_book(&b.book), "books differ");
    ensure!(a.truth == b.truth, "truth differs");
    Ok(())
}

// ---------------------------------------------------------------- records / reports

pub fn render_round_trip(book: &GradeBook) -> Check {
    let opts = ParseOptions {
        strict_range: false,
        ..ParseOptions::default()
    };
    let again = parse_book_str(&render_book(book), &opts).map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure!(
        again.records().collect::<Vec<_>>() == book.records().collect::<Vec<_>>(),
        "records differ after round trip"
    );
    Ok(())
}

pub fn report_order_total(book: &GradeBook) -> Check {
    let fit = fit_ls(book);
    let courses = course_rows(book, &fit);
    let students = student_rows(book, &fit);
    for w in courses.windows(2) {
        ensure!(
            w[0].estimate < w[1].estimate || (w[0].estimate == w[1].estimate && w[0].id < w[1].id),
            "course order {} / {}",
            w[0].id,
            w[1].id
        );
    }
    for w in students.windows(2) {
        ensure!(
            w[0].estimate > w[1].estimate || (w[0].estimate == w[1].estimate && w[0].id < w[1].id),
            "student order {} / {}",
            w[0].id,
            w[1].id
        );
    }
    // Deterministic: a second pass gives identical rows.
    ensure!(course_rows(book, &fit) == courses, "course rows changed");
    ensure!(student_rows(book, &fit) == students, "student rows changed");
    Ok(())
}

pub fn csv_idempotent(book: &GradeBook) -> Check {
    let opts = ParseOptions {
        strict_range: false,
        ..ParseOptions::default()
    };
    let fit = fit_ls(book);
    let csv = estimates_csv(book, &fit);
    let rows = parse_estimates_csv(&csv).map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure!(rows.len() == book.num_students() + book.num_courses(), "row count");
    for r in &rows {
        let (est, se) = match r.kind {
            EntityKind::Student => {
                let i = book.student_index(&r.id).unwrap();
                (fit.mu[i], fit.stderr_mu[i])
            }
            EntityKind::Course => {
                let j = book.course_index(&r.id).unwrap();
                (fit.nu[j], fit.stderr_nu[j])
            }
        };
        ensure!(r.estimate == est && r.stderr == se, "{} did not survive the CSV", r.id);
    }
    // Through the text format and back: the fit and its CSV are unchanged.
    let reread = parse_book_str(&render_book(book), &opts).unwrap();
    ensure!(estimates_csv(&reread, &fit_ls(&reread)) == csv, "refit CSV differs");
    Ok(())
}
