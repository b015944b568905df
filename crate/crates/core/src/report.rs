//! Ranked text reports and the estimates CSV.

use std::fmt::Write;

use thiserror::Error;

use crate::fit::FitResult;
use crate::model::GradeBook;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub id: String,
    pub estimate: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Courses, least inflated first. Ties go to the smaller id (byte order).
pub fn course_rows(book: &GradeBook, fit: &FitResult) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = (0..book.num_courses())
        .map(|j| ReportRow {
            id: book.course_id(j).to_string(),
            estimate: fit.nu[j],
            stderr: fit.stderr_nu[j],
            count: fit.course_counts[j],
        })
        .collect();
    rows.sort_by(|a, b| {
        a.estimate
            .total_cmp(&b.estimate)
            .then_with(|| a.id.as_bytes().cmp(b.id.as_bytes()))
    });
    rows
}

/// Students, highest aptitude first. Ties go to the smaller id (byte order).
pub fn student_rows(book: &GradeBook, fit: &FitResult) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = (0..book.num_students())
        .map(|i| ReportRow {
            id: book.student_id(i).to_string(),
            estimate: fit.mu[i],
            stderr: fit.stderr_mu[i],
            count: fit.student_counts[i],
        })
        .collect();
    rows.sort_by(|a, b| {
        b.estimate
            .total_cmp(&a.estimate)
            .then_with(|| a.id.as_bytes().cmp(b.id.as_bytes()))
    });
    rows
}

/// Two decimals with an explicit sign; negative zero prints as `+0.00`.
pub fn signed2(v: f64) -> String {
    let s = format!("{v:+.2}");
    if s == "-0.00" {
        "+0.00".to_string()
    } else {
        s
    }
}

pub fn format_row(row: &ReportRow, id_width: usize, count_width: usize) -> String {
    format!(
        "{:<id_width$}  {} ± {:.2}  {:>count_width$}",
        row.id,
        signed2(row.estimate),
        row.stderr,
        row.count
    )
}

/// Render rows under `title`, dropping rows with `count < min_count`.
pub fn render_report(title: &str, rows: &[ReportRow], min_count: usize, notes: &[String]) -> String {
    let shown: Vec<&ReportRow> = rows.iter().filter(|r| r.count >= min_count).collect();
    let id_width = shown.iter().map(|r| r.id.len()).max().unwrap_or(0).max(2);
    let count_width = shown
        .iter()
        .map(|r| r.count.to_string().len())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    writeln!(out, "# {title}").unwrap();
    for note in notes {
        writeln!(out, "# {note}").unwrap();
    }
    if min_count > 1 {
        writeln!(
            out,
            "# showing {} of {} rows with count >= {min_count}",
            shown.len(),
            rows.len()
        )
        .unwrap();
    }
    for row in shown {
        out.push_str(&format_row(row, id_width, count_width));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Student,
    Course,
}

impl EntityKind {
    fn as_str(self) -> &'static str {
        match self {
            EntityKind::Student => "student",
            EntityKind::Course => "course",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub kind: EntityKind,
    pub id: String,
    pub estimate: f64,
    pub stderr: f64,
    pub count: usize,
}

pub const CSV_HEADER: &str = "entity_type,id,estimate,stderr,count";

/// All estimates at full precision: students then courses, in book order.
pub fn estimates_csv(book: &GradeBook, fit: &FitResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..book.num_students() {
        push_csv_row(
            &mut out,
            EntityKind::Student,
            book.student_id(i),
            fit.mu[i],
            fit.stderr_mu[i],
            fit.student_counts[i],
        );
    }
    for j in 0..book.num_courses() {
        push_csv_row(
            &mut out,
            EntityKind::Course,
            book.course_id(j),
            fit.nu[j],
            fit.stderr_nu[j],
            fit.course_counts[j],
        );
    }
    out
}

fn push_csv_row(out: &mut String, kind: EntityKind, id: &str, est: f64, se: f64, count: usize) {
    let id = if id.contains([',', '"', '\n']) {
        format!("\"{}\"", id.replace('"', "\"\""))
    } else {
        id.to_string()
    };
    writeln!(out, "{},{id},{est},{se},{count}", kind.as_str()).unwrap();
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("estimates CSV line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

pub fn parse_estimates_csv(text: &str) -> Result<Vec<EstimateRow>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(CsvError {
                line: 1,
                message: format!("expected header {CSV_HEADER:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let err = |message: String| CsvError {
            line: idx + 1,
            message,
        };
        if line.is_empty() {
            continue;
        }
        let fields = split_csv(line).map_err(&err)?;
        let [kind, id, est, se, count] = &fields[..] else {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        };
        let kind = match kind.as_str() {
            "student" => EntityKind::Student,
            "course" => EntityKind::Course,
            other => return Err(err(format!("unknown entity type {other:?}"))),
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("invalid number {s:?}")));
        rows.push(EstimateRow {
            kind,
            id: id.clone(),
            estimate: num(est)?,
            stderr: num(se)?,
            count: count
                .parse()
                .map_err(|_| err(format!("invalid count {count:?}")))?,
        });
    }
    Ok(rows)
}

fn split_csv(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match (quoted, c) {
            (true, '"') if chars.peek() == Some(&'"') => {
                chars.next();
                cur.push('"');
            }
            (true, '"') => quoted = false,
            (false, '"') if cur.is_empty() => quoted = true,
            (false, ',') => fields.push(std::mem::take(&mut cur)),
            (_, c) => cur.push(c),
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    fields.push(cur);
    Ok(fields)
}
