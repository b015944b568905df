//! Plain-text grade records.
//!
//! One record per line: `student course grade`, separated by whitespace
//! and/or commas. The grade is a number of grade points or a letter looked
//! up in the active [`GradeScale`]. Blank lines and lines whose first
//! non-blank character is `#` are skipped. Ids are kept byte for byte.

use std::fs;
use std::io::{self, BufRead};
use std::path::Path;

use thiserror::Error;

use crate::model::{GradeBook, GradeRecord, GradeScale, ModelError};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub scale: GradeScale,
    /// Reject grades outside the scale's [min, max] range.
    pub strict_range: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            scale: GradeScale::standard(),
            strict_range: true,
        }
    }
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub fn parse_records(
    reader: impl BufRead,
    opts: &ParseOptions,
) -> Result<Vec<GradeRecord>, InputError> {
    let (lo, hi) = (opts.scale.min_points(), opts.scale.max_points());
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| InputError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if is_skipped(&line) {
            continue;
        }
        let parts: Vec<&str> = fields(&line).collect();
        let [student, course, grade] = parts[..] else {
            return Err(InputError::Parse {
                line: line_no,
                message: format!("expected 3 fields (student, course, grade), found {}", parts.len()),
            });
        };
        let points = resolve_grade(grade, &opts.scale).ok_or_else(|| InputError::Parse {
            line: line_no,
            message: format!("invalid grade {grade:?}"),
        })?;
        if opts.strict_range && !(lo..=hi).contains(&points) {
            return Err(InputError::Parse {
                line: line_no,
                message: format!("grade {grade:?} outside the scale range [{lo}, {hi}]"),
            });
        }
        out.push(GradeRecord::new(student, course, points));
    }
    Ok(out)
}

fn resolve_grade(token: &str, scale: &GradeScale) -> Option<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        Ok(_) => None,
        Err(_) => scale.points(token),
    }
}

pub fn parse_book(reader: impl BufRead, opts: &ParseOptions) -> Result<GradeBook, InputError> {
    Ok(GradeBook::build(parse_records(reader, opts)?)?)
}

pub fn read_book(path: &Path, opts: &ParseOptions) -> Result<GradeBook, InputError> {
    let file = fs::File::open(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_book(io::BufReader::new(file), opts)
}

pub fn parse_book_str(text: &str, opts: &ParseOptions) -> Result<GradeBook, InputError> {
    parse_book(text.as_bytes(), opts)
}

/// Write a book in the record format. Grades use the shortest decimal
/// form that reads back to the same number.
pub fn render_book(book: &GradeBook) -> String {
    let mut out = String::with_capacity(book.len() * 16);
    for r in book.records() {
        out.push_str(&r.student);
        out.push(' ');
        out.push_str(&r.course);
        out.push(' ');
        out.push_str(&r.grade.to_string());
        out.push('\n');
    }
    out
}

/// Parse a letter ladder: one `letter points` pair per line, best grade
/// first, same separators and comments as grade records.
pub fn parse_scale(text: &str) -> Result<GradeScale, InputError> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if is_skipped(line) {
            continue;
        }
        let parts: Vec<&str> = fields(line).collect();
        let [letter, points] = parts[..] else {
            return Err(InputError::Parse {
                line: idx + 1,
                message: format!("expected 2 fields (letter, points), found {}", parts.len()),
            });
        };
        let points: f64 = points.parse().map_err(|_| InputError::Parse {
            line: idx + 1,
            message: format!("invalid points {points:?}"),
        })?;
        entries.push((letter.to_string(), points));
    }
    Ok(GradeScale::new(entries)?)
}
