//! Small worked examples with known answers.
//!
//! Grades are given as letters; `beatle` uses the standard ladder while the
//! truncated and circulant schools use the exact-thirds ladder, under which
//! their trends are exactly additive.

use crate::model::{GradeBook, GradeRecord, GradeScale};

/// Four students choosing four of six courses, each course grading a third
/// of a letter more generously than the one before.
pub const BEATLE: &[(&str, &str, &str)] = &[
    ("John", "MAT", "B-"),
    ("John", "CHE", "B"),
    ("John", "ANT", "B+"),
    ("John", "REL", "A-"),
    ("Paul", "MAT", "C+"),
    ("Paul", "CHE", "B-"),
    ("Paul", "REL", "B+"),
    ("Paul", "POL", "A-"),
    ("George", "CHE", "C+"),
    ("George", "ANT", "B-"),
    ("George", "POL", "B+"),
    ("George", "ECO", "A-"),
    ("Ringo", "ANT", "C+"),
    ("Ringo", "REL", "B-"),
    ("Ringo", "POL", "B"),
    ("Ringo", "ECO", "B+"),
];

pub const BEATLE_STUDENTS: [&str; 4] = ["John", "Paul", "George", "Ringo"];
pub const BEATLE_COURSES: [&str; 6] = ["MAT", "CHE", "ANT", "REL", "POL", "ECO"];

pub const EIGHT_STUDENTS: [&str; 8] = [
    "Sean", "Yoko", "John", "Paul", "George", "Ringo", "Jane", "Heather",
];
pub const EIGHT_COURSES: [&str; 8] = ["MAT", "CHE", "ANT", "REL", "POL", "ECO", "HIS", "SOC"];

const DIAGONAL: [&str; 5] = ["B-", "B", "B+", "A-", "A"];

/// Eight students on a diagonal band: student `s` takes courses `s-2 ..= s+2`
/// (clipped to the catalogue) with grades B-, B, B+, A-, A left to right.
pub fn truncated_letters() -> Vec<(&'static str, &'static str, &'static str)> {
    let mut out = Vec::new();
    for (s, student) in EIGHT_STUDENTS.iter().enumerate() {
        for (k, letter) in DIAGONAL.iter().enumerate() {
            let c = s as isize - 2 + k as isize;
            if (0..8).contains(&c) {
                out.push((*student, EIGHT_COURSES[c as usize], *letter));
            }
        }
    }
    out
}

/// The truncated band with its corners wrapped around, so every student and
/// every course has exactly the five grades B- .. A.
pub fn circulant_letters() -> Vec<(&'static str, &'static str, &'static str)> {
    let mut out = Vec::new();
    for (s, student) in EIGHT_STUDENTS.iter().enumerate() {
        for (k, letter) in DIAGONAL.iter().enumerate() {
            let c = (s as isize - 2 + k as isize).rem_euclid(8);
            out.push((*student, EIGHT_COURSES[c as usize], *letter));
        }
    }
    out
}

pub fn book_from_letters(letters: &[(&str, &str, &str)], scale: &GradeScale) -> GradeBook {
    GradeBook::build(letters.iter().map(|(s, c, l)| {
        GradeRecord::new(*s, *c, scale.points(l).expect("letter on ladder"))
    }))
    .expect("fixture is a valid grade book")
}

pub fn beatle() -> GradeBook {
    book_from_letters(BEATLE, &GradeScale::standard())
}

pub fn truncated() -> GradeBook {
    book_from_letters(&truncated_letters(), &GradeScale::thirds())
}

pub fn circulant() -> GradeBook {
    book_from_letters(&circulant_letters(), &GradeScale::thirds())
}
