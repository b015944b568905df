//! Grade data: the grade book, letter ladders, enrollment connectivity, and
//! the single-factor baselines (GPA per student, average per course).

mod book;
mod components;
mod scale;

pub use book::{Entry, GradeBook, GradeRecord};
pub use components::{connected_components, ComponentLabeling};
pub(crate) use components::UnionFind;
pub use scale::GradeScale;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("no grade records")]
    Empty,
    #[error("duplicate grade for student {student:?} in course {course:?}")]
    DuplicatePair { student: String, course: String },
    #[error("grade for student {student:?} in course {course:?} is not finite")]
    NonFiniteGrade { student: String, course: String },
    #[error("unknown student {0:?}")]
    UnknownStudent(String),
    #[error("unknown course {0:?}")]
    UnknownCourse(String),
    #[error("invalid grade scale: {0}")]
    InvalidScale(String),
}

/// Grade-point average of one student.
pub fn gpa(book: &GradeBook, student: &str) -> Result<f64, ModelError> {
    let i = book
        .student_index(student)
        .ok_or_else(|| ModelError::UnknownStudent(student.to_string()))?;
    Ok(student_mean(book, i))
}

/// Average grade given in one course.
pub fn course_average(book: &GradeBook, course: &str) -> Result<f64, ModelError> {
    let j = book
        .course_index(course)
        .ok_or_else(|| ModelError::UnknownCourse(course.to_string()))?;
    Ok(course_mean(book, j))
}

pub fn student_mean(book: &GradeBook, i: usize) -> f64 {
    mean(book.courses_of(i).iter().map(|&k| book.entries()[k].grade))
}

pub fn course_mean(book: &GradeBook, j: usize) -> f64 {
    mean(book.students_of(j).iter().map(|&k| book.entries()[k].grade))
}

/// GPA for every student, by student index.
pub fn all_gpas(book: &GradeBook) -> Vec<f64> {
    (0..book.num_students()).map(|i| student_mean(book, i)).collect()
}

/// Course average for every course, by course index.
pub fn all_course_averages(book: &GradeBook) -> Vec<f64> {
    (0..book.num_courses()).map(|j| course_mean(book, j)).collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}
