use std::collections::{HashMap, HashSet};

use super::ModelError;

/// One grade: a student, a course, and the grade in grade points.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeRecord {
    pub student: String,
    pub course: String,
    pub grade: f64,
}

impl GradeRecord {
    pub fn new(student: impl Into<String>, course: impl Into<String>, grade: f64) -> Self {
        Self {
            student: student.into(),
            course: course.into(),
            grade,
        }
    }
}

/// A grade stored by entity index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub student: usize,
    pub course: usize,
    pub grade: f64,
}

/// Immutable sparse set of grades indexed both ways.
///
/// Students and courses are numbered in order of first appearance in the
/// input. `courses_of(i)` is the course set of student `i` and `students_of(j)`
/// the student set of course `j`; both list entry indices in input order.
#[derive(Debug, Clone)]
pub struct GradeBook {
    students: Vec<String>,
    courses: Vec<String>,
    student_ids: HashMap<String, usize>,
    course_ids: HashMap<String, usize>,
    entries: Vec<Entry>,
    by_student: Vec<Vec<usize>>,
    by_course: Vec<Vec<usize>>,
}

impl GradeBook {
    pub fn build(records: impl IntoIterator<Item = GradeRecord>) -> Result<Self, ModelError> {
        let mut book = GradeBook {
            students: Vec::new(),
            courses: Vec::new(),
            student_ids: HashMap::new(),
            course_ids: HashMap::new(),
            entries: Vec::new(),
            by_student: Vec::new(),
            by_course: Vec::new(),
        };
        let mut seen = HashSet::new();
        for rec in records {
            if !rec.grade.is_finite() {
                return Err(ModelError::NonFiniteGrade {
                    student: rec.student,
                    course: rec.course,
                });
            }
            let i = intern(&mut book.students, &mut book.student_ids, rec.student);
            let j = intern(&mut book.courses, &mut book.course_ids, rec.course);
            if !seen.insert((i, j)) {
                return Err(ModelError::DuplicatePair {
                    student: book.students[i].clone(),
                    course: book.courses[j].clone(),
                });
            }
            if i == book.by_student.len() {
                book.by_student.push(Vec::new());
            }
            if j == book.by_course.len() {
                book.by_course.push(Vec::new());
            }
            let k = book.entries.len();
            book.by_student[i].push(k);
            book.by_course[j].push(k);
            book.entries.push(Entry {
                student: i,
                course: j,
                grade: rec.grade,
            });
        }
        if book.entries.is_empty() {
            return Err(ModelError::Empty);
        }
        Ok(book)
    }

    pub fn from_triples<'a>(
        triples: impl IntoIterator<Item = (&'a str, &'a str, f64)>,
    ) -> Result<Self, ModelError> {
        Self::build(
            triples
                .into_iter()
                .map(|(s, c, g)| GradeRecord::new(s, c, g)),
        )
    }

    /// Number of students (m).
    pub fn num_students(&self) -> usize {
        self.students.len()
    }

    /// Number of courses (n).
    pub fn num_courses(&self) -> usize {
        self.courses.len()
    }

    /// Number of grades (N).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every student took every course.
    pub fn is_complete(&self) -> bool {
        self.len() == self.num_students() * self.num_courses()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn student_id(&self, i: usize) -> &str {
        &self.students[i]
    }

    pub fn course_id(&self, j: usize) -> &str {
        &self.courses[j]
    }

    pub fn student_ids(&self) -> &[String] {
        &self.students
    }

    pub fn course_ids(&self) -> &[String] {
        &self.courses
    }

    pub fn student_index(&self, id: &str) -> Option<usize> {
        self.student_ids.get(id).copied()
    }

    pub fn course_index(&self, id: &str) -> Option<usize> {
        self.course_ids.get(id).copied()
    }

    /// Entry indices of student `i`'s grades.
    pub fn courses_of(&self, i: usize) -> &[usize] {
        &self.by_student[i]
    }

    /// Entry indices of course `j`'s grades.
    pub fn students_of(&self, j: usize) -> &[usize] {
        &self.by_course[j]
    }

    /// n_i for every student.
    pub fn student_counts(&self) -> Vec<usize> {
        self.by_student.iter().map(Vec::len).collect()
    }

    /// m_j for every course.
    pub fn course_counts(&self) -> Vec<usize> {
        self.by_course.iter().map(Vec::len).collect()
    }

    pub fn grade(&self, student: &str, course: &str) -> Option<f64> {
        let i = self.student_index(student)?;
        let j = self.course_index(course)?;
        self.by_student[i]
            .iter()
            .map(|&k| self.entries[k])
            .find(|e| e.course == j)
            .map(|e| e.grade)
    }

    /// Records in input order with their original ids.
    pub fn records(&self) -> impl Iterator<Item = GradeRecord> + '_ {
        self.entries.iter().map(|e| GradeRecord {
            student: self.students[e.student].clone(),
            course: self.courses[e.course].clone(),
            grade: e.grade,
        })
    }

    pub fn grade_range(&self) -> (f64, f64) {
        self.entries
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e.grade), hi.max(e.grade))
            })
    }
}

fn intern(names: &mut Vec<String>, ids: &mut HashMap<String, usize>, name: String) -> usize {
    if let Some(&k) = ids.get(&name) {
        return k;
    }
    let k = names.len();
    ids.insert(name.clone(), k);
    names.push(name);
    k
}
