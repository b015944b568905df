use super::GradeBook;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Connected components of the student/course enrollment graph.
///
/// Component labels are numbered 0.. in order of first appearance while
/// scanning the grade entries in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    student_component: Vec<usize>,
    course_component: Vec<usize>,
    count: usize,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_connected(&self) -> bool {
        self.count == 1
    }

    pub fn of_student(&self, i: usize) -> usize {
        self.student_component[i]
    }

    pub fn of_course(&self, j: usize) -> usize {
        self.course_component[j]
    }

    pub fn student_components(&self) -> &[usize] {
        &self.student_component
    }

    pub fn course_components(&self) -> &[usize] {
        &self.course_component
    }

    /// Course indices grouped by component.
    pub fn courses_by_component(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.count];
        for (j, &c) in self.course_component.iter().enumerate() {
            groups[c].push(j);
        }
        groups
    }
}

pub fn connected_components(book: &GradeBook) -> ComponentLabeling {
    let m = book.num_students();
    let n = book.num_courses();
    // Students are nodes 0..m, courses m..m+n.
    let mut uf = UnionFind::new(m + n);
    for e in book.entries() {
        uf.union(e.student, m + e.course);
    }
    let mut label_of_root = vec![usize::MAX; m + n];
    let mut student_component = vec![0; m];
    let mut course_component = vec![0; n];
    let mut count = 0;
    for e in book.entries() {
        let root = uf.find(e.student);
        if label_of_root[root] == usize::MAX {
            label_of_root[root] = count;
            count += 1;
        }
        student_component[e.student] = label_of_root[root];
        course_component[e.course] = label_of_root[root];
    }
    ComponentLabeling {
        student_component,
        course_component,
        count,
    }
}
