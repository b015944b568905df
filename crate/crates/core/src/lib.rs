//! Separating student aptitude from course grade inflation.
//!
//! Every grade is modelled as `X_ij = μ_i + ν_j + ε_ij`: the aptitude of
//! student `i` plus the inflatedness of course `j` plus noise, with the ν
//! normalized to sum to zero within each connected group of courses. The
//! crate fits this model to sparse grade data by least squares ([`lsq`]) or
//! least absolute deviations ([`lad`], backed by the simplex solver in
//! [`linprog`]), and reports estimates with error bars.
//!
//! ```
//! use gradefit::{fixtures, lsq};
//!
//! let book = fixtures::beatle();
//! let fit = lsq::fit_ls(&book);
//! let eco = fit.nu_of(&book, "ECO").unwrap();
//! assert!((eco - 0.84).abs() < 0.005);
//! ```

pub mod fit;
pub mod fixtures;
pub mod lad;
pub mod linprog;
pub mod lsq;
pub mod model;
pub mod records;
pub mod report;
pub mod simulate;

pub use fit::{Diagnostics, FitResult, Method};
pub use model::{GradeBook, GradeRecord, GradeScale};
