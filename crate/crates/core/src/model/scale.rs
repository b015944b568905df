use std::collections::HashMap;
use std::fmt;

use super::ModelError;

/// Letter grade ladder mapping letters to grade points.
///
/// Entries are kept in ladder order, best grade first, with strictly
/// decreasing points. Aliases (such as `A+`) resolve to a point value
/// without taking a rung on the ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeScale {
    ladder: Vec<(String, f64)>,
    aliases: HashMap<String, f64>,
}

const LETTERS: [&str; 12] = ["A", "A-", "B+", "B", "B-", "C+", "C", "C-", "D+", "D", "D-", "F"];

impl GradeScale {
    /// Build a ladder from `(letter, points)` pairs, best grade first.
    pub fn new<S: Into<String>>(
        entries: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Self, ModelError> {
        let mut ladder: Vec<(String, f64)> = Vec::new();
        for (letter, points) in entries {
            let letter = normalize_letter(&letter.into());
            if letter.is_empty() {
                return Err(ModelError::InvalidScale("empty letter".into()));
            }
            if !points.is_finite() {
                return Err(ModelError::InvalidScale(format!(
                    "non-finite points for {letter}"
                )));
            }
            if ladder.iter().any(|(l, _)| *l == letter) {
                return Err(ModelError::InvalidScale(format!("duplicate letter {letter}")));
            }
            if let Some((prev, p)) = ladder.last() {
                if points >= *p {
                    return Err(ModelError::InvalidScale(format!(
                        "points must strictly decrease: {prev} = {p} then {letter} = {points}"
                    )));
                }
            }
            ladder.push((letter, points));
        }
        if ladder.is_empty() {
            return Err(ModelError::InvalidScale("scale has no letters".into()));
        }
        Ok(Self {
            ladder,
            aliases: HashMap::new(),
        })
    }

    /// Conventional four-point ladder: A = 4.0, A- = 3.7, B+ = 3.3, ... F = 0.0.
    /// `A+` is accepted as an alias for 4.0.
    pub fn standard() -> Self {
        let points = [4.0, 3.7, 3.3, 3.0, 2.7, 2.3, 2.0, 1.7, 1.3, 1.0, 0.7, 0.0];
        Self::new(LETTERS.iter().copied().zip(points))
            .expect("standard ladder is valid")
            .with_alias("A+", 4.0)
    }

    /// Ladder with exact thirds between rungs: B+ = 10/3, A- = 11/3, and so on.
    pub fn thirds() -> Self {
        let points = LETTERS
            .iter()
            .enumerate()
            .map(|(k, l)| {
                // A = 12/3 down to D- = 2/3; F sits at zero.
                let p = if *l == "F" { 0.0 } else { (12 - k) as f64 / 3.0 };
                (*l, p)
            });
        Self::new(points)
            .expect("thirds ladder is valid")
            .with_alias("A+", 4.0)
    }

    pub fn with_alias(mut self, letter: &str, points: f64) -> Self {
        self.aliases.insert(normalize_letter(letter), points);
        self
    }

    /// Resolve a letter to points. Accepts the typographic minus sign as `-`.
    pub fn points(&self, letter: &str) -> Option<f64> {
        let key = normalize_letter(letter);
        self.ladder
            .iter()
            .find(|(l, _)| *l == key)
            .map(|(_, p)| *p)
            .or_else(|| self.aliases.get(&key).copied())
    }

    pub fn max_points(&self) -> f64 {
        self.aliases
            .values()
            .copied()
            .fold(self.ladder[0].1, f64::max)
    }

    pub fn min_points(&self) -> f64 {
        let last = self.ladder[self.ladder.len() - 1].1;
        self.aliases.values().copied().fold(last, f64::min)
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.ladder
    }
}

impl Default for GradeScale {
    fn default() -> Self {
        Self::standard()
    }
}

impl fmt::Display for GradeScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (letter, points) in &self.ladder {
            writeln!(f, "{letter} {points}")?;
        }
        Ok(())
    }
}

fn normalize_letter(s: &str) -> String {
    s.trim().replace(['\u{2212}', '\u{2013}'], "-").to_ascii_uppercase()
}
