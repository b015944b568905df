use std::fmt;

use super::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// A sparse linear constraint `Σ coeff·x {≤,=,≥} rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimize `c·x` subject to sparse row constraints and per-variable bounds.
///
/// Variables start with bounds `[0, +∞)`. Every coefficient is checked when
/// it is added, so a constructed problem is always well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    constraints: Vec<Constraint>,
    names: Option<Vec<String>>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Result<Self, LpError> {
        if let Some(k) = objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::NonFinite(format!("objective coefficient {k}")));
        }
        let n = objective.len();
        Ok(Self {
            objective,
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            constraints: Vec::new(),
            names: None,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    /// Set bounds; use infinities for unbounded sides.
    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if var >= self.num_vars() {
            return Err(LpError::BadIndex {
                index: var,
                vars: self.num_vars(),
            });
        }
        if lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY
        {
            return Err(LpError::NonFinite(format!("bounds of variable {var}")));
        }
        if lower > upper {
            return Err(LpError::EmptyBounds { var, lower, upper });
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn set_free(&mut self, var: usize) -> Result<(), LpError> {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<(), LpError> {
        let row = self.constraints.len();
        if !rhs.is_finite() {
            return Err(LpError::NonFinite(format!("right-hand side of row {row}")));
        }
        for &(var, c) in &coeffs {
            if var >= self.num_vars() {
                return Err(LpError::BadIndex {
                    index: var,
                    vars: self.num_vars(),
                });
            }
            if !c.is_finite() {
                return Err(LpError::NonFinite(format!("coefficient of x{var} in row {row}")));
            }
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    /// Attach variable names used by the LP text dump.
    pub fn set_names(&mut self, names: Vec<String>) -> Result<(), LpError> {
        if names.len() != self.num_vars() {
            return Err(LpError::BadIndex {
                index: names.len(),
                vars: self.num_vars(),
            });
        }
        self.names = Some(names);
        Ok(())
    }

    pub fn var_name(&self, var: usize) -> String {
        match &self.names {
            Some(names) => names[var].clone(),
            None => format!("x{var}"),
        }
    }

    /// Objective value at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest absolute violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for con in &self.constraints {
            let lhs: f64 = con.coeffs.iter().map(|&(k, c)| c * x[k]).sum();
            let v = match con.relation {
                Relation::Le => lhs - con.rhs,
                Relation::Ge => con.rhs - lhs,
                Relation::Eq => (lhs - con.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (k, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[k] - v).max(v - self.upper[k]);
        }
        worst
    }
}
