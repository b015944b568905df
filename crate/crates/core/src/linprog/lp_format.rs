use std::fmt::Write;

use super::problem::{LpProblem, Relation};

/// Render a problem in CPLEX LP text format, for cross-checking with
/// external solvers.
pub fn write_lp(problem: &LpProblem) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut any = false;
    for (k, &c) in problem.objective().iter().enumerate() {
        if c != 0.0 {
            push_term(&mut out, c, &problem.var_name(k), !any);
            any = true;
        }
    }
    if !any && problem.num_vars() > 0 {
        out.push_str(" 0 ");
        out.push_str(&problem.var_name(0));
    }
    out.push_str("\nSubject To\n");
    for (r, con) in problem.constraints().iter().enumerate() {
        write!(out, " c{r}:").unwrap();
        let mut first = true;
        for &(k, c) in &con.coeffs {
            push_term(&mut out, c, &problem.var_name(k), first);
            first = false;
        }
        if first && problem.num_vars() > 0 {
            out.push_str(" 0 ");
            out.push_str(&problem.var_name(0));
        }
        let rel = match con.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        writeln!(out, " {rel} {}", con.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for k in 0..problem.num_vars() {
        let name = problem.var_name(k);
        match problem.bounds(k) {
            (lo, hi) if lo == 0.0 && hi == f64::INFINITY => {}
            (lo, hi) if lo == f64::NEG_INFINITY && hi == f64::INFINITY => {
                writeln!(out, " {name} free").unwrap();
            }
            (lo, hi) if lo == f64::NEG_INFINITY => {
                writeln!(out, " -inf <= {name} <= {hi}").unwrap();
            }
            (lo, hi) if hi == f64::INFINITY => {
                writeln!(out, " {name} >= {lo}").unwrap();
            }
            (lo, hi) => {
                writeln!(out, " {lo} <= {name} <= {hi}").unwrap();
            }
        }
    }
    out.push_str("End\n");
    out
}

fn push_term(out: &mut String, c: f64, name: &str, first: bool) {
    let sign = if c < 0.0 { "-" } else { "+" };
    if first && c >= 0.0 {
        out.push(' ');
    } else {
        write!(out, " {sign} ").unwrap();
    }
    let mag = c.abs();
    if mag == 1.0 {
        out.push_str(name);
    } else {
        write!(out, "{mag} {name}").unwrap();
    }
}
