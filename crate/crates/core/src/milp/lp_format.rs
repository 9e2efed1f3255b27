use std::fmt::Write;

use super::problem::{MilpProblem, Sense, VarKind};

fn term(out: &mut String, coeff: f64, var: usize, first: bool) {
    if coeff < 0.0 {
        let _ = write!(out, " - {} x{var}", -coeff);
    } else if first {
        let _ = write!(out, " {coeff} x{var}");
    } else {
        let _ = write!(out, " + {coeff} x{var}");
    }
}

/// Render the problem in CPLEX LP format. Variables are named `x<index>`; the
/// original names are listed as comments.
pub fn write_lp(problem: &MilpProblem) -> String {
    let mut out = String::new();
    for (j, v) in problem.variables.iter().enumerate() {
        let _ = writeln!(out, "\\ x{j} = {}", v.name);
    }
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (j, v) in problem.variables.iter().enumerate() {
        if v.cost != 0.0 {
            term(&mut out, v.cost, j, first);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (i, c) in problem.constraints.iter().enumerate() {
        let _ = write!(out, " c{i}:");
        if c.coefficients.is_empty() {
            out.push_str(" 0 x0");
        }
        for (k, (j, a)) in c.coefficients.iter().enumerate() {
            term(&mut out, *a, *j, k == 0);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in problem.variables.iter().enumerate() {
        if v.lower == v.upper {
            let _ = writeln!(out, " x{j} = {}", v.lower);
            continue;
        }
        let lo = if v.lower.is_finite() { v.lower.to_string() } else { "-inf".into() };
        let hi = if v.upper.is_finite() { v.upper.to_string() } else { "+inf".into() };
        let _ = writeln!(out, " {lo} <= x{j} <= {hi}");
    }
    let ints: Vec<usize> = (0..problem.num_variables())
        .filter(|&j| problem.variables[j].kind == VarKind::Integer)
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for j in ints {
            let _ = writeln!(out, " x{j}");
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::problem::{Constraint, Variable};

    #[test]
    fn renders_sections() {
        let mut p = MilpProblem::new();
        let x = p.add_variable(Variable::continuous("x", 0.0, f64::INFINITY, 2.0));
        let n = p.add_variable(Variable::integer("n", 0.0, 3.0, 5.0));
        p.add_constraint(Constraint::new("cap", vec![(x, 1.0), (n, -10.0)], Sense::Le, 0.0));
        let text = write_lp(&p);
        assert!(text.contains("Minimize\n obj: 2 x0 + 5 x1\n"));
        assert!(text.contains(" c0: 1 x0 - 10 x1 <= 0\n"));
        assert!(text.contains(" 0 <= x0 <= +inf\n"));
        assert!(text.contains("General\n x1\n"));
        assert!(text.ends_with("End\n"));
    }
}
