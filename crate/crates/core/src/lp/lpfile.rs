//! CPLEX LP text format writer, used for debugging dumps.

use std::fmt::Write;

use super::{LinearProgram, Sense};

pub trait Names {
    fn var_name(&self, j: usize) -> String;
    fn row_name(&self, i: usize) -> String;
}

/// `x0, x1, ...` and `r0, r1, ...`.
pub struct DefaultNames;

impl Names for DefaultNames {
    fn var_name(&self, j: usize) -> String {
        format!("x{j}")
    }

    fn row_name(&self, i: usize) -> String {
        format!("r{i}")
    }
}

fn term(out: &mut String, coef: f64, name: &str, first: bool) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", -coef, name);
    } else if first {
        let _ = write!(out, " {} {}", coef, name);
    } else {
        let _ = write!(out, " + {} {}", coef, name);
    }
}

pub fn write_lp(problem: &LinearProgram, names: &dyn Names) -> String {
    let mut out = String::new();
    out.push_str(match problem.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let mut first = true;
    for (j, &c) in problem.objective().iter().enumerate() {
        if c != 0.0 {
            term(&mut out, c, &names.var_name(j), first);
            first = false;
        }
    }
    if problem.offset() != 0.0 || first {
        term(&mut out, problem.offset(), "", first);
    }
    out.push_str("\nSubject To\n");
    for i in 0..problem.num_rows() {
        let (idx, val) = problem.row(i);
        let (lo, hi) = problem.row_bounds(i);
        let mut body = String::new();
        for (k, (&j, &a)) in idx.iter().zip(val).enumerate() {
            term(&mut body, a, &names.var_name(j), k == 0);
        }
        if body.is_empty() {
            body.push_str(" 0 x0");
        }
        let name = names.row_name(i);
        if lo == hi {
            let _ = writeln!(out, " {name}:{body} = {lo}");
        } else {
            if lo.is_finite() {
                let _ = writeln!(out, " {name}_lo:{body} >= {lo}");
            }
            if hi.is_finite() {
                let _ = writeln!(out, " {name}_hi:{body} <= {hi}");
            }
        }
    }
    out.push_str("Bounds\n");
    for j in 0..problem.num_vars() {
        let (lo, hi) = problem.var_bounds(j);
        let name = names.var_name(j);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) if lo == hi => {
                let _ = writeln!(out, " {name} = {lo}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo} <= {name} <= {hi}");
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {lo}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {hi}");
            }
        }
    }
    out.push_str("End\n");
    out
}
