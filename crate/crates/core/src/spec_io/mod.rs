//! Problem language front end, SMT-LIB2 emission and solver output parsing.

mod parser;
mod smtlib;
mod verdict;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::symbolic::{Formula, Symbol};

pub use smtlib::{emit_smtlib, emit_term, EmitOptions};
pub use verdict::{parse_solver_output, ExitInfo, SolverVerdict, VerdictStatus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecIoError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported feature at {line}:{col}: {msg}")]
    UnsupportedFeature { line: usize, col: usize, msg: String },
    #[error("existential quantifier survives in an obligation: {0}")]
    NonGroundExistential(String),
}

/// A parsed functional-equation problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    /// The specification sentence; a conjunction when several statements
    /// were given.
    pub spec: Formula,
    pub declared_constants: BTreeSet<Symbol>,
    pub source_note: Option<String>,
}

pub fn parse_problem(text: &str) -> Result<Problem, SpecIoError> {
    parser::parse(text)
}

/// Renders a problem back into the problem language.
pub fn pretty_print(p: &Problem) -> String {
    let mut out = String::new();
    if !p.name.is_empty() {
        let _ = writeln!(out, "problem \"{}\";", p.name);
    }
    if let Some(n) = &p.source_note {
        let _ = writeln!(out, "note \"{n}\";");
    }
    out.push_str("find f;\n");
    if !p.declared_constants.is_empty() {
        let names: Vec<&str> = p.declared_constants.iter().map(Symbol::as_str).collect();
        let _ = writeln!(out, "const {};", names.join(" "));
    }
    let parts = match &p.spec {
        Formula::And(parts) => parts.clone(),
        f => vec![f.clone()],
    };
    for f in parts {
        if f.is_ground() {
            let _ = writeln!(out, "where {f};");
        } else {
            let _ = writeln!(out, "{f};");
        }
    }
    out
}
