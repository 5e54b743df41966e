//! Exact symbolic arithmetic: polynomials with `f`-application atoms and
//! formulas over them.

mod formula;
mod poly;

pub use formula::{Formula, Rel, Substitution};
pub use poly::{
    fresh_symbol, rat, rational_sqrt, rational_to_f64, Atom, Poly, PowerProduct, Rational, Symbol,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    /// A quantified variable occurs inside an `f` argument, so the
    /// polynomial cannot be read as a polynomial in that variable.
    #[error("variable `{0}` occurs under f; complete template substitution first")]
    VarsUnderF(String),
    #[error("no value for symbol `{0}`")]
    UnboundSymbol(String),
}

/// Outermost `f` arguments of a universally quantified formula that can take
/// part in argument-equation solving.
///
/// Arguments are gathered at every nesting depth (an argument of an inner
/// application counts when that inner application is itself reached); an
/// argument is kept only if some variable of the quantifier prefix occurs in
/// it outside every `f` application, so that it is a genuine polynomial in
/// the prefix with `f`-atoms as opaque constants. Order is first occurrence
/// in monomial order; duplicates are dropped.
pub fn collect_f_arguments(phi: &Formula) -> Vec<Poly> {
    let (vars, body) = match phi.as_forall() {
        Some((v, b)) => (v.to_vec(), b),
        None => return Vec::new(),
    };
    let mut out: Vec<Poly> = Vec::new();
    fn walk(p: &Poly, vars: &[Symbol], out: &mut Vec<Poly>) {
        for arg in p.fapp_atoms() {
            let top = arg.top_level_symbols();
            if vars.iter().any(|v| top.contains(v)) && !out.contains(&arg) {
                out.push((*arg).clone());
            }
            walk(&arg, vars, out);
        }
    }
    for p in body.polys() {
        walk(p, &vars, &mut out);
    }
    out
}
