//! SMT-LIB2 emission in the UFNRA logic.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, Signed};

use super::SpecIoError;
use crate::symbolic::{Atom, Formula, Poly, PowerProduct, Rational, Rel, Symbol};
use crate::template::ProofObligation;

/// Which parts of an obligation are asserted.
#[derive(Debug, Clone)]
pub struct EmitOptions {
    pub include_spec: bool,
    pub include_instantiations: bool,
    pub include_lemmas: bool,
    pub include_negation: bool,
    /// Asserted last, after everything else.
    pub extra: Vec<Formula>,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            include_spec: true,
            include_instantiations: true,
            include_lemmas: true,
            include_negation: true,
            extra: Vec::new(),
        }
    }
}

/// Renders an obligation as a complete script ending in `(check-sat)`.
pub fn emit_smtlib(ob: &ProofObligation, opts: &EmitOptions) -> Result<String, SpecIoError> {
    let mut asserts: Vec<&Formula> = Vec::new();
    let spec_parts = ob.spec.conjuncts();
    if opts.include_spec {
        asserts.extend(spec_parts.iter());
    }
    if opts.include_instantiations {
        asserts.extend(ob.instantiations.iter());
    }
    if opts.include_lemmas {
        asserts.extend(ob.lemmas.iter());
    }
    if opts.include_negation {
        asserts.extend(ob.negation_constraints.iter());
    }
    asserts.extend(opts.extra.iter());

    let mut consts: BTreeSet<Symbol> = ob.skolems.clone();
    for f in &asserts {
        if f.has_exists() {
            return Err(SpecIoError::NonGroundExistential(f.to_string()));
        }
        consts.extend(f.free_symbols());
    }

    let mut out = String::new();
    out.push_str("(set-logic UFNRA)\n");
    out.push_str("(declare-fun f (Real) Real)\n");
    for c in &consts {
        let _ = writeln!(out, "(declare-const {} Real)", quote(c));
    }
    for f in asserts {
        let _ = writeln!(out, "(assert {})", emit_formula(f));
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}

fn quote(s: &Symbol) -> String {
    let name = s.as_str();
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple && name != "f" {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn emit_rational(r: &Rational) -> String {
    let mag = if r.is_integer() {
        r.numer().abs().to_string()
    } else {
        format!("(/ {} {})", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {mag})")
    } else {
        mag
    }
}

fn emit_atom(a: &Atom) -> String {
    match a {
        Atom::Var(s) => quote(s),
        Atom::FApp(arg) => format!("(f {})", emit_term(arg)),
    }
}

fn emit_monomial(c: &Rational, pp: &PowerProduct) -> String {
    let mut factors = Vec::new();
    if !c.is_one() || pp.is_one() {
        factors.push(emit_rational(c));
    }
    for (a, e) in pp.factors() {
        let s = emit_atom(a);
        for _ in 0..*e {
            factors.push(s.clone());
        }
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        format!("(* {})", factors.join(" "))
    }
}

/// A polynomial as a Real-sorted term.
pub fn emit_term(p: &Poly) -> String {
    let (pos, neg) = split(p);
    match (pos.is_zero(), neg.is_zero()) {
        (_, true) => emit_sum(&pos),
        (true, false) => format!("(- {})", emit_sum(&neg)),
        (false, false) => format!("(- {} {})", emit_sum(&pos), emit_sum(&neg)),
    }
}

fn emit_sum(p: &Poly) -> String {
    let parts: Vec<String> = p.terms().map(|(pp, c)| emit_monomial(c, pp)).collect();
    match parts.len() {
        0 => "0".to_string(),
        1 => parts[0].clone(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

/// Splits `p` into `pos - neg` with both parts having positive coefficients.
fn split(p: &Poly) -> (Poly, Poly) {
    let mut pos = Poly::zero();
    let mut neg = Poly::zero();
    for (pp, c) in p.terms() {
        if c.is_negative() {
            neg = &neg + &Poly::monomial(-c.clone(), pp.clone());
        } else {
            pos = &pos + &Poly::monomial(c.clone(), pp.clone());
        }
    }
    (pos, neg)
}

fn emit_formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Cmp(p, rel) => {
            let (pos, neg) = split(p);
            let (l, r) = (emit_sum(&pos), emit_sum(&neg));
            match rel {
                Rel::Eq => format!("(= {l} {r})"),
                Rel::Ne => format!("(not (= {l} {r}))"),
                Rel::Le => format!("(<= {l} {r})"),
                Rel::Lt => format!("(< {l} {r})"),
            }
        }
        Formula::Not(g) => format!("(not {})", emit_formula(g)),
        Formula::And(fs) | Formula::Or(fs) => {
            if fs.is_empty() {
                return if matches!(f, Formula::And(_)) { "true" } else { "false" }.into();
            }
            let op = if matches!(f, Formula::And(_)) { "and" } else { "or" };
            let parts: Vec<String> = fs.iter().map(emit_formula).collect();
            format!("({op} {})", parts.join(" "))
        }
        Formula::Implies(a, b) => format!("(=> {} {})", emit_formula(a), emit_formula(b)),
        Formula::Forall(vars, body) | Formula::Exists(vars, body) => {
            let q = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
            let binders: Vec<String> = vars.iter().map(|v| format!("({} Real)", quote(v))).collect();
            format!("({q} ({}) {})", binders.join(" "), emit_formula(body))
        }
    }
}
