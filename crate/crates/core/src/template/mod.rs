//! Polynomial template synthesis: coefficient matching, parameter solving,
//! Lagrange elimination and construction of the completeness obligation.

mod system;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolic::{fresh_symbol, Formula, Poly, Rational, Rel, Symbol, SymbolicError};

pub use system::{solve_parameter_system, ParameterSolution};
pub(crate) use system::rational_roots;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("parameter system too hard: {0}")]
    SystemTooHard(String),
    #[error("side condition is not ground after template substitution: {0}")]
    UnsupportedSideCondition(String),
    #[error("parameters cannot be eliminated linearly: {0}")]
    NonlinearElimination(String),
    #[error("no template yields a verified candidate")]
    NoCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateKind {
    Constant,
    Linear,
    QuadMonomial,
    Quadratic,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 4] = [
        TemplateKind::Constant,
        TemplateKind::Linear,
        TemplateKind::QuadMonomial,
        TemplateKind::Quadratic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateKind::Constant => "const",
            TemplateKind::Linear => "lin",
            TemplateKind::QuadMonomial => "mono",
            TemplateKind::Quadratic => "quad",
        }
    }

    /// Which of `a x^2`, `b x`, `c` are present.
    fn shape(self) -> [bool; 3] {
        match self {
            TemplateKind::Constant => [false, false, true],
            TemplateKind::Linear => [false, true, true],
            TemplateKind::QuadMonomial => [true, false, false],
            TemplateKind::Quadratic => [true, true, true],
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TemplateKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "const" | "constant" => Ok(TemplateKind::Constant),
            "lin" | "linear" => Ok(TemplateKind::Linear),
            "mono" | "quadmonomial" => Ok(TemplateKind::QuadMonomial),
            "quad" | "quadratic" => Ok(TemplateKind::Quadratic),
            _ => Err(format!("unknown template `{s}`")),
        }
    }
}

/// A parametric polynomial shape for `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub kind: TemplateKind,
    /// Parameters in the order `a`, `b`, `c` restricted to those present.
    pub params: Vec<Symbol>,
    coeffs: [Option<Symbol>; 3],
}

impl Template {
    /// Parameters are named `a`, `b`, `c`, renamed away from `taken`.
    pub fn new(kind: TemplateKind, taken: &BTreeSet<Symbol>) -> Template {
        let mut taken = taken.clone();
        let mut coeffs: [Option<Symbol>; 3] = [None, None, None];
        let mut params = Vec::new();
        for (i, (present, base)) in kind.shape().iter().zip(["a", "b", "c"]).enumerate() {
            if *present {
                let s = fresh_symbol(base, &taken);
                taken.insert(s.clone());
                params.push(s.clone());
                coeffs[i] = Some(s);
            }
        }
        Template {
            kind,
            params,
            coeffs,
        }
    }

    /// The template evaluated at `arg`.
    pub fn at(&self, arg: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(c) = c {
                out = &out + &(&Poly::sym(c) * &arg.pow(2 - i as u32));
            }
        }
        out
    }
}

/// Result of substituting a template into a specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateApplication {
    /// Equation residuals `p = 0`, polynomials in the quantified variables and
    /// the parameters.
    pub residuals: Vec<Poly>,
    /// All quantified variables of the specification.
    pub vars: Vec<Symbol>,
    /// Non-equation conjuncts after substitution, ground over the parameters.
    pub side: Vec<Formula>,
}

fn strip_foralls(f: &Formula) -> (Vec<Symbol>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::Forall(v, b) = cur {
        vars.extend(v.iter().cloned());
        cur = b;
    }
    (vars, cur)
}

/// Replaces every `f`-application, innermost first, by the template.
pub fn substitute_template(p: &Poly, t: &Template) -> Poly {
    p.map_fapps(&mut |arg| t.at(arg))
}

pub fn apply_template(spec: &Formula, t: &Template) -> Result<TemplateApplication, TemplateError> {
    let mut app = TemplateApplication {
        residuals: Vec::new(),
        vars: Vec::new(),
        side: Vec::new(),
    };
    for conj in spec.conjuncts() {
        let (vars, body) = strip_foralls(&conj);
        for v in &vars {
            if !app.vars.contains(v) {
                app.vars.push(v.clone());
            }
        }
        for atom in body.conjuncts() {
            let sub = atom.map_polys(&mut |p| substitute_template(p, t));
            match sub {
                Formula::Cmp(p, Rel::Eq) => app.residuals.push(p),
                other => {
                    let other = other.simplify();
                    if other.symbols().iter().any(|s| vars.contains(s)) {
                        return Err(TemplateError::UnsupportedSideCondition(atom.to_string()));
                    }
                    if !other.is_ground() {
                        return Err(TemplateError::UnsupportedSideCondition(atom.to_string()));
                    }
                    if !other.is_true() {
                        app.side.push(other);
                    }
                }
            }
        }
    }
    Ok(app)
}

/// Coefficients of every residual with respect to `vars`; zero coefficients
/// dropped, duplicates up to a constant factor removed.
pub fn extract_coefficient_system(
    residuals: &[Poly],
    vars: &[Symbol],
) -> Result<Vec<Poly>, TemplateError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for r in residuals {
        for (_, c) in r.coefficients_wrt(vars)? {
            if !c.is_zero() && seen.insert(c.monic()) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// One disjunct `Γ ∧ ∀x. f(x) = definition` of a solved form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SolvedBranch {
    pub gamma: Formula,
    pub definition: Poly,
}

/// A disjunction of solved branches over the variable `var`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolvedForm {
    pub var: Symbol,
    pub branches: Vec<SolvedBranch>,
}

impl SolvedForm {
    /// Definitions with `var` replaced by `s`.
    pub fn definition_at(&self, i: usize, s: &Poly) -> Poly {
        let sub = BTreeMap::from([(self.var.clone(), s.clone())]);
        self.branches[i].definition.substitute(&sub)
    }

    fn canonical(&self) -> Vec<(Formula, Poly)> {
        let mut v: Vec<(Formula, Poly)> = self
            .branches
            .iter()
            .map(|b| (b.gamma.normalized_key(), b.definition.clone()))
            .collect();
        v.sort();
        v
    }

    /// Equality up to branch order and normalization of Γ.
    pub fn same_as(&self, other: &SolvedForm) -> bool {
        self.canonical() == other.canonical()
    }

    fn normalize(&mut self) {
        let mut seen = BTreeSet::new();
        self.branches.retain(|b| !b.gamma.is_false());
        self.branches
            .retain(|b| seen.insert((b.gamma.normalized_key(), b.definition.clone())));
        self.branches
            .sort_by(|a, b| b.definition.cmp(&a.definition).then(a.gamma.cmp(&b.gamma)));
    }
}

impl fmt::Display for SolvedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.branches.is_empty() {
            return f.write_str("false");
        }
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            if !b.gamma.is_true() {
                write!(f, "[{}] ", b.gamma)?;
            }
            write!(f, "f({}) = {}", self.var, b.definition)?;
        }
        Ok(())
    }
}

/// Replaces the unsolved parameters by their interpolation expressions in
/// `f(0)`, `f(1)`, `f(-1)`.
pub fn lagrange_eliminate(
    sol: &ParameterSolution,
    t: &Template,
    var: &Symbol,
) -> Result<SolvedBranch, TemplateError> {
    let x = Poly::sym(var);
    let shape = t.at(&x).substitute(&sol.assignment);
    let free: Vec<&Symbol> = t
        .params
        .iter()
        .filter(|p| !sol.assignment.contains_key(*p))
        .collect();
    let mut solved: BTreeMap<Symbol, Poly> = BTreeMap::new();
    for v in [0i64, 1, -1] {
        let at = BTreeMap::from([(var.clone(), Poly::int(v))]);
        let eq = &shape.substitute(&at).substitute(&solved) - &Poly::fapp(Poly::int(v));
        let pivot = free.iter().find(|p| {
            !solved.contains_key(**p)
                && eq.degree_in(p) == 1
                && eq.coefficient_of(p, 1).is_constant()
        });
        let Some(p) = pivot else { continue };
        let k = eq.coefficient_of(p, 1).as_constant().unwrap();
        let rest = &eq - &Poly::sym(p).scale(&k);
        let value = rest.scale(&(-Rational::one() / k));
        let sub = BTreeMap::from([((*p).clone(), value.clone())]);
        for w in solved.values_mut() {
            *w = w.substitute(&sub);
        }
        solved.insert((*p).clone(), value);
    }
    if let Some(p) = free.iter().find(|p| !solved.contains_key(**p)) {
        return Err(TemplateError::NonlinearElimination(format!(
            "parameter {p} in {shape}"
        )));
    }
    let gamma = sol.gamma().substitute(&solved).simplify();
    Ok(SolvedBranch {
        gamma,
        definition: shape.substitute(&solved),
    })
}

/// Substitutes each branch definition for `f` and checks that every equation
/// of the specification collapses to the zero polynomial and every other
/// conjunct is entailed by Γ.
pub fn verify_candidate(spec: &Formula, sf: &SolvedForm) -> bool {
    sf.branches.iter().enumerate().all(|(i, b)| {
        let gamma_parts: BTreeSet<Formula> = b
            .gamma
            .conjuncts()
            .iter()
            .map(Formula::normalized_key)
            .collect();
        let mut rewrite = |p: &Poly| p.map_fapps(&mut |arg| sf.definition_at(i, arg));
        spec.conjuncts().iter().all(|conj| {
            let (_, body) = strip_foralls(conj);
            body.conjuncts().iter().all(|atom| match atom {
                Formula::Cmp(p, Rel::Eq) => rewrite(p).is_zero(),
                other => {
                    let g = other.map_polys(&mut rewrite).simplify();
                    g.is_true() || gamma_parts.contains(&g.normalized_key())
                }
            })
        })
    })
}

/// Solves the specification within one template.
pub fn synthesize_with(spec: &Formula, kind: TemplateKind) -> Result<SolvedForm, TemplateError> {
    let t = Template::new(kind, &spec.symbols());
    let app = apply_template(spec, &t)?;
    let system = extract_coefficient_system(&app.residuals, &app.vars)?;
    let sols = solve_parameter_system(&system, &t.params)?;
    let var = Symbol::new("x");
    let mut sf = SolvedForm {
        var: var.clone(),
        branches: Vec::new(),
    };
    for mut sol in sols {
        let mut dead = false;
        for s in &app.side {
            let g = s.substitute(&sol.assignment).simplify();
            if g.is_false() {
                dead = true;
            } else if !g.is_true() {
                sol.residual_constraints.push(g);
            }
        }
        if !dead {
            sf.branches.push(lagrange_eliminate(&sol, &t, &var)?);
        }
    }
    sf.normalize();
    Ok(sf)
}

/// Template selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemplateChoice {
    #[default]
    Auto,
    Fixed(TemplateKind),
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    /// Smallest template producing the candidate.
    pub template: TemplateKind,
    pub solved_form: SolvedForm,
    pub notes: Vec<String>,
}

/// Synthesizes a verified candidate. Under `Auto` every template is tried;
/// the quadratic result is used when available since it contains all
/// smaller shapes, otherwise the union of the smaller successful ones.
pub fn synthesize(spec: &Formula, choice: TemplateChoice) -> Result<Synthesis, TemplateError> {
    let kinds: Vec<TemplateKind> = match choice {
        TemplateChoice::Auto => TemplateKind::ALL.to_vec(),
        TemplateChoice::Fixed(k) => vec![k],
    };
    let mut results: Vec<(TemplateKind, SolvedForm)> = Vec::new();
    let mut notes = Vec::new();
    let mut last_err = None;
    for k in kinds {
        match synthesize_with(spec, k) {
            Ok(sf) if sf.branches.is_empty() => notes.push(format!("{k}: no solutions")),
            Ok(sf) if !verify_candidate(spec, &sf) => {
                notes.push(format!("{k}: candidate {sf} failed verification"))
            }
            Ok(sf) => results.push((k, sf)),
            Err(e) => {
                notes.push(format!("{k}: {e}"));
                last_err = Some(e);
            }
        }
    }
    let Some((top_kind, _)) = results.last().cloned() else {
        return Err(match last_err {
            Some(e) if choice != TemplateChoice::Auto => e,
            _ => TemplateError::NoCandidate,
        });
    };
    let solved_form = if top_kind == TemplateKind::Quadratic || choice != TemplateChoice::Auto {
        results.last().unwrap().1.clone()
    } else {
        let mut union = SolvedForm {
            var: Symbol::new("x"),
            branches: results.iter().flat_map(|(_, sf)| sf.branches.clone()).collect(),
        };
        union.normalize();
        union
    };
    let template = results
        .iter()
        .find(|(_, sf)| sf.same_as(&solved_form))
        .map(|(k, _)| *k)
        .unwrap_or(top_kind);
    Ok(Synthesis {
        template,
        solved_form,
        notes,
    })
}

/// The specification conjoined with a skolemized negation of the candidate,
/// plus accumulated enrichment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofObligation {
    pub spec: Formula,
    pub skolems: BTreeSet<Symbol>,
    pub negation_constraints: Vec<Formula>,
    pub instantiations: Vec<Formula>,
    pub lemmas: Vec<Formula>,
}

impl ProofObligation {
    pub fn new(spec: Formula, negation_constraints: Vec<Formula>) -> ProofObligation {
        let spec_syms = spec.free_symbols();
        let skolems = negation_constraints
            .iter()
            .flat_map(Formula::free_symbols)
            .filter(|s| !spec_syms.contains(s))
            .collect();
        ProofObligation {
            spec,
            skolems,
            negation_constraints,
            instantiations: Vec::new(),
            lemmas: Vec::new(),
        }
    }

    /// Skolem constants in name order.
    pub fn skolem_terms(&self) -> Vec<Poly> {
        self.skolems.iter().map(Poly::sym).collect()
    }
}

/// Skolem names: `c` for a single branch, else `c1`, `c2`, ... (renamed away
/// from the specification's symbols).
pub fn skolem_names(count: usize, spec: &Formula) -> Vec<Symbol> {
    let mut taken = spec.symbols();
    taken.insert(Symbol::new("f"));
    let mut out = Vec::new();
    for i in 0..count {
        let base = if count == 1 {
            "c".to_string()
        } else {
            format!("c{}", i + 1)
        };
        let s = if taken.contains(&Symbol::new(&base)) {
            fresh_symbol(&format!("{base}_"), &taken)
        } else {
            Symbol::new(&base)
        };
        taken.insert(s.clone());
        out.push(s);
    }
    out
}

/// `¬Γᵢ ∨ f(cᵢ) ≠ tᵢ[x → cᵢ]` for each branch.
pub fn build_obligation(spec: &Formula, sf: &SolvedForm) -> ProofObligation {
    let names = skolem_names(sf.branches.len(), spec);
    let constraints = sf
        .branches
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let c = Poly::sym(&names[i]);
            let diseq = Formula::ne(&Poly::fapp(c.clone()), &sf.definition_at(i, &c));
            Formula::or(vec![Formula::not(b.gamma.clone()), diseq]).simplify()
        })
        .collect();
    let mut ob = ProofObligation::new(spec.clone(), constraints);
    ob.skolems.extend(names);
    ob
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_io::parse_problem;
    use crate::symbolic::rat;

    fn spec(text: &str) -> Formula {
        parse_problem(text).unwrap().spec
    }

    #[test]
    fn template_shapes() {
        let t = Template::new(TemplateKind::Quadratic, &BTreeSet::new());
        let x = Poly::var("x");
        assert_eq!(t.at(&x).to_string(), "a*x^2 + b*x + c");
        let t = Template::new(TemplateKind::QuadMonomial, &BTreeSet::from([Symbol::new("a")]));
        assert_eq!(t.at(&x).to_string(), "a1*x^2");
    }

    #[test]
    fn constant_template_on_product_rule() {
        let s = spec("forall x y. f(x+y) = x*f(y) + y*f(x)");
        let t = Template::new(TemplateKind::Constant, &s.symbols());
        let app = apply_template(&s, &t).unwrap();
        let (x, y, c) = (Poly::var("x"), Poly::var("y"), Poly::var("c"));
        assert_eq!(app.residuals, vec![&(&c - &(&x * &c)) - &(&y * &c)]);
    }

    #[test]
    fn ground_side_condition_enters_gamma() {
        let s = spec("forall x y. f(x+y) = f(x) + y; where f(0) > 0;");
        let sf = synthesize_with(&s, TemplateKind::Quadratic).unwrap();
        assert_eq!(sf.branches.len(), 1);
        let f0 = Poly::fapp(Poly::zero());
        assert_eq!(sf.branches[0].definition, &Poly::var("x") + &f0);
        assert_eq!(sf.branches[0].gamma, Formula::lt(&Poly::zero(), &f0));
        assert!(verify_candidate(&s, &sf));
        let ob = build_obligation(&s, &sf);
        let c = Poly::var("c");
        let expect = Formula::or(vec![
            Formula::le(&f0, &Poly::zero()),
            Formula::ne(&Poly::fapp(c.clone()), &(&c + &f0)),
        ]);
        assert_eq!(ob.negation_constraints, vec![expect]);
    }

    #[test]
    fn lagrange_on_full_quadratic() {
        let t = Template::new(TemplateKind::Quadratic, &BTreeSet::new());
        let sol = ParameterSolution {
            assignment: BTreeMap::new(),
            residual_constraints: Vec::new(),
        };
        let br = lagrange_eliminate(&sol, &t, &Symbol::new("x")).unwrap();
        let (f0, f1, fm1) = (
            Poly::fapp(Poly::zero()),
            Poly::fapp(Poly::one()),
            Poly::fapp(Poly::int(-1)),
        );
        let x = Poly::var("x");
        let a = &(&f1 + &fm1).scale(&rat(1, 2)) - &f0;
        let b = (&f1 - &fm1).scale(&rat(1, 2));
        assert_eq!(br.definition, &(&(&a * &x.pow(2)) + &(&b * &x)) + &f0);
    }

    #[test]
    fn bogus_candidate_is_rejected() {
        let s = spec("forall x y. f(x+y) = x*f(y) + y*f(x)");
        let sf = SolvedForm {
            var: Symbol::new("x"),
            branches: vec![SolvedBranch {
                gamma: Formula::True,
                definition: Poly::var("x"),
            }],
        };
        assert!(!verify_candidate(&s, &sf));
    }
}
