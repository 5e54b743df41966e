//! Instance generation: partial instantiation with small terms, the
//! full-instantiation variant, and theory unification by solving
//! argument equations.

use std::collections::{BTreeMap, BTreeSet};

use log::debug;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::symbolic::{collect_f_arguments, fresh_symbol, Formula, Poly, Rational, Substitution, Symbol};
use crate::template::ProofObligation;

use crate::template::rational_roots;

/// Partition enumeration is capped at this many arguments.
pub const MAX_TU_ARGS: usize = 6;
pub const DEFAULT_FI_BUDGET: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TermLevel {
    #[default]
    Minimal,
    Extended,
}

impl std::str::FromStr for TermLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "minimal" => Ok(TermLevel::Minimal),
            "extended" => Ok(TermLevel::Extended),
            _ => Err(format!("unknown term level `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallTermSet {
    pub level: TermLevel,
    pub terms: Vec<Poly>,
}

impl SmallTermSet {
    /// `{0, 1}` plus the skolems; the extended level adds rational constants
    /// and declared constants occurring in the specification.
    pub fn new(level: TermLevel, skolems: &[Poly], spec: &Formula) -> SmallTermSet {
        let mut terms = vec![Poly::zero(), Poly::one()];
        for s in skolems {
            if !terms.contains(s) {
                terms.push(s.clone());
            }
        }
        if level == TermLevel::Extended {
            let mut extra = Vec::new();
            for p in spec.polys() {
                collect_constants(p, &mut extra);
            }
            for s in spec.free_symbols() {
                extra.push(Poly::sym(&s));
            }
            for t in extra {
                if !terms.contains(&t) {
                    terms.push(t);
                }
            }
        }
        SmallTermSet { level, terms }
    }

    pub fn from_terms(terms: Vec<Poly>) -> SmallTermSet {
        SmallTermSet {
            level: TermLevel::Minimal,
            terms,
        }
    }
}

fn collect_constants(p: &Poly, out: &mut Vec<Poly>) {
    for (pp, c) in p.terms() {
        if pp.is_one() {
            out.push(Poly::constant(c.clone()));
        }
    }
    for arg in p.fapp_atoms() {
        collect_constants(&arg, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    PartialInst,
    TheoryUnif,
    FullInstFI,
}

/// Instances of one quantified source formula, each with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstantiationBatch {
    pub origin: Origin,
    pub source: Formula,
    pub formulas: Vec<Formula>,
    pub witnesses: Vec<Substitution>,
    /// The enumeration hit its budget.
    pub truncated: bool,
}

impl InstantiationBatch {
    fn new(origin: Origin, source: &Formula) -> Self {
        InstantiationBatch {
            origin,
            source: source.clone(),
            formulas: Vec::new(),
            witnesses: Vec::new(),
            truncated: false,
        }
    }

    /// Adds `instantiate(source, sigma)` unless trivial or a duplicate.
    fn push(&mut self, sigma: Substitution, seen: &mut BTreeSet<Formula>) -> bool {
        let f = self.source.instantiate(&sigma);
        if f.is_true() || !seen.insert(f.normalized_key()) {
            return false;
        }
        self.formulas.push(f);
        self.witnesses.push(sigma);
        true
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }
}

fn prefix(phi: &Formula) -> Vec<Symbol> {
    phi.as_forall().map(|(v, _)| v.to_vec()).unwrap_or_default()
}

/// Instantiates one variable at a time with each small term, leaving the
/// others quantified.
pub fn partial_instantiations(
    phi: &Formula,
    s: &SmallTermSet,
    keep_original: bool,
) -> InstantiationBatch {
    let mut batch = InstantiationBatch::new(Origin::PartialInst, phi);
    let mut seen = BTreeSet::new();
    if keep_original {
        batch.push(Substitution::default(), &mut seen);
    }
    for v in prefix(phi) {
        for t in &s.terms {
            batch.push(Substitution::single(&v, t.clone()), &mut seen);
        }
    }
    batch
}

/// Small terms closed once under `+`, `-`, `*` and `f`.
pub fn fi_term_universe(s: &SmallTermSet) -> Vec<Poly> {
    let mut out: Vec<Poly> = Vec::new();
    let add = |p: Poly, out: &mut Vec<Poly>| {
        if !out.contains(&p) {
            out.push(p);
        }
    };
    for t in &s.terms {
        add(t.clone(), &mut out);
    }
    for u in &s.terms {
        for v in &s.terms {
            add(u + v, &mut out);
            add(u - v, &mut out);
            add(u * v, &mut out);
        }
    }
    for u in &s.terms {
        add(Poly::fapp(u.clone()), &mut out);
    }
    out
}

/// Substitutes every subset of at most three variables with members of the
/// term universe, up to `budget` formulas.
pub fn full_instantiations_fi(phi: &Formula, s: &SmallTermSet, budget: usize) -> InstantiationBatch {
    let mut batch = InstantiationBatch::new(Origin::FullInstFI, phi);
    let mut seen = BTreeSet::new();
    let vars = prefix(phi);
    let universe = fi_term_universe(s);
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << vars.len()))
        .map(|m| (0..vars.len()).filter(|i| m & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|v: &Vec<usize>| v.len() <= 3)
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    if universe.is_empty() {
        return batch;
    }
    for subset in subsets {
        let mut idx = vec![0usize; subset.len()];
        loop {
            if batch.len() >= budget {
                batch.truncated = true;
                return batch;
            }
            let map = subset
                .iter()
                .zip(&idx)
                .map(|(&vi, &ti)| (vars[vi].clone(), universe[ti].clone()))
                .collect();
            batch.push(Substitution::new(map), &mut seen);
            if !advance(&mut idx, universe.len()) {
                break;
            }
        }
    }
    batch
}

/// Odometer step over `n^len` index tuples; false after the last one.
fn advance(idx: &mut [usize], n: usize) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < n {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Solves `eqs = 0` for `vars`, treating every other symbol and every
/// `f`-application as an opaque constant. Several solutions arise only from
/// distinct rational roots of a univariate remainder.
pub fn solve_argument_system(eqs: &[Poly], vars: &[Symbol]) -> Vec<BTreeMap<Symbol, Poly>> {
    let mut out = Vec::new();
    solve_rec(eqs.to_vec(), vars, BTreeMap::new(), &mut out);
    out
}

fn solve_rec(
    eqs: Vec<Poly>,
    vars: &[Symbol],
    sigma: BTreeMap<Symbol, Poly>,
    out: &mut Vec<BTreeMap<Symbol, Poly>>,
) {
    let mut live = Vec::new();
    for e in eqs {
        if e.is_zero() {
            continue;
        }
        if !vars.iter().any(|v| e.mentions(v)) {
            return;
        }
        live.push(e);
    }
    if live.is_empty() {
        if vars.iter().all(|v| sigma.contains_key(v)) {
            out.push(sigma);
        }
        return;
    }
    let bind = |v: &Symbol, value: Poly, rest: &[Poly], sigma: &BTreeMap<Symbol, Poly>| {
        let sub = BTreeMap::from([(v.clone(), value.clone())]);
        let mut next: BTreeMap<Symbol, Poly> =
            sigma.iter().map(|(k, p)| (k.clone(), p.substitute(&sub))).collect();
        next.insert(v.clone(), value);
        let eqs: Vec<Poly> = rest.iter().map(|e| e.substitute(&sub)).collect();
        (eqs, next)
    };
    for (i, e) in live.iter().enumerate() {
        for v in vars {
            if sigma.contains_key(v) || e.mentions_under_f(v) || e.degree_in(v) != 1 {
                continue;
            }
            let coef = e.coefficient_of(v, 1);
            let Some(k) = coef.as_constant() else { continue };
            let rest = e - &Poly::sym(v).scale(&k);
            let value = rest.scale(&(-Rational::one() / k));
            let mut others = live.clone();
            others.remove(i);
            let (eqs, next) = bind(v, value, &others, &sigma);
            solve_rec(eqs, vars, next, out);
            return;
        }
    }
    for (i, e) in live.iter().enumerate() {
        let syms = e.symbols();
        if syms.len() != 1 {
            continue;
        }
        let v = syms.into_iter().next().unwrap();
        if !vars.contains(&v) || sigma.contains_key(&v) || e.mentions_under_f(&v) {
            continue;
        }
        let coeffs: Option<Vec<Rational>> = (0..=e.degree_in(&v))
            .map(|k| e.coefficient_of(&v, k).as_constant())
            .collect();
        let Some(coeffs) = coeffs else { continue };
        let Some((rs, _)) = rational_roots(&coeffs) else { continue };
        let mut others = live.clone();
        others.remove(i);
        for r in rs {
            let (eqs, next) = bind(&v, Poly::constant(r), &others, &sigma);
            solve_rec(eqs, vars, next, out);
        }
        return;
    }
}

/// Options for theory unification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TuOptions {
    /// Send the `A_0` arguments to a fresh quantified `k` instead of 0.
    pub a0_fresh_constant: bool,
}

/// One substitution found by theory unification together with the
/// partition that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuSolution {
    pub a_z: Vec<Poly>,
    pub a_0: Vec<Poly>,
    pub sigma: Substitution,
}

/// Enumerates partitions `(A_z, A_0)` of the `f`-arguments in mask order and
/// solves `{p = z : A_z} ∪ {p = 0 : A_0}` for the quantified variables.
pub fn theory_unification_solutions(phi: &Formula, opts: TuOptions) -> Vec<TuSolution> {
    let vars = prefix(phi);
    let mut args = collect_f_arguments(phi);
    if args.len() > MAX_TU_ARGS {
        debug!("theory unification: {} arguments, keeping {MAX_TU_ARGS}", args.len());
        args.truncate(MAX_TU_ARGS);
    }
    let taken = phi.symbols();
    let z = fresh_symbol("z", &taken);
    let mut taken2 = taken.clone();
    taken2.insert(z.clone());
    let k = fresh_symbol("k", &taken2);
    let zero_target = if opts.a0_fresh_constant {
        Poly::sym(&k)
    } else {
        Poly::zero()
    };
    let mut out = Vec::new();
    for mask in 0u32..(1 << args.len()) {
        let (mut a_z, mut a_0) = (Vec::new(), Vec::new());
        let mut eqs = Vec::new();
        for (i, p) in args.iter().enumerate() {
            if mask & (1 << i) != 0 {
                eqs.push(p - &Poly::sym(&z));
                a_z.push(p.clone());
            } else {
                eqs.push(p - &zero_target);
                a_0.push(p.clone());
            }
        }
        let sols = solve_argument_system(&eqs, &vars);
        if sols.is_empty() {
            debug!("theory unification: partition {mask:#b} skipped");
        }
        for map in sols {
            let sigma = Substitution::new(map);
            if sigma.is_renaming() {
                continue;
            }
            let mentioned: BTreeSet<Symbol> = sigma.map.values().flat_map(Poly::symbols).collect();
            let fresh: Vec<Symbol> = [&z, &k]
                .into_iter()
                .filter(|s| mentioned.contains(*s))
                .cloned()
                .collect();
            out.push(TuSolution {
                a_z: a_z.clone(),
                a_0: a_0.clone(),
                sigma: sigma.with_fresh(fresh),
            });
        }
    }
    out
}

pub fn theory_unification_instantiations(phi: &Formula, opts: TuOptions) -> InstantiationBatch {
    let mut batch = InstantiationBatch::new(Origin::TheoryUnif, phi);
    let mut seen = BTreeSet::from([phi.normalized_key()]);
    for sol in theory_unification_solutions(phi, opts) {
        batch.push(sol.sigma, &mut seen);
    }
    batch
}

/// Enrichment stages of the default pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Tu,
    TuPi,
    TuPiFi,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrichOptions {
    pub tu: bool,
    pub term_level: TermLevel,
    /// Extra small terms beyond the level's default set.
    pub extra_terms: Vec<Poly>,
    pub fi_budget: usize,
    pub tu_options: TuOptions,
}

impl Default for EnrichOptions {
    fn default() -> Self {
        EnrichOptions {
            tu: true,
            term_level: TermLevel::Minimal,
            extra_terms: Vec::new(),
            fi_budget: DEFAULT_FI_BUDGET,
            tu_options: TuOptions::default(),
        }
    }
}

/// Quantified top-level conjuncts of the specification.
pub fn quantified_sources(spec: &Formula) -> Vec<Formula> {
    spec.conjuncts()
        .into_iter()
        .filter(|f| matches!(f, Formula::Forall(..)))
        .collect()
}

/// Extends the obligation's instantiations for `stage`. Existing entries
/// are kept and never duplicated, so repeated calls are idempotent.
pub fn enrich_obligation(
    ob: &ProofObligation,
    stage: Stage,
    opts: &EnrichOptions,
) -> (ProofObligation, Vec<InstantiationBatch>) {
    let mut out = ob.clone();
    let mut seen: BTreeSet<Formula> = out.instantiations.iter().map(Formula::normalized_key).collect();
    let mut batches = Vec::new();
    let sources = quantified_sources(&ob.spec);
    let mut terms = SmallTermSet::new(opts.term_level, &ob.skolem_terms(), &ob.spec);
    for t in &opts.extra_terms {
        if !terms.terms.contains(t) {
            terms.terms.push(t.clone());
        }
    }
    for phi in &sources {
        seen.insert(phi.normalized_key());
    }
    for phi in &sources {
        let mut produced = Vec::new();
        if opts.tu {
            produced.push(theory_unification_instantiations(phi, opts.tu_options));
        }
        if stage >= Stage::TuPi {
            produced.push(partial_instantiations(phi, &terms, false));
        }
        if stage >= Stage::TuPiFi {
            produced.push(full_instantiations_fi(phi, &terms, opts.fi_budget));
        }
        for b in produced {
            for f in &b.formulas {
                if seen.insert(f.normalized_key()) {
                    out.instantiations.push(f.clone());
                }
            }
            batches.push(b);
        }
    }
    (out, batches)
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
    fn u6_partitions() {
        let phi = spec("forall x y. f(x+y) - f(x-y) = x*y");
        let sols = theory_unification_solutions(&phi, TuOptions::default());
        let z = Poly::var("z");
        let got: Vec<(Poly, Poly)> = sols
            .iter()
            .map(|s| (s.sigma.map[&Symbol::new("x")].clone(), s.sigma.map[&Symbol::new("y")].clone()))
            .collect();
        let half = z.scale(&rat(1, 2));
        let expect = vec![
            (Poly::zero(), Poly::zero()),
            (half.clone(), half.clone()),
            (half.clone(), -&half),
            (z.clone(), Poly::zero()),
        ];
        for e in &expect {
            assert!(got.contains(e), "missing {e:?}");
        }
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn singleton_argument_drops_renaming() {
        let phi = spec("forall x. f(x) - 2*f(0) = x");
        let b = theory_unification_instantiations(&phi, TuOptions::default());
        assert_eq!(b.witnesses, vec![Substitution::single(&Symbol::new("x"), Poly::zero())]);
    }

    #[test]
    fn pi_with_empty_set() {
        let phi = spec("forall x y. f(x+y) = x*f(y) + y*f(x)");
        let empty = SmallTermSet::from_terms(Vec::new());
        assert!(partial_instantiations(&phi, &empty, false).is_empty());
        assert_eq!(partial_instantiations(&phi, &empty, true).formulas, vec![phi.clone()]);
    }

    #[test]
    fn fi_budget_caps() {
        let phi = spec("forall x y. f(x+y) = x*f(y) + y*f(x)");
        let s = SmallTermSet::from_terms(vec![Poly::zero(), Poly::var("c")]);
        let b = full_instantiations_fi(&phi, &s, 1);
        assert_eq!(b.len(), 1);
        assert!(b.truncated);
    }

    #[test]
    fn univariate_root_branching() {
        let x = Poly::var("x");
        let sols = solve_argument_system(&[&x * &x - Poly::int(4)], &[Symbol::new("x")]);
        assert_eq!(sols.len(), 2);
    }
}
