//! Ground conjecture generation and the lemma loop.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use log::{debug, info};
use serde::Serialize;
use thiserror::Error;

use crate::portfolio::{script_hash, Portfolio, PortfolioError, PortfolioResult};
use crate::spec_io::{emit_smtlib, EmitOptions, SolverVerdict, SpecIoError, VerdictStatus};
use crate::symbolic::{fresh_symbol, Formula, Poly};
use crate::template::{ProofObligation, SolvedForm};

#[derive(Debug, Error)]
pub enum LemmaError {
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
    #[error(transparent)]
    Emit(#[from] SpecIoError),
    #[error("trace file: {0}")]
    Trace(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConjectureStatus {
    Fresh,
    Redundant,
    Proven,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ConjectureKind {
    /// The solved form instantiated at a term.
    SolvedForm,
    /// One disjunct of a solved-form conjecture.
    Disjunct,
    /// An equation between two generated terms.
    Pair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjecture {
    pub formula: Formula,
    pub kind: ConjectureKind,
    /// The term the solved form was instantiated at.
    pub point: Option<Poly>,
    pub status: ConjectureStatus,
    pub generation: usize,
    pub prover: Option<String>,
    pub time: f64,
}

impl Conjecture {
    pub fn new(formula: Formula, kind: ConjectureKind, generation: usize) -> Conjecture {
        Conjecture {
            formula,
            kind,
            point: None,
            status: ConjectureStatus::Fresh,
            generation,
            prover: None,
            time: 0.0,
        }
    }

    fn at(mut self, point: &Poly) -> Conjecture {
        self.point = Some(point.clone());
        self
    }

    fn rank(&self) -> (ConjectureKind, usize, bool) {
        (self.kind, self.formula.size(), matches!(self.formula, Formula::Or(_)))
    }
}

/// Closure of `seeds` under `+`, `-`, `*` and `f`, where a seed has size 1
/// and each operation adds one node. Terms are listed by construction size,
/// then generation order, without duplicates.
pub fn generate_ground_terms(seeds: &[Poly], size_bound: usize) -> Vec<Poly> {
    sized_ground_terms(seeds, size_bound)
        .into_iter()
        .map(|(t, _)| t)
        .collect()
}

/// As [`generate_ground_terms`], paired with the minimal construction size.
pub fn sized_ground_terms(seeds: &[Poly], size_bound: usize) -> Vec<(Poly, usize)> {
    let mut seen: HashSet<Poly> = HashSet::new();
    let mut levels: Vec<Vec<Poly>> = vec![Vec::new(); size_bound.max(1) + 1];
    for s in seeds {
        if seen.insert(s.clone()) {
            levels[1].push(s.clone());
        }
    }
    for n in 2..=size_bound {
        let mut fresh = Vec::new();
        for t in &levels[n - 1] {
            fresh.push(Poly::fapp(t.clone()));
        }
        for left in 1..n - 1 {
            let right = n - 1 - left;
            for a in &levels[left] {
                for b in &levels[right] {
                    fresh.push(a + b);
                    fresh.push(a - b);
                    fresh.push(a * b);
                }
            }
        }
        for t in fresh {
            if seen.insert(t.clone()) {
                levels[n].push(t);
            }
        }
    }
    levels
        .into_iter()
        .enumerate()
        .flat_map(|(n, ts)| ts.into_iter().map(move |t| (t, n)))
        .collect()
}

/// `⋁ᵢ (Γᵢ ∧ f(s) = tᵢ[x → s])` together with its disjuncts.
pub fn solved_form_at(sf: &SolvedForm, s: &Poly) -> (Formula, Vec<Formula>) {
    let fs = Poly::fapp(s.clone());
    let disjuncts: Vec<Formula> = (0..sf.branches.len())
        .map(|i| {
            Formula::and(vec![
                sf.branches[i].gamma.clone(),
                Formula::eq(&fs, &sf.definition_at(i, s)),
            ])
            .simplify()
        })
        .collect();
    (Formula::or(disjuncts.clone()).simplify(), disjuncts)
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Also instantiate the solved form at generated terms free of `f`,
    /// after the seeds.
    pub solved_form_over_terms: bool,
    /// Cap on equations between terms per call.
    pub max_pairs: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            solved_form_over_terms: true,
            max_pairs: 2000,
        }
    }
}

/// Conjectures for one round, ordered by priority. Anything whose
/// normalized key is in `attempted` is left out.
pub fn generate_conjectures(
    terms: &[(Poly, usize)],
    sf: &SolvedForm,
    seeds: &[Poly],
    attempted: &HashSet<Formula>,
    generation: usize,
    opts: &GenerateOptions,
) -> Vec<Conjecture> {
    let mut keys: HashSet<Formula> = attempted.clone();
    let mut out = Vec::new();
    let mut push = |f: Formula, kind: ConjectureKind, point: Option<&Poly>, out: &mut Vec<Conjecture>| {
        if f.is_true() || f.is_false() || !f.is_ground() {
            return;
        }
        if keys.insert(f.normalized_key()) {
            let c = Conjecture::new(f, kind, generation);
            out.push(match point {
                Some(p) => c.at(p),
                None => c,
            });
        }
    };

    let mut points: Vec<Poly> = seeds.to_vec();
    if opts.solved_form_over_terms {
        for (t, _) in terms {
            if !t.contains_fapp() && !points.contains(t) {
                points.push(t.clone());
            }
        }
    }
    for s in &points {
        let (whole, parts) = solved_form_at(sf, s);
        push(whole, ConjectureKind::SolvedForm, Some(s), &mut out);
        if parts.len() > 1 {
            for d in parts {
                push(d, ConjectureKind::Disjunct, Some(s), &mut out);
            }
        }
    }

    let max_size = terms.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let mut pairs = 0;
    'outer: for total in 2..=2 * max_size {
        for (i, (a, na)) in terms.iter().enumerate() {
            if *na >= total {
                continue;
            }
            for (b, nb) in &terms[i + 1..] {
                if na + nb != total || a == b {
                    continue;
                }
                if !a.contains_fapp() && !b.contains_fapp() {
                    continue;
                }
                let before = out.len();
                push(Formula::eq(a, b), ConjectureKind::Pair, None, &mut out);
                if out.len() > before {
                    pairs += 1;
                    if pairs >= opts.max_pairs {
                        break 'outer;
                    }
                }
            }
        }
    }

    out.sort_by_key(Conjecture::rank);
    out
}

/// What a lemma proof may assume besides the specification and earlier
/// lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaContext {
    pub include_spec: bool,
    pub include_instantiations: bool,
    /// Lemmas obtained with the candidate's negation are only valid for
    /// this obligation.
    pub include_negation: bool,
}

impl Default for LemmaContext {
    fn default() -> Self {
        LemmaContext {
            include_spec: true,
            include_instantiations: false,
            include_negation: false,
        }
    }
}

fn lemma_script(
    ob: &ProofObligation,
    lemmas: &[Formula],
    goal: &Formula,
    ctx: Option<LemmaContext>,
) -> Result<String, SpecIoError> {
    let mut o = ob.clone();
    o.lemmas = lemmas.to_vec();
    let ctx = ctx.unwrap_or(LemmaContext {
        include_spec: false,
        include_instantiations: false,
        include_negation: false,
    });
    let opts = EmitOptions {
        include_spec: ctx.include_spec,
        include_instantiations: ctx.include_instantiations,
        include_lemmas: true,
        include_negation: ctx.include_negation,
        extra: vec![Formula::not(goal.clone()).simplify()],
    };
    emit_smtlib(&o, &opts)
}

fn implied_syntactically(conj: &Formula, proven: &HashSet<Formula>) -> bool {
    let key = conj.normalized_key();
    if proven.contains(&key) {
        return true;
    }
    match conj {
        Formula::Or(parts) => parts.iter().any(|p| proven.contains(&p.normalized_key())),
        _ => false,
    }
}

/// Whether `conj` follows from the lemmas alone: a syntactic check first,
/// then a solver run on the lemmas and the negated conjecture.
pub fn redundancy_check(
    conj: &Conjecture,
    proven: &[Formula],
    portfolio: &Portfolio,
    quick_timeout: f64,
) -> Result<bool, LemmaError> {
    let keys: HashSet<Formula> = proven.iter().map(Formula::normalized_key).collect();
    if implied_syntactically(&conj.formula, &keys) {
        return Ok(true);
    }
    if proven.is_empty() {
        return Ok(false);
    }
    let empty = ProofObligation::new(Formula::True, Vec::new());
    let script = lemma_script(&empty, proven, &conj.formula, None)?;
    let r = portfolio.run(&script, "redundancy", Some(quick_timeout))?;
    Ok(r.verdict.status == VerdictStatus::Unsat)
}

/// The formula actually sent to the solvers for `conj`. A solved-form
/// conjecture at a non-constant term free of `f` is proved at a fresh
/// constant instead, which implies it at every such term.
pub fn proof_goal(ob: &ProofObligation, sf: &SolvedForm, conj: &Conjecture) -> Formula {
    let Some(point) = &conj.point else {
        return conj.formula.clone();
    };
    if point.contains_fapp() || point.is_constant() {
        return conj.formula.clone();
    }
    let mut taken = ob.spec.symbols();
    taken.extend(ob.skolems.iter().cloned());
    for f in ob.negation_constraints.iter().chain(&ob.instantiations).chain(&ob.lemmas) {
        taken.extend(f.symbols());
    }
    let k = Poly::sym(&fresh_symbol("k", &taken));
    let (whole, parts) = solved_form_at(sf, &k);
    match conj.kind {
        ConjectureKind::SolvedForm => whole,
        ConjectureKind::Disjunct => {
            let (_, here) = solved_form_at(sf, point);
            let i = here.iter().position(|d| *d == conj.formula).unwrap_or(0);
            parts[i].clone()
        }
        ConjectureKind::Pair => conj.formula.clone(),
    }
}

/// Lemmas whose skolem constants all occur in `goal`.
pub fn relevant_lemmas(ob: &ProofObligation, lemmas: &[Formula], goal: &Formula) -> Vec<Formula> {
    let in_goal = goal.free_symbols();
    lemmas
        .iter()
        .filter(|l| {
            l.free_symbols()
                .iter()
                .all(|s| !ob.skolems.contains(s) || in_goal.contains(s))
        })
        .cloned()
        .collect()
}

/// Tries to prove `goal` from the context and `lemmas`.
pub fn prove_conjecture(
    ob: &ProofObligation,
    lemmas: &[Formula],
    goal: &Formula,
    portfolio: &Portfolio,
    timeout: f64,
    ctx: LemmaContext,
) -> Result<PortfolioResult, LemmaError> {
    let script = lemma_script(ob, lemmas, goal, Some(ctx))?;
    Ok(portfolio.run(&script, "lemma", Some(timeout))?)
}

#[derive(Debug, Clone)]
pub struct LemmaOptions {
    pub start_bound: usize,
    pub max_bound: usize,
    pub lemma_timeout: f64,
    pub quick_timeout: f64,
    /// Per-solver limit for main-obligation attempts; `None` uses the rest
    /// of the budget.
    pub main_timeout: Option<f64>,
    /// Conjectures proved concurrently.
    pub workers: usize,
    /// Conjectures processed between two attempts on the main obligation.
    pub batch: usize,
    /// Seconds.
    pub budget: f64,
    pub context: LemmaContext,
    /// Attempts the main obligation before generating anything.
    pub precheck: bool,
    pub generate: GenerateOptions,
    /// Emission flags for the main obligation.
    pub emit: EmitOptions,
    pub trace_path: Option<PathBuf>,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        LemmaOptions {
            start_bound: 3,
            max_bound: 5,
            lemma_timeout: 5.0,
            quick_timeout: 1.0,
            main_timeout: None,
            workers: default_workers(),
            batch: 8,
            budget: 3600.0,
            context: LemmaContext::default(),
            precheck: false,
            generate: GenerateOptions::default(),
            emit: EmitOptions::default(),
            trace_path: None,
        }
    }
}

/// Four workers, or fewer on hosts with fewer cores.
pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(4)
}

#[derive(Debug, Clone)]
pub struct LemmaOutcome {
    pub verdict: SolverVerdict,
    /// Proven lemmas in commit order.
    pub lemmas: Vec<Conjecture>,
    /// Every conjecture that left the `Fresh` state.
    pub attempted: Vec<Conjecture>,
    /// The portfolio run that closed the obligation, if any.
    pub closing: Option<PortfolioResult>,
    pub rounds: usize,
    pub budget_exhausted: bool,
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    formula: String,
    kind: ConjectureKind,
    status: ConjectureStatus,
    prover: Option<&'a str>,
    time: f64,
    generation: usize,
}

struct Trace(Option<std::fs::File>);

impl Trace {
    fn write(&mut self, c: &Conjecture) -> Result<(), LemmaError> {
        debug!("conjecture {} -> {:?}", c.formula, c.status);
        if let Some(f) = &mut self.0 {
            let rec = TraceRecord {
                formula: c.formula.to_string(),
                kind: c.kind,
                status: c.status,
                prover: c.prover.as_deref(),
                time: c.time,
                generation: c.generation,
            };
            let line = serde_json::to_string(&rec).map_err(std::io::Error::other)?;
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Proof results keyed by script hash, shared by the workers of one loop.
type ProofCache = Mutex<HashMap<String, (VerdictStatus, String)>>;

fn attempt_conjecture(
    ob: &ProofObligation,
    sf: &SolvedForm,
    mut c: Conjecture,
    lemmas: &[Formula],
    portfolio: &Portfolio,
    opts: &LemmaOptions,
    left: f64,
    cache: &ProofCache,
) -> Result<Conjecture, LemmaError> {
    if left <= 0.0 {
        return Ok(c);
    }
    if redundancy_check(&c, lemmas, portfolio, opts.quick_timeout.min(left))? {
        c.status = ConjectureStatus::Redundant;
        return Ok(c);
    }
    let t = Instant::now();
    let goal = proof_goal(ob, sf, &c);
    let premises = relevant_lemmas(ob, lemmas, &goal);
    let units: Vec<Formula> = premises
        .iter()
        .filter(|l| !matches!(l, Formula::Or(_)))
        .cloned()
        .collect();
    let mut tiers = vec![units];
    if tiers[0].len() < premises.len() {
        tiers.push(premises);
    }
    let (mut status, mut prover) = (VerdictStatus::Unknown, String::new());
    for tier in &tiers {
        let left = left - t.elapsed().as_secs_f64();
        if left <= 0.0 {
            break;
        }
        let script = lemma_script(ob, tier, &goal, Some(opts.context))?;
        let hash = script_hash(&script);
        let cached = cache.lock().unwrap().get(&hash).cloned();
        (status, prover) = match cached {
            Some(hit) => hit,
            None => {
                let r = portfolio.run(&script, "lemma", Some(opts.lemma_timeout.min(left)))?;
                let v = (r.verdict.status, r.verdict.solver_id);
                if v.0.is_definitive() {
                    cache.lock().unwrap().insert(hash, v.clone());
                }
                v
            }
        };
        if status == VerdictStatus::Unsat {
            break;
        }
    }
    c.time = t.elapsed().as_secs_f64();
    if status == VerdictStatus::Unsat {
        c.status = ConjectureStatus::Proven;
        c.prover = Some(prover);
    } else {
        c.status = ConjectureStatus::Failed;
    }
    Ok(c)
}

/// Lemma generation with restarts. After each batch that proves something
/// the main obligation is attempted again; a failed attempt restarts
/// generation with a larger term bound.
pub fn lemma_loop(
    ob: &ProofObligation,
    sf: &SolvedForm,
    portfolio: &Portfolio,
    opts: &LemmaOptions,
) -> Result<LemmaOutcome, LemmaError> {
    let start = Instant::now();
    let remaining = || opts.budget - start.elapsed().as_secs_f64();
    let mut trace = Trace(match &opts.trace_path {
        Some(p) => Some(std::fs::File::create(p)?),
        None => None,
    });
    let mut out = LemmaOutcome {
        verdict: SolverVerdict::new(VerdictStatus::Unknown, "lemma-loop", 0.0),
        lemmas: Vec::new(),
        attempted: Vec::new(),
        closing: None,
        rounds: 0,
        budget_exhausted: false,
    };
    let finish = |mut out: LemmaOutcome, exhausted: bool| {
        out.budget_exhausted = exhausted;
        out.verdict.wall_time = start.elapsed().as_secs_f64();
        out
    };
    if opts.budget <= 0.0 {
        return Ok(finish(out, true));
    }

    let mut proven: Vec<Formula> = ob.lemmas.clone();
    let attempt_main = |lemmas: &[Formula], left: f64| -> Result<PortfolioResult, LemmaError> {
        let mut o = ob.clone();
        o.lemmas = lemmas.to_vec();
        let script = emit_smtlib(&o, &opts.emit)?;
        let limit = opts.main_timeout.map_or(left, |t| t.min(left));
        Ok(portfolio.run(&script, "main", Some(limit))?)
    };

    if opts.precheck {
        let r = attempt_main(&proven, remaining())?;
        if r.verdict.status == VerdictStatus::Unsat {
            out.verdict = r.verdict.clone();
            out.closing = Some(r);
            return Ok(finish(out, false));
        }
    }

    let mut seeds = vec![Poly::zero(), Poly::one()];
    seeds.extend(ob.skolem_terms());
    let mut attempted: HashSet<Formula> = HashSet::new();
    let cache: ProofCache = Mutex::new(HashMap::new());
    let mut bound = opts.start_bound.max(1);
    let workers = opts.workers.max(1);
    let batch = opts.batch.max(workers);

    loop {
        out.rounds += 1;
        let terms = sized_ground_terms(&seeds, bound);
        let conjs = generate_conjectures(&terms, sf, &seeds, &attempted, out.rounds, &opts.generate);
        info!("lemma round {} (bound {bound}): {} conjectures", out.rounds, conjs.len());
        let mut restarted = false;
        for group in conjs.chunks(batch) {
            let mut new_lemma = false;
            for chunk in group.chunks(workers) {
                if remaining() <= 0.0 {
                    return Ok(finish(out, true));
                }
                for c in chunk {
                    attempted.insert(c.formula.normalized_key());
                }
                let snapshot = proven.clone();
                let results: Vec<Result<Conjecture, LemmaError>> = std::thread::scope(|scope| {
                    let handles: Vec<_> = chunk
                        .iter()
                        .map(|c| {
                            let (snapshot, cache) = (&snapshot, &cache);
                            scope.spawn(move || {
                                attempt_conjecture(ob, sf, c.clone(), snapshot, portfolio, opts, remaining(), cache)
                            })
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
                });
                for r in results {
                    let c = r?;
                    if c.status == ConjectureStatus::Fresh {
                        continue;
                    }
                    trace.write(&c)?;
                    if c.status == ConjectureStatus::Proven {
                        info!("lemma proven: {}", c.formula);
                        proven.push(c.formula.clone());
                        out.lemmas.push(c.clone());
                        new_lemma = true;
                    }
                    out.attempted.push(c);
                }
            }
            if new_lemma {
                let left = remaining();
                if left <= 0.0 {
                    return Ok(finish(out, true));
                }
                let r = attempt_main(&proven, left)?;
                if r.verdict.status == VerdictStatus::Unsat {
                    out.verdict = r.verdict.clone();
                    out.closing = Some(r);
                    return Ok(finish(out, false));
                }
                restarted = true;
                break;
            }
        }
        if restarted {
            bound = (bound + 1).min(opts.max_bound.max(bound));
            continue;
        }
        // Round exhausted without a new lemma.
        if bound < opts.max_bound {
            bound += 1;
            continue;
        }
        return Ok(finish(out, false));
    }
}

/// Substitutes the leading universal block of `phi` with ground terms.
pub fn ground_instance(phi: &Formula, images: &[Poly]) -> Option<Formula> {
    let (vars, body) = phi.as_forall()?;
    if vars.len() != images.len() {
        return None;
    }
    let map: BTreeMap<_, _> = vars.iter().cloned().zip(images.iter().cloned()).collect();
    Some(body.substitute(&map).simplify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_io::parse_problem;
    use crate::template::{build_obligation, synthesize, TemplateChoice};

    fn india() -> (ProofObligation, SolvedForm) {
        let p = parse_problem("forall x y. f(x*y + f(x)) = x*f(y) + f(x)").unwrap();
        let s = synthesize(&p.spec, TemplateChoice::Auto).unwrap();
        (build_obligation(&p.spec, &s.solved_form), s.solved_form)
    }

    #[test]
    fn premises_follow_goal_skolems() {
        let (ob, _) = india();
        let c1 = Poly::var("c1");
        let c2 = Poly::var("c2");
        let f = |p: &Poly| Poly::fapp(p.clone());
        let base = Formula::eq(&f(&Poly::zero()), &Poly::zero());
        let on_c1 = Formula::eq(&f(&c1), &Poly::zero());
        let on_c2 = Formula::eq(&f(&c2), &c2);
        let lemmas = vec![base.clone(), on_c1.clone(), on_c2];
        let goal = Formula::eq(&f(&c1), &c1);
        assert_eq!(relevant_lemmas(&ob, &lemmas, &goal), vec![base.clone(), on_c1]);
        let generic = Formula::eq(&f(&Poly::var("k")), &Poly::zero());
        assert_eq!(relevant_lemmas(&ob, &lemmas, &generic), vec![base]);
    }

    #[test]
    fn bound_one_is_the_seeds() {
        let seeds = vec![Poly::zero(), Poly::one(), Poly::var("c")];
        assert_eq!(generate_ground_terms(&seeds, 1), seeds);
    }

    #[test]
    fn zero_only_grows_through_f() {
        let t = generate_ground_terms(&[Poly::zero()], 4);
        let f0 = Poly::fapp(Poly::zero());
        let ff0 = Poly::fapp(f0.clone());
        assert_eq!(t[..3], [Poly::zero(), f0.clone(), ff0.clone()]);
        assert!(t.contains(&Poly::fapp(ff0)));
        assert!(t.iter().all(|p| p.is_zero() || p.contains_fapp()));
    }

    #[test]
    fn india_solved_form_conjectures() {
        let (ob, sf) = india();
        let mut seeds = vec![Poly::zero(), Poly::one()];
        seeds.extend(ob.skolem_terms());
        let terms = sized_ground_terms(&seeds, 3);
        let cs = generate_conjectures(&terms, &sf, &seeds, &HashSet::new(), 1, &GenerateOptions::default());
        let shown: Vec<String> = cs.iter().map(|c| c.formula.normalized_key().to_string()).collect();
        let f0 = Formula::eq(&Poly::fapp(Poly::zero()), &Poly::zero()).normalized_key().to_string();
        assert_eq!(shown[0], f0);
        let f1 = Poly::fapp(Poly::one());
        let disj = Formula::or(vec![Formula::eq(&f1, &Poly::one()), Formula::eq(&f1, &Poly::zero())]);
        assert!(shown.contains(&disj.normalized_key().to_string()));
        assert!(shown.contains(&Formula::eq(&f1, &Poly::one()).normalized_key().to_string()));
        assert!(cs.iter().all(|c| c.formula.is_ground()));
        // no duplicates
        let keys: HashSet<_> = cs.iter().map(|c| c.formula.normalized_key()).collect();
        assert_eq!(keys.len(), cs.len());
    }

    #[test]
    fn attempted_conjectures_are_skipped() {
        let (ob, sf) = india();
        let seeds: Vec<Poly> = [Poly::zero(), Poly::one()].into_iter().chain(ob.skolem_terms()).collect();
        let terms = sized_ground_terms(&seeds, 3);
        let first = generate_conjectures(&terms, &sf, &seeds, &HashSet::new(), 1, &GenerateOptions::default());
        let seen: HashSet<Formula> = first.iter().map(|c| c.formula.normalized_key()).collect();
        let again = generate_conjectures(&terms, &sf, &seeds, &seen, 2, &GenerateOptions::default());
        assert!(again.is_empty());
    }

    #[test]
    fn weakening_is_redundant_without_solvers() {
        let c = Poly::var("c");
        let fc = Poly::fapp(c.clone());
        let lemma = Formula::eq(&fc, &Poly::zero());
        let conj = Conjecture::new(
            Formula::or(vec![Formula::eq(&fc, &c), lemma.clone()]),
            ConjectureKind::SolvedForm,
            1,
        );
        let none = Portfolio::new(Vec::new(), 1);
        assert!(redundancy_check(&conj, std::slice::from_ref(&lemma), &none, 1.0).unwrap());
        let other = Conjecture::new(Formula::eq(&Poly::fapp(Poly::one()), &Poly::one()), ConjectureKind::Disjunct, 1);
        assert!(!redundancy_check(&other, &[], &none, 1.0).unwrap());
    }

    #[test]
    fn zero_budget_is_immediate() {
        let (ob, sf) = india();
        let none = Portfolio::new(Vec::new(), 1);
        let opts = LemmaOptions {
            budget: 0.0,
            ..LemmaOptions::default()
        };
        let out = lemma_loop(&ob, &sf, &none, &opts).unwrap();
        assert_eq!(out.verdict.status, VerdictStatus::Unknown);
        assert!(out.lemmas.is_empty());
        assert!(out.budget_exhausted);
    }
}
