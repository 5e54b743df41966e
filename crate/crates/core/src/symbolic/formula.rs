//! First-order formulas over polynomial comparisons `p ⋈ 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use super::poly::{Poly, Rational, Symbol};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Rel {
    Eq,
    Ne,
    Le,
    Lt,
}

impl Rel {
    fn holds(self, c: &Rational) -> bool {
        match self {
            Rel::Eq => c.is_zero(),
            Rel::Ne => !c.is_zero(),
            Rel::Le => !c.is_positive(),
            Rel::Lt => c.is_negative(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Le => "<=",
            Rel::Lt => "<",
        }
    }
}

/// A formula; comparisons are stored as `poly ⋈ 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    True,
    False,
    Cmp(Poly, Rel),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<Symbol>, Box<Formula>),
    Exists(Vec<Symbol>, Box<Formula>),
}

/// A substitution together with the fresh variables its images introduce;
/// those become universally quantified in an instantiation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Substitution {
    pub map: BTreeMap<Symbol, Poly>,
    pub fresh: Vec<Symbol>,
}

impl Substitution {
    pub fn new(map: BTreeMap<Symbol, Poly>) -> Self {
        Substitution {
            map,
            fresh: Vec::new(),
        }
    }

    pub fn single(var: &Symbol, image: Poly) -> Self {
        Substitution::new(BTreeMap::from([(var.clone(), image)]))
    }

    pub fn with_fresh(mut self, fresh: Vec<Symbol>) -> Self {
        self.fresh = fresh;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// True if every image is a distinct fresh variable, i.e. the
    /// substitution only renames.
    pub fn is_renaming(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.map.values().all(|p| {
            let syms = p.symbols();
            syms.len() == 1
                && *p == Poly::sym(syms.iter().next().unwrap())
                && seen.insert(p.clone())
        })
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

impl Formula {
    pub fn cmp(p: Poly, rel: Rel) -> Formula {
        Formula::Cmp(p, rel)
    }

    /// `lhs = rhs`, stored as `lhs - rhs = 0`.
    pub fn eq(lhs: &Poly, rhs: &Poly) -> Formula {
        Formula::Cmp(lhs - rhs, Rel::Eq)
    }

    pub fn ne(lhs: &Poly, rhs: &Poly) -> Formula {
        Formula::Cmp(lhs - rhs, Rel::Ne)
    }

    pub fn le(lhs: &Poly, rhs: &Poly) -> Formula {
        Formula::Cmp(lhs - rhs, Rel::Le)
    }

    pub fn lt(lhs: &Poly, rhs: &Poly) -> Formula {
        Formula::Cmp(lhs - rhs, Rel::Lt)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        Formula::And(parts)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Formula::Or(parts)
    }

    pub fn forall(vars: Vec<Symbol>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Forall(vars, Box::new(body))
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    /// Quantifier-free.
    pub fn is_ground(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => true,
            Formula::Not(f) => f.is_ground(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_ground),
            Formula::Implies(a, b) => a.is_ground() && b.is_ground(),
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn has_exists(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => false,
            Formula::Not(f) => f.has_exists(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_exists),
            Formula::Implies(a, b) => a.has_exists() || b.has_exists(),
            Formula::Forall(_, b) => b.has_exists(),
            Formula::Exists(..) => true,
        }
    }

    /// Visits every comparison polynomial.
    pub fn polys(&self) -> Vec<&Poly> {
        let mut out = Vec::new();
        self.collect_polys(&mut out);
        out
    }

    fn collect_polys<'a>(&'a self, out: &mut Vec<&'a Poly>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(p, _) => out.push(p),
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => {
                f.collect_polys(out)
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_polys(out)),
            Formula::Implies(a, b) => {
                a.collect_polys(out);
                b.collect_polys(out);
            }
        }
    }

    /// Rewrites every comparison polynomial.
    pub fn map_polys(&self, g: &mut dyn FnMut(&Poly) -> Poly) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Cmp(p, r) => Formula::Cmp(g(p), *r),
            Formula::Not(f) => Formula::not(f.map_polys(g)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.map_polys(g)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.map_polys(g)).collect()),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.map_polys(g)), Box::new(b.map_polys(g)))
            }
            Formula::Forall(v, f) => Formula::Forall(v.clone(), Box::new(f.map_polys(g))),
            Formula::Exists(v, f) => Formula::Exists(v.clone(), Box::new(f.map_polys(g))),
        }
    }

    /// All symbols mentioned, bound or not.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for p in self.polys() {
            out.extend(p.symbols());
        }
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                out.extend(v.iter().cloned());
                f.collect_binders(out);
            }
            Formula::Not(f) => f.collect_binders(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_binders(out)),
            Formula::Implies(a, b) => {
                a.collect_binders(out);
                b.collect_binders(out);
            }
            Formula::True | Formula::False | Formula::Cmp(..) => {}
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Cmp(p, _) => p.symbols(),
            Formula::Not(f) => f.free_symbols(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().flat_map(Formula::free_symbols).collect()
            }
            Formula::Implies(a, b) => {
                let mut s = a.free_symbols();
                s.extend(b.free_symbols());
                s
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                let mut s = f.free_symbols();
                for x in v {
                    s.remove(x);
                }
                s
            }
        }
    }

    /// Capture-naive substitution of free symbols; bound occurrences are left
    /// alone. Images are assumed not to mention bound names.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Poly>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Cmp(p, r) => Formula::Cmp(p.substitute(map), *r),
            Formula::Not(f) => Formula::not(f.substitute(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.substitute(map)), Box::new(b.substitute(map)))
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                let inner: BTreeMap<Symbol, Poly> = map
                    .iter()
                    .filter(|(k, _)| !v.contains(k))
                    .map(|(k, p)| (k.clone(), p.clone()))
                    .collect();
                let body = Box::new(f.substitute(&inner));
                match self {
                    Formula::Forall(..) => Formula::Forall(v.clone(), body),
                    _ => Formula::Exists(v.clone(), body),
                }
            }
        }
    }

    /// Ground simplification: folds constant comparisons, flattens and
    /// deduplicates connectives, pushes negation into comparisons, and drops
    /// unused quantified variables.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Cmp(p, r) => match p.as_constant() {
                Some(c) => {
                    if r.holds(&c) {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
                None => Formula::Cmp(p.clone(), *r),
            },
            Formula::Not(f) => negate(f.simplify()),
            Formula::And(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    match f.simplify() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(inner) => parts.extend(inner),
                        g => parts.push(g),
                    }
                }
                dedup_keep_order(&mut parts);
                match parts.len() {
                    0 => Formula::True,
                    1 => parts.pop().unwrap(),
                    _ => Formula::And(parts),
                }
            }
            Formula::Or(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    match f.simplify() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(inner) => parts.extend(inner),
                        g => parts.push(g),
                    }
                }
                dedup_keep_order(&mut parts);
                match parts.len() {
                    0 => Formula::False,
                    1 => parts.pop().unwrap(),
                    _ => Formula::Or(parts),
                }
            }
            Formula::Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::False, _) | (_, Formula::True) => Formula::True,
                (Formula::True, b) => b,
                (a, Formula::False) => negate(a),
                (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
            },
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                let body = f.simplify();
                let used = body.free_symbols();
                let vars: Vec<Symbol> = v.iter().filter(|x| used.contains(x)).cloned().collect();
                if vars.is_empty() {
                    body
                } else if matches!(self, Formula::Forall(..)) {
                    match body {
                        Formula::Forall(inner, b) => {
                            let mut all = vars;
                            all.extend(inner);
                            Formula::Forall(all, b)
                        }
                        b => Formula::Forall(vars, Box::new(b)),
                    }
                } else {
                    Formula::Exists(vars, Box::new(body))
                }
            }
        }
    }

    /// Canonical representative used for deduplication: simplified, with
    /// comparison polynomials scaled (`=`/`≠` to monic, `≤`/`<` to leading
    /// coefficient ±1) and commutative connectives sorted.
    pub fn normalized_key(&self) -> Formula {
        fn norm(f: &Formula) -> Formula {
            match f {
                Formula::Cmp(p, r) => match r {
                    Rel::Eq | Rel::Ne => Formula::Cmp(p.monic(), *r),
                    Rel::Le | Rel::Lt => Formula::Cmp(p.sign_normalized(), *r),
                },
                Formula::Not(g) => Formula::not(norm(g)),
                Formula::And(fs) => {
                    let mut v: Vec<Formula> = fs.iter().map(norm).collect();
                    v.sort();
                    v.dedup();
                    Formula::And(v)
                }
                Formula::Or(fs) => {
                    let mut v: Vec<Formula> = fs.iter().map(norm).collect();
                    v.sort();
                    v.dedup();
                    Formula::Or(v)
                }
                Formula::Implies(a, b) => Formula::Implies(Box::new(norm(a)), Box::new(norm(b))),
                Formula::Forall(v, g) => Formula::Forall(v.clone(), Box::new(norm(g))),
                Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(norm(g))),
                other => other.clone(),
            }
        }
        norm(&self.simplify())
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<Formula> {
        match self {
            Formula::And(fs) => fs.iter().flat_map(Formula::conjuncts).collect(),
            Formula::True => Vec::new(),
            f => vec![f.clone()],
        }
    }

    /// Syntactic size used for ranking conjectures.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Cmp(p, _) => 2 + p.size(),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
            Formula::Forall(v, f) | Formula::Exists(v, f) => 1 + v.len() + f.size(),
        }
    }

    /// Instantiates the leading universal quantifier block with `sigma`.
    ///
    /// Variables outside `sigma`'s domain stay quantified, as do the fresh
    /// variables the images introduce; the body is renormalized and
    /// ground-simplified.
    pub fn instantiate(&self, sigma: &Substitution) -> Formula {
        match self {
            Formula::Forall(vars, body) => {
                let mut qvars: Vec<Symbol> = vars
                    .iter()
                    .filter(|v| !sigma.map.contains_key(*v))
                    .cloned()
                    .collect();
                for v in &sigma.fresh {
                    if !qvars.contains(v) {
                        qvars.push(v.clone());
                    }
                }
                let sub: BTreeMap<Symbol, Poly> = sigma
                    .map
                    .iter()
                    .filter(|(k, _)| vars.contains(k))
                    .map(|(k, p)| (k.clone(), p.clone()))
                    .collect();
                Formula::forall(qvars, body.substitute(&sub)).simplify()
            }
            other => other.simplify(),
        }
    }

    /// Splits a leading universal block into its variables and body.
    pub fn as_forall(&self) -> Option<(&[Symbol], &Formula)> {
        match self {
            Formula::Forall(v, b) => Some((v, b)),
            _ => None,
        }
    }
}

fn dedup_keep_order(parts: &mut Vec<Formula>) {
    let mut seen = BTreeSet::new();
    parts.retain(|f| seen.insert(f.clone()));
}

fn negate(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Cmp(p, Rel::Eq) => Formula::Cmp(p, Rel::Ne),
        Formula::Cmp(p, Rel::Ne) => Formula::Cmp(p, Rel::Eq),
        Formula::Cmp(p, Rel::Le) => Formula::Cmp(-p, Rel::Lt),
        Formula::Cmp(p, Rel::Lt) => Formula::Cmp(-p, Rel::Le),
        Formula::Not(g) => *g,
        Formula::And(fs) => Formula::Or(fs.into_iter().map(negate).collect()).simplify(),
        Formula::Or(fs) => Formula::And(fs.into_iter().map(negate).collect()).simplify(),
        g => Formula::not(g),
    }
}

fn fmt_sub(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::True | Formula::False | Formula::Cmp(..) | Formula::Not(_) => write!(out, "{f}"),
        _ => write!(out, "({f})"),
    }
}

impl fmt::Display for Formula {
    /// Prints in the problem-language syntax.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => out.write_str("true"),
            Formula::False => out.write_str("false"),
            Formula::Cmp(p, r) => write!(out, "{p} {} 0", r.symbol()),
            Formula::Not(f) => {
                out.write_str("not ")?;
                fmt_sub(f, out)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self, Formula::And(_)) { " and " } else { " or " };
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.write_str(sep)?;
                    }
                    fmt_sub(f, out)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                fmt_sub(a, out)?;
                out.write_str(" -> ")?;
                fmt_sub(b, out)
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                let q = if matches!(self, Formula::Forall(..)) { "forall" } else { "exists" };
                write!(out, "{q}")?;
                for x in v {
                    write!(out, " {x}")?;
                }
                write!(out, ". {f}")
            }
        }
    }
}
