//! Bounded exact solver for small polynomial parameter systems.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::TemplateError;
use crate::symbolic::{Formula, Poly, PowerProduct, Rational, Symbol};

const MAX_DEPTH: usize = 8;

/// One branch of the solution set of a parameter system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ParameterSolution {
    /// Solved parameters; images mention only unsolved parameters.
    pub assignment: BTreeMap<Symbol, Poly>,
    /// Ground side conditions Γ over the unsolved parameters.
    pub residual_constraints: Vec<Formula>,
}

impl ParameterSolution {
    pub fn gamma(&self) -> Formula {
        Formula::and(self.residual_constraints.clone()).simplify()
    }

    /// Whether a full rational parameter point lies in this branch.
    pub fn contains(&self, point: &BTreeMap<Symbol, Rational>) -> bool {
        let free: BTreeMap<Symbol, Poly> = point
            .iter()
            .filter(|(k, _)| !self.assignment.contains_key(*k))
            .map(|(k, v)| (k.clone(), Poly::constant(v.clone())))
            .collect();
        for (k, v) in &self.assignment {
            match (v.substitute(&free).as_constant(), point.get(k)) {
                (Some(a), Some(b)) if a == *b => {}
                _ => return false,
            }
        }
        self.residual_constraints
            .iter()
            .all(|g| g.substitute(&free).simplify().is_true())
    }
}

struct Branch {
    assign: BTreeMap<Symbol, Poly>,
    eqs: Vec<Poly>,
    nonzero: Vec<Poly>,
    depth: usize,
}

impl Branch {
    fn replace_eq(&self, i: usize, eq: Poly, extra_nonzero: Vec<Poly>) -> Branch {
        let mut eqs = self.eqs.clone();
        eqs[i] = eq;
        let mut nonzero = self.nonzero.clone();
        nonzero.extend(extra_nonzero);
        Branch {
            assign: self.assign.clone(),
            eqs,
            nonzero,
            depth: self.depth + 1,
        }
    }

    fn with_value(&self, p: &Symbol, value: Poly, extra_nonzero: Vec<Poly>, depth: usize) -> Branch {
        let sub = BTreeMap::from([(p.clone(), value.clone())]);
        let mut assign: BTreeMap<Symbol, Poly> = self
            .assign
            .iter()
            .map(|(k, v)| (k.clone(), v.substitute(&sub)))
            .collect();
        assign.insert(p.clone(), value);
        let mut nonzero = self.nonzero.clone();
        nonzero.extend(extra_nonzero);
        Branch {
            assign,
            eqs: self.eqs.iter().map(|e| e.substitute(&sub)).collect(),
            nonzero: nonzero.iter().map(|e| e.substitute(&sub)).collect(),
            depth,
        }
    }
}

/// Solves `system = 0` for `params`, returning a finite list of pairwise
/// disjoint branches that together cover every real solution.
pub fn solve_parameter_system(
    system: &[Poly],
    params: &[Symbol],
) -> Result<Vec<ParameterSolution>, TemplateError> {
    let root = Branch {
        assign: BTreeMap::new(),
        eqs: system.to_vec(),
        nonzero: Vec::new(),
        depth: 0,
    };
    let mut out = Vec::new();
    go(root, params, &mut out)?;
    let mut seen = BTreeSet::new();
    out.retain(|s| seen.insert(s.clone()));
    Ok(out)
}

fn go(mut b: Branch, params: &[Symbol], out: &mut Vec<ParameterSolution>) -> Result<(), TemplateError> {
    let mut eqs: Vec<Poly> = Vec::new();
    let mut keys = BTreeSet::new();
    for e in b.eqs.iter().map(|e| e.substitute(&b.assign)) {
        if e.is_zero() {
            continue;
        }
        if e.is_constant() {
            return Ok(());
        }
        if keys.insert(e.monic()) {
            eqs.push(e);
        }
    }
    let mut nonzero = Vec::new();
    for n in b.nonzero.iter().map(|e| e.substitute(&b.assign)) {
        if n.is_zero() {
            return Ok(());
        }
        if !n.is_constant() && !nonzero.contains(&n) {
            nonzero.push(n);
        }
    }
    b.eqs = eqs;
    b.nonzero = nonzero;

    if b.eqs.is_empty() {
        out.push(ParameterSolution {
            assignment: b.assign,
            residual_constraints: b
                .nonzero
                .iter()
                .map(|n| Formula::ne(n, &Poly::zero()))
                .collect(),
        });
        return Ok(());
    }

    let unsolved: Vec<&Symbol> = params.iter().filter(|p| !b.assign.contains_key(*p)).collect();

    // Linear elimination with a constant pivot.
    for (i, e) in b.eqs.iter().enumerate() {
        for p in &unsolved {
            if e.degree_in(p) != 1 {
                continue;
            }
            let coef = e.coefficient_of(p, 1);
            if let Some(k) = coef.as_constant() {
                let rest = e - &(&coef * &Poly::sym(p));
                let value = rest.scale(&(-Rational::one() / k));
                let mut next = b.with_value(p, value, Vec::new(), b.depth);
                next.eqs.remove(i);
                return go(next, params, out);
            }
        }
    }

    if b.depth >= MAX_DEPTH {
        return Err(TemplateError::SystemTooHard(describe(&b.eqs)));
    }

    // Monomial content: p1^k1 ... * q = 0 splits into p1 = 0, ..., q = 0.
    for (i, e) in b.eqs.iter().enumerate() {
        let content = monomial_content(e);
        if content.is_one() {
            continue;
        }
        let atoms: Vec<Poly> = content
            .factors()
            .iter()
            .map(|(a, _)| Poly::from_atom(a.clone()))
            .collect();
        let quotient = divide_by_pp(e, &content);
        let mut branches = Vec::new();
        for (j, a) in atoms.iter().enumerate() {
            branches.push(b.replace_eq(i, a.clone(), atoms[..j].to_vec()));
        }
        branches.push(b.replace_eq(i, quotient, atoms.clone()));
        for br in branches {
            go(br, params, out)?;
        }
        return Ok(());
    }

    // Univariate equations with constant coefficients: rational roots.
    for e in &b.eqs {
        let syms = e.symbols();
        if syms.len() != 1 {
            continue;
        }
        let p = syms.into_iter().next().unwrap();
        if !unsolved.contains(&&p) {
            continue;
        }
        let coeffs: Option<Vec<Rational>> = (0..=e.degree_in(&p))
            .map(|k| e.coefficient_of(&p, k).as_constant())
            .collect();
        let Some(coeffs) = coeffs else { continue };
        let (roots, rest) = rational_roots(&coeffs).ok_or_else(|| {
            TemplateError::SystemTooHard(format!("coefficients too large in {e}"))
        })?;
        if count_real_roots(&rest) > 0 {
            return Err(TemplateError::SystemTooHard(format!(
                "irrational roots of {e}"
            )));
        }
        for r in roots {
            let next = b.with_value(&p, Poly::constant(r), Vec::new(), b.depth + 1);
            go(next, params, out)?;
        }
        return Ok(());
    }

    // Quadratic in one parameter with a perfect-square discriminant.
    for e in &b.eqs {
        for p in &unsolved {
            if e.degree_in(p) != 2 {
                continue;
            }
            let Some(a) = e.coefficient_of(p, 2).as_constant() else { continue };
            let bb = e.coefficient_of(p, 1);
            let cc = e.coefficient_of(p, 0);
            let disc = &(&bb * &bb) - &cc.scale(&(Rational::from_integer(4.into()) * &a));
            if let Some(d) = disc.as_constant() {
                if d.is_negative() {
                    return Ok(());
                }
            }
            let Some(s) = disc.sqrt() else { continue };
            let inv = Rational::one() / (Rational::from_integer(2.into()) * &a);
            let r1 = (&(-&bb) + &s).scale(&inv);
            let r2 = (&(-&bb) - &s).scale(&inv);
            go(b.with_value(p, r1, Vec::new(), b.depth + 1), params, out)?;
            if !s.is_zero() {
                let guard = if s.is_constant() { Vec::new() } else { vec![s.clone()] };
                go(b.with_value(p, r2, guard, b.depth + 1), params, out)?;
            }
            return Ok(());
        }
    }

    Err(TemplateError::SystemTooHard(describe(&b.eqs)))
}

fn describe(eqs: &[Poly]) -> String {
    let parts: Vec<String> = eqs.iter().map(|e| format!("{e} = 0")).collect();
    parts.join(", ")
}

/// Largest power product dividing every term.
fn monomial_content(p: &Poly) -> PowerProduct {
    let mut terms = p.terms();
    let Some((first, _)) = terms.next() else {
        return PowerProduct::one();
    };
    let mut g = first.clone();
    for (pp, _) in terms {
        let mut keep = PowerProduct::one();
        for (a, e) in g.factors() {
            let m = (*e).min(pp.exponent_of(a));
            for _ in 0..m {
                keep = keep.mul(&PowerProduct::atom(a.clone()));
            }
        }
        g = keep;
        if g.is_one() {
            break;
        }
    }
    g
}

fn divide_by_pp(p: &Poly, d: &PowerProduct) -> Poly {
    let mut out = Poly::zero();
    for (pp, c) in p.terms() {
        out = &out + &Poly::monomial(c.clone(), pp.div(d).expect("content divides every term"));
    }
    out
}

/// Rational roots of a univariate polynomial (coefficients by ascending
/// degree) and the cofactor left after dividing them out. `None` when the
/// coefficients are too large to enumerate divisors.
pub(crate) fn rational_roots(coeffs: &[Rational]) -> Option<(Vec<Rational>, Vec<Rational>)> {
    let mut poly = trim(coeffs.to_vec());
    let mut roots = Vec::new();
    if poly.len() <= 1 {
        return Some((roots, poly));
    }
    if poly[0].is_zero() {
        roots.push(Rational::zero());
        while poly.len() > 1 && poly[0].is_zero() {
            poly.remove(0);
        }
    }
    let lcm = poly
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = poly.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let lead = ints.last().unwrap().abs().to_u64()?;
    let tail = ints[0].abs().to_u64()?;
    let mut candidates = BTreeSet::new();
    for p in divisors(tail)? {
        for q in divisors(lead)? {
            let r = Rational::new(BigInt::from(p), BigInt::from(q));
            candidates.insert(r.clone());
            candidates.insert(-r);
        }
    }
    for r in candidates {
        if poly.len() <= 1 {
            break;
        }
        if eval(&poly, &r).is_zero() {
            roots.push(r.clone());
            while poly.len() > 1 && eval(&poly, &r).is_zero() {
                poly = deflate(&poly, &r);
            }
        }
    }
    roots.sort();
    Some((roots, poly))
}

fn divisors(n: u64) -> Option<Vec<u64>> {
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    Some(out)
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Divides by `(x - r)`, assuming `r` is a root.
fn deflate(p: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = p.len() - 1;
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for k in (1..=n).rev() {
        carry = &p[k] + carry * r;
        q[k - 1] = carry.clone();
    }
    q
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let k = r.len() - 1 - db;
        let factor = r.last().unwrap() / b.last().unwrap();
        for (i, c) in b.iter().enumerate() {
            r[i + k] = &r[i + k] - &factor * c;
        }
        r.pop();
        r = trim(r);
        if r.len() <= db {
            break;
        }
    }
    trim(r)
}

/// Number of distinct real roots by Sturm's theorem.
pub(crate) fn count_real_roots(p: &[Rational]) -> usize {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let deriv: Vec<Rational> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
        .collect();
    let mut seq = vec![p, trim(deriv)];
    loop {
        let n = seq.len();
        if seq[n - 1].len() == 1 && seq[n - 1][0].is_zero() {
            seq.pop();
            break;
        }
        if seq[n - 1].len() == 1 {
            break;
        }
        let r = poly_rem(&seq[n - 2], &seq[n - 1]);
        let r: Vec<Rational> = r.into_iter().map(|c| -c).collect();
        seq.push(r);
    }
    let sign_changes = |at_pos_inf: bool| {
        let signs: Vec<i8> = seq
            .iter()
            .filter_map(|q| {
                let lc = q.last().unwrap();
                if lc.is_zero() {
                    return None;
                }
                let odd = (q.len() - 1) % 2 == 1;
                let s: i8 = if lc.is_positive() { 1 } else { -1 };
                Some(if !at_pos_inf && odd { -s } else { s })
            })
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    sign_changes(false).saturating_sub(sign_changes(true))
}
