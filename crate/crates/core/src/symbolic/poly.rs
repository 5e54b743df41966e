//! Canonical multivariate polynomials over ℚ whose ring generators are
//! variables and applications `f(p)` of the single unknown function.
//!
//! Every `Poly` is kept in normal form: no zero coefficients, no zero
//! exponents, monomials keyed by a graded-lexicographic power-product order.
//! Two polynomials are equal as functions of their atoms iff they are equal as
//! Rust values.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SymbolicError;

/// Exact rational number; always reduced with a positive denominator.
pub type Rational = BigRational;

/// Builds the rational `num/den`. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// An interned-ish identifier used for variables, skolem constants and
/// template parameters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Returns a symbol named `base` (or `base1`, `base2`, ...) that is not in `taken`.
pub fn fresh_symbol(base: &str, taken: &BTreeSet<Symbol>) -> Symbol {
    let plain = Symbol::new(base);
    if !taken.contains(&plain) {
        return plain;
    }
    (1..)
        .map(|i| Symbol::new(&format!("{base}{i}")))
        .find(|s| !taken.contains(s))
        .expect("unbounded search")
}

/// A ring generator: a variable or an opaque application of `f`.
///
/// Variables sort before applications; applications compare by argument.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    Var(Symbol),
    FApp(Arc<Poly>),
}

impl Atom {
    fn size(&self) -> usize {
        match self {
            Atom::Var(_) => 1,
            Atom::FApp(arg) => 1 + arg.size(),
        }
    }

    /// True if `sym` occurs anywhere in the atom, including nested arguments.
    fn mentions(&self, sym: &Symbol) -> bool {
        match self {
            Atom::Var(s) => s == sym,
            Atom::FApp(arg) => arg.mentions(sym),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(s) => write!(f, "{s}"),
            Atom::FApp(arg) => write!(f, "f({arg})"),
        }
    }
}

/// A product of atoms with positive exponents, sorted by atom.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct PowerProduct(Vec<(Atom, u32)>);

impl PowerProduct {
    pub fn one() -> Self {
        PowerProduct(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        PowerProduct(vec![(a, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn exponent_of(&self, atom: &Atom) -> u32 {
        self.0
            .iter()
            .find(|(a, _)| a == atom)
            .map_or(0, |(_, e)| *e)
    }

    fn from_factors(mut factors: Vec<(Atom, u32)>) -> Self {
        factors.retain(|(_, e)| *e > 0);
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Atom, u32)> = Vec::with_capacity(factors.len());
        for (a, e) in factors {
            match merged.last_mut() {
                Some((last, le)) if *last == a => *le += e,
                _ => merged.push((a, e)),
            }
        }
        PowerProduct(merged)
    }

    pub fn mul(&self, other: &PowerProduct) -> PowerProduct {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        PowerProduct(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &PowerProduct) -> Option<PowerProduct> {
        let mut out = Vec::new();
        for (a, e) in &self.0 {
            let d = other.exponent_of(a);
            if d > *e {
                return None;
            }
            if e - d > 0 {
                out.push((a.clone(), e - d));
            }
        }
        if other.0.iter().any(|(a, _)| self.exponent_of(a) == 0) {
            return None;
        }
        Some(PowerProduct(out))
    }

    /// Square root when every exponent is even.
    pub fn sqrt(&self) -> Option<PowerProduct> {
        self.0
            .iter()
            .map(|(a, e)| (e % 2 == 0).then(|| (a.clone(), e / 2)))
            .collect::<Option<Vec<_>>>()
            .map(PowerProduct)
    }

    fn size(&self) -> usize {
        self.0.iter().map(|(a, e)| a.size() * *e as usize).sum()
    }
}

impl Ord for PowerProduct {
    /// Graded lexicographic order; atoms earlier in the atom order weigh more.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            let (mut i, mut j) = (0, 0);
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => match ex.cmp(ey) {
                            Ordering::Equal => {
                                i += 1;
                                j += 1;
                            }
                            o => return o,
                        },
                    },
                }
            }
        })
    }
}

impl PartialOrd for PowerProduct {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (a, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Canonical polynomial: map from power product to nonzero coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<PowerProduct, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial(c, PowerProduct::one())
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(Rational::from_integer(n.into()))
    }

    pub fn var(name: &str) -> Self {
        Poly::from_atom(Atom::Var(Symbol::new(name)))
    }

    pub fn sym(s: &Symbol) -> Self {
        Poly::from_atom(Atom::Var(s.clone()))
    }

    /// The application `f(arg)`.
    pub fn fapp(arg: Poly) -> Self {
        Poly::from_atom(Atom::FApp(Arc::new(arg)))
    }

    pub fn from_atom(a: Atom) -> Self {
        Poly::monomial(Rational::one(), PowerProduct::atom(a))
    }

    pub fn monomial(c: Rational, pp: PowerProduct) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(pp, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the polynomial has no atoms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&PowerProduct::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Monomials in strictly decreasing power-product order.
    pub fn terms(&self) -> impl Iterator<Item = (&PowerProduct, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn leading(&self) -> Option<(&PowerProduct, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(PowerProduct::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, pp: PowerProduct, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(pp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(pp, k)| (pp.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Divides every coefficient by the leading one (zero stays zero).
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, lc)) => self.scale(&lc.recip()),
            None => Poly::zero(),
        }
    }

    /// Scales so the leading coefficient is `±1` while keeping its sign.
    pub fn sign_normalized(&self) -> Poly {
        match self.leading() {
            Some((_, lc)) => self.scale(&lc.abs().recip()),
            None => Poly::zero(),
        }
    }

    /// Approximate node count of the printed normal form; used to rank terms.
    pub fn size(&self) -> usize {
        if self.terms.is_empty() {
            return 1;
        }
        let joins = self.terms.len() - 1;
        joins
            + self
                .terms
                .iter()
                .map(|(pp, c)| {
                    let coeff = usize::from(pp.is_one() || !c.abs().is_one());
                    coeff + pp.size()
                })
                .sum::<usize>()
    }

    /// All symbols, including those nested in `f` arguments.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for pp in self.terms.keys() {
            for (a, _) in pp.factors() {
                match a {
                    Atom::Var(s) => {
                        out.insert(s.clone());
                    }
                    Atom::FApp(arg) => arg.collect_symbols(out),
                }
            }
        }
    }

    /// Symbols occurring as ring generators, outside any `f` application.
    pub fn top_level_symbols(&self) -> BTreeSet<Symbol> {
        self.terms
            .keys()
            .flat_map(|pp| pp.factors().iter())
            .filter_map(|(a, _)| match a {
                Atom::Var(s) => Some(s.clone()),
                Atom::FApp(_) => None,
            })
            .collect()
    }

    pub fn mentions(&self, sym: &Symbol) -> bool {
        self.terms
            .keys()
            .any(|pp| pp.factors().iter().any(|(a, _)| a.mentions(sym)))
    }

    /// True if `sym` occurs inside some `f` argument.
    pub fn mentions_under_f(&self, sym: &Symbol) -> bool {
        self.fapp_atoms().iter().any(|arg| arg.mentions(sym))
    }

    pub fn contains_fapp(&self) -> bool {
        self.terms
            .keys()
            .any(|pp| pp.factors().iter().any(|(a, _)| matches!(a, Atom::FApp(_))))
    }

    /// Arguments of the outermost `f` applications, in monomial order, deduplicated.
    pub fn fapp_atoms(&self) -> Vec<Arc<Poly>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (pp, _) in self.terms() {
            for (a, _) in pp.factors() {
                if let Atom::FApp(arg) = a {
                    if seen.insert(arg.clone()) {
                        out.push(arg.clone());
                    }
                }
            }
        }
        out
    }

    /// Maximum nesting depth of `f` applications.
    pub fn f_depth(&self) -> usize {
        self.fapp_atoms()
            .iter()
            .map(|arg| 1 + arg.f_depth())
            .max()
            .unwrap_or(0)
    }

    /// Degree in a variable occurring outside `f` applications.
    pub fn degree_in(&self, sym: &Symbol) -> u32 {
        let atom = Atom::Var(sym.clone());
        self.terms
            .keys()
            .map(|pp| pp.exponent_of(&atom))
            .max()
            .unwrap_or(0)
    }

    /// Coefficient of `sym^k`, as a polynomial free of `sym` at top level.
    pub fn coefficient_of(&self, sym: &Symbol, k: u32) -> Poly {
        let atom = Atom::Var(sym.clone());
        let mut out = Poly::zero();
        for (pp, c) in &self.terms {
            if pp.exponent_of(&atom) == k {
                let rest = PowerProduct::from_factors(
                    pp.factors()
                        .iter()
                        .filter(|(a, _)| *a != atom)
                        .cloned()
                        .collect(),
                );
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Simultaneous substitution of symbols by polynomials, including inside
    /// `f` arguments, followed by renormalization.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Poly>) -> Poly {
        if map.is_empty() {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (pp, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (a, e) in pp.factors() {
                let image = match a {
                    Atom::Var(s) => match map.get(s) {
                        Some(p) => p.clone(),
                        None => Poly::from_atom(a.clone()),
                    },
                    Atom::FApp(arg) => Poly::fapp(arg.substitute(map)),
                };
                term = &term * &image.pow(*e);
            }
            out = out + term;
        }
        out
    }

    /// Rebuilds the polynomial bottom-up, replacing every `f(arg)` by
    /// `g(arg')` where `arg'` is the already-rewritten argument. Atoms
    /// produced by `g` are not revisited.
    pub fn map_fapps(&self, g: &mut dyn FnMut(&Poly) -> Poly) -> Poly {
        let mut out = Poly::zero();
        for (pp, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (a, e) in pp.factors() {
                let image = match a {
                    Atom::Var(_) => Poly::from_atom(a.clone()),
                    Atom::FApp(arg) => {
                        let inner = arg.map_fapps(g);
                        g(&inner)
                    }
                };
                term = &term * &image.pow(*e);
            }
            out = out + term;
        }
        out
    }

    /// Evaluates at a rational point, applying `f_interp` innermost first.
    pub fn evaluate(
        &self,
        point: &BTreeMap<Symbol, Rational>,
        f_interp: &dyn Fn(&Rational) -> Rational,
    ) -> Result<Rational, SymbolicError> {
        let mut acc = Rational::zero();
        for (pp, c) in &self.terms {
            let mut term = c.clone();
            for (a, e) in pp.factors() {
                let v = match a {
                    Atom::Var(s) => point
                        .get(s)
                        .cloned()
                        .ok_or_else(|| SymbolicError::UnboundSymbol(s.to_string()))?,
                    Atom::FApp(arg) => f_interp(&arg.evaluate(point, f_interp)?),
                };
                term *= num_traits::pow(v, *e as usize);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Views the polynomial as a polynomial in `vars` with coefficients free
    /// of them. Keys are exponent vectors aligned with `vars`.
    pub fn coefficients_wrt(
        &self,
        vars: &[Symbol],
    ) -> Result<BTreeMap<Vec<u32>, Poly>, SymbolicError> {
        for v in vars {
            if self.mentions_under_f(v) {
                return Err(SymbolicError::VarsUnderF(v.to_string()));
            }
        }
        let atoms: Vec<Atom> = vars.iter().map(|v| Atom::Var(v.clone())).collect();
        let mut out: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        for (pp, c) in &self.terms {
            let key: Vec<u32> = atoms.iter().map(|a| pp.exponent_of(a)).collect();
            let rest = PowerProduct::from_factors(
                pp.factors()
                    .iter()
                    .filter(|(a, _)| !atoms.contains(a))
                    .cloned()
                    .collect(),
            );
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        Ok(out)
    }

    /// Reassembles a `coefficients_wrt` mapping.
    pub fn from_coefficients(vars: &[Symbol], coeffs: &BTreeMap<Vec<u32>, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (exps, c) in coeffs {
            let pp = PowerProduct::from_factors(
                vars.iter()
                    .zip(exps)
                    .map(|(v, e)| (Atom::Var(v.clone()), *e))
                    .collect(),
            );
            out = out + c * &Poly::monomial(Rational::one(), pp);
        }
        out
    }

    /// Exact square root of a polynomial, if it is a perfect square.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lpp, lc) = self.leading()?;
        let root_pp = lpp.sqrt()?;
        let root_c = rational_sqrt(lc)?;
        let mut root = Poly::monomial(root_c, root_pp);
        let two = Rational::from_integer(2.into());
        for _ in 0..=self.terms.len() + 1 {
            let rem = self - &(&root * &root);
            if rem.is_zero() {
                return Some(root);
            }
            let (rpp, rc) = rem.leading()?;
            let (spp, sc) = root.leading()?;
            let next_pp = rpp.div(spp)?;
            if next_pp >= *spp {
                return None;
            }
            let next = Poly::monomial(rc / (&two * sc), next_pp);
            root = root + next;
        }
        None
    }
}

/// Square root of a nonnegative rational when it is rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

impl Ord for Poly {
    /// Lexicographic over monomials taken in decreasing order.
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.terms();
        let mut b = other.terms();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((pa, ca)), Some((pb, cb))) => {
                    let o = pa.cmp(pb).then_with(|| ca.cmp(cb));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
            }
        }
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (pp, c) in &rhs.terms {
            out.add_term(pp.clone(), c.clone());
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (pp, c) in rhs.terms {
            self.add_term(pp, c);
        }
        self
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (pp, c) in &rhs.terms {
            out.add_term(pp.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (pa, ca) in &self.terms {
            for (pb, cb) in &rhs.terms {
                out.add_term(pa.mul(pb), ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Poly {
    /// Prints in the problem-language syntax, e.g. `x^2/4 - 2*x*f(y) + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (pp, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if pp.is_one() {
                f.write_str(&fmt_rational(&mag))?;
                continue;
            }
            let num = mag.numer();
            let den = mag.denom();
            if !num.is_one() {
                write!(f, "{num}*")?;
            }
            write!(f, "{pp}")?;
            if !den.is_one() {
                write!(f, "/{den}")?;
            }
        }
        Ok(())
    }
}

/// Lossy conversion used only for diagnostics.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var("x")
    }
    fn y() -> Poly {
        Poly::var("y")
    }

    #[test]
    fn cancellation_and_identity() {
        let p = &(&x() + &Poly::one()) + &(-x());
        assert_eq!(p, Poly::one());
        assert_eq!(&Poly::zero() + &x(), x());
        assert_eq!(&x() * &Poly::zero(), Poly::zero());
    }

    #[test]
    fn difference_of_squares() {
        let p = &(&x() + &y()) * &(&x() - &y());
        assert_eq!(p, &(&x() * &x()) - &(&y() * &y()));
        assert_eq!(p.to_string(), "x^2 - y^2");
    }

    #[test]
    fn display_fractions() {
        let p = &x().pow(2).scale(&rat(1, 4)) + &Poly::fapp(Poly::zero());
        assert_eq!(p.to_string(), "x^2/4 + f(0)");
        let q = Poly::var("z").scale(&rat(-3, 2));
        assert_eq!(q.to_string(), "-3*z/2");
    }

    #[test]
    fn nested_application_substitution() {
        // f(f(x)) with x -> 2
        let p = Poly::fapp(Poly::fapp(x()));
        let mut m = BTreeMap::new();
        m.insert(Symbol::new("x"), Poly::int(2));
        let q = p.substitute(&m);
        assert_eq!(q, Poly::fapp(Poly::fapp(Poly::int(2))));
        assert!(!q.mentions(&Symbol::new("x")));
    }

    #[test]
    fn coefficients_reject_vars_under_f() {
        let p = &Poly::fapp(x()) + &y();
        let err = p.coefficients_wrt(&[Symbol::new("x")]).unwrap_err();
        assert!(matches!(err, SymbolicError::VarsUnderF(_)));
        assert!(p.coefficients_wrt(&[Symbol::new("y")]).is_ok());
    }

    #[test]
    fn coefficients_of_zero_are_empty() {
        assert!(Poly::zero()
            .coefficients_wrt(&[Symbol::new("x")])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn perfect_square_roots() {
        let a = Poly::var("a");
        let b = Poly::var("b");
        let s = &(&a - &b.scale(&rat(2, 1))) + &Poly::int(3);
        let sq = &s * &s;
        let r = sq.sqrt().unwrap();
        assert_eq!(&r * &r, sq);
        assert!((&sq + &Poly::one()).sqrt().is_none() || {
            let r2 = (&sq + &Poly::one()).sqrt().unwrap();
            &r2 * &r2 == &sq + &Poly::one()
        });
        assert!((&a * &a + b.clone()).sqrt().is_none());
        assert_eq!(rational_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rational_sqrt(&rat(2, 1)), None);
    }

    #[test]
    fn grlex_puts_higher_degree_first() {
        let p = &(&x() + &x().pow(2)) + &Poly::one();
        let order: Vec<String> = p.terms().map(|(pp, _)| pp.to_string()).collect();
        assert_eq!(order, vec!["x^2", "x", "1"]);
    }

    #[test]
    fn fresh_symbols_avoid_taken_names() {
        let taken: BTreeSet<Symbol> = ["c", "c1"].iter().map(|s| Symbol::new(s)).collect();
        assert_eq!(fresh_symbol("c", &taken).as_str(), "c2");
        assert_eq!(fresh_symbol("z", &taken).as_str(), "z");
    }
}
