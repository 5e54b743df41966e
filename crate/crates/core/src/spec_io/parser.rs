//! Recursive-descent parser for the `.feq` problem language.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Problem, SpecIoError};
use crate::symbolic::{Formula, Poly, Rational, Rel, Symbol};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Str(String),
    Op(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const OPS: &[(&str, &str)] = &[
    ("<=>", "<->"),
    ("<->", "<->"),
    ("->", "->"),
    ("=>", "->"),
    ("==", "="),
    ("!=", "!="),
    ("<>", "!="),
    ("<=", "<="),
    (">=", ">="),
    ("&&", "and"),
    ("||", "or"),
    ("/\\", "and"),
    ("\\/", "or"),
    ("≠", "!="),
    ("≤", "<="),
    ("≥", ">="),
    ("∀", "forall"),
    ("∃", "exists"),
    ("¬", "not"),
    ("∧", "and"),
    ("∨", "or"),
    ("→", "->"),
    ("·", "*"),
    ("−", "-"),
    ("+", "+"),
    ("-", "-"),
    ("*", "*"),
    ("/", "/"),
    ("^", "^"),
    ("(", "("),
    (")", ")"),
    (",", ","),
    (".", "."),
    (";", ";"),
    ("=", "="),
    ("<", "<"),
    (">", ">"),
    ("!", "not"),
];

fn lex(text: &str) -> Result<Vec<Token>, SpecIoError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = text;
    while let Some(ch) = rest.chars().next() {
        if ch == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if ch.is_whitespace() {
            col += 1;
            rest = &rest[ch.len_utf8()..];
            continue;
        }
        if ch == '#' || rest.starts_with("//") {
            let end = rest.find('\n').unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        let (tok, len) = if ch.is_ascii_digit() {
            let len = rest
                .char_indices()
                .find(|&(i, c)| {
                    !(c.is_ascii_digit()
                        || (c == '.'
                            && rest[i + 1..].starts_with(|d: char| d.is_ascii_digit())))
                })
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            (Tok::Num(parse_decimal(&rest[..len])), len)
        } else if ch.is_alphabetic() || ch == '_' {
            let len = rest
                .char_indices()
                .find(|&(_, c)| !(c.is_alphanumeric() || c == '_' || c == '\''))
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            let word = &rest[..len];
            let tok = match word {
                "and" => Tok::Op("and"),
                "or" => Tok::Op("or"),
                "not" => Tok::Op("not"),
                "forall" => Tok::Op("forall"),
                "exists" => Tok::Op("exists"),
                "true" => Tok::Op("true"),
                "false" => Tok::Op("false"),
                _ => Tok::Ident(word.to_string()),
            };
            (tok, len)
        } else if ch == '"' {
            let body = &rest[1..];
            let end = body.find('"').ok_or_else(|| SpecIoError::Syntax {
                line,
                col,
                msg: "unterminated string".into(),
            })?;
            (Tok::Str(body[..end].to_string()), end + 2)
        } else if let Some((lit, name)) = OPS.iter().find(|(lit, _)| rest.starts_with(lit)) {
            (Tok::Op(name), lit.len())
        } else {
            return Err(SpecIoError::Syntax {
                line,
                col,
                msg: format!("unexpected character `{ch}`"),
            });
        };
        out.push(Token { tok, line, col });
        col += rest[..len].chars().count();
        rest = &rest[len..];
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn parse_decimal(s: &str) -> Rational {
    match s.split_once('.') {
        None => Rational::from_integer(s.parse::<BigInt>().unwrap()),
        Some((int, frac)) => {
            let num: BigInt = format!("{int}{frac}").parse().unwrap();
            let den = num_traits::pow(BigInt::from(10), frac.len());
            Rational::new(num, den)
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    bound: Vec<Symbol>,
    constants: BTreeSet<Symbol>,
}

type PResult<T> = Result<T, SpecIoError>;

impl Parser {
    fn current(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.current().tok
    }

    fn here(&self) -> (usize, usize) {
        (self.current().line, self.current().col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.current().tok.clone();
        self.pos += 1;
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(SpecIoError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn unsupported<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(SpecIoError::UnsupportedFeature {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn eat(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: &str) -> PResult<()> {
        if self.eat(op) {
            Ok(())
        } else {
            self.syntax(format!("expected `{op}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            t => {
                self.pos -= 1;
                self.syntax(format!("expected a name, found {}", describe(&t)))
            }
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.bump() {
            Tok::Str(s) => Ok(s),
            t => {
                self.pos -= 1;
                self.syntax(format!("expected a string, found {}", describe(&t)))
            }
        }
    }

    // formula := or ( ("->" | "<->") formula )?
    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.formula()?;
            Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)))
        } else if self.eat("<->") {
            let rhs = self.formula()?;
            Ok(Formula::and(vec![
                Formula::Implies(Box::new(lhs.clone()), Box::new(rhs.clone())),
                Formula::Implies(Box::new(rhs), Box::new(lhs)),
            ]))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while self.eat("or") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat("and") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat("not") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("true") {
            return Ok(Formula::True);
        }
        if self.eat("false") {
            return Ok(Formula::False);
        }
        if self.is_op("forall") || self.is_op("exists") {
            return self.quantified();
        }
        if self.is_op("(") {
            // A parenthesis opens either a term or a subformula; try the
            // comparison reading first.
            let save = self.pos;
            match self.comparison() {
                Ok(f) => return Ok(f),
                Err(e @ SpecIoError::UnsupportedFeature { .. }) => return Err(e),
                Err(_) => self.pos = save,
            }
            self.bump();
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        self.comparison()
    }

    fn quantified(&mut self) -> PResult<Formula> {
        let universal = self.is_op("forall");
        self.bump();
        let mut vars = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            let name = self.ident()?;
            self.check_variable_name(&name)?;
            let s = Symbol::new(&name);
            if vars.contains(&s) || self.bound.contains(&s) {
                return self.syntax(format!("variable `{name}` is already bound"));
            }
            vars.push(s);
            self.eat(",");
        }
        if vars.is_empty() {
            return self.syntax("expected at least one variable");
        }
        self.expect(".")?;
        let depth = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let body = self.formula();
        self.bound.truncate(depth);
        let body = Box::new(body?);
        Ok(if universal {
            Formula::Forall(vars, body)
        } else {
            Formula::Exists(vars, body)
        })
    }

    fn check_variable_name(&self, name: &str) -> PResult<()> {
        if name == "f" {
            return self.syntax("`f` names the unknown function");
        }
        if self.constants.contains(&Symbol::new(name)) {
            return self.syntax(format!("`{name}` is declared as a constant"));
        }
        Ok(())
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Tok::Op(o) => *o,
            t => return self.syntax(format!("expected a comparison, found {}", describe(t))),
        };
        let (rel, flip) = match rel {
            "=" => (Rel::Eq, false),
            "!=" => (Rel::Ne, false),
            "<=" => (Rel::Le, false),
            "<" => (Rel::Lt, false),
            ">=" => (Rel::Le, true),
            ">" => (Rel::Lt, true),
            other => return self.syntax(format!("expected a comparison, found `{other}`")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(if flip {
            Formula::cmp(&rhs - &lhs, rel)
        } else {
            Formula::cmp(&lhs - &rhs, rel)
        })
    }

    fn term(&mut self) -> PResult<Poly> {
        let mut acc = if self.eat("-") {
            -self.product()?
        } else {
            self.eat("+");
            self.product()?
        };
        loop {
            if self.eat("+") {
                acc = &acc + &self.product()?;
            } else if self.eat("-") {
                acc = &acc - &self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> PResult<Poly> {
        let mut acc = self.power()?;
        loop {
            if self.eat("*") {
                acc = &acc * &self.power()?;
            } else if self.is_op("/") {
                self.bump();
                let den = self.power()?;
                match den.as_constant() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&(Rational::one() / c)),
                    Some(_) => return self.syntax("division by zero"),
                    None => return self.unsupported("division by a non-constant term"),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> PResult<Poly> {
        let base = self.primary()?;
        if self.eat("^") {
            match self.bump() {
                Tok::Num(n) if n.is_integer() => {
                    let e: u32 = match n.to_integer().try_into() {
                        Ok(e) if e <= 64 => e,
                        _ => return self.unsupported("exponent out of range"),
                    };
                    Ok(base.pow(e))
                }
                _ => {
                    self.pos -= 1;
                    self.unsupported("exponents must be natural-number literals")
                }
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> PResult<Poly> {
        match self.bump() {
            Tok::Num(n) => Ok(Poly::constant(n)),
            Tok::Op("(") => {
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Tok::Op("-") => Ok(-self.power()?),
            Tok::Ident(name) => {
                if self.is_op("(") {
                    if name != "f" {
                        self.pos -= 1;
                        return self.unsupported(format!(
                            "only the single unknown `f` is supported, found `{name}`"
                        ));
                    }
                    self.bump();
                    let arg = self.term()?;
                    if self.is_op(",") {
                        return self.unsupported("f must be unary");
                    }
                    self.expect(")")?;
                    return Ok(Poly::fapp(arg));
                }
                let s = Symbol::new(&name);
                if self.bound.contains(&s) || self.constants.contains(&s) {
                    Ok(Poly::sym(&s))
                } else if name == "f" {
                    self.pos -= 1;
                    self.syntax("`f` must be applied to an argument")
                } else {
                    self.pos -= 1;
                    self.syntax(format!("unbound name `{name}`"))
                }
            }
            t => {
                self.pos -= 1;
                self.syntax(format!("expected a term, found {}", describe(&t)))
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Str(_) => "a string".into(),
        Tok::Op(o) => format!("`{o}`"),
        Tok::Eof => "end of input".into(),
    }
}

pub(super) fn parse(text: &str) -> Result<Problem, SpecIoError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        bound: Vec::new(),
        constants: BTreeSet::new(),
    };
    let mut name = None;
    let mut note = None;
    let mut axioms = Vec::new();
    let mut side = Vec::new();
    while *p.peek() != Tok::Eof {
        if p.eat(";") {
            continue;
        }
        if !matches!(p.peek(), Tok::Ident(_)) {
            axioms.push(p.formula()?);
        } else {
            let (line, col) = p.here();
            let kw = p.ident()?;
            match kw.as_str() {
                "find" => {
                    let f = p.ident()?;
                    if f != "f" {
                        return Err(SpecIoError::UnsupportedFeature {
                            line,
                            col,
                            msg: format!("the unknown must be named `f`, found `{f}`"),
                        });
                    }
                    if p.eat(",") {
                        return p.unsupported("only one unknown function is supported");
                    }
                }
                "problem" => name = Some(p.string()?),
                "note" => note = Some(p.string()?),
                "const" => {
                    while let Tok::Ident(_) = p.peek() {
                        let c = p.ident()?;
                        p.check_variable_name(&c)?;
                        p.constants.insert(Symbol::new(&c));
                        p.eat(",");
                    }
                }
                "where" => side.push(p.formula()?),
                "domain" => {
                    return Err(SpecIoError::UnsupportedFeature {
                        line,
                        col,
                        msg: "domain restrictions are not supported".into(),
                    })
                }
                _ => {
                    // A bare formula statement.
                    p.pos -= 1;
                    axioms.push(p.formula()?);
                }
            }
        }
        if *p.peek() != Tok::Eof {
            p.expect(";")?;
        }
    }
    if axioms.is_empty() && side.is_empty() {
        return Err(SpecIoError::Syntax {
            line: 1,
            col: 1,
            msg: "no specification found".into(),
        });
    }
    axioms.extend(side);
    let spec = if axioms.len() == 1 {
        axioms.pop().unwrap()
    } else {
        Formula::And(axioms)
    };
    Ok(Problem {
        name: name.unwrap_or_default(),
        spec,
        declared_constants: p.constants,
        source_note: note,
    })
}
