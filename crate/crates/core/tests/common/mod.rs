#![allow(dead_code)]

use std::collections::BTreeMap;

use funceq::symbolic::{rat, Poly, Rational, Symbol};
use proptest::prelude::*;

/// Expression trees kept unnormalized, so evaluation can be done without `Poly`.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(i64, i64),
    Var(&'static str),
    F(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn poly(&self) -> Poly {
        match self {
            Expr::Num(n, d) => Poly::constant(rat(*n, *d)),
            Expr::Var(v) => Poly::var(v),
            Expr::F(a) => Poly::fapp(a.poly()),
            Expr::Add(a, b) => a.poly() + b.poly(),
            Expr::Sub(a, b) => a.poly() - b.poly(),
            Expr::Mul(a, b) => a.poly() * b.poly(),
        }
    }

    pub fn eval(&self, env: &BTreeMap<Symbol, Rational>) -> Rational {
        match self {
            Expr::Num(n, d) => rat(*n, *d),
            Expr::Var(v) => env[&Symbol::new(v)].clone(),
            Expr::F(a) => interp(&a.eval(env)),
            Expr::Add(a, b) => a.eval(env) + b.eval(env),
            Expr::Sub(a, b) => a.eval(env) - b.eval(env),
            Expr::Mul(a, b) => a.eval(env) * b.eval(env),
        }
    }
}

pub fn interp(t: &Rational) -> Rational {
    t * t - t + rat(1, 2)
}

pub fn expr_over(vars: &'static [&'static str], f_vars: &'static [&'static str]) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        (-4i64..5, 1i64..4).prop_map(|(n, d)| Expr::Num(n, d)),
        proptest::sample::select(vars).prop_map(Expr::Var),
    ];
    let f_leaf = prop_oneof![
        (-3i64..4).prop_map(|n| Expr::Num(n, 1)),
        proptest::sample::select(f_vars).prop_map(Expr::Var),
    ];
    let f_arg = f_leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            inner.prop_map(|a| Expr::F(Box::new(a))),
        ]
    });
    let leaf = prop_oneof![3 => leaf, 1 => f_arg.prop_map(|a| Expr::F(Box::new(a)))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
        ]
    })
    .boxed()
}

pub fn expr() -> BoxedStrategy<Expr> {
    expr_over(&["x", "y", "z"], &["x", "y", "z"])
}

pub fn point() -> impl Strategy<Value = BTreeMap<Symbol, Rational>> {
    proptest::collection::vec((-6i64..7, 1i64..5), 3).prop_map(|v| {
        ["x", "y", "z"]
            .iter()
            .zip(v)
            .map(|(s, (n, d))| (Symbol::new(s), rat(n, d)))
            .collect()
    })
}

pub fn poly() -> impl Strategy<Value = Poly> {
    expr().prop_map(|e| e.poly())
}
