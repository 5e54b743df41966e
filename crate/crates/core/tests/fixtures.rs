use std::collections::BTreeMap;

use funceq::fixtures::load_fixtures;
use funceq::instantiation::{
    full_instantiations_fi, partial_instantiations, quantified_sources, theory_unification_instantiations,
    InstantiationBatch, SmallTermSet, TermLevel, TuOptions,
};
use funceq::spec_io::{parse_problem, pretty_print};
use funceq::symbolic::{rat, Poly, Rational, Symbol};
use funceq::template::{build_obligation, synthesize, verify_candidate, TemplateChoice};
use proptest::prelude::*;

fn f0() -> Poly {
    Poly::fapp(Poly::zero())
}

fn f1() -> Poly {
    Poly::fapp(Poly::one())
}

/// Branch definitions computed independently with sympy, with its free
/// parameters `c` and `b` read as f(0) and f(1).
fn oracle(name: &str) -> Option<Vec<Poly>> {
    let x = Poly::var("x");
    let sq = &x * &x;
    Some(match name {
        "eq1" => vec![Poly::zero()],
        "u6" => vec![&sq.scale(&rat(1, 4)) + &f0()],
        "u10" => vec![sq],
        "india" => vec![Poly::zero(), x],
        "shift" => vec![&x + &f0()],
        "shift_square" => vec![&sq + &f0()],
        "reflect" => vec![x],
        "homogeneous" => vec![&x * &f1()],
        "swap" => vec![&(&sq.scale(&rat(1, 3)) + &x.scale(&rat(2, 3))) - &Poly::constant(rat(1, 3))],
        "nested_linear" => vec![&Poly::constant(rat(1, 2)) - &x],
        "shift_pinned" => vec![&x + &Poly::one()],
        _ => return None,
    })
}

#[test]
fn fixture_corpus_shape() {
    let all = load_fixtures();
    assert_eq!(all.iter().filter(|f| f.origin == "reference").count(), 4);
    assert!(all.iter().filter(|f| f.origin == "authored").count() >= 6);
}

#[test]
fn every_fixture_synthesizes_its_candidate() {
    for fx in load_fixtures() {
        let p = fx.problem();
        let again = parse_problem(&pretty_print(&p)).unwrap();
        assert_eq!(p.spec, again.spec, "{}: print/parse round trip", fx.name);
        let syn = synthesize(&p.spec, TemplateChoice::Auto).unwrap();
        assert_eq!(syn.template.as_str(), fx.template, "{}", fx.name);
        assert_eq!(syn.solved_form.to_string(), fx.candidate, "{}", fx.name);
        assert!(verify_candidate(&p.spec, &syn.solved_form), "{}", fx.name);
        if let Some(expect) = oracle(&fx.name) {
            let mut got: Vec<Poly> = syn.solved_form.branches.iter().map(|b| b.definition.clone()).collect();
            let mut expect = expect;
            got.sort();
            expect.sort();
            assert_eq!(got, expect, "{}: oracle disagrees", fx.name);
        }
    }
}

fn replay(batch: &InstantiationBatch) {
    assert_eq!(batch.formulas.len(), batch.witnesses.len());
    for (f, w) in batch.formulas.iter().zip(&batch.witnesses) {
        assert_eq!(&batch.source.instantiate(w), f);
    }
}

#[test]
fn witnesses_replay_on_fixtures() {
    for fx in load_fixtures() {
        let p = fx.problem();
        let syn = synthesize(&p.spec, TemplateChoice::Auto).unwrap();
        let ob = build_obligation(&p.spec, &syn.solved_form);
        let terms = SmallTermSet::new(TermLevel::Extended, &ob.skolem_terms(), &ob.spec);
        for phi in quantified_sources(&ob.spec) {
            replay(&theory_unification_instantiations(&phi, TuOptions::default()));
            replay(&theory_unification_instantiations(&phi, TuOptions { a0_fresh_constant: true }));
            replay(&partial_instantiations(&phi, &terms, false));
            replay(&full_instantiations_fi(&phi, &terms, 500));
        }
    }
}

fn small_term() -> impl Strategy<Value = Poly> {
    prop_oneof![
        (-3i64..4, 1i64..3).prop_map(|(n, d)| Poly::constant(rat(n, d))),
        Just(Poly::var("c1")),
        Just(Poly::fapp(Poly::var("c1"))),
        Just(&Poly::var("c1") * &Poly::var("c1")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_replay_on_random_terms(terms in proptest::collection::vec(small_term(), 0..4), which in 0usize..4) {
        let names = ["india", "u6", "u10", "swap"];
        let fx = load_fixtures().into_iter().find(|f| f.name == names[which]).unwrap();
        let spec = fx.problem().spec;
        let set = SmallTermSet::from_terms(terms);
        for phi in quantified_sources(&spec) {
            let pi = partial_instantiations(&phi, &set, false);
            for (f, w) in pi.formulas.iter().zip(&pi.witnesses) {
                prop_assert_eq!(&pi.source.instantiate(w), f);
            }
            let fi = full_instantiations_fi(&phi, &set, 200);
            for (f, w) in fi.formulas.iter().zip(&fi.witnesses) {
                prop_assert_eq!(&fi.source.instantiate(w), f);
            }
        }
    }
}

#[test]
fn india_candidates_satisfy_the_equation_numerically() {
    let p = load_fixtures().into_iter().find(|f| f.name == "india").unwrap().problem();
    let syn = synthesize(&p.spec, TemplateChoice::Auto).unwrap();
    let (_, body) = p.spec.as_forall().unwrap();
    let poly = body.polys()[0].clone();
    for b in &syn.solved_form.branches {
        let def = b.definition.clone();
        let interp = |t: &Rational| {
            def.evaluate(&BTreeMap::from([(Symbol::new("x"), t.clone())]), &|_| unreachable!())
                .unwrap()
        };
        for (x, y) in [(rat(3, 2), rat(-2, 1)), (rat(0, 1), rat(5, 3)), (rat(-1, 7), rat(1, 1))] {
            let env = BTreeMap::from([(Symbol::new("x"), x), (Symbol::new("y"), y)]);
            assert_eq!(poly.evaluate(&env, &interp).unwrap(), rat(0, 1));
        }
    }
}
