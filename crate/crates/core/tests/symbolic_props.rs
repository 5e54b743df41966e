mod common;

use std::collections::BTreeMap;

use funceq::spec_io::{parse_problem, pretty_print};
use common::{expr, expr_over, interp, point, poly};
use funceq::symbolic::{Poly, Rational, Symbol};
use num_traits::One;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &Poly::zero(), a.clone());
        prop_assert_eq!(&a * &Poly::one(), a.clone());
        prop_assert!((&a + &(-&a)).is_zero());
        prop_assert!((&a * &Poly::zero()).is_zero());
    }

    #[test]
    fn canonical_form_agrees_with_tree(e in expr(), env in point()) {
        let p = e.poly();
        prop_assert_eq!(p.evaluate(&env, &interp).unwrap(), e.eval(&env));
    }

    #[test]
    fn substitution_is_a_homomorphism(p in poly(), q in poly(), env in point()) {
        let x = Symbol::new("x");
        let sub = BTreeMap::from([(x.clone(), q.clone())]);
        let lhs = p.substitute(&sub).evaluate(&env, &interp).unwrap();
        let mut env2 = env.clone();
        env2.insert(x, q.evaluate(&env, &interp).unwrap());
        prop_assert_eq!(lhs, p.evaluate(&env2, &interp).unwrap());
    }

    #[test]
    fn coefficient_split_round_trips(e in expr_over(&["x", "y", "z"], &["z"])) {
        let p = e.poly();
        let vars = [Symbol::new("x"), Symbol::new("y")];
        let coeffs = p.coefficients_wrt(&vars).unwrap();
        for c in coeffs.values() {
            prop_assert!(!c.mentions(&vars[0]) && !c.mentions(&vars[1]));
        }
        prop_assert_eq!(Poly::from_coefficients(&vars, &coeffs), p);
    }

    #[test]
    fn printed_polynomials_parse_back(p in poly()) {
        let text = format!("problem \"p\";\nfind f;\nforall x y z. {p} = 0;\n");
        let first = parse_problem(&text).unwrap();
        let again = parse_problem(&pretty_print(&first)).unwrap();
        prop_assert_eq!(&first.spec, &again.spec);
        let ground = format!("problem \"g\";\nfind f;\nforall x y z. {p} = {p};\n");
        let g = parse_problem(&ground).unwrap();
        prop_assert!(g.spec.simplify().is_true());
    }
}

#[test]
fn evaluation_reports_unbound_symbols() {
    let p = Poly::var("w") + Poly::one();
    assert!(p.evaluate(&BTreeMap::new(), &interp).is_err());
    assert_eq!(
        Poly::int(3).evaluate(&BTreeMap::new(), &interp).unwrap(),
        Rational::one() + Rational::one() + Rational::one()
    );
}
