use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use super::*;
use crate::scalar::Func;

fn table() -> SymbolTable {
    SymbolTable::new(&["q", "x", "y", "q0", "q1"], &["p", "px", "py", "p0", "p1"], &["alpha"]).unwrap()
}

fn parse(s: &str) -> Expr {
    parse_expression(s, &table()).unwrap()
}

fn sym(name: &str) -> Symbol {
    Symbol::new(name)
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn parses_vibrating_beam_potential() {
    let e = parse("-q^2/2 + q^4/4");
    let q = Expr::sym(&sym("q"));
    let expected = Expr::add_raw(vec![
        Expr::mul_raw(vec![Expr::ratio(-1, 2), Expr::pow_raw(q.clone(), 2)]),
        Expr::mul_raw(vec![Expr::ratio(1, 4), Expr::pow_raw(q, 4)]),
    ]);
    assert_eq!(e, expected);
    assert_eq!(e.to_string(), "-1/2*q^2 + 1/4*q^4");
}

#[test]
fn parses_zero_and_decimals() {
    assert!(parse("0").is_zero());
    assert_eq!(parse("0.25*q"), parse("q/4"));
    assert_eq!(parse("1.5").as_num(), Some(&r(3, 2)));
    assert_eq!(parse(".5"), parse("1/2"));
}

#[test]
fn pendulum_potential_round_trips() {
    let e = parse("cos(sqrt(q0^2+q1^2))");
    assert!(matches!(e.node(), Node::Func(Func::Cos, _)));
    let again = parse(&e.to_string());
    assert_eq!(again, e);
    assert_eq!(parse(&again.to_string()), again);
}

#[test]
fn power_is_right_associative_and_binds_tighter_than_minus() {
    assert_eq!(parse("2^3^2").as_num(), Some(&r(512, 1)));
    assert_eq!(parse("-q^2"), parse("-1*q^2"));
    assert_eq!(parse("q^-2*q^2"), Expr::one());
    assert_eq!(parse("q^(1+1)"), parse("q*q"));
}

#[test]
fn parse_errors() {
    let t = table();
    assert!(matches!(
        parse_expression("q +", &t),
        Err(ParseError::Syntax { pos: 3, .. })
    ));
    assert!(matches!(
        parse_expression("z*q", &t),
        Err(ParseError::UnknownIdentifier { pos: 0, .. })
    ));
    assert_eq!(
        parse_expression("q/(1-1)", &t),
        Err(ParseError::DivisionByZero { pos: 1 })
    );
    assert!(matches!(
        parse_expression("q^(1/2)", &t),
        Err(ParseError::NonIntegerExponent { .. })
    ));
    assert!(matches!(parse_expression("q $ 2", &t), Err(ParseError::Syntax { .. })));
    assert!(matches!(parse_expression("sin q", &t), Err(ParseError::Syntax { .. })));
    assert!(matches!(parse_expression("(q", &t), Err(ParseError::Syntax { .. })));
    assert!(matches!(parse_expression("q q", &t), Err(ParseError::Syntax { .. })));
}

#[test]
fn parse_rational_constants() {
    assert_eq!(parse_rational("1/10").unwrap(), r(1, 10));
    assert_eq!(parse_rational("-0.125").unwrap(), r(-1, 8));
    assert!(parse_rational("tau").is_err());
}

#[test]
fn power_rule() {
    let q = sym("q");
    assert_eq!(parse("q^4/4").diff(&q), parse("q^3"));
    assert!(parse("q^4/4").diff(&sym("p")).is_zero());
}

#[test]
fn chain_rule_through_sqrt() {
    let q = sym("q");
    let d = parse("-cos(sqrt(q^2))").diff(&q);
    assert_eq!(d, parse("sin(sqrt(q^2))*q/sqrt(q^2)"));
    // Finite-difference check at q = 0.7.
    let f = |x: f64| -(x * x).sqrt().cos();
    let h = 1e-5;
    let fd = (f(0.7 + h) - f(0.7 - h)) / (2.0 * h);
    let v = evaluate_f64(&d, &[("q", 0.7)]).unwrap();
    assert!((v - fd).abs() < 1e-8, "{v} vs {fd}");
}

#[test]
fn elementary_derivatives() {
    let x = sym("x");
    let cases = [
        ("sin(x)", "cos(x)"),
        ("cos(x)", "-sin(x)"),
        ("tan(x)", "1 + tan(x)^2"),
        ("sinh(x)", "cosh(x)"),
        ("cosh(x)", "sinh(x)"),
        ("exp(2*x)", "2*exp(2*x)"),
        ("log(x^2+1)", "2*x/(x^2+1)"),
        ("log(3*x)", "1/x"),
        ("sqrt(x)", "1/(2*sqrt(x))"),
    ];
    for (f, df) in cases {
        assert_eq!(parse(f).diff(&x), parse(df), "d/dx {f}");
    }
}

#[test]
fn like_terms_and_cancellation() {
    assert_eq!(parse("q + q"), parse("2*q"));
    assert_eq!(parse("q + q").to_string(), "2*q");
    assert!(parse("q^2/2 - q^2/2").is_zero());
    assert!(parse("0*sin(q)").is_zero());
    assert_eq!(parse("p*q^3").diff(&sym("q")), parse("3*p*q^2"));
    assert_eq!(parse("(q+1)^2"), parse("q^2 + 2*q + 1"));
    assert_eq!(parse("sin(q)*sin(q)"), parse("sin(q)^2"));
    assert_eq!(parse("1/(1/(q+1))"), parse("q + 1"));
}

#[test]
fn constant_function_folding() {
    assert_eq!(parse("sqrt(4/9)").as_num(), Some(&r(2, 3)));
    assert_eq!(parse("cos(0) + exp(0) + log(1) + sin(0)").as_num(), Some(&r(2, 1)));
    assert!(matches!(parse("sqrt(2)").node(), Node::Func(Func::Sqrt, _)));
}

#[test]
fn substitution() {
    let mut b = HashMap::new();
    b.insert(sym("p"), Expr::sym(&sym("P")));
    assert_eq!(parse("p*q^3").substitute(&b), parse("P*q^3"));

    let mut b = HashMap::new();
    b.insert(sym("q"), Expr::zero());
    assert!(parse("-q^2/2+q^4/4").substitute(&b).is_zero());

    // Simultaneous: swapping does not chain.
    let mut b = HashMap::new();
    b.insert(sym("x"), Expr::sym(&sym("y")));
    b.insert(sym("y"), Expr::sym(&sym("x")));
    assert_eq!(parse("x - 2*y").substitute(&b), parse("y - 2*x"));

    let mut b = HashMap::new();
    b.insert(sym("alpha"), Expr::ratio(13, 100));
    let v = parse("alpha*q^2/2+q^4/4").substitute(&b);
    assert!(v.symbols() == vec![sym("q")]);
    // 0.13 * 0.54^2 / 2 + 0.54^4 / 4, by hand.
    let expected = 0.018954 + 0.02125764;
    assert!((evaluate_f64(&v, &[("q", 0.54)]).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn evaluation() {
    let v = parse("-q^2/2+q^4/4");
    assert_eq!(evaluate_f64(&v, &[("q", 0.5)]).unwrap(), -0.109375);
    assert_eq!(evaluate_f64(&Expr::zero(), &[]).unwrap(), 0.0);
    let h = parse("p^2/2-q^2/2+q^4/4");
    assert_eq!(evaluate_f64(&h, &[("q", 0.5), ("p", 1.25)]).unwrap(), 0.671875);
}

#[test]
fn evaluation_errors() {
    assert_eq!(
        evaluate_f64(&parse("q + p"), &[("q", 1.0)]),
        Err(EvalError::Unbound(sym("p")))
    );
    assert!(matches!(
        evaluate_f64(&parse("log(q)"), &[("q", -1.0)]),
        Err(EvalError::Domain(_))
    ));
    assert!(matches!(
        evaluate_f64(&parse("sqrt(q)"), &[("q", -1.0)]),
        Err(EvalError::Domain(_))
    ));
    assert!(matches!(evaluate_f64(&parse("1/q"), &[("q", 0.0)]), Err(EvalError::Domain(_))));
}

#[test]
fn extended_evaluation_matches_f64() {
    use crate::scalar::{bits_for_digits, Extended, Scalar};
    let e = parse("sin(q)^2 + cos(q)^2 + 1/3");
    let prec = bits_for_digits(35);
    let mut env = HashMap::new();
    env.insert(sym("q"), Extended::from_f64(prec, 0.3));
    let v = evaluate(&e, &env, prec).unwrap();
    let expected = Extended::from_rational(prec, &r(4, 3));
    assert!((v - expected).abs() < Extended::from_f64(prec, 1e-34));
}

#[test]
fn canonical_invariants_hold() {
    fn check(e: &Expr) {
        match e.node() {
            Node::Add(xs) => {
                assert!(xs.len() >= 2);
                for x in xs {
                    assert!(!matches!(x.node(), Node::Add(_)));
                    assert!(!x.is_zero());
                    check(x);
                }
            }
            Node::Mul(xs) => {
                assert!(xs.len() >= 2);
                for (i, x) in xs.iter().enumerate() {
                    assert!(!matches!(x.node(), Node::Mul(_)));
                    if let Some(c) = x.as_num() {
                        assert_eq!(i, 0);
                        assert!(*c != BigRational::from_integer(0.into()));
                    }
                    check(x);
                }
            }
            Node::Num(c) => assert!(*c.denom() > BigInt::from(0)),
            Node::Pow(b, n) => {
                assert!(*n != 0 && *n != 1);
                check(b);
            }
            Node::Func(_, a) => check(a),
            Node::Sym(_) => {}
        }
    }
    for s in [
        "(q+p)^3 - q*(q+p)^2",
        "sin(q+q)*(1+q)/(2*q^2+2)",
        "exp(x)^2*y - 3/4 + x*y*x",
    ] {
        check(&parse(s));
    }
}

// Random expressions over x, y built from polynomial and trig pieces.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let x = Symbol::new("x");
    let y = Symbol::new("y");
    let leaf = prop_oneof![
        (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::ratio(n, d)),
        Just(Expr::sym(&x)),
        Just(Expr::sym(&y)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add_raw),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul_raw),
            (inner.clone(), 0i32..=3).prop_map(|(b, n)| Expr::pow_raw(b, n)),
            inner.clone().prop_map(|a| Expr::func_raw(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::func_raw(Func::Cos, a)),
            // Always-positive denominator.
            inner.prop_map(|a| Expr::pow_raw(
                Expr::add_raw(vec![Expr::int(2), Expr::func_raw(Func::Sin, a)]),
                -1
            )),
        ]
    })
}

fn eval_xy(e: &Expr, x: f64, y: f64) -> f64 {
    evaluate_f64(e, &[("x", x), ("y", y)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn simplify_is_idempotent_and_sound(e in arb_expr(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let s = e.simplify();
        prop_assert_eq!(s.simplify(), s.clone());
        let (a, b) = (eval_xy(&e, x, y), eval_xy(&s, x, y));
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn print_parse_round_trip(e in arb_expr()) {
        let s = e.simplify();
        let t = SymbolTable::new(&["x", "y"], &["px", "py"], &[]).unwrap();
        prop_assert_eq!(parse_expression(&s.to_string(), &t).unwrap(), s);
    }

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let d = e.diff(&Symbol::new("x"));
        let h = 1e-5;
        let fd = (eval_xy(&e, x + h, y) - eval_xy(&e, x - h, y)) / (2.0 * h);
        let v = eval_xy(&d, x, y);
        prop_assert!((v - fd).abs() <= 1e-6 * (1.0 + v.abs()), "{} vs {}", v, fd);
    }

    #[test]
    fn differentiation_is_linear(a in arb_expr(), b in arb_expr(), ca in -4i64..4, cb in 1i64..5) {
        let x = Symbol::new("x");
        let lhs = Expr::add_raw(vec![
            Expr::mul_raw(vec![Expr::int(ca), a.clone()]),
            Expr::mul_raw(vec![Expr::ratio(1, cb), b.clone()]),
        ]).diff(&x);
        let rhs = Expr::add_raw(vec![
            Expr::mul_raw(vec![Expr::int(ca), a.diff(&x)]),
            Expr::mul_raw(vec![Expr::ratio(1, cb), b.diff(&x)]),
        ]).simplify();
        prop_assert_eq!(lhs, rhs);
    }
}
