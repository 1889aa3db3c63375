use std::collections::HashMap;

use effects_core::equivalence::generate::Gen;
use effects_core::equivalence::library;
use effects_core::syntax::build::*;
use effects_core::syntax::{
    alpha_equal, decompose, parse, parse_context, substitute, Context, ContextSort, Decomposition, Expr, Name,
    Substitution,
};
use proptest::prelude::*;

/// Every way of cutting one subterm out of `e`: (context term, subterm).
fn positions(e: &Expr) -> Vec<(Expr, Expr)> {
    let mut out = vec![(hole(), e.clone())];
    let kids: Vec<&Expr> = match e {
        Expr::Lambda(_, b) => vec![b],
        Expr::App(a, b) | Expr::Let(_, a, b) | Expr::LetActor(_, a, b) => vec![a, b],
        Expr::If(c, t, f) => vec![c, t, f],
        Expr::Seq(es) | Expr::Prim(_, es) => es.iter().collect(),
        _ => vec![],
    };
    for (i, k) in kids.into_iter().enumerate() {
        for (c, sub) in positions(k) {
            out.push((rebuild(e, i, c), sub));
        }
    }
    out
}

fn rebuild(e: &Expr, i: usize, c: Expr) -> Expr {
    let b = Box::new(c);
    match (e, i) {
        (Expr::Lambda(x, _), 0) => Expr::Lambda(x.clone(), b),
        (Expr::App(_, y), 0) => Expr::App(b, y.clone()),
        (Expr::App(x, _), 1) => Expr::App(x.clone(), b),
        (Expr::Let(n, _, y), 0) => Expr::Let(n.clone(), b, y.clone()),
        (Expr::Let(n, x, _), 1) => Expr::Let(n.clone(), x.clone(), b),
        (Expr::LetActor(n, _, y), 0) => Expr::LetActor(n.clone(), b, y.clone()),
        (Expr::LetActor(n, x, _), 1) => Expr::LetActor(n.clone(), x.clone(), b),
        (Expr::If(_, t, f), 0) => Expr::If(b, t.clone(), f.clone()),
        (Expr::If(c, _, f), 1) => Expr::If(c.clone(), b, f.clone()),
        (Expr::If(c, t, _), 2) => Expr::If(c.clone(), t.clone(), b),
        (Expr::Seq(es), i) => {
            let mut es = es.clone();
            es[i] = *b;
            Expr::Seq(es)
        }
        (Expr::Prim(op, es), i) => {
            let mut es = es.clone();
            es[i] = *b;
            Expr::Prim(*op, es)
        }
        _ => unreachable!(),
    }
}

fn is_value(e: &Expr) -> bool {
    match e {
        Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Lambda(..) => true,
        Expr::Prim(effects_core::syntax::Op::Pair, es) => es.iter().all(is_value),
        _ => false,
    }
}

/// Redex shape: not a value, and every evaluation-position subterm is a value.
fn is_redex(e: &Expr) -> bool {
    use effects_core::syntax::Op;
    match e {
        Expr::App(f, a) => is_value(f) && is_value(a),
        Expr::Let(_, a, _) => is_value(a),
        Expr::Seq(es) => is_value(&es[0]),
        Expr::If(c, _, _) => is_value(c),
        Expr::Prim(Op::Pair, _) => false,
        Expr::Prim(_, es) => es.iter().all(is_value),
        Expr::LetActor(..) | Expr::Event(_) => true,
        _ => false,
    }
}

/// Reduction-context grammar, independent of the library's predicate.
fn is_reduction_term(c: &Expr) -> bool {
    match c {
        Expr::Hole => true,
        Expr::App(f, a) => {
            (is_reduction_term(f) && a.hole_count() == 0) || (is_value(f) && is_reduction_term(a))
        }
        Expr::Let(_, a, b) => is_reduction_term(a) && b.hole_count() == 0,
        Expr::Seq(es) => is_reduction_term(&es[0]) && es[1..].iter().all(|e| e.hole_count() == 0),
        Expr::If(c, t, f) => is_reduction_term(c) && t.hole_count() == 0 && f.hole_count() == 0,
        Expr::Prim(_, es) => {
            let Some(i) = es.iter().position(|e| e.hole_count() == 1) else {
                return false;
            };
            es[..i].iter().all(is_value) && is_reduction_term(&es[i]) && es[i + 1..].iter().all(|e| e.hole_count() == 0)
        }
        _ => false,
    }
}

/// Nameless rendering: bound variables become binder depths.
fn de_bruijn(e: &Expr, env: &mut Vec<Name>) -> String {
    let var = |x: &Name, env: &Vec<Name>| match env.iter().rev().position(|y| y == x) {
        Some(i) => format!("#{i}"),
        None => format!("${x}"),
    };
    let bind = |x: &Name, body: &Expr, env: &mut Vec<Name>| {
        env.push(x.clone());
        let s = de_bruijn(body, env);
        env.pop();
        s
    };
    match e {
        Expr::Var(x) => var(x, env),
        Expr::Lambda(x, b) => format!("(λ {})", bind(x, b, env)),
        Expr::Let(x, a, b) => {
            let a = de_bruijn(a, env);
            format!("(let {a} {})", bind(x, b, env))
        }
        Expr::LetActor(x, a, b) => {
            let a = bind(x, a, env);
            format!("(letactor {a} {})", bind(x, b, env))
        }
        Expr::App(a, b) => format!("(app {} {})", de_bruijn(a, env), de_bruijn(b, env)),
        Expr::If(c, t, f) => format!("(if {} {} {})", de_bruijn(c, env), de_bruijn(t, env), de_bruijn(f, env)),
        Expr::Seq(es) => format!("(seq {})", es.iter().map(|e| de_bruijn(e, env)).collect::<Vec<_>>().join(" ")),
        Expr::Prim(op, es) => format!(
            "({} {})",
            op.keyword(),
            es.iter().map(|e| de_bruijn(e, env)).collect::<Vec<_>>().join(" ")
        ),
        other => other.to_string(),
    }
}

fn db(e: &Expr) -> String {
    de_bruijn(e, &mut Vec::new())
}

/// Renames every binder to a fresh name, threading a renaming for bodies.
fn rename_binders(e: &Expr, map: &mut HashMap<Name, Name>, counter: &mut usize) -> Expr {
    let fresh = |counter: &mut usize| {
        *counter += 1;
        format!("r{counter}")
    };
    let under = |x: &Name, y: Name, body: &Expr, map: &mut HashMap<Name, Name>, counter: &mut usize| {
        let old = map.insert(x.clone(), y);
        let out = rename_binders(body, map, counter);
        match old {
            Some(o) => map.insert(x.clone(), o),
            None => map.remove(x),
        };
        out
    };
    match e {
        Expr::Var(x) => Expr::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
        Expr::Lambda(x, b) => {
            let y = fresh(counter);
            Expr::Lambda(y.clone(), Box::new(under(x, y, b, map, counter)))
        }
        Expr::Let(x, a, b) => {
            let a = rename_binders(a, map, counter);
            let y = fresh(counter);
            Expr::Let(y.clone(), Box::new(a), Box::new(under(x, y, b, map, counter)))
        }
        Expr::LetActor(x, a, b) => {
            let y = fresh(counter);
            let a = under(x, y.clone(), a, map, counter);
            Expr::LetActor(y.clone(), Box::new(a), Box::new(under(x, y, b, map, counter)))
        }
        Expr::App(a, b) => app(rename_binders(a, map, counter), rename_binders(b, map, counter)),
        Expr::If(c, t, f) => if_(
            rename_binders(c, map, counter),
            rename_binders(t, map, counter),
            rename_binders(f, map, counter),
        ),
        Expr::Seq(es) => Expr::Seq(es.iter().map(|e| rename_binders(e, map, counter)).collect()),
        Expr::Prim(op, es) => Expr::Prim(*op, es.iter().map(|e| rename_binders(e, map, counter)).collect()),
        other => other.clone(),
    }
}

fn arb_expr(scope: &'static [&'static str]) -> impl Strategy<Value = Expr> {
    (any::<u64>(), 1usize..4).prop_map(move |(seed, depth)| {
        let scope: Vec<Name> = scope.iter().map(|s| s.to_string()).collect();
        Gen::new(seed).expr(depth, &scope)
    })
}

fn paper_corpus() -> Vec<Expr> {
    let mut out = vec![
        library::yv(),
        library::f_fact(),
        library::f_guarded(),
        library::eq_via_mutation(),
        library::counter(),
        library::thunk(),
        library::thunk_eta(),
    ];
    out.extend(library::taxonomy());
    out.push(effects_core::actors::library::ticker_behavior("tau"));
    out
}

#[test]
fn spec_parse_examples() {
    assert_eq!(parse("(mk nil)").unwrap(), mk(nil()));
    assert_eq!(
        parse("(let ((x (mk nil))) (eq x x))").unwrap(),
        let_("x", mk(nil()), eq(var("x"), var("x")))
    );
    assert_eq!(
        parse("(lambda (x) (seq (mk 0) x))").unwrap(),
        lam("x", seq(vec![mk(nat(0)), var("x")]))
    );
}

#[test]
fn spec_substitution_examples() {
    let s = Substitution::singleton("x", nil());
    assert_eq!(substitute(&eq(var("x"), var("x")), &s), eq(nil(), nil()));
    assert_eq!(
        substitute(&eq(mk(var("x")), mk(var("x"))), &s),
        eq(mk(nil()), mk(nil()))
    );
    let r = substitute(&lam("y", var("x")), &Substitution::singleton("x", var("y")));
    match &r {
        Expr::Lambda(b, body) => {
            assert_ne!(b, "y");
            assert_eq!(**body, var("y"));
        }
        _ => panic!("expected a lambda, got {r}"),
    }
}

#[test]
fn spec_alpha_examples() {
    assert!(alpha_equal(&lam("x", var("x")), &lam("y", var("y"))));
    assert!(!alpha_equal(&lam("x", var("y")), &lam("y", var("y"))));
    let a = let_("z", mk(var("x")), var("z"));
    let b = let_("w", mk(var("x")), var("w"));
    assert!(alpha_equal(&a, &b));
    assert_eq!(db(&a), db(&b));
}

#[test]
fn spec_decompose_examples() {
    let cell = |x: &str| x == "z";
    let e = seq(vec![set(var("z"), t()), get(var("z"))]);
    assert_eq!(
        decompose(&e, &cell),
        Decomposition::Redex {
            context: Context::new(seq(vec![hole(), get(var("z"))]), ContextSort::Reduction),
            redex: set(var("z"), t()),
        }
    );
    assert_eq!(decompose(&nat(3), &cell), Decomposition::Value);
    let e = app(lam("x", var("x")), get(var("z")));
    match decompose(&e, &cell) {
        Decomposition::Redex { context, redex } => {
            assert_eq!(*context.term(), app(lam("x", var("x")), hole()));
            assert_eq!(redex, get(var("z")));
        }
        d => panic!("unexpected {d:?}"),
    }
}

#[test]
fn spec_plug_and_univalence_examples() {
    let c = parse_context("(seq _ (get z))").unwrap();
    assert_eq!(c.plug(&set(var("z"), t())), seq(vec![set(var("z"), t()), get(var("z"))]));
    let c = parse_context("(let ((x (mk v))) _)").unwrap();
    assert_eq!(c.plug(&eq(var("x"), var("x"))), let_("x", mk(var("v")), eq(var("x"), var("x"))));
    assert!(c.is_univalent());
    assert_eq!(Context::hole().plug(&nil()), nil());
    assert!(!parse_context("(lambda (x) _)").unwrap().is_univalent());
    assert!(parse_context("(seq (set z t) _)").unwrap().is_univalent());
}

#[test]
fn paper_programs_print_and_parse_back() {
    for e in paper_corpus() {
        let text = e.to_string();
        assert_eq!(parse(&text).unwrap(), e, "{text}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_parse_round_trip(e in arb_expr(&["x", "y"])) {
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn unique_decomposition(e in arb_expr(&[])) {
        let none = |_: &str| false;
        let found: Vec<(Expr, Expr)> = positions(&e)
            .into_iter()
            .filter(|(c, sub)| is_reduction_term(c) && is_redex(sub))
            .collect();
        match decompose(&e, &none) {
            Decomposition::Value => {
                prop_assert!(is_value(&e));
                prop_assert!(found.is_empty());
            }
            Decomposition::Redex { context, redex } => {
                prop_assert_eq!(found.len(), 1, "{}", e);
                prop_assert_eq!(context.term(), &found[0].0);
                prop_assert_eq!(&redex, &found[0].1);
                prop_assert_eq!(context.plug(&redex), e);
            }
            Decomposition::Stuck => prop_assert!(found.is_empty(), "{} {:?}", e, found),
        }
    }

    #[test]
    fn alpha_matches_de_bruijn(e0 in arb_expr(&["x", "y"]), e1 in arb_expr(&["x", "y"])) {
        prop_assert_eq!(alpha_equal(&e0, &e1), db(&e0) == db(&e1));
        let renamed = rename_binders(&e0, &mut HashMap::new(), &mut 0);
        prop_assert!(alpha_equal(&e0, &renamed));
        prop_assert!(alpha_equal(&renamed, &e0));
    }

    #[test]
    fn alpha_is_transitive(e in arb_expr(&["x"])) {
        let a = rename_binders(&e, &mut HashMap::new(), &mut 0);
        let b = rename_binders(&a, &mut HashMap::new(), &mut 100);
        prop_assert!(alpha_equal(&e, &a) && alpha_equal(&a, &b) && alpha_equal(&e, &b));
        prop_assert!(alpha_equal(&e, &e));
    }

    #[test]
    fn substitution_free_variables(e in arb_expr(&["x", "y"]), seed in any::<u64>()) {
        let v = Gen::new(seed).value(2, &["y".to_string()]);
        let s = Substitution::singleton("x", v.clone());
        let r = substitute(&e, &s);
        let mut expected = e.free_vars();
        let used = expected.remove("x");
        if used {
            expected.extend(v.free_vars());
        }
        prop_assert_eq!(r.free_vars(), expected);
    }

    #[test]
    fn substitution_distributes_over_reduction_contexts(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let scope = vec!["x".to_string()];
        let r = g.reduction_context(2, &scope);
        let e = g.expr(2, &scope);
        let v = g.value(1, &[]);
        let s = Substitution::singleton("x", v);
        let lhs = substitute(&r.plug(&e), &s);
        let rhs = r.substitute(&s).plug(&substitute(&e, &s));
        prop_assert!(alpha_equal(&lhs, &rhs), "{} vs {}", lhs, rhs);
    }
}
