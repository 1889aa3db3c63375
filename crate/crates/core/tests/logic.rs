use effects_core::equivalence::enumerate::enumerate_memories;
use effects_core::equivalence::generate::Gen;
use effects_core::equivalence::library::{f_guarded, fix, taxonomy};
use effects_core::equivalence::{ciu_test, EnumConfig};
use effects_core::logic::formula::{
    arrow, cell_of, class_eq, comprehension, ctx, equiv, forall, member, memory_arrow, not, subset,
};
use effects_core::logic::{
    check_principles, class_member, effect_predicates, effect_table, parse_formula, satisfies, valid, valid_in, Class,
    ClassTable, Formula, Truth,
};
use effects_core::memory::Memory;
use effects_core::reducer::eval_expr;
use effects_core::syntax::build::*;
use effects_core::syntax::{Context, ContextSort, Expr, Op, Substitution};
use proptest::prelude::*;

fn cfg() -> EnumConfig {
    EnumConfig::default()
}

fn u(term: Expr) -> Context {
    Context::new(term, ContextSort::Univalent)
}

fn omega() -> Expr {
    let w = lam("x", app(var("x"), var("x")));
    app(w.clone(), w)
}

fn holds_everywhere(phi: &Formula) -> Truth {
    valid(phi, &cfg(), &ClassTable::new()).unwrap().verdict
}

fn mk_axiom(explicit: bool) -> Formula {
    let body = Formula::And(vec![
        not(equiv(var("x"), var("y"))),
        equiv(cellp(var("x")), t()),
        equiv(get(var("x")), var("v")),
    ]);
    let a = ctx(u(let_("x", mk(var("v")), hole())), body);
    if explicit {
        forall("y", a)
    } else {
        a
    }
}

#[test]
fn mk_axiom_holds() {
    let v = valid(&mk_axiom(true), &cfg(), &ClassTable::new()).unwrap();
    assert_eq!(v.verdict, Truth::Holds);
    assert_eq!(v.models, v.holds);
}

#[test]
fn explicit_and_implicit_quantifier_agree() {
    let table = ClassTable::new();
    let cfg = EnumConfig {
        max_cells: 2,
        ..cfg()
    };
    for m in enumerate_memories(&cfg) {
        let one = [m.clone()];
        let a = valid_in(&mk_axiom(true), &one, &cfg, &table).unwrap().verdict;
        let b = valid_in(&mk_axiom(false), &one, &cfg, &table).unwrap().verdict;
        assert_eq!(a.tag(), b.tag(), "{m}");
    }
}

#[test]
fn unreachable_holes_are_vacuous() {
    let false_ = equiv(nat(0), nat(1));
    for guard in [if_(nil(), hole(), nil()), if_(nil(), seq(vec![hole()]), t()), seq(vec![get(nil()), hole()])] {
        assert_eq!(holds_everywhere(&ctx(u(guard), false_.clone())), Truth::Holds);
    }
    assert!(holds_everywhere(&ctx(u(if_(t(), hole(), nil())), false_)).is_fails());
}

#[test]
fn eq_of_a_bound_value_with_itself() {
    let mut g = Gen::new(3);
    let mut checked = 0;
    while checked < 40 {
        let e = g.expr(2, &[]);
        let Some(v) = eval_expr(&e, 2000).value().cloned() else { continue };
        let phi = ctx(u(let_("x", e.clone(), hole())), equiv(eq(var("x"), var("x")), t()));
        let verdict = satisfies(&Memory::new(), &phi, &Substitution::new(), &cfg()).unwrap();
        if matches!(v, Expr::Lambda(..) | Expr::Prim(Op::Pair, _)) {
            assert!(verdict.is_fails(), "{e}");
        } else {
            assert_eq!(verdict, Truth::Holds, "{e}");
        }
        checked += 1;
    }
}

#[test]
fn expansiveness_taxonomy() {
    let expected = [(true, true), (false, true), (true, false), (false, false)];
    let t_class = memory_arrow(vec![Class::Val], cell_of(Class::Nil));
    for (j, (e, (expand, write))) in taxonomy().into_iter().zip(expected).enumerate() {
        let r = effect_table(&e, &cfg());
        assert_eq!(r.not_expand.is_holds(), expand, "e{j} not_expand {}", r.not_expand);
        assert_eq!(r.not_write.is_holds(), write, "e{j} not_write {}", r.not_write);
        assert!(!r.not_expand.is_unknown() && !r.not_write.is_unknown());
        let typed = ctx(u(let_("x", e.clone(), hole())), member(var("x"), t_class.clone()));
        assert_eq!(holds_everywhere(&typed), Truth::Holds, "e{j}");
        let is_val = holds_everywhere(&member(e.clone(), Class::Val));
        assert_eq!(is_val.is_holds(), j == 0, "e{j} in Val: {is_val}");
    }
}

#[test]
fn effect_predicates_in_one_memory() {
    let m: Memory = [("z0".to_string(), t())].into_iter().collect();
    let s = Substitution::singleton("y", var("z0"));
    let [_, _, e2, e3] = taxonomy();
    let r = effect_predicates(&e2, &m, &s, &cfg());
    assert!(r.not_expand.is_holds() && r.not_write.is_fails());
    let r = effect_predicates(&e3, &m, &s, &cfg());
    assert!(r.not_expand.is_fails() && r.not_write.is_fails());
}

#[test]
fn reference_operation_types() {
    let x = Class::Nat;
    let cases = [
        (lam("x", mk(var("x"))), memory_arrow(vec![x.clone()], cell_of(x.clone()))),
        (lam("x", get(var("x"))), arrow(vec![cell_of(x.clone())], x.clone())),
        (
            lam("x", lam("y", set(var("x"), var("y")))),
            arrow(vec![Class::Cell], memory_arrow(vec![Class::Val], Class::Nil)),
        ),
    ];
    for (f, k) in cases {
        assert_eq!(holds_everywhere(&member(f.clone(), k.clone())), Truth::Holds, "{f} in {k}");
    }
    let m = Memory::new();
    assert!(class_member(&lam("x", mk(var("x"))), &arrow(vec![Class::Nat], Class::Cell), &m, &cfg())
        .unwrap()
        .is_fails());
}

#[test]
fn guarded_fixed_point_is_total_on_nat() {
    let g = fix(f_guarded());
    let k = arrow(vec![Class::Nat], Class::Nat);
    assert!(class_member(&g, &k, &Memory::new(), &cfg()).unwrap().is_fails());
    let bound = ctx(u(let_("g", g.clone(), hole())), member(var("g"), k));
    assert_eq!(holds_everywhere(&bound), Truth::Holds);
    for n in 0..=10 {
        assert_eq!(eval_expr(&app(g.clone(), nat(n)), 100_000).value(), Some(&nat(0)));
    }
}

#[test]
fn subset_and_class_equality_agree() {
    let zero = comprehension("x", equiv(var("x"), nat(0)));
    let classes = [Class::Val, Class::Nat, Class::Nil, Class::Cell, cell_of(Class::Nil), zero];
    for a in &classes {
        for b in &classes {
            let both = Truth::all([
                holds_everywhere(&subset(a.clone(), b.clone())),
                holds_everywhere(&subset(b.clone(), a.clone())),
            ]);
            let eq = holds_everywhere(&class_eq(a.clone(), b.clone()));
            assert_eq!(eq.tag(), both.tag(), "{a} = {b}");
        }
    }
    assert!(holds_everywhere(&subset(Class::Nil, Class::Val)).is_holds());
    assert!(holds_everywhere(&subset(Class::Val, Class::Nat)).is_fails());
}

#[test]
fn principle_examples() {
    let models = enumerate_memories(&cfg());
    let table = ClassTable::new();
    let check = |phi: &Formula| valid_in(phi, &models, &cfg(), &table).unwrap().verdict;

    let u0 = u(let_("x", mk(nil()), hole()));
    let u1 = u(seq(vec![set(var("x"), t()), hole()]));
    let phi = equiv(get(var("x")), t());
    assert_eq!(check(&ctx(u0.clone(), ctx(u1.clone(), phi.clone()))), Truth::Holds);
    assert_eq!(check(&ctx(u0.compose(&u1), phi)), Truth::Holds);

    let phi = forall("x", equiv(eq(var("x"), var("x")), t()));
    let first_order = cfg().first_order();
    let fo = |phi: &Formula| valid_in(phi, &models, &first_order, &table).unwrap().verdict;
    assert_eq!(fo(&phi), Truth::Holds);
    assert_eq!(fo(&ctx(u0.clone(), phi)), Truth::Holds);

    let u2 = u(let_("x", mk(nat(0)), hole()));
    assert_eq!(check(&ctx(u2.clone(), equiv(get(var("x")), nat(0)))), Truth::Holds);
    assert!(!ciu_test(&u2.plug(&get(var("x"))), &u2.plug(&nat(0)), &cfg()).is_fails());
}

#[test]
fn principles_hold_on_generated_instances() {
    for r in check_principles(&cfg(), 60) {
        assert!(r.ok(), "{r}: {:?}", r.first_violation);
        assert!(r.tested > 0, "{r}");
    }
}

#[test]
fn formulas_parse_and_print() {
    let text = "(forall x (implies (member x Nat) (member (add1 x) Nat)))";
    let p = parse_formula(text).unwrap();
    assert_eq!(p.to_string(), text);
    assert_eq!(holds_everywhere(&p), Truth::Holds);
}

/// Leaves with a known verdict: holds, fails, or undecided by the budget.
fn leaf(k: u8) -> Formula {
    match k % 3 {
        0 => equiv(nil(), nil()),
        1 => equiv(nil(), t()),
        _ => equiv(omega(), nil()),
    }
}

fn tree(g: &mut impl FnMut() -> u8, depth: usize, leaves: &mut Vec<u8>) -> Formula {
    if depth == 0 {
        let k = g() % 3;
        leaves.push(k);
        return leaf(k);
    }
    match g() % 4 {
        0 => not(tree(g, depth - 1, leaves)),
        1 => Formula::And(vec![tree(g, depth - 1, leaves), tree(g, depth - 1, leaves)]),
        2 => Formula::Or(vec![tree(g, depth - 1, leaves), tree(g, depth - 1, leaves)]),
        _ => Formula::Implies(Box::new(tree(g, depth - 1, leaves)), Box::new(tree(g, depth - 1, leaves))),
    }
}

fn rebuild(f: &Formula, fill: &mut impl FnMut() -> Formula) -> Formula {
    match f {
        Formula::Equiv(a, _) if *a == omega() => fill(),
        Formula::Equiv(..) => f.clone(),
        Formula::Not(p) => not(rebuild(p, fill)),
        Formula::And(ps) => Formula::And(ps.iter().map(|p| rebuild(p, fill)).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(|p| rebuild(p, fill)).collect()),
        Formula::Implies(p, q) => Formula::Implies(Box::new(rebuild(p, fill)), Box::new(rebuild(q, fill))),
        other => other.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn refining_unknowns_keeps_determined_verdicts(bytes in proptest::collection::vec(any::<u8>(), 64), fills in any::<u64>()) {
        let cfg = EnumConfig { max_steps: 50, ..EnumConfig::default() };
        let m = Memory::new();
        let sat = |p: &Formula| satisfies(&m, p, &Substitution::new(), &cfg).unwrap();
        prop_assert!(sat(&leaf(2)).is_unknown());
        let mut it = bytes.into_iter().cycle();
        let mut leaves = Vec::new();
        let f = tree(&mut || it.next().unwrap(), 3, &mut leaves);
        let before = sat(&f);
        let mut bits = fills;
        let refined = rebuild(&f, &mut || {
            bits = bits.rotate_left(1);
            leaf((bits & 1) as u8)
        });
        let after = sat(&refined);
        prop_assert!(!after.is_unknown());
        if !before.is_unknown() {
            prop_assert_eq!(before.tag(), after.tag(), "{} / {}", f, refined);
        }
    }
}
