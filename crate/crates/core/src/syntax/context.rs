use std::fmt;

use super::expr::{Expr, Op};
use super::subst::{substitute, Substitution};

/// Which grammar a context was built or checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContextSort {
    General,
    Reduction,
    Univalent,
}

/// An expression with exactly one hole.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Context {
    term: Expr,
    sort: ContextSort,
}

impl Context {
    /// Panics if `term` does not contain exactly one hole.
    pub fn new(term: Expr, sort: ContextSort) -> Self {
        assert_eq!(term.hole_count(), 1, "a context has exactly one hole: {term}");
        Context { term, sort }
    }

    /// The identity context `•`.
    pub fn hole() -> Self {
        Context {
            term: Expr::Hole,
            sort: ContextSort::Reduction,
        }
    }

    pub fn term(&self) -> &Expr {
        &self.term
    }

    pub fn into_term(self) -> Expr {
        self.term
    }

    pub fn sort(&self) -> ContextSort {
        self.sort
    }

    pub fn with_sort(mut self, sort: ContextSort) -> Self {
        self.sort = sort;
        self
    }

    pub fn is_hole(&self) -> bool {
        self.term == Expr::Hole
    }

    /// Textual replacement of the hole; may capture.
    pub fn plug(&self, e: &Expr) -> Expr {
        plug_term(&self.term, e)
    }

    /// `self[inner]`, a context again.
    pub fn compose(&self, inner: &Context) -> Context {
        let sort = if self.sort == inner.sort { self.sort } else { ContextSort::General };
        Context {
            term: plug_term(&self.term, &inner.term),
            sort,
        }
    }

    /// Substitution into the context, leaving the hole alone.
    pub fn substitute(&self, s: &Substitution) -> Context {
        Context {
            term: substitute(&self.term, s),
            sort: self.sort,
        }
    }

    /// No lambda binder lies on the path from the root to the hole.
    pub fn is_univalent(&self) -> bool {
        univalent(&self.term)
    }

    /// The hole sits in the next-to-evaluate position under left-first
    /// call-by-value order.
    pub fn is_reduction(&self, is_value_name: &dyn Fn(&str) -> bool) -> bool {
        reduction(&self.term, is_value_name)
    }

    /// Variables bound by `let`/`letactor` on the path to the hole, outermost
    /// first.
    pub fn binders_on_path(&self) -> Vec<String> {
        let mut out = Vec::new();
        path_binders(&self.term, &mut out);
        out
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.term.fmt(f)
    }
}

pub fn plug_term(term: &Expr, e: &Expr) -> Expr {
    match term {
        Expr::Hole => e.clone(),
        Expr::Var(_) | Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) => term.clone(),
        Expr::Lambda(x, b) => Expr::Lambda(x.clone(), Box::new(plug_term(b, e))),
        Expr::Let(x, a, b) => Expr::Let(x.clone(), Box::new(plug_term(a, e)), Box::new(plug_term(b, e))),
        Expr::LetActor(x, a, b) => {
            Expr::LetActor(x.clone(), Box::new(plug_term(a, e)), Box::new(plug_term(b, e)))
        }
        Expr::App(a, b) => Expr::App(Box::new(plug_term(a, e)), Box::new(plug_term(b, e))),
        Expr::If(c, t, f) => Expr::If(
            Box::new(plug_term(c, e)),
            Box::new(plug_term(t, e)),
            Box::new(plug_term(f, e)),
        ),
        Expr::Seq(es) => Expr::Seq(es.iter().map(|x| plug_term(x, e)).collect()),
        Expr::Prim(op, es) => Expr::Prim(*op, es.iter().map(|x| plug_term(x, e)).collect()),
    }
}

fn has_hole(e: &Expr) -> bool {
    e.hole_count() > 0
}

fn univalent(e: &Expr) -> bool {
    match e {
        Expr::Hole => true,
        Expr::Lambda(_, b) => !has_hole(b),
        Expr::Var(_) | Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) => true,
        Expr::Let(_, a, b) | Expr::LetActor(_, a, b) | Expr::App(a, b) => univalent(a) && univalent(b),
        Expr::If(c, t, f) => univalent(c) && univalent(t) && univalent(f),
        Expr::Seq(es) | Expr::Prim(_, es) => es.iter().all(univalent),
    }
}

fn path_binders(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Let(x, a, b) | Expr::LetActor(x, a, b) => {
            if has_hole(b) || matches!(e, Expr::LetActor(..)) && has_hole(a) {
                out.push(x.clone());
            }
            path_binders(a, out);
            path_binders(b, out);
        }
        Expr::Lambda(x, b) => {
            if has_hole(b) {
                out.push(x.clone());
            }
            path_binders(b, out);
        }
        Expr::App(a, b) => {
            path_binders(a, out);
            path_binders(b, out);
        }
        Expr::If(c, t, f) => {
            path_binders(c, out);
            path_binders(t, out);
            path_binders(f, out);
        }
        Expr::Seq(es) | Expr::Prim(_, es) => es.iter().for_each(|x| path_binders(x, out)),
        _ => {}
    }
}

/// Left-to-right argument lists: the hole must be in the first non-value.
fn reduction_args(es: &[Expr], isv: &dyn Fn(&str) -> bool) -> bool {
    for a in es {
        if has_hole(a) {
            return reduction(a, isv);
        }
        if !a.is_value_with(isv) {
            return false;
        }
    }
    false
}

fn reduction(e: &Expr, isv: &dyn Fn(&str) -> bool) -> bool {
    match e {
        Expr::Hole => true,
        Expr::App(f, a) => reduction_args(&[(**f).clone(), (**a).clone()], isv),
        Expr::Prim(_, es) => reduction_args(es, isv),
        Expr::Let(_, a, b) => has_hole(a) && !has_hole(b) && reduction(a, isv),
        Expr::Seq(es) => has_hole(&es[0]) && reduction(&es[0], isv),
        Expr::If(c, _, _) => has_hole(c) && reduction(c, isv),
        _ => false,
    }
}

/// Result of splitting an expression into reduction context and redex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Value,
    Stuck,
    Redex { context: Context, redex: Expr },
}

enum Dec {
    Value,
    Stuck,
    Redex(Expr, Expr),
}

/// Finds the unique reduction context and redex of `e`. Variables accepted by
/// `is_value_name` (cells, actor names) are values; any other variable in
/// evaluation position makes the expression stuck.
pub fn decompose(e: &Expr, is_value_name: &dyn Fn(&str) -> bool) -> Decomposition {
    match dec(e, is_value_name) {
        Dec::Value => Decomposition::Value,
        Dec::Stuck => Decomposition::Stuck,
        Dec::Redex(c, r) => Decomposition::Redex {
            context: Context::new(c, ContextSort::Reduction),
            redex: r,
        },
    }
}

fn dec_args(
    es: &[Expr],
    isv: &dyn Fn(&str) -> bool,
    rebuild: impl FnOnce(Vec<Expr>) -> Expr,
) -> Result<(), Dec> {
    for (i, a) in es.iter().enumerate() {
        match dec(a, isv) {
            Dec::Value => {}
            Dec::Stuck => return Err(Dec::Stuck),
            Dec::Redex(c, r) => {
                let mut args = es.to_vec();
                args[i] = c;
                return Err(Dec::Redex(rebuild(args), r));
            }
        }
    }
    Ok(())
}

fn dec(e: &Expr, isv: &dyn Fn(&str) -> bool) -> Dec {
    let here = || Dec::Redex(Expr::Hole, e.clone());
    match e {
        Expr::Var(x) => {
            if isv(x) {
                Dec::Value
            } else {
                Dec::Stuck
            }
        }
        Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Lambda(..) => Dec::Value,
        Expr::Hole => Dec::Stuck,
        Expr::Event(_) | Expr::LetActor(..) => here(),
        Expr::App(f, a) => {
            let args = [(**f).clone(), (**a).clone()];
            match dec_args(&args, isv, |mut v| {
                let a = v.pop().unwrap();
                let f = v.pop().unwrap();
                Expr::App(Box::new(f), Box::new(a))
            }) {
                Ok(()) => here(),
                Err(d) => d,
            }
        }
        Expr::Prim(op, es) => match dec_args(es, isv, |v| Expr::Prim(*op, v)) {
            Ok(()) if *op == Op::Pair => Dec::Value,
            Ok(()) => here(),
            Err(d) => d,
        },
        Expr::Let(x, a, b) => match dec(a, isv) {
            Dec::Value => here(),
            Dec::Stuck => Dec::Stuck,
            Dec::Redex(c, r) => Dec::Redex(Expr::Let(x.clone(), Box::new(c), b.clone()), r),
        },
        Expr::Seq(es) => match dec(&es[0], isv) {
            Dec::Value => here(),
            Dec::Stuck => Dec::Stuck,
            Dec::Redex(c, r) => {
                let mut v = es.clone();
                v[0] = c;
                Dec::Redex(Expr::Seq(v), r)
            }
        },
        Expr::If(c, t, f) => match dec(c, isv) {
            Dec::Value => here(),
            Dec::Stuck => Dec::Stuck,
            Dec::Redex(k, r) => Dec::Redex(Expr::If(Box::new(k), t.clone(), f.clone()), r),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;

    fn cells(x: &str) -> bool {
        x.starts_with('z')
    }

    #[test]
    fn leftmost_redex() {
        let e = seq(vec![set(var("z"), t()), get(var("z"))]);
        match decompose(&e, &cells) {
            Decomposition::Redex { context, redex } => {
                assert_eq!(context.term(), &seq(vec![hole(), get(var("z"))]));
                assert_eq!(redex, set(var("z"), t()));
                assert_eq!(context.plug(&redex), e);
            }
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn values_and_stuck_terms() {
        assert_eq!(decompose(&nat(3), &cells), Decomposition::Value);
        assert_eq!(decompose(&pair(var("z0"), nil()), &cells), Decomposition::Value);
        assert_eq!(decompose(&app(var("f"), nil()), &cells), Decomposition::Stuck);
        // get of a non-cell is still a redex; the reducer decides
        assert!(matches!(decompose(&get(nil()), &cells), Decomposition::Redex { .. }));
    }

    #[test]
    fn argument_position() {
        let e = app(lam("x", var("x")), get(var("z")));
        match decompose(&e, &cells) {
            Decomposition::Redex { context, redex } => {
                assert_eq!(context.term(), &app(lam("x", var("x")), hole()));
                assert_eq!(redex, get(var("z")));
            }
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn plugging() {
        let c = Context::new(let_("x", mk(var("v")), hole()), ContextSort::Univalent);
        assert_eq!(c.plug(&eq(var("x"), var("x"))), let_("x", mk(var("v")), eq(var("x"), var("x"))));
        assert_eq!(Context::hole().plug(&nil()), nil());
    }

    #[test]
    fn univalence() {
        let u = |e: Expr| Context::new(e, ContextSort::General).is_univalent();
        assert!(u(let_("x", mk(var("v")), hole())));
        assert!(!u(lam("x", hole())));
        assert!(u(seq(vec![set(var("z"), t()), hole()])));
        assert!(!u(let_("x", nil(), app(lam("y", hole()), nil()))));
        assert!(u(app(lam("y", var("y")), hole())));
    }

    #[test]
    fn reduction_context_predicate() {
        let r = |e: Expr| Context::new(e, ContextSort::General).is_reduction(&cells);
        assert!(r(hole()));
        assert!(r(app(hole(), nil())));
        assert!(r(app(lam("x", var("x")), hole())));
        assert!(!r(app(get(var("z")), hole())));
        assert!(r(let_("f", hole(), app(var("f"), nil()))));
        assert!(!r(let_("f", nil(), hole())));
        assert!(!r(seq(vec![nil(), hole()])));
        assert!(r(set(var("z0"), hole())));
    }

    #[test]
    fn binders_on_path() {
        let c = Context::new(
            let_("x", mk(nil()), let_("y", nil(), seq(vec![hole()]))),
            ContextSort::Univalent,
        );
        assert_eq!(c.binders_on_path(), vec!["x".to_string(), "y".to_string()]);
    }
}
