//! Named terms used by the laws, the examples and the tests.

use crate::syntax::build::*;
use crate::syntax::Expr;

/// The cell-based call-by-value fixed-point combinator:
/// `λy.let{z := mk(nil)} seq(set(z, λx.app(app(y, get(z)), x)), get(z))`.
pub fn yv() -> Expr {
    lam(
        "y",
        let_(
            "z",
            mk(nil()),
            seq(vec![
                set(var("z"), lam("x", app(app(var("y"), get(var("z"))), var("x")))),
                get(var("z")),
            ]),
        ),
    )
}

/// `app(Yv, f)`.
pub fn fix(f: Expr) -> Expr {
    app(yv(), f)
}

/// Curried addition by recursion on the first argument.
pub fn add() -> Expr {
    fix(lam(
        "a",
        lam(
            "m",
            lam(
                "k",
                if_(
                    eq(var("m"), nat(0)),
                    var("k"),
                    add1(app(app(var("a"), sub1(var("m"))), var("k"))),
                ),
            ),
        ),
    ))
}

/// Curried multiplication by repeated addition, recursing on the second
/// argument.
pub fn mult() -> Expr {
    fix(lam(
        "mu",
        lam(
            "m",
            lam(
                "k",
                if_(
                    eq(var("k"), nat(0)),
                    nat(0),
                    app(app(add(), var("m")), app(app(var("mu"), var("m")), sub1(var("k")))),
                ),
            ),
        ),
    ))
}

/// `λf.λn.if(eq(n,0), 1, n × f(n-1))`.
pub fn f_fact() -> Expr {
    lam(
        "f",
        lam(
            "n",
            if_(
                eq(var("n"), nat(0)),
                nat(1),
                app(app(mult(), app(var("f"), sub1(var("n")))), var("n")),
            ),
        ),
    )
}

/// `λp.λn.if(eq(n,0), n, app(p, n-1))`.
pub fn f_guarded() -> Expr {
    lam(
        "p",
        lam(
            "n",
            if_(eq(var("n"), nat(0)), var("n"), app(var("p"), sub1(var("n")))),
        ),
    )
}

/// Cell identity computed by mutation, restoring both cells before returning.
pub fn eq_via_mutation() -> Expr {
    lam(
        "x",
        lam(
            "y",
            let_(
                "x0",
                get(var("x")),
                let_(
                    "y0",
                    get(var("y")),
                    seq(vec![
                        set(var("x"), nil()),
                        set(var("y"), t()),
                        let_(
                            "z",
                            get(var("x")),
                            seq(vec![
                                set(var("x"), var("x0")),
                                set(var("y"), var("y0")),
                                var("z"),
                            ]),
                        ),
                    ]),
                ),
            ),
        ),
    )
}

/// `λx.λy.eq(x, y)`.
pub fn eq_pure() -> Expr {
    lam("x", lam("y", eq(var("x"), var("y"))))
}

/// A function returning 0, 1, 2, ... on successive calls.
pub fn counter() -> Expr {
    let_(
        "x",
        mk(nat(0)),
        lam(
            "y",
            let_(
                "z",
                get(var("x")),
                seq(vec![set(var("x"), add1(var("z"))), var("z")]),
            ),
        ),
    )
}

/// `let{z := mk(0)} λx.let{y := get(z)} seq(set(z, x), y)`: returns the
/// argument of the previous call.
pub fn thunk() -> Expr {
    let_(
        "z",
        mk(nat(0)),
        lam(
            "x",
            let_("y", get(var("z")), seq(vec![set(var("z"), var("x")), var("y")])),
        ),
    )
}

/// `λx.app(thunk, x)`: allocates a new cell on every call.
pub fn thunk_eta() -> Expr {
    lam("x", app(thunk(), var("x")))
}

/// The four expressions of the expansiveness taxonomy, open in `y`.
pub fn taxonomy() -> [Expr; 4] {
    let guard = if_(cellp(var("y")), set(var("y"), nil()), nil());
    let fresh_fn = lam("x", mk(nil()));
    let shared = let_("z", mk(nil()), lam("x", var("z")));
    [
        fresh_fn.clone(),
        shared.clone(),
        seq(vec![guard.clone(), fresh_fn]),
        seq(vec![guard, shared]),
    ]
}

/// Memory closures for the η law, starting with the counterexample.
pub fn closure_pool() -> Vec<Expr> {
    vec![
        thunk(),
        lam("x", var("x")),
        let_("z", mk(nat(0)), lam("x", seq(vec![set(var("z"), var("x")), var("x")]))),
        lam("x", seq(vec![mk(nat(0)), var("x")])),
        let_("z", mk(nil()), lam("x", get(var("z")))),
        counter(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reducer::eval_expr;

    fn run(e: Expr) -> Option<Expr> {
        eval_expr(&e, 1_000_000).value().cloned()
    }

    #[test]
    fn arithmetic_helpers() {
        assert_eq!(run(app(app(add(), nat(3)), nat(4))), Some(nat(7)));
        assert_eq!(run(app(app(mult(), nat(3)), nat(4))), Some(nat(12)));
        assert_eq!(run(app(app(mult(), nat(5)), nat(0))), Some(nat(0)));
    }

    #[test]
    fn thunk_remembers_previous_argument() {
        let e = let_(
            "f",
            thunk(),
            seq(vec![app(var("f"), nat(7)), app(var("f"), nat(9))]),
        );
        assert_eq!(run(e), Some(nat(7)));
        let e = let_(
            "f",
            thunk_eta(),
            seq(vec![app(var("f"), nat(7)), app(var("f"), nat(9))]),
        );
        assert_eq!(run(e), Some(nat(0)));
    }
}
