use super::expr::Expr;

/// Equality up to consistent renaming of bound variables.
pub fn alpha_equal(e0: &Expr, e1: &Expr) -> bool {
    alpha_equal_with(e0, e1, &mut |x, y| x == y)
}

/// Alpha-equality where free variables are related by `free` instead of by
/// name. `free` may record correspondences as it is consulted; it sees free
/// occurrences left to right.
pub fn alpha_equal_with(e0: &Expr, e1: &Expr, free: &mut dyn FnMut(&str, &str) -> bool) -> bool {
    Cmp {
        left: Vec::new(),
        right: Vec::new(),
        free,
    }
    .eq(e0, e1)
}

struct Cmp<'a> {
    left: Vec<&'a str>,
    right: Vec<&'a str>,
    free: &'a mut dyn FnMut(&str, &str) -> bool,
}

impl<'a> Cmp<'a> {
    fn var(&mut self, x: &str, y: &str) -> bool {
        let i = self.left.iter().rposition(|b| *b == x);
        let j = self.right.iter().rposition(|b| *b == y);
        match (i, j) {
            (Some(i), Some(j)) => self.left.len() - i == self.right.len() - j,
            (None, None) => (self.free)(x, y),
            _ => false,
        }
    }

    fn under(&mut self, x: &'a str, y: &'a str, f: impl FnOnce(&mut Self) -> bool) -> bool {
        self.left.push(x);
        self.right.push(y);
        let r = f(self);
        self.left.pop();
        self.right.pop();
        r
    }

    fn all(&mut self, a: &'a [Expr], b: &'a [Expr]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.eq(x, y))
    }

    fn eq(&mut self, e0: &'a Expr, e1: &'a Expr) -> bool {
        use Expr::*;
        match (e0, e1) {
            (Var(x), Var(y)) => self.var(x, y),
            (Nil, Nil) | (T, T) | (Hole, Hole) => true,
            (Nat(a), Nat(b)) => a == b,
            (Event(a), Event(b)) => a == b,
            (Lambda(x, b0), Lambda(y, b1)) => self.under(x, y, |c| c.eq(b0, b1)),
            (Let(x, e0, b0), Let(y, e1, b1)) => self.eq(e0, e1) && self.under(x, y, |c| c.eq(b0, b1)),
            (LetActor(x, e0, b0), LetActor(y, e1, b1)) => {
                self.under(x, y, |c| c.eq(e0, e1) && c.eq(b0, b1))
            }
            (App(f0, a0), App(f1, a1)) => self.eq(f0, f1) && self.eq(a0, a1),
            (If(c0, t0, f0), If(c1, t1, f1)) => self.eq(c0, c1) && self.eq(t0, t1) && self.eq(f0, f1),
            (Seq(a), Seq(b)) => self.all(a, b),
            (Prim(p, a), Prim(q, b)) => p == q && self.all(a, b),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;

    #[test]
    fn renaming_of_binders() {
        assert!(alpha_equal(&lam("x", var("x")), &lam("y", var("y"))));
        assert!(!alpha_equal(&lam("x", var("y")), &lam("y", var("y"))));
        assert!(alpha_equal(
            &let_("z", mk(var("x")), var("z")),
            &let_("w", mk(var("x")), var("w"))
        ));
        assert!(!alpha_equal(
            &let_("z", mk(var("z")), var("z")),
            &let_("w", mk(var("w")), var("w"))
        ));
    }

    #[test]
    fn shadowing_is_respected() {
        let a = lam("x", lam("x", var("x")));
        let b = lam("x", lam("y", var("y")));
        let c = lam("x", lam("y", var("x")));
        assert!(alpha_equal(&a, &b));
        assert!(!alpha_equal(&a, &c));
    }

    #[test]
    fn free_correspondence_is_pluggable() {
        let mut seen = Vec::new();
        let ok = alpha_equal_with(&pair(var("z0"), var("z1")), &pair(var("z5"), var("z6")), &mut |x, y| {
            seen.push((x.to_string(), y.to_string()));
            true
        });
        assert!(ok);
        assert_eq!(seen.len(), 2);
    }
}
