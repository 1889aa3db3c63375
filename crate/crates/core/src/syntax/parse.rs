//! Surface syntax: parenthesized prefix notation.
//!
//! ```text
//! expr := var | "nil" | "t" | NAT | "(" form ")"
//! form := "lambda" "(" var ")" expr | "app" expr expr | "let" "(" "(" var expr ")" ")" expr
//!       | "seq" expr+ | "if" expr expr expr | "mk" expr | "get" expr | "set" expr expr
//!       | "eq" expr expr | "cell?" expr | "pair" expr expr | "fst" expr | "snd" expr
//!       | "add1" expr | "sub1" expr | "nat?" expr
//!       | "send" expr expr | "become" expr | "letactor" "(" "(" var expr ")" ")" expr
//!       | "event" [symbol]
//! ```
//!
//! `(e0 e1 ...)` whose head is itself a parenthesized form is read as curried
//! application. `_` is the hole and is accepted only where a context is read.

use crate::error::{ParseError, Pos};
use crate::sexp::{self, Sexp};

use super::context::{Context, ContextSort};
use super::expr::{Expr, Name, Op};

const KEYWORDS: &[&str] = &["lambda", "app", "let", "seq", "if", "letactor", "event"];

pub fn is_reserved(s: &str) -> bool {
    matches!(s, "nil" | "t" | "_") || KEYWORDS.contains(&s) || Op::from_keyword(s).is_some()
}

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && !is_reserved(s)
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && !s.contains('%')
}

/// Parses one expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let s = sexp::read_one(text)?;
    from_sexp(&s)
}

/// Parses one context; `_` marks the hole and must occur exactly once.
pub fn parse_context(text: &str) -> Result<Context, ParseError> {
    let s = sexp::read_one(text)?;
    context_from_sexp(&s)
}

pub fn from_sexp(s: &Sexp) -> Result<Expr, ParseError> {
    Reader { holes: false }.expr(s)
}

pub fn context_from_sexp(s: &Sexp) -> Result<Context, ParseError> {
    let e = Reader { holes: true }.expr(s)?;
    match e.hole_count() {
        1 => Ok(Context::new(e, ContextSort::General)),
        n => Err(ParseError::at(s.pos(), format!("context must contain exactly one hole, found {n}"))),
    }
}

/// Reads a binder name.
pub fn name_from_sexp(s: &Sexp) -> Result<Name, ParseError> {
    match s {
        Sexp::Atom(a, _) if is_identifier(a) => Ok(a.clone()),
        _ => Err(ParseError::at(s.pos(), format!("expected a variable, found `{s}`"))),
    }
}

struct Reader {
    holes: bool,
}

impl Reader {
    fn expr(&self, s: &Sexp) -> Result<Expr, ParseError> {
        match s {
            Sexp::Atom(a, pos) => self.atom(a, *pos),
            Sexp::List(items, pos) => self.form(items, *pos),
        }
    }

    fn atom(&self, a: &str, pos: Pos) -> Result<Expr, ParseError> {
        match a {
            "nil" => Ok(Expr::Nil),
            "t" => Ok(Expr::T),
            "_" if self.holes => Ok(Expr::Hole),
            "_" => Err(ParseError::at(pos, "hole `_` is only allowed in contexts")),
            _ if a.bytes().all(|b| b.is_ascii_digit()) => a
                .parse::<u64>()
                .map(Expr::Nat)
                .map_err(|_| ParseError::at(pos, format!("natural literal out of range: {a}"))),
            _ if is_identifier(a) => Ok(Expr::Var(a.to_string())),
            _ => Err(ParseError::at(pos, format!("`{a}` cannot be used as a variable"))),
        }
    }

    fn binding(&self, s: &Sexp, form: &str) -> Result<(Name, Expr), ParseError> {
        let bad = || ParseError::at(s.pos(), format!("`{form}` expects ((var expr))"));
        let outer = s.as_list().ok_or_else(bad)?;
        if outer.len() != 1 {
            return Err(bad());
        }
        let inner = outer[0].as_list().ok_or_else(bad)?;
        if inner.len() != 2 {
            return Err(bad());
        }
        Ok((name_from_sexp(&inner[0])?, self.expr(&inner[1])?))
    }

    fn form(&self, items: &[Sexp], pos: Pos) -> Result<Expr, ParseError> {
        let Some(head) = items.first() else {
            return Err(ParseError::at(pos, "empty form"));
        };
        let args = &items[1..];
        let head = match head {
            Sexp::Atom(h, _) => h.as_str(),
            Sexp::List(..) => {
                if args.is_empty() {
                    return Err(ParseError::at(pos, "application needs an argument"));
                }
                let mut f = self.expr(head)?;
                for a in args {
                    f = Expr::App(Box::new(f), Box::new(self.expr(a)?));
                }
                return Ok(f);
            }
        };
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(ParseError::at(
                    pos,
                    format!("`{head}` expects {n} argument(s), found {}", args.len()),
                ))
            }
        };
        match head {
            "lambda" => {
                arity(2)?;
                let params = args[0]
                    .as_list()
                    .filter(|l| l.len() == 1)
                    .ok_or_else(|| ParseError::at(args[0].pos(), "`lambda` expects exactly one parameter"))?;
                let x = name_from_sexp(&params[0])?;
                Ok(Expr::Lambda(x, Box::new(self.expr(&args[1])?)))
            }
            "app" => {
                arity(2)?;
                Ok(Expr::App(Box::new(self.expr(&args[0])?), Box::new(self.expr(&args[1])?)))
            }
            "let" | "letactor" => {
                arity(2)?;
                let (x, e) = self.binding(&args[0], head)?;
                let body = Box::new(self.expr(&args[1])?);
                Ok(if head == "let" {
                    Expr::Let(x, Box::new(e), body)
                } else {
                    Expr::LetActor(x, Box::new(e), body)
                })
            }
            "seq" => {
                if args.is_empty() {
                    return Err(ParseError::at(pos, "`seq` needs at least one expression"));
                }
                Ok(Expr::Seq(args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?))
            }
            "if" => {
                arity(3)?;
                Ok(Expr::If(
                    Box::new(self.expr(&args[0])?),
                    Box::new(self.expr(&args[1])?),
                    Box::new(self.expr(&args[2])?),
                ))
            }
            "event" => match args {
                [] => Ok(Expr::Event(None)),
                [Sexp::Atom(tag, _)] if is_identifier(tag) => Ok(Expr::Event(Some(tag.clone()))),
                _ => Err(ParseError::at(pos, "`event` takes an optional symbol tag")),
            },
            _ => match Op::from_keyword(head) {
                Some(op) => {
                    arity(op.arity())?;
                    Ok(Expr::Prim(op, args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?))
                }
                None => Err(ParseError::UnknownHead {
                    name: head.to_string(),
                    pos: items[0].pos(),
                }),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;

    #[test]
    fn reads_constructors() {
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
    fn head_expression_means_application() {
        assert_eq!(
            parse("((lambda (x) x) nil)").unwrap(),
            app(lam("x", var("x")), nil())
        );
        assert_eq!(parse("((app f g) 1 2)").unwrap(), app(app(app(var("f"), var("g")), nat(1)), nat(2)));
    }

    #[test]
    fn unknown_operator_is_reported_with_position() {
        let err = parse("(seq\n  (frob x))").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownHead {
                name: "frob".into(),
                pos: Pos { line: 2, column: 4 }
            }
        );
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(parse("(mk)").is_err());
        assert!(parse("(seq)").is_err());
        assert!(parse("(lambda (x y) x)").is_err());
        assert!(parse("(let (x 1) x)").is_err());
        assert!(parse("_").is_err());
        assert!(parse("(mk nil").is_err());
        assert!(parse("(lambda (nil) x)").is_err());
    }

    #[test]
    fn contexts_need_one_hole() {
        let c = parse_context("(seq _ (get z))").unwrap();
        assert_eq!(c.term(), &seq(vec![hole(), get(var("z"))]));
        assert!(parse_context("(seq _ _)").is_err());
        assert!(parse_context("(seq nil)").is_err());
    }

    #[test]
    fn event_tags() {
        assert_eq!(parse("(event)").unwrap(), event(None));
        assert_eq!(parse("(event hit)").unwrap(), event(Some("hit")));
    }
}
