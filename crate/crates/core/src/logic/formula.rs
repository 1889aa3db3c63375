use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::ParseError;
use crate::sexp::{self, Sexp};
use crate::syntax::{context_from_sexp, from_sexp, name_from_sexp, Context, ContextSort, Expr, Name};

/// Formulas over equivalence atoms, class membership and contextual
/// assertions. Logic variables share the namespace of program variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Equiv(Expr, Expr),
    Member(Expr, Class),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Name, Box<Formula>),
    Exists(Name, Box<Formula>),
    /// Ranges over the finite class pool.
    ForallClass(Name, Box<Formula>),
    /// `U[[Φ]]`.
    Ctx(Context, Box<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Class {
    Val,
    Nat,
    Nil,
    Cell,
    /// `Cell[K]`.
    CellOf(Box<Class>),
    /// `{x | Φ}`.
    Comprehension(Name, Box<Formula>),
    /// Total functions `X̄ → Y`.
    Arrow(Vec<Class>, Box<Class>),
    /// Partial functions `X̄ ⇀ Y`.
    Partial(Vec<Class>, Box<Class>),
    /// Memory functions `X̄ →μ Y`.
    Memory(Vec<Class>, Box<Class>),
    Var(Name),
}

#[derive(Debug, thiserror::Error)]
pub enum LogicError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("context {0} is not univalent")]
    NotUnivalent(String),
    #[error("function class with no argument classes")]
    EmptyArrow,
    #[error("class variable {0} is not bound")]
    UnboundClass(Name),
}

/// Bound variable used when expanding `⊆` and `≡`.
const SUBSET_VAR: &str = "s'";

pub fn forall(x: &str, body: Formula) -> Formula {
    Formula::Forall(x.into(), Box::new(body))
}

pub fn exists(x: &str, body: Formula) -> Formula {
    Formula::Exists(x.into(), Box::new(body))
}

pub fn not(p: Formula) -> Formula {
    Formula::Not(Box::new(p))
}

pub fn implies(p: Formula, q: Formula) -> Formula {
    Formula::Implies(Box::new(p), Box::new(q))
}

pub fn equiv(a: Expr, b: Expr) -> Formula {
    Formula::Equiv(a, b)
}

pub fn member(e: Expr, k: Class) -> Formula {
    Formula::Member(e, k)
}

pub fn ctx(u: Context, body: Formula) -> Formula {
    Formula::Ctx(u.with_sort(ContextSort::Univalent), Box::new(body))
}

/// `K0 ⊆ K1`, as `(∀x)(x ∈ K0 ⇒ x ∈ K1)`.
pub fn subset(k0: Class, k1: Class) -> Formula {
    let x = Expr::Var(SUBSET_VAR.into());
    forall(SUBSET_VAR, implies(member(x.clone(), k0), member(x, k1)))
}

/// `K0 ≡ K1`, as both inclusions.
pub fn class_eq(k0: Class, k1: Class) -> Formula {
    Formula::And(vec![subset(k0.clone(), k1.clone()), subset(k1, k0)])
}

pub fn comprehension(x: &str, body: Formula) -> Class {
    Class::Comprehension(x.into(), Box::new(body))
}

pub fn cell_of(k: Class) -> Class {
    Class::CellOf(Box::new(k))
}

pub fn arrow(args: Vec<Class>, res: Class) -> Class {
    Class::Arrow(args, Box::new(res))
}

pub fn partial(args: Vec<Class>, res: Class) -> Class {
    Class::Partial(args, Box::new(res))
}

pub fn memory_arrow(args: Vec<Class>, res: Class) -> Class {
    Class::Memory(args, Box::new(res))
}

impl Formula {
    /// Free program variables, the ones a closing substitution must bind
    /// (or the memory, for cells).
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Equiv(a, b) => {
                out.extend(a.free_vars());
                out.extend(b.free_vars());
            }
            Formula::Member(e, k) => {
                out.extend(e.free_vars());
                k.collect_free(out);
            }
            Formula::Not(p) | Formula::ForallClass(_, p) => p.collect_free(out),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.collect_free(out)),
            Formula::Implies(p, q) => {
                p.collect_free(out);
                q.collect_free(out);
            }
            Formula::Forall(x, p) | Formula::Exists(x, p) => {
                let mut inner = p.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
            Formula::Ctx(u, p) => {
                out.extend(u.term().free_vars());
                let mut inner = p.free_vars();
                for x in u.binders_on_path() {
                    inner.remove(&x);
                }
                out.extend(inner);
            }
        }
    }

    /// Universally closes every free variable not in `keep`.
    pub fn close_over(self, keep: &dyn Fn(&str) -> bool) -> Formula {
        let free: Vec<Name> = self.free_vars().into_iter().filter(|x| !keep(x)).collect();
        free.into_iter().rev().fold(self, |p, x| Formula::Forall(x, Box::new(p)))
    }

    /// Univalence of every contextual assertion, non-empty arrows and bound
    /// class variables.
    pub fn validate(&self) -> Result<(), LogicError> {
        self.validate_in(&mut Vec::new())
    }

    fn validate_in(&self, classes: &mut Vec<Name>) -> Result<(), LogicError> {
        match self {
            Formula::Equiv(..) => Ok(()),
            Formula::Member(_, k) => k.validate_in(classes),
            Formula::Not(p) | Formula::Forall(_, p) | Formula::Exists(_, p) => p.validate_in(classes),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().try_for_each(|p| p.validate_in(classes)),
            Formula::Implies(p, q) => {
                p.validate_in(classes)?;
                q.validate_in(classes)
            }
            Formula::ForallClass(x, p) => {
                classes.push(x.clone());
                let r = p.validate_in(classes);
                classes.pop();
                r
            }
            Formula::Ctx(u, p) => {
                if !u.is_univalent() {
                    return Err(LogicError::NotUnivalent(u.to_string()));
                }
                p.validate_in(classes)
            }
        }
    }
}

impl Class {
    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        match self {
            Class::Val | Class::Nat | Class::Nil | Class::Cell | Class::Var(_) => {}
            Class::CellOf(k) => k.collect_free(out),
            Class::Comprehension(x, p) => {
                let mut inner = p.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
            Class::Arrow(ks, k) | Class::Partial(ks, k) | Class::Memory(ks, k) => {
                ks.iter().for_each(|c| c.collect_free(out));
                k.collect_free(out);
            }
        }
    }

    fn validate_in(&self, classes: &mut Vec<Name>) -> Result<(), LogicError> {
        match self {
            Class::Val | Class::Nat | Class::Nil | Class::Cell => Ok(()),
            Class::Var(x) if classes.contains(x) => Ok(()),
            Class::Var(x) => Err(LogicError::UnboundClass(x.clone())),
            Class::CellOf(k) => k.validate_in(classes),
            Class::Comprehension(_, p) => p.validate_in(classes),
            Class::Arrow(ks, k) | Class::Partial(ks, k) | Class::Memory(ks, k) => {
                if ks.is_empty() {
                    return Err(LogicError::EmptyArrow);
                }
                ks.iter().try_for_each(|c| c.validate_in(classes))?;
                k.validate_in(classes)
            }
        }
    }
}

fn list(f: &mut fmt::Formatter<'_>, head: &str, items: &[&dyn fmt::Display]) -> fmt::Result {
    write!(f, "({head}")?;
    for it in items {
        write!(f, " {it}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Equiv(a, b) => list(f, "equiv", &[a, b]),
            Formula::Member(e, k) => list(f, "member", &[e, k]),
            Formula::Not(p) => list(f, "not", &[p]),
            Formula::And(ps) => list(f, "and", &ps.iter().map(|p| p as &dyn fmt::Display).collect::<Vec<_>>()),
            Formula::Or(ps) => list(f, "or", &ps.iter().map(|p| p as &dyn fmt::Display).collect::<Vec<_>>()),
            Formula::Implies(p, q) => list(f, "implies", &[p, q]),
            Formula::Forall(x, p) => list(f, "forall", &[x, p]),
            Formula::Exists(x, p) => list(f, "exists", &[x, p]),
            Formula::ForallClass(x, p) => list(f, "forall-class", &[x, p]),
            Formula::Ctx(u, p) => list(f, "ctx", &[u, p]),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = |f: &mut fmt::Formatter<'_>, head: &str, ks: &[Class], k: &Class| {
            let mut items: Vec<&dyn fmt::Display> = ks.iter().map(|c| c as &dyn fmt::Display).collect();
            items.push(k);
            list(f, head, &items)
        };
        match self {
            Class::Val => f.write_str("Val"),
            Class::Nat => f.write_str("Nat"),
            Class::Nil => f.write_str("Nil"),
            Class::Cell => f.write_str("Cell"),
            Class::CellOf(k) => list(f, "Cell", &[k]),
            Class::Comprehension(x, p) => list(f, "class", &[x, p]),
            Class::Arrow(ks, k) => arrow(f, "->", ks, k),
            Class::Partial(ks, k) => arrow(f, "~>", ks, k),
            Class::Memory(ks, k) => arrow(f, "mu->", ks, k),
            Class::Var(x) => f.write_str(x),
        }
    }
}

/// Classes registered with `defclass`, inlined at their uses.
#[derive(Clone, Debug, Default)]
pub struct ClassTable {
    defs: BTreeMap<Name, Class>,
}

impl ClassTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn define(&mut self, name: impl Into<Name>, class: Class) {
        self.defs.insert(name.into(), class);
    }

    pub fn get(&self, name: &str) -> Option<&Class> {
        self.defs.get(name)
    }

    pub fn classes(&self) -> impl Iterator<Item = &Class> {
        self.defs.values()
    }
}

/// One top-level form of a formula file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Defclass(Name, Class),
    Assert(Formula),
}

/// Reads a formula file: `(defclass Name x Φ)` forms and formulas.
pub fn parse_file(text: &str, table: &mut ClassTable) -> Result<Vec<Item>, LogicError> {
    let mut out = Vec::new();
    for s in sexp::read_all(text).map_err(ParseError::from)? {
        if s.head() == Some("defclass") {
            let items = s.as_list().unwrap();
            if items.len() != 4 {
                return Err(ParseError::at(s.pos(), "expected (defclass Name x formula)").into());
            }
            let name = items[1]
                .as_atom()
                .ok_or_else(|| ParseError::at(items[1].pos(), "class name must be a symbol"))?
                .to_string();
            let x = name_from_sexp(&items[2])?;
            let body = formula_from_sexp(&items[3], table)?;
            let class = Class::Comprehension(x, Box::new(body));
            table.define(name.clone(), class.clone());
            out.push(Item::Defclass(name, class));
        } else {
            out.push(Item::Assert(formula_from_sexp(&s, table)?));
        }
    }
    Ok(out)
}

pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let s = sexp::read_one(text).map_err(ParseError::from)?;
    formula_from_sexp(&s, &ClassTable::new())
}

pub fn parse_class(text: &str) -> Result<Class, LogicError> {
    let s = sexp::read_one(text).map_err(ParseError::from)?;
    class_from_sexp(&s, &ClassTable::new())
}

fn bad(s: &Sexp, m: &str) -> LogicError {
    ParseError::at(s.pos(), m.to_string()).into()
}

/// `x` or `(x K)` after a quantifier.
fn quantified(s: &Sexp, table: &ClassTable) -> Result<(Name, Option<Class>), LogicError> {
    match s.as_list() {
        Some([x, k]) => Ok((name_from_sexp(x)?, Some(class_from_sexp(k, table)?))),
        Some(_) => Err(bad(s, "expected x or (x Class)")),
        None => Ok((name_from_sexp(s)?, None)),
    }
}

pub fn formula_from_sexp(s: &Sexp, table: &ClassTable) -> Result<Formula, LogicError> {
    let Some(items) = s.as_list() else {
        return Err(bad(s, "expected a formula"));
    };
    let head = s.head().ok_or_else(|| bad(s, "expected a formula"))?;
    let args = &items[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(bad(s, &format!("`{head}` takes {n} arguments")))
        }
    };
    let f = |x: &Sexp| formula_from_sexp(x, table);
    let k = |x: &Sexp| class_from_sexp(x, table);
    Ok(match head {
        "equiv" => {
            arity(2)?;
            Formula::Equiv(from_sexp(&args[0])?, from_sexp(&args[1])?)
        }
        "member" => {
            arity(2)?;
            Formula::Member(from_sexp(&args[0])?, k(&args[1])?)
        }
        "not" => {
            arity(1)?;
            not(f(&args[0])?)
        }
        "and" => Formula::And(args.iter().map(f).collect::<Result<_, _>>()?),
        "or" => Formula::Or(args.iter().map(f).collect::<Result<_, _>>()?),
        "implies" => {
            arity(2)?;
            implies(f(&args[0])?, f(&args[1])?)
        }
        "forall" | "exists" => {
            arity(2)?;
            let (x, class) = quantified(&args[0], table)?;
            let body = f(&args[1])?;
            let xv = Expr::Var(x.clone());
            match (head, class) {
                ("forall", None) => forall(&x, body),
                ("forall", Some(c)) => forall(&x, implies(member(xv, c), body)),
                (_, None) => exists(&x, body),
                (_, Some(c)) => exists(&x, Formula::And(vec![member(xv, c), body])),
            }
        }
        "forall-class" => {
            arity(2)?;
            Formula::ForallClass(name_from_sexp(&args[0])?, Box::new(f(&args[1])?))
        }
        "ctx" => {
            arity(2)?;
            let u = context_from_sexp(&args[0])?;
            if !u.is_univalent() {
                return Err(LogicError::NotUnivalent(u.to_string()));
            }
            ctx(u, f(&args[1])?)
        }
        "subset" => {
            arity(2)?;
            subset(k(&args[0])?, k(&args[1])?)
        }
        "class-eq" => {
            arity(2)?;
            class_eq(k(&args[0])?, k(&args[1])?)
        }
        _ => return Err(bad(s, &format!("unknown formula `{head}`"))),
    })
}

pub fn class_from_sexp(s: &Sexp, table: &ClassTable) -> Result<Class, LogicError> {
    if let Some(a) = s.as_atom() {
        return match a {
            "Val" => Ok(Class::Val),
            "Nat" => Ok(Class::Nat),
            "Nil" => Ok(Class::Nil),
            "Cell" => Ok(Class::Cell),
            _ => match table.get(a) {
                Some(k) => Ok(k.clone()),
                None if a.starts_with(|c: char| c.is_ascii_uppercase()) => Ok(Class::Var(a.into())),
                None => Err(bad(s, &format!("unknown class `{a}`"))),
            },
        };
    }
    let items = s.as_list().unwrap();
    let head = s.head().ok_or_else(|| bad(s, "expected a class"))?;
    let args = &items[1..];
    let k = |x: &Sexp| class_from_sexp(x, table);
    match head {
        "Cell" if args.len() == 1 => Ok(cell_of(k(&args[0])?)),
        "class" if args.len() == 2 => Ok(comprehension(
            &name_from_sexp(&args[0])?,
            formula_from_sexp(&args[1], table)?,
        )),
        "->" | "~>" | "mu->" if args.len() >= 2 => {
            let ks = args[..args.len() - 1].iter().map(k).collect::<Result<Vec<_>, _>>()?;
            let res = k(&args[args.len() - 1])?;
            Ok(match head {
                "->" => arrow(ks, res),
                "~>" => partial(ks, res),
                _ => memory_arrow(ks, res),
            })
        }
        _ => Err(bad(s, "expected a class")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mk_axiom_round_trips() {
        let text = "(forall y (ctx (let ((x (mk v))) _) (and (not (equiv x y)) (equiv (cell? x) t) (equiv (get x) v))))";
        let p = parse_formula(text).unwrap();
        assert_eq!(p.to_string(), text);
        assert_eq!(p.free_vars(), BTreeSet::from(["v".to_string()]));
        assert_eq!(parse_formula(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn classes_parse() {
        let k = parse_class("(mu-> Val (Cell Nil))").unwrap();
        assert_eq!(k, memory_arrow(vec![Class::Val], cell_of(Class::Nil)));
        assert!(parse_class("(-> Nat)").is_err());
        assert!(parse_class("lowercase").is_err());
    }

    #[test]
    fn defclass_is_inlined() {
        let mut t = ClassTable::new();
        let items = parse_file("(defclass Zero x (equiv x 0)) (member 0 Zero)", &mut t).unwrap();
        assert_eq!(items.len(), 2);
        let Item::Assert(Formula::Member(_, Class::Comprehension(x, _))) = &items[1] else {
            panic!("{items:?}")
        };
        assert_eq!(x, "x");
    }

    #[test]
    fn non_univalent_context_rejected() {
        let err = parse_formula("(ctx (lambda (x) _) (equiv x x))").unwrap_err();
        assert!(matches!(err, LogicError::NotUnivalent(_)));
        assert!(matches!(
            parse_formula("(forall-class X (member 0 Y))").unwrap().validate(),
            Err(LogicError::UnboundClass(_))
        ));
    }
}
