use std::collections::BTreeSet;
use std::fmt;

/// Variable, cell and actor names share one namespace.
pub type Name = String;

/// Primitive operators. Pairs are immutable constructors; every other operator
/// is applied to already-evaluated arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Mk,
    Get,
    Set,
    Eq,
    CellP,
    Pair,
    Fst,
    Snd,
    Add1,
    Sub1,
    NatP,
    Send,
    Become,
}

impl Op {
    pub const ALL: [Op; 13] = [
        Op::Mk,
        Op::Get,
        Op::Set,
        Op::Eq,
        Op::CellP,
        Op::Pair,
        Op::Fst,
        Op::Snd,
        Op::Add1,
        Op::Sub1,
        Op::NatP,
        Op::Send,
        Op::Become,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Op::Mk => "mk",
            Op::Get => "get",
            Op::Set => "set",
            Op::Eq => "eq",
            Op::CellP => "cell?",
            Op::Pair => "pair",
            Op::Fst => "fst",
            Op::Snd => "snd",
            Op::Add1 => "add1",
            Op::Sub1 => "sub1",
            Op::NatP => "nat?",
            Op::Send => "send",
            Op::Become => "become",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Op::Set | Op::Eq | Op::Pair | Op::Send => 2,
            _ => 1,
        }
    }

    pub fn from_keyword(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.keyword() == s)
    }

    /// Operators that only make sense inside an actor.
    pub fn is_actor_op(self) -> bool {
        matches!(self, Op::Send | Op::Become)
    }

    /// Operators that touch memory.
    pub fn is_memory_op(self) -> bool {
        matches!(self, Op::Mk | Op::Get | Op::Set)
    }
}

/// Abstract syntax of the language, including the actor forms and the hole
/// used by contexts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Name),
    Nil,
    T,
    Nat(u64),
    Lambda(Name, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Let(Name, Box<Expr>, Box<Expr>),
    /// Always at least one element.
    Seq(Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Prim(Op, Vec<Expr>),
    /// `letactor{x := b} e`; `x` is bound in both `b` and `e`.
    LetActor(Name, Box<Expr>, Box<Expr>),
    Event(Option<Name>),
    Hole,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::Nil
    }
}

impl Expr {
    /// True for the syntactic values given which names denote values
    /// (cells in a memory, or actor names in a configuration).
    pub fn is_value_with(&self, is_value_name: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Expr::Var(x) => is_value_name(x),
            Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Lambda(..) => true,
            Expr::Prim(Op::Pair, args) => args.iter().all(|a| a.is_value_with(is_value_name)),
            _ => false,
        }
    }

    /// Values where every variable counts as a value (open reasoning).
    pub fn is_value_open(&self) -> bool {
        self.is_value_with(&|_| true)
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Expr::Nil | Expr::T | Expr::Nat(_))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn has_free(&self, name: &str) -> bool {
        match self {
            Expr::Var(x) => x == name,
            Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) | Expr::Hole => false,
            Expr::Lambda(x, b) => x != name && b.has_free(name),
            Expr::Let(x, e, b) => e.has_free(name) || (x != name && b.has_free(name)),
            Expr::LetActor(x, b, e) => x != name && (b.has_free(name) || e.has_free(name)),
            Expr::App(f, a) => f.has_free(name) || a.has_free(name),
            Expr::If(c, t, e) => c.has_free(name) || t.has_free(name) || e.has_free(name),
            Expr::Seq(es) | Expr::Prim(_, es) => es.iter().any(|e| e.has_free(name)),
        }
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) | Expr::Hole => {}
            Expr::Lambda(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Expr::Let(x, e, b) => {
                e.collect_free(bound, out);
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Expr::LetActor(x, b, e) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                e.collect_free(bound, out);
                bound.pop();
            }
            Expr::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Expr::If(c, t, e) => {
                c.collect_free(bound, out);
                t.collect_free(bound, out);
                e.collect_free(bound, out);
            }
            Expr::Seq(es) | Expr::Prim(_, es) => {
                for e in es {
                    e.collect_free(bound, out);
                }
            }
        }
    }

    /// Every name occurring anywhere, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) | Expr::Hole => {}
            Expr::Lambda(x, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
            Expr::Let(x, e, b) | Expr::LetActor(x, e, b) => {
                out.insert(x.clone());
                e.all_names(out);
                b.all_names(out);
            }
            Expr::App(f, a) => {
                f.all_names(out);
                a.all_names(out);
            }
            Expr::If(c, t, e) => {
                c.all_names(out);
                t.all_names(out);
                e.all_names(out);
            }
            Expr::Seq(es) | Expr::Prim(_, es) => es.iter().for_each(|e| e.all_names(out)),
        }
    }

    pub fn hole_count(&self) -> usize {
        match self {
            Expr::Hole => 1,
            Expr::Var(_) | Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) => 0,
            Expr::Lambda(_, b) => b.hole_count(),
            Expr::Let(_, e, b) | Expr::LetActor(_, e, b) | Expr::App(e, b) => {
                e.hole_count() + b.hole_count()
            }
            Expr::If(c, t, e) => c.hole_count() + t.hole_count() + e.hole_count(),
            Expr::Seq(es) | Expr::Prim(_, es) => es.iter().map(Expr::hole_count).sum(),
        }
    }

    /// Number of constructors, used to bound generated terms.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Var(_) | Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) | Expr::Hole => 0,
            Expr::Lambda(_, b) => b.size(),
            Expr::Let(_, e, b) | Expr::LetActor(_, e, b) | Expr::App(e, b) => e.size() + b.size(),
            Expr::If(c, t, e) => c.size() + t.size() + e.size(),
            Expr::Seq(es) | Expr::Prim(_, es) => es.iter().map(Expr::size).sum(),
        }
    }

    /// True if any memory primitive occurs.
    pub fn uses_memory(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Prim(op, _) if op.is_memory_op()))
    }

    /// True if any actor primitive occurs.
    pub fn uses_actors(&self) -> bool {
        self.any(&|e| {
            matches!(e, Expr::Prim(op, _) if op.is_actor_op())
                || matches!(e, Expr::LetActor(..) | Expr::Event(_))
        })
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Var(_) | Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) | Expr::Hole => false,
            Expr::Lambda(_, b) => b.any(pred),
            Expr::Let(_, e, b) | Expr::LetActor(_, e, b) | Expr::App(e, b) => e.any(pred) || b.any(pred),
            Expr::If(c, t, e) => c.any(pred) || t.any(pred) || e.any(pred),
            Expr::Seq(es) | Expr::Prim(_, es) => es.iter().any(|e| e.any(pred)),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, items: &[Expr]) -> fmt::Result {
    write!(f, "({head}")?;
    for it in items {
        write!(f, " {it}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(x) => f.write_str(x),
            Expr::Nil => f.write_str("nil"),
            Expr::T => f.write_str("t"),
            Expr::Nat(n) => write!(f, "{n}"),
            Expr::Hole => f.write_str("_"),
            Expr::Lambda(x, b) => write!(f, "(lambda ({x}) {b})"),
            Expr::App(a, b) => write!(f, "(app {a} {b})"),
            Expr::Let(x, e, b) => write!(f, "(let (({x} {e})) {b})"),
            Expr::LetActor(x, e, b) => write!(f, "(letactor (({x} {e})) {b})"),
            Expr::Seq(es) => write_list(f, "seq", es),
            Expr::If(c, t, e) => write!(f, "(if {c} {t} {e})"),
            Expr::Prim(op, args) => write_list(f, op.keyword(), args),
            Expr::Event(None) => f.write_str("(event)"),
            Expr::Event(Some(tag)) => write!(f, "(event {tag})"),
        }
    }
}

/// Terse constructors for building terms in code and tests.
pub mod build {
    use super::{Expr, Op};

    pub fn var(x: &str) -> Expr {
        Expr::Var(x.to_string())
    }
    pub fn nat(n: u64) -> Expr {
        Expr::Nat(n)
    }
    pub fn nil() -> Expr {
        Expr::Nil
    }
    pub fn t() -> Expr {
        Expr::T
    }
    pub fn hole() -> Expr {
        Expr::Hole
    }
    pub fn lam(x: &str, body: Expr) -> Expr {
        Expr::Lambda(x.to_string(), Box::new(body))
    }
    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }
    pub fn let_(x: &str, e: Expr, body: Expr) -> Expr {
        Expr::Let(x.to_string(), Box::new(e), Box::new(body))
    }
    pub fn letactor(x: &str, b: Expr, body: Expr) -> Expr {
        Expr::LetActor(x.to_string(), Box::new(b), Box::new(body))
    }
    pub fn seq(es: Vec<Expr>) -> Expr {
        assert!(!es.is_empty(), "seq needs at least one expression");
        Expr::Seq(es)
    }
    pub fn if_(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::If(Box::new(c), Box::new(t), Box::new(e))
    }
    pub fn prim(op: Op, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(op.arity(), args.len());
        Expr::Prim(op, args)
    }
    pub fn mk(e: Expr) -> Expr {
        prim(Op::Mk, vec![e])
    }
    pub fn get(e: Expr) -> Expr {
        prim(Op::Get, vec![e])
    }
    pub fn set(c: Expr, v: Expr) -> Expr {
        prim(Op::Set, vec![c, v])
    }
    pub fn eq(a: Expr, b: Expr) -> Expr {
        prim(Op::Eq, vec![a, b])
    }
    pub fn cellp(e: Expr) -> Expr {
        prim(Op::CellP, vec![e])
    }
    pub fn pair(a: Expr, b: Expr) -> Expr {
        prim(Op::Pair, vec![a, b])
    }
    pub fn fst(e: Expr) -> Expr {
        prim(Op::Fst, vec![e])
    }
    pub fn snd(e: Expr) -> Expr {
        prim(Op::Snd, vec![e])
    }
    pub fn add1(e: Expr) -> Expr {
        prim(Op::Add1, vec![e])
    }
    pub fn sub1(e: Expr) -> Expr {
        prim(Op::Sub1, vec![e])
    }
    pub fn natp(e: Expr) -> Expr {
        prim(Op::NatP, vec![e])
    }
    pub fn send(a: Expr, v: Expr) -> Expr {
        prim(Op::Send, vec![a, v])
    }
    pub fn become_(b: Expr) -> Expr {
        prim(Op::Become, vec![b])
    }
    pub fn event(tag: Option<&str>) -> Expr {
        Expr::Event(tag.map(str::to_string))
    }
}
