//! Small-step reduction of descriptions `Γ; e`.

use std::collections::BTreeSet;
use std::fmt;

use crate::memory::Memory;
use crate::syntax::{decompose, subst1, Decomposition, Expr, Name, Op};

/// `Γ; e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Description {
    pub memory: Memory,
    pub expr: Expr,
}

impl Description {
    pub fn new(memory: Memory, expr: Expr) -> Self {
        Description { memory, expr }
    }

    pub fn closed(expr: Expr) -> Self {
        Description {
            memory: Memory::new(),
            expr,
        }
    }

    pub fn is_value(&self) -> bool {
        self.expr.is_value_with(&|x| self.memory.contains(x))
    }
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊢ {}", self.memory, self.expr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value { value: Expr, memory: Memory },
    Stuck(Description),
    Timeout(usize),
}

impl Outcome {
    pub fn is_value(&self) -> bool {
        matches!(self, Outcome::Value { .. })
    }

    pub fn is_stuck(&self) -> bool {
        matches!(self, Outcome::Stuck(_))
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, Outcome::Timeout(_))
    }

    pub fn value(&self) -> Option<&Expr> {
        match self {
            Outcome::Value { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn memory(&self) -> Option<&Memory> {
        match self {
            Outcome::Value { memory, .. } => Some(memory),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value { value, memory } => write!(f, "(value {value} {})", memory.to_sexp_string()),
            Outcome::Stuck(d) => write!(f, "(stuck {} {})", d.expr, d.memory.to_sexp_string()),
            Outcome::Timeout(n) => write!(f, "(timeout {n})"),
        }
    }
}

/// Result of one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(Description),
    Done,
    Stuck,
}

/// Where effectful redexes go. The sequential reducer handles memory; the
/// actor simulator handles actor primitives.
pub trait Effects {
    /// Names that are values: cells, actor addresses.
    fn is_value_name(&self, x: &str) -> bool;
    fn is_cell(&self, x: &str) -> bool;
    /// Contracts `op(args)` for an effect primitive (or `letactor`/`event`)
    /// whose arguments are values. `None` means stuck.
    fn effect(&mut self, redex: Expr) -> Option<Expr>;
}

/// Memory effects with z0, z1, ... allocation.
pub struct Store<'a> {
    pub memory: &'a mut Memory,
    reserved: BTreeSet<Name>,
    next: usize,
}

impl<'a> Store<'a> {
    /// `reserved` names are never chosen for fresh cells.
    pub fn new(memory: &'a mut Memory, reserved: BTreeSet<Name>) -> Self {
        Store {
            memory,
            reserved,
            next: 0,
        }
    }
}

impl Effects for Store<'_> {
    fn is_value_name(&self, x: &str) -> bool {
        self.memory.contains(x)
    }

    fn is_cell(&self, x: &str) -> bool {
        self.memory.contains(x)
    }

    fn effect(&mut self, redex: Expr) -> Option<Expr> {
        let Expr::Prim(op, mut args) = redex else {
            return None;
        };
        match (op, args.as_mut_slice()) {
            (Op::Mk, [v]) => {
                let (z, next) = self.memory.fresh_cell(self.next, &|n| self.reserved.contains(n));
                self.next = next;
                self.memory.insert(z.clone(), std::mem::take(v));
                Some(Expr::Var(z))
            }
            (Op::Get, [Expr::Var(z)]) => self.memory.get(z).cloned(),
            (Op::Set, [Expr::Var(z), v]) if self.memory.contains(z) => {
                self.memory.set(z, std::mem::take(v));
                Some(Expr::Nil)
            }
            _ => None,
        }
    }
}

fn truth(b: bool) -> Expr {
    if b {
        Expr::T
    } else {
        Expr::Nil
    }
}

/// Primitive identity on values: atoms by value, names by name; lambdas and
/// pairs are never `eq`.
fn prim_eq(a: &Expr, b: &Expr) -> Expr {
    match (a, b) {
        (Expr::Var(x), Expr::Var(y)) => truth(x == y),
        _ if a.is_atom() && b.is_atom() => truth(a == b),
        _ => Expr::Nil,
    }
}

/// Contracts a redex whose immediate subterms in evaluation position are
/// values. `None` means stuck.
pub fn contract(redex: Expr, fx: &mut dyn Effects) -> Option<Expr> {
    match redex {
        Expr::App(f, a) => match *f {
            Expr::Lambda(x, body) => Some(subst1(&body, &x, &a)),
            _ => None,
        },
        Expr::Let(x, v, body) => Some(subst1(&body, &x, &v)),
        Expr::Seq(mut es) => {
            if es.len() == 1 {
                es.pop()
            } else {
                es.remove(0);
                Some(Expr::Seq(es))
            }
        }
        Expr::If(c, t, e) => Some(if *c == Expr::Nil { *e } else { *t }),
        Expr::Prim(op, mut args) => match op {
            Op::Eq => Some(prim_eq(&args[0], &args[1])),
            Op::CellP => Some(truth(matches!(&args[0], Expr::Var(z) if fx.is_cell(z)))),
            Op::NatP => Some(truth(matches!(args[0], Expr::Nat(_)))),
            Op::Fst | Op::Snd => match args.pop() {
                Some(Expr::Prim(Op::Pair, mut p)) => {
                    let b = p.pop();
                    let a = p.pop();
                    if op == Op::Fst {
                        a
                    } else {
                        b
                    }
                }
                _ => None,
            },
            Op::Add1 => match args[0] {
                Expr::Nat(n) => n.checked_add(1).map(Expr::Nat),
                _ => None,
            },
            Op::Sub1 => match args[0] {
                Expr::Nat(n) if n > 0 => Some(Expr::Nat(n - 1)),
                _ => None,
            },
            Op::Pair => None,
            Op::Mk | Op::Get | Op::Set | Op::Send | Op::Become => fx.effect(Expr::Prim(op, args)),
        },
        e @ (Expr::LetActor(..) | Expr::Event(_)) => fx.effect(e),
        _ => None,
    }
}

/// State of an expression after [`reduce`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Value,
    Stepped,
    Stuck,
}

fn reduce_args(es: &mut [Expr], fx: &mut dyn Effects) -> Option<Status> {
    for a in es.iter_mut() {
        match reduce(a, fx) {
            Status::Value => {}
            s => return Some(s),
        }
    }
    None
}

fn contract_here(e: &mut Expr, fx: &mut dyn Effects) -> Status {
    let redex = std::mem::take(e);
    match contract(redex.clone(), fx) {
        Some(r) => {
            *e = r;
            Status::Stepped
        }
        None => {
            *e = redex;
            Status::Stuck
        }
    }
}

/// Performs one step in place, following the same left-first order as
/// [`decompose`].
pub fn reduce(e: &mut Expr, fx: &mut dyn Effects) -> Status {
    match e {
        Expr::Var(x) => {
            if fx.is_value_name(x) {
                Status::Value
            } else {
                Status::Stuck
            }
        }
        Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Lambda(..) => Status::Value,
        Expr::Hole => Status::Stuck,
        Expr::Event(_) | Expr::LetActor(..) => contract_here(e, fx),
        Expr::App(f, a) => {
            match reduce(f, fx) {
                Status::Value => {}
                s => return s,
            }
            match reduce(a, fx) {
                Status::Value => contract_here(e, fx),
                s => s,
            }
        }
        Expr::Prim(op, args) => {
            let pair = *op == Op::Pair;
            match reduce_args(args, fx) {
                Some(s) => s,
                None if pair => Status::Value,
                None => contract_here(e, fx),
            }
        }
        Expr::Let(_, a, _) => match reduce(a, fx) {
            Status::Value => contract_here(e, fx),
            s => s,
        },
        Expr::Seq(es) => match reduce(&mut es[0], fx) {
            Status::Value => contract_here(e, fx),
            s => s,
        },
        Expr::If(c, _, _) => match reduce(c, fx) {
            Status::Value => contract_here(e, fx),
            s => s,
        },
    }
}

/// One step by explicit decomposition and plugging. Fresh cells avoid the
/// free variables of the expression.
pub fn step(d: &Description) -> Step {
    let is_cell = |x: &str| d.memory.contains(x);
    match decompose(&d.expr, &is_cell) {
        Decomposition::Value => Step::Done,
        Decomposition::Stuck => Step::Stuck,
        Decomposition::Redex { context, redex } => {
            let mut memory = d.memory.clone();
            let mut store = Store::new(&mut memory, d.expr.free_vars());
            match contract(redex, &mut store) {
                Some(r) => Step::Next(Description {
                    expr: context.plug(&r),
                    memory,
                }),
                None => Step::Stuck,
            }
        }
    }
}

/// Evaluation with a step budget.
pub fn eval(d: &Description, max_steps: usize) -> Outcome {
    run(d.clone(), max_steps, None)
}

/// As [`eval`], also returning every description reached after each step.
pub fn eval_with_trace(d: &Description, max_steps: usize) -> (Outcome, Vec<Description>) {
    let mut trace = Vec::new();
    let out = run(d.clone(), max_steps, Some(&mut trace));
    (out, trace)
}

pub fn eval_expr(e: &Expr, max_steps: usize) -> Outcome {
    eval(&Description::closed(e.clone()), max_steps)
}

fn run(d: Description, max_steps: usize, mut trace: Option<&mut Vec<Description>>) -> Outcome {
    let Description { mut memory, mut expr } = d;
    let reserved = expr.free_vars();
    let mut store = Store::new(&mut memory, reserved);
    let mut steps = 0;
    loop {
        match reduce(&mut expr, &mut store) {
            Status::Value => {
                return Outcome::Value {
                    value: expr,
                    memory: store.memory.clone(),
                }
            }
            Status::Stuck => {
                return Outcome::Stuck(Description {
                    memory: store.memory.clone(),
                    expr,
                })
            }
            Status::Stepped => {
                steps += 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(Description {
                        memory: store.memory.clone(),
                        expr: expr.clone(),
                    });
                }
                if steps >= max_steps {
                    if expr.is_value_with(&|x| store.memory.contains(x)) {
                        return Outcome::Value {
                            value: expr,
                            memory: store.memory.clone(),
                        };
                    }
                    return Outcome::Timeout(steps);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;
    use crate::syntax::parse;

    fn ev(text: &str) -> Outcome {
        eval_expr(&parse(text).unwrap(), 1000)
    }

    #[test]
    fn distinct_allocations_are_not_eq() {
        assert_eq!(ev("(eq (mk nil) (mk nil))").value(), Some(&nil()));
        assert_eq!(ev("(let ((x (mk nil))) (eq x x))").value(), Some(&t()));
    }

    #[test]
    fn self_storing_cell() {
        let mut m = Memory::new();
        m.insert("z", nil());
        let d = Description::new(m, parse("(seq (set z z) (get z))").unwrap());
        match eval(&d, 100) {
            Outcome::Value { value, memory } => {
                assert_eq!(value, var("z"));
                assert_eq!(memory.get("z"), Some(&var("z")));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn partial_primitives() {
        assert!(ev("(get nil)").is_stuck());
        assert!(ev("(set 0 nil)").is_stuck());
        assert!(ev("(sub1 0)").is_stuck());
        assert!(ev("(fst nil)").is_stuck());
        assert!(ev("(app nil nil)").is_stuck());
        assert!(ev("(send nil nil)").is_stuck());
        assert!(ev("x").is_stuck());
    }

    #[test]
    fn delta_rules() {
        assert_eq!(ev("(fst (pair 1 2))").value(), Some(&nat(1)));
        assert_eq!(ev("(snd (pair 1 2))").value(), Some(&nat(2)));
        assert_eq!(ev("(add1 (sub1 5))").value(), Some(&nat(5)));
        assert_eq!(ev("(if 0 t nil)").value(), Some(&t()));
        assert_eq!(ev("(if nil t nil)").value(), Some(&nil()));
        assert_eq!(ev("(nat? 3)").value(), Some(&t()));
        assert_eq!(ev("(cell? (mk 3))").value(), Some(&t()));
        assert_eq!(ev("(cell? 3)").value(), Some(&nil()));
        assert_eq!(ev("(eq (lambda (x) x) (lambda (x) x))").value(), Some(&nil()));
        assert_eq!(ev("(pair (add1 1) nil)").value(), Some(&pair(nat(2), nil())));
    }

    #[test]
    fn counter_closure() {
        let text = "(let ((c (let ((x (mk 0))) (lambda (y) (let ((z (get x))) (seq (set x (add1 z)) z))))))
                      (pair (app c nil) (app c nil)))";
        assert_eq!(ev(text).value(), Some(&pair(nat(0), nat(1))));
    }

    #[test]
    fn divergence_times_out_exactly() {
        let omega = "(app (lambda (x) (app x x)) (lambda (x) (app x x)))";
        assert_eq!(eval_expr(&parse(omega).unwrap(), 100), Outcome::Timeout(100));
    }

    #[test]
    fn traces() {
        let (out, tr) = eval_with_trace(&Description::closed(seq(vec![mk(nil())])), 10);
        assert!(out.is_value());
        assert_eq!(tr.len(), 2);
        let (_, tr) = eval_with_trace(&Description::closed(nil()), 10);
        assert!(tr.is_empty());
        let d0 = Description::closed(parse("(let ((x (mk 1))) (seq (set x 2) (get x)))").unwrap());
        let (_, tr) = eval_with_trace(&d0, 100);
        let mut prev = d0;
        for d in tr {
            assert_eq!(step(&prev), Step::Next(d.clone()));
            prev = d;
        }
        assert_eq!(step(&prev), Step::Done);
    }

    #[test]
    fn fresh_cells_avoid_free_names() {
        let mut m = Memory::new();
        m.insert("z0", nil());
        let d = Description::new(m, mk(var("z0")));
        assert_eq!(eval(&d, 10).value(), Some(&var("z1")));
    }
}
