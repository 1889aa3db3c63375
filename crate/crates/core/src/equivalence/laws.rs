//! Equational laws as data, checked by instantiating their metavariables.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::ParseError;
use crate::memory::canonicalize;
use crate::reducer::{contract, step, Description, Effects, Step, Store};
use crate::sexp::{self, Sexp};
use crate::syntax::{
    alpha_equal, decompose, from_sexp, name_from_sexp, subst1, Context, Decomposition, Expr, Name, Op,
};

use super::config::EnumConfig;
use super::generate::Gen;
use super::library::closure_pool;
use super::oracle::{check, Method};
use super::verdict::{Report, Verdict, Witness};

/// What a metavariable ranges over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetaSort {
    Expr,
    Value,
    Use,
    /// Memory closures `Γ[λx.e]`, starting with the η counterexample.
    Closure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Meta {
    pub name: Name,
    pub sort: MetaSort,
    /// Variables the instances may mention free.
    pub scope: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SideCondition {
    /// Variable not free in the instance of the meta.
    NotFree(Name, Name),
    /// Two names are different.
    Distinct(Name, Name),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Holds,
    Fails,
}

/// Extra requirement on the witness of an expected failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessShape {
    Any,
    /// The use applies the function under test at least twice.
    AppliesTwice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LawKind {
    /// `lhs ≅ rhs` for all instances. In templates `(R e)` plugs a use meta
    /// and `(subst e x v)` substitutes.
    Schema { lhs: Expr, rhs: Expr },
    /// Reduction contexts with a common reduct on a fresh variable agree on
    /// every expression.
    CommonReduct,
    /// `Γ; e ↦ Γ'; e'` implies `Γ[e] ≅ Γ'[e']`.
    ReductionPreserves,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Law {
    pub name: String,
    pub kind: LawKind,
    pub metas: Vec<Meta>,
    pub side: Vec<SideCondition>,
    pub oracle: Method,
    pub expected: Expected,
    pub shape: WitnessShape,
    pub first_order: bool,
}

/// Aggregate over all instances of a law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub name: String,
    pub verdict: Verdict,
    pub expected: Expected,
    pub instances: usize,
    /// Generated instances rejected by side conditions or premises.
    pub skipped: usize,
    pub cases: usize,
    pub definite: usize,
    pub timeouts: usize,
    /// Index of the failing instance, if any.
    pub failing_instance: Option<usize>,
    pub shape_ok: bool,
}

/// Share of definite cases above which a law without failures holds.
pub const LAW_DEFINITE_RATIO: f64 = 0.95;

impl LawReport {
    pub fn definite_ratio(&self) -> f64 {
        if self.cases == 0 {
            1.0
        } else {
            self.definite as f64 / self.cases as f64
        }
    }

    /// The verdict is the expected one, with the expected witness shape.
    pub fn as_expected(&self) -> bool {
        match self.expected {
            Expected::Holds => self.verdict.is_holds(),
            Expected::Fails => self.verdict.is_fails() && self.shape_ok,
        }
    }

    pub fn counts_line(&self) -> String {
        format!(
            "law {} instances {} skipped {} cases {} definite {} timeouts {} expected {} {}",
            self.name,
            self.instances,
            self.skipped,
            self.cases,
            self.definite,
            self.timeouts,
            match self.expected {
                Expected::Holds => "holds",
                Expected::Fails => "fails",
            },
            if self.as_expected() { "ok" } else { "mismatch" }
        )
    }
}

const SUBST: &str = "subst";

fn is_use_meta(metas: &[Meta], x: &str) -> bool {
    metas.iter().any(|m| m.name == x && m.sort == MetaSort::Use)
}

/// Reads a template, rewriting `(R e)` and `(subst e x v)`.
fn template(s: &Sexp, metas: &[Meta]) -> Result<Expr, ParseError> {
    from_sexp(&rewrite(s, metas))
}

fn rewrite(s: &Sexp, metas: &[Meta]) -> Sexp {
    match s {
        Sexp::Atom(..) => s.clone(),
        Sexp::List(items, pos) => {
            let items: Vec<Sexp> = items.iter().map(|i| rewrite(i, metas)).collect();
            let app = |f: Sexp, a: Sexp| Sexp::List(vec![Sexp::Atom("app".into(), *pos), f, a], *pos);
            match items.first().and_then(Sexp::as_atom) {
                Some(h) if h == SUBST && items.len() == 4 => {
                    let mut it = items.into_iter();
                    let f = it.next().unwrap();
                    let e = it.next().unwrap();
                    let x = it.next().unwrap();
                    let v = it.next().unwrap();
                    app(app(app(f, e), x), v)
                }
                Some(h) if is_use_meta(metas, h) && items.len() == 2 => {
                    let mut it = items.into_iter();
                    let r = it.next().unwrap();
                    app(r, it.next().unwrap())
                }
                _ => Sexp::List(items, *pos),
            }
        }
    }
}

/// One choice for every metavariable.
#[derive(Clone, Debug)]
struct Binding {
    exprs: Vec<(Name, Expr)>,
    uses: Vec<(Name, Context)>,
}

impl Binding {
    fn expr(&self, x: &str) -> Option<&Expr> {
        self.exprs.iter().find(|(n, _)| n == x).map(|(_, e)| e)
    }

    fn use_ctx(&self, x: &str) -> Option<&Context> {
        self.uses.iter().find(|(n, _)| n == x).map(|(_, c)| c)
    }

    fn free_in(&self, meta: &str) -> BTreeSet<Name> {
        match (self.expr(meta), self.use_ctx(meta)) {
            (Some(e), _) => e.free_vars(),
            (_, Some(c)) => c.term().free_vars(),
            _ => BTreeSet::new(),
        }
    }
}

fn instantiate(t: &Expr, b: &Binding) -> Expr {
    match t {
        Expr::Var(x) => b.expr(x).cloned().unwrap_or_else(|| t.clone()),
        Expr::App(f, a) => {
            if let Expr::Var(r) = &**f {
                if let Some(c) = b.use_ctx(r) {
                    return c.plug(&instantiate(a, b));
                }
            }
            if let Expr::App(f2, x) = &**f {
                if let (Expr::App(f3, e), Expr::Var(x)) = (&**f2, &**x) {
                    if matches!(&**f3, Expr::Var(s) if s == SUBST) {
                        return subst1(&instantiate(e, b), x, &instantiate(a, b));
                    }
                }
            }
            Expr::App(Box::new(instantiate(f, b)), Box::new(instantiate(a, b)))
        }
        Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) | Expr::Hole => t.clone(),
        Expr::Lambda(x, body) => Expr::Lambda(x.clone(), Box::new(instantiate(body, b))),
        Expr::Let(x, e, body) => Expr::Let(x.clone(), Box::new(instantiate(e, b)), Box::new(instantiate(body, b))),
        Expr::LetActor(x, e, body) => {
            Expr::LetActor(x.clone(), Box::new(instantiate(e, b)), Box::new(instantiate(body, b)))
        }
        Expr::If(c, x, y) => Expr::If(
            Box::new(instantiate(c, b)),
            Box::new(instantiate(x, b)),
            Box::new(instantiate(y, b)),
        ),
        Expr::Seq(es) => Expr::Seq(es.iter().map(|e| instantiate(e, b)).collect()),
        Expr::Prim(op, es) => Expr::Prim(*op, es.iter().map(|e| instantiate(e, b)).collect()),
    }
}

fn side_ok(side: &[SideCondition], b: &Binding) -> bool {
    side.iter().all(|c| match c {
        SideCondition::NotFree(x, m) => !b.free_in(m).contains(x),
        SideCondition::Distinct(a, c) => a != c,
    })
}

fn mix(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ i.wrapping_mul(0xD1B5_4A32_D192_ED03).rotate_left(17)
}

/// Instance `i` as a pair of expressions, or `None` if rejected.
type Instance = Option<(Expr, Expr)>;

impl Law {
    fn has_metas(&self) -> bool {
        !self.metas.is_empty()
    }

    /// Only closure metas: the pool is enumerated, each entry with the full
    /// case budget.
    fn closures_only(&self) -> bool {
        self.has_metas() && self.metas.iter().all(|m| m.sort == MetaSort::Closure)
    }

    fn draw(&self, gen: &mut Gen, i: usize) -> Binding {
        let pool = closure_pool();
        let mut b = Binding {
            exprs: Vec::new(),
            uses: Vec::new(),
        };
        for m in &self.metas {
            match m.sort {
                MetaSort::Expr => b.exprs.push((m.name.clone(), gen.expr(3, &m.scope))),
                MetaSort::Value => b.exprs.push((m.name.clone(), gen.value(2, &m.scope))),
                MetaSort::Use => b.uses.push((m.name.clone(), gen.reduction_context(2, &m.scope))),
                MetaSort::Closure => b.exprs.push((m.name.clone(), pool[i % pool.len()].clone())),
            }
        }
        b
    }

    fn instance(&self, gen: &mut Gen, i: usize) -> Instance {
        let LawKind::Schema { lhs, rhs } = &self.kind else {
            return None;
        };
        let b = self.draw(gen, i);
        if !side_ok(&self.side, &b) {
            return None;
        }
        Some((instantiate(lhs, &b), instantiate(rhs, &b)))
    }

    /// Checks `instances` instances (one if the law has no metavariables).
    pub fn check(&self, cfg: &EnumConfig, instances: usize) -> LawReport {
        let mut cfg = cfg.clone();
        if self.first_order {
            cfg.first_order = true;
        }
        let mut gen = Gen::new(mix(cfg.seed, 0x1a77));
        let (pairs, skipped) = match &self.kind {
            LawKind::Schema { .. } => {
                let n = if self.closures_only() {
                    closure_pool().len()
                } else if self.has_metas() {
                    instances
                } else {
                    1
                };
                let mut pairs = Vec::with_capacity(n);
                let mut skipped = 0;
                let mut i = 0;
                while pairs.len() < n && i < n * 20 {
                    match self.instance(&mut gen, i) {
                        Some(p) => pairs.push(p),
                        None => skipped += 1,
                    }
                    i += 1;
                }
                (pairs, skipped)
            }
            LawKind::CommonReduct => common_reduct_instances(&mut gen, instances),
            LawKind::ReductionPreserves => reduction_instances(&mut gen, instances, cfg.max_cells),
        };
        let single = matches!(self.kind, LawKind::Schema { .. }) && (!self.has_metas() || self.closures_only());
        let reports: Vec<(usize, Report)> = {
            let mut out = Vec::new();
            for (ci, chunk) in pairs.chunks(32).enumerate() {
                let rs: Vec<(usize, Report)> = chunk
                    .par_iter()
                    .enumerate()
                    .map(|(j, (l, r))| {
                        let idx = ci * 32 + j;
                        let mut c = cfg.clone();
                        if !single {
                            c.max_cases = cfg.instance_cases;
                            c.seed = mix(cfg.seed, idx as u64 + 1);
                        }
                        (idx, check(l, r, &c, self.oracle))
                    })
                    .collect();
                let failed = rs.iter().any(|(_, r)| r.verdict.is_fails());
                out.extend(rs);
                if failed {
                    break;
                }
            }
            out
        };
        let mut report = LawReport {
            name: self.name.clone(),
            verdict: Verdict::Holds,
            expected: self.expected,
            instances: 0,
            skipped,
            cases: 0,
            definite: 0,
            timeouts: 0,
            failing_instance: None,
            shape_ok: true,
        };
        for (idx, r) in reports {
            report.instances += 1;
            report.cases += r.cases;
            report.definite += r.definite;
            report.timeouts += r.timeouts;
            if let Verdict::Fails(w) = r.verdict {
                report.shape_ok = match self.shape {
                    WitnessShape::Any => true,
                    WitnessShape::AppliesTwice => applies_twice(&w),
                };
                report.failing_instance = Some(idx);
                report.verdict = Verdict::Fails(w);
                return report;
            }
        }
        if report.instances == 0 {
            report.verdict = Verdict::Unknown("no admissible instances".into());
        } else if report.timeouts > 0 && report.definite_ratio() < LAW_DEFINITE_RATIO {
            report.verdict = Verdict::Unknown(format!(
                "{} of {} cases timed out at max-steps {}",
                report.timeouts, report.cases, cfg.max_steps
            ));
        }
        report
    }
}

/// True if the witness use binds the tested value and applies it at least
/// twice.
pub fn applies_twice(w: &Witness) -> bool {
    fn count_apps(e: &Expr, f: &str) -> usize {
        let here = usize::from(matches!(e, Expr::App(g, _) if matches!(&**g, Expr::Var(x) if x == f)));
        here + match e {
            Expr::Lambda(x, _) if x == f => 0,
            Expr::Lambda(_, b) => count_apps(b, f),
            Expr::Let(x, a, b) => count_apps(a, f) + if x == f { 0 } else { count_apps(b, f) },
            Expr::App(a, b) => count_apps(a, f) + count_apps(b, f),
            Expr::If(c, a, b) => count_apps(c, f) + count_apps(a, f) + count_apps(b, f),
            Expr::Seq(es) | Expr::Prim(_, es) => es.iter().map(|e| count_apps(e, f)).sum(),
            _ => 0,
        }
    }
    fn walk(e: &Expr) -> bool {
        match e {
            Expr::Let(x, a, b) if a.hole_count() == 1 => count_apps(b, x) >= 2 || walk(a),
            Expr::Let(_, a, b) | Expr::App(a, b) => walk(a) || walk(b),
            Expr::If(c, a, b) => walk(c) || walk(a) || walk(b),
            Expr::Seq(es) | Expr::Prim(_, es) => es.iter().any(walk),
            _ => false,
        }
    }
    walk(w.context.term())
}

/// Reduction contexts, some with a common reduct on a fresh variable.
pub fn reduct_pairs() -> Vec<(Context, Context)> {
    use crate::syntax::build::*;
    use crate::syntax::ContextSort::Reduction;
    let c = |e: Expr| Context::new(e, Reduction);
    vec![
        (c(app(lam("y", var("y")), hole())), c(hole())),
        (c(let_("y", hole(), var("y"))), c(hole())),
        (c(let_("y", hole(), pair(var("y"), var("y")))), c(app(lam("y", pair(var("y"), var("y"))), hole()))),
        (c(let_("y", hole(), mk(var("y")))), c(mk(hole()))),
        (c(seq(vec![hole(), nil()])), c(let_("y", hole(), nil()))),
        (c(app(lam("y", if_(var("y"), nat(1), nat(2))), hole())), c(if_(hole(), nat(1), nat(2)))),
        (c(app(lam("y", seq(vec![var("y"), t()])), hole())), c(seq(vec![hole(), t()]))),
        (c(let_("y", hole(), get(var("y")))), c(get(hole()))),
        (c(eq(hole(), nat(0))), c(eq(nat(0), hole()))),
        (c(add1(hole())), c(sub1(hole()))),
    ]
}

/// Fresh variable standing for an arbitrary value.
const OPEN: &str = "w'";

struct Symbolic<'a> {
    store: Store<'a>,
}

impl Effects for Symbolic<'_> {
    fn is_value_name(&self, x: &str) -> bool {
        x == OPEN || self.store.is_value_name(x)
    }

    fn is_cell(&self, x: &str) -> bool {
        self.store.is_cell(x)
    }

    fn effect(&mut self, redex: Expr) -> Option<Expr> {
        self.store.effect(redex)
    }
}

/// A redex that inspects the unknown value cannot be contracted.
fn blocked(redex: &Expr) -> bool {
    let open = |e: &Expr| matches!(e, Expr::Var(x) if x == OPEN);
    match redex {
        Expr::App(f, _) => open(f),
        Expr::If(c, _, _) => open(c),
        Expr::Prim(op, args) => !matches!(op, Op::Mk | Op::Pair) && args.iter().any(|a| open(a) || a.has_free(OPEN) && *op == Op::Eq),
        _ => false,
    }
}

fn symbolic_trace(e: Expr, limit: usize) -> Vec<(crate::memory::Memory, Expr)> {
    let mut memory = crate::memory::Memory::new();
    let mut expr = e;
    let mut out = vec![(memory.clone(), expr.clone())];
    for _ in 0..limit {
        let isv = |x: &str| x == OPEN || memory.contains(x);
        let Decomposition::Redex { context, redex } = decompose(&expr, &isv) else {
            break;
        };
        if blocked(&redex) {
            break;
        }
        let mut fx = Symbolic {
            store: Store::new(&mut memory, BTreeSet::from([OPEN.to_string()])),
        };
        match contract(redex, &mut fx) {
            Some(r) => expr = context.plug(&r),
            None => break,
        }
        out.push((memory.clone(), expr.clone()));
    }
    out
}

/// `R0[w]` and `R1[w]` reach a common description for a fresh `w`.
pub fn have_common_reduct(r0: &Context, r1: &Context) -> bool {
    let open = Expr::Var(OPEN.into());
    let t0 = symbolic_trace(r0.plug(&open), 50);
    let t1 = symbolic_trace(r1.plug(&open), 50);
    t0.iter().any(|(m0, e0)| {
        t1.iter()
            .any(|(m1, e1)| alpha_equal(e0, e1) && crate::memory::alpha_equal_memory(m0, m1))
    })
}

fn common_reduct_instances(gen: &mut Gen, n: usize) -> (Vec<(Expr, Expr)>, usize) {
    let pairs: Vec<(Context, Context)> = reduct_pairs().into_iter().filter(|(a, b)| have_common_reduct(a, b)).collect();
    let skipped = reduct_pairs().len() - pairs.len();
    let scope = vec!["u".to_string()];
    let out = (0..n)
        .map(|i| {
            let (r0, r1) = &pairs[i % pairs.len()];
            let e = gen.expr(3, &scope);
            (r0.plug(&e), r1.plug(&e))
        })
        .collect();
    (out, skipped)
}

fn reduction_instances(gen: &mut Gen, n: usize, max_cells: usize) -> (Vec<(Expr, Expr)>, usize) {
    let mut out = Vec::with_capacity(n);
    let mut skipped = 0;
    while out.len() < n && skipped < n * 50 {
        let d = gen.closed_description(max_cells, 4);
        match step(&d) {
            Step::Next(d2) => out.push((as_program(&d), as_program(&d2))),
            _ => skipped += 1,
        }
    }
    (out, skipped)
}

/// `Γ[e]`.
pub fn as_program(d: &Description) -> Expr {
    canonicalize(&d.memory).plug(&d.expr)
}

fn schema(name: &str, text: &str) -> Law {
    let mut law = parse_law(text).unwrap_or_else(|e| panic!("built-in law {name}: {e}"));
    law.name = name.to_string();
    law
}

fn builtin(name: &str, kind: LawKind) -> Law {
    Law {
        name: name.into(),
        kind,
        metas: vec![Meta {
            name: "e".into(),
            sort: MetaSort::Expr,
            scope: vec![],
        }],
        side: vec![],
        oracle: Method::Ciu,
        expected: Expected::Holds,
        shape: WitnessShape::Any,
        first_order: false,
    }
}

/// The built-in catalog, in a fixed order.
pub fn catalog() -> Vec<Law> {
    vec![
        schema(
            "eq-reflexive",
            "(law eq-reflexive (lhs (eq x x)) (rhs t) (oracle strong-iso) (expected holds) (first-order))",
        ),
        schema(
            "set-absorption",
            "(law set-absorption (lhs (seq (set x v) (set x w))) (rhs (set x w)) (oracle strong-iso) (expected holds))",
        ),
        schema(
            "mk-garbage",
            "(law mk-garbage (lhs (seq (mk x) (mk u))) (rhs (mk u)) (oracle strong-iso) (expected holds))",
        ),
        schema(
            "mk-let-fusion",
            "(law mk-let-fusion (metas (e expr z w x)) (side (distinct z w))
               (lhs (let ((z (mk x))) (seq (set z w) e))) (rhs (let ((z (mk w))) e))
               (oracle strong-iso) (expected holds))",
        ),
        schema(
            "moggi-i",
            "(law moggi-i (metas (e expr x y) (v value y))
               (lhs (app (lambda (x) e) v)) (rhs (subst e x v)) (oracle ciu) (expected holds))",
        ),
        schema(
            "moggi-ii",
            "(law moggi-ii (metas (R use y) (e expr y)) (side (not-free x R))
               (lhs (R e)) (rhs (let ((x e)) (R x))) (oracle ciu) (expected holds))",
        ),
        schema(
            "moggi-iii",
            "(law moggi-iii (metas (R use y) (e0 expr y) (e1 expr x y)) (side (not-free x R))
               (lhs (R (let ((x e0)) e1))) (rhs (let ((x e0)) (R e1))) (oracle ciu) (expected holds))",
        ),
        schema(
            "eta-general",
            "(law eta-general (metas (f closure))
               (lhs (lambda (x) (app f x))) (rhs f) (oracle ciu) (expected fails apply-twice))",
        ),
        schema(
            "subst-into-equals",
            "(law subst-into-equals (lhs (subst (eq x x) x (mk x))) (rhs t) (oracle ciu) (expected fails))",
        ),
        builtin("common-lambda-reduct", LawKind::CommonReduct),
        builtin("reduction-preserves", LawKind::ReductionPreserves),
    ]
}

pub fn find_law(name: &str) -> Option<Law> {
    catalog().into_iter().find(|l| l.name == name)
}

/// `law_check` with the default instance count used by the CLI.
pub fn law_check(law: &Law, cfg: &EnumConfig, instances: usize) -> LawReport {
    law.check(cfg, instances)
}

/// Reads one `(law NAME ...)` form.
pub fn parse_law(text: &str) -> Result<Law, ParseError> {
    law_from_sexp(&sexp::read_one(text)?)
}

/// Reads every `(law ...)` form in a file.
pub fn parse_laws(text: &str) -> Result<Vec<Law>, ParseError> {
    sexp::read_all(text)?.iter().map(law_from_sexp).collect()
}

pub fn law_from_sexp(s: &Sexp) -> Result<Law, ParseError> {
    let err = |p: &Sexp, m: &str| ParseError::at(p.pos(), m.to_string());
    let items = match s {
        Sexp::List(items, _) if s.head() == Some("law") && items.len() >= 2 => items,
        _ => return Err(err(s, "expected (law NAME clause ...)")),
    };
    let name = items[1]
        .as_atom()
        .ok_or_else(|| err(&items[1], "law name must be a symbol"))?
        .to_string();
    let mut metas = Vec::new();
    let mut side = Vec::new();
    let mut lhs = None;
    let mut rhs = None;
    let mut oracle = Method::Ciu;
    let mut expected = Expected::Holds;
    let mut shape = WitnessShape::Any;
    let mut first_order = false;
    // metas first, since templates depend on them
    for c in &items[2..] {
        if c.head() == Some("metas") {
            for m in &c.as_list().unwrap()[1..] {
                let parts = m
                    .as_list()
                    .filter(|p| p.len() >= 2)
                    .ok_or_else(|| err(m, "expected (name sort var ...)"))?;
                let sort = match parts[1].as_atom() {
                    Some("expr") => MetaSort::Expr,
                    Some("value") => MetaSort::Value,
                    Some("use") => MetaSort::Use,
                    Some("closure") => MetaSort::Closure,
                    _ => return Err(err(&parts[1], "sort must be expr, value, use or closure")),
                };
                let name = name_from_sexp(&parts[0])?;
                if name == SUBST {
                    return Err(err(&parts[0], "`subst` cannot name a metavariable"));
                }
                metas.push(Meta {
                    name,
                    sort,
                    scope: parts[2..].iter().map(name_from_sexp).collect::<Result<_, _>>()?,
                });
            }
        }
    }
    for c in &items[2..] {
        let parts = c.as_list().ok_or_else(|| err(c, "expected a clause"))?;
        match c.head() {
            Some("metas") => {}
            Some("side") => {
                for sc in &parts[1..] {
                    let p = sc.as_list().filter(|p| p.len() == 3).ok_or_else(|| err(sc, "bad side condition"))?;
                    let a = name_from_sexp(&p[1])?;
                    let b = name_from_sexp(&p[2])?;
                    side.push(match p[0].as_atom() {
                        Some("not-free") => SideCondition::NotFree(a, b),
                        Some("distinct") => SideCondition::Distinct(a, b),
                        _ => return Err(err(&p[0], "side condition must be not-free or distinct")),
                    });
                }
            }
            Some("lhs") if parts.len() == 2 => lhs = Some(template(&parts[1], &metas)?),
            Some("rhs") if parts.len() == 2 => rhs = Some(template(&parts[1], &metas)?),
            Some("oracle") if parts.len() == 2 => {
                oracle = parts[1]
                    .as_atom()
                    .and_then(Method::from_name)
                    .ok_or_else(|| err(&parts[1], "oracle must be strong-iso or ciu"))?;
            }
            Some("expected") if parts.len() >= 2 => {
                expected = match parts[1].as_atom() {
                    Some("holds") => Expected::Holds,
                    Some("fails") => Expected::Fails,
                    _ => return Err(err(&parts[1], "expected must be holds or fails")),
                };
                if let Some(s) = parts.get(2) {
                    shape = match s.as_atom() {
                        Some("apply-twice") => WitnessShape::AppliesTwice,
                        _ => return Err(err(s, "unknown witness shape")),
                    };
                }
            }
            Some("first-order") => first_order = true,
            _ => return Err(err(c, "unknown law clause")),
        }
    }
    let lhs = lhs.ok_or_else(|| err(s, "law needs (lhs ...)"))?;
    let rhs = rhs.ok_or_else(|| err(s, "law needs (rhs ...)"))?;
    Ok(Law {
        name,
        kind: LawKind::Schema { lhs, rhs },
        metas,
        side,
        oracle,
        expected,
        shape,
        first_order,
    })
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LawKind::Schema { lhs, rhs } => write!(f, "{}: {} ~ {}", self.name, lhs, rhs),
            LawKind::CommonReduct => write!(f, "{}: R0[e] ~ R1[e] when R0[w], R1[w] share a reduct", self.name),
            LawKind::ReductionPreserves => write!(f, "{}: G[e] ~ G'[e'] when G;e steps to G';e'", self.name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;

    #[test]
    fn templates_plug_and_substitute() {
        let law = find_law("moggi-ii").unwrap();
        let LawKind::Schema { lhs, rhs } = &law.kind else { panic!() };
        let b = Binding {
            exprs: vec![("e".into(), mk(nil()))],
            uses: vec![("R".into(), Context::new(get(hole()), crate::syntax::ContextSort::Reduction))],
        };
        assert_eq!(instantiate(lhs, &b), get(mk(nil())));
        assert_eq!(instantiate(rhs, &b), let_("x", mk(nil()), get(var("x"))));
        let law = find_law("subst-into-equals").unwrap();
        let LawKind::Schema { lhs, .. } = &law.kind else { panic!() };
        let b = Binding { exprs: vec![], uses: vec![] };
        assert_eq!(instantiate(lhs, &b), eq(mk(var("x")), mk(var("x"))));
    }

    #[test]
    fn common_reducts() {
        let pairs = reduct_pairs();
        let found: Vec<bool> = pairs.iter().map(|(a, b)| have_common_reduct(a, b)).collect();
        assert_eq!(&found[..8], &[true; 8]);
        assert!(!found[8] && !found[9]);
    }

    #[test]
    fn law_files_parse() {
        let laws = parse_laws(
            "; two laws\n(law a (lhs (eq x x)) (rhs t) (oracle strong-iso))\n(law b (metas (e expr)) (lhs e) (rhs (seq nil e)))",
        )
        .unwrap();
        assert_eq!(laws.len(), 2);
        assert!(parse_law("(law c (lhs x))").is_err());
        assert!(parse_law("(law c (lhs x) (rhs x) (oracle magic))").is_err());
    }
}
