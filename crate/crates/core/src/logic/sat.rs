use std::fmt;

use rayon::prelude::*;

use crate::equivalence::enumerate::{model_values, Uses};
use crate::equivalence::EnumConfig;
use crate::memory::{equal_mod_garbage, Memory};
use crate::reducer::{eval, reduce, Description, Effects, Outcome, Status, Store};
use crate::syntax::build::*;
use crate::syntax::{substitute, Context, Expr, Name, Op, Substitution};

use super::formula::{cell_of, Class, ClassTable, Formula, LogicError};

/// Strong Kleene truth value of a bounded check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Truth {
    Holds,
    /// With a description of the falsifying instance.
    Fails(String),
    Unknown(String),
}

impl Truth {
    pub fn is_holds(&self) -> bool {
        matches!(self, Truth::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Truth::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Truth::Unknown(_))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Truth::Holds => "HOLDS",
            Truth::Fails(_) => "FAILS",
            Truth::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Truth::Holds => 0,
            Truth::Fails(_) => 1,
            Truth::Unknown(_) => 2,
        }
    }

    pub fn negate(self) -> Truth {
        match self {
            Truth::Holds => Truth::Fails("negated formula holds".into()),
            Truth::Fails(_) => Truth::Holds,
            u => u,
        }
    }

    fn context(self, what: impl FnOnce() -> String) -> Truth {
        match self {
            Truth::Fails(r) => Truth::Fails(format!("{}: {r}", what())),
            Truth::Unknown(r) => Truth::Unknown(format!("{}: {r}", what())),
            h => h,
        }
    }

    /// Conjunction of verdicts in order: the first failure wins, then the
    /// first unknown.
    pub fn all(items: impl IntoIterator<Item = Truth>) -> Truth {
        let mut unknown = None;
        for t in items {
            match t {
                Truth::Fails(_) => return t,
                Truth::Unknown(_) if unknown.is_none() => unknown = Some(t),
                _ => {}
            }
        }
        unknown.unwrap_or(Truth::Holds)
    }

    /// Disjunction: any holds wins, then unknown.
    pub fn any(items: impl IntoIterator<Item = Truth>) -> Truth {
        let mut unknown = None;
        let mut last = None;
        for t in items {
            match t {
                Truth::Holds => return t,
                Truth::Unknown(_) if unknown.is_none() => unknown = Some(t),
                Truth::Fails(_) => last = Some(t),
                _ => {}
            }
        }
        unknown.or(last).unwrap_or_else(|| Truth::Fails("empty disjunction".into()))
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truth::Holds => f.write_str("HOLDS"),
            Truth::Fails(r) => write!(f, "FAILS {r}"),
            Truth::Unknown(r) => write!(f, "UNKNOWN {r}"),
        }
    }
}

/// Stands in for the hole of a contextual assertion.
const HOLE_MARK: &str = "%hole";

/// Memory effects, plus a stop at the marked hole recording the values of
/// the variables bound on the path.
struct HoleWatch<'a> {
    store: Store<'a>,
    reached: Option<(Expr, Memory)>,
}

impl Effects for HoleWatch<'_> {
    fn is_value_name(&self, x: &str) -> bool {
        x == HOLE_MARK || self.store.is_value_name(x)
    }

    fn is_cell(&self, x: &str) -> bool {
        self.store.is_cell(x)
    }

    fn effect(&mut self, redex: Expr) -> Option<Expr> {
        match redex {
            Expr::Prim(Op::Send, args) if matches!(&args[0], Expr::Var(x) if x == HOLE_MARK) => {
                let payload = args.into_iter().nth(1).unwrap();
                self.reached = Some((payload, self.store.memory.clone()));
                None
            }
            r => self.store.effect(r),
        }
    }
}

pub(crate) enum Reach {
    /// Memory at the hole and the values of the path binders.
    At(Memory, Vec<(Name, Expr)>),
    Vacuous,
    Timeout,
}

/// Runs `m; U[marker]` until control reaches the hole.
pub(crate) fn reach_hole(m: &Memory, u: &Context, max_steps: usize) -> Reach {
    let mut binders: Vec<Name> = Vec::new();
    for x in u.binders_on_path().into_iter().rev() {
        if !binders.contains(&x) {
            binders.push(x);
        }
    }
    binders.reverse();
    let payload = binders
        .iter()
        .rev()
        .fold(nil(), |acc, x| pair(var(x), acc));
    let mut expr = u.plug(&prim(Op::Send, vec![var(HOLE_MARK), payload]));
    let mut memory = m.clone();
    let reserved = expr.free_vars();
    let mut fx = HoleWatch {
        store: Store::new(&mut memory, reserved),
        reached: None,
    };
    for _ in 0..=max_steps {
        match reduce(&mut expr, &mut fx) {
            Status::Stepped => {}
            Status::Value => return Reach::Vacuous,
            Status::Stuck => {
                return match fx.reached.take() {
                    Some((mut p, mem)) => {
                        let mut vals = Vec::new();
                        for x in &binders {
                            let Expr::Prim(Op::Pair, mut parts) = p else { unreachable!() };
                            p = parts.pop().unwrap();
                            vals.push((x.clone(), parts.pop().unwrap()));
                        }
                        Reach::At(mem, vals)
                    }
                    None => Reach::Vacuous,
                }
            }
        }
    }
    Reach::Timeout
}

/// Bounded satisfaction `Γ ⊨ Φ[σ]`.
pub struct Checker<'a> {
    pub cfg: &'a EnumConfig,
    pub table: &'a ClassTable,
}

/// The logic-variable environment: a value substitution and class bindings.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub subst: Substitution,
    classes: Vec<(Name, Class)>,
}

impl Env {
    pub fn new(subst: Substitution) -> Self {
        Env {
            subst,
            classes: Vec::new(),
        }
    }

    fn bind(&self, x: &str, v: Expr) -> Env {
        let mut e = self.clone();
        e.subst.insert(x, v);
        e
    }

    fn bind_class(&self, x: &str, k: Class) -> Env {
        let mut e = self.clone();
        e.classes.push((x.into(), k));
        e
    }

    fn class(&self, x: &str) -> Option<&Class> {
        self.classes.iter().rev().find(|(n, _)| n == x).map(|(_, k)| k)
    }
}

fn definedness(o: &Outcome) -> Option<bool> {
    match o {
        Outcome::Value { .. } => Some(true),
        Outcome::Stuck(_) => Some(false),
        Outcome::Timeout(_) => None,
    }
}

/// Evaluation of a closed expression had no visible effect on `m`.
fn effect_free(m: &Memory, v: &Expr, after: &Memory) -> bool {
    equal_mod_garbage(after, v, m, v, &m.domain())
}

impl<'a> Checker<'a> {
    pub fn new(cfg: &'a EnumConfig, table: &'a ClassTable) -> Self {
        Checker { cfg, table }
    }

    /// The class pool for `forall-class`.
    pub fn class_pool(&self) -> Vec<Class> {
        let mut pool = vec![
            Class::Val,
            Class::Nat,
            Class::Nil,
            Class::Cell,
            cell_of(Class::Nat),
            cell_of(Class::Nil),
        ];
        pool.extend(self.table.classes().cloned());
        pool
    }

    fn close(&self, m: &Memory, e: &Expr, env: &Env) -> Result<Expr, Truth> {
        let a = substitute(e, &env.subst);
        match a.free_vars().into_iter().find(|x| !m.contains(x)) {
            Some(x) => Err(Truth::Unknown(format!("variable {x} is not bound"))),
            None => Ok(a),
        }
    }

    fn run(&self, m: &Memory, e: Expr) -> Outcome {
        eval(&Description::new(m.clone(), e), self.cfg.max_steps)
    }

    pub fn sat(&self, m: &Memory, phi: &Formula, env: &Env) -> Truth {
        match phi {
            Formula::Equiv(e0, e1) => match (self.close(m, e0, env), self.close(m, e1, env)) {
                (Ok(a0), Ok(a1)) => self.equiv_atom(m, &a0, &a1),
                (Err(t), _) | (_, Err(t)) => t,
            },
            Formula::Member(e, k) => match self.close(m, e, env) {
                Ok(a) => self.member_expr(m, &a, k, env),
                Err(t) => t,
            },
            Formula::Not(p) => self.sat(m, p, env).negate(),
            Formula::And(ps) => {
                let mut unknown = None;
                for p in ps {
                    match self.sat(m, p, env) {
                        f @ Truth::Fails(_) => return f,
                        u @ Truth::Unknown(_) if unknown.is_none() => unknown = Some(u),
                        _ => {}
                    }
                }
                unknown.unwrap_or(Truth::Holds)
            }
            Formula::Or(ps) => Truth::any(ps.iter().map(|p| self.sat(m, p, env))),
            Formula::Implies(p, q) => match self.sat(m, p, env) {
                Truth::Fails(_) => Truth::Holds,
                Truth::Holds => self.sat(m, q, env),
                u => match self.sat(m, q, env) {
                    Truth::Holds => Truth::Holds,
                    _ => u,
                },
            },
            Formula::Forall(x, p) => self.forall_values(m, x, p, env),
            Formula::Exists(x, p) => {
                let vals = model_values(self.cfg, m);
                Truth::any(vals.into_iter().map(|v| self.sat(m, p, &env.bind(x, v))))
                    .context(|| format!("exists {x}"))
            }
            Formula::ForallClass(x, p) => Truth::all(self.class_pool().into_iter().map(|k| {
                let label = k.to_string();
                self.sat(m, p, &env.bind_class(x, k))
                    .context(|| format!("{x} = {label}"))
            })),
            Formula::Ctx(u, p) => {
                let u = u.substitute(&env.subst);
                match reach_hole(m, &u, self.cfg.max_steps) {
                    Reach::Vacuous => Truth::Holds,
                    Reach::Timeout => Truth::Unknown(format!(
                        "context {u} timed out at max-steps {}",
                        self.cfg.max_steps
                    )),
                    Reach::At(mem, vals) => {
                        let mut inner = env.clone();
                        for (x, v) in vals {
                            inner.subst.insert(x, v);
                        }
                        self.sat(&mem, p, &inner).context(|| format!("at the hole of {u} in {mem}"))
                    }
                }
            }
        }
    }

    /// Universal quantification over the values of the model, checked in
    /// parallel chunks; the first failure in enumeration order wins.
    fn forall_values(&self, m: &Memory, x: &str, p: &Formula, env: &Env) -> Truth {
        let vals = model_values(self.cfg, m);
        let chunk = rayon::current_num_threads().max(1);
        let mut unknown = None;
        for part in vals.chunks(chunk) {
            let results: Vec<Truth> = part
                .par_iter()
                .map(|v| {
                    self.sat(m, p, &env.bind(x, v.clone()))
                        .context(|| format!("{x} = {v}"))
                })
                .collect();
            for t in results {
                match t {
                    Truth::Fails(_) => return t,
                    Truth::Unknown(_) if unknown.is_none() => unknown = Some(t),
                    _ => {}
                }
            }
        }
        unknown.unwrap_or(Truth::Holds)
    }

    /// `a0 ≅ a1` in `m`: evaluation comparison, then a shallow CIU search for
    /// a separating use when the values differ.
    pub fn equiv_atom(&self, m: &Memory, a0: &Expr, a1: &Expr) -> Truth {
        let o0 = self.run(m, a0.clone());
        let o1 = self.run(m, a1.clone());
        match (&o0, &o1) {
            (Outcome::Timeout(_), _) | (_, Outcome::Timeout(_)) => {
                return Truth::Unknown(format!("{a0} ~ {a1} timed out at max-steps {}", self.cfg.max_steps))
            }
            (Outcome::Stuck(_), Outcome::Stuck(_)) => return Truth::Holds,
            (Outcome::Stuck(_), _) | (_, Outcome::Stuck(_)) => {
                return Truth::Fails(format!("{a0} ~ {a1}: outcomes {o0} and {o1}"))
            }
            (Outcome::Value { value: v0, memory: m0 }, Outcome::Value { value: v1, memory: m1 }) => {
                if equal_mod_garbage(m0, v0, m1, v1, &m.domain()) {
                    return Truth::Holds;
                }
            }
        }
        for r in Uses::new(self.cfg, m).iter() {
            let d0 = definedness(&self.run(m, r.plug(a0)));
            let d1 = definedness(&self.run(m, r.plug(a1)));
            if let (Some(d0), Some(d1)) = (d0, d1) {
                if d0 != d1 {
                    return Truth::Fails(format!("{a0} ~ {a1}: use {r} separates them in {m}"));
                }
            }
        }
        Truth::Unknown(format!("{a0} ~ {a1}: values differ but no use separates them"))
    }

    /// `e ∈ K` for a closed expression: a value is tested directly, anything
    /// else must evaluate without visible effects to a member.
    fn member_expr(&self, m: &Memory, a: &Expr, k: &Class, env: &Env) -> Truth {
        if a.is_value_with(&|x| m.contains(x)) {
            return self.member(m, a, k, env);
        }
        match self.run(m, a.clone()) {
            Outcome::Timeout(n) => Truth::Unknown(format!("{a} timed out at max-steps {n}")),
            Outcome::Stuck(_) => Truth::Fails(format!("{a} is undefined")),
            Outcome::Value { value, memory } => {
                if effect_free(m, &value, &memory) {
                    self.member(m, &value, k, env)
                } else {
                    Truth::Fails(format!("{a} has effects, so it is not equivalent to a value"))
                }
            }
        }
    }

    /// `v ∈ K` for a value.
    pub fn member(&self, m: &Memory, v: &Expr, k: &Class, env: &Env) -> Truth {
        let is_cell = matches!(v, Expr::Var(z) if m.contains(z));
        let verdict = |b: bool| {
            if b {
                Truth::Holds
            } else {
                Truth::Fails(format!("{v} is not in {k}"))
            }
        };
        match k {
            Class::Val => Truth::Holds,
            Class::Nat => verdict(matches!(v, Expr::Nat(_))),
            Class::Nil => verdict(matches!(v, Expr::Nil)),
            Class::Cell => verdict(is_cell),
            Class::CellOf(inner) => match v {
                Expr::Var(z) if is_cell => {
                    let c = m.get(z).unwrap().clone();
                    self.member(m, &c, inner, env).context(|| format!("contents of {z}"))
                }
                _ => verdict(false),
            },
            Class::Comprehension(x, p) => self.sat(m, p, &env.bind(x, v.clone())),
            Class::Var(x) => match env.class(x) {
                Some(c) => self.member(m, v, &c.clone(), env),
                None => Truth::Unknown(format!("class variable {x} is not bound")),
            },
            Class::Arrow(ks, y) | Class::Partial(ks, y) | Class::Memory(ks, y) => {
                self.member_arrow(m, v, k, ks, y, env)
            }
        }
    }

    /// Candidates for an argument class: model values and naturals up to
    /// the bound, with their membership verdicts.
    fn candidates(&self, m: &Memory, k: &Class, env: &Env) -> Vec<(Expr, bool)> {
        let mut vals = model_values(self.cfg, m);
        for n in 0..=self.cfg.nat_bound {
            if !vals.contains(&nat(n)) {
                vals.push(nat(n));
            }
        }
        vals.into_iter()
            .filter_map(|v| match self.member(m, &v, k, env) {
                Truth::Holds => Some((v, true)),
                Truth::Unknown(_) => Some((v, false)),
                Truth::Fails(_) => None,
            })
            .collect()
    }

    fn member_arrow(&self, m: &Memory, f: &Expr, k: &Class, ks: &[Class], y: &Class, env: &Env) -> Truth {
        let per_arg: Vec<Vec<(Expr, bool)>> = ks.iter().map(|c| self.candidates(m, c, env)).collect();
        let mut tuples: Vec<(Vec<Expr>, bool)> = vec![(Vec::new(), true)];
        for cs in &per_arg {
            tuples = tuples
                .into_iter()
                .flat_map(|(t, sure)| {
                    cs.iter().map(move |(v, s)| {
                        let mut t = t.clone();
                        t.push(v.clone());
                        (t, sure && *s)
                    })
                })
                .collect();
        }
        let results: Vec<Truth> = tuples
            .par_iter()
            .map(|(args, sure)| {
                let call = args.iter().fold(f.clone(), |acc, a| app(acc, a.clone()));
                let t = match (k, self.run(m, call.clone())) {
                    (Class::Partial(..), Outcome::Timeout(_)) => Truth::Holds,
                    (_, Outcome::Timeout(n)) => Truth::Unknown(format!("{call} timed out at max-steps {n}")),
                    (Class::Arrow(..), Outcome::Stuck(_)) => Truth::Fails(format!("{call} is undefined")),
                    (_, Outcome::Stuck(_)) => Truth::Holds,
                    (Class::Memory(..), Outcome::Value { value, memory }) => self
                        .member(&memory, &value, y, env)
                        .context(|| format!("result of {call}")),
                    (_, Outcome::Value { value, memory }) => {
                        if effect_free(m, &value, &memory) {
                            self.member(m, &value, y, env).context(|| format!("result of {call}"))
                        } else if matches!(k, Class::Partial(..)) {
                            Truth::Holds
                        } else {
                            Truth::Fails(format!("{call} has memory effects"))
                        }
                    }
                };
                match t {
                    Truth::Fails(r) if !sure => Truth::Unknown(r),
                    t => t,
                }
            })
            .collect();
        Truth::all(results)
    }
}

/// `Γ ⊨ Φ[σ]`.
pub fn satisfies(m: &Memory, phi: &Formula, s: &Substitution, cfg: &EnumConfig) -> Result<Truth, LogicError> {
    satisfies_with(m, phi, s, cfg, &ClassTable::new())
}

pub fn satisfies_with(
    m: &Memory,
    phi: &Formula,
    s: &Substitution,
    cfg: &EnumConfig,
    table: &ClassTable,
) -> Result<Truth, LogicError> {
    phi.validate()?;
    Ok(Checker::new(cfg, table).sat(m, phi, &Env::new(s.clone())))
}

/// `v ∈ K` in memory `m`.
pub fn class_member(v: &Expr, k: &Class, m: &Memory, cfg: &EnumConfig) -> Result<Truth, LogicError> {
    Formula::Member(v.clone(), k.clone()).validate()?;
    let table = ClassTable::new();
    Ok(Checker::new(cfg, &table).member_expr(m, v, k, &Env::default()))
}

/// Validity over a list of models: free variables other than cells are
/// universally quantified over each model's values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validity {
    pub verdict: Truth,
    pub models: usize,
    pub holds: usize,
    pub unknown: usize,
}

pub fn valid_in(phi: &Formula, models: &[Memory], cfg: &EnumConfig, table: &ClassTable) -> Result<Validity, LogicError> {
    phi.validate()?;
    let checker = Checker::new(cfg, table);
    let results: Vec<Truth> = models
        .par_iter()
        .map(|m| {
            let closed = phi.clone().close_over(&|x| m.contains(x));
            checker.sat(m, &closed, &Env::default()).context(|| format!("in {m}"))
        })
        .collect();
    let holds = results.iter().filter(|t| t.is_holds()).count();
    let unknown = results.iter().filter(|t| t.is_unknown()).count();
    Ok(Validity {
        verdict: Truth::all(results),
        models: models.len(),
        holds,
        unknown,
    })
}

/// Validity over every enumerated memory.
pub fn valid(phi: &Formula, cfg: &EnumConfig, table: &ClassTable) -> Result<Validity, LogicError> {
    let models = crate::equivalence::enumerate::enumerate_memories(cfg);
    valid_in(phi, &models, cfg, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::{parse_formula, Class};
    use crate::syntax::ContextSort;

    fn cfg() -> EnumConfig {
        EnumConfig::default()
    }

    #[test]
    fn hole_values_are_threaded() {
        let u = Context::new(let_("x", mk(nat(3)), let_("y", get(var("x")), hole())), ContextSort::Univalent);
        let Reach::At(mem, vals) = reach_hole(&Memory::new(), &u, 100) else { panic!() };
        assert_eq!(mem.len(), 1);
        assert_eq!(vals, vec![("x".to_string(), var("z0")), ("y".to_string(), nat(3))]);
    }

    #[test]
    fn unreachable_hole_is_vacuous() {
        let p = parse_formula("(ctx (if nil _ nil) (equiv 0 1))").unwrap();
        assert_eq!(satisfies(&Memory::new(), &p, &Substitution::new(), &cfg()).unwrap(), Truth::Holds);
        let p = parse_formula("(ctx (seq (get nil) _) (equiv 0 1))").unwrap();
        assert_eq!(satisfies(&Memory::new(), &p, &Substitution::new(), &cfg()).unwrap(), Truth::Holds);
        let p = parse_formula("(ctx (seq nil _) (equiv 0 1))").unwrap();
        assert!(satisfies(&Memory::new(), &p, &Substitution::new(), &cfg()).unwrap().is_fails());
    }

    #[test]
    fn distinct_cells_are_separated() {
        let m: Memory = [("z0".to_string(), nil()), ("z1".to_string(), nil())].into_iter().collect();
        let (cfg, table) = (cfg(), ClassTable::new());
        let c = Checker::new(&cfg, &table);
        assert!(c.equiv_atom(&m, &var("z0"), &var("z1")).is_fails());
        assert!(c.equiv_atom(&m, &var("z0"), &var("z0")).is_holds());
        assert!(c.equiv_atom(&m, &get(var("z0")), &nil()).is_holds());
    }

    #[test]
    fn reference_operation_classes() {
        let m: Memory = [("z0".to_string(), nat(1)), ("z1".to_string(), nil())].into_iter().collect();
        let getter = lam("x", get(var("x")));
        let k = crate::logic::formula::arrow(vec![cell_of(Class::Nat)], Class::Nat);
        assert_eq!(class_member(&getter, &k, &m, &cfg()).unwrap(), Truth::Holds);
        let k = crate::logic::formula::arrow(vec![Class::Cell], Class::Nat);
        assert!(class_member(&getter, &k, &m, &cfg()).unwrap().is_fails());
    }
}
