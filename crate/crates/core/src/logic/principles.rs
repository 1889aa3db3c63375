//! Meta-tests of the three contextual-assertion principles over generated
//! contexts, formulas and expressions.

use std::fmt;

use crate::equivalence::enumerate::enumerate_memories;
use crate::equivalence::generate::Gen;
use crate::equivalence::{ciu_test, EnumConfig};
use crate::memory::Memory;
use crate::syntax::build::*;
use crate::syntax::{subst1, Context, Name};

use super::formula::{ctx, equiv, forall, not, ClassTable, Formula};
use super::sat::{valid_in, Checker, Env, Truth};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipleReport {
    pub name: &'static str,
    pub instances: usize,
    /// Instances whose premise held, so the conclusion was tested.
    pub tested: usize,
    pub violations: usize,
    /// Instances left undecided by the step budget.
    pub unknown: usize,
    pub first_violation: Option<String>,
}

impl PrincipleReport {
    fn new(name: &'static str) -> Self {
        PrincipleReport {
            name,
            instances: 0,
            tested: 0,
            violations: 0,
            unknown: 0,
            first_violation: None,
        }
    }

    fn violation(&mut self, what: String) {
        self.violations += 1;
        self.first_violation.get_or_insert(what);
    }

    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for PrincipleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "principle {} instances {} tested {} violations {} unknown {}",
            self.name, self.instances, self.tested, self.violations, self.unknown
        )
    }
}

/// Closed formulas, a fixed share of them valid by construction.
fn closed_formula(gen: &mut Gen, i: usize) -> Formula {
    match i % 6 {
        0 => {
            let e = gen.expr(3, &[]);
            equiv(e.clone(), e)
        }
        1 => {
            let body = gen.expr(2, &["y".to_string()]);
            let lhs = app(lam("y", body.clone()), var("x"));
            forall("x", equiv(lhs, subst1(&body, "y", &var("x"))))
        }
        2 => {
            let e = gen.expr(2, &[]);
            forall("x", equiv(seq(vec![var("x"), e.clone()]), e))
        }
        3 => equiv(gen.expr(2, &[]), gen.expr(2, &[])),
        4 => {
            let a = gen.atom();
            let b = gen.atom();
            not(equiv(a, b))
        }
        _ => forall("x", equiv(eq(var("x"), var("x")), t())),
    }
}

/// (i): `⊨ Φ` implies `⊨ U[[Φ]]`.
pub fn principle_necessitation(cfg: &EnumConfig, instances: usize, seed: u64) -> PrincipleReport {
    let models = enumerate_memories(cfg);
    let table = ClassTable::new();
    let mut gen = Gen::new(seed);
    let mut report = PrincipleReport::new("i");
    for i in 0..instances {
        let phi = closed_formula(&mut gen, i);
        let (u, _) = gen.univalent_context(2, &[]);
        report.instances += 1;
        let premise = valid_in(&phi, &models, cfg, &table).expect("generated formulas are well formed");
        if !premise.verdict.is_holds() {
            continue;
        }
        report.tested += 1;
        let conclusion = ctx(u.clone(), phi.clone());
        match valid_in(&conclusion, &models, cfg, &table).unwrap().verdict {
            Truth::Holds => {}
            Truth::Unknown(_) => report.unknown += 1,
            Truth::Fails(r) => report.violation(format!("U = {u}, phi = {phi}: {r}")),
        }
    }
    report
}

/// (ii): `U[[e0 ≅ e1]]` implies `U[e0] ≅ U[e1]`, the conclusion tested by
/// CIU.
pub fn principle_propagation(cfg: &EnumConfig, instances: usize, seed: u64) -> PrincipleReport {
    let models = enumerate_memories(cfg);
    let table = ClassTable::new();
    let mut gen = Gen::new(seed);
    let mut report = PrincipleReport::new("ii");
    for i in 0..instances {
        let (u, bound) = gen.univalent_context(2, &[]);
        let e0 = gen.expr(2, &bound);
        let e1 = match i % 4 {
            0 => seq(vec![nil(), e0.clone()]),
            1 => let_("p'", e0.clone(), var("p'")),
            2 => app(lam("p'", var("p'")), e0.clone()),
            _ => gen.expr(2, &bound),
        };
        report.instances += 1;
        let premise = ctx(u.clone(), equiv(e0.clone(), e1.clone()));
        if !valid_in(&premise, &models, cfg, &table).unwrap().verdict.is_holds() {
            continue;
        }
        report.tested += 1;
        match ciu_test(&u.plug(&e0), &u.plug(&e1), cfg) {
            crate::equivalence::Verdict::Fails(w) => {
                report.violation(format!("U = {u}, e0 = {e0}, e1 = {e1}: {}", w.to_sexp()))
            }
            crate::equivalence::Verdict::Unknown(_) => report.unknown += 1,
            crate::equivalence::Verdict::Holds => {}
        }
    }
    report
}

fn assertion(gen: &mut Gen, scope: &[Name], i: usize) -> Formula {
    match i % 3 {
        0 => equiv(gen.expr(2, scope), gen.expr(2, scope)),
        1 if !scope.is_empty() => {
            let x = scope[i % scope.len()].clone();
            equiv(var(&x), gen.value(1, scope))
        }
        _ => not(equiv(gen.expr(1, scope), gen.atom())),
    }
}

/// (iii): `U0[[U1[[Φ]]]]` and `(U0[U1])[[Φ]]` agree in every model.
pub fn principle_composition(cfg: &EnumConfig, instances: usize, seed: u64) -> PrincipleReport {
    let models: Vec<Memory> = enumerate_memories(cfg);
    let table = ClassTable::new();
    let checker = Checker::new(cfg, &table);
    let mut gen = Gen::new(seed);
    let mut report = PrincipleReport::new("iii");
    for i in 0..instances {
        let (u0, b0) = gen.univalent_context(2, &[]);
        let (u1, b1) = gen.univalent_context(2, &b0);
        let scope: Vec<Name> = b0.iter().chain(&b1).cloned().collect();
        let phi = assertion(&mut gen, &scope, i);
        report.instances += 1;
        report.tested += 1;
        let nested = ctx(u0.clone(), ctx(u1.clone(), phi.clone()));
        let composed: Context = u0.compose(&u1);
        let flat = ctx(composed, phi.clone());
        for m in &models {
            let a = checker.sat(m, &nested, &Env::default());
            let b = checker.sat(m, &flat, &Env::default());
            if a.is_unknown() || b.is_unknown() {
                report.unknown += 1;
                break;
            }
            if a.tag() != b.tag() {
                report.violation(format!("U0 = {u0}, U1 = {u1}, phi = {phi} in {m}: {a} vs {b}"));
                break;
            }
        }
    }
    report
}

/// All three principles with `instances` generated instances each.
pub fn check_principles(cfg: &EnumConfig, instances: usize) -> [PrincipleReport; 3] {
    let seed = cfg.seed;
    [
        principle_necessitation(cfg, instances, seed ^ 0x11),
        principle_propagation(cfg, instances, seed ^ 0x22),
        principle_composition(cfg, instances, seed ^ 0x33),
    ]
}
