//! Finite ranges for memories, closing substitutions and uses.

use std::collections::BTreeSet;

use crate::memory::Memory;
use crate::syntax::build::*;
use crate::syntax::{plug_term, Context, ContextSort, Expr, Name};

use super::config::EnumConfig;

/// `(get nil)`: a closed term that is stuck immediately.
pub fn stuck_term() -> Expr {
    get(nil())
}

/// `λx.if(eq(x, v), stuck, nil)`: defined exactly when its argument is not `v`.
pub fn discriminator(v: Expr) -> Expr {
    lam("x", if_(eq(var("x"), v), stuck_term(), nil()))
}

/// Memories with cells z0..z{k-1}, k ≤ `max_cells`, each cell holding one of
/// `contents` or (if `cell_contents`) any cell of the same memory.
pub fn enumerate_memories_with(max_cells: usize, contents: &[Expr], cell_contents: bool) -> Vec<Memory> {
    let mut out = Vec::new();
    for k in 0..=max_cells {
        let names: Vec<Name> = (0..k).map(|i| format!("z{i}")).collect();
        let mut choices: Vec<Expr> = contents.to_vec();
        if cell_contents {
            choices.extend(names.iter().map(|z| var(z)));
        }
        if k > 0 && choices.is_empty() {
            continue;
        }
        let mut digits = vec![0usize; k];
        loop {
            out.push(
                names
                    .iter()
                    .zip(&digits)
                    .map(|(z, &d)| (z.clone(), choices[d].clone()))
                    .collect(),
            );
            let mut i = 0;
            while i < k {
                digits[i] += 1;
                if digits[i] < choices.len() {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    out
}

/// Memories holding `nil` or cells.
pub fn enumerate_memories(cfg: &EnumConfig) -> Vec<Memory> {
    enumerate_memories_with(cfg.max_cells, &[nil()], true)
}

/// A value to substitute, possibly requiring new memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueSpec {
    Existing(Expr),
    /// A fresh cell holding the given value.
    FreshCell(Expr),
    /// `λx.set(p, x)` for a fresh cell `p`.
    Writer,
}

/// Components allowed inside enumerated pairs.
fn pair_base(cfg: &EnumConfig, m: &Memory) -> Vec<Expr> {
    cfg.atoms.iter().take(2).cloned().chain(m.names().map(|z| var(z))).collect()
}

fn pairs_at(cfg: &EnumConfig, m: &Memory, depth: usize) -> Vec<Expr> {
    if depth < 2 {
        return Vec::new();
    }
    let mut base = pair_base(cfg, m);
    base.extend(pairs_at(cfg, m, depth - 1));
    let mut out = Vec::new();
    for a in &base {
        for b in &base {
            out.push(pair(a.clone(), b.clone()));
        }
    }
    out
}

/// Values that exist in `m` without extending it.
pub fn model_values(cfg: &EnumConfig, m: &Memory) -> Vec<Expr> {
    let mut out: Vec<Expr> = cfg.atoms.clone();
    out.extend(m.names().map(|z| var(z)));
    if !cfg.first_order {
        out.extend(cfg.probe_pool.iter().cloned());
        out.extend(pairs_at(cfg, m, cfg.value_depth));
    }
    out
}

/// The full ordered range for one substituted variable.
pub fn value_specs(cfg: &EnumConfig, m: &Memory) -> Vec<ValueSpec> {
    let mut out: Vec<ValueSpec> = model_values(cfg, m).into_iter().map(ValueSpec::Existing).collect();
    if cfg.value_depth >= 2 && m.len() < cfg.max_cells {
        out.extend(cfg.atoms.iter().cloned().map(ValueSpec::FreshCell));
        if !cfg.first_order {
            out.push(ValueSpec::Writer);
        }
    }
    out
}

/// Predicted `value_specs(cfg, m).len()` for a memory of `cells` cells.
pub fn count_values(cfg: &EnumConfig, cells: usize) -> usize {
    let base = cfg.atoms.len().min(2) + cells;
    let mut pairs = 0;
    for _ in (2..=cfg.value_depth).filter(|_| !cfg.first_order) {
        pairs = (base + pairs) * (base + pairs);
    }
    let probes = if cfg.first_order { 0 } else { cfg.probe_pool.len() };
    let mut n = cfg.atoms.len() + cells + probes + pairs;
    if cfg.value_depth >= 2 && cells < cfg.max_cells {
        n += cfg.atoms.len() + usize::from(!cfg.first_order);
    }
    n
}

/// Builds the values and the extended memory for a tuple of specs.
pub fn materialize(specs: &[&ValueSpec], m: &Memory, reserved: &BTreeSet<Name>) -> (Vec<Expr>, Memory) {
    let mut mem = m.clone();
    let mut next = 0;
    let mut vals = Vec::with_capacity(specs.len());
    for s in specs {
        match s {
            ValueSpec::Existing(v) => vals.push(v.clone()),
            ValueSpec::FreshCell(a) => {
                let (z, n) = mem.fresh_cell(next, &|x| reserved.contains(x));
                next = n;
                mem.insert(z.clone(), a.clone());
                vals.push(var(&z));
            }
            ValueSpec::Writer => {
                let (p, n) = mem.fresh_cell(next, &|x| reserved.contains(x));
                next = n;
                mem.insert(p.clone(), nil());
                vals.push(lam("x", set(var(&p), var("x"))));
            }
        }
    }
    (vals, mem)
}

/// Every value of the range for `m` with the memory it needs.
pub fn enumerate_values(cfg: &EnumConfig, m: &Memory) -> Vec<(Expr, Memory)> {
    let reserved = BTreeSet::new();
    value_specs(cfg, m)
        .iter()
        .map(|s| {
            let (mut v, mem) = materialize(&[s], m, &reserved);
            (v.pop().unwrap(), mem)
        })
        .collect()
}

/// Names bound by `let` frames.
pub const FRAME_VAR: &str = "f";

/// One-hole frames in evaluation position, for memory `m`.
pub fn frames(cfg: &EnumConfig, m: &Memory) -> Vec<Expr> {
    let h = hole;
    let cells: Vec<Expr> = m.names().map(|z| var(z)).collect();
    let f = || var(FRAME_VAR);
    let mut out = vec![
        if_(h(), nil(), stuck_term()),
        if_(h(), stuck_term(), nil()),
    ];
    for a in [nil(), nat(0), nat(1), lam("x", var("x"))].into_iter().chain(cells.iter().cloned()) {
        out.push(app(h(), a));
    }
    for p in &cfg.probe_pool {
        out.push(app(p.clone(), h()));
    }
    for v in cfg.atoms.iter().chain(&cells) {
        out.push(app(discriminator(v.clone()), h()));
    }
    out.extend([mk(h()), get(h()), cellp(h()), natp(h()), fst(h()), snd(h()), add1(h()), sub1(h())]);
    out.push(set(h(), nil()));
    out.push(set(h(), nat(0)));
    for c in &cells {
        out.push(set(c.clone(), h()));
    }
    for v in cfg.atoms.iter().chain(&cells) {
        out.push(eq(h(), v.clone()));
    }
    out.push(eq(nil(), h()));
    out.push(eq(nat(0), h()));
    let bodies = [
        f(),
        app(f(), nat(0)),
        seq(vec![app(f(), nat(1)), app(f(), nat(2))]),
        get(f()),
        seq(vec![set(f(), t()), get(f())]),
        pair(f(), f()),
    ];
    for b in bodies {
        out.push(let_(FRAME_VAR, h(), b));
    }
    out.push(seq(vec![h(), nil()]));
    for c in &cells {
        out.push(seq(vec![h(), get(c.clone())]));
    }
    out
}

/// Compositions of up to `depth` frames, indexed without materializing them
/// all. Index 0 is the empty context.
#[derive(Clone, Debug)]
pub struct Uses {
    frames: Vec<Expr>,
    depth: usize,
}

impl Uses {
    pub fn new(cfg: &EnumConfig, m: &Memory) -> Self {
        Uses {
            frames: frames(cfg, m),
            depth: cfg.ctx_depth,
        }
    }

    /// Only the empty context.
    pub fn trivial() -> Self {
        Uses {
            frames: Vec::new(),
            depth: 0,
        }
    }

    pub fn len(&self) -> u64 {
        let f = self.frames.len() as u64;
        (0..=self.depth as u32).map(|d| f.pow(d)).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Outermost frame first.
    pub fn get(&self, mut i: u64) -> Context {
        let f = self.frames.len() as u64;
        let mut d = 0u32;
        loop {
            let block = f.pow(d);
            if i < block {
                break;
            }
            i -= block;
            d += 1;
        }
        let mut term = Expr::Hole;
        let mut idx = Vec::with_capacity(d as usize);
        for _ in 0..d {
            idx.push((i % f) as usize);
            i /= f;
        }
        // idx[0] is outermost
        for &k in idx.iter().rev() {
            term = plug_term(&term, &self.frames[k]);
        }
        Context::new(term, ContextSort::Reduction)
    }

    pub fn iter(&self) -> impl Iterator<Item = Context> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

/// All uses for `m`, materialized.
pub fn enumerate_uses(cfg: &EnumConfig, m: &Memory) -> Vec<Context> {
    Uses::new(cfg, m).iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::decompose;

    #[test]
    fn memory_count() {
        let cfg = EnumConfig::default();
        assert_eq!(enumerate_memories(&cfg).len(), 1 + 2 + 9 + 64);
        assert_eq!(enumerate_memories_with(2, &cfg.atoms, false).len(), 1 + 5 + 25);
    }

    #[test]
    fn depth_one_values() {
        let cfg = EnumConfig {
            value_depth: 1,
            ..EnumConfig::default()
        };
        let vals: Vec<Expr> = enumerate_values(&cfg, &Memory::new()).into_iter().map(|(v, _)| v).collect();
        let mut expect = cfg.atoms.clone();
        expect.extend(cfg.probe_pool.clone());
        assert_eq!(vals, expect);
    }

    #[test]
    fn counting_formula_matches() {
        let cfg = EnumConfig::default();
        for m in enumerate_memories(&cfg).iter().step_by(7) {
            assert_eq!(value_specs(&cfg, m).len(), count_values(&cfg, m.len()));
        }
    }

    #[test]
    fn uses_are_reduction_contexts() {
        let cfg = EnumConfig::default();
        let mut m = Memory::new();
        m.insert("z0", nil());
        let uses = Uses::new(&cfg, &m);
        let n = uses.frame_count() as u64;
        assert_eq!(uses.len(), 1 + n + n * n);
        for c in uses.iter() {
            assert!(c.is_reduction(&|x| m.contains(x)), "{c}");
        }
        assert!(uses.get(0).is_hole());
    }

    #[test]
    fn apply_twice_use_present() {
        let cfg = EnumConfig::default();
        let want = let_("f", hole(), seq(vec![app(var("f"), nat(1)), app(var("f"), nat(2))]));
        let all = enumerate_uses(&cfg, &Memory::new());
        assert!(all.iter().any(|c| c.term() == &want));
        assert!(all.iter().any(|c| c.term() == &get(hole())));
        assert!(all.iter().any(|c| c.term() == &app(lam("x", var("x")), hole())));
    }

    #[test]
    fn plugged_use_decomposes_to_hole_contents() {
        let cfg = EnumConfig::default();
        let uses = Uses::new(&cfg, &Memory::new());
        let probe = app(lam("y", var("y")), nil());
        for c in uses.iter().take(200) {
            match decompose(&c.plug(&probe), &|_| false) {
                crate::syntax::Decomposition::Redex { context, redex } => {
                    assert_eq!(redex, probe);
                    assert_eq!(context.term(), c.term());
                }
                d => panic!("{d:?}"),
            }
        }
    }
}
