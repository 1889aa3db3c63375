//! Strong isomorphism and bounded CIU testing over an enumerated case space.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::memory::{equal_mod_garbage, Memory};
use crate::reducer::{eval, Description, Outcome};
use crate::syntax::{substitute, Context, Expr, Name, Substitution};

use super::config::EnumConfig;
use super::enumerate::{enumerate_memories, materialize, value_specs, Uses, ValueSpec};
use super::verdict::{Report, Verdict, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    StrongIso,
    Ciu,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::StrongIso => "strong-iso",
            Method::Ciu => "ciu",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        match s {
            "strong-iso" => Some(Method::StrongIso),
            "ciu" => Some(Method::Ciu),
            _ => None,
        }
    }
}

struct Block {
    memory: Memory,
    specs: Vec<ValueSpec>,
    uses: Uses,
    size: u64,
}

/// Memories × substitutions × uses, in that nesting order.
struct Space {
    vars: Vec<Name>,
    blocks: Vec<Block>,
    offsets: Vec<u64>,
    total: u64,
}

struct Case<'a> {
    block: &'a Block,
    specs: Vec<&'a ValueSpec>,
    use_index: u64,
}

impl Space {
    fn new(cfg: &EnumConfig, vars: Vec<Name>, method: Method) -> Space {
        let mut blocks = Vec::new();
        let mut offsets = Vec::new();
        let mut total = 0u64;
        for memory in enumerate_memories(cfg) {
            let specs = value_specs(cfg, &memory);
            let uses = match method {
                Method::StrongIso => Uses::trivial(),
                Method::Ciu => Uses::new(cfg, &memory),
            };
            let size = (specs.len() as u64)
                .checked_pow(vars.len() as u32)
                .and_then(|n| n.checked_mul(uses.len()))
                .expect("case space overflows u64");
            offsets.push(total);
            total += size;
            blocks.push(Block {
                memory,
                specs,
                uses,
                size,
            });
        }
        Space {
            vars,
            blocks,
            offsets,
            total,
        }
    }

    fn decode(&self, idx: u64) -> Case<'_> {
        let b = self.offsets.partition_point(|&o| o <= idx) - 1;
        let block = &self.blocks[b];
        let mut r = idx - self.offsets[b];
        let nu = block.uses.len();
        let use_index = r % nu;
        r /= nu;
        let base = block.specs.len() as u64;
        let specs = (0..self.vars.len())
            .map(|_| {
                let d = (r % base) as usize;
                r /= base;
                &block.specs[d]
            })
            .collect();
        Case {
            block,
            specs,
            use_index,
        }
    }

    /// Whole blocks in order while they fit, then a uniform sample of the rest.
    fn select(&self, max_cases: usize, seed: u64) -> Vec<u64> {
        let max = max_cases as u64;
        let mut out = Vec::new();
        let mut start = 0u64;
        for b in &self.blocks {
            if out.len() as u64 + b.size > max {
                break;
            }
            out.extend(start..start + b.size);
            start += b.size;
        }
        let budget = max - out.len() as u64;
        let remaining = self.total - start;
        if remaining <= budget {
            out.extend(start..self.total);
        } else if budget > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked: Vec<u64> = rand::seq::index::sample(&mut rng, remaining as usize, budget as usize)
                .into_iter()
                .map(|i| start + i as u64)
                .collect();
            picked.sort_unstable();
            out.extend(picked);
        }
        out
    }
}

enum CaseResult {
    Agree,
    Timeout,
    Disagree(Box<Witness>),
}

fn definedness(o: &Outcome) -> Option<bool> {
    match o {
        Outcome::Value { .. } => Some(true),
        Outcome::Stuck(_) => Some(false),
        Outcome::Timeout(_) => None,
    }
}

fn compare(method: Method, o0: &Outcome, o1: &Outcome, roots: &BTreeSet<Name>) -> Result<bool, &'static str> {
    let (Some(d0), Some(d1)) = (definedness(o0), definedness(o1)) else {
        return Err("timeout");
    };
    if d0 != d1 {
        return Ok(false);
    }
    if method == Method::Ciu || !d0 {
        return Ok(true);
    }
    match (o0, o1) {
        (Outcome::Value { value: v0, memory: m0 }, Outcome::Value { value: v1, memory: m1 }) => {
            Ok(equal_mod_garbage(m0, v0, m1, v1, roots))
        }
        _ => unreachable!(),
    }
}

fn run_case(
    e: &[Expr; 2],
    vars: &[Name],
    case: &Case<'_>,
    method: Method,
    cfg: &EnumConfig,
    reserved: &BTreeSet<Name>,
) -> CaseResult {
    let (vals, memory) = materialize(&case.specs, &case.block.memory, reserved);
    let subst: Substitution = vars.iter().cloned().zip(vals).collect();
    let context: Context = case.block.uses.get(case.use_index);
    let outcomes = [0, 1].map(|i| {
        let p = context.plug(&substitute(&e[i], &subst));
        eval(&Description::new(memory.clone(), p), cfg.max_steps)
    });
    let roots = memory.domain();
    match compare(method, &outcomes[0], &outcomes[1], &roots) {
        Err(_) => CaseResult::Timeout,
        Ok(true) => CaseResult::Agree,
        Ok(false) => {
            let note = match (definedness(&outcomes[0]), definedness(&outcomes[1])) {
                (Some(a), Some(b)) if a != b => {
                    if a {
                        "defined vs undefined"
                    } else {
                        "undefined vs defined"
                    }
                }
                _ => "values differ modulo garbage",
            };
            CaseResult::Disagree(Box::new(Witness {
                memory,
                subst,
                context,
                exprs: e.clone(),
                outcomes,
                note: note.to_string(),
            }))
        }
    }
}

const CHUNK: usize = 256;

/// Runs `method` on `e0`, `e1` over the bounded case space.
pub fn check(e0: &Expr, e1: &Expr, cfg: &EnumConfig, method: Method) -> Report {
    let mut reserved = e0.free_vars();
    reserved.extend(e1.free_vars());
    let vars: Vec<Name> = reserved.iter().cloned().collect();
    let space = Space::new(cfg, vars.clone(), method);
    let picked = space.select(cfg.max_cases, cfg.seed);
    let e = [e0.clone(), e1.clone()];
    let mut report = Report {
        verdict: Verdict::Holds,
        cases: 0,
        definite: 0,
        timeouts: 0,
        space: space.total,
    };
    for chunk in picked.chunks(CHUNK) {
        let results: Vec<CaseResult> = chunk
            .par_iter()
            .map(|&i| run_case(&e, &vars, &space.decode(i), method, cfg, &reserved))
            .collect();
        for r in results {
            report.cases += 1;
            match r {
                CaseResult::Agree => report.definite += 1,
                CaseResult::Timeout => report.timeouts += 1,
                CaseResult::Disagree(w) => {
                    report.definite += 1;
                    report.verdict = Verdict::Fails(w);
                    return report;
                }
            }
        }
    }
    if report.timeouts > 0 {
        report.verdict = Verdict::Unknown(format!(
            "{} of {} cases timed out at max-steps {}",
            report.timeouts, report.cases, cfg.max_steps
        ));
    }
    report
}

pub fn strong_iso_report(e0: &Expr, e1: &Expr, cfg: &EnumConfig) -> Report {
    check(e0, e1, cfg, Method::StrongIso)
}

pub fn ciu_report(e0: &Expr, e1: &Expr, cfg: &EnumConfig) -> Report {
    check(e0, e1, cfg, Method::Ciu)
}

/// Equal values in memories identical up to garbage, for every enumerated
/// closing instantiation.
pub fn strong_iso(e0: &Expr, e1: &Expr, cfg: &EnumConfig) -> Verdict {
    strong_iso_report(e0, e1, cfg).verdict
}

/// Equi-definedness of every enumerated closed instantiation of every
/// enumerated use.
pub fn ciu_test(e0: &Expr, e1: &Expr, cfg: &EnumConfig) -> Verdict {
    ciu_report(e0, e1, cfg).verdict
}
