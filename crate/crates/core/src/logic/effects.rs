//! Whether evaluating an expression expands or writes memory.

use rayon::prelude::*;

use crate::equivalence::enumerate::{enumerate_memories, model_values};
use crate::equivalence::EnumConfig;
use crate::memory::{reachable, Memory, RootSet};
use crate::reducer::{eval, Description, Outcome};
use crate::syntax::{alpha_equal, substitute, Expr, Name, Substitution};

use super::sat::Truth;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectReport {
    /// No cell reachable after evaluation is new.
    pub not_expand: Truth,
    /// Every pre-existing cell keeps its contents.
    pub not_write: Truth,
}

/// Both predicates for one memory and closing substitution. A stuck
/// evaluation never reaches the assertion point, so both hold vacuously.
pub fn effect_predicates(e: &Expr, m: &Memory, s: &Substitution, cfg: &EnumConfig) -> EffectReport {
    let a = substitute(e, s);
    match eval(&Description::new(m.clone(), a.clone()), cfg.max_steps) {
        Outcome::Timeout(n) => {
            let u = Truth::Unknown(format!("{a} timed out at max-steps {n}"));
            EffectReport {
                not_expand: u.clone(),
                not_write: u,
            }
        }
        Outcome::Stuck(_) => EffectReport {
            not_expand: Truth::Holds,
            not_write: Truth::Holds,
        },
        Outcome::Value { value, memory } => {
            let roots = RootSet::cells(m.names().cloned()).with_value(value.clone());
            let fresh: Vec<Name> = reachable(&memory, &roots)
                .into_iter()
                .filter(|z| !m.contains(z))
                .collect();
            let not_expand = if fresh.is_empty() {
                Truth::Holds
            } else {
                Truth::Fails(format!("{a} in {m} leaves new reachable cells {}", fresh.join(" ")))
            };
            let changed: Vec<&Name> = m
                .iter()
                .filter(|(z, v)| !memory.get(z).is_some_and(|w| alpha_equal(v, w)))
                .map(|(z, _)| z)
                .collect();
            let not_write = if changed.is_empty() {
                Truth::Holds
            } else {
                Truth::Fails(format!(
                    "{a} in {m} writes {}",
                    changed.iter().map(|z| z.as_str()).collect::<Vec<_>>().join(" ")
                ))
            };
            EffectReport { not_expand, not_write }
        }
    }
}

/// The predicates with free variables quantified over every enumerated
/// memory and its values.
pub fn effect_table(e: &Expr, cfg: &EnumConfig) -> EffectReport {
    let vars: Vec<Name> = e.free_vars().into_iter().collect();
    let reports: Vec<EffectReport> = enumerate_memories(cfg)
        .par_iter()
        .flat_map_iter(|m| {
            let vals = model_values(cfg, m);
            let mut substs = vec![Substitution::new()];
            for x in &vars {
                substs = substs
                    .into_iter()
                    .flat_map(|s| {
                        vals.iter().map(move |v| {
                            let mut s = s.clone();
                            s.insert(x.clone(), v.clone());
                            s
                        })
                    })
                    .collect();
            }
            substs
                .into_iter()
                .filter(|s| s.iter().all(|(x, _)| !m.contains(x)))
                .map(|s| effect_predicates(e, m, &s, cfg))
                .collect::<Vec<_>>()
        })
        .collect();
    EffectReport {
        not_expand: Truth::all(reports.iter().map(|r| r.not_expand.clone())),
        not_write: Truth::all(reports.iter().map(|r| r.not_write.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;

    #[test]
    fn allocation_is_expansion_only_when_reachable() {
        let cfg = EnumConfig::default();
        let m = Memory::new();
        let r = effect_predicates(&seq(vec![mk(nil()), nil()]), &m, &Substitution::new(), &cfg);
        assert!(r.not_expand.is_holds());
        let r = effect_predicates(&mk(nil()), &m, &Substitution::new(), &cfg);
        assert!(r.not_expand.is_fails() && r.not_write.is_holds());
    }

    #[test]
    fn writes_are_detected() {
        let cfg = EnumConfig::default();
        let m: Memory = [("z0".to_string(), t())].into_iter().collect();
        let r = effect_predicates(&set(var("y"), nil()), &m, &Substitution::singleton("y", var("z0")), &cfg);
        assert!(r.not_write.is_fails() && r.not_expand.is_holds());
        let m: Memory = [("z0".to_string(), nil())].into_iter().collect();
        let r = effect_predicates(&set(var("z0"), nil()), &m, &Substitution::new(), &cfg);
        assert!(r.not_write.is_holds());
    }
}
