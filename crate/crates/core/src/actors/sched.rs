use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ParseError, Pos};
use crate::sexp::{self, Sexp};
use crate::syntax::{from_sexp, name_from_sexp};

use super::config::{ActorError, ActorState, Configuration, Message};
use super::step::{actor_step, enabled, Choice, TraceItem};

pub const DEFAULT_WINDOW: usize = 8;

/// How long each pending message has been deliverable without being taken.
#[derive(Clone, Debug, Default)]
pub struct WaitTracker {
    entries: Vec<(Message, usize)>,
}

fn deliverable(c: &Configuration, m: &Message) -> bool {
    c.externals.contains(&m.receiver) || matches!(c.actors.get(&m.receiver), Some(ActorState::Ready(_)))
}

impl WaitTracker {
    /// Lines the tracked messages up with `c.messages`. Messages only leave
    /// one at a time and arrive at the end, so an in-order match suffices.
    pub fn update(&mut self, c: &Configuration) {
        let mut old = std::mem::take(&mut self.entries).into_iter().peekable();
        for m in &c.messages {
            let mut wait = 0;
            while let Some((o, w)) = old.next() {
                if o == *m {
                    wait = w;
                    break;
                }
            }
            let wait = if deliverable(c, m) { wait } else { 0 };
            self.entries.push((m.clone(), wait));
        }
    }

    /// Counts one more round for every deliverable message `chosen` skips.
    pub fn passed(&mut self, c: &Configuration, chosen: &Choice) {
        for (i, (m, w)) in self.entries.iter_mut().enumerate() {
            let taken = matches!(chosen, Choice::Deliver(j) | Choice::Out(j) if *j == i);
            if !taken && deliverable(c, m) {
                *w += 1;
            }
        }
    }

    pub fn wait(&self, i: usize) -> usize {
        self.entries.get(i).map_or(0, |e| e.1)
    }

    pub fn max_wait(&self) -> usize {
        self.entries.iter().map(|e| e.1).max().unwrap_or(0)
    }
}

/// A scripted label with the position it was read from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub choice: Choice,
    pub pos: Pos,
}

/// Reads `(deliver i) (internal a) (in a EXPR) (out i)` labels.
pub fn parse_script(text: &str) -> Result<Vec<Label>, ParseError> {
    sexp::read_all(text)?.iter().map(label_from_sexp).collect()
}

fn label_from_sexp(s: &Sexp) -> Result<Label, ParseError> {
    let err = |m: &str| ParseError::at(s.pos(), m.to_string());
    let index = |x: &Sexp| {
        x.as_atom()
            .and_then(|a| a.parse::<usize>().ok())
            .ok_or_else(|| ParseError::at(x.pos(), "expected a message index".to_string()))
    };
    let choice = match s.as_list() {
        Some([h, i]) if h.as_atom() == Some("deliver") => Choice::Deliver(index(i)?),
        Some([h, i]) if h.as_atom() == Some("out") => Choice::Out(index(i)?),
        Some([h, a]) if h.as_atom() == Some("internal") => Choice::Internal(name_from_sexp(a)?),
        Some([h, a, e]) if h.as_atom() == Some("in") => Choice::In(Message {
            receiver: name_from_sexp(a)?,
            contents: from_sexp(e)?,
        }),
        _ => return Err(err("expected (deliver i), (internal a), (in a EXPR) or (out i)")),
    };
    Ok(Label { choice, pos: s.pos() })
}

pub enum Scheduler {
    /// Rotates through the enabled choices, serving any message that has
    /// waited `window - 1` rounds first.
    RoundRobin { window: usize, next: usize, waits: WaitTracker },
    Random(ChaCha8Rng),
    /// Busy actors run to completion before each label other than
    /// `(internal a)`.
    Scripted { labels: Vec<Label>, next: usize },
}

impl Scheduler {
    pub fn round_robin(window: usize) -> Self {
        Scheduler::RoundRobin {
            window: window.max(1),
            next: 0,
            waits: WaitTracker::default(),
        }
    }

    pub fn random(seed: u64) -> Self {
        Scheduler::Random(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn scripted(labels: Vec<Label>) -> Self {
        Scheduler::Scripted { labels, next: 0 }
    }

    /// The next transition, or `None` when the run is over.
    fn choose(&mut self, c: &Configuration) -> Result<Option<Choice>, ActorError> {
        match self {
            Scheduler::RoundRobin { window, next, waits } => {
                let choices = enabled(c);
                if choices.is_empty() {
                    return Ok(None);
                }
                waits.update(c);
                let overdue = choices
                    .iter()
                    .filter_map(|ch| match ch {
                        Choice::Deliver(i) | Choice::Out(i) => Some((waits.wait(*i), ch)),
                        _ => None,
                    })
                    .filter(|(w, _)| *w + 1 >= *window)
                    .max_by_key(|(w, _)| *w)
                    .map(|(_, ch)| ch.clone());
                let chosen = overdue.unwrap_or_else(|| {
                    let ch = choices[*next % choices.len()].clone();
                    *next += 1;
                    ch
                });
                waits.passed(c, &chosen);
                Ok(Some(chosen))
            }
            Scheduler::Random(rng) => {
                let choices = enabled(c);
                if choices.is_empty() {
                    return Ok(None);
                }
                let i = rng.gen_range(0..choices.len());
                Ok(Some(choices[i].clone()))
            }
            Scheduler::Scripted { labels, next } => {
                let Some(label) = labels.get(*next) else {
                    return Ok(None);
                };
                if !matches!(label.choice, Choice::Internal(_)) {
                    if let Some((a, _)) = c.actors.iter().find(|(_, s)| matches!(s, ActorState::Busy(_))) {
                        return Ok(Some(Choice::Internal(a.clone())));
                    }
                }
                let ok = match &label.choice {
                    Choice::In(m) => c.receptionists.contains(&m.receiver),
                    ch => enabled(c).contains(ch),
                };
                if !ok {
                    return Err(ActorError::Script {
                        index: *next,
                        pos: label.pos,
                        label: label.choice.to_string(),
                    });
                }
                *next += 1;
                Ok(Some(label.choice.clone()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub trace: Vec<TraceItem>,
    pub last: Configuration,
    pub steps: usize,
    /// No transition was enabled (or the script ran out) before the budget.
    pub finished: bool,
}

impl Run {
    pub fn events(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.trace.iter().filter_map(|t| match t {
            TraceItem::Event(a, tag) => Some((a.as_str(), tag.as_deref())),
            _ => None,
        })
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Message> {
        self.trace.iter().filter_map(|t| match t {
            TraceItem::Out(m) => Some(m),
            _ => None,
        })
    }
}

/// Runs at most `budget` transitions.
pub fn run(c: &Configuration, sched: &mut Scheduler, budget: usize) -> Result<Run, ActorError> {
    let mut cur = c.clone();
    let mut trace = Vec::new();
    let mut steps = 0;
    while steps < budget {
        let Some(choice) = sched.choose(&cur)? else {
            return Ok(Run {
                trace,
                last: cur,
                steps,
                finished: true,
            });
        };
        trace.extend(actor_step(&mut cur, &choice)?);
        steps += 1;
    }
    let finished = match sched {
        Scheduler::Scripted { labels, next } => *next >= labels.len(),
        _ => enabled(&cur).is_empty(),
    };
    Ok(Run {
        trace,
        last: cur,
        steps,
        finished,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observed {
    None,
    Some,
    AllSampled,
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observed::None => "NONE",
            Observed::Some => "SOME",
            Observed::AllSampled => "ALL-SAMPLED",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub verdict: Observed,
    pub runs: usize,
    pub runs_with_event: usize,
    /// Runs emitting each tag; untagged events count under `-`.
    pub per_tag: BTreeMap<String, usize>,
    /// Seed of the first run with an event and of the first without.
    pub seed_with: Option<u64>,
    pub seed_without: Option<u64>,
}

/// `samples` seeds derived from `base`.
pub fn sample_seeds(base: u64, samples: usize) -> Vec<u64> {
    (0..samples as u64).map(|i| base.wrapping_add(i)).collect()
}

/// Random bounded runs, one per seed, classified by whether `event` ran.
pub fn observe_event(c: &Configuration, budget: usize, seeds: &[u64]) -> Result<Observation, ActorError> {
    let runs: Vec<(u64, Run)> = seeds
        .par_iter()
        .map(|&s| run(c, &mut Scheduler::random(s), budget).map(|r| (s, r)))
        .collect::<Result<_, _>>()?;
    let mut per_tag = BTreeMap::new();
    let mut with = 0;
    let (mut seed_with, mut seed_without) = (None, None);
    for (s, r) in &runs {
        let tags: std::collections::BTreeSet<&str> = r.events().map(|(_, t)| t.unwrap_or("-")).collect();
        if tags.is_empty() {
            seed_without.get_or_insert(*s);
        } else {
            with += 1;
            seed_with.get_or_insert(*s);
        }
        for t in tags {
            *per_tag.entry(t.to_string()).or_insert(0) += 1;
        }
    }
    let verdict = match with {
        0 => Observed::None,
        n if n == runs.len() => Observed::AllSampled,
        _ => Observed::Some,
    };
    Ok(Observation {
        verdict,
        runs: runs.len(),
        runs_with_event: with,
        per_tag,
        seed_with,
        seed_without,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Audit {
    /// ρ and ξ never shrink.
    pub interface: Result<(), String>,
    /// No message is ever addressed to a `become` continuation.
    pub privacy: Result<(), String>,
    /// Longest time a deliverable message waited.
    pub max_wait: usize,
}

impl Audit {
    pub fn fair_within(&self, window: usize) -> bool {
        self.max_wait <= window
    }

    pub fn ok(&self) -> bool {
        self.interface.is_ok() && self.privacy.is_ok()
    }
}

/// Replays `trace` from `initial`, checking the trace invariants along the way.
pub fn audit(initial: &Configuration, trace: &[TraceItem]) -> Result<Audit, ActorError> {
    let mut c = initial.clone();
    let mut waits = WaitTracker::default();
    let mut report = Audit {
        interface: Ok(()),
        privacy: Ok(()),
        max_wait: 0,
    };
    let mut i = 0;
    while i < trace.len() {
        let choice = match &trace[i] {
            TraceItem::Internal(a) => Choice::Internal(a.clone()),
            TraceItem::Deliver(m) | TraceItem::Out(m) => {
                let j = c
                    .messages
                    .iter()
                    .position(|x| x == m)
                    .ok_or_else(|| ActorError::NotEnabled(format!("no message {m}")))?;
                if matches!(trace[i], TraceItem::Deliver(_)) {
                    Choice::Deliver(j)
                } else {
                    Choice::Out(j)
                }
            }
            TraceItem::In(m) => Choice::In(m.clone()),
            other => return Err(ActorError::NotEnabled(format!("unexpected {other}"))),
        };
        waits.update(&c);
        waits.passed(&c, &choice);
        report.max_wait = report.max_wait.max(waits.max_wait());
        let (rho, xi) = (c.receptionists.clone(), c.externals.clone());
        let produced = actor_step(&mut c, &choice)?;
        if report.interface.is_ok() && (!rho.is_subset(&c.receptionists) || !xi.is_subset(&c.externals)) {
            report.interface = Err(format!("interface shrank at {}", trace[i]));
        }
        if report.privacy.is_ok() {
            if let Some(m) = c.messages.iter().find(|m| c.anonymous.contains(&m.receiver)) {
                report.privacy = Err(format!("message {m} addressed to an anonymous actor"));
            }
        }
        i += produced.len().max(1);
    }
    Ok(report)
}
