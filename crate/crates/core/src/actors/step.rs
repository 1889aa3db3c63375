use std::fmt;

use crate::reducer::{reduce, Effects, Status};
use crate::syntax::{subst1, Expr, Name, Op};

use super::config::{ActorError, ActorState, Configuration, Message};

/// A transition the scheduler may pick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    /// One reduction step inside a busy actor.
    Internal(Name),
    /// Deliver the message at this index of `μ`.
    Deliver(usize),
    /// Hand the message at this index to the environment.
    Out(usize),
    /// A message from the environment.
    In(Message),
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Internal(a) => write!(f, "(internal {a})"),
            Choice::Deliver(i) => write!(f, "(deliver {i})"),
            Choice::Out(i) => write!(f, "(out {i})"),
            Choice::In(m) => write!(f, "(in {} {})", m.receiver, m.contents),
        }
    }
}

/// One entry of a trace. Transitions are replayable; events and stuck
/// reports are what those transitions produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceItem {
    Internal(Name),
    Deliver(Message),
    In(Message),
    Out(Message),
    Event(Name, Option<Name>),
    Stuck(Name, Expr),
}

impl TraceItem {
    pub fn is_transition(&self) -> bool {
        !matches!(self, TraceItem::Event(..) | TraceItem::Stuck(..))
    }
}

impl fmt::Display for TraceItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceItem::Internal(a) => write!(f, "internal {a}"),
            TraceItem::Deliver(m) => write!(f, "deliver {m}"),
            TraceItem::In(m) => write!(f, "in {m}"),
            TraceItem::Out(m) => write!(f, "out {m}"),
            TraceItem::Event(a, Some(t)) => write!(f, "event {a} {t}"),
            TraceItem::Event(a, None) => write!(f, "event {a}"),
            TraceItem::Stuck(a, e) => write!(f, "stuck {a} {e}"),
        }
    }
}

/// Every transition available without input from the environment, in a
/// fixed order: internal steps by actor, then deliveries and outputs by
/// message index.
pub fn enabled(c: &Configuration) -> Vec<Choice> {
    let mut out: Vec<Choice> = c
        .actors
        .iter()
        .filter(|(_, s)| matches!(s, ActorState::Busy(_)))
        .map(|(a, _)| Choice::Internal(a.clone()))
        .collect();
    for (i, m) in c.messages.iter().enumerate() {
        if matches!(c.actors.get(&m.receiver), Some(ActorState::Ready(_))) {
            out.push(Choice::Deliver(i));
        }
    }
    for (i, m) in c.messages.iter().enumerate() {
        if c.externals.contains(&m.receiver) {
            out.push(Choice::Out(i));
        }
    }
    out
}

/// Actor primitives for one step of one actor.
struct ActorFx<'a> {
    config: &'a mut Configuration,
    this: Name,
    became: Option<Expr>,
    items: Vec<TraceItem>,
}

impl Effects for ActorFx<'_> {
    fn is_value_name(&self, x: &str) -> bool {
        self.config.is_actor_name(x)
    }

    fn is_cell(&self, _: &str) -> bool {
        false
    }

    fn effect(&mut self, redex: Expr) -> Option<Expr> {
        match redex {
            Expr::Prim(Op::Send, mut args) => {
                let contents = args.pop()?;
                match args.pop()? {
                    Expr::Var(a) if self.config.is_actor_name(&a) => {
                        self.config.messages.push(Message { receiver: a, contents });
                        Some(Expr::Nil)
                    }
                    _ => None,
                }
            }
            Expr::Prim(Op::Become, mut args) => {
                let b = args.pop()?;
                if !matches!(b, Expr::Lambda(..)) || self.became.is_some() {
                    return None;
                }
                self.became = Some(b);
                Some(Expr::Nil)
            }
            Expr::LetActor(x, b, body) => {
                let name = self.config.fresh("a", &|n| body.has_free(n) || b.has_free(n));
                let behavior = subst1(&b, &x, &Expr::Var(name.clone()));
                if !matches!(behavior, Expr::Lambda(..)) {
                    return None;
                }
                self.config.actors.insert(name.clone(), ActorState::Ready(behavior));
                Some(subst1(&body, &x, &Expr::Var(name)))
            }
            Expr::Event(tag) => {
                self.items.push(TraceItem::Event(self.this.clone(), tag));
                Some(Expr::Nil)
            }
            _ => None,
        }
    }
}

/// Applies one transition, returning the trace items it produced.
pub fn actor_step(c: &mut Configuration, choice: &Choice) -> Result<Vec<TraceItem>, ActorError> {
    let not_enabled = || ActorError::NotEnabled(choice.to_string());
    match choice {
        Choice::Internal(a) => {
            let Some(ActorState::Busy(e)) = c.actors.get(a) else {
                return Err(not_enabled());
            };
            let mut e = e.clone();
            let mut fx = ActorFx {
                config: c,
                this: a.clone(),
                became: None,
                items: vec![TraceItem::Internal(a.clone())],
            };
            let status = reduce(&mut e, &mut fx);
            let became = fx.became.take();
            let mut items = std::mem::take(&mut fx.items);
            match status {
                Status::Value => c.actors[a] = ActorState::Inert(None),
                Status::Stuck => {
                    items.push(TraceItem::Stuck(a.clone(), e.clone()));
                    c.actors[a] = ActorState::Inert(Some(e));
                }
                Status::Stepped => match became {
                    Some(b) => {
                        c.actors[a] = ActorState::Ready(b);
                        if !e.is_value_with(&|x| c.is_actor_name(x)) {
                            let anon = c.fresh("anon", &|n| e.has_free(n));
                            c.anonymous.insert(anon.clone());
                            c.actors.insert(anon, ActorState::Busy(e));
                        }
                    }
                    None if e.is_value_with(&|x| c.is_actor_name(x)) => c.actors[a] = ActorState::Inert(None),
                    None => c.actors[a] = ActorState::Busy(e),
                },
            }
            if c.anonymous.contains(a) && c.actors[a] == ActorState::Inert(None) {
                c.actors.shift_remove(a);
            }
            Ok(items)
        }
        Choice::Deliver(i) => {
            let m = c.messages.get(*i).ok_or_else(not_enabled)?;
            let Some(ActorState::Ready(b)) = c.actors.get(&m.receiver) else {
                return Err(not_enabled());
            };
            let m = c.messages.remove(*i);
            let run = Expr::App(Box::new(b.clone()), Box::new(m.contents.clone()));
            c.actors[&m.receiver] = ActorState::Busy(run);
            Ok(vec![TraceItem::Deliver(m)])
        }
        Choice::Out(i) => {
            let m = c.messages.get(*i).ok_or_else(not_enabled)?;
            if !c.externals.contains(&m.receiver) {
                return Err(not_enabled());
            }
            let m = c.messages.remove(*i);
            for x in m.contents.free_vars() {
                if c.actors.contains_key(&x) {
                    c.receptionists.insert(x);
                }
            }
            Ok(vec![TraceItem::Out(m)])
        }
        Choice::In(m) => {
            if !c.receptionists.contains(&m.receiver) || !m.contents.is_value_open() {
                return Err(not_enabled());
            }
            for x in m.contents.free_vars() {
                if !c.actors.contains_key(&x) {
                    c.externals.insert(x);
                }
            }
            c.messages.push(m.clone());
            Ok(vec![TraceItem::In(m.clone())])
        }
    }
}

/// Re-applies the transitions of `trace` from `initial`, checking that the
/// same events and stuck reports come out.
pub fn replay(initial: &Configuration, trace: &[TraceItem]) -> Result<Configuration, ActorError> {
    let mut c = initial.clone();
    let mut i = 0;
    while i < trace.len() {
        let choice = match &trace[i] {
            TraceItem::Internal(a) => Choice::Internal(a.clone()),
            TraceItem::Deliver(m) => Choice::Deliver(position(&c, m)?),
            TraceItem::Out(m) => Choice::Out(position(&c, m)?),
            TraceItem::In(m) => Choice::In(m.clone()),
            other => return Err(ActorError::NotEnabled(format!("unexpected {other}"))),
        };
        let produced = actor_step(&mut c, &choice)?;
        let expected = &trace[i..(i + produced.len()).min(trace.len())];
        if expected != produced.as_slice() {
            return Err(ActorError::NotEnabled(format!("replay diverged at {}", trace[i])));
        }
        i += produced.len();
    }
    Ok(c)
}

fn position(c: &Configuration, m: &Message) -> Result<usize, ActorError> {
    c.messages
        .iter()
        .position(|x| x == m)
        .ok_or_else(|| ActorError::NotEnabled(format!("no message {m}")))
}
