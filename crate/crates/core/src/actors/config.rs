use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;

use crate::error::ParseError;
use crate::sexp::{self, Sexp};
use crate::syntax::{from_sexp, name_from_sexp, Expr, Name};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActorState {
    /// Waiting for a message with this behavior.
    Ready(Expr),
    /// Running an expression.
    Busy(Expr),
    /// Finished without `become`, or stuck (with the stuck expression).
    Inert(Option<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub receiver: Name,
    pub contents: Expr,
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.receiver, self.contents)
    }
}

/// `⟨ρ, α, μ, ξ⟩`, plus the bookkeeping needed for fresh names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub receptionists: BTreeSet<Name>,
    pub actors: IndexMap<Name, ActorState>,
    /// In arrival order; delivery order is up to the scheduler.
    pub messages: Vec<Message>,
    pub externals: BTreeSet<Name>,
    /// Names created for `become` continuations.
    pub anonymous: BTreeSet<Name>,
    pub(crate) next_id: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ActorError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("ill-formed configuration: {0}")]
    IllFormed(String),
    #[error("transition {0} is not enabled")]
    NotEnabled(String),
    #[error("script label {index} at {pos}: {label} is not enabled")]
    Script { index: usize, pos: crate::error::Pos, label: String },
}

impl Configuration {
    pub fn new() -> Self {
        Configuration {
            receptionists: BTreeSet::new(),
            actors: IndexMap::new(),
            messages: Vec::new(),
            externals: BTreeSet::new(),
            anonymous: BTreeSet::new(),
            next_id: 0,
        }
    }

    pub fn is_actor_name(&self, x: &str) -> bool {
        self.actors.contains_key(x) || self.externals.contains(x)
    }

    /// A name not used anywhere in the configuration.
    pub(crate) fn fresh(&mut self, prefix: &str, also_taken: &dyn Fn(&str) -> bool) -> Name {
        loop {
            let n = format!("{prefix}{}", self.next_id);
            self.next_id += 1;
            if !self.is_actor_name(&n) && !also_taken(&n) && !self.mentions(&n) {
                return n;
            }
        }
    }

    fn mentions(&self, x: &str) -> bool {
        let state_has = |s: &ActorState| match s {
            ActorState::Ready(e) | ActorState::Busy(e) | ActorState::Inert(Some(e)) => e.has_free(x),
            ActorState::Inert(None) => false,
        };
        self.actors.values().any(state_has) || self.messages.iter().any(|m| m.receiver == x || m.contents.has_free(x))
    }

    /// ρ ⊆ dom(α), ξ ∩ dom(α) = ∅, every free name is an actor name, ready
    /// behaviors are lambdas and message contents are values.
    pub fn check(&self) -> Result<(), ActorError> {
        let ill = |m: String| Err(ActorError::IllFormed(m));
        if let Some(r) = self.receptionists.iter().find(|r| !self.actors.contains_key(*r)) {
            return ill(format!("receptionist {r} is not an actor"));
        }
        if let Some(x) = self.externals.iter().find(|x| self.actors.contains_key(*x)) {
            return ill(format!("{x} is both internal and external"));
        }
        let known = |e: &Expr| e.free_vars().into_iter().find(|x| !self.is_actor_name(x));
        for (a, s) in &self.actors {
            match s {
                ActorState::Ready(b) => {
                    if !matches!(b, Expr::Lambda(..)) {
                        return ill(format!("behavior of {a} is not a lambda"));
                    }
                    if let Some(x) = known(b) {
                        return ill(format!("{x} is free in the behavior of {a}"));
                    }
                }
                ActorState::Busy(e) | ActorState::Inert(Some(e)) => {
                    if let Some(x) = known(e) {
                        return ill(format!("{x} is free in the expression of {a}"));
                    }
                }
                ActorState::Inert(None) => {}
            }
        }
        for m in &self.messages {
            if !self.is_actor_name(&m.receiver) {
                return ill(format!("message receiver {} is unknown", m.receiver));
            }
            if !m.contents.is_value_with(&|x| self.is_actor_name(x)) {
                return ill(format!("message contents {} are not a value", m.contents));
            }
            if let Some(x) = known(&m.contents) {
                return ill(format!("{x} is free in message {m}"));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Configuration, ActorError> {
        Configuration::from_sexp(&sexp::read_one(text).map_err(ParseError::from)?)
    }

    /// `(config (receptionists a ...) (externals x ...) (actors (a (ready EXPR)) ...) (messages (a EXPR) ...))`
    pub fn from_sexp(s: &Sexp) -> Result<Configuration, ActorError> {
        let err = |p: &Sexp, m: &str| ActorError::Parse(ParseError::at(p.pos(), m.to_string()));
        if s.head() != Some("config") {
            return Err(err(s, "expected (config ...)"));
        }
        let mut c = Configuration::new();
        for clause in &s.as_list().unwrap()[1..] {
            let items = clause.as_list().ok_or_else(|| err(clause, "expected a clause"))?;
            let rest = &items[1..];
            match clause.head() {
                Some("receptionists") => {
                    for r in rest {
                        c.receptionists.insert(name_from_sexp(r)?);
                    }
                }
                Some("externals") => {
                    for x in rest {
                        c.externals.insert(name_from_sexp(x)?);
                    }
                }
                Some("actors") => {
                    for a in rest {
                        let Some([name, state]) = a.as_list() else {
                            return Err(err(a, "expected (name (ready EXPR))"));
                        };
                        let name = name_from_sexp(name)?;
                        let st = match state.as_list() {
                            Some([tag, e]) => {
                                let e = from_sexp(e)?;
                                match tag.as_atom() {
                                    Some("ready") => ActorState::Ready(e),
                                    Some("busy") => ActorState::Busy(e),
                                    _ => return Err(err(tag, "actor state must be ready or busy")),
                                }
                            }
                            _ => return Err(err(state, "expected (ready EXPR)")),
                        };
                        if c.actors.insert(name.clone(), st).is_some() {
                            return Err(err(a, &format!("actor {name} defined twice")));
                        }
                    }
                }
                Some("messages") => {
                    for m in rest {
                        let Some([to, e]) = m.as_list() else {
                            return Err(err(m, "expected (receiver EXPR)"));
                        };
                        c.messages.push(Message {
                            receiver: name_from_sexp(to)?,
                            contents: from_sexp(e)?,
                        });
                    }
                }
                _ => return Err(err(clause, "unknown configuration clause")),
            }
        }
        c.check()?;
        Ok(c)
    }
}

impl Default for Configuration {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |s: &BTreeSet<Name>| s.iter().map(|x| format!(" {x}")).collect::<String>();
        write!(f, "(config (receptionists{}) (externals{}) (actors", names(&self.receptionists), names(&self.externals))?;
        for (a, s) in &self.actors {
            match s {
                ActorState::Ready(b) => write!(f, " ({a} (ready {b}))")?,
                ActorState::Busy(e) => write!(f, " ({a} (busy {e}))")?,
                ActorState::Inert(None) => write!(f, " ({a} inert)")?,
                ActorState::Inert(Some(e)) => write!(f, " ({a} (stuck {e}))")?,
            }
        }
        f.write_str(") (messages")?;
        for m in &self.messages {
            write!(f, " {m}")?;
        }
        f.write_str("))")
    }
}
