//! The Ticker and a few small configurations used by tests and examples.

use crate::error::Pos;
use crate::syntax::build::*;
use crate::syntax::Expr;

use super::config::{ActorState, Configuration, Message};
use super::sched::Label;
use super::step::Choice;

/// Call-by-value fixed point without cells:
/// `λf.app(λx.app(f, λv.app(app(x,x),v)), λx.app(f, λv.app(app(x,x),v)))`.
pub fn z() -> Expr {
    let half = lam("x", app(var("f"), lam("v", app(app(var("x"), var("x")), var("v")))));
    lam("f", app(half.clone(), half))
}

/// Curried Ticker behavior `b`: `app(app(b, c), m)` handles message `m`
/// with counter `c`. `t` is a tick; `pair(nil, k)` asks for the counter
/// to be sent to `k`.
pub fn ticker_behavior(name: &str) -> Expr {
    let body = if_(
        eq(var("m"), t()),
        seq(vec![
            send(var(name), t()),
            become_(app(var("b"), add1(var("c")))),
        ]),
        seq(vec![
            send(snd(var("m")), var("c")),
            become_(app(var("b"), var("c"))),
        ]),
    );
    app(z(), lam("b", lam("c", lam("m", body))))
}

/// The request message `pair(nil, k)`.
pub fn request(customer: &str) -> Expr {
    pair(nil(), var(customer))
}

/// Ticker `tau` at counter 0 with one tick pending, customer `k` outside.
/// With `requested`, the request is already in flight too.
pub fn ticker(requested: bool) -> Configuration {
    let mut c = Configuration::new();
    let b = lam("m'", app(app(ticker_behavior("tau"), nat(0)), var("m'")));
    c.actors.insert("tau".to_string(), ActorState::Ready(b));
    c.receptionists.insert("tau".to_string());
    c.externals.insert("k".to_string());
    c.messages.push(Message {
        receiver: "tau".to_string(),
        contents: t(),
    });
    if requested {
        c.messages.push(Message {
            receiver: "tau".to_string(),
            contents: request("k"),
        });
    }
    c
}

/// `n` ticks, then a request from `k`, then the reply handed out.
pub fn ticker_script(n: usize) -> Vec<Label> {
    let at = |choice| Label {
        choice,
        pos: Pos::default(),
    };
    let mut labels: Vec<Label> = (0..n).map(|_| at(Choice::Deliver(0))).collect();
    labels.push(at(Choice::In(Message {
        receiver: "tau".to_string(),
        contents: request("k"),
    })));
    labels.push(at(Choice::Deliver(1)));
    labels.push(at(Choice::Out(1)));
    labels
}

/// The counter value carried by the first reply to `k`.
pub fn ticker_reply<'a>(outputs: impl IntoIterator<Item = &'a Message>) -> Option<u64> {
    outputs.into_iter().find(|m| m.receiver == "k").and_then(|m| match m.contents {
        Expr::Nat(n) => Some(n),
        _ => None,
    })
}
