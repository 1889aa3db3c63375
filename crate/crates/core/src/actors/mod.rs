//! Actor configurations, their transitions, schedulers and observation.

pub mod config;
pub mod library;
pub mod sched;
pub mod step;

pub use config::{ActorError, ActorState, Configuration, Message};
pub use sched::{
    audit, observe_event, parse_script, run, sample_seeds, Audit, Label, Observation, Observed, Run, Scheduler,
    DEFAULT_WINDOW,
};
pub use step::{actor_step, enabled, replay, Choice, TraceItem};
