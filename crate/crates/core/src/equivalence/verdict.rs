use std::fmt;

use crate::memory::{canonicalize, Memory};
use crate::reducer::{eval, Description, Outcome};
use crate::syntax::{substitute, Context, Expr, Substitution};

/// A concrete closed instantiation of a use on which two expressions disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Starting memory, including cells created for the substitution.
    pub memory: Memory,
    pub subst: Substitution,
    pub context: Context,
    pub exprs: [Expr; 2],
    pub outcomes: [Outcome; 2],
    pub note: String,
}

impl Witness {
    /// `R[e_i^σ]`, evaluated from `memory`.
    pub fn programs(&self) -> [Expr; 2] {
        [0, 1].map(|i| self.context.plug(&substitute(&self.exprs[i], &self.subst)))
    }

    /// The programs as closed expressions, memory rendered as a context.
    pub fn closed_programs(&self) -> [Expr; 2] {
        let g = canonicalize(&self.memory);
        self.programs().map(|p| g.plug(&p))
    }

    /// Re-runs both sides.
    pub fn replay(&self, max_steps: usize) -> [Outcome; 2] {
        self.programs()
            .map(|p| eval(&Description::new(self.memory.clone(), p), max_steps))
    }

    pub fn to_sexp(&self) -> String {
        let [p0, p1] = self.closed_programs();
        format!(
            "(witness (memory-context {}) (subst{}) (use {}) (note \"{}\") (program {}) (program {}) (outcome {}) (outcome {}))",
            self.memory.to_sexp_string(),
            self.subst
                .iter()
                .map(|(x, v)| format!(" ({x} {v})"))
                .collect::<String>(),
            self.context,
            self.note,
            p0,
            p1,
            self.outcomes[0],
            self.outcomes[1]
        )
    }
}

/// Three-valued result of a bounded check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Box<Witness>),
    Unknown(String),
}

impl Verdict {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }

    /// 0 holds, 1 fails, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::Fails(_) => 1,
            Verdict::Unknown(_) => 2,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails(_) => "FAILS",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("HOLDS"),
            Verdict::Fails(w) => write!(f, "FAILS {}", w.to_sexp()),
            Verdict::Unknown(r) => write!(f, "UNKNOWN {r}"),
        }
    }
}

/// A verdict with the counts behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub verdict: Verdict,
    /// Cases examined.
    pub cases: usize,
    /// Cases where both sides were classified.
    pub definite: usize,
    pub timeouts: usize,
    /// Size of the full case space before sampling.
    pub space: u64,
}

impl Report {
    pub fn definite_ratio(&self) -> f64 {
        if self.cases == 0 {
            1.0
        } else {
            self.definite as f64 / self.cases as f64
        }
    }

    /// Count line printed after the verdict.
    pub fn counts_line(&self) -> String {
        format!(
            "cases {} definite {} timeouts {} space {}",
            self.cases, self.definite, self.timeouts, self.space
        )
    }
}
