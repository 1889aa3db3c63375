//! Terms, contexts, substitution and alpha-equivalence.

mod alpha;
mod context;
mod expr;
mod parse;
mod subst;

pub use alpha::{alpha_equal, alpha_equal_with};
pub use context::{decompose, plug_term, Context, ContextSort, Decomposition};
pub use expr::{build, Expr, Name, Op};
pub use parse::{context_from_sexp, from_sexp, is_identifier, is_reserved, name_from_sexp, parse, parse_context};
pub use subst::{fresh_name, rename_free, subst1, substitute, Substitution};
