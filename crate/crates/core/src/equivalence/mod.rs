//! Bounded equivalence checking: strong isomorphism, CIU testing and laws.

pub mod config;
pub mod enumerate;
pub mod generate;
pub mod laws;
pub mod library;
pub mod oracle;
pub mod verdict;

pub use config::EnumConfig;
pub use laws::{catalog, find_law, law_check, parse_law, parse_laws, Expected, Law, LawReport};
pub use oracle::{check, ciu_report, ciu_test, strong_iso, strong_iso_report, Method};
pub use verdict::{Report, Verdict, Witness};
