//! A bounded checker for formulas about programs: equivalence atoms,
//! connectives, quantifiers over the values of a memory, contextual
//! assertions and classes.

pub mod effects;
pub mod formula;
pub mod principles;
pub mod sat;

pub use effects::{effect_predicates, effect_table, EffectReport};
pub use formula::{parse_class, parse_file, parse_formula, Class, ClassTable, Formula, Item, LogicError};
pub use principles::{check_principles, PrincipleReport};
pub use sat::{class_member, satisfies, satisfies_with, valid, valid_in, Checker, Env, Truth, Validity};
