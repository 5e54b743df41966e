//! Solving functional equations in one unknown `f: R -> R`.
//!
//! A candidate closed form is synthesized by fitting a polynomial template,
//! and its completeness is established by an SMT portfolio on an enriched
//! negated query.

pub mod symbolic;
pub mod spec_io;
pub mod template;
pub mod instantiation;
pub mod portfolio;
pub mod lemma;
pub mod pipeline;
pub mod fixtures;
