//! Categorical prompt composition and meta-prompting.

pub mod backend;
pub mod cat;
pub mod harness;
pub mod meta;
pub mod prompt;
pub mod text;
