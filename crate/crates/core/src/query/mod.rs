//! Query AST, compilation from intents, and its text form.

mod ast;
mod builder;
mod pattern;
mod text;

pub use ast::{
    AstError, Filter, GroupPattern, PatternElement, Projection, Select, TriplePattern, COUNT_ALIAS,
    DEFAULT_DATASET,
};
pub use builder::{build_group, build_query, projection_var, BuildError, BuildOptions};
pub use pattern::{escape_literal, LiteralPattern, PatternError};
pub use text::{compact, read, serialize, ReadError};
