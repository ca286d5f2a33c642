//! Vietnamese question answering over a course-metadata knowledge base.
//!
//! A question flows through [`lexicon::segment`], [`parser::parse`],
//! [`intent::build_intent`] and [`intent::decompose`],
//! [`query::build_query`] and finally [`engine::evaluate`] against a
//! [`kb::Graph`]. [`app::Pipeline`] wires the stages together.

pub mod app;
pub mod engine;
pub mod fuzz;
pub mod intent;
pub mod kb;
pub mod lexicon;
pub mod parser;
pub mod query;
