//! Bilingual lexicon acquisition for two-word French complex lexical units,
//! using a web search engine as a corpus.
//!
//! The flow is: [`corpus`] parsing, [`extraction`] of candidate units,
//! [`dictionary`] classification, then the [`pipeline`] cascade through
//! [`phase1`] (frequency), [`phase2`] (lexical worlds) and [`phase3`]
//! (mining mixed-language snippets). All web access goes through
//! [`oracle::SearchOracle`].

pub mod config;
pub mod corpus;
pub mod dictionary;
pub mod eval;
pub mod extraction;
pub mod generation;
pub mod oracle;
pub mod phase1;
pub mod phase2;
pub mod phase3;
pub mod pipeline;
pub mod tagger;
pub mod text;
