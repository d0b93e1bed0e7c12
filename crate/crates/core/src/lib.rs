//! Social-media exposure profiling: ingest a subject's posts, classify each
//! into analyst-defined topics by word-embedding distance, score sentiment,
//! and aggregate per-topic exposure reports.

pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod pipeline;
pub mod report;
pub mod sentiment;
pub mod text;
pub mod topic;
