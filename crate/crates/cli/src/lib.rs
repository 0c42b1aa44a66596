//! Corpus ingestion, descriptor archives and report files for the `rocktex`
//! command-line tool.

pub mod archive;
pub mod commands;
pub mod ingest;
pub mod report;
