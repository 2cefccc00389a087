//! Toolkit for benchmarking question generation against expert commentary.
//!
//! The pieces fit together as a pipeline: [`corpus`] loads and splits the
//! newline-delimited record files, [`pipeline`] turns raw commentary into a
//! question/answer dataset through a chat backend, [`retriever`] trains and
//! applies text encoders, [`pool`] assembles fixed-size retrieval pools per
//! video segment, and [`eval`] ranks pools and aggregates retrieval metrics.
//! [`synthetic`] generates deterministic corpora for self-tests and
//! calibration runs.

pub mod corpus;
pub mod eval;
pub mod hash;
pub mod pipeline;
pub mod pool;
pub mod retriever;
pub mod synthetic;
