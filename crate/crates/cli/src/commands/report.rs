//! report: pretty-print a stored metrics report file.

use std::path::Path;

use elicit_core::eval::{load_report, render_table};

use crate::config::RunConfig;
use crate::error::CliError;

use super::columns_for;

pub fn run(_config: &RunConfig, file: &Path) -> Result<(), CliError> {
    let report = load_report(file)?;
    let ks: Vec<u32> = report.metrics.recall_at.keys().copied().collect();
    let meta = &report.metadata;
    match meta.seed {
        Some(seed) => println!(
            "encoder {}, {} reps, seed {seed}, {} queries per rep",
            meta.encoder, meta.reps, report.metrics.n_queries
        ),
        None => println!(
            "encoder {}, {} reps, {} queries per rep",
            meta.encoder, meta.reps, report.metrics.n_queries
        ),
    }
    print!(
        "{}",
        render_table(
            &[(meta.encoder.clone(), report.metrics.clone())],
            &columns_for(&ks),
        )
    );
    Ok(())
}
