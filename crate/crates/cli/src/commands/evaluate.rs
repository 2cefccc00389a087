//! evaluate: score a submission file (one candidate question per pool)
//! with the configured encoder.

use std::path::Path;

use elicit_core::eval::{evaluate_submission, load_submission, render_table, save_report};
use elicit_core::pool::load_pools;

use crate::config::RunConfig;
use crate::error::CliError;

use super::{columns_for, ensure_output_dir, load_encoder};

pub fn run(config: &RunConfig, submission: &Path) -> Result<(), CliError> {
    let pools = load_pools(config.pools_file())?;
    let entries = load_submission(submission)?;
    let encoder = load_encoder(config)?;

    let report = evaluate_submission(&entries, &pools, encoder.as_ref(), &config.eval.ks)?;

    ensure_output_dir(config)?;
    let out = config.output_file("report_eval.json");
    save_report(&out, &report)?;

    println!(
        "scored {} pools with encoder {}",
        report.per_segment.len(),
        report.metadata.encoder
    );
    print!(
        "{}",
        render_table(
            &[("submission".to_string(), report.metrics.clone())],
            &columns_for(&config.eval.ks),
        )
    );
    println!("wrote {}", out.display());
    Ok(())
}
