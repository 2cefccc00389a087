//! baseline: the two reference runs that bracket any submission. Gold
//! scores real questions with the configured encoder; random ignores text
//! and permutes each pool.

use elicit_core::eval::{gold_baseline, random_baseline, render_table};
use elicit_core::pool::load_pools;

use crate::config::RunConfig;
use crate::error::CliError;

use super::{columns_for, ensure_output_dir, load_encoder, load_split_pairs};

pub fn run(config: &RunConfig, gold: bool, random: bool) -> Result<(), CliError> {
    if !gold && !random {
        return Err(CliError::Validation(
            "pass --gold, --random, or both".into(),
        ));
    }
    let pools = load_pools(config.pools_file())?;
    ensure_output_dir(config)?;
    let eval = &config.eval;
    let mut rows = Vec::new();

    if gold {
        let pairs = load_split_pairs(config, eval.split)?;
        let encoder = load_encoder(config)?;
        let report = gold_baseline(
            &pools,
            &pairs,
            encoder.as_ref(),
            eval.seed,
            eval.reps,
            &eval.ks,
        )?;
        let out = config.output_file("report_gold.json");
        elicit_core::eval::save_report(&out, &report)?;
        println!("gold baseline: wrote {}", out.display());
        rows.push(("gold".to_string(), report.metrics));
    }
    if random {
        let report = random_baseline(&pools, eval.seed, eval.reps, &eval.ks)?;
        let out = config.output_file("report_random.json");
        elicit_core::eval::save_report(&out, &report)?;
        println!("random baseline: wrote {}", out.display());
        rows.push(("random".to_string(), report.metrics));
    }

    println!(
        "{} pools, {} reps, seed {}",
        pools.len(),
        eval.reps,
        eval.seed
    );
    print!("{}", render_table(&rows, &columns_for(&eval.ks)));
    Ok(())
}
