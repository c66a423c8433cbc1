//! `ddc sweep-k` — sensitivity of the correction to the preference fraction:
//! fine-tune and evaluate once per k, emitting `k,mrr10,avgpop10`.

use clap::Args;

use ddc_core::dataset::Split;
use ddc_core::ddc::{compose_final, finetune};
use ddc_core::geometry::{popularity_direction, preference_directions};
use ddc_core::metrics::evaluate;

use crate::commands::{echo_config, CommonArgs};
use crate::error::{CliError, Result};

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Comma-separated preference fractions; defaults to ddc.sweep_k.
    #[arg(long)]
    pub k_values: Option<String>,
}

pub fn run(args: SweepArgs) -> Result<()> {
    let (run, cfg) = args.common.open_run()?;
    let ds = run.load_dataset()?;
    let (_, table) = run.load_embeddings("embeddings/backbone.emb")?;
    let rule = cfg.ddc.parsed_rule()?;
    let fcfg = cfg.ddc.to_core();

    let k_values: Vec<f64> = match &args.k_values {
        Some(text) => text
            .split(',')
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CliError::Usage(format!("bad --k-values: {e}")))?,
        None => cfg.ddc.sweep_k.clone(),
    };
    if k_values.is_empty() {
        return Err(CliError::Usage("k sweep list is empty".into()));
    }

    echo_config(&cfg);
    let e_pop = popularity_direction(table.items(), ds.pop(), cfg.geometry.rho)?;

    let mut csv = String::from("k,mrr10,avgpop10\n");
    for &k in &k_values {
        let e_pref = preference_directions(&table, &ds, k)?;
        let (params, _) = finetune(&ds, &table, e_pop.clone(), e_pref, rule, &fcfg)?;
        let corrected = compose_final(&table, &params, true, true);
        let report = evaluate(corrected.view(), table.items(), &ds, Split::Test, 10)?;
        csv.push_str(&format!("{k},{},{}\n", report.mrr, report.avgpop));
        println!(
            "sweep-k[k={k}]: mrr@10 {:.4}, avgpop@10 {:.2}",
            report.mrr, report.avgpop
        );
    }
    run.write("reports/k_sweep.csv", csv.as_bytes())?;
    println!("sweep-k: {} rows -> reports/k_sweep.csv", k_values.len());
    Ok(())
}
