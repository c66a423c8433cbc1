//! `ddc ablate` — the full rule grid plus composition variants, one CSV.

use clap::Args;

use ddc_core::ddc::{run_ablation_grid, AblationRow};
use ddc_core::geometry::{popularity_direction, preference_directions};

use crate::commands::{echo_config, CommonArgs};
use crate::error::Result;

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(args: AblateArgs) -> Result<()> {
    let (run, cfg) = args.common.open_run()?;
    let ds = run.load_dataset()?;
    let (_, table) = run.load_embeddings("embeddings/backbone.emb")?;
    let fcfg = cfg.ddc.to_core();
    let k = cfg.eval.k_list.first().copied().unwrap_or(10);

    echo_config(&cfg);
    let e_pop = popularity_direction(table.items(), ds.pop(), cfg.geometry.rho)?;
    let e_pref = preference_directions(&table, &ds, cfg.ddc.k)?;

    let rows = run_ablation_grid(&ds, &table, &e_pop, &e_pref, &fcfg, k, cfg.ddc.eval_seed)?;

    let mut csv = String::from(AblationRow::csv_header());
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv_row());
        csv.push('\n');
        println!(
            "ablate[{:>12}]: mrr {:.4}, ndcg {:.4}, map {:.4}, avgpop {:.2}, l_eval {:.4}",
            row.label,
            row.report.mrr,
            row.report.ndcg,
            row.report.map,
            row.report.avgpop,
            row.l_eval
        );
    }
    run.write("reports/ablation.csv", csv.as_bytes())?;
    println!("ablate: {} rows -> reports/ablation.csv", rows.len());
    Ok(())
}
