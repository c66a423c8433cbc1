//! `ddc train` — optimize the backbone and store the best-epoch table.

use clap::Args;

use ddc_core::trainer::train;

use crate::commands::{echo_config, CommonArgs};
use crate::error::Result;

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let (run, cfg) = args.common.open_run()?;
    let manifest = run.load_manifest()?;
    let ds = run.load_dataset()?;
    let bcfg = cfg.backbone.to_core()?;
    let tcfg = cfg.train.to_core()?;

    echo_config(&cfg);
    println!(
        "train: dataset {} ({} users, {} items, {} train interactions)",
        manifest.source, manifest.num_users, manifest.num_items, manifest.num_train
    );
    let (table, trace) = train(&ds, &bcfg, &tcfg)?;

    run.save_embeddings(
        "embeddings/backbone.emb",
        &table,
        bcfg.kind.name(),
        tcfg.seed,
    )?;
    run.write("traces/train_trace.csv", trace.to_csv().as_bytes())?;

    println!(
        "train: {} epochs, best epoch {} (valid MRR@10 {:.4}), final loss {:.4}",
        trace.records.len(),
        trace.best_epoch,
        trace.best_val_mrr(),
        trace.records.last().map_or(f64::NAN, |r| r.loss)
    );
    Ok(())
}
