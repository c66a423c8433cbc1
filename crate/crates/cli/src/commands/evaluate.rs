//! `ddc evaluate` — filtered top-K ranking metrics for the baseline or the
//! DDC-corrected model on a holdout split.

use clap::Args;
use serde::Serialize;

use ddc_core::dataset::Split;
use ddc_core::metrics::evaluate;

use crate::commands::{echo_config, CommonArgs};
use crate::error::{CliError, Result};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Which holdout split to score.
    #[arg(long, default_value = "test")]
    pub split: String,

    /// Which model to score: baseline or corrected.
    #[arg(long, default_value = "corrected")]
    pub model: String,

    /// Cutoff override; defaults to every K in eval.k_list.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Serialize)]
struct EvalReport {
    run_id: String,
    model: String,
    split: String,
    k: usize,
    recall: f64,
    ndcg: f64,
    mrr: f64,
    map: f64,
    avgpop: f64,
    num_evaluated_users: usize,
    num_skipped_users: usize,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let (run, cfg) = args.common.open_run()?;
    let split = match args.split.as_str() {
        "valid" => Split::Valid,
        "test" => Split::Test,
        other => return Err(CliError::Usage(format!("unknown split {other:?}"))),
    };
    let ds = run.load_dataset()?;

    let (users, items) = match args.model.as_str() {
        "baseline" => {
            let (_, table) = run.load_embeddings("embeddings/backbone.emb")?;
            (table.users().to_owned(), table.items().to_owned())
        }
        "corrected" => {
            let (_, table) = run.load_embeddings("embeddings/corrected_users.emb")?;
            (table.users().to_owned(), table.items().to_owned())
        }
        other => return Err(CliError::Usage(format!("unknown model {other:?}"))),
    };

    echo_config(&cfg);
    let run_id = cfg.run_id.clone().unwrap_or_else(|| {
        run.root()
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    });

    let ks: Vec<usize> = match args.k {
        Some(k) => vec![k],
        None => cfg.eval.k_list.clone(),
    };
    for k in ks {
        let report = evaluate(users.view(), items.view(), &ds, split, k)?;
        let eval = EvalReport {
            run_id: format!("{run_id}-{}", args.model),
            model: args.model.clone(),
            split: args.split.clone(),
            k,
            recall: report.recall,
            ndcg: report.ndcg,
            mrr: report.mrr,
            map: report.map,
            avgpop: report.avgpop,
            num_evaluated_users: report.num_evaluated_users,
            num_skipped_users: report.num_skipped_users,
        };
        run.write_json(
            &format!("reports/eval_{}_{}_k{}.json", args.model, args.split, k),
            &eval,
        )?;
        let key = format!("{},{},{}", eval.run_id, eval.split, eval.k);
        let row = format!(
            "{key},{},{},{},{},{},{}",
            report.recall,
            report.ndcg,
            report.mrr,
            report.map,
            report.avgpop,
            report.num_evaluated_users
        );
        run.upsert_metrics_row(&key, &row)?;
        println!(
            "evaluate[{} {} @{k}]: recall {:.4}, ndcg {:.4}, mrr {:.4}, map {:.4}, avgpop {:.2} \
             ({} users, {} skipped)",
            args.model,
            args.split,
            report.recall,
            report.ndcg,
            report.mrr,
            report.map,
            report.avgpop,
            report.num_evaluated_users,
            report.num_skipped_users
        );
    }
    Ok(())
}
