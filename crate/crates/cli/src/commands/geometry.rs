//! `ddc geometry` — popularity direction, projection/popularity correlation,
//! and optional gradient-alignment diagnostics.

use clap::Args;
use serde::Serialize;

use ddc_core::geometry::{gradient_alignment, popularity_direction, projection_correlation};

use crate::commands::{echo_config, CommonArgs};
use crate::error::Result;

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Also compute per-user cosine(negated expected BPR gradient, ideal
    /// update direction).
    #[arg(long)]
    pub alignment: bool,
}

#[derive(Serialize)]
struct GeometrySummary {
    pearson_r: f64,
    rho: f64,
    head_size: usize,
    tail_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_alignment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aligned_users: Option<usize>,
}

pub fn run(args: GeometryArgs) -> Result<()> {
    let (run, cfg) = args.common.open_run()?;
    let ds = run.load_dataset()?;
    let (_, table) = run.load_embeddings("embeddings/backbone.emb")?;

    echo_config(&cfg);
    let e_pop = popularity_direction(table.items(), ds.pop(), cfg.geometry.rho)?;
    let report = projection_correlation(table.items(), ds.pop(), &e_pop, cfg.geometry.rho)?;

    let mut csv = String::from("item_id,pop,projection\n");
    for (item, &projection) in report.projections.iter().enumerate() {
        csv.push_str(&format!("{item},{},{projection}\n", ds.pop()[item]));
    }
    run.write("reports/geometry.csv", csv.as_bytes())?;

    let mut summary = GeometrySummary {
        pearson_r: report.pearson_r,
        rho: report.rho,
        head_size: report.head_size,
        tail_size: report.tail_size,
        mean_alignment: None,
        aligned_users: None,
    };

    if args.alignment {
        let mut csv = String::from("user_id,cosine\n");
        let mut sum = 0.0;
        let mut count = 0usize;
        for u in 0..ds.num_users() {
            if ds.user_hist(u).is_empty() || ds.user_hist(u).len() >= ds.num_items() {
                continue;
            }
            match gradient_alignment(
                u,
                &ds,
                &table,
                cfg.geometry.alignment_pairs,
                cfg.geometry.alignment_seed,
            )? {
                Some(c) => {
                    csv.push_str(&format!("{u},{c}\n"));
                    sum += c;
                    count += 1;
                }
                None => csv.push_str(&format!("{u},\n")),
            }
        }
        run.write("reports/alignment.csv", csv.as_bytes())?;
        if count > 0 {
            summary.mean_alignment = Some(sum / count as f64);
            summary.aligned_users = Some(count);
        }
    }

    run.write_json("reports/geometry.json", &summary)?;
    println!(
        "geometry: pearson r = {:.4} (rho {}, head {}, tail {}){}",
        summary.pearson_r,
        summary.rho,
        summary.head_size,
        summary.tail_size,
        summary
            .mean_alignment
            .map_or(String::new(), |a| format!(", mean alignment {a:.4}")),
    );
    Ok(())
}
