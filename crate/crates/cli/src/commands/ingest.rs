//! `ddc ingest` — build dataset artifacts from a TSV log or a synthetic spec.

use std::path::PathBuf;

use clap::Args;

use ddc_core::dataset::{generate_synthetic, k_core_filter, load_interactions, split};

use crate::commands::{echo_config, CommonArgs};
use crate::config::{load_config, SourceSection, SyntheticSection};
use crate::error::{CliError, Result};
use crate::rundir::{Manifest, RunDir};

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Raw interaction TSV (`user<TAB>item` per line).
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,

    /// Synthetic spec, e.g. `users=500,items=300,zipf=1.2,per-user=40`.
    #[arg(long)]
    pub synthetic: Option<String>,

    /// Minimum interaction count for k-core filtering (1 disables).
    #[arg(long)]
    pub k_core: Option<usize>,

    /// Split/generation seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Split ratios `train,valid,test`.
    #[arg(long)]
    pub ratios: Option<String>,
}

fn parse_synthetic_spec(spec: &str) -> Result<SyntheticSection> {
    let mut section = SyntheticSection::default();
    for field in spec.split(',') {
        let (key, value) = field.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("synthetic spec field {field:?} needs key=value"))
        })?;
        let bad = |e: std::num::ParseIntError| CliError::Usage(format!("{key}: {e}"));
        let badf = |e: std::num::ParseFloatError| CliError::Usage(format!("{key}: {e}"));
        match key {
            "users" => section.users = value.parse().map_err(bad)?,
            "items" => section.items = value.parse().map_err(bad)?,
            "zipf" => section.zipf = value.parse().map_err(badf)?,
            "per-user" | "per_user" => section.per_user = value.parse().map_err(bad)?,
            "niche" | "niche_fraction" => section.niche_fraction = value.parse().map_err(badf)?,
            "clusters" | "num_clusters" => section.num_clusters = value.parse().map_err(bad)?,
            "pool" | "pool_width" => section.pool_width = Some(value.parse().map_err(bad)?),
            "offset" | "zipf_offset" => section.zipf_offset = value.parse().map_err(badf)?,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown synthetic spec key {other:?}"
                )))
            }
        }
    }
    Ok(section)
}

fn parse_ratios(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad --ratios: {e}")))?;
    if parts.len() != 3 {
        return Err(CliError::Usage(
            "--ratios expects three comma-separated values".into(),
        ));
    }
    Ok([parts[0], parts[1], parts[2]])
}

pub fn run(args: IngestArgs) -> Result<()> {
    let mut cfg = load_config(args.common.config.as_deref(), &args.common.set)?;

    // Inline flags override the config document.
    if let Some(input) = &args.input {
        cfg.dataset.source = Some(SourceSection::Path(input.clone()));
    }
    if let Some(spec) = &args.synthetic {
        cfg.dataset.source = Some(SourceSection::Synthetic(parse_synthetic_spec(spec)?));
    }
    if let Some(k) = args.k_core {
        cfg.dataset.k_core = k;
    }
    if let Some(seed) = args.seed {
        cfg.dataset.seed = seed;
    }
    if let Some(ratios) = &args.ratios {
        cfg.dataset.ratios = parse_ratios(ratios)?;
    }

    let source = cfg.dataset.source.clone().ok_or_else(|| {
        CliError::Usage("no dataset source: pass --input/--synthetic or set dataset.source".into())
    })?;

    let (unsplit, source_desc) = match &source {
        SourceSection::Path(path) => {
            if !path.exists() {
                return Err(CliError::Data(format!(
                    "input file {} not found",
                    path.display()
                )));
            }
            (load_interactions(path)?, format!("tsv:{}", path.display()))
        }
        SourceSection::Synthetic(spec) => {
            let core = spec.to_core(cfg.dataset.seed);
            (
                generate_synthetic(&core)?,
                format!(
                    "synthetic:users={},items={},zipf={},per_user={}",
                    spec.users, spec.items, spec.zipf, spec.per_user
                ),
            )
        }
    };

    let filtered = k_core_filter(&unsplit, cfg.dataset.k_core)?;
    let ds = split(&filtered, cfg.dataset.split_ratios()?, cfg.dataset.seed)?;

    let run_dir = args.common.resolve_new_run_dir(&cfg)?;
    let run = RunDir::create(run_dir)?;
    let manifest = Manifest {
        source: source_desc,
        num_users: ds.num_users(),
        num_items: ds.num_items(),
        num_train: ds.train().len(),
        num_valid: ds.valid().len(),
        num_test: ds.test().len(),
        k_core: cfg.dataset.k_core,
        ratios: cfg.dataset.ratios,
        seed: cfg.dataset.seed,
        degenerate_users: ds.degenerate_users().len(),
    };
    run.save_dataset(&ds, &manifest)?;
    run.save_config(&cfg)?;

    echo_config(&cfg);
    println!(
        "ingest: {} users, {} items, {}/{}/{} train/valid/test -> {}",
        manifest.num_users,
        manifest.num_items,
        manifest.num_train,
        manifest.num_valid,
        manifest.num_test,
        run.root().display()
    );
    if manifest.degenerate_users > 0 {
        eprintln!(
            "warning: {} users interact with the whole catalog; their triplets will be skipped",
            manifest.degenerate_users
        );
    }
    Ok(())
}
