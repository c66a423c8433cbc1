//! Directional decomposition and correction (DDC).
//!
//! Fine-tunes two scalars per user over frozen embeddings: `alpha_u` moves
//! the user along the global popularity direction for negative-pair scoring,
//! `beta_u` along the personalized preference direction for positive-pair
//! scoring. The asymmetric rule grid generalizes which correction applies to
//! which side of the pairwise loss; the proper configuration is `b_a`.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{sample_triplets, InteractionDataset, Split, Triplet};
use crate::error::{CoreError, Result};
use crate::geometry::DirectionVector;
use crate::metrics::{evaluate, RankingReport};
use crate::model::EmbeddingTable;
use crate::seeding::{derive_seed, derive_seed_indexed, tags};
use crate::trainer::{bpr_loss, sigmoid, EpochRecord, Optimizer, OptimizerKind, TrainTrace};

/// Which corrections a term receives: `a` = alpha*e_pop, `b` = beta*e_pref.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corrections {
    pub pop: bool,
    pub pref: bool,
}

impl Corrections {
    const A: Self = Self {
        pop: true,
        pref: false,
    };
    const B: Self = Self {
        pop: false,
        pref: true,
    };
    const AB: Self = Self {
        pop: true,
        pref: true,
    };

    fn label(&self) -> &'static str {
        match (self.pop, self.pref) {
            (true, false) => "a",
            (false, true) => "b",
            (true, true) => "ab",
            (false, false) => "-",
        }
    }
}

/// An update rule `pos-term_neg-term`, e.g. `b_a` applies the preference
/// correction to the positive term and the popularity correction to the
/// negative term. At least one correction must be applied overall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateRule {
    pub pos: Corrections,
    pub neg: Corrections,
}

impl UpdateRule {
    pub const B_A: Self = Self {
        pos: Corrections::B,
        neg: Corrections::A,
    };
    pub const A_B: Self = Self {
        pos: Corrections::A,
        neg: Corrections::B,
    };

    pub fn new(pos: Corrections, neg: Corrections) -> Result<Self> {
        if !(pos.pop || pos.pref || neg.pop || neg.pref) {
            return Err(CoreError::InvalidConfig(
                "update rule must apply at least one correction".into(),
            ));
        }
        Ok(Self { pos, neg })
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.pos.label(), self.neg.label())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parse_side = |side: &str| -> Result<Corrections> {
            match side {
                "a" => Ok(Corrections::A),
                "b" => Ok(Corrections::B),
                "ab" => Ok(Corrections::AB),
                other => Err(CoreError::InvalidConfig(format!(
                    "unknown correction set {other:?} (expected a, b or ab)"
                ))),
            }
        };
        let (pos, neg) = s
            .split_once('_')
            .ok_or_else(|| CoreError::InvalidConfig(format!("bad rule name {s:?}")))?;
        Self::new(parse_side(pos)?, parse_side(neg)?)
    }

    /// The full 3x3 rule grid in row-major order (pos side varies slowest).
    pub fn grid() -> Vec<UpdateRule> {
        let sides = [Corrections::A, Corrections::B, Corrections::AB];
        let mut out = Vec::with_capacity(9);
        for pos in sides {
            for neg in sides {
                out.push(UpdateRule { pos, neg });
            }
        }
        out
    }
}

/// Learned per-user scalar pair plus the frozen directions they act along.
/// The backbone tables stay outside this struct and are never mutated.
#[derive(Debug, Clone)]
pub struct DdcParams {
    pub alpha: Array1<f64>,
    pub beta: Array1<f64>,
    pub e_pop: DirectionVector,
    pub e_pref: Vec<DirectionVector>,
}

impl DdcParams {
    pub fn new(
        num_users: usize,
        e_pop: DirectionVector,
        e_pref: Vec<DirectionVector>,
        seed: u64,
        init_scale: f64,
    ) -> Result<Self> {
        if e_pref.len() != num_users {
            return Err(CoreError::DimensionMismatch(format!(
                "{} preference directions for {} users",
                e_pref.len(),
                num_users
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::SCALAR_INIT));
        let normal = Normal::new(0.0, init_scale.max(0.0)).expect("finite scale");
        let mut draw = |_: usize| {
            if init_scale == 0.0 {
                0.0
            } else {
                normal.sample(&mut rng)
            }
        };
        let alpha = Array1::from_shape_fn(num_users, &mut draw);
        let beta = Array1::from_shape_fn(num_users, &mut draw);
        Ok(Self {
            alpha,
            beta,
            e_pop,
            e_pref,
        })
    }

    pub fn num_users(&self) -> usize {
        self.alpha.len()
    }

    /// CSV rows `user_id,alpha,beta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("user_id,alpha,beta\n");
        for u in 0..self.num_users() {
            out.push_str(&format!("{},{},{}\n", u, self.alpha[u], self.beta[u]));
        }
        out
    }
}

/// Margin of the decoupled loss for one triplet under a rule:
/// `pos_term . e*_i - neg_term . e*_j` with the rule's corrections applied
/// to each side.
pub fn ddc_margin(
    table: &EmbeddingTable,
    params: &DdcParams,
    rule: UpdateRule,
    t: &Triplet,
) -> f64 {
    let e_u = table.user(t.user);
    let e_i = table.item(t.pos);
    let e_j = table.item(t.neg);
    let alpha = params.alpha[t.user];
    let beta = params.beta[t.user];
    let e_pref = &params.e_pref[t.user];

    let mut pos_score = e_u.dot(&e_i);
    if rule.pos.pop {
        pos_score += alpha * params.e_pop.dot(e_i);
    }
    if rule.pos.pref {
        pos_score += beta * e_pref.dot(e_i);
    }
    let mut neg_score = e_u.dot(&e_j);
    if rule.neg.pop {
        neg_score += alpha * params.e_pop.dot(e_j);
    }
    if rule.neg.pref {
        neg_score += beta * e_pref.dot(e_j);
    }
    pos_score - neg_score
}

/// Per-triplet DDC loss; with zero scalars this equals the plain BPR loss on
/// the frozen embeddings under any rule.
pub fn ddc_loss(table: &EmbeddingTable, params: &DdcParams, rule: UpdateRule, t: &Triplet) -> f64 {
    bpr_loss(ddc_margin(table, params, rule, t))
}

/// Partial derivatives of the per-triplet loss with respect to the user's
/// scalars `(dL/dalpha, dL/dbeta)`. Frozen tables receive no gradient.
pub fn ddc_gradients(
    table: &EmbeddingTable,
    params: &DdcParams,
    rule: UpdateRule,
    t: &Triplet,
) -> (f64, f64) {
    let e_i = table.item(t.pos);
    let e_j = table.item(t.neg);
    let e_pref = &params.e_pref[t.user];
    let margin = ddc_margin(table, params, rule, t);
    let w = sigmoid(-margin);

    let mut dmargin_dalpha = 0.0;
    if rule.pos.pop {
        dmargin_dalpha += params.e_pop.dot(e_i);
    }
    if rule.neg.pop {
        dmargin_dalpha -= params.e_pop.dot(e_j);
    }
    let mut dmargin_dbeta = 0.0;
    if rule.pos.pref {
        dmargin_dbeta += e_pref.dot(e_i);
    }
    if rule.neg.pref {
        dmargin_dbeta -= e_pref.dot(e_j);
    }
    (-w * dmargin_dalpha, -w * dmargin_dbeta)
}

/// Corrected user table `e_u + alpha*e_pop + beta*e_pref`, with switches to
/// drop either term for the composition ablation.
pub fn compose_final(
    table: &EmbeddingTable,
    params: &DdcParams,
    include_pop: bool,
    include_pref: bool,
) -> Array2<f64> {
    let mut out = table.users().to_owned();
    for u in 0..params.num_users() {
        let mut row = out.row_mut(u);
        if include_pop {
            row.scaled_add(params.alpha[u], &params.e_pop.as_view());
        }
        if include_pref {
            row.scaled_add(params.beta[u], &params.e_pref[u].as_view());
        }
    }
    out
}

/// Mean plain BPR loss of a (possibly corrected) user table against frozen
/// item embeddings over one epoch of sampled triplets.
pub fn eval_bpr_loss(
    users: ArrayView2<'_, f64>,
    items: ArrayView2<'_, f64>,
    ds: &InteractionDataset,
    sample_seed: u64,
) -> Result<f64> {
    let triplets = sample_triplets(ds, sample_seed);
    if triplets.is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    let mut sum = 0.0;
    for t in &triplets {
        let e_u = users.row(t.user);
        let margin = e_u.dot(&items.row(t.pos)) - e_u.dot(&items.row(t.neg));
        sum += bpr_loss(margin);
    }
    Ok(sum / triplets.len() as f64)
}

#[derive(Debug, Clone)]
pub struct FinetuneConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: Option<usize>,
    pub seed: u64,
    pub init_scale: f64,
    pub optimizer: OptimizerKind,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            batch_size: 8192,
            patience: 50,
            max_epochs: None,
            seed: 0,
            init_scale: 0.01,
            optimizer: OptimizerKind::adam_default(),
        }
    }
}

impl FinetuneConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(CoreError::InvalidConfig(
                "learning rate must be finite and >= 0".into(),
            ));
        }
        if self.batch_size < 1 || self.patience < 1 {
            return Err(CoreError::InvalidConfig(
                "batch_size and patience must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Optimize the per-user scalars under the decoupled loss with early
/// stopping on validation MRR@10 of the fully composed embeddings.
///
/// The frozen tables are never written to; the caller can checksum them
/// before and after. Deterministic under the config seed.
pub fn finetune(
    ds: &InteractionDataset,
    table: &EmbeddingTable,
    e_pop: DirectionVector,
    e_pref: Vec<DirectionVector>,
    rule: UpdateRule,
    fcfg: &FinetuneConfig,
) -> Result<(DdcParams, TrainTrace)> {
    fcfg.validate()?;
    let mut params = DdcParams::new(ds.num_users(), e_pop, e_pref, fcfg.seed, fcfg.init_scale)?;
    let mut opt_alpha = Optimizer::new(fcfg.optimizer, ds.num_users());
    let mut opt_beta = Optimizer::new(fcfg.optimizer, ds.num_users());

    let mut trace = TrainTrace::default();
    let mut best: Option<(usize, f64, Array1<f64>, Array1<f64>)> = None;
    let mut epoch = 0usize;

    loop {
        let started = Instant::now();
        let triplets = sample_triplets(
            ds,
            derive_seed_indexed(fcfg.seed, tags::EPOCH, epoch as u64),
        );
        if triplets.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        let mut loss_sum = 0.0;
        let mut grad_alpha = vec![0.0; ds.num_users()];
        let mut grad_beta = vec![0.0; ds.num_users()];
        for batch in triplets.chunks(fcfg.batch_size) {
            grad_alpha.iter_mut().for_each(|g| *g = 0.0);
            grad_beta.iter_mut().for_each(|g| *g = 0.0);
            for t in batch {
                loss_sum += ddc_loss(table, &params, rule, t);
                let (da, db) = ddc_gradients(table, &params, rule, t);
                grad_alpha[t.user] += da;
                grad_beta[t.user] += db;
            }
            opt_alpha.step(
                params.alpha.as_slice_mut().expect("contiguous"),
                &grad_alpha,
                fcfg.learning_rate,
            );
            opt_beta.step(
                params.beta.as_slice_mut().expect("contiguous"),
                &grad_beta,
                fcfg.learning_rate,
            );
        }
        let mean_loss = loss_sum / triplets.len() as f64;
        if !mean_loss.is_finite()
            || params.alpha.iter().any(|x| !x.is_finite())
            || params.beta.iter().any(|x| !x.is_finite())
        {
            return Err(CoreError::Divergence(format!(
                "non-finite scalar state at epoch {epoch}"
            )));
        }

        let corrected = compose_final(table, &params, true, true);
        let val_mrr = if ds.valid().is_empty() {
            0.0
        } else {
            evaluate(corrected.view(), table.items(), ds, Split::Valid, 10)?.mrr
        };
        trace.records.push(EpochRecord {
            epoch,
            loss: mean_loss,
            val_mrr,
            seconds: started.elapsed().as_secs_f64(),
        });

        let improved = best.as_ref().is_none_or(|(_, m, _, _)| val_mrr > *m);
        if improved {
            best = Some((epoch, val_mrr, params.alpha.clone(), params.beta.clone()));
            trace.best_epoch = epoch;
        }

        epoch += 1;
        let stalled = epoch - trace.best_epoch > fcfg.patience;
        let exhausted = fcfg.max_epochs.is_some_and(|m| epoch >= m);
        if stalled || exhausted {
            break;
        }
    }

    let (_, _, alpha, beta) = best.expect("at least one epoch ran");
    params.alpha = alpha;
    params.beta = beta;
    Ok((params, trace))
}

/// One row of the ablation grid output.
#[derive(Debug, Clone)]
pub struct AblationRow {
    pub label: String,
    pub report: RankingReport,
    pub l_eval: f64,
}

impl AblationRow {
    pub fn csv_header() -> &'static str {
        "rule,mrr10,ndcg10,map10,recall10,avgpop10,l_eval"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.label,
            self.report.mrr,
            self.report.ndcg,
            self.report.map,
            self.report.recall,
            self.report.avgpop,
            self.l_eval
        )
    }
}

/// Run the full rule grid: a baseline row, the nine rules (each fine-tuned
/// independently from identical initial scalars and seed, evaluated with the
/// full composition), and the three composition variants of the `b_a` run.
pub fn run_ablation_grid(
    ds: &InteractionDataset,
    table: &EmbeddingTable,
    e_pop: &DirectionVector,
    e_pref: &[DirectionVector],
    fcfg: &FinetuneConfig,
    k: usize,
    l_eval_seed: u64,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::with_capacity(13);

    let baseline_report = evaluate(table.users(), table.items(), ds, Split::Test, k)?;
    let baseline_l_eval = eval_bpr_loss(table.users(), table.items(), ds, l_eval_seed)?;
    rows.push(AblationRow {
        label: "baseline".into(),
        report: baseline_report,
        l_eval: baseline_l_eval,
    });

    let mut b_a_params: Option<DdcParams> = None;
    for rule in UpdateRule::grid() {
        let (params, _) = finetune(ds, table, e_pop.clone(), e_pref.to_vec(), rule, fcfg)?;
        let corrected = compose_final(table, &params, true, true);
        let report = evaluate(corrected.view(), table.items(), ds, Split::Test, k)?;
        let l_eval = eval_bpr_loss(corrected.view(), table.items(), ds, l_eval_seed)?;
        if rule == UpdateRule::B_A {
            b_a_params = Some(params.clone());
        }
        rows.push(AblationRow {
            label: rule.name(),
            report,
            l_eval,
        });
    }

    let params = b_a_params.expect("grid contains b_a");
    for (label, include_pop, include_pref) in [
        ("b_a_full", true, true),
        ("b_a_wo_alpha", false, true),
        ("b_a_wo_beta", true, false),
    ] {
        let corrected = compose_final(table, &params, include_pop, include_pref);
        let report = evaluate(corrected.view(), table.items(), ds, Split::Test, k)?;
        let l_eval = eval_bpr_loss(corrected.view(), table.items(), ds, l_eval_seed)?;
        rows.push(AblationRow {
            label: label.into(),
            report,
            l_eval,
        });
    }

    Ok(rows)
}
