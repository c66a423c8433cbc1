//! Filtered full-ranking top-K evaluation: Recall, NDCG, MRR, MAP at K plus
//! AvgPop@K, the mean train-popularity of recommended items.
//!
//! Candidate items are every item not excluded for the user; train items are
//! always excluded, and valid items are additionally excluded when scoring
//! the test split. Ties are broken by ascending item id. Users with no
//! relevant items in the split are skipped, not scored zero.

use ndarray::{ArrayView1, ArrayView2};

use crate::dataset::{InteractionDataset, Split};
use crate::error::{CoreError, Result};

/// Metric bundle for one (model, split, K) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub k: usize,
    pub recall: f64,
    pub ndcg: f64,
    pub mrr: f64,
    pub map: f64,
    pub avgpop: f64,
    pub num_evaluated_users: usize,
    pub num_skipped_users: usize,
}

/// Rank every non-excluded item for one user: descending score, ties by
/// ascending item id. `exclude` lists must each be sorted.
pub fn rank_items(
    user_vec: ArrayView1<'_, f64>,
    items: ArrayView2<'_, f64>,
    exclude: &[&[usize]],
) -> Vec<usize> {
    let scores = items.dot(&user_vec);
    let mut candidates: Vec<usize> = (0..items.nrows())
        .filter(|i| !exclude.iter().any(|ex| ex.binary_search(i).is_ok()))
        .collect();
    candidates.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    candidates
}

/// Top-K prefix of [`rank_items`], computed with partial selection.
fn top_k_items(
    user_vec: ArrayView1<'_, f64>,
    items: ArrayView2<'_, f64>,
    exclude: &[&[usize]],
    k: usize,
) -> Vec<usize> {
    let scores = items.dot(&user_vec);
    let mut candidates: Vec<usize> = (0..items.nrows())
        .filter(|i| !exclude.iter().any(|ex| ex.binary_search(i).is_ok()))
        .collect();
    let cmp = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, cmp);
        candidates.truncate(k);
    }
    candidates.sort_by(cmp);
    candidates
}

/// Evaluate one model (user and item tables) on a holdout split.
pub fn evaluate(
    users: ArrayView2<'_, f64>,
    items: ArrayView2<'_, f64>,
    ds: &InteractionDataset,
    split: Split,
    k: usize,
) -> Result<RankingReport> {
    if k < 1 {
        return Err(CoreError::InvalidConfig(
            "metric cutoff K must be >= 1".into(),
        ));
    }
    if users.nrows() != ds.num_users() || items.nrows() != ds.num_items() {
        return Err(CoreError::DimensionMismatch(format!(
            "tables {}x{} vs dataset {}x{}",
            users.nrows(),
            items.nrows(),
            ds.num_users(),
            ds.num_items()
        )));
    }
    if ds.split(split).is_empty() {
        return Err(CoreError::EmptyDataset);
    }

    let mut sums = MetricSums::default();
    let mut evaluated = 0usize;
    let mut skipped = 0usize;

    for u in 0..ds.num_users() {
        let relevant = ds.split_hist(split, u);
        if relevant.is_empty() {
            skipped += 1;
            continue;
        }
        let exclude: Vec<&[usize]> = match split {
            Split::Valid => vec![ds.user_hist(u)],
            Split::Test => vec![ds.user_hist(u), ds.split_hist(Split::Valid, u)],
        };
        let top = top_k_items(users.row(u), items, &exclude, k);
        if top.is_empty() {
            skipped += 1;
            continue;
        }
        sums.add(&top, relevant, ds.pop(), k);
        evaluated += 1;
    }

    if evaluated == 0 {
        return Err(CoreError::EmptyDataset);
    }
    Ok(sums.finish(k, evaluated, skipped))
}

#[derive(Default)]
struct MetricSums {
    recall: f64,
    ndcg: f64,
    mrr: f64,
    map: f64,
    avgpop: f64,
}

impl MetricSums {
    fn add(&mut self, top: &[usize], relevant: &[usize], pop: &[u32], k: usize) {
        let mut hits = 0usize;
        let mut first_hit_rank = None;
        let mut dcg = 0.0;
        let mut precision_sum = 0.0;
        let mut pop_sum = 0.0;
        for (idx, &item) in top.iter().enumerate() {
            let rank = idx + 1;
            pop_sum += pop[item] as f64;
            if relevant.binary_search(&item).is_ok() {
                hits += 1;
                first_hit_rank.get_or_insert(rank);
                dcg += 1.0 / ((rank + 1) as f64).log2();
                precision_sum += hits as f64 / rank as f64;
            }
        }
        let ideal = relevant.len().min(k);
        let idcg: f64 = (1..=ideal).map(|r| 1.0 / ((r + 1) as f64).log2()).sum();
        self.recall += hits as f64 / relevant.len() as f64;
        self.ndcg += if idcg > 0.0 { dcg / idcg } else { 0.0 };
        self.mrr += first_hit_rank.map_or(0.0, |r| 1.0 / r as f64);
        self.map += precision_sum / ideal as f64;
        self.avgpop += pop_sum / top.len() as f64;
    }

    fn finish(self, k: usize, evaluated: usize, skipped: usize) -> RankingReport {
        let n = evaluated as f64;
        RankingReport {
            k,
            recall: self.recall / n,
            ndcg: self.ndcg / n,
            mrr: self.mrr / n,
            map: self.map / n,
            avgpop: self.avgpop / n,
            num_evaluated_users: evaluated,
            num_skipped_users: skipped,
        }
    }
}
