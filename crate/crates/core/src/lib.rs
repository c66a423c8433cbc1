//! Collaborative-filtering toolkit for implicit feedback: BPR-trained
//! backbones (MF, LightGCN), geometric popularity-bias diagnostics, and
//! directional decomposition and correction (DDC) fine-tuning, with a full
//! ranking-evaluation harness.
//!
//! Pipeline shape:
//!
//! 1. [`dataset`] — ingest or synthesize interactions, k-core filter,
//!    per-user holdout split, BPR triplet sampling.
//! 2. [`model`] / [`trainer`] — embedding tables, backbone forward passes,
//!    BPR optimization with early stopping on validation MRR@10.
//! 3. [`geometry`] — popularity direction, projection/popularity
//!    correlation, per-user preference directions, gradient alignment.
//! 4. [`ddc`] — per-user scalar corrections along the popularity and
//!    preference axes over frozen embeddings, plus the ablation rule grid.
//! 5. [`metrics`] — filtered full-ranking top-K evaluation
//!    (Recall/NDCG/MRR/MAP@K, AvgPop@K).

pub mod dataset;
pub mod ddc;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod seeding;
pub mod trainer;

pub use error::{CoreError, Result};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::dataset::{Interaction, InteractionDataset};

    /// Train-only dataset over explicit (user, item) edges.
    pub fn dataset_from_edges(
        num_users: usize,
        num_items: usize,
        edges: &[(usize, usize)],
    ) -> InteractionDataset {
        InteractionDataset::from_parts(
            (0..num_users).map(|u| format!("u{u}")).collect(),
            (0..num_items).map(|i| format!("i{i}")).collect(),
            edges.iter().map(|&(u, i)| Interaction::new(u, i)).collect(),
            vec![],
            vec![],
        )
        .unwrap()
    }
}
