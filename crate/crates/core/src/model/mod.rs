//! Embedding tables and the two scoring backbones: plain dot-product MF and
//! LightGCN-style linear propagation over the normalized interaction graph.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CoreError, Result};
use crate::seeding::{derive_seed, tags};

mod adjacency;
mod io;

pub use adjacency::{build_normalized_adjacency, NormalizedAdjacency};
pub use io::{load_embeddings, save_embeddings, EmbeddingHeader};

/// Scoring backbone family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackboneKind {
    Mf,
    LightGcn,
}

impl BackboneKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackboneKind::Mf => "mf",
            BackboneKind::LightGcn => "lightgcn",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mf" => Ok(BackboneKind::Mf),
            "lightgcn" => Ok(BackboneKind::LightGcn),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown backbone {other:?}"
            ))),
        }
    }
}

/// Backbone selection plus LightGCN propagation depth and layer weights.
#[derive(Debug, Clone)]
pub struct BackboneConfig {
    pub kind: BackboneKind,
    /// Propagation layers K (LightGCN only; ignored for MF).
    pub num_layers: usize,
    /// K+1 nonnegative weights summing to 1; `None` = uniform 1/(K+1).
    pub layer_weights: Option<Vec<f64>>,
}

impl BackboneConfig {
    pub fn mf() -> Self {
        Self {
            kind: BackboneKind::Mf,
            num_layers: 0,
            layer_weights: None,
        }
    }

    pub fn lightgcn(num_layers: usize) -> Self {
        Self {
            kind: BackboneKind::LightGcn,
            num_layers,
            layer_weights: None,
        }
    }

    /// Resolve the layer combination weights, validating the invariants.
    pub fn resolved_weights(&self) -> Result<Vec<f64>> {
        match &self.layer_weights {
            None => {
                let k = self.num_layers + 1;
                Ok(vec![1.0 / k as f64; k])
            }
            Some(w) => {
                if w.len() != self.num_layers + 1 {
                    return Err(CoreError::InvalidConfig(format!(
                        "expected {} layer weights, got {}",
                        self.num_layers + 1,
                        w.len()
                    )));
                }
                if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                    return Err(CoreError::InvalidConfig(
                        "layer weights must be nonnegative".into(),
                    ));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(CoreError::InvalidConfig(format!(
                        "layer weights must sum to 1, got {sum}"
                    )));
                }
                Ok(w.clone())
            }
        }
    }
}

/// Dense user and item embedding matrices; the single trainable state of all
/// backbones. Only the trainer mutates a table, under a single-writer
/// contract; all other access is read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    users: Array2<f64>,
    items: Array2<f64>,
}

impl EmbeddingTable {
    /// i.i.d. normal(0, scale) initialization, deterministic under `seed`.
    pub fn init(num_users: usize, num_items: usize, dim: usize, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::INIT));
        let normal = Normal::new(0.0, scale.max(0.0)).expect("finite scale");
        let mut fill = |rows: usize| {
            Array2::from_shape_fn((rows, dim), |_| {
                if scale == 0.0 {
                    0.0
                } else {
                    normal.sample(&mut rng)
                }
            })
        };
        let users = fill(num_users);
        let items = fill(num_items);
        Self { users, items }
    }

    pub fn from_arrays(users: Array2<f64>, items: Array2<f64>) -> Result<Self> {
        if users.ncols() != items.ncols() {
            return Err(CoreError::DimensionMismatch(format!(
                "user dim {} != item dim {}",
                users.ncols(),
                items.ncols()
            )));
        }
        Ok(Self { users, items })
    }

    pub fn num_users(&self) -> usize {
        self.users.nrows()
    }

    pub fn num_items(&self) -> usize {
        self.items.nrows()
    }

    pub fn dim(&self) -> usize {
        self.users.ncols()
    }

    pub fn users(&self) -> ArrayView2<'_, f64> {
        self.users.view()
    }

    pub fn items(&self) -> ArrayView2<'_, f64> {
        self.items.view()
    }

    pub fn user(&self, u: usize) -> ArrayView1<'_, f64> {
        self.users.row(u)
    }

    pub fn item(&self, i: usize) -> ArrayView1<'_, f64> {
        self.items.row(i)
    }

    pub fn users_mut(&mut self) -> &mut Array2<f64> {
        &mut self.users
    }

    pub fn items_mut(&mut self) -> &mut Array2<f64> {
        &mut self.items
    }

    /// Preference score: inner product of the two embeddings. For LightGCN
    /// the table must already be the propagated final table.
    pub fn score(&self, u: usize, i: usize) -> f64 {
        self.users.row(u).dot(&self.items.row(i))
    }

    /// Scores of one user against every item; `score(u, i) == score_row(u)[i]`.
    pub fn score_row(&self, u: usize) -> Array1<f64> {
        self.items.dot(&self.users.row(u))
    }

    pub fn all_finite(&self) -> bool {
        self.users.iter().all(|x| x.is_finite()) && self.items.iter().all(|x| x.is_finite())
    }

    /// Order-sensitive digest of the raw bits; two tables compare equal iff
    /// their digests do (used to assert frozen tables stay untouched).
    pub fn digest(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64; // FNV-1a offset basis
        let mut eat = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        self.users.iter().for_each(|&x| eat(x));
        self.items.iter().for_each(|&x| eat(x));
        h
    }
}

/// LightGCN layer propagation: repeatedly apply the normalized adjacency and
/// combine layers with the configured weights. `table0` is left unmodified;
/// K=0 with unit weight returns a copy of the input.
pub fn propagate(
    table0: &EmbeddingTable,
    adj: &NormalizedAdjacency,
    cfg: &BackboneConfig,
) -> Result<EmbeddingTable> {
    let weights = cfg.resolved_weights()?;
    if adj.num_users() != table0.num_users() || adj.num_items() != table0.num_items() {
        return Err(CoreError::DimensionMismatch(format!(
            "adjacency {}x{} vs table {}x{}",
            adj.num_users(),
            adj.num_items(),
            table0.num_users(),
            table0.num_items()
        )));
    }
    let stacked = stack_tables(table0);
    let combined = adj.propagate_matrix(&stacked, &weights);
    Ok(unstack_tables(&combined, table0.num_users()))
}

pub(crate) fn stack_tables(table: &EmbeddingTable) -> Array2<f64> {
    let (nu, ni, d) = (table.num_users(), table.num_items(), table.dim());
    let mut out = Array2::zeros((nu + ni, d));
    out.slice_mut(ndarray::s![..nu, ..]).assign(&table.users);
    out.slice_mut(ndarray::s![nu.., ..]).assign(&table.items);
    out
}

pub(crate) fn unstack_tables(stacked: &Array2<f64>, num_users: usize) -> EmbeddingTable {
    EmbeddingTable {
        users: stacked.slice(ndarray::s![..num_users, ..]).to_owned(),
        items: stacked.slice(ndarray::s![num_users.., ..]).to_owned(),
    }
}
