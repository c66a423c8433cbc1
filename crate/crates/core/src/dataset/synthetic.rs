//! Synthetic popularity-skewed interaction corpora.
//!
//! Item popularity follows a Zipf-Mandelbrot law over item index (item 0
//! most popular). Preference structure comes from strided clusters
//! (`item % num_clusters`): each user has a home cluster plus a pool of
//! `pool_width` adjacent clusters, and samples their interactions
//! Zipf-weighted within that pool (a `niche_fraction` of the draws from the
//! home cluster alone). Striding keeps every cluster's mass spread evenly
//! across the popularity spectrum, so the aggregate popularity marginal
//! stays Zipf-like and a zero-exponent draw stays near-uniform, while every
//! interaction carries a recoverable preference signal: users consume the
//! popular items of their own pool, never the equally popular items of
//! other pools.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::seeding::{derive_seed, tags};

use super::{Interaction, UnsplitDataset};

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub num_users: usize,
    pub num_items: usize,
    /// Distinct items drawn per user.
    pub interactions_per_user: usize,
    /// Skew of the global popularity law; 0 = near-uniform.
    pub zipf_exponent: f64,
    pub seed: u64,
    /// Fraction of each user's draws taken from their home cluster alone.
    pub niche_fraction: f64,
    pub num_clusters: usize,
    /// How many adjacent clusters form a user's preference pool.
    pub pool_width: usize,
    /// Zipf-Mandelbrot rank offset: item weight (rank + 1 + offset)^-s.
    /// A positive offset widens the popular zone so that popular items stay
    /// short of universal saturation.
    pub zipf_offset: f64,
}

impl SyntheticConfig {
    pub fn new(
        num_users: usize,
        num_items: usize,
        zipf_exponent: f64,
        interactions_per_user: usize,
        seed: u64,
    ) -> Self {
        Self {
            num_users,
            num_items,
            interactions_per_user,
            zipf_exponent,
            seed,
            niche_fraction: 0.35,
            num_clusters: 21,
            pool_width: 21,
            zipf_offset: 10.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_users == 0 || self.num_items == 0 || self.interactions_per_user == 0 {
            return Err(CoreError::InvalidConfig(
                "synthetic dataset dimensions must be positive".into(),
            ));
        }
        if self.interactions_per_user > self.num_items {
            return Err(CoreError::InvalidConfig(format!(
                "interactions_per_user ({}) exceeds num_items ({})",
                self.interactions_per_user, self.num_items
            )));
        }
        if !(0.0..=1.0).contains(&self.niche_fraction) {
            return Err(CoreError::InvalidConfig(
                "niche_fraction must be in [0,1]".into(),
            ));
        }
        if self.num_clusters == 0 || self.num_clusters > self.num_items {
            return Err(CoreError::InvalidConfig(
                "num_clusters must be in [1, num_items]".into(),
            ));
        }
        if self.pool_width == 0 || self.pool_width > self.num_clusters {
            return Err(CoreError::InvalidConfig(
                "pool_width must be in [1, num_clusters]".into(),
            ));
        }
        if self.zipf_exponent < 0.0 || !self.zipf_exponent.is_finite() {
            return Err(CoreError::InvalidConfig(
                "zipf_exponent must be >= 0".into(),
            ));
        }
        if self.zipf_offset < 0.0 || !self.zipf_offset.is_finite() {
            return Err(CoreError::InvalidConfig("zipf_offset must be >= 0".into()));
        }
        Ok(())
    }
}

/// Zipf-Mandelbrot weight of one item index.
fn item_weight(cfg: &SyntheticConfig, item: usize) -> f64 {
    ((item + 1) as f64 + cfg.zipf_offset).powf(-cfg.zipf_exponent)
}

/// Weighted sampling support over a fixed item set.
struct WeightedSet {
    items: Vec<usize>,
    cdf: Vec<f64>,
}

impl WeightedSet {
    fn new(cfg: &SyntheticConfig, items: Vec<usize>) -> Self {
        let mut cdf = Vec::with_capacity(items.len());
        let mut acc = 0.0;
        for &i in &items {
            acc += item_weight(cfg, i);
            cdf.push(acc);
        }
        Self { items, cdf }
    }

    fn total(&self) -> f64 {
        *self.cdf.last().expect("nonempty set")
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let x = rng.random_range(0.0..self.total());
        self.items[self.cdf.partition_point(|&c| c <= x)]
    }
}

/// Generate a deterministic synthetic corpus; see module docs.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<UnsplitDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, tags::SYNTHETIC));

    // Strided clusters with per-cluster Zipf-Mandelbrot sampling support.
    let clusters: Vec<WeightedSet> = (0..cfg.num_clusters)
        .map(|c| {
            let items = (c..cfg.num_items).step_by(cfg.num_clusters).collect();
            WeightedSet::new(cfg, items)
        })
        .collect();
    let min_pool: usize = {
        let mut sizes: Vec<usize> = clusters.iter().map(|c| c.items.len()).collect();
        sizes.sort_unstable();
        sizes[..cfg.pool_width.min(sizes.len())].iter().sum()
    };
    if cfg.interactions_per_user > min_pool {
        return Err(CoreError::InvalidConfig(format!(
            "interactions_per_user ({}) exceeds the preference pool size ({min_pool})",
            cfg.interactions_per_user
        )));
    }

    let mut interactions = Vec::with_capacity(cfg.num_users * cfg.interactions_per_user);
    let mut held = vec![false; cfg.num_items];

    for u in 0..cfg.num_users {
        let home = rng.random_range(0..cfg.num_clusters);
        let pool: Vec<&WeightedSet> = (0..cfg.pool_width)
            .map(|k| &clusters[(home + k) % cfg.num_clusters])
            .collect();
        let pool_cdf: Vec<f64> = pool
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.total();
                Some(*acc)
            })
            .collect();
        let pool_total = *pool_cdf.last().expect("pool nonempty");

        let n = cfg.interactions_per_user;
        let n_niche =
            ((cfg.niche_fraction * n as f64).round() as usize).min(clusters[home].items.len());

        let mut drawn: Vec<usize> = Vec::with_capacity(n);
        while drawn.len() < n_niche {
            let item = clusters[home].draw(&mut rng);
            if !held[item] {
                held[item] = true;
                drawn.push(item);
            }
        }
        while drawn.len() < n {
            let x = rng.random_range(0.0..pool_total);
            let item = pool[pool_cdf.partition_point(|&c| c <= x)].draw(&mut rng);
            if !held[item] {
                held[item] = true;
                drawn.push(item);
            }
        }
        for &item in &drawn {
            held[item] = false;
            interactions.push(Interaction::new(u, item));
        }
    }

    Ok(UnsplitDataset {
        user_ids: (0..cfg.num_users).map(|u| format!("u{u}")).collect(),
        item_ids: (0..cfg.num_items).map(|i| format!("i{i}")).collect(),
        interactions,
    })
}
