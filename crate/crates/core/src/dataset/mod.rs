//! Implicit-feedback interaction data: ingestion, k-core filtering,
//! per-user holdout splitting, and popularity bookkeeping.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::seeding::{derive_seed, tags};

mod sampler;
mod synthetic;

pub use sampler::{sample_negative, sample_triplets, Triplet};
pub use synthetic::{generate_synthetic, SyntheticConfig};

/// A single observed user-item interaction, in dense index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interaction {
    pub user: usize,
    pub item: usize,
}

impl Interaction {
    pub fn new(user: usize, item: usize) -> Self {
        Self { user, item }
    }
}

/// Which holdout split to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Valid,
    Test,
}

/// Interactions after id remapping but before splitting.
///
/// Raw string ids are remapped to dense 0-based indices in first-appearance
/// order; the mapping is retained so reports can refer back to raw ids.
#[derive(Debug, Clone)]
pub struct UnsplitDataset {
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// Deduplicated, in first-appearance order.
    pub interactions: Vec<Interaction>,
}

impl UnsplitDataset {
    pub fn num_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_ids.len()
    }
}

/// Fraction of interactions assigned to each split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self> {
        let r = Self { train, valid, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.valid, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(CoreError::InvalidRatios(format!(
                "all ratios must be positive, got {:?}",
                parts
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidRatios(format!(
                "ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

/// A fully split dataset with popularity counts and per-user histories.
///
/// Immutable after construction; all accessors are read-only and the type is
/// safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct InteractionDataset {
    num_users: usize,
    num_items: usize,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    train: Vec<Interaction>,
    valid: Vec<Interaction>,
    test: Vec<Interaction>,
    /// Per-item interaction count over the train split.
    pop: Vec<u32>,
    /// Per-user sorted train item ids.
    user_hist: Vec<Vec<usize>>,
    /// Per-item sorted train user ids.
    item_users: Vec<Vec<usize>>,
    valid_hist: Vec<Vec<usize>>,
    test_hist: Vec<Vec<usize>>,
}

impl InteractionDataset {
    /// Build from explicit split parts, validating every dataset invariant:
    /// index bounds, no duplicates within a split, pairwise disjoint splits,
    /// and train coverage of every user/item appearing in valid/test.
    pub fn from_parts(
        user_ids: Vec<String>,
        item_ids: Vec<String>,
        train: Vec<Interaction>,
        valid: Vec<Interaction>,
        test: Vec<Interaction>,
    ) -> Result<Self> {
        let num_users = user_ids.len();
        let num_items = item_ids.len();
        if train.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        for (name, split) in [("train", &train), ("valid", &valid), ("test", &test)] {
            let mut seen = HashSet::with_capacity(split.len());
            for it in split.iter() {
                if it.user >= num_users || it.item >= num_items {
                    return Err(CoreError::IndexOutOfRange(format!(
                        "{name} interaction ({}, {}) outside {}x{}",
                        it.user, it.item, num_users, num_items
                    )));
                }
                if !seen.insert(*it) {
                    return Err(CoreError::Format(format!(
                        "duplicate interaction ({}, {}) in {name} split",
                        it.user, it.item
                    )));
                }
            }
        }
        let train_set: HashSet<Interaction> = train.iter().copied().collect();
        for (name, split) in [("valid", &valid), ("test", &test)] {
            if split.iter().any(|it| train_set.contains(it)) {
                return Err(CoreError::Format(format!("{name} overlaps train")));
            }
        }
        if valid.iter().any(|it| test.contains(it)) {
            return Err(CoreError::Format("valid overlaps test".into()));
        }

        let mut pop = vec![0u32; num_items];
        let mut user_hist = vec![Vec::new(); num_users];
        let mut item_users = vec![Vec::new(); num_items];
        for it in &train {
            pop[it.item] += 1;
            user_hist[it.user].push(it.item);
            item_users[it.item].push(it.user);
        }
        user_hist.iter_mut().for_each(|h| h.sort_unstable());
        item_users.iter_mut().for_each(|h| h.sort_unstable());

        let mut valid_hist = vec![Vec::new(); num_users];
        let mut test_hist = vec![Vec::new(); num_users];
        for it in &valid {
            if user_hist[it.user].is_empty() || pop[it.item] == 0 {
                return Err(CoreError::Format(format!(
                    "valid interaction ({}, {}) references user/item absent from train",
                    it.user, it.item
                )));
            }
            valid_hist[it.user].push(it.item);
        }
        for it in &test {
            if user_hist[it.user].is_empty() || pop[it.item] == 0 {
                return Err(CoreError::Format(format!(
                    "test interaction ({}, {}) references user/item absent from train",
                    it.user, it.item
                )));
            }
            test_hist[it.user].push(it.item);
        }
        valid_hist.iter_mut().for_each(|h| h.sort_unstable());
        test_hist.iter_mut().for_each(|h| h.sort_unstable());

        Ok(Self {
            num_users,
            num_items,
            user_ids,
            item_ids,
            train,
            valid,
            test,
            pop,
            user_hist,
            item_users,
            valid_hist,
            test_hist,
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn train(&self) -> &[Interaction] {
        &self.train
    }

    pub fn valid(&self) -> &[Interaction] {
        &self.valid
    }

    pub fn test(&self) -> &[Interaction] {
        &self.test
    }

    pub fn split(&self, split: Split) -> &[Interaction] {
        match split {
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    /// Train-split interaction count per item (`Pop(i)`).
    pub fn pop(&self) -> &[u32] {
        &self.pop
    }

    /// Sorted train item ids for one user.
    pub fn user_hist(&self, user: usize) -> &[usize] {
        &self.user_hist[user]
    }

    /// Sorted train user ids for one item.
    pub fn item_users(&self, item: usize) -> &[usize] {
        &self.item_users[item]
    }

    /// Sorted holdout item ids for one user.
    pub fn split_hist(&self, split: Split, user: usize) -> &[usize] {
        match split {
            Split::Valid => &self.valid_hist[user],
            Split::Test => &self.test_hist[user],
        }
    }

    /// True if `(user, item)` is a train interaction.
    pub fn in_train(&self, user: usize, item: usize) -> bool {
        self.user_hist[user].binary_search(&item).is_ok()
    }

    /// Users whose train history covers the whole catalog; negative sampling
    /// has no candidates for them.
    pub fn degenerate_users(&self) -> Vec<usize> {
        (0..self.num_users)
            .filter(|&u| self.user_hist[u].len() == self.num_items)
            .collect()
    }
}

/// Load a TSV of `user<TAB>item[<TAB>ignored...]` lines.
///
/// Raw ids are arbitrary strings, remapped to dense indices in
/// first-appearance order. Duplicate pairs collapse to one interaction.
pub fn load_interactions(path: &Path) -> Result<UnsplitDataset> {
    let content = std::fs::read_to_string(path)?;
    parse_interactions(&content)
}

/// Parse TSV content; see [`load_interactions`].
pub fn parse_interactions(content: &str) -> Result<UnsplitDataset> {
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut item_index: HashMap<String, usize> = HashMap::new();
    let mut user_ids = Vec::new();
    let mut item_ids = Vec::new();
    let mut seen = HashSet::new();
    let mut interactions = Vec::new();

    for (lineno, line) in content.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (raw_user, raw_item) = match (fields.next(), fields.next()) {
            (Some(u), Some(i)) if !u.is_empty() && !i.is_empty() => (u, i),
            _ => {
                return Err(CoreError::Parse {
                    line: lineno + 1,
                    msg: format!("expected `user<TAB>item`, got {line:?}"),
                })
            }
        };
        let user = *user_index.entry(raw_user.to_string()).or_insert_with(|| {
            user_ids.push(raw_user.to_string());
            user_ids.len() - 1
        });
        let item = *item_index.entry(raw_item.to_string()).or_insert_with(|| {
            item_ids.push(raw_item.to_string());
            item_ids.len() - 1
        });
        if seen.insert((user, item)) {
            interactions.push(Interaction::new(user, item));
        }
    }

    if interactions.is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    Ok(UnsplitDataset {
        user_ids,
        item_ids,
        interactions,
    })
}

/// Iteratively remove users and items with degree < k until every surviving
/// node has degree >= k, then re-densify indices.
///
/// The output is a fixed point: re-applying with the same k changes nothing.
pub fn k_core_filter(ds: &UnsplitDataset, k: usize) -> Result<UnsplitDataset> {
    if k == 0 {
        return Err(CoreError::InvalidConfig("k-core level must be >= 1".into()));
    }
    let mut user_deg = vec![0usize; ds.num_users()];
    let mut item_deg = vec![0usize; ds.num_items()];
    for it in &ds.interactions {
        user_deg[it.user] += 1;
        item_deg[it.item] += 1;
    }
    let mut user_alive = vec![true; ds.num_users()];
    let mut item_alive = vec![true; ds.num_items()];

    loop {
        let mut changed = false;
        for u in 0..user_deg.len() {
            if user_alive[u] && user_deg[u] < k {
                user_alive[u] = false;
                changed = true;
            }
        }
        for i in 0..item_deg.len() {
            if item_alive[i] && item_deg[i] < k {
                item_alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        // Recount degrees over surviving interactions.
        user_deg.iter_mut().for_each(|d| *d = 0);
        item_deg.iter_mut().for_each(|d| *d = 0);
        for it in &ds.interactions {
            if user_alive[it.user] && item_alive[it.item] {
                user_deg[it.user] += 1;
                item_deg[it.item] += 1;
            }
        }
    }

    let survivors: Vec<Interaction> = ds
        .interactions
        .iter()
        .copied()
        .filter(|it| user_alive[it.user] && item_alive[it.item])
        .collect();
    if survivors.is_empty() {
        return Err(CoreError::KCoreEliminated { k });
    }

    Ok(redensify(ds, &survivors))
}

/// Re-densify indices over the given interactions in first-appearance order.
fn redensify(ds: &UnsplitDataset, interactions: &[Interaction]) -> UnsplitDataset {
    let mut user_map: HashMap<usize, usize> = HashMap::new();
    let mut item_map: HashMap<usize, usize> = HashMap::new();
    let mut user_ids = Vec::new();
    let mut item_ids = Vec::new();
    let remapped = interactions
        .iter()
        .map(|it| {
            let u = *user_map.entry(it.user).or_insert_with(|| {
                user_ids.push(ds.user_ids[it.user].clone());
                user_ids.len() - 1
            });
            let i = *item_map.entry(it.item).or_insert_with(|| {
                item_ids.push(ds.item_ids[it.item].clone());
                item_ids.len() - 1
            });
            Interaction::new(u, i)
        })
        .collect();
    UnsplitDataset {
        user_ids,
        item_ids,
        interactions: remapped,
    }
}

/// Per-user random holdout split.
///
/// Each user's items are shuffled and partitioned as
/// `floor(n*valid) / floor(n*test) / rest`, with at least one train item per
/// user. Users and items that end up absent from train are dropped and
/// indices re-densified. Deterministic under `seed`.
pub fn split(ds: &UnsplitDataset, ratios: SplitRatios, seed: u64) -> Result<InteractionDataset> {
    ratios.validate()?;
    if ds.interactions.is_empty() {
        return Err(CoreError::EmptyDataset);
    }

    let mut per_user: Vec<Vec<usize>> = vec![Vec::new(); ds.num_users()];
    for it in &ds.interactions {
        per_user[it.user].push(it.item);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::SPLIT));
    let mut train = Vec::new();
    let mut valid = Vec::new();
    let mut test = Vec::new();

    for (u, items) in per_user.iter_mut().enumerate() {
        if items.is_empty() {
            continue;
        }
        items.sort_unstable();
        items.shuffle(&mut rng);
        let n = items.len();
        let mut n_valid = (n as f64 * ratios.valid).floor() as usize;
        let mut n_test = (n as f64 * ratios.test).floor() as usize;
        // Keep at least one train item per user.
        while n_valid + n_test >= n {
            if n_valid >= n_test && n_valid > 0 {
                n_valid -= 1;
            } else if n_test > 0 {
                n_test -= 1;
            } else {
                break;
            }
        }
        let n_train = n - n_valid - n_test;
        for (idx, &item) in items.iter().enumerate() {
            let it = Interaction::new(u, item);
            if idx < n_train {
                train.push(it);
            } else if idx < n_train + n_valid {
                valid.push(it);
            } else {
                test.push(it);
            }
        }
    }

    if train.is_empty() {
        return Err(CoreError::EmptyDataset);
    }

    // Drop users/items absent from train, re-densify ascending.
    let mut user_seen = vec![false; ds.num_users()];
    let mut item_seen = vec![false; ds.num_items()];
    for it in &train {
        user_seen[it.user] = true;
        item_seen[it.item] = true;
    }
    let user_map = dense_map(&user_seen);
    let item_map = dense_map(&item_seen);
    let remap = |v: Vec<Interaction>| -> Vec<Interaction> {
        v.into_iter()
            .filter_map(|it| match (user_map[it.user], item_map[it.item]) {
                (Some(u), Some(i)) => Some(Interaction::new(u, i)),
                _ => None,
            })
            .collect()
    };
    let user_ids: Vec<String> = ds
        .user_ids
        .iter()
        .zip(&user_seen)
        .filter(|(_, &s)| s)
        .map(|(id, _)| id.clone())
        .collect();
    let item_ids: Vec<String> = ds
        .item_ids
        .iter()
        .zip(&item_seen)
        .filter(|(_, &s)| s)
        .map(|(id, _)| id.clone())
        .collect();

    InteractionDataset::from_parts(user_ids, item_ids, remap(train), remap(valid), remap(test))
}

fn dense_map(seen: &[bool]) -> Vec<Option<usize>> {
    let mut next = 0usize;
    seen.iter()
        .map(|&s| {
            if s {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect()
}
