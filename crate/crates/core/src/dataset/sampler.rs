//! BPR triplet sampling: one (user, positive, negative) triple per train
//! interaction per epoch, negatives drawn uniformly over non-interacted items
//! by rejection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::InteractionDataset;

/// A BPR training instance: `pos` is interacted, `neg` is not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub user: usize,
    pub pos: usize,
    pub neg: usize,
}

/// Draw one negative item for `user`, uniform over items outside the train
/// history. Returns `None` when the history covers the whole catalog.
pub fn sample_negative<R: Rng>(ds: &InteractionDataset, user: usize, rng: &mut R) -> Option<usize> {
    if ds.user_hist(user).len() >= ds.num_items() {
        return None;
    }
    loop {
        let j = rng.random_range(0..ds.num_items());
        if !ds.in_train(user, j) {
            return Some(j);
        }
    }
}

/// One epoch of triplets: every train interaction once, in shuffled order,
/// paired with a fresh uniform negative. Deterministic under `seed`.
/// Users whose history covers the whole catalog are skipped.
pub fn sample_triplets(ds: &InteractionDataset, seed: u64) -> Vec<Triplet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = ds.train();
    let mut order: Vec<usize> = (0..train.len()).collect();
    // Fisher-Yates, driven by the same stream as the negative draws.
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut triplets = Vec::with_capacity(train.len());
    for idx in order {
        let it = train[idx];
        if let Some(neg) = sample_negative(ds, it.user, &mut rng) {
            triplets.push(Triplet {
                user: it.user,
                pos: it.item,
                neg,
            });
        }
    }
    triplets
}
