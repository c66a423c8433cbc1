//! Embedding-space geometry of popularity: the global popularity direction,
//! per-item projections and their correlation with interaction counts,
//! per-user preference directions, and gradient-alignment diagnostics.

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{sample_negative, InteractionDataset};
use crate::error::{CoreError, Result};
use crate::model::EmbeddingTable;
use crate::seeding::{derive_seed, tags};
use crate::trainer::sigmoid;

/// A unit-norm vector in embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionVector(Array1<f64>);

impl DirectionVector {
    /// Normalize `v`; errors when its norm is below 1e-12.
    pub fn new(v: Array1<f64>) -> Result<Self> {
        let norm = v.dot(&v).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(CoreError::DegenerateGeometry(format!(
                "cannot normalize vector with norm {norm:e}"
            )));
        }
        Ok(Self(v / norm))
    }

    pub fn as_view(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn dot(&self, other: ArrayView1<'_, f64>) -> f64 {
        self.0.dot(&other)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Per-item projections onto the popularity direction and their Pearson
/// correlation with popularity counts.
#[derive(Debug, Clone)]
pub struct GeometryReport {
    /// `p_i = e_i . e_pop` for every item.
    pub projections: Vec<f64>,
    pub pearson_r: f64,
    pub rho: f64,
    pub head_size: usize,
    pub tail_size: usize,
}

/// Head/tail item sets by popularity: top and bottom `max(1, floor(rho*n))`
/// items, ties broken by ascending item id.
fn head_tail_items(pop: &[u32], rho: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=0.5).contains(&rho) || rho <= 0.0 {
        return Err(CoreError::InvalidConfig(format!(
            "head/tail ratio must be in (0, 0.5], got {rho}"
        )));
    }
    let n = pop.len();
    if n == 0 {
        return Err(CoreError::EmptyDataset);
    }
    let size = ((rho * n as f64).floor() as usize).max(1);
    let mut by_desc: Vec<usize> = (0..n).collect();
    by_desc.sort_by(|&a, &b| pop[b].cmp(&pop[a]).then(a.cmp(&b)));
    let head = by_desc[..size].to_vec();
    let mut by_asc: Vec<usize> = (0..n).collect();
    by_asc.sort_by(|&a, &b| pop[a].cmp(&pop[b]).then(a.cmp(&b)));
    let tail = by_asc[..size].to_vec();
    Ok((head, tail))
}

/// The popularity direction: normalized difference between the centroids of
/// the head and tail item sets.
pub fn popularity_direction(
    items: ArrayView2<'_, f64>,
    pop: &[u32],
    rho: f64,
) -> Result<DirectionVector> {
    if items.nrows() != pop.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "{} item rows vs {} popularity counts",
            items.nrows(),
            pop.len()
        )));
    }
    let (head, tail) = head_tail_items(pop, rho)?;
    let centroid = |ids: &[usize]| -> Array1<f64> {
        let mut c = Array1::zeros(items.ncols());
        for &i in ids {
            c += &items.row(i);
        }
        c / ids.len() as f64
    };
    let v_diff = centroid(&head) - centroid(&tail);
    DirectionVector::new(v_diff)
}

/// Pearson correlation between item popularity and projection onto `e_pop`.
pub fn projection_correlation(
    items: ArrayView2<'_, f64>,
    pop: &[u32],
    e_pop: &DirectionVector,
    rho: f64,
) -> Result<GeometryReport> {
    if items.nrows() != pop.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "{} item rows vs {} popularity counts",
            items.nrows(),
            pop.len()
        )));
    }
    if pop.len() < 2 {
        return Err(CoreError::UndefinedCorrelation(
            "need at least 2 items".into(),
        ));
    }
    let projections: Vec<f64> = (0..items.nrows())
        .map(|i| e_pop.dot(items.row(i)))
        .collect();
    let pops: Vec<f64> = pop.iter().map(|&p| p as f64).collect();
    let pearson_r = pearson(&pops, &projections)?;
    let (head, tail) = head_tail_items(pop, rho)?;
    Ok(GeometryReport {
        projections,
        pearson_r,
        rho,
        head_size: head.len(),
        tail_size: tail.len(),
    })
}

/// Plain Pearson correlation; errors when either series has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(CoreError::UndefinedCorrelation(
            "series must have equal length >= 2".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(CoreError::UndefinedCorrelation(
            "zero variance series".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// A user's preference direction: normalized sum of the embeddings of the
/// top `ceil(k * |history|)` history items by pretrained score, ties broken
/// by ascending item id. Falls back to the single top-scored item when the
/// sum degenerates.
pub fn preference_direction(
    user_vec: ArrayView1<'_, f64>,
    hist: &[usize],
    items: ArrayView2<'_, f64>,
    k: f64,
) -> Result<DirectionVector> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(CoreError::InvalidConfig(format!(
            "preference fraction must be in (0, 1], got {k}"
        )));
    }
    if hist.is_empty() {
        return Err(CoreError::InvalidConfig(
            "preference direction needs a nonempty history".into(),
        ));
    }
    let take = ((k * hist.len() as f64).ceil() as usize).clamp(1, hist.len());
    let mut scored: Vec<usize> = hist.to_vec();
    scored.sort_by(|&a, &b| {
        let sa = user_vec.dot(&items.row(a));
        let sb = user_vec.dot(&items.row(b));
        sb.total_cmp(&sa).then(a.cmp(&b))
    });
    let top = &scored[..take];
    let mut sum = Array1::zeros(items.ncols());
    for &i in top {
        sum += &items.row(i);
    }
    DirectionVector::new(sum).or_else(|_| DirectionVector::new(items.row(top[0]).to_owned()))
}

/// Preference directions for every user of the dataset from a frozen table.
pub fn preference_directions(
    table: &EmbeddingTable,
    ds: &InteractionDataset,
    k: f64,
) -> Result<Vec<DirectionVector>> {
    (0..ds.num_users())
        .map(|u| preference_direction(table.user(u), ds.user_hist(u), table.items(), k))
        .collect()
}

/// The ideal update direction for a user: normalized difference between the
/// centroid of their positive items and the centroid of all non-interacted
/// items.
pub fn ideal_update_direction(
    user: usize,
    ds: &InteractionDataset,
    items: ArrayView2<'_, f64>,
) -> Result<DirectionVector> {
    let hist = ds.user_hist(user);
    if hist.is_empty() {
        return Err(CoreError::InvalidConfig(format!(
            "user {user} has no train items"
        )));
    }
    if hist.len() >= ds.num_items() {
        return Err(CoreError::InvalidConfig(format!(
            "user {user} has no non-interacted items"
        )));
    }
    let d = items.ncols();
    let mut pos = Array1::zeros(d);
    for &i in hist {
        pos += &items.row(i);
    }
    pos /= hist.len() as f64;
    let mut neg = Array1::zeros(d);
    let mut count = 0usize;
    for j in 0..ds.num_items() {
        if hist.binary_search(&j).is_err() {
            neg += &items.row(j);
            count += 1;
        }
    }
    neg /= count as f64;
    DirectionVector::new(pos - neg)
}

/// Cosine between the negated Monte Carlo estimate of the expected BPR
/// gradient for one user and their ideal update direction. `None` when the
/// gradient estimate has zero norm.
pub fn gradient_alignment(
    user: usize,
    ds: &InteractionDataset,
    table: &EmbeddingTable,
    num_pairs: usize,
    seed: u64,
) -> Result<Option<f64>> {
    let ideal = ideal_update_direction(user, ds, table.items())?;
    let hist = ds.user_hist(user);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::ALIGNMENT) ^ user as u64);
    let e_u = table.user(user);
    let d = table.dim();
    let mut grad = Array1::zeros(d);
    for _ in 0..num_pairs.max(1) {
        let i = hist[rng.random_range(0..hist.len())];
        let Some(j) = sample_negative(ds, user, &mut rng) else {
            return Ok(None);
        };
        let e_i = table.item(i);
        let e_j = table.item(j);
        let margin = e_u.dot(&e_i) - e_u.dot(&e_j);
        let w = sigmoid(-margin);
        // Negated gradient contribution: +w (e_i - e_j).
        grad.scaled_add(w, &e_i);
        grad.scaled_add(-w, &e_j);
    }
    grad /= num_pairs.max(1) as f64;
    let norm = grad.dot(&grad).sqrt();
    if norm < 1e-12 {
        return Ok(None);
    }
    Ok(Some(ideal.dot(grad.view()) / norm))
}

/// Pack directions into the embedding-dump layout: user rows are the
/// per-user preference directions, the single item row is the popularity
/// direction.
pub fn directions_table(
    e_pop: &DirectionVector,
    e_pref: &[DirectionVector],
) -> Result<EmbeddingTable> {
    let d = e_pop.dim();
    if e_pref.iter().any(|p| p.dim() != d) {
        return Err(CoreError::DimensionMismatch(
            "preference directions must match e_pop dimension".into(),
        ));
    }
    let users = ndarray::Array2::from_shape_fn((e_pref.len(), d), |(u, c)| e_pref[u].as_view()[c]);
    let items = ndarray::Array2::from_shape_fn((1, d), |(_, c)| e_pop.as_view()[c]);
    EmbeddingTable::from_arrays(users, items)
}

/// Mean gradient alignment over all users with a defined estimate.
/// Returns the mean and the number of users counted.
pub fn mean_gradient_alignment(
    ds: &InteractionDataset,
    table: &EmbeddingTable,
    num_pairs: usize,
    seed: u64,
) -> Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for u in 0..ds.num_users() {
        if ds.user_hist(u).is_empty() || ds.user_hist(u).len() >= ds.num_items() {
            continue;
        }
        if let Some(c) = gradient_alignment(u, ds, table, num_pairs, seed)? {
            sum += c;
            count += 1;
        }
    }
    if count == 0 {
        return Err(CoreError::UndefinedCorrelation(
            "no user had a defined alignment".into(),
        ));
    }
    Ok((sum / count as f64, count))
}
