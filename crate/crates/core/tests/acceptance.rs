//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Criteria 4-8 and 10 share three seeded end-to-end pipeline runs (synthetic
//! corpus -> split -> MF-BPR to early-stopping convergence -> geometry ->
//! b_a/a_b fine-tuning -> evaluation), built once behind a `OnceLock`.

use std::sync::OnceLock;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ddc_core::dataset::{
    generate_synthetic, k_core_filter, sample_triplets, split, Interaction, InteractionDataset,
    Split, SplitRatios, SyntheticConfig, Triplet,
};
use ddc_core::ddc::{
    compose_final, ddc_gradients, ddc_loss, eval_bpr_loss, finetune, DdcParams, FinetuneConfig,
    UpdateRule,
};
use ddc_core::geometry::{
    mean_gradient_alignment, popularity_direction, preference_directions, projection_correlation,
    DirectionVector,
};
use ddc_core::metrics::{evaluate, RankingReport};
use ddc_core::model::{propagate, BackboneConfig, EmbeddingTable};
use ddc_core::trainer::{bpr_gradients, bpr_loss, train, TrainConfig};

const SEEDS: [u64; 3] = [11, 12, 13];
const EVAL_SEED: u64 = 777;

fn synthetic_config(seed: u64) -> SyntheticConfig {
    // The flagship verification corpus: 500 users x 300 items, Zipf
    // exponent 1.2, 40 interactions per user.
    SyntheticConfig::new(500, 300, 1.2, 40, seed)
}

fn train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 0.01,
        l2_lambda: 5e-3,
        batch_size: 8192,
        patience: 20,
        max_epochs: Some(400),
        seed: seed + 100,
        dim: 16,
        ..Default::default()
    }
}

fn finetune_config(seed: u64) -> FinetuneConfig {
    FinetuneConfig {
        learning_rate: 1e-2,
        batch_size: 8192,
        patience: 50,
        max_epochs: Some(600),
        seed: seed + 200,
        init_scale: 0.01,
        ..Default::default()
    }
}

struct SeedRun {
    seed: u64,
    e_pop: DirectionVector,
    pearson_r: f64,
    base_test: RankingReport,
    base_lev: f64,
    ba_params: DdcParams,
    ba_test: RankingReport,
    ba_lev: f64,
    ab_test: RankingReport,
    wo_alpha_test: RankingReport,
    wo_beta_test: RankingReport,
    mean_alignment: f64,
    digest_unchanged: bool,
}

fn build_run(seed: u64) -> SeedRun {
    let raw = generate_synthetic(&synthetic_config(seed)).expect("generator");
    let ds = split(&raw, SplitRatios::default(), seed).expect("split");

    let (baseline, trace) =
        train(&ds, &BackboneConfig::mf(), &train_config(seed)).expect("backbone training");
    assert!(
        trace.records.len() < 400,
        "backbone did not reach early-stopping convergence within the epoch cap"
    );

    let e_pop = popularity_direction(baseline.items(), ds.pop(), 0.05).expect("e_pop");
    let report =
        projection_correlation(baseline.items(), ds.pop(), &e_pop, 0.05).expect("correlation");
    let e_pref = preference_directions(&baseline, &ds, 0.3).expect("e_pref");

    let base_test = evaluate(baseline.users(), baseline.items(), &ds, Split::Test, 10).unwrap();
    let base_lev = eval_bpr_loss(baseline.users(), baseline.items(), &ds, EVAL_SEED).unwrap();

    let digest_before = baseline.digest();
    let (ba_params, _) = finetune(
        &ds,
        &baseline,
        e_pop.clone(),
        e_pref.clone(),
        UpdateRule::B_A,
        &finetune_config(seed),
    )
    .expect("b_a finetune");
    let (ab_params, _) = finetune(
        &ds,
        &baseline,
        e_pop.clone(),
        e_pref.clone(),
        UpdateRule::A_B,
        &finetune_config(seed),
    )
    .expect("a_b finetune");
    let digest_unchanged = baseline.digest() == digest_before;

    let corrected = compose_final(&baseline, &ba_params, true, true);
    let ba_test = evaluate(corrected.view(), baseline.items(), &ds, Split::Test, 10).unwrap();
    let ba_lev = eval_bpr_loss(corrected.view(), baseline.items(), &ds, EVAL_SEED).unwrap();

    let corrected_ab = compose_final(&baseline, &ab_params, true, true);
    let ab_test = evaluate(corrected_ab.view(), baseline.items(), &ds, Split::Test, 10).unwrap();

    let wo_alpha = compose_final(&baseline, &ba_params, false, true);
    let wo_alpha_test = evaluate(wo_alpha.view(), baseline.items(), &ds, Split::Test, 10).unwrap();
    let wo_beta = compose_final(&baseline, &ba_params, true, false);
    let wo_beta_test = evaluate(wo_beta.view(), baseline.items(), &ds, Split::Test, 10).unwrap();

    let (mean_alignment, _) =
        mean_gradient_alignment(&ds, &baseline, 200, seed + 500).expect("alignment");

    SeedRun {
        seed,
        e_pop,
        pearson_r: report.pearson_r,
        base_test,
        base_lev,
        ba_params,
        ba_test,
        ba_lev,
        ab_test,
        wo_alpha_test,
        wo_beta_test,
        mean_alignment,
        digest_unchanged,
    }
}

fn runs() -> &'static [SeedRun] {
    static RUNS: OnceLock<Vec<SeedRun>> = OnceLock::new();
    RUNS.get_or_init(|| SEEDS.iter().map(|&s| build_run(s)).collect())
}

fn report_line(criterion: usize, pass: bool, detail: &str) {
    println!(
        "acceptance criterion {criterion:2}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn median(values: &Array1<f64>) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-8)
}

// -------------------------------------------------------------------------
// Criterion 1: analytic gradients match central finite differences.
// -------------------------------------------------------------------------
#[test]
fn criterion_01_gradient_correctness() {
    let started = Instant::now();
    let h = 1e-5;
    let tol = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let mut checked = 0usize;

    // BPR gradients for e_u, e_i, e_j at d = 8, with and without L2.
    for case in 0..120u64 {
        let table = EmbeddingTable::init(1, 2, 8, 90_000 + case, 0.6);
        let l2 = if case % 2 == 0 { 0.0 } else { 0.1 };
        let t = Triplet {
            user: 0,
            pos: 0,
            neg: 1,
        };
        let grads = bpr_gradients(&table, &t, l2);

        let objective = |tab: &EmbeddingTable| {
            let m = tab.score(0, 0) - tab.score(0, 1);
            let mut loss = bpr_loss(m);
            if l2 > 0.0 {
                for row in [tab.user(0), tab.item(0), tab.item(1)] {
                    loss += l2 * row.dot(&row);
                }
            }
            loss
        };
        let check_row = |is_user: bool, row: usize, analytic: &Array1<f64>| {
            for c in 0..8 {
                let mut plus = table.clone();
                let mut minus = table.clone();
                if is_user {
                    plus.users_mut()[[row, c]] += h;
                    minus.users_mut()[[row, c]] -= h;
                } else {
                    plus.items_mut()[[row, c]] += h;
                    minus.items_mut()[[row, c]] -= h;
                }
                let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
                assert!(
                    rel_err(analytic[c], fd) < tol,
                    "BPR grad mismatch case {case} row ({is_user},{row},{c}): {} vs {}",
                    analytic[c],
                    fd
                );
            }
        };
        check_row(true, 0, &grads.user);
        check_row(false, 0, &grads.pos);
        check_row(false, 1, &grads.neg);
        checked += 1;
    }

    // DDC scalar gradients for every rule in the 3x3 grid.
    for case in 0..120u64 {
        let table = EmbeddingTable::init(1, 2, 8, 70_000 + case, 0.6);
        let e_pop = DirectionVector::new(Array1::from_shape_fn(8, |_| rng.random_range(-1.0..1.0)))
            .unwrap();
        let e_pref =
            DirectionVector::new(Array1::from_shape_fn(8, |_| rng.random_range(-1.0..1.0)))
                .unwrap();
        let alpha = rng.random_range(-0.8..0.8);
        let beta = rng.random_range(-0.8..0.8);
        let t = Triplet {
            user: 0,
            pos: 0,
            neg: 1,
        };
        for rule in UpdateRule::grid() {
            let params = DdcParams {
                alpha: ndarray::array![alpha],
                beta: ndarray::array![beta],
                e_pop: e_pop.clone(),
                e_pref: vec![e_pref.clone()],
            };
            let (da, db) = ddc_gradients(&table, &params, rule, &t);
            let loss_at = |a: f64, b: f64| {
                let p = DdcParams {
                    alpha: ndarray::array![a],
                    beta: ndarray::array![b],
                    e_pop: e_pop.clone(),
                    e_pref: vec![e_pref.clone()],
                };
                ddc_loss(&table, &p, rule, &t)
            };
            let fd_a = (loss_at(alpha + h, beta) - loss_at(alpha - h, beta)) / (2.0 * h);
            let fd_b = (loss_at(alpha, beta + h) - loss_at(alpha, beta - h)) / (2.0 * h);
            assert!(
                rel_err(da, fd_a) < tol && rel_err(db, fd_b) < tol,
                "DDC grad mismatch case {case} rule {}",
                rule.name()
            );
        }
        checked += 1;
    }

    let elapsed = started.elapsed().as_secs_f64();
    let pass = checked >= 200 && elapsed < 5.0;
    report_line(
        1,
        pass,
        &format!("{checked} random instances within rel 1e-4 in {elapsed:.2}s"),
    );
    assert!(pass, "gradient check too slow: {elapsed:.2}s");
}

// -------------------------------------------------------------------------
// Criterion 2: degenerate equivalences.
// -------------------------------------------------------------------------
#[test]
fn criterion_02_degenerate_equivalence() {
    // ddc_loss with zero scalars equals plain BPR loss to 1e-12.
    let mut rng = ChaCha8Rng::seed_from_u64(0xDE6E);
    let mut max_gap = 0.0f64;
    for case in 0..50u64 {
        let table = EmbeddingTable::init(1, 2, 8, 50_000 + case, 0.5);
        let params = DdcParams {
            alpha: ndarray::array![0.0],
            beta: ndarray::array![0.0],
            e_pop: DirectionVector::new(Array1::from_shape_fn(8, |_| rng.random_range(-1.0..1.0)))
                .unwrap(),
            e_pref: vec![DirectionVector::new(Array1::from_shape_fn(8, |_| {
                rng.random_range(-1.0..1.0)
            }))
            .unwrap()],
        };
        let t = Triplet {
            user: 0,
            pos: 0,
            neg: 1,
        };
        let plain = bpr_loss(table.score(0, 0) - table.score(0, 1));
        for rule in UpdateRule::grid() {
            max_gap = max_gap.max((ddc_loss(&table, &params, rule, &t) - plain).abs());
        }
    }
    assert!(max_gap < 1e-12, "zero-scalar gap {max_gap:e}");

    // compose_final with zero scalars returns the original user table exactly.
    let table = EmbeddingTable::init(6, 4, 8, 321, 0.3);
    let params = DdcParams {
        alpha: Array1::zeros(6),
        beta: Array1::zeros(6),
        e_pop: DirectionVector::new(Array1::linspace(0.1, 1.0, 8)).unwrap(),
        e_pref: (0..6)
            .map(|u| DirectionVector::new(Array1::linspace(0.2 + u as f64, 2.0, 8)).unwrap())
            .collect(),
    };
    let composed = compose_final(&table, &params, true, true);
    assert_eq!(composed, table.users().to_owned(), "identity composition");

    // LightGCN with K=0 scores exactly like MF on the same table.
    let raw = generate_synthetic(&SyntheticConfig::new(40, 30, 1.0, 8, 3)).unwrap();
    let ds = split(&raw, SplitRatios::default(), 3).unwrap();
    let adj = ddc_core::model::build_normalized_adjacency(&ds).unwrap();
    let table0 = EmbeddingTable::init(ds.num_users(), ds.num_items(), 8, 7, 0.1);
    let propagated = propagate(&table0, &adj, &BackboneConfig::lightgcn(0)).unwrap();
    let mut max_score_gap = 0.0f64;
    for u in 0..ds.num_users() {
        for i in 0..ds.num_items() {
            max_score_gap = max_score_gap.max((propagated.score(u, i) - table0.score(u, i)).abs());
        }
    }
    assert_eq!(max_score_gap, 0.0, "K=0 propagation must be exact");

    report_line(
        2,
        true,
        &format!("zero-scalar gap {max_gap:.1e}, K=0 gap 0"),
    );
}

// -------------------------------------------------------------------------
// Criterion 3: metrics match an independent brute-force evaluator.
// -------------------------------------------------------------------------

/// Literal-formula reference evaluator over a fully enumerated ranking.
/// Kept deliberately naive and independent of the library implementation.
mod oracle {
    pub struct Case {
        pub scores: Vec<Vec<f64>>, // user x item
        pub train: Vec<Vec<usize>>,
        pub relevant: Vec<Vec<usize>>, // per user, the split items
        pub pop: Vec<u32>,
        pub k: usize,
    }

    pub struct Metrics {
        pub recall: f64,
        pub ndcg: f64,
        pub mrr: f64,
        pub map: f64,
        pub avgpop: f64,
        pub users: usize,
    }

    pub fn evaluate(case: &Case) -> Metrics {
        let num_items = case.pop.len();
        let mut sums = [0.0f64; 5];
        let mut users = 0usize;
        for u in 0..case.scores.len() {
            if case.relevant[u].is_empty() {
                continue;
            }
            // Full ranking by descending score, ties by ascending id.
            let mut order: Vec<usize> = (0..num_items)
                .filter(|i| !case.train[u].contains(i))
                .collect();
            order.sort_by(|&a, &b| {
                case.scores[u][b]
                    .partial_cmp(&case.scores[u][a])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let top: Vec<usize> = order.into_iter().take(case.k).collect();
            if top.is_empty() {
                continue;
            }

            let hits: Vec<usize> = (0..top.len())
                .filter(|&idx| case.relevant[u].contains(&top[idx]))
                .collect();
            let recall = hits.len() as f64 / case.relevant[u].len() as f64;
            let mrr = hits.first().map_or(0.0, |&idx| 1.0 / (idx + 1) as f64);
            let dcg: f64 = hits
                .iter()
                .map(|&idx| 1.0 / ((idx + 2) as f64).log2())
                .sum();
            let ideal = case.relevant[u].len().min(case.k);
            let idcg: f64 = (0..ideal).map(|r| 1.0 / ((r + 2) as f64).log2()).sum();
            let ndcg = if idcg > 0.0 { dcg / idcg } else { 0.0 };
            let mut precision_sum = 0.0;
            for (h, &idx) in hits.iter().enumerate() {
                precision_sum += (h + 1) as f64 / (idx + 1) as f64;
            }
            let map = precision_sum / ideal as f64;
            let avgpop = top.iter().map(|&i| case.pop[i] as f64).sum::<f64>() / top.len() as f64;

            sums[0] += recall;
            sums[1] += ndcg;
            sums[2] += mrr;
            sums[3] += map;
            sums[4] += avgpop;
            users += 1;
        }
        let n = users as f64;
        Metrics {
            recall: sums[0] / n,
            ndcg: sums[1] / n,
            mrr: sums[2] / n,
            map: sums[3] / n,
            avgpop: sums[4] / n,
            users,
        }
    }
}

#[test]
fn criterion_03_metric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut cases = 0usize;
    for num_users in 1..=5usize {
        for num_items in 2..=8usize {
            for rep in 0..6 {
                // Random train history and relevant sets; a filler user
                // guarantees every item appears in train.
                let mut user_ids: Vec<String> = (0..num_users).map(|u| format!("u{u}")).collect();
                user_ids.push("filler".into());
                let item_ids: Vec<String> = (0..num_items).map(|i| format!("i{i}")).collect();
                let mut train = Vec::new();
                let mut test = Vec::new();
                let mut train_sets = vec![Vec::new(); num_users + 1];
                let mut relevant = vec![Vec::new(); num_users + 1];
                for u in 0..num_users {
                    for i in 0..num_items {
                        // Guarantee one train item per user so test-only
                        // users cannot occur.
                        if i == u % num_items {
                            train.push(Interaction::new(u, i));
                            train_sets[u].push(i);
                            continue;
                        }
                        match rng.random_range(0..4u8) {
                            0 => {
                                train.push(Interaction::new(u, i));
                                train_sets[u].push(i);
                            }
                            1 => {
                                test.push(Interaction::new(u, i));
                                relevant[u].push(i);
                            }
                            _ => {}
                        }
                    }
                }
                for i in 0..num_items {
                    train.push(Interaction::new(num_users, i));
                    train_sets[num_users].push(i);
                }
                if test.is_empty() {
                    continue;
                }
                let ds = InteractionDataset::from_parts(user_ids, item_ids, train, vec![], test)
                    .unwrap();

                let users =
                    Array2::from_shape_fn((num_users + 1, 3), |_| rng.random_range(-1.0..1.0));
                let items = Array2::from_shape_fn((num_items, 3), |_| rng.random_range(-1.0..1.0));
                let k = rng.random_range(1..=(num_items + 2));

                let lib = evaluate(users.view(), items.view(), &ds, Split::Test, k).unwrap();

                let scores: Vec<Vec<f64>> = (0..num_users + 1)
                    .map(|u| {
                        (0..num_items)
                            .map(|i| users.row(u).dot(&items.row(i)))
                            .collect()
                    })
                    .collect();
                let case = oracle::Case {
                    scores,
                    train: train_sets,
                    relevant,
                    pop: ds.pop().to_vec(),
                    k,
                };
                let reference = oracle::evaluate(&case);

                assert_eq!(lib.num_evaluated_users, reference.users, "rep {rep}");
                for (name, a, b) in [
                    ("recall", lib.recall, reference.recall),
                    ("ndcg", lib.ndcg, reference.ndcg),
                    ("mrr", lib.mrr, reference.mrr),
                    ("map", lib.map, reference.map),
                    ("avgpop", lib.avgpop, reference.avgpop),
                ] {
                    assert!(
                        (a - b).abs() < 1e-12,
                        "{name} mismatch at {num_users}x{num_items} rep {rep}: {a} vs {b}"
                    );
                }
                cases += 1;
            }
        }
    }
    report_line(
        3,
        true,
        &format!("{cases} exhaustive instances agree to 1e-12"),
    );
    assert!(cases > 100);
}

// -------------------------------------------------------------------------
// Criterion 4: popularity imprint (Pearson r >= 0.8) on converged MF-BPR.
// -------------------------------------------------------------------------
#[test]
fn criterion_04_popularity_imprint() {
    let started = Instant::now();
    let rs: Vec<f64> = runs().iter().map(|r| r.pearson_r).collect();
    let pass = rs.iter().all(|&r| r >= 0.8);
    report_line(
        4,
        pass,
        &format!(
            "pearson r per seed {rs:.3?} (threshold 0.8), wall {:.0}s",
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "pearson r below 0.8: {rs:?}");
}

// -------------------------------------------------------------------------
// Criterion 5: loss collapse, L_eval <= 50% of the baseline epoch loss.
//
// This criterion is currently expected to FAIL, and is asserted faithfully
// anyway. At the pinned corpus shape (500 users x 300 items x 40 distinct
// interactions per user), the backbone reaches near-complete fit of every
// collaboratively predictable pair before early stopping fires, so the
// converged epoch loss is dominated by the Zipf-drawn positives, which are
// statistically exchangeable with equally popular non-interacted items. No
// two-scalar correction along (e_pop, e_pref) can widen those margins, and
// the popularity term of the composition actively lowers popular positives'
// scores, so the composed-loss ratio stays near 100% in every configuration
// that also satisfies criteria 4 and 6-8.
// -------------------------------------------------------------------------
#[test]
fn criterion_05_loss_collapse() {
    let run = &runs()[0];
    let ratio = run.ba_lev / run.base_lev;
    let pass = ratio <= 0.5;
    report_line(
        5,
        pass,
        &format!(
            "L_eval {:.4} vs baseline {:.4} (ratio {:.1}%, required <= 50%)",
            run.ba_lev,
            run.base_lev,
            100.0 * ratio
        ),
    );
    assert!(
        pass,
        "L_eval ratio {:.3} > 0.5: known desk-scale limit, see this test's \
         doc comment and the README's acceptance notes",
        ratio
    );
}

// -------------------------------------------------------------------------
// Criterion 6: accuracy up AND recommended popularity down (3-seed majority).
// -------------------------------------------------------------------------
#[test]
fn criterion_06_accuracy_and_debias_direction() {
    let mut wins = 0usize;
    let mut detail = String::new();
    for run in runs() {
        let mrr_up = run.ba_test.mrr > run.base_test.mrr;
        let pop_down = run.ba_test.avgpop < run.base_test.avgpop;
        if mrr_up && pop_down {
            wins += 1;
        }
        detail.push_str(&format!(
            "[seed {}: mrr {:.4}->{:.4}, avgpop {:.1}->{:.1}] ",
            run.seed, run.base_test.mrr, run.ba_test.mrr, run.base_test.avgpop, run.ba_test.avgpop
        ));
    }
    let pass = wins * 2 > SEEDS.len();
    report_line(6, pass, &format!("{wins}/3 seeds improve both; {detail}"));
    assert!(pass, "majority failed: {detail}");
}

// -------------------------------------------------------------------------
// Criterion 7: popularity calibration sign, median alpha* < 0 on all seeds.
// -------------------------------------------------------------------------
#[test]
fn criterion_07_calibration_sign() {
    let medians: Vec<f64> = runs().iter().map(|r| median(&r.ba_params.alpha)).collect();
    let pass = medians.iter().all(|&m| m < 0.0);
    report_line(7, pass, &format!("median alpha per seed {medians:.3?}"));
    assert!(pass, "median alpha not negative on all seeds: {medians:?}");
}

// -------------------------------------------------------------------------
// Criterion 8: ablation ordering (b_a beats a_b; full >= single-term).
// -------------------------------------------------------------------------
#[test]
fn criterion_08_ablation_ordering() {
    let mut ba_wins = 0usize;
    let mut full_wins = 0usize;
    let mut detail = String::new();
    for run in runs() {
        if run.ba_test.mrr > run.ab_test.mrr {
            ba_wins += 1;
        }
        if run.ba_test.mrr >= run.wo_alpha_test.mrr && run.ba_test.mrr >= run.wo_beta_test.mrr {
            full_wins += 1;
        }
        detail.push_str(&format!(
            "[seed {}: b_a {:.4}, a_b {:.4}, wo_a {:.4}, wo_b {:.4}] ",
            run.seed, run.ba_test.mrr, run.ab_test.mrr, run.wo_alpha_test.mrr, run.wo_beta_test.mrr
        ));
    }
    let pass = ba_wins * 2 > SEEDS.len() && full_wins * 2 > SEEDS.len();
    report_line(
        8,
        pass,
        &format!("b_a>a_b on {ba_wins}/3, full>=variants on {full_wins}/3; {detail}"),
    );
    assert!(pass, "ordering failed: {detail}");
}

// -------------------------------------------------------------------------
// Criterion 9: structural properties.
// -------------------------------------------------------------------------
#[test]
fn criterion_09_structural_properties() {
    // k-core filtering reaches a fixed point.
    let raw = generate_synthetic(&SyntheticConfig::new(80, 60, 1.1, 10, 21)).unwrap();
    let once = k_core_filter(&raw, 4).unwrap();
    let twice = k_core_filter(&once, 4).unwrap();
    assert_eq!(once.interactions, twice.interactions, "k-core fixed point");

    // Triplet validity over 1e5 samples.
    let ds = split(&raw, SplitRatios::default(), 21).unwrap();
    let mut drawn = 0usize;
    let mut epoch_seed = 0u64;
    while drawn < 100_000 {
        for t in sample_triplets(&ds, 31_000 + epoch_seed) {
            assert!(ds.user_hist(t.user).binary_search(&t.pos).is_ok());
            assert!(ds.user_hist(t.user).binary_search(&t.neg).is_err());
            drawn += 1;
        }
        epoch_seed += 1;
    }

    // Unit norm of every direction vector to 1e-9.
    for run in runs() {
        let norm = run.e_pop.as_view().dot(&run.e_pop.as_view()).sqrt();
        assert!((norm - 1.0).abs() < 1e-9, "e_pop norm {norm}");
        for dir in &run.ba_params.e_pref {
            let norm = dir.as_view().dot(&dir.as_view()).sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "e_pref norm {norm}");
        }
        // Frozen-table digests unchanged across fine-tuning.
        assert!(
            run.digest_unchanged,
            "frozen tables mutated during finetune"
        );
    }

    // Full determinism of every pipeline stage under fixed seeds.
    let seed = 97u64;
    let cfg = SyntheticConfig::new(60, 50, 1.1, 9, seed);
    let stage = |_: ()| {
        let raw = generate_synthetic(&cfg).unwrap();
        let ratios = SplitRatios {
            train: 0.6,
            valid: 0.2,
            test: 0.2,
        };
        let ds = split(&raw, ratios, seed).unwrap();
        let tcfg = TrainConfig {
            learning_rate: 0.02,
            batch_size: 256,
            patience: 3,
            max_epochs: Some(8),
            dim: 8,
            seed,
            ..Default::default()
        };
        let (table, trace) = train(&ds, &BackboneConfig::mf(), &tcfg).unwrap();
        let e_pop = popularity_direction(table.items(), ds.pop(), 0.05).unwrap();
        let e_pref = preference_directions(&table, &ds, 0.3).unwrap();
        let fcfg = FinetuneConfig {
            max_epochs: Some(6),
            batch_size: 256,
            seed,
            ..Default::default()
        };
        let (params, _) = finetune(&ds, &table, e_pop, e_pref, UpdateRule::B_A, &fcfg).unwrap();
        let corrected = compose_final(&table, &params, true, true);
        let report = evaluate(corrected.view(), table.items(), &ds, Split::Test, 10).unwrap();
        (
            ds.train().to_vec(),
            table.digest(),
            trace
                .records
                .iter()
                .map(|r| (r.loss.to_bits(), r.val_mrr.to_bits()))
                .collect::<Vec<_>>(),
            params.alpha.mapv(f64::to_bits),
            params.beta.mapv(f64::to_bits),
            report.mrr.to_bits(),
        )
    };
    assert_eq!(
        stage(()),
        stage(()),
        "pipeline stages must be bit-deterministic"
    );

    report_line(
        9,
        true,
        "fixed point, triplet validity (1e5), unit norms, frozen digests, determinism",
    );
}

// -------------------------------------------------------------------------
// Criterion 10: gradient misalignment diagnostic in (0, 0.95).
// -------------------------------------------------------------------------
#[test]
fn criterion_10_misalignment_diagnostic() {
    let mut pass = true;
    let mut detail = String::new();
    for run in runs() {
        let a = run.mean_alignment;
        if !(a > 0.0 && a < 0.95) {
            pass = false;
        }
        detail.push_str(&format!("[seed {}: {:.3}] ", run.seed, a));
    }
    report_line(
        10,
        pass,
        &format!("mean cosine per seed within (0, 0.95): {detail}"),
    );
    assert!(pass, "alignment out of range: {detail}");
}
