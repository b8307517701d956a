mod common;

use common::*;
use edia_core::bias::build_space;
use edia_core::sparse::CsrMatrix;
use edia_core::svd;
use edia_core::trainer::{count_cooccurrences, ppmi, train, SingularWeighting};
use edia_core::{
    Corpus, CorpusIndex, EmbeddingStore, LoadOptions, Normalizer, SpaceConfig, SpaceMethod,
    TrainError, TrainerConfig, WordList,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn index(text: &str) -> CorpusIndex {
    CorpusIndex::build(Corpus::parse(text).unwrap(), Default::default()).unwrap()
}

fn cfg(window: usize, min_count: u64, dim: usize) -> TrainerConfig {
    TrainerConfig {
        window,
        min_count,
        dim,
        ..Default::default()
    }
}

#[test]
fn hand_enumerated_pairs() {
    let c = count_cooccurrences(&index("a b c"), &cfg(1, 1, 2)).unwrap();
    for (w, x, n) in [("a", "b", 1.0), ("b", "a", 1.0), ("b", "c", 1.0), ("c", "b", 1.0)] {
        assert_eq!(c.get(w, x), n);
    }
    assert_eq!(c.get("a", "c"), 0.0);
    assert_eq!(c.counts.nnz(), 4);
}

#[test]
fn saturated_window_links_every_pair() {
    let c = count_cooccurrences(&index("a b c d"), &cfg(10, 1, 2)).unwrap();
    for w in ["a", "b", "c", "d"] {
        for x in ["a", "b", "c", "d"] {
            assert_eq!(c.get(w, x), if w == x { 0.0 } else { 1.0 });
        }
    }
}

#[test]
fn rare_tokens_are_dropped_and_sentences_block() {
    let c = count_cooccurrences(&index("a b rare. a b. c a"), &cfg(2, 2, 2)).unwrap();
    assert!(!c.vocab.contains(&"rare".to_string()));
    assert!(!c.vocab.contains(&"c".to_string()));
    assert_eq!(c.get("a", "b"), 2.0);
    assert!(matches!(
        count_cooccurrences(&index("x y z"), &cfg(2, 5, 2)),
        Err(TrainError::EmptyVocabulary(5))
    ));
}

#[test]
fn toy_ppmi_is_log_two() {
    let counts = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 4.0), (1, 1, 4.0)]);
    let p = ppmi(&counts, 1.0);
    assert!((p.get(0, 0) - 2f64.ln()).abs() < 1e-12);
    assert_eq!(p.get(0, 1), 0.0);
}

#[test]
fn independent_table_is_zero() {
    // Outer product of marginals (2, 4) x (1, 3): p(w,c) = p(w) p(c).
    let counts = CsrMatrix::from_triplets(
        2,
        2,
        vec![(0, 0, 2.0), (0, 1, 6.0), (1, 0, 4.0), (1, 1, 12.0)],
    );
    assert_eq!(ppmi(&counts, 1.0).nnz(), 0);
}

#[test]
fn identical_contexts_give_identical_vectors() {
    let mut text = String::new();
    for i in 0..40 {
        let f = ["p", "q", "r", "s"][i % 4];
        text.push_str(&format!("x {f} k{}.\ny {f} k{}.\n", i % 3, i % 3));
    }
    text.push_str("p q r s k0 k1 k2.\n");
    let t = train("t", &index(&text), &cfg(2, 1, 5)).unwrap();
    let cos = t.store.cosine("x", "y").unwrap();
    assert!((cos - 1.0).abs() < 1e-6, "{cos}");
}

#[test]
fn training_is_deterministic_and_loadable() {
    let text = skew_corpus(500, true, 3);
    let idx = index(&text);
    let a = train("a", &idx, &cfg(3, 2, 20)).unwrap();
    let b = train("a", &idx, &cfg(3, 2, 20)).unwrap();
    assert_eq!(a.store.vocab(), b.store.vocab());
    for i in 0..a.store.len() {
        for (x, y) in a.store.row(i).iter().zip(b.store.row(i)) {
            assert!((x - y).abs() < 1e-9);
        }
    }
    assert_eq!(a.manifest.corpus_sha256, idx.fingerprint());
    assert_eq!(a.manifest.dim, 20);
    assert_eq!(a.manifest.solver, "exact");

    let mut buf = Vec::new();
    a.store.write_text(&mut buf).unwrap();
    let opts = LoadOptions {
        limit: None,
        normalizer: Normalizer::identity(),
    };
    let back = EmbeddingStore::read_text("a", buf.as_slice(), &opts).unwrap();
    assert_eq!(back.len(), a.store.len());
    assert_eq!(back.dim(), 20);
}

#[test]
fn oversized_dim_is_reduced_with_warning() {
    let t = train("t", &index("a b c. b c d. c d a. d a b."), &cfg(1, 1, 50)).unwrap();
    assert!(t.manifest.dim <= 4);
    assert_eq!(t.store.dim(), t.manifest.dim);
    assert!(!t.manifest.warnings.is_empty());
}

#[test]
fn config_validation() {
    let idx = index("a b");
    let bad = TrainerConfig {
        power_iterations: 2,
        ..Default::default()
    };
    assert_eq!(train("t", &idx, &bad).unwrap_err().code(), "invalid_config");
    assert!(train("t", &idx, &cfg(0, 1, 2)).is_err());
    let alpha = TrainerConfig {
        context_smoothing: 0.0,
        ..Default::default()
    };
    assert!(train("t", &idx, &alpha).is_err());
}

#[test]
fn randomized_solver_agrees_when_sampling_the_full_range() {
    let idx = index(&skew_corpus(400, false, 5));
    let exact = train("e", &idx, &cfg(2, 1, 8)).unwrap();
    let rnd_cfg = TrainerConfig {
        exact_below: 0,
        oversamples: 200,
        ..cfg(2, 1, 8)
    };
    let rnd = train("e", &idx, &rnd_cfg).unwrap();
    assert_eq!(rnd.manifest.solver, "randomized");
    for w in ["nurse", "she", "he", "f000"] {
        let (i, j) = (exact.store.lookup(w).unwrap(), rnd.store.lookup(w).unwrap());
        for (x, y) in exact.store.row(i).iter().zip(rnd.store.row(j)) {
            assert!((x - y).abs() < 1e-8, "{w}: {x} vs {y}");
        }
    }
}

#[test]
fn weighting_variants_scale_columns() {
    let idx = index(&skew_corpus(200, true, 1));
    let base = cfg(2, 1, 6);
    let none = train("n", &idx, &TrainerConfig { weighting: SingularWeighting::None, ..base.clone() }).unwrap();
    let full = train("f", &idx, &TrainerConfig { weighting: SingularWeighting::Full, ..base.clone() }).unwrap();
    let sqrt = train("s", &idx, &base).unwrap();
    let i = none.store.lookup("nurse").unwrap();
    for j in 0..6 {
        let u = none.store.row(i)[j];
        let s = sqrt.store.row(i)[j];
        let f = full.store.row(i)[j];
        if u.abs() > 1e-9 {
            assert!(((s / u).powi(2) - f / u).abs() < 1e-6 * (f / u).abs().max(1.0));
        }
    }
}

#[test]
fn nurse_sign_follows_the_skew() {
    let lists = (
        WordList::new("female", FEMALE_SEEDS).unwrap(),
        WordList::new("male", MALE_SEEDS).unwrap(),
    );
    let mut scores = Vec::new();
    for toward_female in [true, false] {
        let idx = index(&skew_corpus(5000, toward_female, 11));
        let t = train("skew", &idx, &cfg(5, 2, 50)).unwrap();
        let space = build_space(&t.store, &lists.0, &lists.1, SpaceConfig::new(SpaceMethod::CentroidDiff)).unwrap();
        scores.push(space.score_token(&t.store, "nurse").unwrap());
    }
    assert!(scores[0] > 0.1, "{scores:?}");
    assert!(scores[1] < -0.1, "{scores:?}");
}

fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn small_dense() -> impl Strategy<Value = DMatrix<f64>> {
    (3usize..7, 3usize..7).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5.0f64..5.0, r * c)
            .prop_map(move |v| DMatrix::from_row_slice(r, c, &v))
    })
}

proptest! {
    #[test]
    fn cooccurrence_is_symmetric_with_naive_row_sums(
        sents in prop::collection::vec(prop::collection::vec(0usize..6, 1..9), 1..8),
        window in 1usize..4,
    ) {
        let names = ["a", "b", "c", "d", "e", "f"];
        let text: String = sents
            .iter()
            .map(|s| s.iter().map(|&i| names[i]).collect::<Vec<_>>().join(" ") + ".\n")
            .collect();
        let c = count_cooccurrences(&index(&text), &cfg(window, 1, 2)).unwrap();
        for (r, col, v) in c.counts.triplets() {
            prop_assert!(v >= 0.0);
            prop_assert_eq!(v, c.counts.get(col, r));
        }
        let sums = c.counts.row_sums();
        for (i, w) in c.vocab.iter().enumerate() {
            let mut naive = 0usize;
            for s in &sents {
                for (p, &t) in s.iter().enumerate() {
                    if names[t] == w {
                        let lo = p.saturating_sub(window);
                        let hi = (p + window).min(s.len() - 1);
                        naive += hi - lo;
                    }
                }
            }
            prop_assert_eq!(sums[i], naive as f64);
        }
    }

    #[test]
    fn ppmi_is_nonnegative(vals in prop::collection::vec(0u8..6, 9), alpha in 0.1f64..1.0) {
        let t: Vec<(usize, usize, f64)> = vals.iter().enumerate().map(|(i, &v)| (i / 3, i % 3, v as f64)).collect();
        let p = ppmi(&CsrMatrix::from_triplets(3, 3, t), alpha);
        for (_, _, v) in p.triplets() {
            prop_assert!(v > 0.0 && v.is_finite());
        }
    }

    /// Moving mass onto (0,0) from (0,1) and (1,0), and back onto (1,1),
    /// leaves every row and column total unchanged.
    #[test]
    fn ppmi_monotone_under_fixed_marginals(vals in prop::collection::vec(1u8..9, 9), delta in 1u8..5, alpha in 0.1f64..1.0) {
        let m: Vec<f64> = vals.iter().map(|&v| v as f64 + delta as f64).collect();
        let build = |d: f64| {
            let mut v = m.clone();
            v[0] += d;
            v[1] -= d;
            v[3] -= d;
            v[4] += d;
            let t = v.iter().enumerate().map(|(i, &x)| (i / 3, i % 3, x)).collect();
            ppmi(&CsrMatrix::from_triplets(3, 3, t), alpha).get(0, 0)
        };
        prop_assert!(build(delta as f64) >= build(0.0));
    }

    #[test]
    fn truncation_error_matches_tail_spectrum(a in small_dense()) {
        let full = svd::exact(&a, a.nrows().min(a.ncols()));
        let ata: Vec<Vec<f64>> = {
            let g = a.transpose() * &a;
            (0..g.nrows()).map(|i| (0..g.ncols()).map(|j| g[(i, j)]).collect()).collect()
        };
        let eig = jacobi_eigenvalues(ata);
        let scale = frob(&a).powi(2).max(1.0);
        let mut prev = f64::INFINITY;
        for d in 1..=full.rank() {
            let err = frob(&(&a - full.clone().truncate(d).reconstruct()));
            let tail: f64 = eig[d..].iter().map(|e| e.max(0.0)).sum();
            prop_assert!((err * err - tail).abs() < 1e-8 * scale, "d={} err2={} tail={}", d, err * err, tail);
            prop_assert!(err <= prev + 1e-12);
            prev = err;
        }
    }
}
