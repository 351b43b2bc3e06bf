mod common;

use featloc::lexicon::{TermDictionary, TraceIdentifierMatrix};
use featloc::topics::synthetic::{planted, PlantedSpec};
use featloc::topics::{fit, LdaConfig, TopicModel};
use proptest::prelude::*;

fn small_matrix() -> impl Strategy<Value = TraceIdentifierMatrix> {
    (1usize..6, 1usize..8).prop_flat_map(|(d, v)| {
        prop::collection::vec(prop::collection::vec(0u32..4, v), d).prop_map(move |mut dense| {
            for (i, row) in dense.iter_mut().enumerate() {
                if row.iter().all(|&n| n == 0) {
                    row[i % v] = 1;
                }
            }
            let dict = TermDictionary::from_terms((0..v).map(|t| format!("w{t}")));
            let rows = dense
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, &n)| n > 0).map(|(t, &n)| (t, n)).collect())
                .collect();
            let ids = (0..d).map(|i| format!("d{i}")).collect();
            TraceIdentifierMatrix::from_counts(ids, dict, rows).unwrap()
        })
    })
}

fn config(k: usize, seed: u64, iterations: usize) -> LdaConfig {
    let mut cfg = LdaConfig::new(k);
    cfg.seed = seed;
    cfg.iterations = iterations;
    cfg
}

fn assert_normalized(model: &TopicModel) {
    for row in model.theta.iter().chain(&model.phi) {
        let s: f64 = row.iter().sum();
        assert!((s - 1.0).abs() <= 1e-9, "row sums to {s}");
        assert!(row.iter().all(|&p| p > 0.0));
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_are_conserved(m in small_matrix(), k in 1usize..5, seed in any::<u64>()) {
        let model = fit(&m, &config(k, seed, 25)).unwrap();
        let total = m.total_tokens();
        prop_assert_eq!(model.topic_totals.iter().sum::<u64>(), total);
        for (d, tokens) in model.tokens.iter().enumerate() {
            prop_assert_eq!(model.doc_topic[d].iter().map(|&n| u64::from(n)).sum::<u64>(), tokens.len() as u64);
            prop_assert_eq!(model.assignments[d].len(), tokens.len());
        }
        for t in 0..k {
            prop_assert_eq!(model.topic_word[t].iter().map(|&n| u64::from(n)).sum::<u64>(), model.topic_totals[t]);
        }
        let recount = TopicModel::from_assignments(&m, &model.config, model.assignments.clone()).unwrap();
        prop_assert_eq!(&recount.doc_topic, &model.doc_topic);
        prop_assert_eq!(&recount.topic_word, &model.topic_word);
        prop_assert_eq!(&recount.theta, &model.theta);
        prop_assert_eq!(&recount.phi, &model.phi);
        assert_normalized(&model);
    }

    #[test]
    fn same_seed_same_model(m in small_matrix(), k in 1usize..5, seed in any::<u64>()) {
        let a = fit(&m, &config(k, seed, 20)).unwrap();
        let b = fit(&m, &config(k, seed, 20)).unwrap();
        prop_assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
    }

    #[test]
    fn estimator_is_document_permutation_equivariant(
        m in small_matrix(),
        k in 1usize..4,
        seed in any::<u64>(),
        rot in 0usize..6,
    ) {
        let model = fit(&m, &config(k, seed, 10)).unwrap();
        let d = m.num_docs();
        let perm: Vec<usize> = (0..d).map(|i| (i + rot) % d).collect();
        let permuted = TraceIdentifierMatrix::from_counts(
            perm.iter().map(|&i| m.trace_ids[i].clone()).collect(),
            m.dictionary.clone(),
            perm.iter().map(|&i| m.rows[i].clone()).collect(),
        ).unwrap();
        let z = perm.iter().map(|&i| model.assignments[i].clone()).collect();
        let again = TopicModel::from_assignments(&permuted, &model.config, z).unwrap();
        prop_assert_eq!(&again.phi, &model.phi);
        for (new, &old) in perm.iter().enumerate() {
            prop_assert_eq!(&again.theta[new], &model.theta[old]);
        }
    }

    #[test]
    fn single_topic_phi_is_smoothed_unigram(m in small_matrix(), seed in any::<u64>()) {
        let model = fit(&m, &config(1, seed, 5)).unwrap();
        let v = m.vocab_size();
        let n = m.total_tokens() as f64;
        let beta = model.config.beta;
        let mut unigram = vec![0u64; v];
        for row in &m.rows {
            for &(t, c) in row {
                unigram[t] += u64::from(c);
            }
        }
        for (t, &c) in unigram.iter().enumerate() {
            let expected = (c as f64 + beta) / (n + v as f64 * beta);
            prop_assert!((model.phi[0][t] - expected).abs() <= 1e-12);
        }
        prop_assert!(model.theta.iter().all(|r| r == &vec![1.0]));
    }
}

#[test]
fn fixture_model_is_normalized_and_reproducible() {
    let m = common::fixture_matrix();
    let cfg = common::fixture_config(std::path::Path::new("unused")).lda;
    let a = fit(&m, &cfg).unwrap();
    let b = fit(&m, &cfg).unwrap();
    assert_normalized(&a);
    assert_eq!(a.theta_text(), b.theta_text());
    assert_eq!(a.phi_text(), b.phi_text());
    assert_eq!(a.likelihood.len(), cfg.iterations / cfg.likelihood_every);
}

#[test]
fn fixture_use_cases_separate_for_every_seed() {
    let m = common::fixture_matrix();
    let mut cfg = common::fixture_config(std::path::Path::new("unused")).lda;
    for seed in 0..5 {
        cfg.seed = seed;
        let model = fit(&m, &cfg).unwrap();
        let dominant: Vec<usize> = model
            .theta
            .iter()
            .map(|row| (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap())
            .collect();
        let topic_of = |id: &str| dominant[m.trace_ids.iter().position(|t| t == id).unwrap()];
        assert_eq!(topic_of("draw_rect"), topic_of("draw_shapes"), "seed {seed}");
        assert_eq!(topic_of("undo_edit"), topic_of("redo_edit"), "seed {seed}");
        assert_eq!(topic_of("drag_figure"), topic_of("drop_figure"), "seed {seed}");
        let distinct: std::collections::BTreeSet<usize> =
            ["draw_rect", "undo_edit", "drag_figure"].map(topic_of).into();
        assert_eq!(distinct.len(), 3, "seed {seed}");
    }
}

#[test]
fn likelihood_improves_from_random_start() {
    let corpus = planted(&PlantedSpec {
        num_docs: 40,
        words_per_topic: vec![10, 10],
        alpha: 0.1,
        mean_length: 60.0,
        seed: 3,
    })
    .unwrap();
    let mut cfg = config(2, 11, 500);
    cfg.likelihood_every = 10;
    let model = fit(&corpus.matrix, &cfg).unwrap();
    let ll: Vec<f64> = model.likelihood.iter().map(|&(_, l)| l).collect();
    assert_eq!(ll.len(), 50);
    let first = median(ll[..5].to_vec());
    let last = median(ll[ll.len() - 5..].to_vec());
    assert!(last >= first, "{first} -> {last}");
    assert!((model.log_likelihood() - ll[ll.len() - 1]).abs() < 1e-9);
}

#[test]
fn top_words_ties_break_by_term() {
    let m = TraceIdentifierMatrix::from_counts(
        vec!["d".into()],
        TermDictionary::from_terms(["b", "a", "c"].map(String::from)),
        vec![vec![(0, 1), (1, 1), (2, 1)]],
    )
    .unwrap();
    let model = fit(&m, &config(1, 0, 3)).unwrap();
    let top = model.top_words(3);
    let words: Vec<&str> = top[0].iter().map(|(w, _)| w.as_str()).collect();
    assert_eq!(words, ["a", "b", "c"]);
}
