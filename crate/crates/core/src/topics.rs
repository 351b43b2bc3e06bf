//! LDA topic model fitted with collapsed Gibbs sampling.
//!
//! Each token's topic is resampled from
//! `p(z = k | rest) ∝ (n_dk + α)(n_kv + β) / (n_k + Vβ)`, and the point
//! estimates are read from the final sample:
//! `θ_dk = (n_dk + α) / (n_d + Kα)`, `φ_kv = (n_kv + β) / (n_k + Vβ)`.
//!
//! Randomness comes from a ChaCha8 stream seeded with [`LdaConfig::seed`], and
//! tokens are laid out in ascending term id within each document, so a fit is
//! reproducible bit for bit on any platform.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{TermDictionary, TraceIdentifierMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub top_n: usize,
    /// Sweeps between log-likelihood evaluations; 0 disables them.
    pub likelihood_every: usize,
}

impl LdaConfig {
    /// `α = 50/K`, `β = 0.1`, 1000 sweeps.
    pub fn new(num_topics: usize) -> Self {
        LdaConfig {
            num_topics,
            alpha: 50.0 / num_topics.max(1) as f64,
            beta: 0.1,
            iterations: 1000,
            seed: 0,
            top_n: 5,
            likelihood_every: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_topics == 0 {
            return Err(Error::Parameter("number of topics must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Parameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.iterations == 0 {
            return Err(Error::Parameter("iterations must be >= 1".into()));
        }
        if self.top_n == 0 {
            return Err(Error::Parameter("top_n must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub config: LdaConfig,
    pub doc_ids: Vec<String>,
    pub dictionary: TermDictionary,
    /// D x K.
    pub theta: Vec<Vec<f64>>,
    /// K x V.
    pub phi: Vec<Vec<f64>>,
    /// Term id of every token, per document.
    pub tokens: Vec<Vec<usize>>,
    /// Topic of every token, per document.
    pub assignments: Vec<Vec<usize>>,
    pub doc_topic: Vec<Vec<u32>>,
    pub topic_word: Vec<Vec<u32>>,
    pub topic_totals: Vec<u64>,
    /// `(sweep, log-likelihood)` pairs recorded during the fit.
    pub likelihood: Vec<(usize, f64)>,
}

fn materialize_tokens(matrix: &TraceIdentifierMatrix) -> Vec<Vec<usize>> {
    matrix
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .flat_map(|&(t, n)| std::iter::repeat_n(t, n as usize))
                .collect()
        })
        .collect()
}

fn check_matrix(matrix: &TraceIdentifierMatrix) -> Result<()> {
    if matrix.num_docs() == 0 {
        return Err(Error::Matrix("no documents".into()));
    }
    if matrix.vocab_size() == 0 {
        return Err(Error::Matrix("empty vocabulary".into()));
    }
    if let Some((id, _)) = matrix
        .trace_ids
        .iter()
        .zip(&matrix.rows)
        .find(|(_, r)| r.iter().all(|&(_, n)| n == 0))
    {
        return Err(Error::Matrix(format!("trace `{id}` has no terms")));
    }
    Ok(())
}

struct Counts {
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
}

impl Counts {
    fn tally(tokens: &[Vec<usize>], z: &[Vec<usize>], k: usize, v: usize) -> Self {
        let mut c = Counts {
            doc_topic: vec![vec![0; k]; tokens.len()],
            topic_word: vec![vec![0; v]; k],
            topic_totals: vec![0; k],
        };
        for (d, (words, topics)) in tokens.iter().zip(z).enumerate() {
            for (&w, &t) in words.iter().zip(topics) {
                c.doc_topic[d][t] += 1;
                c.topic_word[t][w] += 1;
                c.topic_totals[t] += 1;
            }
        }
        c
    }
}

/// Runs `cfg.iterations` full Gibbs sweeps over the matrix.
pub fn fit(matrix: &TraceIdentifierMatrix, cfg: &LdaConfig) -> Result<TopicModel> {
    cfg.validate()?;
    check_matrix(matrix)?;
    let k = cfg.num_topics;
    let v = matrix.vocab_size();
    let tokens = materialize_tokens(matrix);
    let total: usize = tokens.iter().map(Vec::len).sum();
    if k > total {
        log::warn!("{k} topics for only {total} tokens; some topics will be empty");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut z: Vec<Vec<usize>> = tokens
        .iter()
        .map(|doc| doc.iter().map(|_| rng.random_range(0..k)).collect())
        .collect();
    let mut counts = Counts::tally(&tokens, &z, k, v);

    let (alpha, beta) = (cfg.alpha, cfg.beta);
    let v_beta = v as f64 * beta;
    let mut weights = vec![0.0f64; k];
    let mut likelihood = Vec::new();

    for sweep in 1..=cfg.iterations {
        for (d, words) in tokens.iter().enumerate() {
            let doc_topic = &mut counts.doc_topic[d];
            for (i, &w) in words.iter().enumerate() {
                let old = z[d][i];
                doc_topic[old] -= 1;
                counts.topic_word[old][w] -= 1;
                counts.topic_totals[old] -= 1;

                let mut sum = 0.0;
                for (t, weight) in weights.iter_mut().enumerate() {
                    sum += (f64::from(doc_topic[t]) + alpha)
                        * (f64::from(counts.topic_word[t][w]) + beta)
                        / (counts.topic_totals[t] as f64 + v_beta);
                    *weight = sum;
                }
                let u = rng.random::<f64>() * sum;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                z[d][i] = new;
                doc_topic[new] += 1;
                counts.topic_word[new][w] += 1;
                counts.topic_totals[new] += 1;
            }
        }
        if cfg.likelihood_every > 0 && sweep % cfg.likelihood_every == 0 {
            let (theta, phi) = estimate(&counts, &tokens, alpha, beta, k, v);
            likelihood.push((sweep, log_likelihood_of(&tokens, &theta, &phi)));
        }
    }

    let mut model = assemble(matrix, cfg.clone(), tokens, z, counts);
    model.likelihood = likelihood;
    Ok(model)
}

impl TopicModel {
    /// Point estimate from a given assignment, without sampling.
    pub fn from_assignments(
        matrix: &TraceIdentifierMatrix,
        cfg: &LdaConfig,
        assignments: Vec<Vec<usize>>,
    ) -> Result<Self> {
        cfg.validate()?;
        check_matrix(matrix)?;
        let tokens = materialize_tokens(matrix);
        let shape_ok = assignments.len() == tokens.len()
            && assignments.iter().zip(&tokens).all(|(z, w)| z.len() == w.len())
            && assignments.iter().flatten().all(|&t| t < cfg.num_topics);
        if !shape_ok {
            return Err(Error::Parameter(
                "assignments do not match the matrix tokens or topic count".into(),
            ));
        }
        let counts = Counts::tally(&tokens, &assignments, cfg.num_topics, matrix.vocab_size());
        Ok(assemble(matrix, cfg.clone(), tokens, assignments, counts))
    }

    pub fn num_topics(&self) -> usize {
        self.phi.len()
    }

    pub fn num_docs(&self) -> usize {
        self.theta.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.dictionary.len()
    }

    /// Total `Σ_tokens ln Σ_k θ_dk φ_kw` of the current estimates.
    pub fn log_likelihood(&self) -> f64 {
        log_likelihood_of(&self.tokens, &self.theta, &self.phi)
    }

    /// `n` highest-probability terms per topic, ties broken by term.
    pub fn top_words(&self, n: usize) -> Vec<Vec<(String, f64)>> {
        self.phi
            .iter()
            .map(|row| {
                let mut ranked: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
                ranked.sort_by(|a, b| {
                    b.1.total_cmp(&a.1).then_with(|| {
                        self.dictionary.term(a.0).cmp(&self.dictionary.term(b.0))
                    })
                });
                ranked
                    .into_iter()
                    .take(n)
                    .map(|(t, p)| (self.dictionary.term(t).unwrap_or_default().to_string(), p))
                    .collect()
            })
            .collect()
    }

    fn header(&self) -> String {
        let c = &self.config;
        format!(
            "# K={} V={} D={} alpha={} beta={} seed={} iterations={}\n",
            self.num_topics(),
            self.vocab_size(),
            self.num_docs(),
            c.alpha,
            c.beta,
            c.seed,
            c.iterations
        )
    }

    /// Trace-topic matrix, one trace per row.
    pub fn theta_text(&self) -> String {
        let mut out = self.header();
        out.push_str("trace");
        for k in 0..self.num_topics() {
            let _ = write!(out, "\tt{k}");
        }
        out.push('\n');
        for (id, row) in self.doc_ids.iter().zip(&self.theta) {
            out.push_str(id);
            for p in row {
                let _ = write!(out, "\t{p}");
            }
            out.push('\n');
        }
        out
    }

    /// Topic-identifier matrix, one topic per row, terms as columns.
    pub fn phi_text(&self) -> String {
        let mut out = self.header();
        out.push_str("topic");
        for term in self.dictionary.terms() {
            let _ = write!(out, "\t{term}");
        }
        out.push('\n');
        for (k, row) in self.phi.iter().enumerate() {
            let _ = write!(out, "t{k}");
            for p in row {
                let _ = write!(out, "\t{p}");
            }
            out.push('\n');
        }
        out
    }

    /// `t<k>  word word ...` per topic.
    pub fn top_words_text(&self, n: usize) -> String {
        let mut out = String::new();
        for (k, words) in self.top_words(n).iter().enumerate() {
            let names: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
            let _ = writeln!(out, "t{k}\t{}", names.join(" "));
        }
        out
    }

    /// Per document: `term:topic` for every token.
    pub fn assignments_text(&self) -> String {
        let mut out = String::new();
        for (words, topics) in self.tokens.iter().zip(&self.assignments) {
            let pairs: Vec<String> = words
                .iter()
                .zip(topics)
                .map(|(w, t)| format!("{w}:{t}"))
                .collect();
            out.push_str(&pairs.join(" "));
            out.push('\n');
        }
        out
    }
}

fn assemble(
    matrix: &TraceIdentifierMatrix,
    config: LdaConfig,
    tokens: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    counts: Counts,
) -> TopicModel {
    let (theta, phi) = estimate(
        &counts,
        &tokens,
        config.alpha,
        config.beta,
        config.num_topics,
        matrix.vocab_size(),
    );
    TopicModel {
        config,
        doc_ids: matrix.trace_ids.clone(),
        dictionary: matrix.dictionary.clone(),
        theta,
        phi,
        tokens,
        assignments,
        doc_topic: counts.doc_topic,
        topic_word: counts.topic_word,
        topic_totals: counts.topic_totals,
        likelihood: Vec::new(),
    }
}

fn estimate(
    counts: &Counts,
    tokens: &[Vec<usize>],
    alpha: f64,
    beta: f64,
    k: usize,
    v: usize,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let theta = counts
        .doc_topic
        .iter()
        .zip(tokens)
        .map(|(row, words)| {
            let denom = words.len() as f64 + k as f64 * alpha;
            row.iter().map(|&n| (f64::from(n) + alpha) / denom).collect()
        })
        .collect();
    let phi = counts
        .topic_word
        .iter()
        .zip(&counts.topic_totals)
        .map(|(row, &total)| {
            let denom = total as f64 + v as f64 * beta;
            row.iter().map(|&n| (f64::from(n) + beta) / denom).collect()
        })
        .collect();
    (theta, phi)
}

fn log_likelihood_of(tokens: &[Vec<usize>], theta: &[Vec<f64>], phi: &[Vec<f64>]) -> f64 {
    tokens
        .iter()
        .zip(theta)
        .map(|(words, th)| {
            words
                .iter()
                .map(|&w| {
                    th.iter()
                        .zip(phi)
                        .map(|(t, row)| t * row[w])
                        .sum::<f64>()
                        .ln()
                })
                .sum::<f64>()
        })
        .sum()
}

pub mod synthetic {
    //! Corpora drawn from the LDA generative process with known topics.

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma, Poisson, Uniform};

    use crate::error::{Error, Result};
    use crate::lexicon::{TermDictionary, TraceIdentifierMatrix};

    /// A corpus whose topics each own a disjoint block of the vocabulary.
    #[derive(Debug, Clone)]
    pub struct PlantedCorpus {
        pub matrix: TraceIdentifierMatrix,
        /// Term strings of each planted topic.
        pub topics: Vec<Vec<String>>,
    }

    #[derive(Debug, Clone)]
    pub struct PlantedSpec {
        pub num_docs: usize,
        /// Words per planted topic.
        pub words_per_topic: Vec<usize>,
        /// Dirichlet concentration for each document's topic mixture.
        pub alpha: f64,
        /// Mean document length.
        pub mean_length: f64,
        pub seed: u64,
    }

    /// Per document: `N ~ Poisson(ξ)`, `θ ~ Dir(α)`, then for each token a topic
    /// from `θ` and a word uniformly from that topic's block. Zero-length
    /// draws are redrawn so every document has at least one token.
    pub fn planted(spec: &PlantedSpec) -> Result<PlantedCorpus> {
        let k = spec.words_per_topic.len();
        if k == 0 || spec.words_per_topic.contains(&0) || spec.num_docs == 0 {
            return Err(Error::Parameter("planted corpus needs topics, words and docs".into()));
        }
        let param = |e: rand_distr::PoissonError| Error::Parameter(e.to_string());
        let poisson = Poisson::new(spec.mean_length).map_err(param)?;
        let gamma = Gamma::new(spec.alpha, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

        let mut topics = Vec::with_capacity(k);
        let mut offset = 0;
        for (t, &n) in spec.words_per_topic.iter().enumerate() {
            topics.push((0..n).map(|i| format!("t{t}w{i:02}")).collect::<Vec<_>>());
            offset += n;
        }
        let dictionary = TermDictionary::from_terms(topics.iter().flatten().cloned());
        debug_assert_eq!(dictionary.len(), offset);
        let topic_ids: Vec<Vec<usize>> = topics
            .iter()
            .map(|ws| ws.iter().map(|w| dictionary.id(w).unwrap()).collect())
            .collect();

        let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
        let mut rows = Vec::with_capacity(spec.num_docs);
        for _ in 0..spec.num_docs {
            let len = loop {
                let n = poisson.sample(&mut rng) as usize;
                if n > 0 {
                    break n;
                }
            };
            let g: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = g.iter().sum();
            let theta: Vec<f64> = if total > 0.0 {
                g.iter().map(|x| x / total).collect()
            } else {
                vec![1.0 / k as f64; k]
            };

            let mut counts = vec![0u32; dictionary.len()];
            for _ in 0..len {
                let u = unit.sample(&mut rng);
                let mut acc = 0.0;
                let topic = theta
                    .iter()
                    .position(|p| {
                        acc += p;
                        u < acc
                    })
                    .unwrap_or(k - 1);
                let block = &topic_ids[topic];
                let word = block[(unit.sample(&mut rng) * block.len() as f64) as usize % block.len()];
                counts[word] += 1;
            }
            rows.push(
                counts
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, n)| n > 0)
                    .collect(),
            );
        }
        let ids = (0..spec.num_docs).map(|d| format!("doc{d:03}")).collect();
        Ok(PlantedCorpus {
            matrix: TraceIdentifierMatrix::from_counts(ids, dictionary, rows)?,
            topics,
        })
    }
}
