//! Post-model analytics: topic categories, class-topic weights, fuzzy λ-cut
//! clustering of classes, heat-map grids and F-measure.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::TraceIdentifierMatrix;
use crate::topics::TopicModel;

/// Cosine similarity of two non-negative vectors, clamped to `[0, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Parameter(format!(
            "cosine of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Parameter("cosine of a zero vector".into()));
    }
    Ok((dot / (nu * nv)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub id: usize,
    pub topics: Vec<usize>,
    /// Topic pairs whose similarity cleared the threshold.
    pub links: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicGrouping {
    pub threshold: f64,
    pub categories: Vec<Category>,
    /// Topics linked to no other topic.
    pub rest: Vec<usize>,
    /// Per topic, the categories it belongs to.
    pub memberships: Vec<Vec<usize>>,
}

/// Links every topic pair with cosine above `threshold` and returns the
/// connected groups (single-link chaining) as categories.
pub fn group_topics(phi: &[Vec<f64>], threshold: f64) -> Result<TopicGrouping> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Parameter(format!(
            "category threshold must be in (0, 1], got {threshold}"
        )));
    }
    let n = phi.len();
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if cosine(&phi[i], &phi[j])? > threshold {
                links.push((i, j));
            }
        }
    }

    let mut sets = DisjointSets::new(n);
    for &(i, j) in &links {
        sets.union(i, j);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for t in 0..n {
        groups.entry(sets.find(t)).or_default().push(t);
    }

    let mut categories = Vec::new();
    let mut rest = Vec::new();
    let mut memberships = vec![Vec::new(); n];
    let mut ordered: Vec<Vec<usize>> = groups.into_values().collect();
    ordered.sort_by_key(|g| g[0]);
    for topics in ordered {
        if topics.len() < 2 {
            rest.push(topics[0]);
            continue;
        }
        let id = categories.len();
        for &t in &topics {
            memberships[t].push(id);
        }
        let group_links = links
            .iter()
            .copied()
            .filter(|(i, _)| topics.binary_search(i).is_ok())
            .collect();
        categories.push(Category {
            id,
            topics,
            links: group_links,
        });
    }
    Ok(TopicGrouping {
        threshold,
        categories,
        rest,
        memberships,
    })
}

impl TopicGrouping {
    pub fn to_text(&self, top_words: &[Vec<(String, f64)>]) -> String {
        let label = |t: usize| {
            top_words
                .get(t)
                .map(|ws| ws.iter().map(|(w, _)| w.as_str()).collect::<Vec<_>>().join(" "))
                .unwrap_or_default()
        };
        let mut out = format!("# threshold={}\ncategory\ttopic\twords\n", self.threshold);
        for c in &self.categories {
            for &t in &c.topics {
                let _ = writeln!(out, "c{}\tt{}\t{}", c.id, t, label(t));
            }
        }
        for &t in &self.rest {
            let _ = writeln!(out, "rest\tt{}\t{}", t, label(t));
        }
        out
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index becomes the root so group order is stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTopicMatrix {
    pub classes: Vec<String>,
    pub num_topics: usize,
    /// Row per class; each row sums to 1.
    pub weights: Vec<Vec<f64>>,
    /// Classes dropped because none of their kept methods carried terms.
    pub excluded: Vec<String>,
    pub formula: String,
}

pub const CLASS_TOPIC_FORMULA: &str =
    "w(c,k) = sum_v phi[k][v] * n(c,v) / sum_k' sum_v phi[k'][v] * n(c,v); n(c,v) = term counts of the class's kept methods";

/// Normalized topic weights for one bag of term counts.
pub fn topic_weights(phi: &[Vec<f64>], terms: &[(usize, u32)]) -> Option<Vec<f64>> {
    let raw: Vec<f64> = phi
        .iter()
        .map(|row| terms.iter().map(|&(v, n)| row[v] * f64::from(n)).sum())
        .collect();
    let total: f64 = raw.iter().sum();
    (total > 0.0).then(|| raw.into_iter().map(|x| x / total).collect())
}

/// Aggregates kept-method term counts per class and weighs them by `φ`.
pub fn class_topic_matrix(model: &TopicModel, matrix: &TraceIdentifierMatrix) -> Result<ClassTopicMatrix> {
    if model.vocab_size() != matrix.vocab_size() {
        return Err(Error::StaleArtifact {
            artifact: "model".into(),
            reason: format!(
                "model vocabulary {} != matrix vocabulary {}",
                model.vocab_size(),
                matrix.vocab_size()
            ),
        });
    }
    let mut per_class: BTreeMap<&str, BTreeMap<usize, u32>> = BTreeMap::new();
    for (key, terms) in matrix.methods.iter().zip(&matrix.method_terms) {
        let acc = per_class.entry(key.class_name()).or_default();
        for &(v, n) in terms {
            *acc.entry(v).or_insert(0) += n;
        }
    }

    let mut classes = Vec::new();
    let mut weights = Vec::new();
    let mut excluded = Vec::new();
    for (class, terms) in per_class {
        let terms: Vec<(usize, u32)> = terms.into_iter().collect();
        match topic_weights(&model.phi, &terms) {
            Some(w) => {
                classes.push(class.to_string());
                weights.push(w);
            }
            None => {
                log::warn!("class {class} has no terms; excluded from class-topic matrix");
                excluded.push(class.to_string());
            }
        }
    }
    if classes.is_empty() {
        return Err(Error::Empty("no class carries any term".into()));
    }
    Ok(ClassTopicMatrix {
        classes,
        num_topics: model.num_topics(),
        weights,
        excluded,
        formula: CLASS_TOPIC_FORMULA.to_string(),
    })
}

impl ClassTopicMatrix {
    /// A matrix from given rows.
    pub fn from_rows(classes: Vec<String>, weights: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.first().map_or(0, Vec::len);
        if classes.len() != weights.len() || weights.iter().any(|r| r.len() != k) {
            return Err(Error::Parameter("ragged class-topic rows".into()));
        }
        if weights.iter().flatten().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::Parameter("class-topic weights must lie in [0, 1]".into()));
        }
        Ok(ClassTopicMatrix {
            classes,
            num_topics: k,
            weights,
            excluded: Vec::new(),
            formula: "given".into(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\nclass", self.formula);
        for k in 0..self.num_topics {
            let _ = write!(out, "\tt{k}");
        }
        out.push('\n');
        for (class, row) in self.classes.iter().zip(&self.weights) {
            out.push_str(class);
            for w in row {
                let _ = write!(out, "\t{w}");
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise cosine over rows with an exact unit diagonal.
pub fn similarity_matrix(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = rows.len();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        sim[i][i] = 1.0;
        for j in i + 1..n {
            let s = cosine(&rows[i], &rows[j])?;
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    Ok(sim)
}

/// `(R∘R)_ij = max_k min(R_ik, R_kj)`.
pub fn max_min_compose(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = r.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (0..n).map(|k| r[i][k].min(r[k][j])).fold(0.0, f64::max);
        }
    }
    out
}

/// Squares `R` under max-min composition until it stops changing. Returns
/// the closure and the number of squarings that changed something.
pub fn max_min_closure(r: &[Vec<f64>]) -> (Vec<Vec<f64>>, usize) {
    let mut current = r.to_vec();
    let mut squarings = 0;
    loop {
        let next = max_min_compose(&current);
        if next == current {
            return (current, squarings);
        }
        current = next;
        squarings += 1;
    }
}

/// Classes grouped by `R_ij >= λ` on a closed (transitive) matrix; groups
/// ordered by their first member.
pub fn lambda_cut(closure: &[Vec<f64>], lambda: f64) -> Vec<Vec<usize>> {
    let n = closure.len();
    let mut sets = DisjointSets::new(n);
    for (i, row) in closure.iter().enumerate() {
        for (j, &r) in row.iter().enumerate().skip(i + 1) {
            if r >= lambda {
                sets.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        groups.entry(sets.find(i)).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    pub lambda: f64,
    pub clusters: Vec<Vec<String>>,
}

/// The λ-independent part of class clustering, kept so cuts are cheap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyClassClustering {
    pub classes: Vec<String>,
    pub similarity: Vec<Vec<f64>>,
    pub closure: Vec<Vec<f64>>,
    pub squarings: usize,
}

impl FuzzyClassClustering {
    pub fn new(ctm: &ClassTopicMatrix) -> Result<Self> {
        if ctm.classes.is_empty() {
            return Err(Error::Empty("no classes to cluster".into()));
        }
        let similarity = similarity_matrix(&ctm.weights)?;
        let (closure, squarings) = max_min_closure(&similarity);
        Ok(FuzzyClassClustering {
            classes: ctm.classes.clone(),
            similarity,
            closure,
            squarings,
        })
    }

    pub fn cut(&self, lambda: f64) -> Result<ClusterPartition> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Parameter(format!("lambda must be in [0, 1], got {lambda}")));
        }
        let clusters = lambda_cut(&self.closure, lambda)
            .into_iter()
            .map(|g| g.into_iter().map(|i| self.classes[i].clone()).collect())
            .collect();
        Ok(ClusterPartition { lambda, clusters })
    }

    pub fn closure_text(&self) -> String {
        let mut out = String::from("class");
        for c in &self.classes {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.closure) {
            out.push_str(c);
            for x in row {
                let _ = write!(out, "\t{x}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn lambda_cut_clusters(ctm: &ClassTopicMatrix, lambda: f64) -> Result<ClusterPartition> {
    FuzzyClassClustering::new(ctm)?.cut(lambda)
}

impl ClusterPartition {
    pub fn to_text(&self) -> String {
        let mut out = format!("# lambda={}\ncluster\tclass\n", self.lambda);
        for (i, cluster) in self.clusters.iter().enumerate() {
            for class in cluster {
                let _ = writeln!(out, "{i}\t{class}");
            }
        }
        out
    }
}

/// Harmonic mean of precision and recall; 0 when either is 0.
pub fn f_measure(precision: f64, recall: f64) -> Result<f64> {
    for (name, x) in [("precision", precision), ("recall", recall)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Parameter(format!("{name} must be in [0, 1], got {x}")));
        }
    }
    if precision == 0.0 && recall == 0.0 {
        log::warn!("f-measure of zero precision and recall defined as 0");
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadeNormalization {
    #[default]
    Global,
    PerRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub class: String,
    pub topic: usize,
    pub weight: f64,
    pub shade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub normalization: ShadeNormalization,
    pub cells: Vec<HeatCell>,
}

/// Shade is the weight divided by the global (or row) maximum.
pub fn export_heatmap(ctm: &ClassTopicMatrix, normalization: ShadeNormalization) -> Result<Heatmap> {
    if ctm.classes.is_empty() || ctm.num_topics == 0 {
        return Err(Error::Empty("empty class-topic matrix".into()));
    }
    let global = ctm.weights.iter().flatten().copied().fold(0.0, f64::max);
    let mut cells = Vec::with_capacity(ctm.classes.len() * ctm.num_topics);
    for (class, row) in ctm.classes.iter().zip(&ctm.weights) {
        let max = match normalization {
            ShadeNormalization::Global => global,
            ShadeNormalization::PerRow => row.iter().copied().fold(0.0, f64::max),
        };
        for (topic, &weight) in row.iter().enumerate() {
            cells.push(HeatCell {
                class: class.clone(),
                topic,
                weight,
                shade: if max > 0.0 { weight / max } else { 0.0 },
            });
        }
    }
    Ok(Heatmap {
        normalization,
        cells,
    })
}

impl Heatmap {
    pub fn to_text(&self) -> String {
        let mut out = String::from("class\ttopic\tweight\tshade\n");
        for c in &self.cells {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", c.class, c.topic, c.weight, c.shade);
        }
        out
    }
}
