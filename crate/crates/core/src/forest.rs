//! Ensembles of sparsity-labelled partition trees.
//!
//! Each tree is grown on a random sample of the normalized data. A node
//! splits one coordinate into at most `k` intervals chosen to maximize the
//! variance of the children's sparsity, and every leaf stores the log2
//! sparsity of its box. A point's score is the 75th percentile of its leaf
//! scores across trees.

use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{
    normalize, sparsity, AttributeSpec, ColumnTransform, CoordKind, Dataset, Interval, NormalizationTransform,
    NormalizedData, Subcube,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::split::{best_split, CoordinateSample, SplitRule, DEFAULT_EPS};

/// Identifies the model document format.
pub const MODEL_FORMAT: &str = "pidforest-model";
pub const MODEL_VERSION: u32 = 1;

/// Percentile of the per-tree scores used as the final score.
pub const SCORE_PERCENTILE: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperParams {
    pub num_trees: usize,
    pub samples_per_tree: usize,
    pub max_degree: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            num_trees: 50,
            samples_per_tree: 100,
            max_degree: 3,
            max_depth: 10,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.num_trees < 1 {
            return bad("num_trees must be at least 1");
        }
        if self.samples_per_tree < 2 {
            return bad("samples_per_tree must be at least 2");
        }
        if !(2..=16).contains(&self.max_degree) {
            return bad("max_degree must be in 2..=16");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        Ok(())
    }
}

/// What a leaf contributes to a point's score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScoreMode {
    /// Log2 sparsity of the leaf box.
    #[default]
    Sparsity,
    /// Negated leaf depth: shallow leaves are anomalous.
    Depth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeKind<F> {
    Leaf {
        log2_sparsity: F,
    },
    Split {
        coord: usize,
        rule: SplitRule<F>,
        children: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node<F> {
    pub subcube: Subcube<F>,
    pub depth: usize,
    /// Number of sample points that reached the node.
    pub count: usize,
    pub kind: NodeKind<F>,
}

/// One tree as an arena; the root is node 0 and children follow their parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree<F> {
    nodes: Vec<Node<F>>,
}

impl<F: Scalar> Tree<F> {
    pub fn nodes(&self) -> &[Node<F>] {
        &self.nodes
    }

    pub fn root(&self) -> &Node<F> {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node<F>> {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
    }

    /// Index of the leaf a normalized point falls into.
    pub fn leaf_of(&self, x: &[F], kinds: &[CoordKind]) -> usize {
        let mut id = 0;
        while let NodeKind::Split { coord, rule, children } = &self.nodes[id].kind {
            id = children[rule.route(x[*coord], kinds[*coord])];
        }
        id
    }

    fn leaf_score(&self, leaf: usize, mode: ScoreMode) -> F {
        let node = &self.nodes[leaf];
        match (mode, &node.kind) {
            (ScoreMode::Sparsity, NodeKind::Leaf { log2_sparsity }) => *log2_sparsity,
            _ => -F::of_usize(node.depth),
        }
    }

    fn grow(data: &NormalizedData<F>, params: &HyperParams, tree_index: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(tree_index as u64);
        let size = params.samples_per_tree.min(data.n());
        let sample = index::sample(&mut rng, data.n(), size).into_vec();
        let eps = F::of(DEFAULT_EPS);

        let mut nodes = vec![Node {
            subcube: Subcube::full(data.kinds()),
            depth: 0,
            count: size,
            kind: NodeKind::Leaf { log2_sparsity: F::zero() },
        }];
        let mut pending = vec![(0usize, sample)];
        while let Some((id, points)) = pending.pop() {
            let depth = nodes[id].depth;
            let children = if depth <= params.max_depth && points.len() > 1 {
                split_node(data, &nodes[id].subcube, &points, params.max_degree, eps)
            } else {
                None
            };
            match children {
                Some((coord, rule, parts)) => {
                    let mut ids = Vec::with_capacity(parts.len());
                    for (interval, members) in parts {
                        let child = Node {
                            subcube: nodes[id].subcube.with_interval(coord, interval),
                            depth: depth + 1,
                            count: members.len(),
                            kind: NodeKind::Leaf { log2_sparsity: F::zero() },
                        };
                        ids.push(nodes.len());
                        pending.push((nodes.len(), members));
                        nodes.push(child);
                    }
                    nodes[id].kind = NodeKind::Split { coord, rule, children: ids };
                }
                None => {
                    let node = &mut nodes[id];
                    let log2_sparsity = sparsity(&node.subcube, points.len()).expect("leaves are nonempty and nondegenerate");
                    node.kind = NodeKind::Leaf { log2_sparsity };
                }
            }
        }
        Tree { nodes }
    }
}

type Children<F> = (usize, SplitRule<F>, Vec<(Interval<F>, Vec<usize>)>);

/// Best split of one node and the resulting child intervals and sample sets.
fn split_node<F: Scalar>(
    data: &NormalizedData<F>,
    cube: &Subcube<F>,
    points: &[usize],
    k: usize,
    eps: F,
) -> Option<Children<F>> {
    let columns: Vec<(usize, Vec<F>)> = (0..data.d())
        .filter(|&j| data.splittable()[j])
        .map(|j| {
            let mut v: Vec<F> = points.iter().map(|&p| data.value(p, j)).collect();
            v.sort_unstable_by(|a, b| a.total_cmp(b));
            (j, v)
        })
        .collect();
    let samples: Vec<CoordinateSample<'_, F>> = columns
        .iter()
        .map(|(j, v)| CoordinateSample {
            coord: *j,
            kind: data.kinds()[*j],
            interval: &cube.intervals()[*j],
            values: v,
        })
        .collect();
    let best = best_split(&samples, k, eps)?;
    let intervals = best.rule.child_intervals(&cube.intervals()[best.coord]).ok()?;
    let kind = data.kinds()[best.coord];
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); intervals.len()];
    for &p in points {
        parts[best.rule.route(data.value(p, best.coord), kind)].push(p);
    }
    // The solver only proposes nonempty cells of positive length; anything
    // else (adjacent-float corner cases) keeps the node a leaf.
    if parts.iter().any(Vec::is_empty) || intervals.iter().any(|i| !(i.length() > F::zero())) {
        return None;
    }
    Some((best.coord, best.rule, intervals.into_iter().zip(parts).collect()))
}

/// Linear interpolation between order statistics at rank `q * (len - 1)`.
pub fn percentile<F: Scalar>(values: &mut [F], q: f64) -> F {
    assert!(!values.is_empty(), "percentile of an empty set");
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    let rank = q * (values.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(values.len() - 1);
    let frac = F::of(rank - lo as f64);
    values[lo] + frac * (values[hi] - values[lo])
}

/// A witness coordinate range in original units.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FeatureRange<F> {
    /// Continuous range, or ordered categorical codes `lo..=hi`.
    Range { lo: F, hi: F },
    /// Admissible codes of an unordered categorical column.
    Codes(Vec<u32>),
}

impl<F: Scalar> FeatureRange<F> {
    pub fn contains(&self, raw: F) -> bool {
        match self {
            FeatureRange::Range { lo, hi } => *lo <= raw && raw <= *hi,
            FeatureRange::Codes(codes) => raw.to_u32().is_some_and(|c| codes.contains(&c)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessFeature<F> {
    pub coord: usize,
    pub name: String,
    pub range: FeatureRange<F>,
    /// Length of the range in normalized units.
    pub normalized_length: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport<F> {
    pub score: F,
    /// Tree whose leaf supplies the witness.
    pub tree: usize,
    pub leaf: usize,
    /// Constrained coordinates of the witness box, narrowest first.
    pub witness: Vec<WitnessFeature<F>>,
}

impl<F: Scalar> ScoreReport<F> {
    /// Whether a raw row lies inside the witness box.
    pub fn witness_contains(&self, raw: &[F]) -> bool {
        self.witness.iter().all(|w| w.range.contains(raw[w.coord]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forest<F> {
    names: Vec<String>,
    transform: NormalizationTransform<F>,
    kinds: Vec<CoordKind>,
    params: HyperParams,
    trees: Vec<Tree<F>>,
}

impl<F: Scalar> Forest<F> {
    pub fn fit(dataset: &Dataset<F>, params: &HyperParams) -> Result<Self> {
        params.validate()?;
        let (data, transform) = normalize(dataset)?;
        if data.n() > 1 && !data.has_usable_attribute() {
            return Err(Error::NoUsableAttributes);
        }
        let trees = (0..params.num_trees)
            .into_par_iter()
            .map(|i| Tree::grow(&data, params, i))
            .collect();
        Ok(Self {
            names: dataset.names().to_vec(),
            kinds: transform.coord_kinds(),
            transform,
            params: *params,
            trees,
        })
    }

    pub fn trees(&self) -> &[Tree<F>] {
        &self.trees
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn transform(&self) -> &NormalizationTransform<F> {
        &self.transform
    }

    pub fn kinds(&self) -> &[CoordKind] {
        &self.kinds
    }

    /// Rejects datasets whose columns do not match the training schema.
    pub fn check_schema(&self, dataset: &Dataset<F>) -> Result<()> {
        if dataset.names() != self.names.as_slice() {
            return Err(Error::SchemaMismatch(format!(
                "columns {:?} do not match model columns {:?}",
                dataset.names(),
                self.names
            )));
        }
        for (j, (spec, t)) in dataset.columns().iter().zip(&self.transform.columns).enumerate() {
            let ok = match (spec, t) {
                (AttributeSpec::Continuous { .. }, ColumnTransform::Affine { .. } | ColumnTransform::Constant { .. }) => true,
                (AttributeSpec::CategoricalOrdered { domain_size: a }, ColumnTransform::Ordered { domain_size: b }) => a == b,
                (AttributeSpec::CategoricalUnordered { domain_size: a }, ColumnTransform::Unordered { domain_size: b }) => a == b,
                _ => false,
            };
            if !ok {
                return Err(Error::SchemaMismatch(format!("column {} has a different kind than in the model", self.names[j])));
            }
        }
        Ok(())
    }

    /// Per-tree leaves and the percentile score of one raw row.
    fn score_one(&self, raw: &[F], row: usize, mode: ScoreMode, buf: &mut Vec<F>, leaves: &mut Vec<(usize, F)>) -> Result<F> {
        buf.clear();
        self.transform.apply_row(raw, row, buf)?;
        leaves.clear();
        leaves.extend(self.trees.iter().map(|t| {
            let leaf = t.leaf_of(buf, &self.kinds);
            (leaf, t.leaf_score(leaf, mode))
        }));
        let mut scores: Vec<F> = leaves.iter().map(|l| l.1).collect();
        Ok(percentile(&mut scores, SCORE_PERCENTILE))
    }

    /// Scores only, in row order.
    pub fn score_values(&self, dataset: &Dataset<F>, mode: ScoreMode) -> Result<Vec<F>> {
        self.check_schema(dataset)?;
        (0..dataset.n())
            .into_par_iter()
            .map_init(
                || (Vec::with_capacity(self.kinds.len()), Vec::with_capacity(self.trees.len())),
                |(buf, leaves), i| self.score_one(dataset.row(i), i, mode, buf, leaves),
            )
            .collect()
    }

    /// Scores with witness boxes, in row order.
    pub fn score(&self, dataset: &Dataset<F>, mode: ScoreMode) -> Result<Vec<ScoreReport<F>>> {
        self.check_schema(dataset)?;
        (0..dataset.n())
            .into_par_iter()
            .map_init(
                || (Vec::with_capacity(self.kinds.len()), Vec::with_capacity(self.trees.len())),
                |(buf, leaves), i| {
                    let raw = dataset.row(i);
                    let score = self.score_one(raw, i, mode, buf, leaves)?;
                    Ok(self.report(raw, score, leaves))
                },
            )
            .collect()
    }

    /// Scores a single raw row.
    pub fn score_row(&self, raw: &[F], mode: ScoreMode) -> Result<ScoreReport<F>> {
        let (mut buf, mut leaves) = (Vec::new(), Vec::new());
        let score = self.score_one(raw, 0, mode, &mut buf, &mut leaves)?;
        Ok(self.report(raw, score, &leaves))
    }

    fn report(&self, raw: &[F], score: F, leaves: &[(usize, F)]) -> ScoreReport<F> {
        // Smallest tree score at or above the percentile, lowest tree index on ties.
        let pick = leaves
            .iter()
            .enumerate()
            .filter(|(_, l)| l.1 >= score)
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
            .or_else(|| leaves.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0))))
            .map(|(t, l)| (t, l.0))
            .expect("at least one tree");
        let (tree, leaf) = pick;
        let cube = &self.trees[tree].nodes[leaf].subcube;
        let mut witness: Vec<WitnessFeature<F>> = cube
            .constrained()
            .map(|j| WitnessFeature {
                coord: j,
                name: self.names[j].clone(),
                range: self.original_range(j, &cube.intervals()[j], raw[j]),
                normalized_length: cube.intervals()[j].length(),
            })
            .collect();
        witness.sort_by(|a, b| a.normalized_length.total_cmp(&b.normalized_length).then(a.coord.cmp(&b.coord)));
        ScoreReport { score, tree, leaf, witness }
    }

    /// Maps a normalized interval back to original units. Continuous ranges are
    /// widened to the raw value when clipping or rounding leaves it outside.
    fn original_range(&self, j: usize, interval: &Interval<F>, raw: F) -> FeatureRange<F> {
        let t = &self.transform.columns[j];
        match (interval, t) {
            (Interval::Codes { codes, .. }, _) => FeatureRange::Codes(codes.clone()),
            (Interval::Range { lo, hi }, ColumnTransform::Ordered { .. }) => FeatureRange::Range {
                lo: t.inverse(*lo).round(),
                hi: t.inverse(*hi).round() - F::one(),
            },
            (Interval::Range { lo, hi }, _) => FeatureRange::Range {
                lo: t.inverse(*lo).min(raw),
                hi: t.inverse(*hi).max(raw),
            },
        }
    }

    /// Serializes to the versioned JSON model document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DocumentRef {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            scalar: F::NAME,
            columns: &self.names,
            params: &self.params,
            transform: &self.transform,
            trees: &self.trees,
        })?)
    }

    /// Parses a model document, rejecting other versions and inconsistent trees.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        if value.get("format").and_then(|v| v.as_str()) != Some(MODEL_FORMAT) {
            return Err(Error::MalformedModel("not a pidforest model document".into()));
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_VERSION as u64 => {}
            _ => {
                let found = value.get("version").map_or_else(|| "missing".to_string(), |v| v.to_string());
                return Err(Error::UnsupportedVersion {
                    found,
                    expected: MODEL_VERSION,
                });
            }
        }
        // Re-parse from text rather than from `value` so floats keep their exact bits.
        let doc: DocumentOwned<F> = serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        if doc.scalar != F::NAME {
            return Err(Error::MalformedModel(format!("model uses {} scalars, expected {}", doc.scalar, F::NAME)));
        }
        doc.params.validate().map_err(|e| Error::MalformedModel(e.to_string()))?;
        let forest = Self {
            kinds: doc.transform.coord_kinds(),
            names: doc.columns,
            transform: doc.transform,
            params: doc.params,
            trees: doc.trees,
        };
        forest.validate()?;
        Ok(forest)
    }

    fn validate(&self) -> Result<()> {
        let d = self.kinds.len();
        let bad = |msg: String| Err(Error::MalformedModel(msg));
        if self.names.len() != d {
            return bad(format!("{} column names for {d} columns", self.names.len()));
        }
        if self.trees.is_empty() {
            return bad("model has no trees".into());
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return bad(format!("tree {t} is empty"));
            }
            for (i, node) in tree.nodes.iter().enumerate() {
                if node.subcube.dim() != d {
                    return bad(format!("tree {t} node {i} has the wrong dimension"));
                }
                if let NodeKind::Split { coord, rule, children } = &node.kind {
                    let ok = *coord < d
                        && rule.arity() == children.len()
                        && children.iter().all(|&c| c > i && c < tree.nodes.len());
                    if !ok {
                        return bad(format!("tree {t} node {i} has an invalid split"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize)]
struct DocumentRef<'a, F> {
    format: &'static str,
    version: u32,
    scalar: &'static str,
    columns: &'a [String],
    params: &'a HyperParams,
    transform: &'a NormalizationTransform<F>,
    trees: &'a [Tree<F>],
}

#[derive(Deserialize)]
#[serde(bound = "F: Scalar")]
struct DocumentOwned<F> {
    scalar: String,
    columns: Vec<String>,
    params: HyperParams,
    transform: NormalizationTransform<F>,
    trees: Vec<Tree<F>>,
}
