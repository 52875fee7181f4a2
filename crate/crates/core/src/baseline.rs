//! Isolation forest baseline.
//!
//! Trees split a random coordinate at a uniform threshold inside the node's
//! observed range, down to depth `ceil(log2 m)`. A point's path length is
//! its leaf depth plus the expected depth `c(size)` of the unbuilt subtree,
//! and the score is `2^(-E[path] / c(m))`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{normalize, Dataset, NormalizationTransform, NormalizedData};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Harmonic number `H(n) = 1 + 1/2 + ... + 1/n`, summed exactly in `f64`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|i| 1.0 / i as f64).sum()
}

/// Average path length of an unsuccessful search in a binary search tree of `n` keys.
pub fn average_path_length(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => 2.0 * harmonic(n - 1) - 2.0 * (n - 1) as f64 / n as f64,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IsoNode<F> {
    Leaf {
        size: usize,
        depth: usize,
    },
    Split {
        coord: usize,
        threshold: F,
        /// Values below the threshold go left.
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoTree<F> {
    nodes: Vec<IsoNode<F>>,
}

impl<F: Scalar> IsoTree<F> {
    pub fn nodes(&self) -> &[IsoNode<F>] {
        &self.nodes
    }

    fn grow(data: &NormalizedData<F>, sample_size: usize, seed: u64, tree_index: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tree_index as u64);
        let sample = index::sample(&mut rng, data.n(), sample_size).into_vec();
        let limit = (sample_size as f64).log2().ceil() as usize;
        let mut nodes = vec![IsoNode::Leaf { size: sample.len(), depth: 0 }];
        let mut pending = vec![(0usize, 0usize, sample)];
        while let Some((id, depth, points)) = pending.pop() {
            if depth >= limit || points.len() <= 1 {
                nodes[id] = IsoNode::Leaf { size: points.len(), depth };
                continue;
            }
            let ranges: Vec<(usize, F, F)> = (0..data.d())
                .filter_map(|j| {
                    let (lo, hi) = points.iter().fold((F::infinity(), F::neg_infinity()), |(lo, hi), &p| {
                        let v = data.value(p, j);
                        (lo.min(v), hi.max(v))
                    });
                    (hi > lo).then_some((j, lo, hi))
                })
                .collect();
            if ranges.is_empty() {
                nodes[id] = IsoNode::Leaf { size: points.len(), depth };
                continue;
            }
            let (coord, lo, hi) = ranges[rng.random_range(0..ranges.len())];
            let threshold = loop {
                let t = lo + (hi - lo) * F::of(rng.random::<f64>());
                if t > lo {
                    break t;
                }
            };
            let (l, r): (Vec<usize>, Vec<usize>) = points.into_iter().partition(|&p| data.value(p, coord) < threshold);
            let (left, right) = (nodes.len(), nodes.len() + 1);
            nodes.push(IsoNode::Leaf { size: l.len(), depth: depth + 1 });
            nodes.push(IsoNode::Leaf { size: r.len(), depth: depth + 1 });
            nodes[id] = IsoNode::Split { coord, threshold, left, right };
            pending.push((left, depth + 1, l));
            pending.push((right, depth + 1, r));
        }
        IsoTree { nodes }
    }

    /// Leaf depth plus the expected depth of the unexpanded remainder.
    pub fn path_length(&self, x: &[F]) -> f64 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                IsoNode::Leaf { size, depth } => return *depth as f64 + average_path_length(*size),
                IsoNode::Split { coord, threshold, left, right } => {
                    id = if x[*coord] < *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn max_depth(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                IsoNode::Leaf { depth, .. } => Some(*depth),
                IsoNode::Split { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsoParams {
    pub num_trees: usize,
    pub samples_per_tree: usize,
    pub seed: u64,
}

impl Default for IsoParams {
    fn default() -> Self {
        Self {
            num_trees: 100,
            samples_per_tree: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsolationForest<F> {
    names: Vec<String>,
    transform: NormalizationTransform<F>,
    sample_size: usize,
    trees: Vec<IsoTree<F>>,
}

impl<F: Scalar> IsolationForest<F> {
    /// Fits on the same normalized coordinates the partition forest uses.
    pub fn fit(dataset: &Dataset<F>, params: &IsoParams) -> Result<Self> {
        if params.num_trees == 0 || params.samples_per_tree == 0 {
            return Err(Error::InvalidParameter("num_trees and samples_per_tree must be positive".into()));
        }
        let (data, transform) = normalize(dataset)?;
        if data.n() > 1 && !data.has_usable_attribute() {
            return Err(Error::NoUsableAttributes);
        }
        let sample_size = params.samples_per_tree.min(data.n());
        let trees = (0..params.num_trees)
            .into_par_iter()
            .map(|i| IsoTree::grow(&data, sample_size, params.seed, i))
            .collect();
        Ok(Self {
            names: dataset.names().to_vec(),
            transform,
            sample_size,
            trees,
        })
    }

    pub fn trees(&self) -> &[IsoTree<F>] {
        &self.trees
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Anomaly scores in `(0, 1]`, higher is more anomalous.
    pub fn score_values(&self, dataset: &Dataset<F>) -> Result<Vec<f64>> {
        if dataset.names() != self.names.as_slice() {
            return Err(Error::SchemaMismatch("columns do not match the fitted baseline".into()));
        }
        let norm = average_path_length(self.sample_size);
        (0..dataset.n())
            .into_par_iter()
            .map_init(Vec::new, |buf, i| {
                buf.clear();
                self.transform.apply_row(dataset.row(i), i, buf)?;
                if norm <= 0.0 {
                    return Ok(1.0);
                }
                let mean = self.trees.iter().map(|t| t.path_length(buf)).sum::<f64>() / self.trees.len() as f64;
                Ok((-mean / norm).exp2())
            })
            .collect()
    }
}
