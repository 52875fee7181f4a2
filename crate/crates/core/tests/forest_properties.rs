use pidforest::data::{gen_gaussian_mixture, gen_masking, MaskingConfig, MixtureConfig};
use pidforest::forest::{FeatureRange, NodeKind, Tree};
use pidforest::{normalize, ColumnKind, CoordKind, Dataset, Error, Forest, HyperParams, Interval, ScoreMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two continuous columns, one ordered (domain 5) and one unordered (domain 4).
fn mixed(n: usize, seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n)
        .flat_map(|_| {
            [
                rng.random_range(-3.0..7.0),
                rng.random::<f64>().powi(3) * 100.0,
                rng.random_range(0..5) as f64,
                rng.random_range(0..4) as f64,
            ]
        })
        .collect();
    let kinds = [
        ColumnKind::Continuous,
        ColumnKind::Continuous,
        ColumnKind::CategoricalOrdered { domain_size: 5 },
        ColumnKind::CategoricalUnordered { domain_size: 4 },
    ];
    let names = ["a", "b", "ord", "cat"].map(String::from).to_vec();
    Dataset::from_values(names, &kinds, values, None).unwrap()
}

/// Interval length recomputed from first principles.
fn length(i: &Interval<f64>) -> f64 {
    match i {
        Interval::Range { lo, hi } => hi - lo,
        Interval::Codes { codes, domain_size } => codes.len() as f64 / *domain_size as f64,
    }
}

fn log2_volume(t: &Tree<f64>, id: usize) -> f64 {
    t.nodes()[id].subcube.intervals().iter().map(|i| length(i).log2()).sum()
}

fn check_tree(t: &Tree<f64>, params: &HyperParams) {
    for (id, node) in t.nodes().iter().enumerate() {
        match &node.kind {
            NodeKind::Leaf { log2_sparsity } => {
                assert!(node.count >= 1);
                assert!(node.depth <= params.max_depth + 1);
                let expected = log2_volume(t, id) - (node.count as f64).log2();
                assert!((log2_sparsity - expected).abs() < 1e-12, "leaf {id}: {log2_sparsity} vs {expected}");
                assert_eq!(*log2_sparsity, pidforest::sparsity(&node.subcube, node.count).unwrap());
            }
            NodeKind::Split { coord, children, .. } => {
                assert!((2..=params.max_degree).contains(&children.len()));
                assert!(node.depth <= params.max_depth);
                let mut counts = 0;
                let mut volume = 0.0;
                for &c in children {
                    assert!(c > id, "child {c} precedes parent {id}");
                    let child = &t.nodes()[c];
                    assert_eq!(child.depth, node.depth + 1);
                    counts += child.count;
                    volume += log2_volume(t, c).exp2();
                    // Children only differ from the parent on the split coordinate.
                    for (j, (ci, pi)) in child.subcube.intervals().iter().zip(node.subcube.intervals()).enumerate() {
                        if j != *coord {
                            assert_eq!(ci, pi);
                        }
                    }
                }
                assert_eq!(counts, node.count);
                assert!((volume.log2() - log2_volume(t, id)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn leaf_score_and_partition_laws_hold() {
    let ds = mixed(400, 1);
    let params = HyperParams { num_trees: 12, samples_per_tree: 150, max_degree: 4, max_depth: 6, seed: 7 };
    let forest = Forest::fit(&ds, &params).unwrap();
    assert_eq!(forest.trees().len(), 12);
    for t in forest.trees() {
        assert_eq!(t.root().count, 150);
        check_tree(t, &params);
    }
}

#[test]
fn child_cells_partition_the_parent_cell() {
    let ds = mixed(300, 2);
    let forest = Forest::fit(&ds, &HyperParams { num_trees: 5, seed: 3, ..Default::default() }).unwrap();
    let (data, _) = normalize(&ds).unwrap();
    let kinds: Vec<CoordKind> = forest.kinds().to_vec();
    for t in forest.trees() {
        for i in 0..data.n() {
            let x = data.row(i);
            // Exactly one child of every internal node on the path contains the point.
            let mut id = 0;
            loop {
                let node = &t.nodes()[id];
                assert!(node.subcube.contains(x), "node {id} does not contain row {i}");
                let NodeKind::Split { children, .. } = &node.kind else { break };
                let holders: Vec<usize> = children.iter().copied().filter(|&c| t.nodes()[c].subcube.contains(x)).collect();
                assert_eq!(holders.len(), 1, "row {i} in {} children of node {id}", holders.len());
                id = holders[0];
            }
            assert_eq!(id, t.leaf_of(x, &kinds));
        }
    }
}

#[test]
fn single_tree_score_is_the_leaf_sparsity() {
    let ds = mixed(200, 4);
    let forest = Forest::fit(&ds, &HyperParams { num_trees: 1, seed: 11, ..Default::default() }).unwrap();
    let (data, _) = normalize(&ds).unwrap();
    let t = &forest.trees()[0];
    let scores = forest.score_values(&ds, ScoreMode::Sparsity).unwrap();
    for (i, s) in scores.iter().enumerate() {
        let leaf = t.leaf_of(data.row(i), forest.kinds());
        let NodeKind::Leaf { log2_sparsity } = t.nodes()[leaf].kind else { panic!("not a leaf") };
        assert_eq!(*s, log2_sparsity);
    }
}

#[test]
fn witness_contains_the_point_in_original_units() {
    let train = mixed(300, 5);
    let forest = Forest::fit(&train, &HyperParams { num_trees: 20, seed: 2, ..Default::default() }).unwrap();
    // Held-out rows include values outside the training range, which get clipped.
    let mut rows: Vec<Vec<f64>> = train.rows().take(50).map(<[f64]>::to_vec).collect();
    rows.push(vec![-50.0, 1e4, 4.0, 0.0]);
    rows.push(vec![9.0, -1.0, 0.0, 3.0]);
    let kinds: Vec<ColumnKind> = train.columns().iter().map(|c| c.kind()).collect();
    let held = Dataset::from_rows(train.names().to_vec(), &kinds, &rows, None).unwrap();
    for (raw, report) in held.rows().zip(forest.score(&held, ScoreMode::Sparsity).unwrap()) {
        assert!(report.witness_contains(raw), "{raw:?} outside {:?}", report.witness);
        for w in &report.witness {
            match (&w.range, w.coord) {
                (FeatureRange::Codes(codes), 3) => assert!(!codes.is_empty() && codes.len() < 4),
                (FeatureRange::Range { lo, hi }, 0..=2) => assert!(lo <= hi),
                (range, j) => panic!("unexpected range {range:?} on column {j}"),
            }
        }
        // Narrowest first.
        assert!(report.witness.windows(2).all(|p| p[0].normalized_length <= p[1].normalized_length));
    }
}

#[test]
fn witness_tree_attains_the_smallest_score_above_the_percentile() {
    let ds = mixed(250, 8);
    let forest = Forest::fit(&ds, &HyperParams { num_trees: 9, seed: 4, ..Default::default() }).unwrap();
    let (data, _) = normalize(&ds).unwrap();
    for (i, report) in forest.score(&ds, ScoreMode::Sparsity).unwrap().iter().enumerate() {
        let per_tree: Vec<f64> = forest
            .trees()
            .iter()
            .map(|t| match t.nodes()[t.leaf_of(data.row(i), forest.kinds())].kind {
                NodeKind::Leaf { log2_sparsity } => log2_sparsity,
                _ => unreachable!(),
            })
            .collect();
        let mut sorted = per_tree.clone();
        sorted.sort_by(f64::total_cmp);
        // Nine trees put the 75th percentile exactly on the seventh order statistic.
        assert_eq!(report.score, sorted[6]);
        let best = (0..9).filter(|&t| per_tree[t] >= report.score).min_by(|&a, &b| per_tree[a].total_cmp(&per_tree[b]).then(a.cmp(&b)));
        assert_eq!(Some(report.tree), best);
    }
}

#[test]
fn equal_seeds_give_equal_forests() {
    let ds = mixed(200, 9);
    let p = HyperParams { num_trees: 6, seed: 21, ..Default::default() };
    let a = Forest::fit(&ds, &p).unwrap();
    let b = Forest::fit(&ds, &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = Forest::fit(&ds, &HyperParams { seed: 22, ..p }).unwrap();
    assert_ne!(a.trees(), c.trees());
}

#[test]
fn round_trip_scores_bit_identically_in_both_precisions() {
    let ds = mixed(150, 10);
    let f = Forest::fit(&ds, &HyperParams { num_trees: 8, seed: 1, ..Default::default() }).unwrap();
    let back = Forest::<f64>::from_json(&f.to_json().unwrap()).unwrap();
    let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
    assert_eq!(bits(f.score_values(&ds, ScoreMode::Sparsity).unwrap()), bits(back.score_values(&ds, ScoreMode::Sparsity).unwrap()));

    let rows: Vec<Vec<f32>> = ds.rows().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
    let kinds: Vec<ColumnKind> = ds.columns().iter().map(|c| c.kind()).collect();
    let ds32 = Dataset::from_rows(ds.names().to_vec(), &kinds, &rows, None).unwrap();
    let f32_forest = Forest::fit(&ds32, &HyperParams { num_trees: 8, seed: 1, ..Default::default() }).unwrap();
    let back32 = Forest::<f32>::from_json(&f32_forest.to_json().unwrap()).unwrap();
    let s = f32_forest.score_values(&ds32, ScoreMode::Sparsity).unwrap();
    assert_eq!(
        s.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        back32.score_values(&ds32, ScoreMode::Sparsity).unwrap().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn scoring_rejects_a_different_schema() {
    let ds = mixed(100, 12);
    let f = Forest::fit(&ds, &HyperParams { num_trees: 2, ..Default::default() }).unwrap();
    let renamed = Dataset::from_values(
        ["a", "b", "ord", "other"].map(String::from).to_vec(),
        &ds.columns().iter().map(|c| c.kind()).collect::<Vec<_>>(),
        ds.values().to_vec(),
        None,
    )
    .unwrap();
    assert!(matches!(f.score_values(&renamed, ScoreMode::Sparsity), Err(Error::SchemaMismatch(_))));
    let all_continuous = Dataset::from_values(ds.names().to_vec(), &[ColumnKind::Continuous; 4], ds.values().to_vec(), None).unwrap();
    assert!(matches!(f.score(&all_continuous, ScoreMode::Sparsity), Err(Error::SchemaMismatch(_))));
}

#[test]
fn masking_clump_outscores_the_median_corner() {
    let ds = gen_masking(&MaskingConfig::default(), 3).unwrap().dataset;
    let labels = ds.labels().unwrap().to_vec();
    for m in [64, 256, 1000] {
        let f = Forest::fit(&ds, &HyperParams { samples_per_tree: m, seed: 5, ..Default::default() }).unwrap();
        let scores = f.score_values(&ds, ScoreMode::Sparsity).unwrap();
        let mut corners: Vec<f64> = scores.iter().zip(&labels).filter(|(_, &l)| !l).map(|(s, _)| *s).collect();
        corners.sort_by(f64::total_cmp);
        let median = corners[corners.len() / 2];
        for (s, _) in scores.iter().zip(&labels).filter(|(_, &l)| l) {
            assert!(*s > median, "m = {m}: zero vector {s} vs median corner {median}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Scaling a column by a power of two leaves every score bit-identical;
    /// other positive scalings can only perturb by rounding in the affine map.
    #[test]
    fn power_of_two_rescaling_is_exact(seed in 0u64..1000, column in 0usize..2, exponent in -12i32..12) {
        let ds = gen_gaussian_mixture(&MixtureConfig { n: 200, anomalies: 20, d_noise: 1, ..Default::default() }, seed).unwrap().dataset;
        let scale = 2f64.powi(exponent);
        let d = ds.d();
        let scaled: Vec<f64> = ds.values().iter().enumerate().map(|(i, &v)| if i % d == column { v * scale } else { v }).collect();
        let ds2 = Dataset::from_values(ds.names().to_vec(), &vec![ColumnKind::Continuous; d], scaled, None).unwrap();
        let p = HyperParams { num_trees: 5, seed, ..Default::default() };
        let a = Forest::fit(&ds, &p).unwrap().score_values(&ds, ScoreMode::Sparsity).unwrap();
        let b = Forest::fit(&ds2, &p).unwrap().score_values(&ds2, ScoreMode::Sparsity).unwrap();
        prop_assert_eq!(a, b);
    }
}
