//! Choosing a node's split: per-coordinate optimal k-splits and the
//! variance-of-sparsity comparison across coordinates.

mod histogram;

pub use histogram::{
    ksplit_approx, ksplit_dp, partition_cost, partition_error, GapArray, HistogramPartition,
};

use serde::{Deserialize, Serialize};

use crate::domain::{code_of, CoordKind, Interval};
use crate::error::Result;
use crate::oracle::midpoint;
use crate::scalar::{clearly_greater, Scalar};

/// Default accuracy parameter of the streaming solver.
pub const DEFAULT_EPS: f64 = 0.1;

/// Variances at or below this (and at or below 64 ulps) count as no signal.
pub const MIN_VARIANCE: f64 = 1e-12;

/// Distinct sorted values and their multiplicities.
fn collapse<F: Scalar>(sorted: &[F]) -> (Vec<F>, Vec<F>) {
    let mut values: Vec<F> = Vec::new();
    let mut weights: Vec<F> = Vec::new();
    for &x in sorted {
        if values.last() == Some(&x) {
            *weights.last_mut().unwrap() += F::one();
        } else {
            values.push(x);
            weights.push(F::one());
        }
    }
    (values, weights)
}

fn assemble<F: Scalar>(lo: F, hi: F, inner: Vec<F>, weights: Vec<F>) -> GapArray<F> {
    let span = hi - lo;
    let mut cuts = Vec::with_capacity(inner.len() + 2);
    cuts.push(lo);
    cuts.extend(inner);
    cuts.push(hi);
    let mut endpoints: Vec<F> = cuts.iter().map(|&e| (e - lo) / span).collect();
    // Pin the ends so the lengths sum to one up to the interior rounding.
    endpoints[0] = F::zero();
    *endpoints.last_mut().unwrap() = F::one();
    GapArray::from_parts(endpoints, cuts, weights)
}

/// Gap array of sorted values inside the node interval `[lo, hi]`, with cell
/// boundaries at midpoints between consecutive distinct values.
///
/// Returns `None` when fewer than two distinct values are present.
pub fn build_gap_array<F: Scalar>(sorted: &[F], lo: F, hi: F) -> Option<GapArray<F>> {
    let (values, weights) = collapse(sorted);
    if values.len() < 2 || !(hi > lo) {
        return None;
    }
    let inner = values.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    Some(assemble(lo, hi, inner, weights))
}

/// Gap array for an ordered categorical coordinate whose values sit at code
/// centres `(c + 0.5) / D`; boundaries are snapped to the code grid.
pub fn build_gap_array_on_grid<F: Scalar>(
    sorted: &[F],
    lo: F,
    hi: F,
    domain_size: u32,
) -> Option<GapArray<F>> {
    let (values, weights) = collapse(sorted);
    if values.len() < 2 || !(hi > lo) {
        return None;
    }
    let size = F::of_usize(domain_size as usize);
    let inner = values
        .windows(2)
        .map(|w| {
            let (a, b) = (code_of(w[0], domain_size), code_of(w[1], domain_size));
            F::of_usize((a + b).div_ceil(2) as usize) / size
        })
        .collect();
    Some(assemble(lo, hi, inner, weights))
}

/// `sum_i p_i^2 / q_i - 1`, where `p_i` is group `i`'s share of the node
/// length and `q_i` its share of the node's points.
///
/// This is the variance of child sparsity in units of the parent's squared
/// sparsity, comparable across coordinates of one node.
pub fn variance_of_partition<F: Scalar>(gap: &GapArray<F>, partition: &HistogramPartition<F>) -> F {
    let total_f: F = gap.lengths().iter().copied().sum();
    let total_w = gap.total_weight();
    let shares = partition.groups().map(|(a, b)| {
        let p = gap.lengths()[a..b].iter().copied().sum::<F>() / total_f;
        let q = gap.weights()[a..b].iter().copied().sum::<F>() / total_w;
        (p, q)
    });
    variance_from_shares(shares)
}

fn variance_from_shares<F: Scalar>(shares: impl Iterator<Item = (F, F)>) -> F {
    let s: F = shares.map(|(p, q)| p * p / q).sum();
    (s - F::one()).max(F::zero())
}

/// How a split node routes a coordinate value to a child.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SplitRule<F> {
    /// Child `i` receives values in `[t_{i-1}, t_i)`; the last child is closed above.
    Cuts { breakpoints: Vec<F> },
    /// Child 0 receives the single category `code`, child 1 everything else.
    Category { code: u32 },
}

impl<F: Scalar> SplitRule<F> {
    pub fn arity(&self) -> usize {
        match self {
            SplitRule::Cuts { breakpoints } => breakpoints.len() + 1,
            SplitRule::Category { .. } => 2,
        }
    }

    /// Child index for a normalized coordinate value.
    pub fn route(&self, x: F, kind: CoordKind) -> usize {
        match self {
            SplitRule::Cuts { breakpoints } => breakpoints.partition_point(|&t| t <= x),
            SplitRule::Category { code } => {
                let domain_size = match kind {
                    CoordKind::Unordered { domain_size } | CoordKind::Ordered { domain_size } => domain_size,
                    CoordKind::Continuous => 1,
                };
                usize::from(code_of(x, domain_size) != *code)
            }
        }
    }

    /// The children's intervals, in routing order.
    pub fn child_intervals(&self, parent: &Interval<F>) -> Result<Vec<Interval<F>>> {
        match (self, parent) {
            (SplitRule::Cuts { breakpoints }, Interval::Range { lo, hi }) => {
                let mut out = Vec::with_capacity(breakpoints.len() + 1);
                let mut left = *lo;
                for &t in breakpoints.iter().chain(std::iter::once(hi)) {
                    out.push(Interval::range(left, t)?);
                    left = t;
                }
                Ok(out)
            }
            (SplitRule::Category { code }, Interval::Codes { codes, domain_size }) => {
                let rest = codes.iter().copied().filter(|c| c != code).collect();
                Ok(vec![
                    Interval::codes(vec![*code], *domain_size)?,
                    Interval::codes(rest, *domain_size)?,
                ])
            }
            _ => Err(crate::error::Error::InvalidPartition(
                "split rule does not match the interval type".into(),
            )),
        }
    }
}

/// The winning split of a node.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult<F> {
    pub coord: usize,
    pub rule: SplitRule<F>,
    pub variance: F,
}

/// One coordinate of a node's sample: its kind, the node's interval on it,
/// and the sorted projections of the node's points.
#[derive(Clone, Copy, Debug)]
pub struct CoordinateSample<'a, F> {
    pub coord: usize,
    pub kind: CoordKind,
    pub interval: &'a Interval<F>,
    pub values: &'a [F],
}

/// Best split of a single coordinate, if it has one.
pub fn split_coordinate<F: Scalar>(sample: &CoordinateSample<'_, F>, k: usize, eps: F) -> Option<SplitResult<F>> {
    let cuts = |gap: GapArray<F>| {
        let part = ksplit_approx(&gap, k.min(gap.m()), eps).ok()?;
        let variance = variance_of_partition(&gap, &part);
        let breakpoints = part.boundaries.iter().map(|&b| gap.cut(b)).collect();
        Some(SplitResult {
            coord: sample.coord,
            rule: SplitRule::Cuts { breakpoints },
            variance,
        })
    };
    match (sample.kind, sample.interval) {
        (CoordKind::Continuous, Interval::Range { lo, hi }) => cuts(build_gap_array(sample.values, *lo, *hi)?),
        (CoordKind::Ordered { domain_size }, Interval::Range { lo, hi }) => {
            cuts(build_gap_array_on_grid(sample.values, *lo, *hi, domain_size)?)
        }
        (CoordKind::Unordered { domain_size }, Interval::Codes { codes, .. }) => {
            split_unordered(sample, codes, domain_size)
        }
        _ => None,
    }
}

/// Singleton-versus-rest split of an unordered categorical coordinate.
fn split_unordered<F: Scalar>(sample: &CoordinateSample<'_, F>, codes: &[u32], domain_size: u32) -> Option<SplitResult<F>> {
    let n = sample.values.len();
    let total = F::of_usize(n);
    let p = F::one() / F::of_usize(codes.len());
    let mut best: Option<(u32, F)> = None;
    for &code in codes {
        let count = sample.values.iter().filter(|&&x| code_of(x, domain_size) == code).count();
        if count == 0 || count == n {
            continue;
        }
        let q = F::of_usize(count) / total;
        let v = variance_from_shares([(p, q), (F::one() - p, F::one() - q)].into_iter());
        if best.is_none_or(|(_, bv)| clearly_greater(v, bv)) {
            best = Some((code, v));
        }
    }
    best.map(|(code, variance)| SplitResult {
        coord: sample.coord,
        rule: SplitRule::Category { code },
        variance,
    })
}

/// The coordinate and split of maximum variance, or `None` if no coordinate
/// beats the no-signal threshold. Ties go to the earlier coordinate.
pub fn best_split<F: Scalar>(samples: &[CoordinateSample<'_, F>], k: usize, eps: F) -> Option<SplitResult<F>> {
    let threshold = F::of(MIN_VARIANCE).max(F::tie_tolerance());
    let mut best: Option<SplitResult<F>> = None;
    for s in samples {
        if let Some(r) = split_coordinate(s, k, eps) {
            if r.variance > threshold && best.as_ref().is_none_or(|b| clearly_greater(r.variance, b.variance)) {
                best = Some(r);
            }
        }
    }
    best
}
