//! k-histograms over a gap array: exact dynamic program and streaming approximation.
//!
//! A gap array has one cell per distinct sample value: its length `f(i)` (the
//! width of the interval around that value) and its weight `w(i)` (the value's
//! multiplicity). Grouping cells into `k` contiguous runs `J_1..J_k` scores
//!
//! ```text
//! cost  = sum_J (sum_{i in J} f(i))^2 / sum_{i in J} w(i)
//! error = sum_i f(i)^2 / w(i) - cost
//! ```
//!
//! which for unit weights is `sum_J |J| * mean_J(f)^2` and the squared l2
//! error of the best piecewise-constant fit of `f`. Maximizing one minimizes
//! the other.

use crate::error::{Error, Result};
use crate::scalar::{nearly_equal, Scalar};

/// Per-cell lengths and weights for one coordinate of one node.
#[derive(Clone, Debug, PartialEq)]
pub struct GapArray<F> {
    /// `e_0..e_m`, rescaled so the node interval is `[0, 1]`.
    endpoints: Vec<F>,
    /// The same endpoints in absolute normalized coordinates.
    cuts: Vec<F>,
    lengths: Vec<F>,
    weights: Vec<F>,
}

impl<F: Scalar> GapArray<F> {
    /// Unit-weight gap array from raw lengths; endpoints are their running sums.
    pub fn from_lengths(lengths: Vec<F>) -> Result<Self> {
        let weights = vec![F::one(); lengths.len()];
        Self::weighted(lengths, weights)
    }

    pub fn weighted(lengths: Vec<F>, weights: Vec<F>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::EmptyInput);
        }
        if lengths.len() != weights.len() {
            return Err(Error::Shape("lengths and weights differ in size".into()));
        }
        if lengths.iter().any(|f| !(f.is_finite() && *f >= F::zero())) {
            return Err(Error::InvalidParameter("gap lengths must be finite and nonnegative".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > F::zero())) {
            return Err(Error::InvalidParameter("cell weights must be positive".into()));
        }
        let mut endpoints = Vec::with_capacity(lengths.len() + 1);
        endpoints.push(F::zero());
        for &f in &lengths {
            endpoints.push(*endpoints.last().unwrap() + f);
        }
        Ok(Self {
            cuts: endpoints.clone(),
            endpoints,
            lengths,
            weights,
        })
    }

    pub(crate) fn from_parts(endpoints: Vec<F>, cuts: Vec<F>, weights: Vec<F>) -> Self {
        let lengths = endpoints.windows(2).map(|w| w[1] - w[0]).collect();
        Self {
            endpoints,
            cuts,
            lengths,
            weights,
        }
    }

    /// Number of cells.
    pub fn m(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[F] {
        &self.lengths
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn endpoints(&self) -> &[F] {
        &self.endpoints
    }

    /// Endpoint `i` in absolute normalized coordinates (a split breakpoint).
    pub fn cut(&self, i: usize) -> F {
        self.cuts[i]
    }

    pub fn total_weight(&self) -> F {
        self.weights.iter().copied().sum()
    }

    fn prefix(&self) -> Prefix<F> {
        Prefix::new(&self.lengths, &self.weights)
    }
}

struct Prefix<F> {
    f: Vec<F>,
    w: Vec<F>,
    q: Vec<F>,
}

impl<F: Scalar> Prefix<F> {
    fn new(lengths: &[F], weights: &[F]) -> Self {
        let m = lengths.len();
        let (mut f, mut w, mut q) = (Vec::with_capacity(m + 1), Vec::with_capacity(m + 1), Vec::with_capacity(m + 1));
        f.push(F::zero());
        w.push(F::zero());
        q.push(F::zero());
        for (&li, &wi) in lengths.iter().zip(weights) {
            f.push(*f.last().unwrap() + li);
            w.push(*w.last().unwrap() + wi);
            q.push(*q.last().unwrap() + li * li / wi);
        }
        Self { f, w, q }
    }

    /// Cost of the single group made of cells `a..b`.
    #[inline]
    fn cost(&self, a: usize, b: usize) -> F {
        let s = self.f[b] - self.f[a];
        s * s / (self.w[b] - self.w[a])
    }

    /// Squared error of fitting cells `a..b` with one constant.
    #[inline]
    fn error(&self, a: usize, b: usize) -> F {
        if b - a <= 1 {
            return F::zero();
        }
        (self.q[b] - self.q[a] - self.cost(a, b)).max(F::zero())
    }
}

/// A partition of cells `0..m` into contiguous, nonempty groups.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramPartition<F> {
    /// Start index of every group after the first, strictly increasing in `1..m`.
    pub boundaries: Vec<usize>,
    pub cost: F,
    m: usize,
}

impl<F: Scalar> HistogramPartition<F> {
    /// Validates `boundaries` against `gap` and computes the cost directly.
    pub fn new(gap: &GapArray<F>, boundaries: Vec<usize>) -> Result<Self> {
        let m = gap.m();
        let ok = boundaries.windows(2).all(|w| w[0] < w[1])
            && boundaries.first().is_none_or(|&b| b >= 1)
            && boundaries.last().is_none_or(|&b| b < m);
        if !ok {
            return Err(Error::InvalidPartition(format!("boundaries {boundaries:?} invalid for m = {m}")));
        }
        let mut p = Self {
            boundaries,
            cost: F::zero(),
            m,
        };
        p.cost = partition_cost(gap, &p);
        Ok(p)
    }

    pub fn num_groups(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Half-open cell ranges of the groups, in order.
    pub fn groups(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let starts = std::iter::once(0).chain(self.boundaries.iter().copied());
        let ends = self.boundaries.iter().copied().chain(std::iter::once(self.m));
        starts.zip(ends)
    }
}

/// `sum_J (sum f)^2 / sum w`, evaluated group by group.
pub fn partition_cost<F: Scalar>(gap: &GapArray<F>, partition: &HistogramPartition<F>) -> F {
    partition
        .groups()
        .map(|(a, b)| {
            let s: F = gap.lengths[a..b].iter().copied().sum();
            let w: F = gap.weights[a..b].iter().copied().sum();
            s * s / w
        })
        .sum()
}

/// Squared error of the histogram, computed from group means (two-pass, always >= 0).
pub fn partition_error<F: Scalar>(gap: &GapArray<F>, partition: &HistogramPartition<F>) -> F {
    partition
        .groups()
        .map(|(a, b)| {
            let f = &gap.lengths[a..b];
            let w = &gap.weights[a..b];
            let mean = f.iter().copied().sum::<F>() / w.iter().copied().sum::<F>();
            f.iter()
                .zip(w)
                .map(|(&fi, &wi)| {
                    let r = fi / wi - mean;
                    wi * r * r
                })
                .sum::<F>()
        })
        .sum()
}

fn check_k<F: Scalar>(gap: &GapArray<F>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > gap.m() {
        return Err(Error::TooManyCells { k, m: gap.m() });
    }
    Ok(())
}

/// Exact maximum-cost partition into `k` groups, `O(m^2 k)` time and `O(m k)` space.
///
/// Among tied optima the lexicographically smallest boundary vector is returned.
pub fn ksplit_dp<F: Scalar>(gap: &GapArray<F>, k: usize) -> Result<HistogramPartition<F>> {
    check_k(gap, k)?;
    let m = gap.m();
    let pre = gap.prefix();
    // best[c][i]: max cost of splitting cells i..m into exactly c groups.
    let neg = F::neg_infinity();
    let mut best = vec![vec![neg; m + 1]; k + 1];
    for (i, slot) in best[1].iter_mut().enumerate().take(m) {
        *slot = pre.cost(i, m);
    }
    for c in 2..=k {
        for i in 0..=m - c {
            let mut v = neg;
            for j in i + 1..=m - c + 1 {
                let cand = pre.cost(i, j) + best[c - 1][j];
                if cand > v {
                    v = cand;
                }
            }
            best[c][i] = v;
        }
    }

    let mut boundaries = Vec::with_capacity(k - 1);
    let mut i = 0;
    for c in (2..=k).rev() {
        let target = best[c][i];
        let j = (i + 1..=m - c + 1)
            .find(|&j| nearly_equal(pre.cost(i, j) + best[c - 1][j], target))
            .expect("the optimum is attained");
        boundaries.push(j);
        i = j;
    }
    HistogramPartition::new(gap, boundaries)
}

#[derive(Clone)]
struct Entry<F> {
    pos: usize,
    err: F,
    cuts: Vec<usize>,
}

#[derive(Default)]
struct Level<F> {
    closed: Vec<Entry<F>>,
    last: Option<Entry<F>>,
    open_min: Option<F>,
}

/// One left-to-right pass keeping approximate DP states only where the
/// best-so-far error of each level grows by a `1 + delta` factor.
///
/// With `delta = eps / (2k)` the returned histogram's squared error is at
/// most `(1 + delta)^(k-1) <= 1 + eps` times the optimum.
pub fn ksplit_approx<F: Scalar>(gap: &GapArray<F>, k: usize, eps: F) -> Result<HistogramPartition<F>> {
    check_k(gap, k)?;
    if !(eps > F::zero()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let m = gap.m();
    let pre = gap.prefix();
    let growth = F::one() + eps / F::of_usize(2 * k);
    let mut levels: Vec<Level<F>> = (0..=k).map(|_| Level::default()).collect();

    for i in 1..=m {
        // Descending so level c-1 still exposes position i-1 when level c reads it.
        for c in (1..=k.min(i)).rev() {
            let entry = if c == 1 {
                Entry {
                    pos: i,
                    err: pre.error(0, i),
                    cuts: Vec::new(),
                }
            } else {
                let below = &levels[c - 1];
                let mut pick: Option<(&Entry<F>, F)> = None;
                for cand in below.closed.iter().chain(below.last.iter()) {
                    let err = cand.err + pre.error(cand.pos, i);
                    if pick.is_none_or(|(_, e)| err < e) {
                        pick = Some((cand, err));
                    }
                }
                let (from, err) = pick.expect("level c-1 has reached position c-1");
                let mut cuts = from.cuts.clone();
                cuts.push(from.pos);
                Entry { pos: i, err, cuts }
            };

            let level = &mut levels[c];
            match level.open_min {
                Some(min) if entry.err > growth * min => {
                    if let Some(prev) = level.last.take() {
                        level.closed.push(prev);
                    }
                    level.open_min = Some(entry.err);
                }
                Some(min) => level.open_min = Some(min.min(entry.err)),
                None => level.open_min = Some(entry.err),
            }
            level.last = Some(entry);
        }
    }

    let fin = levels[k].last.take().expect("level k reaches position m");
    HistogramPartition::new(gap, fin.cuts)
}
