use crate::domain::{Interval, Subcube};
use crate::error::{Error, Result};
use crate::scalar::{clearly_greater, nearly_equal, Scalar};

/// Largest dimension [`pidscore_bruteforce`] accepts.
pub const MAX_BRUTEFORCE_DIM: usize = 3;

/// Inclusive, zero-based index interval `{first, ..., last}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscreteInterval {
    pub first: usize,
    pub last: usize,
}

impl DiscreteInterval {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: usize) -> bool {
        self.first <= j && j <= self.last
    }
}

/// Best interval through one index and its density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Densest<F> {
    pub density: F,
    pub interval: DiscreteInterval,
}

/// For each index, the interval containing it with the largest average of `a`.
///
/// Ties prefer the shorter interval, then the one starting earlier.
pub fn densest_interval_all<F: Scalar>(a: &[F]) -> Vec<Densest<F>> {
    densest_interval_weighted(a, &vec![F::one(); a.len()])
}

/// Weighted variant: the density of `{l..u}` is `sum(a[l..=u]) / sum(w[l..=u])`.
///
/// Exact `O(n^2)` scan: for a fixed left end, a backward sweep over right
/// ends yields the best interval `[l, u']` with `u' >= j` for every `j`.
pub fn densest_interval_weighted<F: Scalar>(a: &[F], w: &[F]) -> Vec<Densest<F>> {
    assert_eq!(a.len(), w.len(), "values and weights must align");
    let n = a.len();
    let mut prefix_a = Vec::with_capacity(n + 1);
    let mut prefix_w = Vec::with_capacity(n + 1);
    prefix_a.push(F::zero());
    prefix_w.push(F::zero());
    for (&ai, &wi) in a.iter().zip(w) {
        prefix_a.push(*prefix_a.last().unwrap() + ai);
        prefix_w.push(*prefix_w.last().unwrap() + wi);
    }

    let mut best: Vec<Option<Densest<F>>> = vec![None; n];
    for first in 0..n {
        let mut running: Option<Densest<F>> = None;
        for last in (first..n).rev() {
            let density = (prefix_a[last + 1] - prefix_a[first]) / (prefix_w[last + 1] - prefix_w[first]);
            // Walking right-to-left, a tied candidate is always the shorter one.
            if running.is_none_or(|r| !clearly_greater(r.density, density)) {
                running = Some(Densest {
                    density,
                    interval: DiscreteInterval { first, last },
                });
            }
            let cand = running.unwrap();
            let slot = &mut best[last];
            let replace = match slot {
                None => true,
                Some(cur) => {
                    clearly_greater(cand.density, cur.density)
                        || (nearly_equal(cand.density, cur.density)
                            && cand.interval.len() < cur.interval.len())
                }
            };
            if replace {
                *slot = Some(cand);
            }
        }
    }
    best.into_iter().map(|b| b.expect("every index is covered")).collect()
}

/// Interval endpoints `e_0 = 0, e_i = (v_i + v_{i+1}) / 2, e_m = 1` for sorted distinct values.
pub fn gap_endpoints<F: Scalar>(distinct_sorted: &[F]) -> Vec<F> {
    let mut e = Vec::with_capacity(distinct_sorted.len() + 1);
    e.push(F::zero());
    for w in distinct_sorted.windows(2) {
        e.push(midpoint(w[0], w[1]));
    }
    e.push(F::one());
    e
}

/// A cut strictly above `a` and at most `b` (for `a < b`).
pub(crate) fn midpoint<F: Scalar>(a: F, b: F) -> F {
    let m = a + (b - a) / (F::one() + F::one());
    if m > a {
        m
    } else {
        b
    }
}

/// Exact 1-d score of one point: log2 of the best sparsity and its interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneDimScore<F> {
    pub log2_score: F,
    pub lo: F,
    pub hi: F,
}

/// Exact one-dimensional PIDScore of every point via the densest-interval reduction.
///
/// Accepts points in any order and reports them in input order. Equal values
/// share one cell whose weight is their multiplicity.
pub fn pidscore_1d<F: Scalar>(points: &[F]) -> Result<Vec<OneDimScore<F>>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(p) = points.iter().find(|p| !(F::zero() <= **p && **p <= F::one())) {
        return Err(Error::InvalidParameter(format!("{p} is outside [0, 1]")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut distinct: Vec<F> = Vec::new();
    let mut weight: Vec<F> = Vec::new();
    for v in sorted {
        if distinct.last() == Some(&v) {
            *weight.last_mut().unwrap() += F::one();
        } else {
            distinct.push(v);
            weight.push(F::one());
        }
    }
    let e = gap_endpoints(&distinct);
    let gaps: Vec<F> = e.windows(2).map(|w| w[1] - w[0]).collect();
    let best = densest_interval_weighted(&gaps, &weight);

    Ok(points
        .iter()
        .map(|p| {
            let idx = distinct.partition_point(|v| v < p);
            let b = best[idx];
            OneDimScore {
                log2_score: b.density.log2(),
                lo: e[b.interval.first],
                hi: e[b.interval.last + 1],
            }
        })
        .collect())
}

struct Candidate<F> {
    lo: F,
    hi: F,
    members: Vec<u64>,
}

/// Exhaustive maximum of `vol(C) / |C ∩ T|` over all candidate subcubes containing `x`.
///
/// Per coordinate, interval endpoints are restricted to `{0, 1}` and the
/// midpoints of consecutive distinct values; every product of such intervals
/// containing `x` is scored. Only feasible for `d <= 3`.
pub fn pidscore_bruteforce<F: Scalar>(x: &[F], points: &[Vec<F>]) -> Result<(F, Subcube<F>)> {
    let d = x.len();
    if d == 0 {
        return Err(Error::NoColumns);
    }
    if d > MAX_BRUTEFORCE_DIM {
        return Err(Error::OracleInfeasible(d));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Shape("point dimensions differ".into()));
    }
    if !points.iter().any(|p| p.as_slice() == x) {
        return Err(Error::NotAMember);
    }
    let n = points.len();
    let words = n.div_ceil(64);

    let per_coord: Vec<Vec<Candidate<F>>> = (0..d)
        .map(|j| {
            let mut vals: Vec<F> = points.iter().map(|p| p[j]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            let e = gap_endpoints(&vals);
            let mut out = Vec::new();
            for (a, &lo) in e.iter().enumerate() {
                for &hi in &e[a + 1..] {
                    if !(lo <= x[j] && x[j] <= hi) {
                        continue;
                    }
                    let mut members = vec![0u64; words];
                    for (i, p) in points.iter().enumerate() {
                        if lo <= p[j] && p[j] <= hi {
                            members[i / 64] |= 1 << (i % 64);
                        }
                    }
                    out.push(Candidate { lo, hi, members });
                }
            }
            out
        })
        .collect();

    let mut best: Option<(F, Vec<usize>)> = None;
    let mut choice = vec![0usize; d];
    let mut scratch = vec![0u64; words];
    'outer: loop {
        scratch.copy_from_slice(&per_coord[0][choice[0]].members);
        for (j, &c) in choice.iter().enumerate().skip(1) {
            for (s, m) in scratch.iter_mut().zip(&per_coord[j][c].members) {
                *s &= m;
            }
        }
        let count: u32 = scratch.iter().map(|w| w.count_ones()).sum();
        let log2_vol: F = choice
            .iter()
            .enumerate()
            .map(|(j, &c)| (per_coord[j][c].hi - per_coord[j][c].lo).log2())
            .sum();
        let score = log2_vol - F::of(count as f64).log2();
        if best.as_ref().is_none_or(|(b, _)| clearly_greater(score, *b)) {
            best = Some((score, choice.clone()));
        }
        // Odometer increment over the candidate lists.
        for j in (0..d).rev() {
            choice[j] += 1;
            if choice[j] < per_coord[j].len() {
                continue 'outer;
            }
            choice[j] = 0;
        }
        break;
    }

    let (score, pick) = best.expect("the full cube is always a candidate");
    let witness = Subcube::new(
        pick.iter()
            .enumerate()
            .map(|(j, &c)| Interval::Range {
                lo: per_coord[j][c].lo,
                hi: per_coord[j][c].hi,
            })
            .collect(),
    );
    Ok((score, witness))
}
