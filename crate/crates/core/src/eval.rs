//! Ranking metrics for anomaly scores: ROC AUC, ROC curves and top-k hit rates.
//!
//! Higher scores mean more anomalous. Ties in AUC count one half; ties in
//! top-k selection go to the earlier index.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check<F>(scores: &[F], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Twice the Mann-Whitney U statistic of positives over negatives, which is
/// an integer: concordant pairs count 2, tied pairs 1.
pub fn mann_whitney_u2<F: Scalar>(scores: &[F], labels: &[bool]) -> Result<u64> {
    let (pos, _) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of doubled midranks (1-based) of the positives.
    let mut rank2_sum: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let doubled_midrank = (i + 1 + j + 1) as u64;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k]).count() as u64;
        rank2_sum += doubled_midrank * tied_pos;
        i = j + 1;
    }
    let pos = pos as u64;
    Ok(rank2_sum - pos * (pos + 1))
}

/// Rank-based area under the ROC curve.
pub fn auc<F: Scalar>(scores: &[F], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    let u2 = mann_whitney_u2(scores, labels)?;
    Ok(u2 as f64 / (2 * pos as u64 * neg as u64) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    /// Points scoring at or above this are flagged; `+inf` for the origin.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC vertices from `(0, 0)` to `(1, 1)`, one per distinct score.
pub fn roc_points<F: Scalar>(scores: &[F], labels: &[bool]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = check(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push(RocPoint {
            threshold: s.as_f64(),
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(out)
}

/// Trapezoidal area under a polyline of ROC points.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

/// Writes `threshold,fpr,tpr` rows with a header.
pub fn write_roc_csv<W: Write>(writer: W, points: &[RocPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["threshold", "fpr", "tpr"])?;
    for p in points {
        w.write_record([p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Indices of the `k` highest scores, earlier index first among equal scores.
pub fn top_k<F: Scalar>(scores: &[F], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Number of labelled anomalies among the `k` highest scores.
pub fn top_k_hits<F: Scalar>(scores: &[F], labels: &[bool], k: usize) -> Result<usize> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    Ok(top_k(scores, k).into_iter().filter(|&i| labels[i]).count())
}

fn flagged(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("fraction {fraction} not in (0, 1]")));
    }
    Ok(((fraction * n as f64).ceil() as usize).clamp(1, n.max(1)))
}

/// Share of the true anomalies found among the top `ceil(fraction * n)` scores.
///
/// This is the "fraction of true outliers in the top 5%" reading: with 30
/// anomalies in 1000 points and fraction 0.05, finding all 30 gives 1.0.
pub fn top_fraction_accuracy<F: Scalar>(scores: &[F], labels: &[bool], fraction: f64) -> Result<f64> {
    let k = flagged(scores.len(), fraction)?;
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::SingleClass);
    }
    Ok(top_k_hits(scores, labels, k)? as f64 / positives as f64)
}

/// Share of the top `ceil(fraction * n)` scores that are true anomalies.
pub fn top_fraction_precision<F: Scalar>(scores: &[F], labels: &[bool], fraction: f64) -> Result<f64> {
    let k = flagged(scores.len(), fraction)?;
    Ok(top_k_hits(scores, labels, k)? as f64 / k as f64)
}
