//! Product aggregates, helpfulness ratios and deviation curves.
//!
//! Per-product arithmetic works on integer star sums. Bin assignment
//! (deviation and variance, both on a 0.5 grid) is exact.

mod curve;
mod quantile;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bin::HalfBin;
use crate::corpus::{Corpus, Review};
use crate::error::{Error, Result};

pub use curve::{deviation_curve, deviation_records, BinStats, BinnedCurve, CurveMode, DeviationRecord};
pub use quantile::quantile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductStats {
    pub product_id: String,
    pub review_count: u64,
    pub computed_star_average: f64,
    /// Population variance of the product's star ratings.
    pub star_variance: f64,
    #[serde(skip)]
    star_sum: u64,
    #[serde(skip)]
    star_sq_sum: u64,
}

impl ProductStats {
    pub fn from_ratings(product_id: impl Into<String>, ratings: impl IntoIterator<Item = u8>) -> Option<Self> {
        let (mut n, mut sum, mut sq) = (0u64, 0u64, 0u64);
        for s in ratings {
            n += 1;
            sum += u64::from(s);
            sq += u64::from(s) * u64::from(s);
        }
        (n > 0).then(|| Self::from_sums(product_id.into(), n, sum, sq))
    }

    fn from_sums(product_id: String, n: u64, sum: u64, sq: u64) -> Self {
        let var_num = (n * sq - sum * sum) as f64;
        ProductStats {
            product_id,
            review_count: n,
            computed_star_average: sum as f64 / n as f64,
            star_variance: var_num / (n * n) as f64,
            star_sum: sum,
            star_sq_sum: sq,
        }
    }

    /// Star variance rounded to the nearest 0.5, ties upward.
    pub fn variance_bin(&self) -> HalfBin {
        let n = self.review_count as i64;
        HalfBin::round_ratio_up(n * self.star_sq_sum as i64 - (self.star_sum * self.star_sum) as i64, n * n)
    }

    /// `star - computed_star_average` rounded to the nearest 0.5, ties away
    /// from zero.
    pub fn deviation_bin(&self, star: u8) -> HalfBin {
        let n = self.review_count as i64;
        HalfBin::round_ratio_away(n * i64::from(star) - self.star_sum as i64, n)
    }

    pub fn signed_deviation(&self, star: u8) -> f64 {
        f64::from(star) - self.computed_star_average
    }
}

/// Per-product mean and population variance of star ratings, keyed by
/// product id.
pub fn product_stats(corpus: &Corpus) -> BTreeMap<String, ProductStats> {
    let mut acc: BTreeMap<&str, (u64, u64, u64)> = BTreeMap::new();
    for r in &corpus.reviews {
        let e = acc.entry(&r.product_id).or_default();
        let s = u64::from(r.star_rating);
        e.0 += 1;
        e.1 += s;
        e.2 += s * s;
    }
    acc.into_iter()
        .map(|(id, (n, sum, sq))| (id.to_string(), ProductStats::from_sums(id.to_string(), n, sum, sq)))
        .collect()
}

/// `helpful_votes / total_votes`.
pub fn helpfulness_ratio(review: &Review) -> Result<f64> {
    if review.total_votes == 0 {
        return Err(Error::NoVotes { review_id: review.review_id.clone() });
    }
    Ok(review.helpful_votes as f64 / review.total_votes as f64)
}

/// Splits a corpus by product variance bin; every review travels with its
/// product and keeps its relative order.
pub fn variance_partition(corpus: &Corpus) -> BTreeMap<HalfBin, Corpus> {
    let stats = product_stats(corpus);
    let mut parts: BTreeMap<HalfBin, Corpus> = BTreeMap::new();
    for r in &corpus.reviews {
        let bin = stats[&r.product_id].variance_bin();
        parts.entry(bin).or_insert_with(|| Corpus::new(corpus.label.clone(), Vec::new())).reviews.push(r.clone());
    }
    parts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub label: String,
    pub total_reviews: u64,
    /// Unweighted mean of per-review helpfulness ratios; `None` when empty.
    pub avg_helpfulness_ratio: Option<f64>,
    /// Unweighted mean over products of star variance; `None` when empty.
    pub avg_star_variance: Option<f64>,
}

pub fn summarize_corpus(corpus: &Corpus) -> Result<CorpusSummary> {
    let mut ratio_sum = 0.0;
    for r in &corpus.reviews {
        ratio_sum += helpfulness_ratio(r)?;
    }
    let stats = product_stats(corpus);
    let n = corpus.len();
    let avg_var =
        (!stats.is_empty()).then(|| stats.values().map(|s| s.star_variance).sum::<f64>() / stats.len() as f64);
    Ok(CorpusSummary {
        label: corpus.label.clone(),
        total_reviews: n as u64,
        avg_helpfulness_ratio: (n > 0).then(|| ratio_sum / n as f64),
        avg_star_variance: avg_var,
    })
}

/// One summary row per corpus, in input order (e.g. one per regional site).
pub fn compare_corpora(corpora: &[Corpus]) -> Result<Vec<CorpusSummary>> {
    corpora.iter().map(summarize_corpus).collect()
}
