use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{helpfulness_ratio, product_stats, quantile_sorted};
use crate::bin::HalfBin;
use crate::corpus::{Corpus, DEFAULT_MIN_VOTES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    Signed,
    Absolute,
}

impl FromStr for CurveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(CurveMode::Signed),
            "absolute" | "abs" => Ok(CurveMode::Absolute),
            other => Err(Error::InvalidArgument(format!("unknown curve mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRecord {
    pub review_id: String,
    pub signed_deviation: f64,
    /// Signed deviation rounded to 0.5, ties away from zero.
    pub deviation_bin: HalfBin,
    pub helpfulness_ratio: f64,
    /// The product's star variance rounded to 0.5, ties upward.
    pub variance_bin: HalfBin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStats {
    pub count: u64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    /// Bin holds at most 0.1% of the curve's reviews.
    pub low_data: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedCurve {
    pub mode: CurveMode,
    pub bins: BTreeMap<HalfBin, BinStats>,
}

impl BinnedCurve {
    pub fn total_count(&self) -> u64 {
        self.bins.values().map(|b| b.count).sum()
    }

    pub fn median_at(&self, bin: HalfBin) -> Option<f64> {
        self.bins.get(&bin).map(|b| b.median)
    }

    /// Bin with the largest median (first such bin on ties).
    pub fn argmax_median(&self) -> Option<HalfBin> {
        let mut best: Option<(HalfBin, f64)> = None;
        for (&bin, s) in &self.bins {
            if best.is_none_or(|(_, m)| s.median > m) {
                best = Some((bin, s.median));
            }
        }
        best.map(|(b, _)| b)
    }

    /// Plot-ready CSV: `bin,count,q25,median,q75,low_data`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin", "count", "q25", "median", "q75", "low_data"])?;
        for (bin, s) in &self.bins {
            w.write_record([
                bin.to_string(),
                s.count.to_string(),
                s.q25.to_string(),
                s.median.to_string(),
                s.q75.to_string(),
                s.low_data.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One record per review. Every review must have at least
/// [`DEFAULT_MIN_VOTES`] votes.
pub fn deviation_records(corpus: &Corpus) -> Result<Vec<DeviationRecord>> {
    let stats = product_stats(corpus);
    corpus
        .reviews
        .iter()
        .map(|r| {
            if r.total_votes < DEFAULT_MIN_VOTES {
                return Err(Error::BelowVoteFloor {
                    review_id: r.review_id.clone(),
                    total: r.total_votes,
                    floor: DEFAULT_MIN_VOTES,
                });
            }
            let p = &stats[&r.product_id];
            Ok(DeviationRecord {
                review_id: r.review_id.clone(),
                signed_deviation: p.signed_deviation(r.star_rating),
                deviation_bin: p.deviation_bin(r.star_rating),
                helpfulness_ratio: helpfulness_ratio(r)?,
                variance_bin: p.variance_bin(),
            })
        })
        .collect()
}

/// Helpfulness-ratio quartiles per deviation bin.
///
/// With `variance_bin` set, only products whose variance rounds to that bin
/// contribute; an empty selection gives an empty curve.
pub fn deviation_curve(corpus: &Corpus, mode: CurveMode, variance_bin: Option<f64>) -> Result<BinnedCurve> {
    let want = variance_bin.map(HalfBin::round_up);
    let mut groups: BTreeMap<HalfBin, Vec<f64>> = BTreeMap::new();
    for rec in deviation_records(corpus)? {
        if want.is_some_and(|v| v != rec.variance_bin) {
            continue;
        }
        let bin = match mode {
            CurveMode::Signed => rec.deviation_bin,
            CurveMode::Absolute => rec.deviation_bin.abs(),
        };
        groups.entry(bin).or_default().push(rec.helpfulness_ratio);
    }
    let total: u64 = groups.values().map(|v| v.len() as u64).sum();
    let bins = groups
        .into_par_iter()
        .map(|(bin, mut ratios)| {
            ratios.sort_by(f64::total_cmp);
            let count = ratios.len() as u64;
            let q = |p| quantile_sorted(&ratios, p).expect("bins are non-empty");
            (bin, BinStats { count, q25: q(0.25), median: q(0.5), q75: q(0.75), low_data: count * 1000 <= total })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(BinnedCurve { mode, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{filter_min_votes, Review};
    use crate::stats::tests::review;
    use proptest::prelude::*;

    #[test]
    fn constant_product_has_single_zero_bin() {
        let c = Corpus::new("x", (0..4).map(|i| review(&format!("r{i}"), "p", 4, 8, 10)).collect());
        let curve = deviation_curve(&c, CurveMode::Absolute, None).unwrap();
        assert_eq!(curve.bins.len(), 1);
        assert_eq!(curve.bins[&HalfBin::ZERO].median, 0.8);
        assert_eq!(curve.bins[&HalfBin::ZERO].count, 4);
    }

    #[test]
    fn five_star_on_three_and_a_half_average() {
        // stars {5,2}: average 3.5
        let c = Corpus::new("x", vec![review("a", "p", 5, 9, 10), review("b", "p", 2, 1, 10)]);
        let curve = deviation_curve(&c, CurveMode::Signed, None).unwrap();
        assert_eq!(curve.bins[&HalfBin(3)].count, 1);
        assert_eq!(curve.bins[&HalfBin(3)].median, 0.9);
        assert_eq!(curve.bins[&HalfBin(-3)].count, 1);
    }

    #[test]
    fn rejects_unfiltered_corpus_and_handles_empty_selection() {
        let c = Corpus::new("x", vec![review("a", "p", 5, 1, 3)]);
        assert!(matches!(deviation_curve(&c, CurveMode::Signed, None), Err(Error::BelowVoteFloor { .. })));
        let c = Corpus::new("x", vec![review("a", "p", 5, 1, 10)]);
        let curve = deviation_curve(&c, CurveMode::Signed, Some(3.0)).unwrap();
        assert!(curve.bins.is_empty());
        let curve = deviation_curve(&c, CurveMode::Signed, Some(0.0)).unwrap();
        assert_eq!(curve.total_count(), 1);
    }

    #[test]
    fn low_data_threshold() {
        // 1001 reviews: a bin of 1 is <= 0.1%, a bin of 2 is not.
        let mut reviews: Vec<Review> = (0..998).map(|i| review(&format!("a{i}"), &format!("p{i}"), 3, 5, 10)).collect();
        reviews.push(review("x1", "q", 1, 5, 10));
        reviews.push(review("x2", "q", 5, 5, 10));
        reviews.push(review("x3", "q", 5, 5, 10));
        let c = Corpus::new("x", reviews);
        let curve = deviation_curve(&c, CurveMode::Signed, None).unwrap();
        assert_eq!(curve.total_count(), 1001);
        let neg = curve.bins.iter().find(|(b, _)| b.0 < 0).unwrap().1;
        let pos = curve.bins.iter().find(|(b, _)| b.0 > 0).unwrap().1;
        assert_eq!((neg.count, neg.low_data), (1, true));
        assert_eq!((pos.count, pos.low_data), (2, false));
    }

    #[test]
    fn csv_layout() {
        let c = Corpus::new("x", vec![review("a", "p", 5, 9, 10), review("b", "p", 2, 1, 10)]);
        let mut buf = Vec::new();
        deviation_curve(&c, CurveMode::Signed, None).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bin,count,q25,median,q75,low_data\n-1.5,1,0.1,0.1,0.1,false\n1.5,1,0.9,0.9,0.9,false\n"
        );
    }

    fn arb_corpus() -> impl Strategy<Value = Corpus> {
        proptest::collection::vec((0u8..12, 1u8..=5, 0u64..=40, 0u64..=40), 1..500).prop_map(|rows| {
            Corpus::new(
                "prop",
                rows.into_iter()
                    .enumerate()
                    .map(|(i, (p, s, h, extra))| review(&format!("r{i}"), &format!("p{p}"), s, h, 10 + h + extra))
                    .collect(),
            )
        })
    }

    /// Sort-and-interpolate straight from the definition.
    fn oracle_quantile(values: &[f64], q: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (v.len() - 1) as f64 * q;
        let i = h.floor() as usize;
        if i + 1 >= v.len() {
            v[i]
        } else {
            v[i] + (h - i as f64) * (v[i + 1] - v[i])
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn curve_matches_brute_force(c in arb_corpus(), signed in any::<bool>()) {
            let mode = if signed { CurveMode::Signed } else { CurveMode::Absolute };
            let curve = deviation_curve(&c, mode, None).unwrap();
            prop_assert_eq!(curve.total_count() as usize, c.len());
            // oracle: float mean per product, nearest half-step by search
            let mut by_bin: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
            for r in &c.reviews {
                let stars: Vec<f64> = c.reviews.iter().filter(|o| o.product_id == r.product_id).map(|o| f64::from(o.star_rating)).collect();
                let mean = stars.iter().sum::<f64>() / stars.len() as f64;
                let mut dev = f64::from(r.star_rating) - mean;
                if !signed { dev = dev.abs(); }
                let k = (-8i32..=8).min_by(|&a, &b| {
                    let da = (f64::from(a) / 2.0 - dev).abs();
                    let db = (f64::from(b) / 2.0 - dev).abs();
                    da.partial_cmp(&db).unwrap().then(b.abs().cmp(&a.abs()))
                }).unwrap();
                by_bin.entry(k).or_default().push(r.helpful_votes as f64 / r.total_votes as f64);
            }
            prop_assert_eq!(curve.bins.len(), by_bin.len());
            for (k, vals) in &by_bin {
                let s = &curve.bins[&HalfBin(*k)];
                prop_assert_eq!(s.count as usize, vals.len());
                prop_assert!((s.q25 - oracle_quantile(vals, 0.25)).abs() <= 1e-12);
                prop_assert!((s.median - oracle_quantile(vals, 0.5)).abs() <= 1e-12);
                prop_assert!((s.q75 - oracle_quantile(vals, 0.75)).abs() <= 1e-12);
                prop_assert!(0.0 <= s.q25 && s.q25 <= s.median && s.median <= s.q75 && s.q75 <= 1.0);
            }
        }

        #[test]
        fn absolute_counts_fold_signed_counts(c in arb_corpus()) {
            let signed = deviation_curve(&c, CurveMode::Signed, None).unwrap();
            let abs = deviation_curve(&c, CurveMode::Absolute, None).unwrap();
            for (bin, s) in &abs.bins {
                let plus = signed.bins.get(bin).map_or(0, |b| b.count);
                let minus = if bin.0 > 0 { signed.bins.get(&HalfBin(-bin.0)).map_or(0, |b| b.count) } else { 0 };
                prop_assert_eq!(s.count, plus + minus);
            }
        }

        #[test]
        fn low_vote_reviews_never_change_filtered_curves(c in arb_corpus(), extra in 0u64..10) {
            let mut noisy = c.clone();
            noisy.reviews.push(review("low", "p0", 1, 0, extra));
            let a = deviation_curve(&filter_min_votes(&c, 10), CurveMode::Signed, None).unwrap();
            let b = deviation_curve(&filter_min_votes(&noisy, 10), CurveMode::Signed, None).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
