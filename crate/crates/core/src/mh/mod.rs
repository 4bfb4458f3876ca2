//! Stratified Mantel-Haenszel odds-ratio testing.
//!
//! Each near-duplicate pair is one 2x2 stratum: rows are the two copies,
//! columns are helpful and unhelpful votes. The common odds ratio uses the
//! Mantel-Haenszel estimator; its 95% interval comes from the
//! Robins-Breslow-Greenland variance of the log estimate.

mod grid;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub use grid::{strata_for_bin_pair, verdict_grid, Axis, Cell, GridCell, VerdictGrid};

/// Two-sided 95% normal critical value.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A confidence interval overlapping this band counts as containing 1.
pub const NULL_BAND: (f64, f64) = (0.995, 1.005);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stratum2x2 {
    /// helpful votes, row i
    pub a: u64,
    /// unhelpful votes, row i
    pub b: u64,
    /// helpful votes, row j
    pub c: u64,
    /// unhelpful votes, row j
    pub d: u64,
}

impl Stratum2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a + b == 0 || c + d == 0 {
            return Err(Error::InvalidArgument(format!("stratum ({a},{b},{c},{d}) has an empty row")));
        }
        Ok(Stratum2x2 { a, b, c, d })
    }

    /// Stratum from two "helpful of total" tallies.
    pub fn from_votes(helpful_i: u64, total_i: u64, helpful_j: u64, total_j: u64) -> Result<Self> {
        if helpful_i > total_i || helpful_j > total_j {
            return Err(Error::InvalidArgument("helpful votes exceed total votes".into()));
        }
        Self::new(helpful_i, total_i - helpful_i, helpful_j, total_j - helpful_j)
    }

    pub fn swapped(self) -> Self {
        Stratum2x2 { a: self.c, b: self.d, c: self.a, d: self.b }
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// row i significantly more helpful
    Greater,
    /// row i significantly less helpful
    Less,
    None,
}

impl Verdict {
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Greater => "\u{227B}",
            Verdict::Less => "\u{227A}",
            Verdict::None => " ",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Verdict::Greater => Verdict::Less,
            Verdict::Less => Verdict::Greater,
            Verdict::None => Verdict::None,
        }
    }
}

/// Greater when the whole interval lies above 1 and clear of
/// [0.995, 1.005]; Less symmetrically; otherwise None.
pub fn verdict_for_ci(ci_low: f64, ci_high: f64) -> Verdict {
    if ci_low > NULL_BAND.1 {
        Verdict::Greater
    } else if ci_high < NULL_BAND.0 {
        Verdict::Less
    } else {
        Verdict::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MhResult {
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub verdict: Verdict,
    pub n_strata: usize,
    /// One of the two Mantel-Haenszel sums is zero: the estimate is 0 or
    /// +inf and the interval collapses onto it.
    pub degenerate: bool,
}

pub fn mh_odds_ratio(strata: &[Stratum2x2]) -> Result<MhResult> {
    if strata.is_empty() {
        return Err(Error::InvalidArgument("no strata".into()));
    }
    // R = sum(ad/n), S = sum(bc/n) and the RBG cross terms, folded in input order.
    let (mut r, mut s, mut pr, mut ps_qr, mut qs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in strata {
        let n = t.n() as f64;
        let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
        let rk = a * d / n;
        let sk = b * c / n;
        let pk = (a + d) / n;
        let qk = (b + c) / n;
        r += rk;
        s += sk;
        pr += pk * rk;
        ps_qr += pk * sk + qk * rk;
        qs += qk * sk;
    }
    let n_strata = strata.len();
    let degenerate =
        |v: f64, verdict| MhResult { odds_ratio: v, ci_low: v, ci_high: v, verdict, n_strata, degenerate: true };
    match (r > 0.0, s > 0.0) {
        (false, false) => Err(Error::UndefinedOddsRatio),
        (true, false) => Ok(degenerate(f64::INFINITY, Verdict::Greater)),
        (false, true) => Ok(degenerate(0.0, Verdict::Less)),
        (true, true) => {
            let or = r / s;
            let var = pr / (2.0 * r * r) + ps_qr / (2.0 * r * s) + qs / (2.0 * s * s);
            let half = Z_95 * var.sqrt();
            let (ci_low, ci_high) = ((or.ln() - half).exp(), (or.ln() + half).exp());
            Ok(MhResult {
                odds_ratio: or,
                ci_low,
                ci_high,
                verdict: verdict_for_ci(ci_low, ci_high),
                n_strata,
                degenerate: false,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationTest {
    /// Pooled helpful share of row i minus that of row j.
    pub observed: f64,
    pub p_value: f64,
    pub permutations: usize,
}

fn pooled_difference(strata: &[Stratum2x2], swap: impl Fn(usize) -> bool) -> f64 {
    let (mut hi, mut ni, mut hj, mut nj) = (0u64, 0u64, 0u64, 0u64);
    for (k, t) in strata.iter().enumerate() {
        let t = if swap(k) { t.swapped() } else { *t };
        hi += t.a;
        ni += t.a + t.b;
        hj += t.c;
        nj += t.c + t.d;
    }
    hi as f64 / ni as f64 - hj as f64 / nj as f64
}

/// Sampling check on the same strata: within each stratum the two copies'
/// tallies are swapped with probability 1/2 and the pooled helpfulness
/// difference recomputed. Two-sided p-value with the usual +1 correction.
pub fn permutation_test(strata: &[Stratum2x2], permutations: usize, seed: u64) -> Result<PermutationTest> {
    use rand::Rng;
    if strata.is_empty() || permutations == 0 {
        return Err(Error::InvalidArgument("permutation test needs strata and at least one permutation".into()));
    }
    let observed = pooled_difference(strata, |_| false);
    let extreme = (0..permutations)
        .into_par_iter()
        .filter(|&k| {
            let mut rng = stream_rng(seed, k as u64);
            let flips: Vec<bool> = (0..strata.len()).map(|_| rng.random::<bool>()).collect();
            pooled_difference(strata, |i| flips[i]).abs() >= observed.abs() - 1e-12
        })
        .count();
    Ok(PermutationTest { observed, p_value: (1 + extreme) as f64 / (1 + permutations) as f64, permutations })
}
