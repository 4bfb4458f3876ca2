use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bin::HalfBin;
use crate::error::Result;

/// Two reviews of different products with near-complete textual overlap,
/// plus the context each copy appeared in. `review_a < review_b`.
///
/// Field order is the pairs CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlagiarizedPair {
    pub review_a: String,
    pub review_b: String,
    pub similarity: f64,
    pub signed_dev_a: HalfBin,
    pub signed_dev_b: HalfBin,
    pub ratio_a: f64,
    pub ratio_b: f64,
    pub helpful_a: u64,
    pub total_a: u64,
    pub helpful_b: u64,
    pub total_b: u64,
}

impl PlagiarizedPair {
    pub fn abs_dev_a(&self) -> HalfBin {
        self.signed_dev_a.abs()
    }

    pub fn abs_dev_b(&self) -> HalfBin {
        self.signed_dev_b.abs()
    }
}

pub fn write_pairs_csv<W: Write>(pairs: &[PlagiarizedPair], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in pairs {
        w.serialize(p)?;
    }
    if pairs.is_empty() {
        w.write_record([
            "review_a",
            "review_b",
            "similarity",
            "signed_dev_a",
            "signed_dev_b",
            "ratio_a",
            "ratio_b",
            "helpful_a",
            "total_a",
            "helpful_b",
            "total_b",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pairs_csv<R: Read>(source: R) -> Result<Vec<PlagiarizedPair>> {
    let mut r = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
