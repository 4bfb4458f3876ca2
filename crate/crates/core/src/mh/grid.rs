use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::{mh_odds_ratio, permutation_test, MhResult, PermutationTest, Stratum2x2, Verdict};
use crate::bin::HalfBin;
use crate::dedup::PlagiarizedPair;
use crate::error::{Error, Result};

/// Largest deviation (in half steps) admitted on any axis: 3.5.
const MAX_HALF_STEPS: i32 = 7;

/// How pairs are binned into grid rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    /// `|deviation|`, rows i = 0..3, columns j = i+0.5..3.5
    #[serde(rename = "abs")]
    Absolute,
    /// signed deviation, rows i = 0..-3, columns j = i-0.5..-3.5
    #[serde(rename = "signed-neg")]
    SignedNegative,
    /// signed deviation, rows i = 0..3, columns j = i+0.5..3.5
    #[serde(rename = "signed-pos")]
    SignedPositive,
    /// one row comparing +v (row i) with -v (column), v = 0.5..3.5
    #[serde(rename = "mirror")]
    Mirrored,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" | "absolute" => Ok(Axis::Absolute),
            "signed-neg" => Ok(Axis::SignedNegative),
            "signed-pos" => Ok(Axis::SignedPositive),
            "mirror" | "mirrored" => Ok(Axis::Mirrored),
            other => {
                Err(Error::InvalidArgument(format!("unknown axis `{other}` (abs, signed-neg, signed-pos, mirror)")))
            }
        }
    }
}

impl Axis {
    fn sign(self) -> i32 {
        if self == Axis::SignedNegative {
            -1
        } else {
            1
        }
    }

    /// Admissible `(i, j)` cells in display order.
    pub fn cells(self) -> Vec<(HalfBin, HalfBin)> {
        if self == Axis::Mirrored {
            return (1..=MAX_HALF_STEPS).map(|v| (HalfBin(v), HalfBin(-v))).collect();
        }
        let s = self.sign();
        (0..MAX_HALF_STEPS)
            .flat_map(|i| (i + 1..=MAX_HALF_STEPS).map(move |j| (HalfBin(s * i), HalfBin(s * j))))
            .collect()
    }

    /// The two copies' bins on this axis.
    fn coordinates(self, p: &PlagiarizedPair) -> (HalfBin, HalfBin) {
        match self {
            Axis::Absolute => (p.abs_dev_a(), p.abs_dev_b()),
            _ => (p.signed_dev_a, p.signed_dev_b),
        }
    }
}

/// Strata for cell `(i, j)`: every pair with one copy in bin i and the other
/// in bin j, with the bin-i copy in the first row. Pairs with both copies in
/// the same bin, or outside the two bins, are skipped.
pub fn strata_for_bin_pair(pairs: &[PlagiarizedPair], axis: Axis, i: HalfBin, j: HalfBin) -> Result<Vec<Stratum2x2>> {
    if i == j {
        return Err(Error::InvalidArgument(format!("cell needs two distinct bins, got {i} twice")));
    }
    let mut out = Vec::new();
    for p in pairs {
        let (x, y) = axis.coordinates(p);
        let a = (p.helpful_a, p.total_a);
        let b = (p.helpful_b, p.total_b);
        let (row_i, row_j) = if (x, y) == (i, j) {
            (a, b)
        } else if (y, x) == (i, j) {
            (b, a)
        } else {
            continue;
        };
        out.push(Stratum2x2::from_votes(row_i.0, row_i.1, row_j.0, row_j.1)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Cell {
    /// no pair falls in this cell
    Empty,
    /// pairs exist but every stratum has ad = bc = 0
    Undefined {
        n_strata: usize,
    },
    Estimated(MhResult),
}

impl Cell {
    pub fn verdict(&self) -> Verdict {
        match self {
            Cell::Estimated(r) => r.verdict,
            _ => Verdict::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub i: HalfBin,
    pub j: HalfBin,
    #[serde(flatten)]
    pub cell: Cell,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<PermutationTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictGrid {
    pub axis: Axis,
    pub cells: Vec<GridCell>,
}

/// Runs the Mantel-Haenszel test for every admissible cell of the axis.
pub fn verdict_grid(pairs: &[PlagiarizedPair], axis: Axis) -> Result<VerdictGrid> {
    let cells = axis
        .cells()
        .into_iter()
        .map(|(i, j)| {
            let strata = strata_for_bin_pair(pairs, axis, i, j)?;
            let cell = if strata.is_empty() {
                Cell::Empty
            } else {
                match mh_odds_ratio(&strata) {
                    Ok(r) => Cell::Estimated(r),
                    Err(Error::UndefinedOddsRatio) => Cell::Undefined { n_strata: strata.len() },
                    Err(e) => return Err(e),
                }
            };
            Ok(GridCell { i, j, cell, permutation: None })
        })
        .collect::<Result<_>>()?;
    Ok(VerdictGrid { axis, cells })
}

impl VerdictGrid {
    pub fn get(&self, i: HalfBin, j: HalfBin) -> Option<&Cell> {
        self.cells.iter().find(|c| c.i == i && c.j == j).map(|c| &c.cell)
    }

    /// Adds a permutation-test p-value to every non-empty cell. Cell `k`
    /// uses the random stream `seed + k`.
    pub fn attach_permutation_tests(
        &mut self,
        pairs: &[PlagiarizedPair],
        permutations: usize,
        seed: u64,
    ) -> Result<()> {
        for (k, gc) in self.cells.iter_mut().enumerate() {
            let strata = strata_for_bin_pair(pairs, self.axis, gc.i, gc.j)?;
            if !strata.is_empty() {
                gc.permutation = Some(permutation_test(&strata, permutations, seed.wrapping_add(k as u64))?);
            }
        }
        Ok(())
    }

    /// Text table with the symbols ≻ (row more helpful), ≺ (less) and blank.
    pub fn render_text(&self) -> String {
        const W: usize = 6;
        let mut out = String::new();
        let pad = |s: &str| format!("{s:>W$}");
        if self.axis == Axis::Mirrored {
            let _ = write!(out, "{:>8}", "v");
            for gc in &self.cells {
                out.push_str(&pad(&gc.i.to_string()));
            }
            out.push('\n');
            let _ = write!(out, "{:>8}", "+v:-v");
            for gc in &self.cells {
                out.push_str(&pad(gc.cell.verdict().symbol()));
            }
            out.push('\n');
            return out;
        }
        let s = self.axis.sign();
        let _ = write!(out, "{:>8}", "i\\j");
        for j in 1..=MAX_HALF_STEPS {
            out.push_str(&pad(&HalfBin(s * j).to_string()));
        }
        out.push('\n');
        for i in 0..MAX_HALF_STEPS {
            let _ = write!(out, "{:>8}", HalfBin(s * i).to_string());
            for j in 1..=MAX_HALF_STEPS {
                let sym = if j > i {
                    self.get(HalfBin(s * i), HalfBin(s * j)).map_or(" ", |c| c.verdict().symbol())
                } else {
                    " "
                };
                out.push_str(&pad(sym));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
