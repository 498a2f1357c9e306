//! Combining tables: the reliability added to a decoded component bit at
//! each iteration, plus their text file format.
//!
//! A table file is TOML with one `[[table]]` entry per channel parameter:
//!
//! ```toml
//! [[table]]
//! code = "bch(v=8,t=3,s=0,ext=false)"
//! sigma = 0.58
//! m = 2
//! weights = [1.9, 2.4, 3.1]
//! ```
//!
//! `granularity` is `"half-iteration"` (default: one weight per row or column
//! phase), `"iteration"` (one weight per iteration, reused by both phases) or
//! `"window-pair"` (staircase tables: `pairs` weights per iteration, one per
//! block pair of the decoding window, oldest pair first). `clamped` lists
//! list entries whose weight hit the clamp.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest weight a table may hold, `ln(1e6)`.
pub const W_MAX: f64 = 13.815510557964274;

/// What one entry of a weight list covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    #[default]
    HalfIteration,
    Iteration,
    WindowPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombiningLut {
    pub code: String,
    pub sigma: f64,
    pub m: u32,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub granularity: Granularity,
    /// Block pairs per iteration of a `window-pair` table.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub pairs: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clamped: Vec<usize>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl CombiningLut {
    pub fn new(code: impl Into<String>, sigma: f64, m: u32, weights: Vec<f64>) -> Result<Self> {
        let lut = Self {
            code: code.into(),
            sigma,
            m,
            weights,
            granularity: Granularity::HalfIteration,
            pairs: 0,
            clamped: Vec::new(),
        };
        lut.validate()?;
        Ok(lut)
    }

    /// A table with the same weight at every iteration.
    pub fn constant(w: f64, iterations: usize) -> Self {
        Self {
            code: "constant".into(),
            sigma: 0.0,
            m: 1,
            weights: vec![w; iterations],
            granularity: Granularity::Iteration,
            pairs: 0,
            clamped: Vec::new(),
        }
    }

    /// A staircase table, `weights[iteration * pairs + pair]`.
    pub fn window_pairs(
        code: impl Into<String>,
        sigma: f64,
        m: u32,
        pairs: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let lut = Self {
            code: code.into(),
            sigma,
            m,
            weights,
            granularity: Granularity::WindowPair,
            pairs,
            clamped: Vec::new(),
        };
        lut.validate()?;
        Ok(lut)
    }

    pub fn validate(&self) -> Result<()> {
        for &w in &self.weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::LutFormat(format!("weight {w} is not a finite non-negative number")));
            }
        }
        if self.weights.is_empty() {
            return Err(Error::LutFormat("empty weight list".into()));
        }
        if self.granularity == Granularity::WindowPair
            && (self.pairs == 0 || self.weights.len() % self.pairs != 0)
        {
            return Err(Error::LutFormat(format!(
                "{} weights do not split into rows of {} pairs",
                self.weights.len(),
                self.pairs
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight of list entry `step` (zero-based).
    pub fn weight(&self, step: usize) -> Result<f64> {
        self.weights.get(step).copied().ok_or(Error::IterationOutOfRange {
            iteration: step,
            len: self.weights.len(),
        })
    }

    /// Weight for phase `phase` (0 = row, 1 = column) of iteration
    /// `iteration` of a two-phase decoder.
    pub fn phase_weight(&self, iteration: usize, phase: usize) -> Result<f64> {
        match self.granularity {
            Granularity::HalfIteration => self.weight(2 * iteration + phase),
            Granularity::Iteration => self.weight(iteration),
            Granularity::WindowPair => self.pair_weight(iteration, 0),
        }
    }

    /// Weight for block pair `pair` (0 = oldest) at `iteration` of a
    /// staircase window. Tables of other granularities ignore the pair;
    /// pairs beyond a `window-pair` row reuse its last entry.
    pub fn pair_weight(&self, iteration: usize, pair: usize) -> Result<f64> {
        match self.granularity {
            Granularity::WindowPair => {
                if iteration >= self.iterations() {
                    return Err(Error::IterationOutOfRange {
                        iteration,
                        len: self.iterations(),
                    });
                }
                self.weight(iteration * self.pairs + pair.min(self.pairs - 1))
            }
            _ => self.phase_weight(iteration, 0),
        }
    }

    /// Number of two-phase iterations the table covers.
    pub fn iterations(&self) -> usize {
        match self.granularity {
            Granularity::HalfIteration => self.weights.len() / 2,
            Granularity::Iteration => self.weights.len(),
            Granularity::WindowPair => self.weights.len() / self.pairs.max(1),
        }
    }
}

/// Tables for several channel parameters of one code.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LutSet {
    #[serde(rename = "table", default)]
    pub tables: Vec<CombiningLut>,
}

impl LutSet {
    pub fn single(lut: CombiningLut) -> Self {
        Self { tables: vec![lut] }
    }

    /// The table generated for the sigma closest to `sigma`.
    pub fn nearest(&self, sigma: f64) -> Option<&CombiningLut> {
        self.tables
            .iter()
            .min_by(|a, b| (a.sigma - sigma).abs().total_cmp(&(b.sigma - sigma).abs()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::LutFormat(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let set: Self = toml::from_str(text).map_err(|e| Error::LutFormat(e.to_string()))?;
        if set.tables.is_empty() {
            return Err(Error::LutFormat("no [[table]] entries".into()));
        }
        for t in &set.tables {
            t.validate()?;
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn out_of_range_iteration() {
        let lut = CombiningLut::constant(2.0, 3);
        assert_eq!(lut.weight(2).unwrap(), 2.0);
        assert!(matches!(lut.weight(3), Err(Error::IterationOutOfRange { .. })));
    }

    #[test]
    fn phase_indexing() {
        let mut lut = CombiningLut::new("x", 0.5, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(lut.phase_weight(1, 0).unwrap(), 3.0);
        assert_eq!(lut.phase_weight(1, 1).unwrap(), 4.0);
        assert_eq!(lut.iterations(), 2);
        lut.granularity = Granularity::Iteration;
        assert_eq!(lut.phase_weight(1, 1).unwrap(), 2.0);
        assert_eq!(lut.iterations(), 4);
        assert!(lut.phase_weight(4, 0).is_err());
        let lut = CombiningLut::window_pairs("x", 0.5, 1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(lut.iterations(), 2);
        assert_eq!(lut.pair_weight(1, 0).unwrap(), 3.0);
        assert_eq!(lut.pair_weight(1, 5).unwrap(), 4.0);
        assert!(lut.pair_weight(2, 0).is_err());
        assert!(CombiningLut::window_pairs("x", 0.5, 1, 3, vec![1.0; 4]).is_err());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(LutSet::from_toml("").is_err());
        assert!(LutSet::from_toml("[[table]]\ncode='x'\nsigma=1.0\nm=1\nweights=[-1.0]").is_err());
        assert!(LutSet::from_toml("[[table]]\ncode='x'\nsigma=1.0\nm=1\nweights=[]").is_err());
    }

    #[test]
    fn nearest_table() {
        let set = LutSet {
            tables: vec![
                CombiningLut::new("a", 0.5, 1, vec![1.0]).unwrap(),
                CombiningLut::new("b", 0.6, 1, vec![1.0]).unwrap(),
            ],
        };
        assert_eq!(set.nearest(0.58).unwrap().code, "b");
        assert_eq!(set.nearest(0.1).unwrap().code, "a");
    }

    proptest! {
        #[test]
        fn toml_roundtrip_bit_exact(
            sigma in 0.01f64..3.0,
            w in prop::collection::vec(0.0f64..W_MAX, 1..20),
            m in 1u32..5,
            cols in 0u8..3,
        ) {
            let mut lut = CombiningLut::new("bch(v=8,t=3,s=0,ext=false)", sigma, m, w.clone()).unwrap();
            if cols == 1 {
                lut.granularity = Granularity::Iteration;
                lut.clamped = vec![0, 3];
            } else if cols == 2 {
                lut.granularity = Granularity::WindowPair;
                lut.pairs = 1;
            }
            let set = LutSet::single(lut);
            let back = LutSet::from_toml(&set.to_toml().unwrap()).unwrap();
            prop_assert_eq!(back, set);
        }
    }
}
