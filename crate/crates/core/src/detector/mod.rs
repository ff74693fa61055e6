//! Merging-codebook message passing and staged index/data recovery.
//!
//! Detection of one block runs in two phases. First [`mc_mpa`] runs
//! probability-domain message passing over every detection unit (the `K`
//! chips of one codeword position) with the merged `R*C + 1` symbol
//! alphabet, producing one [`SoftMessageMatrix`] per unit. Then
//! [`staged`] turns those matrices into vacancy, index and data decisions
//! per user: vacant positions first, then order 1, order 2, and so on.

use num_complex::Complex64;

pub mod exact;
pub mod mpa;
pub mod staged;

pub use exact::{exact_map_unit, ExactUnitPosterior, EXACT_HYPOTHESIS_LIMIT};
pub use mpa::{fn_update, mc_mpa, MpaStats, MpaWorkspace};
pub use staged::{
    detect_order, detect_vacant, exact_unit_block, mpad_block, mpad_from_soft,
    order_usage_probability, BlockDecision, UserDecision,
};

/// Probabilities must sum to one within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Received chips and channel gains of one detection unit.
#[derive(Debug, Clone, Copy)]
pub struct UnitObservation<'a> {
    /// The `K` received chips of the unit.
    pub y: &'a [Complex64],
    /// Gains `h[user][chip]` of the whole block.
    pub gains: &'a [Vec<Complex64>],
    /// Chip offset of the unit inside the block.
    pub offset: usize,
}

impl<'a> UnitObservation<'a> {
    /// Unit `kappa` of a block with `k` chips per unit.
    pub fn of_block(
        y: &'a [Complex64],
        gains: &'a [Vec<Complex64>],
        kappa: usize,
        k: usize,
    ) -> Self {
        Self {
            y: &y[kappa * k..(kappa + 1) * k],
            gains,
            offset: kappa * k,
        }
    }

    #[inline]
    pub fn gain(&self, user: usize, resource: usize) -> Complex64 {
        self.gains[user][self.offset + resource]
    }
}

/// `J x Q` matrix of per-user symbol probabilities for one detection unit.
///
/// Column layout follows [`crate::codebook::MergedAlphabet`]: order blocks
/// first, the zero symbol last.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMessageMatrix {
    pub unit: usize,
    symbols: usize,
    probs: Vec<f64>,
}

impl SoftMessageMatrix {
    pub fn new(unit: usize, rows: Vec<Vec<f64>>) -> Self {
        let symbols = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == symbols),
            "ragged soft matrix"
        );
        Self {
            unit,
            symbols,
            probs: rows.into_iter().flatten().collect(),
        }
    }

    pub(crate) fn from_flat(unit: usize, symbols: usize, probs: Vec<f64>) -> Self {
        Self {
            unit,
            symbols,
            probs,
        }
    }

    pub fn users(&self) -> usize {
        self.probs.len() / self.symbols.max(1)
    }

    /// Columns per row.
    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.probs[user * self.symbols..(user + 1) * self.symbols]
    }

    #[inline]
    pub fn get(&self, user: usize, q: usize) -> f64 {
        self.probs[user * self.symbols + q]
    }

    /// Column with the largest probability in `user`'s row (lowest index on ties).
    pub fn argmax(&self, user: usize) -> usize {
        argmax(self.row(user))
    }
}

/// Index of the largest entry, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
