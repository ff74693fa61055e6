//! Rayleigh fading, AWGN and multi-user superposition.
//!
//! Trials draw their randomness from [`trial_rng`], a ChaCha8 generator keyed
//! by the master seed with the stream id `(snr_index << 40) | trial_index`.
//! The derivation is part of the public contract: changing it changes every
//! simulated number.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::{CodewordBlock, HcpiConfig};

/// Generator for trial `trial` of SNR point `snr_index`.
pub fn trial_rng(master_seed: u64, snr_index: usize, trial: u64) -> ChaCha8Rng {
    debug_assert!(trial < 1 << 40 && snr_index < 1 << 24);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((snr_index as u64) << 40) | trial);
    rng
}

/// How channel gains vary across the chips of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FadingModel {
    /// Independent gain on every chip.
    #[default]
    PerChipIid,
    /// One gain per user per detection unit of `K` chips.
    BlockFadingPerUnit,
    /// `h = 1` everywhere (AWGN only).
    None,
}

/// Complex gains `h[user][chip]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<Vec<Complex64>>,
    pub model: FadingModel,
}

impl ChannelRealization {
    /// All gains equal to one.
    pub fn unity(users: usize, chips: usize) -> Self {
        Self {
            gains: vec![vec![Complex64::new(1.0, 0.0); chips]; users],
            model: FadingModel::None,
        }
    }

    pub fn users(&self) -> usize {
        self.gains.len()
    }

    pub fn chips(&self) -> usize {
        self.gains.first().map_or(0, Vec::len)
    }
}

/// One circularly-symmetric complex Gaussian sample with variance `var`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Draws gains for `users` users over `chips` chips; `unit` is the
/// detection-unit length used by [`FadingModel::BlockFadingPerUnit`].
pub fn sample_channel<R: Rng + ?Sized>(
    users: usize,
    chips: usize,
    unit: usize,
    model: FadingModel,
    rng: &mut R,
) -> ChannelRealization {
    let gains = match model {
        FadingModel::PerChipIid => (0..users)
            .map(|_| (0..chips).map(|_| complex_gaussian(rng, 1.0)).collect())
            .collect(),
        FadingModel::BlockFadingPerUnit => {
            let unit = unit.max(1);
            (0..users)
                .map(|_| {
                    let mut row = Vec::with_capacity(chips);
                    while row.len() < chips {
                        let h = complex_gaussian(rng, 1.0);
                        let take = unit.min(chips - row.len());
                        row.extend(std::iter::repeat_n(h, take));
                    }
                    row
                })
                .collect()
        }
        FadingModel::None => return ChannelRealization::unity(users, chips),
    };
    ChannelRealization { gains, model }
}

/// Noise level of one SNR point under the Eb/N0 convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Complex noise variance per chip.
    pub n0: f64,
    pub snr_db: f64,
    /// Transmit energy per information bit.
    pub eb: f64,
}

impl NoiseParams {
    /// Es/N0 in dB per active position (codeword energy is 1).
    pub fn es_n0_db(&self) -> f64 {
        -10.0 * self.n0.log10()
    }
}

/// `N0 = Eb 10^(-snr/10)` with `Eb = (sum of t) / m`.
///
/// Codewords carry unit energy, so a block spends `sum t` energy units on
/// `m` bits.
pub fn snr_to_n0(snr_db: f64, config: &HcpiConfig) -> NoiseParams {
    let eb = config.active() as f64 / config.block_bits() as f64;
    NoiseParams {
        n0: eb * 10f64.powf(-snr_db / 10.0),
        snr_db,
        eb,
    }
}

/// `y[s] = sum_j h[j][s] c_j[s] + z[s]` with `z ~ CN(0, N0)`.
///
/// `N0 = 0` produces the noiseless sum without touching `rng`.
pub fn superpose<R: Rng + ?Sized>(
    blocks: &[CodewordBlock],
    channel: &ChannelRealization,
    n0: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let chips = blocks.first().map_or(0, |b| b.chips.len());
    if blocks.iter().any(|b| b.chips.len() != chips) {
        return Err(Error::DimensionMismatch("blocks differ in length".into()));
    }
    if channel.users() < blocks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} users in channel, {} blocks",
            channel.users(),
            blocks.len()
        )));
    }
    if let Some((j, _)) = blocks
        .iter()
        .enumerate()
        .find(|(j, _)| channel.gains[*j].len() != chips)
    {
        return Err(Error::DimensionMismatch(format!(
            "user {j} has {} gains, block has {chips} chips",
            channel.gains[j].len()
        )));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); chips];
    for (j, block) in blocks.iter().enumerate() {
        for ((acc, h), c) in y.iter_mut().zip(&channel.gains[j]).zip(&block.chips) {
            *acc += h * c;
        }
    }
    if n0 > 0.0 {
        for v in &mut y {
            *v += complex_gaussian(rng, n0);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::Slot;

    fn block(user: usize, chips: Vec<Complex64>) -> CodewordBlock {
        CodewordBlock {
            user,
            slots: vec![Slot::Empty],
            chips,
            index_sets: vec![],
            bits: vec![],
        }
    }

    #[test]
    fn unit_power_and_circular_symmetry() {
        let mut rng = trial_rng(7, 0, 0);
        let ch = sample_channel(1, 1_000_000, 4, FadingModel::PerChipIid, &mut rng);
        let n = ch.chips() as f64;
        let p: f64 = ch.gains[0].iter().map(|h| h.norm_sqr()).sum::<f64>() / n;
        let vr: f64 = ch.gains[0].iter().map(|h| h.re * h.re).sum::<f64>() / n;
        let vi: f64 = ch.gains[0].iter().map(|h| h.im * h.im).sum::<f64>() / n;
        assert!((p - 1.0).abs() < 0.01, "{p}");
        assert!((vr - 0.5).abs() < 0.01, "{vr}");
        assert!((vi - 0.5).abs() < 0.01, "{vi}");
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = sample_channel(3, 8, 4, FadingModel::PerChipIid, &mut trial_rng(1, 2, 3));
        let b = sample_channel(3, 8, 4, FadingModel::PerChipIid, &mut trial_rng(1, 2, 3));
        let c = sample_channel(3, 8, 4, FadingModel::PerChipIid, &mut trial_rng(1, 2, 4));
        let d = sample_channel(3, 8, 4, FadingModel::PerChipIid, &mut trial_rng(1, 3, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn block_fading_is_constant_per_unit() {
        let ch = sample_channel(
            2,
            12,
            4,
            FadingModel::BlockFadingPerUnit,
            &mut trial_rng(0, 0, 0),
        );
        for row in &ch.gains {
            for unit in row.chunks(4) {
                assert!(unit.iter().all(|h| *h == unit[0]));
            }
            assert_ne!(row[0], row[4]);
        }
    }

    #[test]
    fn superposition_is_linear() {
        let c1: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let c2: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(-1.0, i as f64 * 0.5))
            .collect();
        let ch = ChannelRealization::unity(2, 4);
        let mut rng = trial_rng(0, 0, 0);
        let y1 = superpose(&[block(0, c1.clone())], &ch, 0.0, &mut rng).unwrap();
        assert_eq!(y1, c1);
        let y = superpose(
            &[block(0, c1.clone()), block(1, c2.clone())],
            &ch,
            0.0,
            &mut rng,
        )
        .unwrap();
        for s in 0..4 {
            assert_eq!(y[s], c1[s] + c2[s]);
        }
    }

    #[test]
    fn empty_chips_carry_only_noise() {
        let zeros = vec![Complex64::new(0.0, 0.0); 1_000_000];
        let ch = ChannelRealization {
            gains: vec![vec![Complex64::new(0.3, -0.2); 1_000_000]],
            model: FadingModel::PerChipIid,
        };
        let y = superpose(&[block(0, zeros)], &ch, 0.25, &mut trial_rng(5, 0, 0)).unwrap();
        let var: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((var - 0.25).abs() < 0.0025, "{var}");
    }

    #[test]
    fn superpose_rejects_mismatch() {
        let ch = ChannelRealization::unity(1, 3);
        let b = block(0, vec![Complex64::new(0.0, 0.0); 4]);
        assert!(matches!(
            superpose(&[b], &ch, 0.0, &mut trial_rng(0, 0, 0)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn snr_conventions() {
        let cs = snr_to_n0(0.0, &HcpiConfig::cscma(4).unwrap());
        assert_eq!(cs.eb, 0.5);
        assert_eq!(cs.n0, 0.5);
        let h = snr_to_n0(10.0, &HcpiConfig::new(4, vec![2, 1], 4).unwrap());
        assert!((h.eb - 1.0 / 3.0).abs() < 1e-15);
        assert!((h.n0 - 1.0 / 30.0).abs() < 1e-15);
        let cfg = HcpiConfig::new(4, vec![2, 1], 4).unwrap();
        let mut last = f64::INFINITY;
        for snr in [-10.0, 0.0, 10.0, 40.0, 300.0, f64::INFINITY] {
            let n0 = snr_to_n0(snr, &cfg).n0;
            assert!(n0 < last);
            last = n0;
        }
        assert_eq!(last, 0.0);
    }
}
