//! Pairwise error probabilities and the union bound on block error rate.
//!
//! All expressions assume independent unit-variance Rayleigh gains on every
//! user and chip, so the Hermitian form `h^H D D^H h` has eigenvalues
//! `lambda_s^2 = sum_j |c_j[s] - c^_j[s]|^2`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::trial_rng;
use crate::codebook::CodebookFamily;
use crate::error::{Error, Result};
use crate::mapper::{encode_block, u64_to_bits, BtiMapper, HcpiConfig};

/// Largest joint block count accepted by the exact bound.
pub const EXACT_BLOCK_LIMIT: u64 = 1 << 20;

/// Largest per-user bit count for which all block codewords are tabulated.
pub const MAX_TABULATED_BITS: usize = 16;

/// Gaussian tail probability.
pub fn q_exact(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Two-exponential approximation `e^(-x^2/2)/12 + e^(-2x^2/3)/4`.
pub fn q_approx(x: f64) -> f64 {
    let x2 = x * x;
    (-x2 / 2.0).exp() / 12.0 + (-2.0 * x2 / 3.0).exp() / 4.0
}

/// Which Q-function [`cpep`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QFunction {
    #[default]
    Exact,
    Approx,
}

impl QFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            QFunction::Exact => q_exact(x),
            QFunction::Approx => q_approx(x),
        }
    }
}

/// Transmitted and hypothesized chip sequences of all users.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseInstance {
    /// `c[user][chip]`.
    pub c: Vec<Vec<Complex64>>,
    /// `c_hat[user][chip]`.
    pub c_hat: Vec<Vec<Complex64>>,
}

impl PairwiseInstance {
    pub fn new(c: Vec<Vec<Complex64>>, c_hat: Vec<Vec<Complex64>>) -> Result<Self> {
        let chips = c.first().map_or(0, Vec::len);
        if c.len() != c_hat.len() || c.iter().chain(&c_hat).any(|row| row.len() != chips) {
            return Err(Error::DimensionMismatch(
                "pairwise instance rows differ in shape".into(),
            ));
        }
        Ok(Self { c, c_hat })
    }

    pub fn users(&self) -> usize {
        self.c.len()
    }

    pub fn chips(&self) -> usize {
        self.c.first().map_or(0, Vec::len)
    }

    /// `c - c_hat` per user and chip.
    pub fn difference(&self) -> Vec<Vec<Complex64>> {
        self.c
            .iter()
            .zip(&self.c_hat)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect()
    }
}

/// `lambda_s^2` for every chip.
pub fn delta_eigenvalues(instance: &PairwiseInstance) -> Vec<f64> {
    let mut out = vec![0.0; instance.chips()];
    for (a, b) in instance.c.iter().zip(&instance.c_hat) {
        for (s, (x, y)) in a.iter().zip(b).enumerate() {
            out[s] += (x - y).norm_sqr();
        }
    }
    out
}

/// Pairwise error probability for the gains `h[user][chip]`.
pub fn cpep(instance: &PairwiseInstance, h: &[Vec<Complex64>], n0: f64, q: QFunction) -> f64 {
    let delta = instance.difference();
    let mut form = 0.0;
    for s in 0..instance.chips() {
        let v: Complex64 = delta.iter().zip(h).map(|(d, g)| g[s] * d[s]).sum();
        form += v.norm_sqr();
    }
    q.eval((form / (2.0 * n0)).sqrt())
}

/// Closed form used for the Rayleigh-averaged pairwise error probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpepForm {
    /// Exact expectation of the approximated Q-function.
    #[default]
    Corrected,
    /// Product of per-chip sums with negative denominators, kept for comparison.
    AsPrinted,
}

/// Rayleigh-averaged pairwise error probability from the chip eigenvalues.
pub fn upep(lambda2: &[f64], n0: f64, form: UpepForm) -> Result<f64> {
    match form {
        UpepForm::Corrected => {
            let (mut a, mut b) = (1.0, 1.0);
            for &l in lambda2 {
                a *= 4.0 * n0 / (4.0 * n0 + l);
                b *= 3.0 * n0 / (3.0 * n0 + l);
            }
            Ok(a / 12.0 + b / 4.0)
        }
        UpepForm::AsPrinted => {
            let two_n0 = 2.0 * n0;
            let max = lambda2.iter().copied().fold(0.0, f64::max);
            let limit = 2.0 * max / 3.0;
            if two_n0 <= limit {
                return Err(Error::PoleEncountered { two_n0, limit });
            }
            Ok(lambda2
                .iter()
                .map(|&l| {
                    two_n0 / (two_n0 - l / 2.0) / 12.0 + two_n0 / (two_n0 - 2.0 * l / 3.0) / 4.0
                })
                .product())
        }
    }
}

/// Every block codeword of every user, indexed by the block's bit pattern.
#[derive(Debug, Clone)]
pub struct BlockAlphabet {
    bits: usize,
    chips: usize,
    words: Vec<Vec<Vec<Complex64>>>,
}

impl BlockAlphabet {
    /// Encodes all `2^m` bit patterns of every user.
    pub fn build(
        config: &HcpiConfig,
        mapper: &BtiMapper,
        families: &[CodebookFamily],
    ) -> Result<Self> {
        let m = config.block_bits();
        if m > MAX_TABULATED_BITS {
            return Err(Error::InstanceTooLarge(format!(
                "{m} bits per block exceed the tabulation limit of {MAX_TABULATED_BITS}"
            )));
        }
        let users = families
            .first()
            .map(|f| f.graph().users())
            .ok_or_else(|| Error::InconsistentFamilies("no codebook families".into()))?;
        let words = (0..users)
            .map(|j| {
                (0..1u64 << m)
                    .map(|p| {
                        Ok(encode_block(j, &u64_to_bits(p, m), config, mapper, families)?.chips)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bits: m,
            chips: config.n * families[0].graph().resources(),
            words,
        })
    }

    /// Arbitrary word lists, `words[user][message][chip]`, with the same
    /// power-of-two message count for every user.
    pub fn from_words(words: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        let chips = words.first().and_then(|u| u.first()).map_or(0, Vec::len);
        let count = words.first().map_or(0, Vec::len);
        if count == 0
            || !count.is_power_of_two()
            || words
                .iter()
                .any(|u| u.len() != count || u.iter().any(|w| w.len() != chips))
        {
            return Err(Error::DimensionMismatch(
                "every user needs the same power-of-two number of equal-length words".into(),
            ));
        }
        Ok(Self {
            bits: count.trailing_zeros() as usize,
            chips,
            words,
        })
    }

    pub fn users(&self) -> usize {
        self.words.len()
    }

    /// Bits per user per block.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Codewords per user, `2^m`.
    pub fn messages(&self) -> u64 {
        1 << self.bits
    }

    pub fn chips(&self) -> usize {
        self.chips
    }

    pub fn word(&self, user: usize, message: u64) -> &[Complex64] {
        &self.words[user][message as usize]
    }

    fn lambda2(&self, c: &[u64], c_hat: &[u64], out: &mut [f64]) {
        out.fill(0.0);
        for (j, (&a, &b)) in c.iter().zip(c_hat).enumerate() {
            if a == b {
                continue;
            }
            for ((o, x), y) in out.iter_mut().zip(self.word(j, a)).zip(self.word(j, b)) {
                *o += (x - y).norm_sqr();
            }
        }
    }
}

/// Joint maximum-likelihood decision over all `2^(mJ)` block hypotheses.
pub fn ml_block_detect(
    y: &[Complex64],
    gains: &[Vec<Complex64>],
    alphabet: &BlockAlphabet,
) -> Result<Vec<u64>> {
    let users = alphabet.users();
    let total = alphabet.messages().checked_pow(users as u32);
    if total.is_none_or(|t| t > EXACT_BLOCK_LIMIT) {
        return Err(Error::InstanceTooLarge(format!(
            "2^({} * {users}) joint blocks exceed {EXACT_BLOCK_LIMIT}",
            alphabet.bits()
        )));
    }
    let faded: Vec<Vec<Vec<Complex64>>> = (0..users)
        .map(|j| {
            (0..alphabet.messages())
                .map(|p| {
                    alphabet
                        .word(j, p)
                        .iter()
                        .zip(&gains[j])
                        .map(|(c, h)| c * h)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut best = (f64::INFINITY, vec![0u64; users]);
    let mut joint = vec![0u64; users];
    for _ in 0..total.unwrap_or(0) {
        let mut metric = 0.0;
        for (s, &ys) in y.iter().enumerate() {
            let mut r = ys;
            for (j, &p) in joint.iter().enumerate() {
                r -= faded[j][p as usize][s];
            }
            metric += r.norm_sqr();
        }
        if metric < best.0 {
            best = (metric, joint.clone());
        }
        next_joint(&mut joint, alphabet.messages());
    }
    Ok(best.1)
}

fn next_joint(joint: &mut [u64], radix: u64) {
    for d in joint.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return;
        }
        *d = 0;
    }
}

/// How [`ablep_bound`] evaluates the double sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Full enumeration of transmitted and competing joint blocks.
    Exact,
    /// Uniform transmitted blocks; competitors that differ only in the
    /// user's block are summed exhaustively, the rest are sampled once.
    Sampled { samples: u64, seed: u64 },
}

/// Bound value with the standard error of a sampled estimate (0 if exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Union bound on the block error probability of `user` under joint
/// maximum-likelihood detection.
pub fn ablep_bound(
    user: usize,
    alphabet: &BlockAlphabet,
    n0: f64,
    form: UpepForm,
    mode: BoundMode,
) -> Result<BoundEstimate> {
    if user >= alphabet.users() {
        return Err(Error::DimensionMismatch(format!(
            "user {user} of {}",
            alphabet.users()
        )));
    }
    match mode {
        BoundMode::Exact => ablep_exact(user, alphabet, n0, form),
        BoundMode::Sampled { samples, seed } => {
            ablep_sampled(user, alphabet, n0, form, samples, seed)
        }
    }
}

fn ablep_exact(
    user: usize,
    alphabet: &BlockAlphabet,
    n0: f64,
    form: UpepForm,
) -> Result<BoundEstimate> {
    let users = alphabet.users();
    let radix = alphabet.messages();
    let total = radix.checked_pow(users as u32);
    let total = match total {
        Some(t) if t <= EXACT_BLOCK_LIMIT => t,
        _ => {
            return Err(Error::InstanceTooLarge(format!(
                "2^({} * {users}) joint blocks exceed {EXACT_BLOCK_LIMIT}",
                alphabet.bits()
            )))
        }
    };
    let mut lambda2 = vec![0.0; alphabet.chips()];
    let mut sum = 0.0;
    let mut c = vec![0u64; users];
    for _ in 0..total {
        let mut c_hat = vec![0u64; users];
        for _ in 0..total {
            if c_hat[user] != c[user] {
                alphabet.lambda2(&c, &c_hat, &mut lambda2);
                sum += upep(&lambda2, n0, form)?;
            }
            next_joint(&mut c_hat, radix);
        }
        next_joint(&mut c, radix);
    }
    Ok(BoundEstimate {
        value: sum / total as f64,
        stderr: 0.0,
    })
}

fn ablep_sampled(
    user: usize,
    alphabet: &BlockAlphabet,
    n0: f64,
    form: UpepForm,
    samples: u64,
    seed: u64,
) -> Result<BoundEstimate> {
    if samples < 2 {
        return Err(Error::InvalidConfig(
            "sampled bound needs at least 2 samples".into(),
        ));
    }
    let users = alphabet.users();
    let radix = alphabet.messages();
    // Competitors that also change at least one other user's block.
    let others = (users as i32 - 1) * alphabet.bits() as i32;
    let multi_weight = (radix - 1) as f64 * (2f64.powi(others) - 1.0);

    let terms = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, 0, i);
            let c: Vec<u64> = (0..users).map(|_| rng.random_range(0..radix)).collect();
            let mut lambda2 = vec![0.0; alphabet.chips()];
            let mut c_hat = c.clone();
            let mut x = 0.0;
            for alt in (0..radix).filter(|&a| a != c[user]) {
                c_hat[user] = alt;
                alphabet.lambda2(&c, &c_hat, &mut lambda2);
                x += upep(&lambda2, n0, form)?;
            }
            if multi_weight > 0.0 {
                let alt = (c[user] + rng.random_range(1..radix)) % radix;
                c_hat[user] = alt;
                loop {
                    for j in (0..users).filter(|&j| j != user) {
                        c_hat[j] = rng.random_range(0..radix);
                    }
                    if (0..users).any(|j| j != user && c_hat[j] != c[j]) {
                        break;
                    }
                }
                alphabet.lambda2(&c, &c_hat, &mut lambda2);
                x += multi_weight * upep(&lambda2, n0, form)?;
            }
            Ok(x)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / n;
    let var = terms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(BoundEstimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Complex, DMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::channel::complex_gaussian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_instance(rng: &mut ChaCha8Rng, users: usize, chips: usize) -> PairwiseInstance {
        let mut row =
            || -> Vec<Complex64> { (0..chips).map(|_| complex_gaussian(rng, 1.0)).collect() };
        let a: Vec<_> = (0..users).map(|_| row()).collect();
        let b: Vec<_> = (0..users).map(|_| row()).collect();
        PairwiseInstance::new(a, b).unwrap()
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_exact(0.0), 0.5);
        assert!((q_approx(0.0) - 1.0 / 3.0).abs() < 1e-15);
        // Reference values of the standard normal tail.
        assert!((q_exact(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((q_exact(3.0) - 1.349_898_031_630_094_5e-3).abs() < 1e-17);
        assert!((q_exact(5.0) - 2.866_515_718_791_939e-7).abs() < 1e-20);
    }

    #[test]
    fn q_approx_relative_error_on_grid() {
        let mut worst: f64 = 0.0;
        for i in 0..=450 {
            let x = 0.5 + i as f64 * 0.01;
            let rel = (q_approx(x) - q_exact(x)).abs() / q_exact(x);
            worst = worst.max(rel);
        }
        // The largest deviation, about 26%, sits near x = 2.
        assert!(worst < 0.27, "{worst}");
        assert!(worst > 0.25, "{worst}");
        let at = |x: f64| (q_approx(x) - q_exact(x)) / q_exact(x);
        assert!((at(0.5) + 0.0760).abs() < 5e-4, "{}", at(0.5));
        assert!((at(2.0) - 0.2593).abs() < 5e-4, "{}", at(2.0));
        assert!((at(5.0) - 0.1338).abs() < 5e-4, "{}", at(5.0));
    }

    #[test]
    fn eigenvalues_of_simple_pairs() {
        let x = Complex64::from_polar(1.0, 0.3);
        let same = PairwiseInstance::new(vec![vec![x, x]], vec![vec![x, x]]).unwrap();
        assert_eq!(delta_eigenvalues(&same), vec![0.0, 0.0]);
        let flip = PairwiseInstance::new(vec![vec![x]], vec![vec![-x]]).unwrap();
        assert!((delta_eigenvalues(&flip)[0] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_match_gram_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let inst = random_instance(&mut rng, 3, 4);
            let delta = inst.difference();
            let (j_n, s_n) = (inst.users(), inst.chips());
            // D is JS x S with D[(j,s), s] = conj(delta_j[s]); D D^H is the
            // JS x JS Hermitian matrix of the quadratic form.
            let d = DMatrix::<Complex<f64>>::from_fn(j_n * s_n, s_n, |row, col| {
                let (j, s) = (row / s_n, row % s_n);
                if s == col {
                    delta[j][s].conj()
                } else {
                    Complex::new(0.0, 0.0)
                }
            });
            let gram = &d * d.adjoint();
            let mut eig: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(|a, b| b.total_cmp(a));
            let mut ours = delta_eigenvalues(&inst);
            ours.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in ours.iter().zip(&eig) {
                assert!((a - b).abs() < 1e-10 * (1.0 + a), "{a} vs {b}");
            }
            for e in &eig[s_n..] {
                assert!(e.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenvalues_symmetric_and_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_instance(&mut rng, 4, 6);
        let swapped = PairwiseInstance::new(inst.c_hat.clone(), inst.c.clone()).unwrap();
        let rot = Complex64::from_polar(1.0, 1.234);
        let turn = |m: &Vec<Vec<Complex64>>| -> Vec<Vec<Complex64>> {
            m.iter()
                .map(|r| r.iter().map(|v| v * rot).collect())
                .collect()
        };
        let rotated = PairwiseInstance::new(turn(&inst.c), turn(&inst.c_hat)).unwrap();
        let base = delta_eigenvalues(&inst);
        for (a, b) in base.iter().zip(delta_eigenvalues(&swapped)) {
            assert_eq!(*a, b);
        }
        for (a, b) in base.iter().zip(delta_eigenvalues(&rotated)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cpep_limits() {
        let x = c(0.6, 0.8);
        let same = PairwiseInstance::new(vec![vec![x]], vec![vec![x]]).unwrap();
        let h = vec![vec![c(0.3, 0.4)]];
        assert_eq!(cpep(&same, &h, 1.0, QFunction::Exact), 0.5);
        let diff = PairwiseInstance::new(vec![vec![x]], vec![vec![-x]]).unwrap();
        assert!(cpep(&diff, &h, 1e-6, QFunction::Exact) < 1e-100);
        assert!(cpep(&diff, &h, 1e-6, QFunction::Approx) < 1e-100);
    }

    #[test]
    fn cpep_matches_binary_test_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = random_instance(&mut rng, 2, 3);
        let h: Vec<Vec<Complex64>> = (0..2)
            .map(|_| (0..3).map(|_| complex_gaussian(&mut rng, 1.0)).collect())
            .collect();
        let rx = |m: &Vec<Vec<Complex64>>, s: usize| -> Complex64 {
            (0..2).map(|j| h[j][s] * m[j][s]).sum()
        };
        let a: Vec<Complex64> = (0..3).map(|s| rx(&inst.c, s)).collect();
        let b: Vec<Complex64> = (0..3).map(|s| rx(&inst.c_hat, s)).collect();
        let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum();
        // Noise chosen so the error rate is near 5%.
        let n0 = d2 / (2.0 * 1.645f64.powi(2));
        let p = cpep(&inst, &h, n0, QFunction::Exact);
        let trials = 1_000_000;
        let mut errors = 0u64;
        for _ in 0..trials {
            let mut da = 0.0;
            let mut db = 0.0;
            for s in 0..3 {
                let y = a[s] + complex_gaussian(&mut rng, n0);
                da += (y - a[s]).norm_sqr();
                db += (y - b[s]).norm_sqr();
            }
            if db < da {
                errors += 1;
            }
        }
        let est = errors as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((est - p).abs() < 3.0 * sigma, "{est} vs {p}");
    }

    #[test]
    fn upep_forms_at_zero_distance() {
        assert!((upep(&[0.0; 5], 0.3, UpepForm::Corrected).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((upep(&[0.0], 0.3, UpepForm::AsPrinted).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // The printed product form compounds the per-chip 1/3 over chips.
        let s3 = upep(&[0.0; 3], 0.3, UpepForm::AsPrinted).unwrap();
        assert!((s3 - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn as_printed_form_hits_its_pole() {
        let err = upep(&[0.2, 1.5], 0.4, UpepForm::AsPrinted);
        assert!(matches!(err, Err(Error::PoleEncountered { .. })));
        assert!(upep(&[0.2, 1.5], 0.6, UpepForm::AsPrinted).is_ok());
    }

    #[test]
    fn corrected_upep_is_monotone() {
        let lam = [0.5, 1.2, 0.0, 2.0];
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let n0 = 10f64.powf(1.0 - k as f64 * 0.2);
            let p = upep(&lam, n0, UpepForm::Corrected).unwrap();
            assert!(p < last);
            last = p;
        }
        assert!(last < 1e-15, "{last}");
        let base = upep(&lam, 0.3, UpepForm::Corrected).unwrap();
        for s in 0..4 {
            let mut more = lam;
            more[s] += 0.1;
            assert!(upep(&more, 0.3, UpepForm::Corrected).unwrap() < base);
        }
    }

    #[test]
    fn single_word_users_have_zero_bound() {
        let words = vec![vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]; 3];
        let a = BlockAlphabet::from_words(words).unwrap();
        let b = ablep_bound(0, &a, 0.1, UpepForm::Corrected, BoundMode::Exact).unwrap();
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn exact_bound_counts_every_pair() {
        // One user, two antipodal words on one chip: one competitor per block.
        let words = vec![vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]]];
        let a = BlockAlphabet::from_words(words).unwrap();
        let n0 = 0.5;
        let b = ablep_bound(0, &a, n0, UpepForm::Corrected, BoundMode::Exact).unwrap();
        let expect = upep(&[4.0], n0, UpepForm::Corrected).unwrap();
        assert!((b.value - expect).abs() < 1e-15);
    }

    #[test]
    fn ml_detection_of_noiseless_blocks() {
        let words = vec![
            vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(-1.0, 0.0), c(0.0, 0.0)],
            ],
            vec![
                vec![c(0.0, 0.0), c(0.0, 1.0)],
                vec![c(0.5, 0.0), c(0.0, -1.0)],
            ],
        ];
        let a = BlockAlphabet::from_words(words).unwrap();
        let gains = vec![vec![c(1.0, 0.0); 2]; 2];
        for (m0, m1) in [(0u64, 0u64), (0, 1), (1, 0), (1, 1)] {
            let y: Vec<Complex64> = (0..2)
                .map(|s| a.word(0, m0)[s] + a.word(1, m1)[s])
                .collect();
            assert_eq!(ml_block_detect(&y, &gains, &a).unwrap(), vec![m0, m1]);
        }
    }
}
