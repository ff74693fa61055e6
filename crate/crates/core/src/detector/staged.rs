//! Staged recovery of vacancies, per-order index sets and data symbols.

use num_complex::Complex64;

use super::{argmax, exact_map_unit, MpaWorkspace, SoftMessageMatrix, UnitObservation};
use crate::codebook::MergedAlphabet;
use crate::error::{Error, Result};
use crate::mapper::{free_positions, u64_to_bits, BtiMapper, HcpiConfig};

/// Decisions for one user's block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserDecision {
    pub user: usize,
    /// Positions judged empty, ascending.
    pub vacant: Vec<usize>,
    /// Detected positions of each order, ascending. Stops at a failed order.
    pub index_sets: Vec<Vec<usize>>,
    /// Detected symbols of each order in ascending position order.
    pub symbols: Vec<Vec<usize>>,
    /// Recovered `m` bits. Bits of a failed order and all later ones are 0.
    pub bits: Vec<u8>,
    /// First order whose candidate set was empty.
    pub failed_order: Option<usize>,
}

impl UserDecision {
    pub fn failed(&self) -> bool {
        self.failed_order.is_some()
    }
}

/// Decisions for all users of one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecision {
    pub users: Vec<UserDecision>,
}

/// The `count` positions with the largest zero-symbol probability for
/// `user`, ties to the smaller position, returned ascending.
pub fn detect_vacant(
    phis: &[SoftMessageMatrix],
    user: usize,
    count: usize,
    alphabet: &MergedAlphabet,
) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let zero = alphabet
        .zero_index()
        .expect("vacancy detection needs an alphabet with the zero symbol");
    let mut order: Vec<usize> = (0..phis.len()).collect();
    order.sort_by(|&a, &b| {
        phis[b]
            .get(user, zero)
            .total_cmp(&phis[a].get(user, zero))
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(count).collect();
    picked.sort_unstable();
    picked
}

/// Probability that `user` transmits a symbol of `order` in this unit.
pub fn order_usage_probability(
    phi: &SoftMessageMatrix,
    user: usize,
    order: usize,
    alphabet: &MergedAlphabet,
) -> f64 {
    phi.row(user)[alphabet.order_block(order)].iter().sum()
}

/// Most likely table row of `order` for `user`.
///
/// Candidates are the rows whose positions (relative to the positions left
/// by `lower`, the union of lower-order index sets) avoid `vacant`. Returns
/// the chosen absolute positions and their bit pattern.
#[allow(clippy::too_many_arguments)]
pub fn detect_order(
    order: usize,
    phis: &[SoftMessageMatrix],
    user: usize,
    lower: &[usize],
    vacant: &[usize],
    mapper: &BtiMapper,
    config: &HcpiConfig,
    alphabet: &MergedAlphabet,
) -> Result<(Vec<usize>, u64)> {
    let table = mapper.table(order);
    let free = free_positions(config.n, lower);
    let log_usage: Vec<f64> = phis
        .iter()
        .map(|phi| order_usage_probability(phi, user, order, alphabet).ln())
        .collect();
    let mut best: Option<(f64, Vec<usize>, u64)> = None;
    for pattern in 0..table.len() {
        let ranks = table.ranks(pattern)?;
        let positions: Vec<usize> = ranks.iter().map(|&x| free[x]).collect();
        if positions.iter().any(|p| vacant.contains(p)) {
            continue;
        }
        let score: f64 = positions.iter().map(|&p| log_usage[p]).sum();
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, positions, pattern));
        }
    }
    best.map(|(_, p, pat)| (p, pat))
        .ok_or(Error::EmptyCandidateSet { order })
}

/// Staged decisions from the soft matrices of all `n` units.
///
/// `forced_vacant` replaces vacancy detection with the given sets, one per
/// user.
pub fn mpad_from_soft(
    phis: &[SoftMessageMatrix],
    config: &HcpiConfig,
    mapper: &BtiMapper,
    alphabet: &MergedAlphabet,
    forced_vacant: Option<&[Vec<usize>]>,
) -> BlockDecision {
    assert_eq!(phis.len(), config.n, "one soft matrix per position");
    let users = phis.first().map_or(0, SoftMessageMatrix::users);
    let budget = config.budget();
    let bps = config.bits_per_symbol();
    let decide = |j: usize| {
        let vacant = match forced_vacant {
            Some(v) => v[j].clone(),
            None => detect_vacant(phis, j, config.vacancies(), alphabet),
        };
        let mut bits = vec![0u8; budget.m];
        let mut lower: Vec<usize> = Vec::with_capacity(config.active());
        let mut index_sets = Vec::with_capacity(config.orders());
        let mut symbols = Vec::with_capacity(config.orders());
        let mut failed_order = None;
        for r in 1..=config.orders() {
            let (positions, pattern) =
                match detect_order(r, phis, j, &lower, &vacant, mapper, config, alphabet) {
                    Ok(found) => found,
                    Err(_) => {
                        failed_order = Some(r);
                        break;
                    }
                };
            let block = alphabet.order_block(r);
            let syms: Vec<usize> = positions
                .iter()
                .map(|&p| argmax(&phis[p].row(j)[block.clone()]))
                .collect();
            let mut at = config.bit_offset(r);
            for b in u64_to_bits(pattern, budget.m1[r - 1]) {
                bits[at] = b;
                at += 1;
            }
            for &s in &syms {
                for b in u64_to_bits(s as u64, bps) {
                    bits[at] = b;
                    at += 1;
                }
            }
            lower.extend_from_slice(&positions);
            lower.sort_unstable();
            index_sets.push(positions);
            symbols.push(syms);
        }
        UserDecision {
            user: j,
            vacant,
            index_sets,
            symbols,
            bits,
            failed_order,
        }
    };
    BlockDecision {
        users: (0..users).map(decide).collect(),
    }
}

/// Message passing over every unit of a received block, then staged decisions.
///
/// `y` holds `n*K` chips and `gains[user]` the matching channel gains.
#[allow(clippy::too_many_arguments)]
pub fn mpad_block(
    y: &[Complex64],
    gains: &[Vec<Complex64>],
    n0: f64,
    config: &HcpiConfig,
    mapper: &BtiMapper,
    alphabet: &MergedAlphabet,
    iterations: usize,
    workspace: &mut MpaWorkspace,
) -> BlockDecision {
    let k = alphabet.graph().resources();
    let phis: Vec<SoftMessageMatrix> = (0..config.n)
        .map(|kappa| {
            let obs = UnitObservation::of_block(y, gains, kappa, k);
            workspace.run(kappa, &obs, n0, alphabet, iterations)
        })
        .collect();
    mpad_from_soft(&phis, config, mapper, alphabet, None)
}

/// As [`mpad_block`] but with exact per-unit marginals in place of message
/// passing.
pub fn exact_unit_block(
    y: &[Complex64],
    gains: &[Vec<Complex64>],
    n0: f64,
    config: &HcpiConfig,
    mapper: &BtiMapper,
    alphabet: &MergedAlphabet,
) -> Result<BlockDecision> {
    let k = alphabet.graph().resources();
    let phis = (0..config.n)
        .map(|kappa| {
            let obs = UnitObservation::of_block(y, gains, kappa, k);
            let post = exact_map_unit(&obs, n0, alphabet)?;
            Ok(SoftMessageMatrix::new(kappa, post.marginals))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mpad_from_soft(&phis, config, mapper, alphabet, None))
}
