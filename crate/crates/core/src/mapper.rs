//! Bit budgets, bits-to-indices (BTI) mapping and block encoding.
//!
//! Positions are 0-based throughout: a block of `n` positions uses indices
//! `0..n`. A BTI table for order `r` maps an `m1[r]`-bit pattern (read MSB
//! first) to `t[r]` *relative ranks* among the positions still available
//! after orders `1..r` have been placed; the ranks index the ascending list
//! of available positions.

use std::collections::HashMap;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::codebook::CodebookFamily;
use crate::error::{Error, Result};

/// Name of the builtin `n = 4, t = 2` first-order table.
pub const TABLE1_N4T2: &str = "table1-n4t2";
/// Name of the builtin `n = 4, t = [2, 1]` two-order table.
pub const TABLE2_HCPI_N4: &str = "table2-hcpi-n4";

/// `n` choose `k`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographic iterator over the `t`-subsets of `0..n`.
pub fn combinations(n: usize, t: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = (t <= n).then(|| (0..t).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        let mut i = t;
        while i > 0 {
            i -= 1;
            if succ[i] < n - t + i {
                succ[i] += 1;
                for j in i + 1..t {
                    succ[j] = succ[j - 1] + 1;
                }
                next = Some(succ);
                break;
            }
        }
        Some(current)
    })
}

/// The `rank`-th `t`-subset of `0..n_avail` in lexicographic order.
pub fn combinadic_unrank(rank: u64, n_avail: usize, t: usize) -> Result<Vec<usize>> {
    if t > n_avail || rank >= binomial(n_avail, t) {
        return Err(Error::RankOutOfRange { rank, n_avail, t });
    }
    let mut rest = rank;
    let mut out = Vec::with_capacity(t);
    let mut x = 0;
    for i in 0..t {
        loop {
            let block = binomial(n_avail - x - 1, t - i - 1);
            if rest < block {
                out.push(x);
                x += 1;
                break;
            }
            rest -= block;
            x += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`combinadic_unrank`]; `set` must be strictly increasing.
pub fn combinadic_rank(set: &[usize], n_avail: usize) -> Result<u64> {
    let t = set.len();
    if set.windows(2).any(|w| w[0] >= w[1]) || set.last().is_some_and(|&s| s >= n_avail) {
        return Err(Error::UnmappableIndexSet {
            order: 0,
            set: set.to_vec(),
        });
    }
    let mut rank = 0;
    let mut start = 0;
    for (i, &s) in set.iter().enumerate() {
        for x in start..s {
            rank += binomial(n_avail - x - 1, t - i - 1);
        }
        start = s + 1;
    }
    Ok(rank)
}

fn floor_log2(v: u64) -> usize {
    if v == 0 {
        0
    } else {
        63 - v.leading_zeros() as usize
    }
}

/// Block structure shared by all users: `n` positions, `t[r]` active
/// positions per hybrid order, codebook size `C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HcpiConfig {
    pub n: usize,
    pub t: Vec<usize>,
    #[serde(rename = "C")]
    pub c: usize,
}

/// Index bits `m1`, data bits `m2` per order and their total `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBudget {
    pub m1: Vec<usize>,
    pub m2: Vec<usize>,
    pub m: usize,
}

impl HcpiConfig {
    pub fn new(n: usize, t: Vec<usize>, c: usize) -> Result<Self> {
        let cfg = Self { n, t, c };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Single-order configuration (CPI-SCMA).
    pub fn cpi(n: usize, t: usize, c: usize) -> Result<Self> {
        Self::new(n, vec![t], c)
    }

    /// Plain SCMA: one always-active position.
    pub fn cscma(c: usize) -> Result<Self> {
        Self::new(1, vec![1], c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one hybrid order required".into(),
            ));
        }
        if self.t.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "every order needs t >= 1, got {:?}",
                self.t
            )));
        }
        if self.active() > self.n {
            return Err(Error::InvalidConfig(format!(
                "sum of t = {} exceeds n = {}",
                self.active(),
                self.n
            )));
        }
        if self.c < 2 || !self.c.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "codebook size {} is not a power of two >= 2",
                self.c
            )));
        }
        if self.n > 63 {
            return Err(Error::InvalidConfig("n above 63 is not supported".into()));
        }
        Ok(())
    }

    /// Hybrid order count `R`.
    pub fn orders(&self) -> usize {
        self.t.len()
    }

    /// Active positions over all orders.
    pub fn active(&self) -> usize {
        self.t.iter().sum()
    }

    /// Empty positions per block.
    pub fn vacancies(&self) -> usize {
        self.n - self.active()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.c.trailing_zeros() as usize
    }

    /// Positions still free when order `r` (1-based) is placed.
    pub fn available(&self, order: usize) -> usize {
        self.n - self.t[..order - 1].iter().sum::<usize>()
    }

    pub fn index_bits(&self, order: usize) -> usize {
        floor_log2(binomial(self.available(order), self.t[order - 1]))
    }

    pub fn data_bits(&self, order: usize) -> usize {
        self.t[order - 1] * self.bits_per_symbol()
    }

    pub fn budget(&self) -> BitBudget {
        let m1: Vec<usize> = (1..=self.orders()).map(|r| self.index_bits(r)).collect();
        let m2: Vec<usize> = (1..=self.orders()).map(|r| self.data_bits(r)).collect();
        let m = m1.iter().sum::<usize>() + m2.iter().sum::<usize>();
        BitBudget { m1, m2, m }
    }

    /// Bits per user per block.
    pub fn block_bits(&self) -> usize {
        self.budget().m
    }

    /// Offset of order `r`'s index bits inside a block's bit vector.
    pub fn bit_offset(&self, order: usize) -> usize {
        (1..order)
            .map(|r| self.index_bits(r) + self.data_bits(r))
            .sum()
    }
}

/// Validates `config` and returns its bit budget.
pub fn bit_budget(config: &HcpiConfig) -> Result<BitBudget> {
    config.validate()?;
    Ok(config.budget())
}

/// Bit pattern read MSB first.
pub fn bits_to_u64(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b & 1))
}

/// `width` bits of `value`, MSB first.
pub fn u64_to_bits(value: u64, width: usize) -> Vec<u8> {
    (0..width).rev().map(|i| ((value >> i) & 1) as u8).collect()
}

#[derive(Debug, Clone)]
enum TableRows {
    Explicit {
        rows: Vec<Vec<usize>>,
        lookup: HashMap<Vec<usize>, u64>,
    },
    Combinadic,
}

/// BTI table of one hybrid order.
#[derive(Debug, Clone)]
pub struct BtiTable {
    order: usize,
    available: usize,
    active: usize,
    index_bits: usize,
    rows: TableRows,
}

impl BtiTable {
    fn combinadic(config: &HcpiConfig, order: usize) -> Self {
        Self {
            order,
            available: config.available(order),
            active: config.t[order - 1],
            index_bits: config.index_bits(order),
            rows: TableRows::Combinadic,
        }
    }

    fn explicit(config: &HcpiConfig, order: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let available = config.available(order);
        let active = config.t[order - 1];
        let index_bits = config.index_bits(order);
        if rows.len() as u64 != 1u64 << index_bits {
            return Err(Error::InvalidMapper(format!(
                "order {order} needs {} rows, got {}",
                1u64 << index_bits,
                rows.len()
            )));
        }
        let mut lookup = HashMap::with_capacity(rows.len());
        for (p, ranks) in rows.iter().enumerate() {
            if ranks.len() != active
                || ranks.windows(2).any(|w| w[0] >= w[1])
                || ranks.iter().any(|&x| x >= available)
            {
                return Err(Error::InvalidMapper(format!(
                    "order {order} row {p}: {ranks:?} is not an increasing {active}-subset of 0..{available}"
                )));
            }
            if lookup.insert(ranks.clone(), p as u64).is_some() {
                return Err(Error::InvalidMapper(format!(
                    "order {order}: ranks {ranks:?} appear twice"
                )));
            }
        }
        Ok(Self {
            order,
            available,
            active,
            index_bits,
            rows: TableRows::Explicit { rows, lookup },
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    /// Number of rows, `2^m1`.
    pub fn len(&self) -> u64 {
        1u64 << self.index_bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Relative ranks selected by bit pattern `pattern`.
    pub fn ranks(&self, pattern: u64) -> Result<Vec<usize>> {
        if pattern >= self.len() {
            return Err(Error::BitsOutOfTable {
                order: self.order,
                pattern,
            });
        }
        match &self.rows {
            TableRows::Explicit { rows, .. } => Ok(rows[pattern as usize].clone()),
            TableRows::Combinadic => combinadic_unrank(pattern, self.available, self.active),
        }
    }

    /// Bit pattern whose row equals `ranks`, if any.
    pub fn pattern(&self, ranks: &[usize]) -> Option<u64> {
        match &self.rows {
            TableRows::Explicit { lookup, .. } => lookup.get(ranks).copied(),
            TableRows::Combinadic => {
                if ranks.len() != self.active {
                    return None;
                }
                combinadic_rank(ranks, self.available)
                    .ok()
                    .filter(|&p| p < self.len())
            }
        }
    }

    fn to_doc(&self) -> MapperTableDoc {
        MapperTableDoc {
            order: self.order,
            rows: (0..self.len())
                .map(|p| MapperRowDoc {
                    bits: u64_to_bits(p, self.index_bits),
                    ranks: self.ranks(p).expect("pattern within table"),
                })
                .collect(),
        }
    }
}

/// Serialized BTI table: rows of `bits -> relative ranks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperTableDoc {
    pub order: usize,
    pub rows: Vec<MapperRowDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperRowDoc {
    pub bits: Vec<u8>,
    pub ranks: Vec<usize>,
}

/// Where a mapper's tables came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapperSource {
    Builtin(&'static str),
    Combinadic,
    Document,
}

/// BTI tables for orders `1..=R`, shared by all users.
#[derive(Debug, Clone)]
pub struct BtiMapper {
    tables: Vec<BtiTable>,
    source: MapperSource,
}

fn table1_rows() -> Vec<Vec<usize>> {
    // bits 00 -> {1,3}, 01 -> {2,4}, 10 -> {2,3}, 11 -> {1,4} (1-based positions).
    vec![vec![0, 2], vec![1, 3], vec![1, 2], vec![0, 3]]
}

impl BtiMapper {
    /// Lexicographic combinadic tables for every order.
    pub fn combinadic(config: &HcpiConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            tables: (1..=config.orders())
                .map(|r| BtiTable::combinadic(config, r))
                .collect(),
            source: MapperSource::Combinadic,
        })
    }

    /// One of the builtin tables; `config` must match its shape.
    ///
    /// The second order of [`TABLE2_HCPI_N4`] sends bit 0 to the first vacant
    /// position and bit 1 to the last one.
    pub fn builtin(name: &str, config: &HcpiConfig) -> Result<Self> {
        config.validate()?;
        let (name, tables) = match name {
            TABLE1_N4T2 => {
                if config.n != 4 || config.t != [2] {
                    return Err(Error::InvalidMapper(format!(
                        "{TABLE1_N4T2} requires n = 4, t = [2], got n = {}, t = {:?}",
                        config.n, config.t
                    )));
                }
                (
                    TABLE1_N4T2,
                    vec![BtiTable::explicit(config, 1, table1_rows())?],
                )
            }
            TABLE2_HCPI_N4 => {
                if config.n != 4 || config.t != [2, 1] {
                    return Err(Error::InvalidMapper(format!(
                        "{TABLE2_HCPI_N4} requires n = 4, t = [2, 1], got n = {}, t = {:?}",
                        config.n, config.t
                    )));
                }
                (
                    TABLE2_HCPI_N4,
                    vec![
                        BtiTable::explicit(config, 1, table1_rows())?,
                        BtiTable::explicit(config, 2, vec![vec![0], vec![1]])?,
                    ],
                )
            }
            other => {
                return Err(Error::InvalidMapper(format!(
                    "unknown builtin table {other:?}"
                )))
            }
        };
        Ok(Self {
            tables,
            source: MapperSource::Builtin(name),
        })
    }

    /// Builtin tables when `config` matches one, combinadic otherwise.
    pub fn auto(config: &HcpiConfig) -> Result<Self> {
        match (config.n, config.t.as_slice()) {
            (4, [2]) => Self::builtin(TABLE1_N4T2, config),
            (4, [2, 1]) => Self::builtin(TABLE2_HCPI_N4, config),
            _ => Self::combinadic(config),
        }
    }

    /// Tables read from a document's `mappers` field.
    pub fn from_docs(docs: &[MapperTableDoc], config: &HcpiConfig) -> Result<Self> {
        config.validate()?;
        if docs.len() != config.orders() {
            return Err(Error::InvalidMapper(format!(
                "{} tables given for {} orders",
                docs.len(),
                config.orders()
            )));
        }
        let mut tables = Vec::with_capacity(docs.len());
        for r in 1..=config.orders() {
            let doc = docs
                .iter()
                .find(|d| d.order == r)
                .ok_or_else(|| Error::InvalidMapper(format!("no table for order {r}")))?;
            let m1 = config.index_bits(r);
            let mut rows = vec![None; 1usize << m1];
            for row in &doc.rows {
                if row.bits.len() != m1 || row.bits.iter().any(|&b| b > 1) {
                    return Err(Error::InvalidMapper(format!(
                        "order {r}: bit label {:?} is not a {m1}-bit pattern",
                        row.bits
                    )));
                }
                let p = bits_to_u64(&row.bits) as usize;
                if rows[p].replace(row.ranks.clone()).is_some() {
                    return Err(Error::InvalidMapper(format!(
                        "order {r}: bit label {:?} appears twice",
                        row.bits
                    )));
                }
            }
            let rows = rows
                .into_iter()
                .enumerate()
                .map(|(p, r_)| {
                    r_.ok_or_else(|| {
                        Error::InvalidMapper(format!(
                            "order {r}: no row for {:?}",
                            u64_to_bits(p as u64, m1)
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            tables.push(BtiTable::explicit(config, r, rows)?);
        }
        Ok(Self {
            tables,
            source: MapperSource::Document,
        })
    }

    pub fn to_docs(&self) -> Vec<MapperTableDoc> {
        self.tables.iter().map(BtiTable::to_doc).collect()
    }

    pub fn source(&self) -> &MapperSource {
        &self.source
    }

    pub fn orders(&self) -> usize {
        self.tables.len()
    }

    /// Table of order `r` (1-based).
    pub fn table(&self, order: usize) -> &BtiTable {
        &self.tables[order - 1]
    }

    /// Absolute positions selected by `bits` for `order`, given the positions
    /// already `occupied` by lower orders.
    pub fn map_bits_to_indices(
        &self,
        bits: &[u8],
        order: usize,
        occupied: &[usize],
        n: usize,
    ) -> Result<Vec<usize>> {
        let table = self.table(order);
        if bits.len() != table.index_bits {
            return Err(Error::InvalidLength {
                expected: table.index_bits,
                got: bits.len(),
            });
        }
        let free = free_positions(n, occupied);
        if free.len() != table.available {
            return Err(Error::DimensionMismatch(format!(
                "order {order} expects {} free positions, found {}",
                table.available,
                free.len()
            )));
        }
        let ranks = table.ranks(bits_to_u64(bits))?;
        Ok(ranks.into_iter().map(|x| free[x]).collect())
    }

    /// Index bits of `order` that place it at `positions` given lower-order
    /// `occupied` positions.
    pub fn indices_to_pattern(
        &self,
        positions: &[usize],
        order: usize,
        occupied: &[usize],
        n: usize,
    ) -> Result<u64> {
        let table = self.table(order);
        let free = free_positions(n, occupied);
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let ranks: Option<Vec<usize>> = sorted.iter().map(|p| free.binary_search(p).ok()).collect();
        ranks
            .and_then(|r| table.pattern(&r))
            .ok_or(Error::UnmappableIndexSet { order, set: sorted })
    }

    /// Concatenated index bits of all orders from their absolute position sets.
    pub fn demap_indices_to_bits(
        &self,
        index_sets: &[Vec<usize>],
        config: &HcpiConfig,
    ) -> Result<Vec<u8>> {
        if index_sets.len() != self.orders() {
            return Err(Error::DimensionMismatch(format!(
                "{} index sets for {} orders",
                index_sets.len(),
                self.orders()
            )));
        }
        let mut occupied = Vec::new();
        let mut bits = Vec::new();
        for (r, set) in (1..).zip(index_sets) {
            let pattern = self.indices_to_pattern(set, r, &occupied, config.n)?;
            bits.extend(u64_to_bits(pattern, self.table(r).index_bits));
            occupied.extend_from_slice(set);
            occupied.sort_unstable();
        }
        Ok(bits)
    }
}

/// Ascending positions of `0..n` not in `occupied`.
pub fn free_positions(n: usize, occupied: &[usize]) -> Vec<usize> {
    (0..n).filter(|p| !occupied.contains(p)).collect()
}

/// Content of one codeword position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Empty,
    Active { order: usize, symbol: usize },
}

/// One user's encoded block.
#[derive(Debug, Clone)]
pub struct CodewordBlock {
    pub user: usize,
    /// Per position, what was transmitted.
    pub slots: Vec<Slot>,
    /// `n*K` transmit chips, position-major.
    pub chips: Vec<Complex64>,
    /// Absolute positions of each order, ascending.
    pub index_sets: Vec<Vec<usize>>,
    pub bits: Vec<u8>,
}

impl CodewordBlock {
    /// Positions left empty.
    pub fn vacant(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&p| self.slots[p] == Slot::Empty)
            .collect()
    }

    /// Symbol indices of `order` in ascending position order.
    pub fn symbols(&self, order: usize) -> Vec<usize> {
        self.slots
            .iter()
            .filter_map(|s| match *s {
                Slot::Active { order: o, symbol } if o == order => Some(symbol),
                _ => None,
            })
            .collect()
    }
}

/// Encodes `bits` for `user`.
///
/// For each order in turn the first `m1[r]` bits pick the active positions
/// and the next `m2[r]` bits pick the symbols (MSB first, `log2 C` bits per
/// symbol) placed on those positions in ascending order.
pub fn encode_block(
    user: usize,
    bits: &[u8],
    config: &HcpiConfig,
    mapper: &BtiMapper,
    families: &[CodebookFamily],
) -> Result<CodewordBlock> {
    let budget = config.budget();
    if bits.len() != budget.m {
        return Err(Error::InvalidLength {
            expected: budget.m,
            got: bits.len(),
        });
    }
    if families.len() < config.orders()
        || families
            .iter()
            .take(config.orders())
            .enumerate()
            .any(|(i, f)| f.order() != i + 1 || f.size() != config.c)
    {
        return Err(Error::InconsistentFamilies(format!(
            "need families of orders 1..={} with C = {} sorted by order",
            config.orders(),
            config.c
        )));
    }
    if mapper.orders() != config.orders() {
        return Err(Error::InvalidMapper(format!(
            "mapper has {} orders, config {}",
            mapper.orders(),
            config.orders()
        )));
    }
    let k = families[0].graph().resources();
    let bps = config.bits_per_symbol();
    let mut slots = vec![Slot::Empty; config.n];
    let mut occupied: Vec<usize> = Vec::with_capacity(config.active());
    let mut index_sets = Vec::with_capacity(config.orders());
    let mut cursor = 0;
    for r in 1..=config.orders() {
        let m1 = budget.m1[r - 1];
        let positions =
            mapper.map_bits_to_indices(&bits[cursor..cursor + m1], r, &occupied, config.n)?;
        cursor += m1;
        for &p in &positions {
            let symbol = bits_to_u64(&bits[cursor..cursor + bps]) as usize;
            cursor += bps;
            slots[p] = Slot::Active { order: r, symbol };
        }
        occupied.extend_from_slice(&positions);
        occupied.sort_unstable();
        index_sets.push(positions);
    }
    let mut chips = vec![Complex64::new(0.0, 0.0); config.n * k];
    for (p, slot) in slots.iter().enumerate() {
        if let Slot::Active { order, symbol } = *slot {
            chips[p * k..(p + 1) * k].copy_from_slice(families[order - 1].codeword(user, symbol));
        }
    }
    Ok(CodewordBlock {
        user,
        slots,
        chips,
        index_sets,
        bits: bits.to_vec(),
    })
}

/// Bits per chip of plain SCMA: `J log2(C) / K`.
pub fn te_cscma(users: usize, resources: usize, c: usize) -> Ratio<u64> {
    Ratio::new(
        users as u64 * u64::from(c.trailing_zeros()),
        resources as u64,
    )
}

/// Bits per chip of a single-order configuration.
pub fn te_cpi(users: usize, resources: usize, n: usize, t: usize, c: usize) -> Result<Ratio<u64>> {
    te_hcpi(users, resources, &HcpiConfig::cpi(n, t, c)?)
}

/// Bits per chip of a hybrid configuration: `J m / (n K)`.
pub fn te_hcpi(users: usize, resources: usize, config: &HcpiConfig) -> Result<Ratio<u64>> {
    let m = bit_budget(config)?.m as u64;
    Ok(Ratio::new(users as u64 * m, (config.n * resources) as u64))
}
