//! Factor graphs, SCMA codebook families and the merged detection alphabet.
//!
//! A [`FactorGraph`] records which of the `K` resources (chips of one
//! detection unit) each of the `J` users occupies. A [`CodebookFamily`] holds
//! the `C` sparse codewords of every user for one hybrid order, and a
//! [`MergedAlphabet`] stacks the families of all orders plus the all-zero
//! vector into the `R*C + 1` symbol alphabet the detector runs on.
//!
//! Codebook documents are JSON. Floating point values are written with 17
//! significant digits so that a save/load round trip is bit exact.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::MapperTableDoc;

/// Tolerance on the unit-energy constraint of a codeword.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

/// Entries smaller than this (in magnitude) count as structural zeros.
const ZERO_TOLERANCE: f64 = 1e-12;

/// Bipartite resource/user occupancy structure of one detection unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    resources: usize,
    users: usize,
    occupancy: Vec<Vec<bool>>,
    xi: Vec<Vec<usize>>,
    zeta: Vec<Vec<usize>>,
}

impl FactorGraph {
    /// Builds a graph from a `K x J` 0/1 occupancy matrix.
    ///
    /// Columns must be nonempty and pairwise distinct and every resource must
    /// carry at least one user. Degrees are allowed to vary; use
    /// [`FactorGraph::is_regular`] to check the `(d_f, d_v)`-regular case.
    pub fn from_matrix(f: &[Vec<u8>]) -> Result<Self> {
        let resources = f.len();
        if resources == 0 {
            return Err(Error::InvalidGraph("no resources".into()));
        }
        let users = f[0].len();
        if users == 0 {
            return Err(Error::InvalidGraph("no users".into()));
        }
        let mut occupancy = Vec::with_capacity(resources);
        for (k, row) in f.iter().enumerate() {
            if row.len() != users {
                return Err(Error::InvalidGraph(format!(
                    "row {k} has {} entries, expected {users}",
                    row.len()
                )));
            }
            let mut bits = Vec::with_capacity(users);
            for &v in row {
                match v {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    other => {
                        return Err(Error::InvalidGraph(format!(
                            "entry {other} in row {k} is not 0/1"
                        )))
                    }
                }
            }
            occupancy.push(bits);
        }
        let xi: Vec<Vec<usize>> = occupancy
            .iter()
            .map(|row| (0..users).filter(|&j| row[j]).collect())
            .collect();
        let zeta: Vec<Vec<usize>> = (0..users)
            .map(|j| (0..resources).filter(|&k| occupancy[k][j]).collect())
            .collect();
        if let Some(k) = xi.iter().position(Vec::is_empty) {
            return Err(Error::InvalidGraph(format!("resource {k} carries no user")));
        }
        if let Some(j) = zeta.iter().position(Vec::is_empty) {
            return Err(Error::InvalidGraph(format!(
                "user {j} occupies no resource"
            )));
        }
        for a in 0..users {
            for b in a + 1..users {
                if zeta[a] == zeta[b] {
                    return Err(Error::InvalidGraph(format!(
                        "users {a} and {b} share the same occupancy pattern"
                    )));
                }
            }
        }
        Ok(Self {
            resources,
            users,
            occupancy,
            xi,
            zeta,
        })
    }

    /// Lexicographically first `(d_f, d_v)`-regular graph with `J` distinct columns.
    ///
    /// Columns are drawn from the weight-`d_v` patterns of length `K` in
    /// lexicographic order of their resource sets; the first selection whose
    /// row weights all equal `d_f` wins.
    pub fn canonical(resources: usize, users: usize, d_f: usize, d_v: usize) -> Result<Self> {
        if resources == 0 || users == 0 || d_f == 0 || d_v == 0 || d_v > resources {
            return Err(Error::InfeasibleDegrees(format!(
                "K={resources}, J={users}, d_f={d_f}, d_v={d_v}"
            )));
        }
        if resources * d_f != users * d_v {
            return Err(Error::InfeasibleDegrees(format!(
                "K*d_f = {} differs from J*d_v = {}",
                resources * d_f,
                users * d_v
            )));
        }
        let patterns: Vec<Vec<usize>> = crate::mapper::combinations(resources, d_v).collect();
        if patterns.len() < users {
            return Err(Error::InfeasibleDegrees(format!(
                "only {} distinct weight-{d_v} columns exist for K={resources}, need J={users}",
                patterns.len()
            )));
        }
        let mut chosen = Vec::with_capacity(users);
        let mut load = vec![0usize; resources];
        if !select_columns(&patterns, 0, users, d_f, &mut load, &mut chosen) {
            return Err(Error::InfeasibleDegrees(format!(
                "no selection of {users} distinct weight-{d_v} columns has row weight {d_f}"
            )));
        }
        let mut f = vec![vec![0u8; users]; resources];
        for (j, &p) in chosen.iter().enumerate() {
            for &k in &patterns[p] {
                f[k][j] = 1;
            }
        }
        Self::from_matrix(&f)
    }

    /// Resource count `K`.
    pub fn resources(&self) -> usize {
        self.resources
    }

    /// User count `J`.
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn occupied(&self, resource: usize, user: usize) -> bool {
        self.occupancy[resource][user]
    }

    /// Users attached to resource `k`, ascending.
    pub fn xi(&self, resource: usize) -> &[usize] {
        &self.xi[resource]
    }

    /// Resources occupied by user `j`, ascending.
    pub fn zeta(&self, user: usize) -> &[usize] {
        &self.zeta[user]
    }

    /// Largest resource degree (equals `d_f` on regular graphs).
    pub fn d_f(&self) -> usize {
        self.xi.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest user degree (equals `d_v` on regular graphs).
    pub fn d_v(&self) -> usize {
        self.zeta.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        let d_f = self.d_f();
        let d_v = self.d_v();
        self.xi.iter().all(|s| s.len() == d_f) && self.zeta.iter().all(|s| s.len() == d_v)
    }

    /// Occupancy as a 0/1 matrix, row per resource.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        self.occupancy
            .iter()
            .map(|row| row.iter().map(|&b| u8::from(b)).collect())
            .collect()
    }

    /// Total number of edges.
    pub fn edges(&self) -> usize {
        self.zeta.iter().map(Vec::len).sum()
    }

    /// True when the bipartite graph has no cycle.
    pub fn is_forest(&self) -> bool {
        // A graph is a forest iff edges = nodes - components.
        let nodes = self.resources + self.users;
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (j, res) in self.zeta.iter().enumerate() {
            for &k in res {
                let a = find(&mut parent, k);
                let b = find(&mut parent, self.resources + j);
                if a == b {
                    return false;
                }
                parent[a] = b;
            }
        }
        true
    }
}

fn select_columns(
    patterns: &[Vec<usize>],
    start: usize,
    remaining: usize,
    d_f: usize,
    load: &mut [usize],
    chosen: &mut Vec<usize>,
) -> bool {
    if remaining == 0 {
        return load.iter().all(|&l| l == d_f);
    }
    for p in start..patterns.len() {
        if patterns.len() - p < remaining {
            break;
        }
        if patterns[p].iter().any(|&k| load[k] == d_f) {
            continue;
        }
        for &k in &patterns[p] {
            load[k] += 1;
        }
        chosen.push(p);
        if select_columns(patterns, p + 1, remaining - 1, d_f, load, chosen) {
            return true;
        }
        chosen.pop();
        for &k in &patterns[p] {
            load[k] -= 1;
        }
    }
    false
}

/// The `C` codewords of every user for one hybrid order.
#[derive(Debug, Clone)]
pub struct CodebookFamily {
    order: usize,
    size: usize,
    graph: Arc<FactorGraph>,
    codewords: Vec<Vec<Vec<Complex64>>>,
}

impl CodebookFamily {
    /// Validates and wraps `codewords[user][symbol][resource]`.
    pub fn new(
        order: usize,
        graph: Arc<FactorGraph>,
        codewords: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InconsistentFamilies("orders start at 1".into()));
        }
        if codewords.len() != graph.users() {
            return Err(Error::DimensionMismatch(format!(
                "{} users in codebook, {} in graph",
                codewords.len(),
                graph.users()
            )));
        }
        let size = codewords[0].len();
        if size < 2 {
            return Err(Error::InconsistentFamilies(format!(
                "codebook size {size} must be at least 2"
            )));
        }
        for (j, user) in codewords.iter().enumerate() {
            if user.len() != size {
                return Err(Error::DimensionMismatch(format!(
                    "user {j} has {} codewords, expected {size}",
                    user.len()
                )));
            }
            for (c, word) in user.iter().enumerate() {
                if word.len() != graph.resources() {
                    return Err(Error::DimensionMismatch(format!(
                        "user {j} symbol {c} has length {}, expected K = {}",
                        word.len(),
                        graph.resources()
                    )));
                }
                if word.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return Err(Error::Parse(format!("user {j} symbol {c} is not finite")));
                }
                for (k, v) in word.iter().enumerate() {
                    if !graph.occupied(k, j) && v.norm() > ZERO_TOLERANCE {
                        return Err(Error::SparsityMismatch {
                            user: j,
                            symbol: c,
                            resource: k,
                        });
                    }
                }
                let energy = energy(word);
                if (energy - 1.0).abs() > ENERGY_TOLERANCE {
                    return Err(Error::PowerViolation {
                        user: j,
                        symbol: c,
                        energy,
                    });
                }
            }
            for a in 0..size {
                for b in a + 1..size {
                    if distance_sq(&user[a], &user[b]) < ZERO_TOLERANCE {
                        return Err(Error::DuplicateCodeword {
                            order,
                            user: j,
                            first: a,
                            second: b,
                        });
                    }
                }
            }
        }
        Ok(Self {
            order,
            size,
            graph,
            codewords,
        })
    }

    /// Deterministic rotated-PSK family used when no codebook file is given.
    ///
    /// User `j` places a `C`-PSK point on each of its `d_v` resources with
    /// amplitude `1/sqrt(d_v)`. On its `l`-th resource the symbol index is
    /// multiplied by `2l+1`, so two distinct symbols differ on every occupied
    /// resource. Order `r` shifts the `l`-th dimension by
    /// `(2l+1) * (2*pi/C) * v(r)` where `v` is the base-2 van der Corput
    /// sequence (`v(1)=0`, `v(2)=1/2`, ...), and the `u`-th user of a resource
    /// is rotated by `u * (pi/(C*d_f) + rotation_seed)`.
    pub fn generate_phase_rotation(
        graph: Arc<FactorGraph>,
        size: usize,
        order: usize,
        rotation_seed: f64,
    ) -> Result<Self> {
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "codebook size {size} is not a power of two >= 2"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidConfig("orders start at 1".into()));
        }
        let step = 2.0 * PI / size as f64;
        let order_shift = step * van_der_corput(order - 1);
        let mut codewords = Vec::with_capacity(graph.users());
        for j in 0..graph.users() {
            let dims = graph.zeta(j);
            let amp = 1.0 / (dims.len() as f64).sqrt();
            let mut user = Vec::with_capacity(size);
            for c in 0..size {
                let mut word = vec![Complex64::new(0.0, 0.0); graph.resources()];
                for (l, &k) in dims.iter().enumerate() {
                    let mult = (2 * l + 1) % size;
                    let slot = graph.xi(k).iter().position(|&u| u == j).unwrap();
                    let d_f = graph.xi(k).len() as f64;
                    let user_rot = slot as f64 * (PI / (size as f64 * d_f) + rotation_seed);
                    let phase = step * ((mult * c) % size) as f64
                        + (2 * l + 1) as f64 * order_shift
                        + user_rot;
                    word[k] = Complex64::from_polar(amp, phase);
                }
                user.push(word);
            }
            codewords.push(user);
        }
        Self::new(order, graph, codewords)
    }

    /// Hybrid order `r` (1-based).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Codebook size `C`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn graph(&self) -> &Arc<FactorGraph> {
        &self.graph
    }

    /// Codeword of `user` for `symbol`, length `K`.
    pub fn codeword(&self, user: usize, symbol: usize) -> &[Complex64] {
        &self.codewords[user][symbol]
    }

    pub fn codewords(&self) -> &[Vec<Vec<Complex64>>] {
        &self.codewords
    }
}

fn van_der_corput(mut i: usize) -> f64 {
    let mut v = 0.0;
    let mut denom = 1.0;
    while i > 0 {
        denom *= 2.0;
        v += (i & 1) as f64 / denom;
        i >>= 1;
    }
    v
}

fn energy(word: &[Complex64]) -> f64 {
    word.iter().map(Complex64::norm_sqr).sum()
}

fn distance_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Where a merged-alphabet column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergedSymbol {
    /// Symbol `symbol` (0-based) of the order-`order` codebook.
    Coded { order: usize, symbol: usize },
    /// The all-zero vector of an empty position.
    Zero,
}

/// Per-user alphabet the message-passing detector runs over.
///
/// Columns are ordered order 1 symbols `0..C`, order 2 symbols, ..., and the
/// zero vector last, so column `(r-1)*C + c` is symbol `c` of order `r`.
#[derive(Debug, Clone)]
pub struct MergedAlphabet {
    graph: Arc<FactorGraph>,
    size: usize,
    orders: usize,
    has_zero: bool,
    provenance: Vec<MergedSymbol>,
    symbols: Vec<Vec<Vec<Complex64>>>,
}

impl MergedAlphabet {
    /// Merges families of orders `1..=R` and appends the zero symbol.
    pub fn build(families: &[CodebookFamily]) -> Result<Self> {
        Self::assemble(families, true)
    }

    /// Alphabet of a plain SCMA system: the order-1 codebook, no zero symbol.
    pub fn plain(family: &CodebookFamily) -> Result<Self> {
        Self::assemble(std::slice::from_ref(family), false)
    }

    fn assemble(families: &[CodebookFamily], has_zero: bool) -> Result<Self> {
        let (graph, size) = check_families(families)?;
        let mut sorted: Vec<&CodebookFamily> = families.iter().collect();
        sorted.sort_by_key(|f| f.order());
        let orders = sorted.len();
        let mut provenance = Vec::with_capacity(orders * size + 1);
        for f in &sorted {
            for c in 0..size {
                provenance.push(MergedSymbol::Coded {
                    order: f.order(),
                    symbol: c,
                });
            }
        }
        if has_zero {
            provenance.push(MergedSymbol::Zero);
        }
        let zero = vec![Complex64::new(0.0, 0.0); graph.resources()];
        let symbols = (0..graph.users())
            .map(|j| {
                let mut list: Vec<Vec<Complex64>> = sorted
                    .iter()
                    .flat_map(|f| f.codewords[j].iter().cloned())
                    .collect();
                if has_zero {
                    list.push(zero.clone());
                }
                list
            })
            .collect();
        Ok(Self {
            graph,
            size,
            orders,
            has_zero,
            provenance,
            symbols,
        })
    }

    /// Number of symbols per user (`R*C + 1`, or `C` for [`MergedAlphabet::plain`]).
    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn graph(&self) -> &Arc<FactorGraph> {
        &self.graph
    }

    /// Codebook size `C`.
    pub fn codebook_size(&self) -> usize {
        self.size
    }

    /// Hybrid order count `R`.
    pub fn orders(&self) -> usize {
        self.orders
    }

    /// Column of the zero symbol, if present.
    pub fn zero_index(&self) -> Option<usize> {
        self.has_zero.then(|| self.len() - 1)
    }

    /// Columns belonging to order `r` (1-based).
    pub fn order_block(&self, order: usize) -> Range<usize> {
        (order - 1) * self.size..order * self.size
    }

    /// Column of symbol `symbol` of order `order`.
    pub fn column(&self, order: usize, symbol: usize) -> usize {
        (order - 1) * self.size + symbol
    }

    pub fn provenance(&self, q: usize) -> MergedSymbol {
        self.provenance[q]
    }

    /// Full `K`-dimensional vector of `user`'s column `q`.
    pub fn symbol(&self, user: usize, q: usize) -> &[Complex64] {
        &self.symbols[user][q]
    }

    /// Entry of `user`'s column `q` on `resource`.
    #[inline]
    pub fn value(&self, user: usize, q: usize, resource: usize) -> Complex64 {
        self.symbols[user][q][resource]
    }
}

fn check_families(families: &[CodebookFamily]) -> Result<(Arc<FactorGraph>, usize)> {
    let first = families
        .first()
        .ok_or_else(|| Error::InconsistentFamilies("no families given".into()))?;
    let graph = first.graph.clone();
    let size = first.size;
    let mut seen = vec![false; families.len()];
    for f in families {
        if f.size != size {
            return Err(Error::InconsistentFamilies(format!(
                "codebook sizes {} and {size} differ",
                f.size
            )));
        }
        if *f.graph != *graph {
            return Err(Error::InconsistentFamilies(
                "families use different factor graphs".into(),
            ));
        }
        if f.order > families.len() {
            return Err(Error::InconsistentFamilies(format!(
                "order {} present but only {} families given",
                f.order,
                families.len()
            )));
        }
        if std::mem::replace(&mut seen[f.order - 1], true) {
            return Err(Error::InconsistentFamilies(format!(
                "order {} given twice",
                f.order
            )));
        }
    }
    Ok((graph, size))
}

/// Minimum pairwise distances among the merged symbols of each user.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    pub per_user: Vec<f64>,
    pub global: f64,
}

/// Smallest Euclidean distance between distinct columns of the merged
/// alphabet (zero symbol included), per user and overall.
pub fn cross_codebook_min_distance(families: &[CodebookFamily]) -> Result<DistanceTable> {
    let alphabet = MergedAlphabet::build(families)?;
    let per_user: Vec<f64> = (0..alphabet.graph.users())
        .map(|j| {
            let syms = &alphabet.symbols[j];
            let mut best = f64::INFINITY;
            for a in 0..syms.len() {
                for b in a + 1..syms.len() {
                    best = best.min(distance_sq(&syms[a], &syms[b]).sqrt());
                }
            }
            best
        })
        .collect();
    let global = per_user.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DistanceTable { per_user, global })
}

/// Serialized form of a codebook document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodebookDocument {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "C")]
    pub c: usize,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "F")]
    pub f: Vec<Vec<u8>>,
    pub families: Vec<FamilyDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mappers: Vec<MapperTableDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub order: usize,
    /// `codewords[user][symbol][resource] = [re, im]`.
    pub codewords: Vec<Vec<Vec<[f64; 2]>>>,
}

impl CodebookDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validates the document and returns its families sorted by order.
    pub fn families(&self) -> Result<Vec<CodebookFamily>> {
        if self.f.len() != self.k || self.f.iter().any(|row| row.len() != self.j) {
            return Err(Error::DimensionMismatch(format!(
                "F must be {}x{}",
                self.k, self.j
            )));
        }
        let graph = Arc::new(FactorGraph::from_matrix(&self.f)?);
        if self.families.len() != self.r {
            return Err(Error::InconsistentFamilies(format!(
                "R = {} but {} families present",
                self.r,
                self.families.len()
            )));
        }
        let mut out = Vec::with_capacity(self.r);
        for fam in &self.families {
            let codewords = fam
                .codewords
                .iter()
                .map(|user| {
                    user.iter()
                        .map(|word| {
                            word.iter()
                                .map(|&[re, im]| Complex64::new(re, im))
                                .collect()
                        })
                        .collect()
                })
                .collect();
            let family = CodebookFamily::new(fam.order, graph.clone(), codewords)?;
            if family.size() != self.c {
                return Err(Error::InconsistentFamilies(format!(
                    "order {} has {} symbols, C = {}",
                    fam.order,
                    family.size(),
                    self.c
                )));
            }
            out.push(family);
        }
        check_families(&out)?;
        out.sort_by_key(CodebookFamily::order);
        Ok(out)
    }

    pub fn from_families(families: &[CodebookFamily]) -> Result<Self> {
        let (graph, size) = check_families(families)?;
        let mut sorted: Vec<&CodebookFamily> = families.iter().collect();
        sorted.sort_by_key(|f| f.order());
        Ok(Self {
            k: graph.resources(),
            j: graph.users(),
            c: size,
            r: families.len(),
            f: graph.matrix(),
            families: sorted
                .into_iter()
                .map(|f| FamilyDoc {
                    order: f.order(),
                    codewords: f
                        .codewords
                        .iter()
                        .map(|user| {
                            user.iter()
                                .map(|w| w.iter().map(|v| [v.re, v.im]).collect())
                                .collect()
                        })
                        .collect(),
                })
                .collect(),
            mappers: Vec::new(),
        })
    }

    /// JSON text with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits);
        self.serialize(&mut ser)
            .expect("serializing to memory cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json emits UTF-8")
    }
}

/// Parses and validates a codebook document.
pub fn load_codebook_family(text: &str) -> Result<Vec<CodebookFamily>> {
    CodebookDocument::parse(text)?.families()
}

/// Serializes families into a codebook document.
pub fn save_codebook_family(families: &[CodebookFamily]) -> Result<String> {
    Ok(CodebookDocument::from_families(families)?.to_json())
}

struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}
