//! Probability-domain message passing over one detection unit.
//!
//! Function-node updates evaluate every joint hypothesis of the users on a
//! resource. Distances are turned into weights in the log domain: the
//! largest metric is subtracted before exponentiation, so the best
//! hypothesis always has weight one and `exp` cannot underflow the whole
//! sum at high SNR. The `1/(pi N0)` factor is dropped; normalization
//! removes it. If a product of weights and incoming beliefs still collapses
//! below [`UNDERFLOW_GUARD`], that output is recomputed entirely in the log
//! domain.

use num_complex::Complex64;

use super::{SoftMessageMatrix, UnitObservation};
use crate::codebook::MergedAlphabet;

/// Floor applied to every normalized message entry.
pub const MIN_PROBABILITY: f64 = 1e-300;

/// Unnormalized sums below this trigger the log-domain path.
pub const UNDERFLOW_GUARD: f64 = 1e-250;

/// Work counters, accumulated over the lifetime of a workspace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MpaStats {
    /// Function-node updates performed.
    pub fn_updates: u64,
    /// Joint hypotheses combined by those updates.
    pub fn_hypotheses: u64,
    /// Squared-distance metrics computed.
    pub metric_evaluations: u64,
    /// Outputs that needed the log-domain path.
    pub log_fallbacks: u64,
}

/// Fills `out` with `-|y - sum_u v[u][q_u]|^2 / n0` for every joint hypothesis,
/// first slot most significant.
fn fill_metrics(values: &[Vec<Complex64>], partial: Complex64, inv_n0: f64, out: &mut Vec<f64>) {
    match values {
        [] => out.push(-partial.norm_sqr() * inv_n0),
        [last] => out.extend(last.iter().map(|v| -(partial - v).norm_sqr() * inv_n0)),
        [first, rest @ ..] => {
            for v in first {
                fill_metrics(rest, partial - v, inv_n0, out);
            }
        }
    }
}

/// Advances a mixed-radix counter with equal radix `q`, last digit fastest.
#[inline]
fn step(digits: &mut [usize], q: usize) {
    let mut u = digits.len();
    while u > 0 {
        u -= 1;
        digits[u] += 1;
        if digits[u] < q {
            return;
        }
        digits[u] = 0;
    }
}

/// Combines hypothesis weights with incoming beliefs into one outgoing
/// message per slot and normalizes them. `out` holds `d` rows of `q`.
///
/// Weights are walked in runs of `q` that share every digit but the last.
fn combine(
    metrics: &[f64],
    weights: &[f64],
    incoming: &[&[f64]],
    q: usize,
    out: &mut [f64],
    stats: &mut MpaStats,
) {
    let d = incoming.len();
    out.fill(0.0);
    let head = d - 1;
    let (rows, last_row) = out.split_at_mut(head * q);
    let last_in = incoming[head];
    let mut digits = vec![0usize; head];
    let mut prefix = vec![1.0f64; head + 1];
    for run in weights.chunks_exact(q) {
        for v in 0..head {
            prefix[v + 1] = prefix[v] * incoming[v][digits[v]];
        }
        let pre = prefix[head];
        let mut s = 0.0;
        for ((o, &w), &p) in last_row.iter_mut().zip(run).zip(last_in) {
            *o += w * pre;
            s += w * p;
        }
        if s != 0.0 {
            let mut suffix = s;
            for u in (0..head).rev() {
                rows[u * q + digits[u]] += prefix[u] * suffix;
                suffix *= incoming[u][digits[u]];
            }
        }
        step(&mut digits, q);
    }
    stats.fn_updates += 1;
    stats.fn_hypotheses += weights.len() as u64;
    for u in 0..d {
        let row = &mut out[u * q..(u + 1) * q];
        let sum: f64 = row.iter().sum();
        if sum > UNDERFLOW_GUARD && sum.is_finite() {
            normalize_with_floor(row, sum);
        } else {
            stats.log_fallbacks += 1;
            combine_log(metrics, incoming, u, q, row);
        }
    }
}

/// Log-domain recomputation of slot `u`'s outgoing message.
fn combine_log(metrics: &[f64], incoming: &[&[f64]], u: usize, q: usize, row: &mut [f64]) {
    let d = incoming.len();
    let logs: Vec<Vec<f64>> = incoming
        .iter()
        .map(|m| m.iter().map(|p| p.ln()).collect())
        .collect();
    let score = |digits: &[usize], metric: f64| -> f64 {
        metric
            + (0..d)
                .filter(|&v| v != u)
                .map(|v| logs[v][digits[v]])
                .sum::<f64>()
    };
    let mut best = vec![f64::NEG_INFINITY; q];
    let mut digits = vec![0usize; d];
    for &m in metrics {
        let s = score(&digits, m);
        let slot = &mut best[digits[u]];
        if s > *slot {
            *slot = s;
        }
        step(&mut digits, q);
    }
    let top = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    row.fill(0.0);
    digits.fill(0);
    for &m in metrics {
        row[digits[u]] += (score(&digits, m) - top).exp();
        step(&mut digits, q);
    }
    let sum: f64 = row.iter().sum();
    normalize_with_floor(row, sum);
}

fn normalize_with_floor(row: &mut [f64], sum: f64) {
    let inv = 1.0 / sum;
    for p in row.iter_mut() {
        *p = (*p * inv).max(MIN_PROBABILITY);
    }
}

/// Elementwise product of `inputs`, normalized into `out`. An empty input
/// list yields the uniform vector.
fn product_normalize(inputs: &[&[f64]], out: &mut [f64], stats: &mut MpaStats) {
    out.fill(1.0);
    for m in inputs {
        for (o, p) in out.iter_mut().zip(m.iter()) {
            *o *= p;
        }
    }
    let sum: f64 = out.iter().sum();
    if sum > UNDERFLOW_GUARD && sum.is_finite() {
        normalize_with_floor(out, sum);
        return;
    }
    stats.log_fallbacks += 1;
    out.fill(0.0);
    for m in inputs {
        for (o, p) in out.iter_mut().zip(m.iter()) {
            *o += p.ln();
        }
    }
    let top = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for o in out.iter_mut() {
        *o = (*o - top).exp();
    }
    let sum: f64 = out.iter().sum();
    normalize_with_floor(out, sum);
}

fn weights_from_metrics(metrics: &[f64], weights: &mut Vec<f64>) {
    let top = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    weights.clear();
    weights.extend(metrics.iter().map(|m| (m - top).exp()));
}

/// One function-node update at `resource`.
///
/// `gains[u]` is the channel gain of the `u`-th neighbour user of the
/// resource and `incoming[u]` its current user-to-resource message. Returns
/// one normalized outgoing message per neighbour.
pub fn fn_update(
    resource: usize,
    y: Complex64,
    gains: &[Complex64],
    n0: f64,
    alphabet: &MergedAlphabet,
    incoming: &[&[f64]],
) -> Vec<Vec<f64>> {
    let users = alphabet.graph().xi(resource);
    assert_eq!(gains.len(), users.len());
    assert_eq!(incoming.len(), users.len());
    let q = alphabet.len();
    let values: Vec<Vec<Complex64>> = users
        .iter()
        .zip(gains)
        .map(|(&j, &h)| (0..q).map(|s| h * alphabet.value(j, s, resource)).collect())
        .collect();
    let mut metrics = Vec::with_capacity(q.pow(users.len() as u32));
    fill_metrics(&values, y, 1.0 / n0, &mut metrics);
    let mut weights = Vec::new();
    weights_from_metrics(&metrics, &mut weights);
    let mut out = vec![0.0; users.len() * q];
    let mut stats = MpaStats::default();
    combine(&metrics, &weights, incoming, q, &mut out, &mut stats);
    out.chunks(q).map(<[f64]>::to_vec).collect()
}

/// Reusable buffers and graph bookkeeping for [`mc_mpa`].
///
/// Edges are numbered resource by resource in the order of `xi(k)`.
#[derive(Debug, Clone)]
pub struct MpaWorkspace {
    symbols: usize,
    edge_start: Vec<usize>,
    user_edges: Vec<Vec<usize>>,
    metrics: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    values: Vec<Vec<Complex64>>,
    fn_to_un: Vec<f64>,
    un_to_fn: Vec<f64>,
    scratch: Vec<f64>,
    stats: MpaStats,
}

impl MpaWorkspace {
    pub fn new(alphabet: &MergedAlphabet) -> Self {
        let graph = alphabet.graph();
        let q = alphabet.len();
        let mut edge_start = Vec::with_capacity(graph.resources() + 1);
        let mut user_edges = vec![Vec::new(); graph.users()];
        let mut e = 0;
        for k in 0..graph.resources() {
            edge_start.push(e);
            for &j in graph.xi(k) {
                user_edges[j].push(e);
                e += 1;
            }
        }
        edge_start.push(e);
        Self {
            symbols: q,
            edge_start,
            user_edges,
            metrics: vec![Vec::new(); graph.resources()],
            weights: vec![Vec::new(); graph.resources()],
            values: Vec::new(),
            fn_to_un: vec![0.0; e * q],
            un_to_fn: vec![0.0; e * q],
            scratch: vec![0.0; q],
            stats: MpaStats::default(),
        }
    }

    pub fn stats(&self) -> MpaStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = MpaStats::default();
    }

    /// Runs `iterations` rounds of function-node then user-node updates and
    /// returns the final beliefs of unit `unit`.
    pub fn run(
        &mut self,
        unit: usize,
        obs: &UnitObservation<'_>,
        n0: f64,
        alphabet: &MergedAlphabet,
        iterations: usize,
    ) -> SoftMessageMatrix {
        let graph = alphabet.graph();
        let q = self.symbols;
        assert_eq!(alphabet.len(), q, "workspace built for another alphabet");
        assert!(n0 > 0.0, "message passing needs N0 > 0");
        let inv_n0 = 1.0 / n0;

        for k in 0..graph.resources() {
            self.values.clear();
            for &j in graph.xi(k) {
                let h = obs.gain(j, k);
                self.values
                    .push((0..q).map(|s| h * alphabet.value(j, s, k)).collect());
            }
            let metrics = &mut self.metrics[k];
            metrics.clear();
            fill_metrics(&self.values, obs.y[k], inv_n0, metrics);
            self.stats.metric_evaluations += metrics.len() as u64;
            weights_from_metrics(metrics, &mut self.weights[k]);
        }

        self.un_to_fn.fill(1.0 / q as f64);
        for _ in 0..iterations.max(1) {
            for k in 0..graph.resources() {
                let (a, b) = (self.edge_start[k], self.edge_start[k + 1]);
                let incoming: Vec<&[f64]> =
                    (a..b).map(|e| &self.un_to_fn[e * q..(e + 1) * q]).collect();
                combine(
                    &self.metrics[k],
                    &self.weights[k],
                    &incoming,
                    q,
                    &mut self.fn_to_un[a * q..b * q],
                    &mut self.stats,
                );
            }
            for edges in &self.user_edges {
                for (l, &e) in edges.iter().enumerate() {
                    let others: Vec<&[f64]> = edges
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != l)
                        .map(|(_, &f)| &self.fn_to_un[f * q..(f + 1) * q])
                        .collect();
                    product_normalize(&others, &mut self.scratch, &mut self.stats);
                    self.un_to_fn[e * q..(e + 1) * q].copy_from_slice(&self.scratch);
                }
            }
        }

        let mut probs = vec![0.0; graph.users() * q];
        for (j, edges) in self.user_edges.iter().enumerate() {
            let all: Vec<&[f64]> = edges
                .iter()
                .map(|&f| &self.fn_to_un[f * q..(f + 1) * q])
                .collect();
            product_normalize(&all, &mut probs[j * q..(j + 1) * q], &mut self.stats);
        }
        SoftMessageMatrix::from_flat(unit, q, probs)
    }

    /// Current resource-to-user message on the edge between `resource` and `user`.
    pub fn fn_to_un(&self, resource: usize, user: usize) -> Option<&[f64]> {
        let q = self.symbols;
        self.user_edges[user]
            .iter()
            .find(|&&e| e >= self.edge_start[resource] && e < self.edge_start[resource + 1])
            .map(|&e| &self.fn_to_un[e * q..(e + 1) * q])
    }

    /// Current user-to-resource message on the edge between `user` and `resource`.
    pub fn un_to_fn(&self, user: usize, resource: usize) -> Option<&[f64]> {
        let q = self.symbols;
        self.user_edges[user]
            .iter()
            .find(|&&e| e >= self.edge_start[resource] && e < self.edge_start[resource + 1])
            .map(|&e| &self.un_to_fn[e * q..(e + 1) * q])
    }
}

/// Merging-codebook message passing over one detection unit.
pub fn mc_mpa(
    unit: usize,
    obs: &UnitObservation<'_>,
    n0: f64,
    alphabet: &MergedAlphabet,
    iterations: usize,
) -> SoftMessageMatrix {
    MpaWorkspace::new(alphabet).run(unit, obs, n0, alphabet, iterations)
}
