//! Monte Carlo BER/BLER sweeps.
//!
//! Every trial is a pure function of `(seed, snr index, trial index)`.
//! Trials are evaluated in parallel batches and then folded in trial order,
//! stopping at the first trial whose cumulative bit errors reach the target,
//! so results do not depend on the worker count or batch size.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{sample_channel, snr_to_n0, superpose, trial_rng, FadingModel};
use crate::detector::{exact_unit_block, mpad_block, BlockDecision, MpaWorkspace};
use crate::error::{Error, Result};
use crate::mapper::{encode_block, CodewordBlock};

mod config;
mod report;

pub use config::{
    BlockLayout, CodebookSource, DetectorKind, MapperChoice, Scheme, SimSystem, SweepConfig,
    SystemConfig,
};
pub use report::{emit_bound_csv, emit_csv, parse_csv, BoundRow, BOUND_HEADER, CSV_HEADER};

/// Environment variable read by [`default_workers`].
pub const WORKERS_ENV: &str = "SCMA_WORKERS";

/// Trials evaluated per worker between stop checks.
const BATCH_PER_WORKER: u64 = 16;

/// Worker count from `SCMA_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
}

/// Counters of one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Erroneous user blocks.
    pub block_errors: u64,
    /// `block_errors / (trials * J)`.
    pub bler: f64,
    /// User blocks with a wrong vacancy set.
    pub vac_errors: u64,
    /// User blocks with a wrong index set, per order.
    pub idx_errors: Vec<u64>,
    /// User blocks with all index sets right but a wrong symbol.
    pub data_errors: u64,
}

/// Outcome of a whole sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub n: usize,
    pub t: Vec<usize>,
    pub seed: u64,
    pub iters: usize,
    pub points: Vec<SweepPoint>,
    /// Wall time per point; not part of the CSV.
    pub wall_times: Vec<Duration>,
}

/// Error counts of one trial (one block per user).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub block_errors: u64,
    pub vac_errors: u64,
    pub idx_errors: Vec<u64>,
    pub data_errors: u64,
}

/// Compares one block decision with what was sent.
pub fn score_block(
    sent: &[CodewordBlock],
    decision: &BlockDecision,
    orders: usize,
) -> TrialOutcome {
    let mut out = TrialOutcome {
        idx_errors: vec![0; orders],
        ..TrialOutcome::default()
    };
    for (b, d) in sent.iter().zip(&decision.users) {
        let bit_errors = b.bits.iter().zip(&d.bits).filter(|(x, y)| x != y).count() as u64;
        let vac = d.vacant != b.vacant();
        let mut idx_ok = true;
        for r in 0..orders {
            if d.index_sets.get(r) != Some(&b.index_sets[r]) {
                out.idx_errors[r] += 1;
                idx_ok = false;
            }
        }
        let data = idx_ok && (0..orders).any(|r| d.symbols[r] != b.symbols(r + 1));
        out.bit_errors += bit_errors;
        out.vac_errors += u64::from(vac);
        out.data_errors += u64::from(data);
        out.block_errors += u64::from(bit_errors > 0 || d.failed() || vac || !idx_ok || data);
    }
    out
}

/// Runs trial `trial` of SNR point `snr_index` at noise level `n0`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_trial(
    sys: &SimSystem,
    n0: f64,
    fading: FadingModel,
    detector: DetectorKind,
    iters: usize,
    seed: u64,
    snr_index: usize,
    trial: u64,
    workspace: &mut MpaWorkspace,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, snr_index, trial);
    let m = sys.config.block_bits();
    let users = sys.users();
    let k = sys.resources();
    let blocks = (0..users)
        .map(|j| {
            let bits: Vec<u8> = (0..m).map(|_| rng.random_range(0..2u8)).collect();
            encode_block(j, &bits, &sys.config, &sys.mapper, &sys.families)
        })
        .collect::<Result<Vec<_>>>()?;
    let channel = sample_channel(users, sys.config.n * k, k, fading, &mut rng);
    let y = superpose(&blocks, &channel, n0, &mut rng)?;
    let decision = match detector {
        DetectorKind::Mpa => mpad_block(
            &y,
            &channel.gains,
            n0,
            &sys.config,
            &sys.mapper,
            &sys.alphabet,
            iters,
            workspace,
        ),
        DetectorKind::ExactUnit => exact_unit_block(
            &y,
            &channel.gains,
            n0,
            &sys.config,
            &sys.mapper,
            &sys.alphabet,
        )?,
    };
    Ok(score_block(&blocks, &decision, sys.config.orders()))
}

/// Runs the sweep on `workers` threads.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepResult> {
    let sys = SimSystem::build(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let orders = sys.config.orders();
    let users = sys.users() as u64;
    let m = sys.config.block_bits() as u64;
    let batch = BATCH_PER_WORKER * workers.max(1) as u64;
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    let mut wall_times = Vec::with_capacity(cfg.snr_db.len());

    for (si, &snr) in cfg.snr_db.iter().enumerate() {
        let start = Instant::now();
        let n0 = snr_to_n0(snr, &sys.config).n0;
        let mut total = TrialOutcome {
            idx_errors: vec![0; orders],
            ..TrialOutcome::default()
        };
        let mut trials = 0u64;
        'batches: while trials < cfg.max_trials {
            let end = (trials + batch).min(cfg.max_trials);
            let outcomes = pool.install(|| {
                (trials..end)
                    .into_par_iter()
                    .map_init(
                        || MpaWorkspace::new(&sys.alphabet),
                        |ws, t| {
                            simulate_trial(
                                &sys,
                                n0,
                                cfg.fading,
                                cfg.detector,
                                cfg.iters,
                                cfg.seed,
                                si,
                                t,
                                ws,
                            )
                        },
                    )
                    .collect::<Result<Vec<_>>>()
            })?;
            for o in outcomes {
                total.bit_errors += o.bit_errors;
                total.block_errors += o.block_errors;
                total.vac_errors += o.vac_errors;
                total.data_errors += o.data_errors;
                for (a, b) in total.idx_errors.iter_mut().zip(&o.idx_errors) {
                    *a += b;
                }
                trials += 1;
                if total.bit_errors >= cfg.target_bit_errors {
                    break 'batches;
                }
            }
        }
        let bits = trials * users * m;
        points.push(SweepPoint {
            snr_db: snr,
            trials,
            bits,
            bit_errors: total.bit_errors,
            ber: total.bit_errors as f64 / bits as f64,
            block_errors: total.block_errors,
            bler: total.block_errors as f64 / (trials * users) as f64,
            vac_errors: total.vac_errors,
            idx_errors: total.idx_errors,
            data_errors: total.data_errors,
        });
        wall_times.push(start.elapsed());
    }
    Ok(SweepResult {
        scheme: cfg.scheme,
        n: sys.config.n,
        t: sys.config.t.clone(),
        seed: cfg.seed,
        iters: cfg.iters,
        points,
        wall_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scheme: Scheme) -> SweepConfig {
        let mut cfg = SweepConfig::new(scheme, vec![0.0, 8.0]);
        cfg.max_trials = 60;
        cfg.target_bit_errors = 40;
        cfg.seed = 17;
        cfg
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small(Scheme::Hcpi);
        let a = run_sweep(&cfg, 1).unwrap();
        let b = run_sweep(&cfg, 3).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn early_stop_counts_trials_exactly() {
        let cfg = small(Scheme::Hcpi);
        let res = run_sweep(&cfg, 2).unwrap();
        let p = &res.points[0];
        assert!(p.trials < cfg.max_trials);
        assert!(p.bit_errors >= cfg.target_bit_errors);
        // Replaying the counted trials alone reproduces the totals, and the
        // last one is the first to reach the target.
        let sys = SimSystem::build(&cfg).unwrap();
        let n0 = snr_to_n0(0.0, &sys.config).n0;
        let mut ws = MpaWorkspace::new(&sys.alphabet);
        let mut errs = 0;
        for t in 0..p.trials {
            let o = simulate_trial(
                &sys,
                n0,
                cfg.fading,
                cfg.detector,
                cfg.iters,
                cfg.seed,
                0,
                t,
                &mut ws,
            )
            .unwrap();
            assert!(errs < cfg.target_bit_errors);
            errs += o.bit_errors;
        }
        assert_eq!(errs, p.bit_errors);
        assert_eq!(p.bits, p.trials * 6 * 9);
    }

    #[test]
    fn stage_errors_never_exceed_block_errors() {
        for scheme in [Scheme::Cscma, Scheme::Cpi, Scheme::Hcpi] {
            let mut cfg = small(scheme);
            if scheme == Scheme::Cpi {
                cfg.hcpi = BlockLayout { n: 4, t: vec![2] };
            }
            let res = run_sweep(&cfg, 1).unwrap();
            for p in &res.points {
                let worst = p
                    .idx_errors
                    .iter()
                    .copied()
                    .chain([p.vac_errors, p.data_errors])
                    .max()
                    .unwrap();
                assert!(p.block_errors >= worst, "{p:?}");
                assert!(p.block_errors <= p.trials * 6);
                assert!(p.bit_errors <= p.bits);
            }
        }
    }

    #[test]
    fn noiseless_identity_channel_is_error_free() {
        let mut cfg = SweepConfig::new(Scheme::Hcpi, vec![40.0]);
        cfg.fading = FadingModel::None;
        cfg.max_trials = 50;
        let res = run_sweep(&cfg, 1).unwrap();
        assert_eq!(res.points[0].bit_errors, 0);
        assert_eq!(res.points[0].block_errors, 0);
        assert_eq!(res.points[0].trials, 50);
    }
}
