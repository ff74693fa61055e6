use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use scma_core::analysis::{ablep_bound, BlockAlphabet, BoundMode, UpepForm};
use scma_core::channel::snr_to_n0;
use scma_core::codebook::{
    cross_codebook_min_distance, CodebookDocument, CodebookFamily, FactorGraph,
};
use scma_core::mapper::te_hcpi;
use scma_core::sim::{
    default_workers, emit_bound_csv, emit_csv, run_sweep, BoundRow, SimSystem, SweepConfig,
    WORKERS_ENV,
};

#[derive(Parser)]
#[command(name = "scma", version, about = "HCPI-SCMA link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Corrected,
    AsPrinted,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER/BLER sweep and write the results as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the master seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Evaluate the block error union bound over the config's SNR grid.
    Bound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "sampled")]
        mode: Mode,
        /// Transmitted-block samples in sampled mode.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        user: usize,
        #[arg(long, value_enum, default_value = "corrected")]
        form: Form,
    },
    /// Print the transmission efficiency of the config's scheme.
    Te {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate rotated-PSK codebooks for a regular factor graph.
    GenCodebook {
        /// `K,J,d_f,d_v`
        #[arg(long)]
        graph: String,
        #[arg(long = "C")]
        c: usize,
        #[arg(long = "R")]
        r: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        rotation_seed: f64,
    },
    /// Check a codebook file against every structural invariant.
    Validate {
        #[arg(long)]
        codebook: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            out,
            seed,
            workers,
        } => simulate(config, out, seed, workers),
        Command::Bound {
            config,
            out,
            mode,
            samples,
            user,
            form,
        } => bound(config, out, mode, samples, user, form),
        Command::Te { config } => te(config),
        Command::GenCodebook {
            graph,
            c,
            r,
            out,
            rotation_seed,
        } => gen_codebook(&graph, c, r, out, rotation_seed),
        Command::Validate { codebook } => validate(codebook),
    }
}

fn load(path: &Path) -> Result<SweepConfig> {
    SweepConfig::load(path).with_context(|| format!("reading config {}", path.display()))
}

fn simulate(
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<()> {
    let mut cfg = load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let workers = workers.unwrap_or_else(default_workers);
    let result = run_sweep(&cfg, workers)?;
    for (p, wall) in result.points.iter().zip(&result.wall_times) {
        eprintln!(
            "{:>6} dB  trials {:>8}  ber {:.3e}  bler {:.3e}  {:.1}s",
            p.snr_db,
            p.trials,
            p.ber,
            p.bler,
            wall.as_secs_f64()
        );
    }
    std::fs::write(&out, emit_csv(&result)?)
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn bound(
    config: PathBuf,
    out: PathBuf,
    mode: Mode,
    samples: u64,
    user: usize,
    form: Form,
) -> Result<()> {
    let cfg = load(&config)?;
    let sys = SimSystem::build(&cfg)?;
    let blocks = BlockAlphabet::build(&sys.config, &sys.mapper, &sys.families)?;
    let form = match form {
        Form::Corrected => UpepForm::Corrected,
        Form::AsPrinted => UpepForm::AsPrinted,
    };
    let (mode, label) = match mode {
        Mode::Exact => (BoundMode::Exact, "exact"),
        Mode::Sampled => (
            BoundMode::Sampled {
                samples,
                seed: cfg.seed,
            },
            "sampled",
        ),
    };
    let rows = cfg
        .snr_db
        .iter()
        .map(|&snr| {
            let n0 = snr_to_n0(snr, &sys.config).n0;
            let b = ablep_bound(user, &blocks, n0, form, mode)?;
            Ok(BoundRow {
                snr_db: snr,
                n0,
                bound: b.value,
                stderr: b.stderr,
                mode: label.into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    std::fs::write(&out, emit_bound_csv(&rows)?)
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn te(config: PathBuf) -> Result<()> {
    let cfg = load(&config)?;
    let block = cfg.block_config()?;
    let budget = block.budget();
    let value = te_hcpi(cfg.system.users, cfg.system.resources, &block)?;
    println!("scheme: {}", cfg.scheme);
    println!("n: {}  t: {:?}  C: {}", block.n, block.t, block.c);
    println!("m1: {:?}  m2: {:?}  m: {}", budget.m1, budget.m2, budget.m);
    println!(
        "te: {} = {} bits/chip",
        value,
        *value.numer() as f64 / *value.denom() as f64
    );
    Ok(())
}

fn gen_codebook(graph: &str, c: usize, r: usize, out: PathBuf, rotation_seed: f64) -> Result<()> {
    let dims = graph
        .split(',')
        .map(|v| v.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .context("--graph expects K,J,d_f,d_v")?;
    let [k, j, d_f, d_v] = dims[..] else {
        bail!(
            "--graph expects four values K,J,d_f,d_v, got {}",
            dims.len()
        );
    };
    if r == 0 {
        bail!("--R must be at least 1");
    }
    let g = Arc::new(FactorGraph::canonical(k, j, d_f, d_v)?);
    let families = (1..=r)
        .map(|order| CodebookFamily::generate_phase_rotation(g.clone(), c, order, rotation_seed))
        .collect::<scma_core::Result<Vec<_>>>()?;
    let doc = CodebookDocument::from_families(&families)?;
    std::fs::write(&out, doc.to_json()).with_context(|| format!("writing {}", out.display()))?;
    let d = cross_codebook_min_distance(&families)?;
    eprintln!(
        "wrote {} (K={k}, J={j}, C={c}, R={r}, min distance {:.6})",
        out.display(),
        d.global
    );
    Ok(())
}

fn validate(codebook: PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(&codebook)
        .with_context(|| format!("reading {}", codebook.display()))?;
    let doc = CodebookDocument::parse(&text)?;
    let families = doc.families()?;
    let d = cross_codebook_min_distance(&families)?;
    println!(
        "ok: K={} J={} C={} R={} min distance {:.6}",
        doc.k, doc.j, doc.c, doc.r, d.global
    );
    Ok(())
}
