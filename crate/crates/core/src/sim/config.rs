//! Sweep configuration files and the system they describe.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::FadingModel;
use crate::codebook::{CodebookDocument, CodebookFamily, FactorGraph, MergedAlphabet};
use crate::error::{Error, Result};
use crate::mapper::{BtiMapper, HcpiConfig, MapperTableDoc};

/// Transmission scheme of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Plain SCMA, one codeword per block.
    Cscma,
    /// Single-order index modulation.
    Cpi,
    /// Hybrid index modulation over several orders.
    Hcpi,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Cscma => "cscma",
            Scheme::Cpi => "cpi",
            Scheme::Hcpi => "hcpi",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cscma" => Ok(Scheme::Cscma),
            "cpi" => Ok(Scheme::Cpi),
            "hcpi" => Ok(Scheme::Hcpi),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Users, resources, codebook size and factor graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "J", default = "default_users")]
    pub users: usize,
    #[serde(rename = "K", default = "default_resources")]
    pub resources: usize,
    #[serde(rename = "C", default = "default_codebook_size")]
    pub c: usize,
    #[serde(default = "default_d_f")]
    pub d_f: usize,
    #[serde(default = "default_d_v")]
    pub d_v: usize,
    /// Explicit `K x J` indicator matrix; overrides the degrees.
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<u8>>>,
}

fn default_users() -> usize {
    6
}
fn default_resources() -> usize {
    4
}
fn default_codebook_size() -> usize {
    4
}
fn default_d_f() -> usize {
    3
}
fn default_d_v() -> usize {
    2
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            users: default_users(),
            resources: default_resources(),
            c: default_codebook_size(),
            d_f: default_d_f(),
            d_v: default_d_v(),
            f: None,
        }
    }
}

impl SystemConfig {
    pub fn graph(&self) -> Result<FactorGraph> {
        let graph = match &self.f {
            Some(f) => FactorGraph::from_matrix(f)?,
            None => FactorGraph::canonical(self.resources, self.users, self.d_f, self.d_v)?,
        };
        if graph.users() != self.users || graph.resources() != self.resources {
            return Err(Error::DimensionMismatch(format!(
                "F is {}x{}, system declares K = {}, J = {}",
                graph.resources(),
                graph.users(),
                self.resources,
                self.users
            )));
        }
        Ok(graph)
    }
}

/// Block layout; ignored by `cscma`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockLayout {
    pub n: usize,
    pub t: Vec<usize>,
}

impl Default for BlockLayout {
    fn default() -> Self {
        Self {
            n: 4,
            t: vec![2, 1],
        }
    }
}

/// Where codewords come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookSource {
    Generate {
        #[serde(default)]
        rotation_seed: f64,
    },
    File(PathBuf),
}

impl Default for CodebookSource {
    fn default() -> Self {
        CodebookSource::Generate { rotation_seed: 0.0 }
    }
}

/// Which BTI tables to use.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapperChoice {
    /// Tables stored in the codebook file, else a matching builtin, else combinadic.
    #[default]
    Auto,
    Combinadic,
    Builtin(String),
    /// JSON array of mapper tables.
    File(PathBuf),
}

/// Soft-output stage feeding the staged decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    /// Message passing over the merged alphabet.
    #[default]
    Mpa,
    /// Exact per-unit marginals by enumeration.
    ExactUnit,
}

/// One Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scheme: Scheme,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub hcpi: BlockLayout,
    #[serde(default)]
    pub codebook: CodebookSource,
    #[serde(default)]
    pub mapper: MapperChoice,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_target_bit_errors")]
    pub target_bit_errors: u64,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default)]
    pub fading: FadingModel,
    #[serde(default)]
    pub detector: DetectorKind,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_trials() -> u64 {
    1_000_000
}
fn default_target_bit_errors() -> u64 {
    100
}
fn default_iters() -> usize {
    6
}

impl SweepConfig {
    /// Defaults of the six-user, four-resource system for `scheme`.
    pub fn new(scheme: Scheme, snr_db: Vec<f64>) -> Self {
        Self {
            scheme,
            system: SystemConfig::default(),
            hcpi: BlockLayout::default(),
            codebook: CodebookSource::default(),
            mapper: MapperChoice::default(),
            snr_db,
            max_trials: default_max_trials(),
            target_bit_errors: default_target_bit_errors(),
            iters: default_iters(),
            fading: FadingModel::default(),
            detector: DetectorKind::default(),
            seed: 0,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative file references resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if let CodebookSource::File(p) = &mut cfg.codebook {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let MapperChoice::File(p) = &mut cfg.mapper {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::InvalidConfig("snr_db grid is empty".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("snr_db values must be finite".into()));
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "snr_db grid must be strictly increasing".into(),
            ));
        }
        if self.max_trials == 0 {
            return Err(Error::InvalidConfig("max_trials must be at least 1".into()));
        }
        if self.target_bit_errors == 0 {
            return Err(Error::InvalidConfig(
                "target_bit_errors must be at least 1".into(),
            ));
        }
        if self.iters == 0 {
            return Err(Error::InvalidConfig("iters must be at least 1".into()));
        }
        if self.scheme == Scheme::Cpi && self.hcpi.t.len() != 1 {
            return Err(Error::InvalidConfig(format!(
                "cpi needs exactly one order, got t = {:?}",
                self.hcpi.t
            )));
        }
        self.block_config()?;
        Ok(())
    }

    /// Block structure implied by the scheme.
    pub fn block_config(&self) -> Result<HcpiConfig> {
        match self.scheme {
            Scheme::Cscma => HcpiConfig::cscma(self.system.c),
            Scheme::Cpi | Scheme::Hcpi => {
                HcpiConfig::new(self.hcpi.n, self.hcpi.t.clone(), self.system.c)
            }
        }
    }
}

/// Everything a trial needs, built once per sweep.
#[derive(Debug, Clone)]
pub struct SimSystem {
    pub scheme: Scheme,
    pub config: HcpiConfig,
    pub families: Vec<CodebookFamily>,
    pub alphabet: MergedAlphabet,
    pub mapper: BtiMapper,
}

impl SimSystem {
    pub fn build(cfg: &SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let config = cfg.block_config()?;
        let orders = config.orders();
        let (families, doc_mappers) = match &cfg.codebook {
            CodebookSource::Generate { rotation_seed } => {
                let graph = Arc::new(cfg.system.graph()?);
                let fams = (1..=orders)
                    .map(|r| {
                        CodebookFamily::generate_phase_rotation(
                            graph.clone(),
                            cfg.system.c,
                            r,
                            *rotation_seed,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                (fams, Vec::new())
            }
            CodebookSource::File(path) => {
                let doc = CodebookDocument::parse(&std::fs::read_to_string(path)?)?;
                let fams = doc.families()?;
                if doc.j != cfg.system.users
                    || doc.k != cfg.system.resources
                    || doc.c != cfg.system.c
                {
                    return Err(Error::InconsistentFamilies(format!(
                        "codebook is J = {}, K = {}, C = {}; system is J = {}, K = {}, C = {}",
                        doc.j, doc.k, doc.c, cfg.system.users, cfg.system.resources, cfg.system.c
                    )));
                }
                if fams.len() < orders {
                    return Err(Error::InconsistentFamilies(format!(
                        "{orders} orders configured, codebook holds {}",
                        fams.len()
                    )));
                }
                (fams.into_iter().take(orders).collect(), doc.mappers)
            }
        };
        let alphabet = match cfg.scheme {
            Scheme::Cscma => MergedAlphabet::plain(&families[0])?,
            Scheme::Cpi | Scheme::Hcpi => MergedAlphabet::build(&families)?,
        };
        let mapper = match &cfg.mapper {
            MapperChoice::Auto if !doc_mappers.is_empty() => {
                BtiMapper::from_docs(&doc_mappers, &config)?
            }
            MapperChoice::Auto => BtiMapper::auto(&config)?,
            MapperChoice::Combinadic => BtiMapper::combinadic(&config)?,
            MapperChoice::Builtin(name) => BtiMapper::builtin(name, &config)?,
            MapperChoice::File(path) => {
                let docs: Vec<MapperTableDoc> =
                    serde_json::from_str(&std::fs::read_to_string(path)?)?;
                BtiMapper::from_docs(&docs, &config)?
            }
        };
        Ok(Self {
            scheme: cfg.scheme,
            config,
            families,
            alphabet,
            mapper,
        })
    }

    pub fn users(&self) -> usize {
        self.alphabet.graph().users()
    }

    pub fn resources(&self) -> usize {
        self.alphabet.graph().resources()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = SweepConfig::parse(r#"{"scheme": "hcpi", "snr_db": [0, 5]}"#).unwrap();
        assert_eq!(cfg, SweepConfig::new(Scheme::Hcpi, vec![0.0, 5.0]));
        let sys = SimSystem::build(&cfg).unwrap();
        assert_eq!(sys.alphabet.len(), 9);
        assert_eq!(sys.config.block_bits(), 9);
    }

    #[test]
    fn full_config_parses() {
        let text = r#"{
            "scheme": "cpi",
            "system": {"J": 6, "K": 4, "C": 4, "d_f": 3, "d_v": 2},
            "hcpi": {"n": 4, "t": [3]},
            "codebook": {"generate": {"rotation_seed": 0.25}},
            "mapper": "combinadic",
            "snr_db": [0, 10, 20],
            "max_trials": 50,
            "target_bit_errors": 10,
            "iters": 4,
            "fading": "block-fading-per-unit",
            "detector": "exact-unit",
            "seed": 9
        }"#;
        let cfg = SweepConfig::parse(text).unwrap();
        assert_eq!(cfg.mapper, MapperChoice::Combinadic);
        assert_eq!(cfg.fading, FadingModel::BlockFadingPerUnit);
        assert_eq!(cfg.detector, DetectorKind::ExactUnit);
        let sys = SimSystem::build(&cfg).unwrap();
        assert_eq!(sys.config.block_bits(), 8);
    }

    #[test]
    fn cscma_uses_plain_alphabet() {
        let cfg = SweepConfig::new(Scheme::Cscma, vec![0.0]);
        let sys = SimSystem::build(&cfg).unwrap();
        assert_eq!(sys.alphabet.len(), 4);
        assert_eq!(sys.alphabet.zero_index(), None);
        assert_eq!(sys.config.block_bits(), 2);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            r#"{"scheme": "hcpi", "snr_db": []}"#,
            r#"{"scheme": "hcpi", "snr_db": [5, 5]}"#,
            r#"{"scheme": "hcpi", "snr_db": [0], "max_trials": 0}"#,
            r#"{"scheme": "hcpi", "snr_db": [0], "target_bit_errors": 0}"#,
            r#"{"scheme": "cpi", "snr_db": [0], "hcpi": {"n": 4, "t": [2, 1]}}"#,
            r#"{"scheme": "hcpi", "snr_db": [0], "hcpi": {"n": 2, "t": [2, 1]}}"#,
            r#"{"scheme": "hcpi", "snr_db": [0], "bogus": 1}"#,
        ] {
            assert!(SweepConfig::parse(text).is_err(), "{text}");
        }
    }
}
