//! Run configuration: JSON file keys, flag overrides, environment
//! overrides, and up-front validation. Precedence per key, lowest to
//! highest: built-in default, config file, environment, command-line flag.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use mpstab::mps::{Mps, EXPAND_CAP, SPAN_CAP};

use crate::CliError;

pub const ENV_OUT_DIR: &str = "MPSTAB_OUT_DIR";
pub const ENV_WORKERS: &str = "MPSTAB_WORKERS";

/// Keys accepted in the config file. Every field is optional; absent keys
/// fall back to per-subcommand defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub bond: Option<usize>,
    pub out_dir: Option<String>,
    pub workers: Option<usize>,
    pub l: Option<usize>,
    pub m: Option<usize>,
    pub l_list: Option<Vec<usize>>,
    pub n_list: Option<Vec<usize>>,
    pub span: Option<usize>,
    pub range: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub beta_fracs: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub steps: Option<usize>,
    pub cap: Option<usize>,
}

/// Fully resolved settings a subcommand runs with.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: String,
    pub seed: u64,
    pub d: usize,
    pub bond: usize,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub l: usize,
    pub m: usize,
    pub l_list: Option<Vec<usize>>,
    pub n_list: Option<Vec<usize>>,
    pub span: Option<usize>,
    pub range: usize,
    pub seeds: Vec<u64>,
    pub beta_fracs: Vec<f64>,
    pub betas: Option<Vec<f64>>,
    pub steps: usize,
    pub cap: usize,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

fn env_usize(name: &str) -> Result<Option<usize>, CliError> {
    match std::env::var(name) {
        Ok(v) => v.parse::<usize>().map(Some).map_err(|_| {
            CliError::Config(format!("{name} must be an unsigned integer, got {v:?}"))
        }),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    /// Overlays file keys, environment, and flags onto the defaults.
    pub fn resolve(
        file: FileConfig,
        flags: &crate::Flags,
        subcommand: &str,
    ) -> Result<Self, CliError> {
        let out_dir = flags
            .out_dir
            .clone()
            .or_else(|| std::env::var(ENV_OUT_DIR).ok())
            .or(file.out_dir)
            .unwrap_or_else(|| format!("runs/{subcommand}"));
        let workers = match flags.workers {
            Some(w) => w,
            None => env_usize(ENV_WORKERS)?.or(file.workers).unwrap_or(0),
        };
        Ok(RunConfig {
            model: flags
                .model
                .clone()
                .or(file.model)
                .unwrap_or_else(|| "aklt".into()),
            seed: flags.seed.or(file.seed).unwrap_or(7),
            d: flags.d.or(file.d).unwrap_or(2),
            bond: flags.bond.or(file.bond).unwrap_or(2),
            out_dir: PathBuf::from(out_dir),
            workers,
            l: flags.l.or(file.l).unwrap_or(2),
            m: flags.m.or(file.m).unwrap_or(3),
            l_list: flags.l_list.clone().or(file.l_list),
            n_list: flags.n_list.clone().or(file.n_list),
            span: flags.span.or(file.span),
            range: flags.range.or(file.range).unwrap_or(2),
            seeds: flags
                .seeds
                .clone()
                .or(file.seeds)
                .unwrap_or_else(|| vec![1, 2, 3]),
            beta_fracs: flags
                .beta_fracs
                .clone()
                .or(file.beta_fracs)
                .unwrap_or_else(|| vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05]),
            betas: flags.betas.clone().or(file.betas),
            steps: flags.steps.or(file.steps).unwrap_or(20),
            cap: flags.cap.or(file.cap).unwrap_or(8),
        })
    }

    /// Builds the model the run operates on.
    pub fn build_model(&self) -> Result<Mps, CliError> {
        match self.model.as_str() {
            "aklt" => Ok(Mps::aklt()),
            "random" => {
                if self.d < 2 || self.bond < 1 {
                    return Err(CliError::Config(format!(
                        "random model needs d ≥ 2 and D ≥ 1, got d={} D={}",
                        self.d, self.bond
                    )));
                }
                Ok(Mps::random(self.d, self.bond, self.seed))
            }
            path => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!(
                        "model {path:?} is not a preset (aklt, random) and not a readable file: {e}"
                    ))
                })?;
                Mps::from_json(&text)
                    .map_err(|e| CliError::Config(format!("model file {path}: {e}")))
            }
        }
    }

    /// Every cap checked before any computation starts.
    pub fn validate(&self, subcommand: &str) -> Result<(), CliError> {
        let d = if self.model == "aklt" { 3 } else { self.d };
        let fits_span = |l: usize| d.checked_pow(l as u32).is_some_and(|r| r <= SPAN_CAP);
        let fits_ring = |n: usize| d.checked_pow(n as u32).is_some_and(|r| r <= EXPAND_CAP);
        if let Some(list) = &self.l_list {
            if list.is_empty() {
                return Err(CliError::Config("l_list must be non-empty".into()));
            }
            for &l in list {
                if l == 0 || !fits_span(l) {
                    return Err(CliError::Config(format!(
                        "block length {l} outside (0, log_{d} {SPAN_CAP}]"
                    )));
                }
            }
        }
        if let Some(list) = &self.n_list {
            if list.is_empty() {
                return Err(CliError::Config("n_list must be non-empty".into()));
            }
            for &n in list {
                if n == 0 || !fits_ring(n) {
                    return Err(CliError::Config(format!(
                        "ring size {n} outside (0, log_{d} {EXPAND_CAP}]"
                    )));
                }
            }
        }
        match subcommand {
            "decompose" | "phase-path" => {
                if self.l == 0 || !self.l.is_multiple_of(2) || !fits_span(self.l) {
                    return Err(CliError::Config(format!(
                        "block length {} must be even, positive, and within the dense cap",
                        self.l
                    )));
                }
                if self.m < 3 {
                    return Err(CliError::Config(format!(
                        "m = {} blocks, need at least 3",
                        self.m
                    )));
                }
                let bd = d.pow(self.l as u32);
                if bd.checked_pow(self.m as u32).is_none_or(|r| r > EXPAND_CAP) {
                    return Err(CliError::Config(format!(
                        "ring of {} blocks of dimension {bd} exceeds {EXPAND_CAP}",
                        self.m
                    )));
                }
                if subcommand == "phase-path" && self.steps == 0 {
                    return Err(CliError::Config("steps must be positive".into()));
                }
            }
            "sweep" => {
                if self.seeds.is_empty() {
                    return Err(CliError::Config("seed list must be non-empty".into()));
                }
                if self.range == 0 {
                    return Err(CliError::Config(
                        "perturbation range must be positive".into(),
                    ));
                }
                let bad = |b: &f64| !b.is_finite() || *b < 0.0;
                if self.beta_fracs.iter().any(bad)
                    || self
                        .betas
                        .as_ref()
                        .is_some_and(|v| v.iter().any(bad) || v.is_empty())
                    || self.beta_fracs.is_empty()
                {
                    return Err(CliError::Config(
                        "perturbation strengths must be a non-empty list of finite values ≥ 0"
                            .into(),
                    ));
                }
            }
            "g1" if self.cap == 0 => {
                return Err(CliError::Config("search cap must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }
}
