//! Run configuration: one TOML file describing a whole search.
//!
//! Relative paths resolve against the directory holding the config file.
//! Every problem found is reported at once rather than one per run.

use std::path::{Path, PathBuf};
use std::time::Duration;

use furnish_core::generator::external::DEFAULT_TIMEOUT;
use furnish_core::generator::SynthParams;
use furnish_core::grid::DEFAULT_MIN_AREA;
use furnish_core::measures::ArchiveConfig;
use furnish_core::qd::{LsiConfig, DEFAULT_OBJECTIVE_FLOOR};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_CELL_PX: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorConfig {
    Builtin(SynthParams),
    External {
        command: Vec<String>,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: f64,
    },
}

fn default_timeout_secs() -> f64 {
    DEFAULT_TIMEOUT.as_secs_f64()
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::Builtin(SynthParams::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub palette: PathBuf,
    pub output_dir: PathBuf,
    pub emitters: usize,
    pub lambda: Option<usize>,
    pub sigma0: f64,
    pub total_evaluations: usize,
    pub min_area: usize,
    pub objective_floor: f64,
    pub heatmap_cell_px: u32,
    pub archive: ArchiveConfig,
    pub generator: GeneratorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lsi = LsiConfig::default();
        RunConfig {
            seed: lsi.seed,
            palette: PathBuf::from("palette.csv"),
            output_dir: PathBuf::from("out"),
            emitters: lsi.emitters,
            lambda: lsi.lambda,
            sigma0: lsi.sigma0,
            total_evaluations: lsi.total_evaluations,
            min_area: DEFAULT_MIN_AREA,
            objective_floor: DEFAULT_OBJECTIVE_FLOOR,
            heatmap_cell_px: DEFAULT_CELL_PX,
            archive: ArchiveConfig::default(),
            generator: GeneratorConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses `text`, resolving relative paths against `base_dir`, then
    /// validates everything.
    pub fn parse(text: &str, base_dir: &Path, origin: &str) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_string(),
            problems: vec![e.message().to_string()],
        })?;
        cfg.palette = base_dir.join(&cfg.palette);
        cfg.output_dir = base_dir.join(&cfg.output_dir);
        if let GeneratorConfig::External { command, .. } = &mut cfg.generator {
            if let Some(program) = command.first_mut() {
                if program.contains('/') && Path::new(program).is_relative() {
                    *program = base_dir.join(&*program).to_string_lossy().into_owned();
                }
            }
        }
        let problems = cfg.problems();
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Config {
                path: origin.to_string(),
                problems,
            })
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    pub fn lsi(&self) -> LsiConfig {
        LsiConfig {
            seed: self.seed,
            emitters: self.emitters,
            lambda: self.lambda,
            sigma0: self.sigma0,
            total_evaluations: self.total_evaluations,
            min_area: self.min_area,
            archive: self.archive,
            objective_floor: self.objective_floor,
        }
    }

    /// Every violated constraint, in field order.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.palette.is_file() {
            out.push(format!("palette file {} does not exist", self.palette.display()));
        }
        if self.output_dir.as_os_str().is_empty() {
            out.push("output_dir must not be empty".into());
        }
        if self.heatmap_cell_px == 0 {
            out.push("heatmap_cell_px must be at least 1".into());
        }
        if let Err(errs) = self.lsi().validate() {
            out.extend(errs);
        }
        match &self.generator {
            GeneratorConfig::Builtin(params) => {
                if let Err(errs) = params.validate() {
                    out.extend(errs);
                }
            }
            GeneratorConfig::External { command, timeout_secs } => {
                match command.first() {
                    None => out.push("generator.command must name a program".into()),
                    Some(program) if !program_exists(program) => {
                        out.push(format!("generator program {program:?} not found"));
                    }
                    Some(_) => {}
                }
                if !(*timeout_secs > 0.0 && timeout_secs.is_finite()) {
                    out.push(format!("generator.timeout_secs must be positive, got {timeout_secs}"));
                }
            }
        }
        out
    }

    pub fn timeout(&self) -> Duration {
        match &self.generator {
            GeneratorConfig::External { timeout_secs, .. } => Duration::from_secs_f64(*timeout_secs),
            GeneratorConfig::Builtin(_) => DEFAULT_TIMEOUT,
        }
    }
}

fn program_exists(program: &str) -> bool {
    if program.contains('/') {
        return Path::new(program).is_file();
    }
    std::env::var_os("PATH")
        .map(|paths| std::env::split_paths(&paths).any(|dir| dir.join(program).is_file()))
        .unwrap_or(false)
}
