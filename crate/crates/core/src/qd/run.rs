use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::archive::{Archive, Elite, DEFAULT_OBJECTIVE_FLOOR};
use super::emitter::{emitter_step, evaluate_batch, ImprovementEmitter, InsertObserver};
use crate::error::{Error, Result};
use crate::generator::GeneratorHandle;
use crate::grid::DEFAULT_MIN_AREA;
use crate::measures::ArchiveConfig;
use crate::palette::CategoryPalette;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsiConfig {
    pub seed: u64,
    pub emitters: usize,
    /// Offspring per batch; `None` uses 4 + floor(3 ln d).
    pub lambda: Option<usize>,
    pub sigma0: f64,
    pub total_evaluations: usize,
    pub min_area: usize,
    pub archive: ArchiveConfig,
    pub objective_floor: f64,
}

impl Default for LsiConfig {
    fn default() -> Self {
        LsiConfig {
            seed: 0,
            emitters: 5,
            lambda: None,
            sigma0: 0.75,
            total_evaluations: 10_000,
            min_area: DEFAULT_MIN_AREA,
            archive: ArchiveConfig::default(),
            objective_floor: DEFAULT_OBJECTIVE_FLOOR,
        }
    }
}

impl LsiConfig {
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if self.emitters == 0 {
            errs.push("emitters must be at least 1".into());
        }
        if let Some(l) = self.lambda {
            if l < 2 {
                errs.push(format!("lambda must be at least 2, got {l}"));
            }
        }
        if !(self.sigma0 > 0.0) || !self.sigma0.is_finite() {
            errs.push(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if self.total_evaluations == 0 {
            errs.push("total_evaluations must be at least 1".into());
        }
        if self.min_area == 0 {
            errs.push("min_area must be at least 1".into());
        }
        if !self.objective_floor.is_finite() {
            errs.push("objective_floor must be finite".into());
        }
        if let Err(e) = self.archive.validate() {
            errs.extend(e);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Archive state after each batch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub evaluations: usize,
    pub coverage: usize,
    pub qd_score: f64,
    pub best_objective: f64,
}

impl MetricsRow {
    fn of(archive: &Archive) -> Self {
        MetricsRow {
            evaluations: archive.stats().evaluations,
            coverage: archive.coverage(),
            qd_score: archive.qd_score(),
            best_objective: archive.best_objective().unwrap_or(f64::NEG_INFINITY),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LsiResult {
    pub archive: Archive,
    pub metrics: Vec<MetricsRow>,
    pub restarts: usize,
}

pub fn run_lsi(config: &LsiConfig, palette: &CategoryPalette, generator: &GeneratorHandle) -> Result<LsiResult> {
    run_lsi_observed(config, palette, generator, &mut |_, _| {})
}

/// CMA-ME: `config.emitters` improvement emitters take turns proposing
/// batches until the evaluation budget is spent. `observer` sees the archive
/// after every single insertion.
pub fn run_lsi_observed(
    config: &LsiConfig,
    palette: &CategoryPalette,
    generator: &GeneratorHandle,
    observer: &mut InsertObserver<'_>,
) -> Result<LsiResult> {
    config.validate().map_err(|e| Error::Config(e.join("; ")))?;
    let dim = generator.latent_dim();
    let mut archive = Archive::with_floor(config.archive, config.objective_floor);
    let mut emitters: Vec<ImprovementEmitter> = (0..config.emitters)
        .map(|i| ImprovementEmitter::new(dim, config.sigma0, config.lambda, config.seed, i as u64 + 1))
        .collect();

    let mut metrics = Vec::new();
    let mut spent = 0;
    let mut turn = 0;
    while spent < config.total_evaluations {
        let emitter = &mut emitters[turn % config.emitters];
        let limit = config.total_evaluations - spent;
        let records = emitter_step(emitter, &mut archive, generator, palette, config, limit, observer)?;
        spent += records.len();
        metrics.push(MetricsRow::of(&archive));
        turn += 1;
    }
    log::info!(
        "CMA-ME finished: {} evaluations, coverage {}, qd-score {:.3}",
        spent,
        archive.coverage(),
        archive.qd_score()
    );
    Ok(LsiResult {
        restarts: emitters.iter().map(|e| e.restarts).sum(),
        archive,
        metrics,
    })
}

/// Baseline: latents drawn uniformly from `[-bound, bound]^d` and inserted
/// into an archive of the same shape, with the same budget and batch size.
pub fn random_search(
    config: &LsiConfig,
    palette: &CategoryPalette,
    generator: &GeneratorHandle,
    bound: f64,
) -> Result<LsiResult> {
    config.validate().map_err(|e| Error::Config(e.join("; ")))?;
    let dim = generator.latent_dim();
    let batch = config.lambda.unwrap_or_else(|| super::cmaes::default_lambda(dim));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut archive = Archive::with_floor(config.archive, config.objective_floor);
    let mut metrics = Vec::new();
    let mut spent = 0;
    while spent < config.total_evaluations {
        let n = batch.min(config.total_evaluations - spent);
        let latents: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-bound..=bound)).collect())
            .collect();
        let evals = evaluate_batch(&latents, generator, palette, config.min_area, &config.archive)?;
        for (latent, ev) in latents.into_iter().zip(evals) {
            archive.insert(Elite {
                latent,
                objective: ev.objective,
                measures: ev.measures,
                cell: ev.cell,
            });
        }
        spent += n;
        metrics.push(MetricsRow::of(&archive));
    }
    Ok(LsiResult {
        archive,
        metrics,
        restarts: 0,
    })
}
