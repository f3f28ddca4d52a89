use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::archive::{Archive, Elite, InsertStatus};
use super::cmaes::CmaEsState;
use super::run::LsiConfig;
use crate::error::Result;
use crate::generator::GeneratorHandle;
use crate::grid::{repair_grid, Arrangement, OccupancyGrid};
use crate::measures::{bin_measures, compute_measures, ArchiveConfig, CellIndex, MeasureValue};
use crate::palette::CategoryPalette;

/// Result of pushing one latent through generate → repair → measures.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub measures: MeasureValue,
    pub cell: CellIndex,
    pub arrangement: Arrangement,
}

pub fn evaluate_grid(
    grid: &OccupancyGrid,
    palette: &CategoryPalette,
    min_area: usize,
    archive: &ArchiveConfig,
) -> Result<Evaluation> {
    let arrangement = repair_grid(grid, palette, min_area);
    let measures = compute_measures(&arrangement, palette)?;
    Ok(Evaluation {
        // 0.0 - x keeps a perfect repair at +0.0
        objective: 0.0 - arrangement.repair_cost,
        cell: bin_measures(&measures, archive),
        measures,
        arrangement,
    })
}

pub fn evaluate(
    z: &[f64],
    generator: &GeneratorHandle,
    palette: &CategoryPalette,
    min_area: usize,
    archive: &ArchiveConfig,
) -> Result<Evaluation> {
    let grid = generator.generate(z)?;
    evaluate_grid(&grid, palette, min_area, archive)
}

/// Evaluates a batch, in parallel when the generator allows it. Results are
/// in input order either way.
pub fn evaluate_batch(
    latents: &[Vec<f64>],
    generator: &GeneratorHandle,
    palette: &CategoryPalette,
    min_area: usize,
    archive: &ArchiveConfig,
) -> Result<Vec<Evaluation>> {
    if generator.parallel() {
        latents
            .par_iter()
            .map(|z| evaluate(z, generator, palette, min_area, archive))
            .collect()
    } else {
        latents
            .iter()
            .map(|z| evaluate(z, generator, palette, min_area, archive))
            .collect()
    }
}

/// One evaluated candidate and what the archive did with it.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub index: usize,
    pub latent: Vec<f64>,
    pub objective: f64,
    pub measures: MeasureValue,
    pub cell: CellIndex,
    pub status: InsertStatus,
}

fn group(status: &InsertStatus) -> u8 {
    match status {
        InsertStatus::NewCell => 0,
        InsertStatus::Improved(_) => 1,
        InsertStatus::Rejected => 2,
    }
}

/// Orders a batch for the CMA-ES update: new cells first (by objective),
/// then improvements (by gain), then rejections (by objective), each
/// descending; remaining ties by index.
pub fn rank_by_improvement(batch: &[EvalRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&batch[a], &batch[b]);
        group(&ra.status)
            .cmp(&group(&rb.status))
            .then_with(|| match (ra.status, rb.status) {
                (InsertStatus::Improved(da), InsertStatus::Improved(db)) => db.total_cmp(&da),
                _ => rb.objective.total_cmp(&ra.objective),
            })
            .then_with(|| ra.index.cmp(&rb.index))
    });
    order
}

/// CMA-ES emitter ranked by archive improvement.
#[derive(Clone, Debug)]
pub struct ImprovementEmitter {
    pub cma: CmaEsState,
    pub sigma0: f64,
    pub restarts: usize,
    rng: ChaCha8Rng,
}

impl ImprovementEmitter {
    pub fn new(dim: usize, sigma0: f64, lambda: Option<usize>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ImprovementEmitter {
            cma: CmaEsState::new(vec![0.0; dim], sigma0, lambda),
            sigma0,
            restarts: 0,
            rng,
        }
    }

    pub fn lambda(&self) -> usize {
        self.cma.lambda()
    }

    pub fn ask(&mut self) -> Vec<Vec<f64>> {
        self.cma.sample(&mut self.rng)
    }

    /// Restarts around a uniformly chosen elite, or the origin for an empty archive.
    pub fn restart(&mut self, archive: &Archive) {
        let mean = match archive.random_elite(&mut self.rng) {
            Some(e) => e.latent.clone(),
            None => vec![0.0; self.cma.dim],
        };
        self.cma.restart(mean, self.sigma0);
        self.restarts += 1;
    }
}

pub type InsertObserver<'a> = dyn FnMut(&Archive, &EvalRecord) + 'a;

/// Samples, evaluates and inserts one batch, then adapts the emitter.
/// At most `limit` candidates are evaluated; a truncated batch skips the
/// adaptation step.
pub fn emitter_step(
    emitter: &mut ImprovementEmitter,
    archive: &mut Archive,
    generator: &GeneratorHandle,
    palette: &CategoryPalette,
    config: &LsiConfig,
    limit: usize,
    observer: &mut InsertObserver<'_>,
) -> Result<Vec<EvalRecord>> {
    let mut latents = emitter.ask();
    let full = limit >= latents.len();
    latents.truncate(limit);
    let evals = evaluate_batch(&latents, generator, palette, config.min_area, &config.archive)?;

    let mut records = Vec::with_capacity(latents.len());
    for (index, (latent, ev)) in latents.into_iter().zip(evals).enumerate() {
        let status = archive.insert(Elite {
            latent: latent.clone(),
            objective: ev.objective,
            measures: ev.measures,
            cell: ev.cell,
        });
        let record = EvalRecord {
            index,
            latent,
            objective: ev.objective,
            measures: ev.measures,
            cell: ev.cell,
            status,
        };
        observer(archive, &record);
        records.push(record);
    }
    if !full {
        return Ok(records);
    }

    let order = rank_by_improvement(&records);
    let ranked: Vec<Vec<f64>> = order.iter().map(|&i| records[i].latent.clone()).collect();
    let progressed = records.iter().any(|r| r.status.is_progress());
    match emitter.cma.update(&ranked) {
        Ok(()) if progressed => {}
        Ok(()) => emitter.restart(archive),
        Err(e) => {
            log::debug!("{e}");
            emitter.restart(archive);
        }
    }
    Ok(records)
}
