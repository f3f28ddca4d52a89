use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::measures::{bin_measures, ArchiveConfig, CellIndex, MeasureValue};

pub const DEFAULT_OBJECTIVE_FLOOR: f64 = -1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Elite {
    pub latent: Vec<f64>,
    pub objective: f64,
    pub measures: MeasureValue,
    pub cell: CellIndex,
}

impl Elite {
    pub fn new(latent: Vec<f64>, objective: f64, measures: MeasureValue, config: &ArchiveConfig) -> Self {
        Elite {
            latent,
            objective,
            cell: bin_measures(&measures, config),
            measures,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InsertStatus {
    NewCell,
    /// Objective gain over the replaced elite.
    Improved(f64),
    Rejected,
}

impl InsertStatus {
    pub fn is_progress(&self) -> bool {
        !matches!(self, InsertStatus::Rejected)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveStats {
    pub evaluations: usize,
    pub insertions: usize,
    pub improvements: usize,
}

/// MAP-Elites grid over (price, count). Each cell keeps the best solution
/// offered to it; replacement requires strict improvement.
#[derive(Clone, Debug, PartialEq)]
pub struct Archive {
    config: ArchiveConfig,
    cells: BTreeMap<CellIndex, Elite>,
    stats: ArchiveStats,
    objective_floor: f64,
}

impl Archive {
    pub fn new(config: ArchiveConfig) -> Self {
        Self::with_floor(config, DEFAULT_OBJECTIVE_FLOOR)
    }

    pub fn with_floor(config: ArchiveConfig, objective_floor: f64) -> Self {
        Archive {
            config,
            cells: BTreeMap::new(),
            stats: ArchiveStats::default(),
            objective_floor,
        }
    }

    pub fn config(&self) -> &ArchiveConfig {
        &self.config
    }

    pub fn stats(&self) -> ArchiveStats {
        self.stats
    }

    pub fn insert(&mut self, candidate: Elite) -> InsertStatus {
        self.stats.evaluations += 1;
        match self.cells.get_mut(&candidate.cell) {
            None => {
                self.cells.insert(candidate.cell, candidate);
                self.stats.insertions += 1;
                InsertStatus::NewCell
            }
            Some(incumbent) if candidate.objective > incumbent.objective => {
                let delta = candidate.objective - incumbent.objective;
                *incumbent = candidate;
                self.stats.insertions += 1;
                self.stats.improvements += 1;
                InsertStatus::Improved(delta)
            }
            Some(_) => InsertStatus::Rejected,
        }
    }

    pub fn coverage(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Σ max(0, objective − floor) over occupied cells, summed in cell order.
    pub fn qd_score(&self) -> f64 {
        self.cells
            .values()
            .map(|e| (e.objective - self.objective_floor).max(0.0))
            .sum()
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.cells.values().map(|e| e.objective).max_by(f64::total_cmp)
    }

    pub fn get(&self, cell: CellIndex) -> Option<&Elite> {
        self.cells.get(&cell)
    }

    /// Elites in (price, count) order.
    pub fn elites(&self) -> impl Iterator<Item = &Elite> {
        self.cells.values()
    }

    pub fn random_elite<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&Elite> {
        if self.cells.is_empty() {
            return None;
        }
        let k = rng.random_range(0..self.cells.len());
        self.cells.values().nth(k)
    }

    /// Stores `elite` unconditionally; used when reloading a dump.
    pub fn restore(&mut self, elite: Elite) {
        self.cells.insert(elite.cell, elite);
    }
}
