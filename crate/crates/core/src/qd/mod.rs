//! CMA-ME latent space illumination over a (price, count) archive.

pub mod archive;
pub mod cmaes;
pub mod dump;
pub mod emitter;
pub mod run;

pub use archive::{Archive, ArchiveStats, Elite, InsertStatus, DEFAULT_OBJECTIVE_FLOOR};
pub use cmaes::{CmaEsState, Hyperparams, NeedsRestart};
pub use emitter::{
    emitter_step, evaluate, evaluate_grid, rank_by_improvement, EvalRecord, Evaluation, ImprovementEmitter,
};
pub use run::{random_search, run_lsi, run_lsi_observed, LsiConfig, LsiResult, MetricsRow};
