//! Latent vector → occupancy grid.

pub mod external;
pub mod synth;

use crate::error::Result;
use crate::grid::OccupancyGrid;

pub use external::ExternalGenerator;
pub use synth::{synth_generate, SynthGenerator, SynthParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Builtin,
    External,
}

/// Either generator behind one interface. Both are deterministic: the same
/// latent always yields the same grid.
#[derive(Debug)]
pub enum GeneratorHandle {
    Builtin(SynthGenerator),
    External(ExternalGenerator),
}

impl GeneratorHandle {
    pub fn kind(&self) -> GeneratorKind {
        match self {
            GeneratorHandle::Builtin(_) => GeneratorKind::Builtin,
            GeneratorHandle::External(_) => GeneratorKind::External,
        }
    }

    pub fn latent_dim(&self) -> usize {
        match self {
            GeneratorHandle::Builtin(g) => g.params().latent_dim,
            GeneratorHandle::External(g) => g.hello().latent_dim,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            GeneratorHandle::Builtin(g) => g.params().width,
            GeneratorHandle::External(g) => g.hello().width,
        }
    }

    pub fn height(&self) -> usize {
        match self {
            GeneratorHandle::Builtin(g) => g.params().height,
            GeneratorHandle::External(g) => g.hello().height,
        }
    }

    pub fn generate(&self, z: &[f64]) -> Result<OccupancyGrid> {
        match self {
            GeneratorHandle::Builtin(g) => g.generate(z),
            GeneratorHandle::External(g) => g.generate(z),
        }
    }

    /// Whether `generate` may be called from several threads at once
    /// without serializing.
    pub fn parallel(&self) -> bool {
        matches!(self, GeneratorHandle::Builtin(_))
    }
}
