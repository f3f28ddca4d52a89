//! Command-line front end for the furnish pipeline.

pub mod commands;
pub mod config;
pub mod document;
pub mod error;
pub mod render;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::EmbedArgs;
use crate::config::RunConfig;
use crate::document::to_json;
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "furnish",
    version,
    about = "Furniture arrangement search over a generator's latent space"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a category palette from name embeddings and a price catalog.
    Embed {
        #[arg(long)]
        embeddings: PathBuf,
        /// CSV with name,unit_price,default_aspect.
        #[arg(long)]
        prices: PathBuf,
        /// Defaults to <out-dir>/palette.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        perplexity: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
    },
    /// Repair an occupancy-grid PNG into furniture rectangles.
    Repair {
        grid: PathBuf,
        /// Defaults to the palette named in --config.
        #[arg(long)]
        palette: Option<PathBuf>,
        #[arg(long)]
        min_area: Option<usize>,
        /// Upscaling factor for the annotated image.
        #[arg(long, default_value_t = 8)]
        scale: u32,
    },
    /// Run CMA-ME and write archive.csv, metrics.csv and heatmap.png.
    Search,
    /// Evaluate one latent vector and print the result as JSON.
    Eval {
        /// Comma/space separated numbers or a JSON array.
        latent: String,
    },
    /// Regenerate an archived elite as raw and repaired PNGs.
    Render {
        /// Defaults to <output_dir>/archive.csv.
        #[arg(long)]
        archive: Option<PathBuf>,
        /// PRICE_INDEX,COUNT_INDEX
        #[arg(long)]
        cell: String,
    },
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let cfg = RunConfig::parse("", Path::new("."), "<defaults>");
            cfg.map_err(|e| CliError::validation(format!("{e}\n(pass --config to point at a run configuration)")))?
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

/// Runs one parsed command line, printing results to stdout.
pub fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Embed {
            embeddings,
            prices,
            out,
            perplexity,
            iterations,
        } => {
            let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            let args = EmbedArgs {
                embeddings: embeddings.clone(),
                prices: prices.clone(),
                out: out.clone().unwrap_or_else(|| out_dir.join("palette.csv")),
                perplexity: *perplexity,
                iterations: *iterations,
                seed: cli.seed.unwrap_or(0),
            };
            let palette = commands::embed(&args)?;
            println!("{} ({} categories)", args.out.display(), palette.len());
        }
        Command::Repair {
            grid,
            palette,
            min_area,
            scale,
        } => {
            let cfg = match (&cli.config, palette) {
                (None, Some(_)) => None,
                _ => Some(load_config(&cli)?),
            };
            let palette_path = palette
                .clone()
                .or_else(|| cfg.as_ref().map(|c| c.palette.clone()))
                .unwrap();
            let min_area = min_area
                .or(cfg.as_ref().map(|c| c.min_area))
                .unwrap_or(furnish_core::grid::DEFAULT_MIN_AREA);
            let out_dir = cli
                .out_dir
                .clone()
                .or_else(|| cfg.as_ref().map(|c| c.output_dir.clone()))
                .unwrap_or_else(|| PathBuf::from("."));
            let palette = commands::load_palette(&palette_path)?;
            let out = commands::repair(grid, &palette, min_area, &out_dir, *scale)?;
            println!("{}", out.json.display());
            println!("{}", out.annotated.display());
            log::info!(
                "{} placements, repair cost {:.4}",
                out.document.placements.len(),
                out.document.repair_cost
            );
        }
        Command::Search => {
            let cfg = load_config(&cli)?;
            let (result, out) = commands::search(&cfg)?;
            println!("{}", out.archive_csv.display());
            println!("{}", out.metrics_csv.display());
            println!("{}", out.heatmap.display());
            eprintln!(
                "coverage {} / {}, qd-score {:.4}, restarts {}",
                result.archive.coverage(),
                cfg.archive.cells(),
                result.archive.qd_score(),
                result.restarts
            );
        }
        Command::Eval { latent } => {
            let cfg = load_config(&cli)?;
            let latent = commands::parse_latent(latent)?;
            print!("{}", to_json(&commands::eval(&cfg, &latent)?));
        }
        Command::Render { archive, cell } => {
            let cfg = load_config(&cli)?;
            let cell = commands::parse_cell(cell)?;
            let archive = archive.clone().unwrap_or_else(|| cfg.output_dir.join("archive.csv"));
            let out = commands::render(&cfg, &archive, cell, &cfg.output_dir)?;
            println!("{}", out.raw.display());
            println!("{}", out.repaired.display());
        }
    }
    Ok(())
}
