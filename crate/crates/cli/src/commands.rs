//! One function per subcommand. Each returns the paths it wrote so callers
//! (and tests) can inspect them.

use std::path::{Path, PathBuf};

use furnish_core::generator::{ExternalGenerator, GeneratorHandle, SynthGenerator};
use furnish_core::grid::{repair_grid, OccupancyGrid};
use furnish_core::measures::CellIndex;
use furnish_core::palette::{build_palette, load_catalog, load_embeddings, CategoryPalette, TsneParams};
use furnish_core::qd::dump::{read_archive, write_archive, write_metrics};
use furnish_core::qd::{evaluate, run_lsi, LsiResult};

use crate::config::{GeneratorConfig, RunConfig};
use crate::document::{to_json, ArrangementDoc, EvalDoc};
use crate::error::{CliError, CliResult};
use crate::render;

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn save_image(img: &image::RgbImage, path: &Path) -> CliResult<()> {
    img.save(path)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn load_palette(path: &Path) -> CliResult<CategoryPalette> {
    require_file(path, "palette file")?;
    Ok(CategoryPalette::read_csv(path)?)
}

#[derive(Clone, Debug)]
pub struct EmbedArgs {
    pub embeddings: PathBuf,
    pub prices: PathBuf,
    pub out: PathBuf,
    pub perplexity: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Embeddings + catalog → palette CSV.
pub fn embed(args: &EmbedArgs) -> CliResult<CategoryPalette> {
    require_file(&args.embeddings, "embeddings file")?;
    require_file(&args.prices, "price catalog")?;
    let table = load_embeddings(&args.embeddings)?;
    let catalog = load_catalog(&args.prices)?;
    let params = TsneParams {
        perplexity: args.perplexity,
        iterations: args.iterations,
        ..TsneParams::default()
    }
    .with_seed(args.seed);
    let palette = build_palette(&table, &catalog.prices, &catalog.aspects, &params)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    palette.write_csv(&args.out)?;
    log::info!("wrote {} categories to {}", palette.len(), args.out.display());
    Ok(palette)
}

#[derive(Clone, Debug)]
pub struct RepairOutputs {
    pub document: ArrangementDoc,
    pub json: PathBuf,
    pub annotated: PathBuf,
}

/// Grid PNG → arrangement JSON plus an outlined, upscaled view.
pub fn repair(
    grid_path: &Path,
    palette: &CategoryPalette,
    min_area: usize,
    out_dir: &Path,
    scale: u32,
) -> CliResult<RepairOutputs> {
    if min_area == 0 {
        return Err(CliError::validation("min_area must be at least 1"));
    }
    require_file(grid_path, "grid image")?;
    let grid = OccupancyGrid::read_png(grid_path)?;
    let arrangement = repair_grid(&grid, palette, min_area);
    let document = ArrangementDoc::new(&arrangement, palette, grid.width(), grid.height());

    create_dir(out_dir)?;
    let stem = grid_path
        .file_stem()
        .map_or("grid".into(), |s| s.to_string_lossy().into_owned());
    let json = out_dir.join(format!("{stem}.arrangement.json"));
    let annotated = out_dir.join(format!("{stem}.annotated.png"));
    write_text(&json, &to_json(&document))?;
    save_image(
        &render::annotated(&grid, &arrangement, palette.background(), scale),
        &annotated,
    )?;
    Ok(RepairOutputs {
        document,
        json,
        annotated,
    })
}

/// Starts the configured generator. Grids from an external process are
/// snapped to the palette by nearest color like any other input.
pub fn open_generator(cfg: &RunConfig, palette: &CategoryPalette) -> CliResult<GeneratorHandle> {
    Ok(match &cfg.generator {
        GeneratorConfig::Builtin(params) => {
            GeneratorHandle::Builtin(SynthGenerator::new(palette.clone(), params.clone())?)
        }
        GeneratorConfig::External { command, .. } => {
            GeneratorHandle::External(ExternalGenerator::spawn(command, cfg.timeout())?)
        }
    })
}

fn close_generator(gen: GeneratorHandle) {
    if let GeneratorHandle::External(g) = gen {
        if let Err(e) = g.shutdown() {
            log::warn!("generator shutdown: {e}");
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutputs {
    pub archive_csv: PathBuf,
    pub metrics_csv: PathBuf,
    pub heatmap: PathBuf,
}

pub fn search(cfg: &RunConfig) -> CliResult<(LsiResult, SearchOutputs)> {
    let palette = load_palette(&cfg.palette)?;
    let gen = open_generator(cfg, &palette)?;
    let result = run_lsi(&cfg.lsi(), &palette, &gen);
    close_generator(gen);
    let result = result?;

    create_dir(&cfg.output_dir)?;
    let out = SearchOutputs {
        archive_csv: cfg.output_dir.join("archive.csv"),
        metrics_csv: cfg.output_dir.join("metrics.csv"),
        heatmap: cfg.output_dir.join("heatmap.png"),
    };
    write_archive(&result.archive, &out.archive_csv)?;
    write_metrics(&result.metrics, &out.metrics_csv)?;
    save_image(&render::heatmap(&result.archive, cfg.heatmap_cell_px), &out.heatmap)?;
    Ok((result, out))
}

/// Accepts `[a, b, ...]` JSON or numbers separated by commas and/or whitespace.
pub fn parse_latent(text: &str) -> CliResult<Vec<f64>> {
    let text = text.trim();
    let values: Vec<f64> = if text.starts_with('[') {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("bad latent JSON: {e}")))?
    } else {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CliError::validation(format!("bad latent component {t:?}")))
            })
            .collect::<CliResult<_>>()?
    };
    if values.is_empty() {
        return Err(CliError::validation("latent vector is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::validation(format!("latent component {v} is not finite")));
    }
    Ok(values)
}

pub fn eval(cfg: &RunConfig, latent: &[f64]) -> CliResult<EvalDoc> {
    let palette = load_palette(&cfg.palette)?;
    let gen = open_generator(cfg, &palette)?;
    let doc = eval_with(&gen, &palette, cfg, latent);
    close_generator(gen);
    doc
}

fn eval_with(gen: &GeneratorHandle, palette: &CategoryPalette, cfg: &RunConfig, latent: &[f64]) -> CliResult<EvalDoc> {
    if latent.len() != gen.latent_dim() {
        return Err(CliError::validation(format!(
            "latent has {} components, generator expects {}",
            latent.len(),
            gen.latent_dim()
        )));
    }
    let ev = evaluate(latent, gen, palette, cfg.min_area, &cfg.archive)?;
    Ok(EvalDoc::new(latent, &ev, palette, gen.width(), gen.height()))
}

/// `"P,C"` → cell index.
pub fn parse_cell(text: &str) -> CliResult<CellIndex> {
    let bad = || CliError::validation(format!("cell must look like PRICE,COUNT, got {text:?}"));
    let (p, c) = text.split_once(',').ok_or_else(bad)?;
    Ok(CellIndex {
        price: p.trim().parse().map_err(|_| bad())?,
        count: c.trim().parse().map_err(|_| bad())?,
    })
}

#[derive(Clone, Debug)]
pub struct RenderOutputs {
    pub raw: PathBuf,
    pub repaired: PathBuf,
}

/// Regenerates one stored elite and writes its raw and repaired grids.
pub fn render(cfg: &RunConfig, archive_path: &Path, cell: CellIndex, out_dir: &Path) -> CliResult<RenderOutputs> {
    require_file(archive_path, "archive")?;
    let archive = read_archive(archive_path, cfg.archive)?;
    let cfg_archive = archive.config();
    if cell.price >= cfg_archive.price_bins || cell.count > cfg_archive.count_max {
        return Err(CliError::validation(format!(
            "cell ({}, {}) is outside the {}x{} archive",
            cell.price,
            cell.count,
            cfg_archive.price_bins,
            cfg_archive.count_bins()
        )));
    }
    let elite = archive
        .get(cell)
        .ok_or_else(|| CliError::validation(format!("cell ({}, {}) is empty", cell.price, cell.count)))?
        .clone();

    let palette = load_palette(&cfg.palette)?;
    let gen = open_generator(cfg, &palette)?;
    let grid = if elite.latent.len() != gen.latent_dim() {
        Err(CliError::validation(format!(
            "elite latent has {} components, generator expects {}",
            elite.latent.len(),
            gen.latent_dim()
        )))
    } else {
        gen.generate(&elite.latent).map_err(CliError::from)
    };
    close_generator(gen);
    let grid = grid?;
    let arrangement = repair_grid(&grid, &palette, cfg.min_area);
    let clean = OccupancyGrid::render_arrangement(grid.width(), grid.height(), &arrangement, &palette);

    create_dir(out_dir)?;
    let stem = format!("elite_p{}_c{}", cell.price, cell.count);
    let out = RenderOutputs {
        raw: out_dir.join(format!("{stem}_raw.png")),
        repaired: out_dir.join(format!("{stem}_repaired.png")),
    };
    grid.write_png(&out.raw)?;
    clean.write_png(&out.repaired)?;
    Ok(out)
}
