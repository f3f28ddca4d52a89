#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use furnish_core::grid::{OccupancyGrid, Rect};
use furnish_core::palette::{CategoryEntry, CategoryPalette};
use furnish_core::Rgb;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FURNISH: &str = env!("CARGO_BIN_EXE_furnish");
pub const MOCK_ADAPTER: &str = env!("CARGO_BIN_EXE_furnish-mock-adapter");

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn palette() -> CategoryPalette {
    CategoryPalette::read_csv(data_dir().join("palette.csv")).unwrap()
}

pub fn furnish(args: &[&str]) -> Output {
    Command::new(FURNISH)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("furnish runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[track_caller]
pub fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

/// Compares `actual` with a checked-in golden file. Set
/// `FURNISH_UPDATE_GOLDEN=1` to rewrite it instead.
#[track_caller]
pub fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("FURNISH_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

/// A config file in `dir` pointing at the bundled palette. `extra` is
/// appended verbatim and may add keys or tables.
pub fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let palette = data_dir().join("palette.csv").canonicalize().unwrap();
    let text = format!(
        "palette = {:?}\noutput_dir = \"out\"\n{extra}\n",
        palette.to_string_lossy()
    );
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Four well-separated colors on a black floor.
pub fn small_palette() -> CategoryPalette {
    let colors = [[220, 40, 40], [40, 200, 60], [50, 60, 230], [210, 200, 30]];
    let prices = [100.0, 250.0, 900.0, 40.0];
    let aspects = [1.5, 0.5, 1.0, 3.0];
    let cats = (0..4)
        .map(|id| CategoryEntry {
            id,
            name: format!("cat{id}"),
            color: Rgb(colors[id]),
            unit_price: prices[id],
            default_aspect: aspects[id],
        })
        .collect();
    CategoryPalette::new(cats, Rgb::BLACK).unwrap()
}

/// A 16x12 room: five pieces (two of them overlapping), a speck below the
/// area threshold, per-pixel noise and a few foreign colors.
pub fn noisy_room(palette: &CategoryPalette) -> OccupancyGrid {
    let mut g = OccupancyGrid::filled(16, 12, palette.background());
    let pieces = [
        (0, Rect::new(1, 1, 5, 3)),
        (1, Rect::new(9, 1, 2, 6)),
        (2, Rect::new(2, 5, 6, 5)),
        (3, Rect::new(6, 7, 6, 2)),
        (0, Rect::new(12, 8, 3, 3)),
        (1, Rect::new(14, 0, 1, 2)),
    ];
    for (cat, r) in pieces {
        g.fill_rect(r, palette.categories()[cat].color);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for y in 0..12 {
        for x in 0..16 {
            let mut c = g.get(x, y).0;
            if rng.random::<f64>() < 0.03 {
                c = [rng.random(), rng.random(), rng.random()];
            } else {
                for ch in &mut c {
                    *ch = (*ch as i32 + rng.random_range(-18..=18)).clamp(0, 255) as u8;
                }
            }
            g.set(x, y, Rgb(c));
        }
    }
    g
}

/// Euclidean RGB distance in 1/65536 units, rounded once.
pub fn oracle_cost(a: Rgb, b: Rgb) -> i64 {
    let d2: i64 = (0..3).map(|i| (a.0[i] as i64 - b.0[i] as i64).pow(2)).sum();
    ((d2 as f64).sqrt() * 65536.0).round() as i64
}

/// Nearest label by exact squared distance; `None` is background. Ties
/// prefer background, then the lower id.
pub fn oracle_label(p: Rgb, palette: &CategoryPalette) -> Option<usize> {
    let d2 = |c: Rgb| -> i64 { (0..3).map(|i| (p.0[i] as i64 - c.0[i] as i64).pow(2)).sum() };
    let mut best = (d2(palette.background()), None);
    for (id, cat) in palette.categories().iter().enumerate() {
        let d = d2(cat.color);
        if d < best.0 {
            best = (d, Some(id));
        }
    }
    best.1
}

/// 4-connected components of `cat`, each a sorted pixel-index list.
pub fn oracle_components(grid: &OccupancyGrid, palette: &CategoryPalette, cat: usize) -> Vec<Vec<usize>> {
    let (w, h) = (grid.width(), grid.height());
    let labels: Vec<Option<usize>> = grid.pixels().iter().map(|&p| oracle_label(p, palette)).collect();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if seen[start] || labels[start] != Some(cat) {
            continue;
        }
        let mut comp = vec![];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (x, y) = (i % w, i / w);
            let nbrs = [
                (x > 0).then(|| i - 1),
                (x + 1 < w).then(|| i + 1),
                (y > 0).then(|| i - w),
                (y + 1 < h).then(|| i + w),
            ];
            for n in nbrs.into_iter().flatten() {
                if !seen[n] && labels[n] == Some(cat) {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

type TieKey = (i64, usize, usize, usize, usize);

/// Best rectangle for a component over every rectangle in the grid; ties go
/// to smaller area, then y, x, w.
pub fn oracle_fit(grid: &OccupancyGrid, palette: &CategoryPalette, cat: usize, comp: &[usize]) -> (Rect, i64) {
    let (w, h) = (grid.width(), grid.height());
    let color = palette.categories()[cat].color;
    let bg = palette.background();
    // (score, area, y, x, w) orders candidates exactly like the tie-break
    let mut best: Option<(TieKey, Rect)> = None;
    for y in 0..h {
        for x in 0..w {
            for rh in 1..=h - y {
                for rw in 1..=w - x {
                    let r = Rect::new(x, y, rw, rh);
                    let mut score = 0i64;
                    for yy in y..y + rh {
                        for xx in x..x + rw {
                            score += oracle_cost(grid.get(xx, yy), color);
                        }
                    }
                    for &i in comp {
                        if !r.contains(i % w, i / w) {
                            score += oracle_cost(grid.pixels()[i], bg);
                        }
                    }
                    let key = (score, rw * rh, y, x, rw);
                    if best.as_ref().is_none_or(|(k, _)| key < *k) {
                        best = Some((key, r));
                    }
                }
            }
        }
    }
    let (key, rect) = best.unwrap();
    (rect, key.0)
}

#[derive(Debug, PartialEq)]
pub struct OraclePlacement {
    pub category_id: usize,
    pub rect: Rect,
    pub score: i64,
    pub orientation: u32,
}

/// Whole-grid repair from first principles: fit every component, drop fits
/// under `min_area`, charge dropped pixels no kept rectangle covers.
pub fn oracle_repair(grid: &OccupancyGrid, palette: &CategoryPalette, min_area: usize) -> (Vec<OraclePlacement>, i64) {
    let w = grid.width();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for cat in 0..palette.len() {
        for comp in oracle_components(grid, palette, cat) {
            let (rect, score) = oracle_fit(grid, palette, cat, &comp);
            if rect.w * rect.h >= min_area {
                let aspect = palette.categories()[cat].default_aspect;
                let (fw, fh) = (rect.w as f64, rect.h as f64);
                let upright = (fw / fh - aspect).abs() <= (fh / fw - aspect).abs();
                kept.push(OraclePlacement {
                    category_id: cat,
                    rect,
                    score,
                    orientation: if upright { 0 } else { 90 },
                });
            } else {
                dropped.extend(comp);
            }
        }
    }
    kept.sort_by_key(|p| (p.category_id, p.rect.y, p.rect.x, p.rect.w, p.rect.h));
    let mut total: i64 = kept.iter().map(|p| p.score).sum();
    for i in dropped {
        if !kept.iter().any(|p| p.rect.contains(i % w, i / w)) {
            total += oracle_cost(grid.pixels()[i], palette.background());
        }
    }
    (kept, total)
}

/// Random rectangles of palette colors, then per-pixel noise and a few
/// arbitrary colors.
pub fn random_grid(w: usize, h: usize, seed: u64, palette: &CategoryPalette) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = OccupancyGrid::filled(w, h, palette.background());
    for _ in 0..rng.random_range(0..6) {
        let rw = rng.random_range(1..=w);
        let rh = rng.random_range(1..=h);
        let x = rng.random_range(0..=w - rw);
        let y = rng.random_range(0..=h - rh);
        let c = palette.categories()[rng.random_range(0..palette.len())].color;
        g.fill_rect(Rect::new(x, y, rw, rh), c);
    }
    let noise = rng.random_range(0..=60i32);
    for y in 0..h {
        for x in 0..w {
            let roll: f64 = rng.random();
            let mut c = g.get(x, y).0;
            if roll < 0.08 {
                c = [rng.random(), rng.random(), rng.random()];
            } else if roll < 0.6 && noise > 0 {
                for ch in &mut c {
                    *ch = (*ch as i32 + rng.random_range(-noise..=noise)).clamp(0, 255) as u8;
                }
            }
            g.set(x, y, Rgb(c));
        }
    }
    g
}

/// Gaussian noise of the given std on every channel, rounded half up and
/// clamped to [0, 255].
pub fn add_noise<R: Rng>(grid: &OccupancyGrid, std: f64, rng: &mut R) -> OccupancyGrid {
    let normal = rand_distr::Normal::new(0.0, std).unwrap();
    let mut out = grid.clone();
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            let c = grid
                .get(x, y)
                .0
                .map(|v| (v as f64 + rng.sample(normal) + 0.5).floor().clamp(0.0, 255.0) as u8);
            out.set(x, y, Rgb(c));
        }
    }
    out
}
