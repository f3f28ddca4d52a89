#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use furnish_core::generator::SynthParams;
use furnish_core::grid::{OccupancyGrid, Rect};
use furnish_core::palette::{
    build_palette, load_catalog, load_embeddings, CategoryEntry, CategoryPalette, EmbeddingTable, TsneParams,
};
use furnish_core::Rgb;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn embeddings() -> &'static EmbeddingTable {
    static TABLE: OnceLock<EmbeddingTable> = OnceLock::new();
    TABLE.get_or_init(|| load_embeddings(data_dir().join("embeddings.csv")).unwrap())
}

/// The 25-category palette built from the bundled data with default t-SNE settings.
pub fn palette() -> &'static CategoryPalette {
    static PALETTE: OnceLock<CategoryPalette> = OnceLock::new();
    PALETTE.get_or_init(|| {
        let catalog = load_catalog(data_dir().join("catalog.csv")).unwrap();
        build_palette(embeddings(), &catalog.prices, &catalog.aspects, &TsneParams::default()).unwrap()
    })
}

/// Four well-separated colors on a black floor.
pub fn small_palette() -> CategoryPalette {
    let colors = [[220, 40, 40], [40, 200, 60], [50, 60, 230], [210, 200, 30]];
    let prices = [100.0, 250.0, 900.0, 40.0];
    let cats = colors
        .iter()
        .zip(prices)
        .enumerate()
        .map(|(id, (&c, unit_price))| CategoryEntry {
            id,
            name: format!("cat{id}"),
            color: Rgb(c),
            unit_price,
            default_aspect: 1.5,
        })
        .collect();
    CategoryPalette::new(cats, Rgb::BLACK).unwrap()
}

pub fn synth_params() -> SynthParams {
    SynthParams::default()
}

/// Euclidean RGB distance in 1/65536 units, rounded once. Written from
/// scratch rather than calling into the library.
pub fn oracle_cost(a: Rgb, b: Rgb) -> i64 {
    let d2: i64 = (0..3).map(|i| (a.0[i] as i64 - b.0[i] as i64).pow(2)).sum();
    ((d2 as f64).sqrt() * 65536.0).round() as i64
}

/// Nearest label by exact squared distance; `None` is background.
/// Ties prefer background, then the lower id.
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

/// 4-connected components of `cat` under the oracle labeling, each as a
/// sorted pixel list, ordered by first pixel.
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
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            let (x, y) = (i % w, i / w);
            let mut nbrs = vec![];
            if x > 0 {
                nbrs.push(i - 1);
            }
            if x + 1 < w {
                nbrs.push(i + 1);
            }
            if y > 0 {
                nbrs.push(i - w);
            }
            if y + 1 < h {
                nbrs.push(i + w);
            }
            for n in nbrs {
                if !seen[n] && labels[n] == Some(cat) {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
