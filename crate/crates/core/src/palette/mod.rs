//! Semantic color palette: categories get RGB codes from a 3D t-SNE
//! embedding of their name embeddings, so related furniture gets related
//! colors.

pub mod embeddings;
pub mod tsne;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::Rgb;
use crate::error::{Error, Result};

pub use embeddings::{load_embeddings, EmbeddingTable};
pub use tsne::{tsne_reduce, Point3, TsneParams};

/// Minimum Euclidean RGB distance between any two palette colors.
pub const DEFAULT_MIN_SEPARATION: f64 = 20.0;
/// Number of reseeded t-SNE runs tried after the first one fails separation.
pub const SEPARATION_RETRIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Background,
    Category(usize),
}

impl Label {
    pub fn category(self) -> Option<usize> {
        match self {
            Label::Background => None,
            Label::Category(id) => Some(id),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryEntry {
    pub id: usize,
    pub name: String,
    pub color: Rgb,
    pub unit_price: f64,
    pub default_aspect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryPalette {
    categories: Vec<CategoryEntry>,
    background: Rgb,
}

impl CategoryPalette {
    /// Builds a palette and checks every invariant against `DEFAULT_MIN_SEPARATION`.
    pub fn new(categories: Vec<CategoryEntry>, background: Rgb) -> Result<Self> {
        let palette = CategoryPalette { categories, background };
        palette.validate(DEFAULT_MIN_SEPARATION)?;
        Ok(palette)
    }

    pub fn validate(&self, min_separation: f64) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::InvalidPalette("no categories".into()));
        }
        for (i, c) in self.categories.iter().enumerate() {
            if c.id != i {
                return Err(Error::InvalidPalette(format!(
                    "category {:?} has id {}, expected {i}",
                    c.name, c.id
                )));
            }
            if !(c.unit_price >= 0.0) || !c.unit_price.is_finite() {
                return Err(Error::InvalidPalette(format!(
                    "{}: negative or non-finite price",
                    c.name
                )));
            }
            if !(c.default_aspect > 0.0) || !c.default_aspect.is_finite() {
                return Err(Error::InvalidPalette(format!("{}: aspect must be positive", c.name)));
            }
        }
        if let Some((a, b, d)) = closest_pair(&self.colors()) {
            if d < min_separation {
                return Err(Error::InvalidPalette(format!(
                    "colors of {:?} and {:?} are {d:.3} apart (minimum {min_separation})",
                    self.categories[a].name, self.categories[b].name
                )));
            }
        }
        for c in &self.categories {
            let d = c.color.dist(self.background);
            if d < min_separation {
                return Err(Error::InvalidPalette(format!(
                    "color of {:?} is {d:.3} from the background (minimum {min_separation})",
                    c.name
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[CategoryEntry] {
        &self.categories
    }

    pub fn get(&self, id: usize) -> Option<&CategoryEntry> {
        self.categories.get(id)
    }

    pub fn background(&self) -> Rgb {
        self.background
    }

    pub fn color(&self, label: Label) -> Rgb {
        match label {
            Label::Background => self.background,
            Label::Category(id) => self.categories[id].color,
        }
    }

    pub fn colors(&self) -> Vec<Rgb> {
        self.categories.iter().map(|c| c.color).collect()
    }

    /// Label nearest to `pixel`; ties go to the background, then to the lowest id.
    pub fn nearest(&self, pixel: Rgb) -> (Label, u32) {
        let mut best = (Label::Background, pixel.dist2(self.background));
        for c in &self.categories {
            let d2 = pixel.dist2(c.color);
            if d2 < best.1 {
                best = (Label::Category(c.id), d2);
            }
        }
        best
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "name", "r", "g", "b", "unit_price", "default_aspect"])
            .expect("in-memory write");
        for c in &self.categories {
            let [r, g, b] = c.color.0;
            w.write_record([
                c.id.to_string(),
                c.name.clone(),
                r.to_string(),
                g.to_string(),
                b.to_string(),
                c.unit_price.to_string(),
                c.default_aspect.to_string(),
            ])
            .expect("in-memory write");
        }
        let [r, g, b] = self.background.0;
        w.write_record([
            "BACKGROUND".to_string(),
            String::new(),
            r.to_string(),
            g.to_string(),
            b.to_string(),
            String::new(),
            String::new(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text).map_err(|(row, msg)| Error::Parse {
            path: path.to_path_buf(),
            row,
            msg,
        })
    }

    /// Parses palette CSV text; errors carry the 1-based row number.
    pub fn parse_csv(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| (1, e.to_string()))?.clone();
        let expected = ["id", "name", "r", "g", "b", "unit_price", "default_aspect"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err((1, format!("expected header {}", expected.join(","))));
        }
        let mut categories = Vec::new();
        let mut background = None;
        for (idx, rec) in reader.records().enumerate() {
            let row = idx + 2;
            let rec = rec.map_err(|e| (row, e.to_string()))?;
            if background.is_some() {
                return Err((row, "rows after BACKGROUND".into()));
            }
            let channel = |k: usize| -> std::result::Result<u8, (usize, String)> {
                rec[k]
                    .trim()
                    .parse::<u8>()
                    .map_err(|_| (row, format!("bad channel value {:?}", &rec[k])))
            };
            let color = Rgb([channel(2)?, channel(3)?, channel(4)?]);
            if &rec[0] == "BACKGROUND" {
                background = Some(color);
                continue;
            }
            let num = |k: usize| -> std::result::Result<f64, (usize, String)> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| (row, format!("bad number {:?}", &rec[k])))
            };
            let id = rec[0]
                .trim()
                .parse::<usize>()
                .map_err(|_| (row, format!("bad id {:?}", &rec[0])))?;
            categories.push(CategoryEntry {
                id,
                name: rec[1].to_string(),
                color,
                unit_price: num(5)?,
                default_aspect: num(6)?,
            });
        }
        let background = background.ok_or((categories.len() + 2, "missing BACKGROUND row".to_string()))?;
        let palette = CategoryPalette { categories, background };
        palette
            .validate(DEFAULT_MIN_SEPARATION)
            .map_err(|e| (0, e.to_string()))?;
        Ok(palette)
    }
}

/// `nearest_category` as a free function returning the Euclidean distance.
pub fn nearest_category(pixel: Rgb, palette: &CategoryPalette) -> (Label, f64) {
    let (label, d2) = palette.nearest(pixel);
    (label, (d2 as f64).sqrt())
}

fn closest_pair(colors: &[Rgb]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, u32)> = None;
    for i in 0..colors.len() {
        for j in (i + 1)..colors.len() {
            let d = colors[i].dist2(colors[j]);
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best.map(|(i, j, d)| (i, j, (d as f64).sqrt()))
}

/// Min-max scales each channel independently onto 0..=255, rounding half up.
/// A channel with zero range maps to 0.
pub fn scale_to_rgb(points: &[Point3]) -> Vec<Rgb> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    points
        .iter()
        .map(|p| {
            let mut c = [0u8; 3];
            for d in 0..3 {
                let range = hi[d] - lo[d];
                if range > 0.0 {
                    let v = (p[d] - lo[d]) / range * 255.0;
                    c[d] = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
                }
            }
            Rgb(c)
        })
        .collect()
}

/// Unit price and canonical footprint aspect per category name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Catalog {
    pub prices: HashMap<String, f64>,
    pub aspects: HashMap<String, f64>,
}

/// Reads a `name,unit_price,default_aspect` CSV.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let perr = |row: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        msg,
    };
    let headers = reader.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if headers.iter().ne(["name", "unit_price", "default_aspect"]) {
        return Err(perr(1, "expected header name,unit_price,default_aspect".into()));
    }
    let mut catalog = Catalog::default();
    for (idx, rec) in reader.records().enumerate() {
        let row = idx + 2;
        let rec = rec.map_err(|e| perr(row, e.to_string()))?;
        let name = rec[0].trim().to_string();
        let price: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| perr(row, format!("bad unit_price {:?}", &rec[1])))?;
        let aspect: f64 = rec[2]
            .trim()
            .parse()
            .map_err(|_| perr(row, format!("bad default_aspect {:?}", &rec[2])))?;
        if !(price >= 0.0) || !price.is_finite() {
            return Err(perr(row, "unit_price must be non-negative".into()));
        }
        if !(aspect > 0.0) || !aspect.is_finite() {
            return Err(perr(row, "default_aspect must be positive".into()));
        }
        if catalog.prices.insert(name.clone(), price).is_some() {
            return Err(perr(row, format!("duplicate name {name:?}")));
        }
        catalog.aspects.insert(name, aspect);
    }
    Ok(catalog)
}

/// Runs t-SNE and RGB scaling, then picks a background and checks separation,
/// reseeding the embedding up to `SEPARATION_RETRIES` times.
pub fn build_palette(
    table: &EmbeddingTable,
    prices: &HashMap<String, f64>,
    aspects: &HashMap<String, f64>,
    params: &TsneParams,
) -> Result<CategoryPalette> {
    build_palette_with_separation(table, prices, aspects, params, DEFAULT_MIN_SEPARATION)
}

pub fn build_palette_with_separation(
    table: &EmbeddingTable,
    prices: &HashMap<String, f64>,
    aspects: &HashMap<String, f64>,
    params: &TsneParams,
    min_separation: f64,
) -> Result<CategoryPalette> {
    let mut entries = Vec::with_capacity(table.len());
    for (id, name) in table.names().iter().enumerate() {
        let price = *prices.get(name).ok_or_else(|| Error::MissingPrice(name.clone()))?;
        let aspect = *aspects.get(name).ok_or_else(|| Error::MissingAspect(name.clone()))?;
        entries.push(CategoryEntry {
            id,
            name: name.clone(),
            color: Rgb::BLACK,
            unit_price: price,
            default_aspect: aspect,
        });
    }

    for attempt in 0..=SEPARATION_RETRIES {
        let seeded = params.clone().with_seed(params.seed.wrapping_add(attempt as u64));
        let colors = scale_to_rgb(&tsne_reduce(table, &seeded)?);
        let separated = closest_pair(&colors).is_none_or(|(_, _, d)| d >= min_separation);
        if !separated {
            log::debug!("palette attempt {attempt}: colors too close, reseeding");
            continue;
        }
        let clear_of = |bg: Rgb| colors.iter().all(|c| c.dist(bg) >= min_separation);
        let background = if clear_of(Rgb::BLACK) {
            Rgb::BLACK
        } else if clear_of(Rgb::WHITE) {
            Rgb::WHITE
        } else {
            log::debug!("palette attempt {attempt}: no free background color, reseeding");
            continue;
        };
        for (e, c) in entries.iter_mut().zip(colors) {
            e.color = c;
        }
        let palette = CategoryPalette {
            categories: entries,
            background,
        };
        palette.validate(min_separation)?;
        return Ok(palette);
    }
    Err(Error::Separation {
        min_distance: min_separation,
        attempts: SEPARATION_RETRIES + 1,
    })
}
