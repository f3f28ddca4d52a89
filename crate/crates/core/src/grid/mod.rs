//! Occupancy grids and their repair into rectangular furniture placements.

pub mod cost;
pub mod repair;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::Rgb;
use crate::error::{Error, Result};
use crate::palette::CategoryPalette;

pub use cost::Cost;
pub use repair::{
    best_rectangle, connected_components, infer_orientation, label_pixels, repair_grid, sweep_rectangle, Arrangement,
    Component, FurniturePlacement, Labeling, Orientation, SweepFit,
};

pub const DEFAULT_GRID_SIZE: usize = 64;
pub const DEFAULT_MIN_AREA: usize = 4;

/// Row-major RGB raster; each pixel is one floor cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl OccupancyGrid {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        assert!(width >= 1 && height >= 1, "grid must be at least 1x1");
        OccupancyGrid {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::GridSize {
                expected_w: width,
                expected_h: height,
                got_w: pixels.len(),
                got_h: 1,
            });
        }
        Ok(OccupancyGrid { width, height, pixels })
    }

    /// Builds a grid from packed RGB8 bytes.
    pub fn from_rgb_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::External(format!(
                "pixel buffer holds {} bytes, expected {}",
                bytes.len(),
                width * height * 3
            )));
        }
        let pixels = bytes.chunks_exact(3).map(|c| Rgb([c[0], c[1], c[2]])).collect();
        Self::from_pixels(width, height, pixels)
    }

    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.0).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    pub fn fill_rect(&mut self, rect: Rect, c: Rgb) {
        for y in rect.y..rect.y + rect.h {
            let row = y * self.width;
            self.pixels[row + rect.x..row + rect.x + rect.w].fill(c);
        }
    }

    /// Paints every placement with its exact category color on a clean background.
    pub fn render_arrangement(
        width: usize,
        height: usize,
        arrangement: &Arrangement,
        palette: &CategoryPalette,
    ) -> Self {
        let mut grid = Self::filled(width, height, palette.background());
        for p in &arrangement.placements {
            grid.fill_rect(p.rect, palette.categories()[p.category_id].color);
        }
        grid
    }

    pub fn read_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let image::DynamicImage::ImageRgb8(rgb) = img else {
            return Err(Error::Image {
                path: path.to_path_buf(),
                msg: format!("RGB8 required, found {:?}", img.color()),
            });
        };
        let (w, h) = rgb.dimensions();
        Self::from_rgb_bytes(w as usize, h as usize, rgb.as_raw())
    }

    pub fn to_image(&self) -> image::RgbImage {
        image::RgbImage::from_raw(self.width as u32, self.height as u32, self.to_rgb_bytes())
            .expect("buffer matches dimensions")
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_image().save(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }
}

/// Axis-aligned cell rectangle: columns `x..x+w`, rows `y..y+h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    pub fn intersection_area(&self, other: &Rect) -> usize {
        let x0 = self.x.max(other.x);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y0 = self.y.max(other.y);
        let y1 = (self.y + self.h).min(other.y + other.h);
        x1.saturating_sub(x0) * y1.saturating_sub(y0)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.intersection_area(other) > 0
    }

    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        inter as f64 / union as f64
    }
}
