//! Archive heatmaps and outlined arrangement views.

use furnish_core::grid::{Arrangement, OccupancyGrid};
use furnish_core::qd::Archive;
use furnish_core::Rgb;
use image::RgbImage;

/// Color of cells no elite has reached.
pub const EMPTY_CELL: Rgb = Rgb([236, 236, 236]);

const OVERLAP_OUTLINE: Rgb = Rgb([255, 0, 0]);

/// Viridis anchors, low to high.
const RAMP: [[u8; 3]; 5] = [
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
];

/// Position `t` in [0, 1] along the ramp, linearly interpolated.
pub fn ramp(t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    Rgb(std::array::from_fn(|c| {
        (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8
    }))
}

/// Price index along x, count index along y with count 0 at the bottom.
/// Cell color is linear in objective from the worst stored elite (dark) to
/// 0 (bright); empty cells get `EMPTY_CELL`.
pub fn heatmap(archive: &Archive, cell_px: u32) -> RgbImage {
    let cfg = archive.config();
    let cols = cfg.price_bins as u32;
    let rows = cfg.count_bins() as u32;
    let worst = archive.elites().map(|e| e.objective).fold(0.0f64, f64::min);
    let mut img = RgbImage::from_pixel(cols * cell_px, rows * cell_px, image::Rgb(EMPTY_CELL.0));
    for e in archive.elites() {
        let t = if worst < 0.0 {
            (e.objective - worst) / -worst
        } else {
            1.0
        };
        let color = image::Rgb(ramp(t).0);
        let x0 = e.cell.price as u32 * cell_px;
        let y0 = (rows - 1 - e.cell.count as u32) * cell_px;
        for y in y0..y0 + cell_px {
            for x in x0..x0 + cell_px {
                img.put_pixel(x, y, color);
            }
        }
    }
    img
}

/// The grid scaled up by `scale` with each placement outlined. Outlines are
/// the inverse of the floor color, or red for rectangles in an overlap pair.
pub fn annotated(grid: &OccupancyGrid, arrangement: &Arrangement, background: Rgb, scale: u32) -> RgbImage {
    let scale = scale.max(1);
    let (w, h) = (grid.width() as u32, grid.height() as u32);
    let mut img = RgbImage::from_fn(w * scale, h * scale, |x, y| {
        image::Rgb(grid.get((x / scale) as usize, (y / scale) as usize).0)
    });
    let plain = Rgb(background.0.map(|c| 255 - c));
    for (i, p) in arrangement.placements.iter().enumerate() {
        let overlapping = arrangement.overlap_pairs.iter().any(|&(a, b)| a == i || b == i);
        let color = image::Rgb(if overlapping { OVERLAP_OUTLINE } else { plain }.0);
        let x0 = p.rect.x as u32 * scale;
        let y0 = p.rect.y as u32 * scale;
        let x1 = (p.rect.x + p.rect.w) as u32 * scale - 1;
        let y1 = (p.rect.y + p.rect.h) as u32 * scale - 1;
        for x in x0..=x1 {
            img.put_pixel(x, y0, color);
            img.put_pixel(x, y1, color);
        }
        for y in y0..=y1 {
            img.put_pixel(x0, y, color);
            img.put_pixel(x1, y, color);
        }
    }
    img
}
