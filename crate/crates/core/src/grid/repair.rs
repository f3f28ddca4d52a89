use serde::{Deserialize, Serialize};

use super::cost::{color_cost, Cost};
use super::{OccupancyGrid, Rect};
use crate::palette::{CategoryPalette, Label};

#[derive(Clone, Debug, PartialEq)]
pub struct Labeling {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Label>,
    pub distances: Vec<f64>,
}

impl Labeling {
    pub fn label(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }
}

/// Labels every pixel with its nearest palette entry.
pub fn label_pixels(grid: &OccupancyGrid, palette: &CategoryPalette) -> Labeling {
    let (labels, distances) = grid
        .pixels()
        .iter()
        .map(|&p| {
            let (label, d2) = palette.nearest(p);
            (label, (d2 as f64).sqrt())
        })
        .unzip();
    Labeling {
        width: grid.width(),
        height: grid.height(),
        labels,
        distances,
    }
}

/// A 4-connected region of equally labeled pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub category_id: usize,
    /// Row-major pixel indices, sorted.
    pub pixels: Vec<usize>,
    pub bbox: Rect,
}

/// 4-connected components of `category_id`, ordered by their first pixel in
/// row-major order.
pub fn connected_components(labeling: &Labeling, category_id: usize) -> Vec<Component> {
    let (w, h) = (labeling.width, labeling.height);
    let target = Label::Category(category_id);
    let mut visited = vec![false; w * h];
    let mut stack = Vec::new();
    let mut out = Vec::new();

    for seed in 0..w * h {
        if visited[seed] || labeling.labels[seed] != target {
            continue;
        }
        visited[seed] = true;
        stack.push(seed);
        let mut pixels = Vec::new();
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        while let Some(i) = stack.pop() {
            pixels.push(i);
            let (x, y) = (i % w, i / w);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
            let mut visit = |j: usize| {
                if !visited[j] && labeling.labels[j] == target {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        pixels.sort_unstable();
        out.push(Component {
            category_id,
            pixels,
            bbox: Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
        });
    }
    out
}

/// Best rectangle for one component, before the area filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepFit {
    pub rect: Rect,
    pub score: Cost,
}

/// Searches every rectangle inside the component's bounding box for the one
/// minimizing: recolor cost of all pixels inside it to the category color,
/// plus erase cost (distance to background) of component pixels left
/// outside. Ties go to the smaller area, then the top-most, then the
/// left-most, then the narrower rectangle.
pub fn best_rectangle(grid: &OccupancyGrid, component: &Component, palette: &CategoryPalette) -> SweepFit {
    assert!(!component.pixels.is_empty(), "component must be nonempty");
    let color = palette.categories()[component.category_id].color;
    let bg = palette.background();
    let Rect {
        x: bx,
        y: by,
        w: bw,
        h: bh,
    } = component.bbox;
    let gw = grid.width();

    // Per-cell delta = recolor - erase, so score(R) = erase_total + Σ_R delta.
    let mut delta = vec![0i64; bw * bh];
    for y in 0..bh {
        for x in 0..bw {
            delta[y * bw + x] = color_cost(grid.get(bx + x, by + y), color).0;
        }
    }
    let mut erase_total = Cost::ZERO;
    for &i in &component.pixels {
        let (x, y) = (i % gw - bx, i / gw - by);
        let erase = color_cost(grid.pixels()[i], bg);
        delta[y * bw + x] -= erase.0;
        erase_total += erase;
    }

    // Column prefix sums over rows: prefix[r][x] = Σ_{rows < r} delta[row][x].
    let mut prefix = vec![0i64; (bh + 1) * bw];
    for y in 0..bh {
        for x in 0..bw {
            prefix[(y + 1) * bw + x] = prefix[y * bw + x] + delta[y * bw + x];
        }
    }

    let mut best = (i64::MAX, usize::MAX, usize::MAX, usize::MAX, usize::MAX);
    let mut band = vec![0i64; bw + 1];
    for y0 in 0..bh {
        for y1 in y0..bh {
            let h = y1 - y0 + 1;
            // band[x] = Σ_{columns < x} of rows y0..=y1
            for x in 0..bw {
                band[x + 1] = band[x] + prefix[(y1 + 1) * bw + x] - prefix[y0 * bw + x];
            }
            for x0 in 0..bw {
                for x1 in x0..bw {
                    let w = x1 - x0 + 1;
                    let s = band[x1 + 1] - band[x0];
                    let key = (s, w * h, by + y0, bx + x0, w);
                    if key < best {
                        best = key;
                    }
                }
            }
        }
    }
    let (s, area, y, x, w) = best;
    SweepFit {
        rect: Rect::new(x, y, w, area / w),
        score: erase_total + Cost(s),
    }
}

/// `best_rectangle` followed by the minimum-area noise filter.
pub fn sweep_rectangle(
    grid: &OccupancyGrid,
    component: &Component,
    palette: &CategoryPalette,
    min_area: usize,
) -> Option<SweepFit> {
    let fit = best_rectangle(grid, component, palette);
    (fit.rect.area() >= min_area).then_some(fit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "0")]
    Deg0,
    #[serde(rename = "90")]
    Deg90,
}

impl Orientation {
    pub fn degrees(self) -> u32 {
        match self {
            Orientation::Deg0 => 0,
            Orientation::Deg90 => 90,
        }
    }
}

/// 0° when the rectangle's width/height ratio is at least as close to the
/// category's canonical aspect as the transposed ratio.
pub fn infer_orientation(rect: Rect, default_aspect: f64) -> Orientation {
    let (w, h) = (rect.w as f64, rect.h as f64);
    if (w / h - default_aspect).abs() <= (h / w - default_aspect).abs() {
        Orientation::Deg0
    } else {
        Orientation::Deg90
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FurniturePlacement {
    pub category_id: usize,
    pub rect: Rect,
    pub orientation: Orientation,
    pub fit_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrangement {
    pub placements: Vec<FurniturePlacement>,
    pub repair_cost: f64,
    pub overlap_pairs: Vec<(usize, usize)>,
}

impl Arrangement {
    pub fn empty() -> Self {
        Arrangement {
            placements: Vec::new(),
            repair_cost: 0.0,
            overlap_pairs: Vec::new(),
        }
    }
}

/// Converts a grid into one rectangle per sufficiently large component.
///
/// The repair cost sums each accepted component's sweep score plus the
/// erase cost of pixels from filtered components that no accepted rectangle
/// covers. Placements are sorted by (category, y, x).
pub fn repair_grid(grid: &OccupancyGrid, palette: &CategoryPalette, min_area: usize) -> Arrangement {
    let labeling = label_pixels(grid, palette);
    let mut fits: Vec<(usize, SweepFit)> = Vec::new();
    let mut filtered: Vec<usize> = Vec::new();

    for category in 0..palette.len() {
        for comp in connected_components(&labeling, category) {
            match sweep_rectangle(grid, &comp, palette, min_area) {
                Some(fit) => fits.push((category, fit)),
                None => filtered.extend_from_slice(&comp.pixels),
            }
        }
    }
    fits.sort_by_key(|(c, f)| (*c, f.rect.y, f.rect.x, f.rect.w, f.rect.h));

    let mut total: Cost = fits.iter().map(|(_, f)| f.score).sum();
    let w = grid.width();
    let bg = palette.background();
    for i in filtered {
        let (x, y) = (i % w, i / w);
        if !fits.iter().any(|(_, f)| f.rect.contains(x, y)) {
            total += color_cost(grid.pixels()[i], bg);
        }
    }

    let mut overlap_pairs = Vec::new();
    for i in 0..fits.len() {
        for j in (i + 1)..fits.len() {
            if fits[i].1.rect.intersects(&fits[j].1.rect) {
                overlap_pairs.push((i, j));
            }
        }
    }

    let placements = fits
        .into_iter()
        .map(|(category_id, fit)| FurniturePlacement {
            category_id,
            rect: fit.rect,
            orientation: infer_orientation(fit.rect, palette.categories()[category_id].default_aspect),
            fit_cost: fit.score.to_f64(),
        })
        .collect();

    Arrangement {
        placements,
        repair_cost: total.to_f64(),
        overlap_pairs,
    }
}
