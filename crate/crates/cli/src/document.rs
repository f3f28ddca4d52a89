//! JSON documents written by `repair` and printed by `eval`.

use furnish_core::grid::Arrangement;
use furnish_core::palette::CategoryPalette;
use furnish_core::qd::Evaluation;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementDoc {
    pub category_id: usize,
    pub name: String,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub orientation: u32,
    pub fit_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementDoc {
    pub width: usize,
    pub height: usize,
    pub repair_cost: f64,
    pub placements: Vec<PlacementDoc>,
    pub overlap_pairs: Vec<[usize; 2]>,
}

impl ArrangementDoc {
    pub fn new(arrangement: &Arrangement, palette: &CategoryPalette, width: usize, height: usize) -> Self {
        ArrangementDoc {
            width,
            height,
            repair_cost: arrangement.repair_cost,
            placements: arrangement
                .placements
                .iter()
                .map(|p| PlacementDoc {
                    category_id: p.category_id,
                    name: palette.categories()[p.category_id].name.clone(),
                    x: p.rect.x,
                    y: p.rect.y,
                    w: p.rect.w,
                    h: p.rect.h,
                    orientation: p.orientation.degrees(),
                    fit_cost: p.fit_cost,
                })
                .collect(),
            overlap_pairs: arrangement.overlap_pairs.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

/// One latent pushed through generate → repair → measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalDoc {
    pub latent: Vec<f64>,
    pub objective: f64,
    pub total_price: f64,
    pub furniture_count: usize,
    pub price_index: usize,
    pub count_index: usize,
    pub arrangement: ArrangementDoc,
}

impl EvalDoc {
    pub fn new(latent: &[f64], ev: &Evaluation, palette: &CategoryPalette, width: usize, height: usize) -> Self {
        EvalDoc {
            latent: latent.to_vec(),
            objective: ev.objective,
            total_price: ev.measures.total_price,
            furniture_count: ev.measures.furniture_count,
            price_index: ev.cell.price,
            count_index: ev.cell.count,
            arrangement: ArrangementDoc::new(&ev.arrangement, palette, width, height),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}
