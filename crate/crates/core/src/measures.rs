//! Archive measures: total furniture price and piece count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Arrangement;
use crate::palette::CategoryPalette;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub total_price: f64,
    pub furniture_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchiveConfig {
    pub price_max: f64,
    pub price_bins: usize,
    pub count_max: usize,
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        ArchiveConfig {
            price_max: 20_000.0,
            price_bins: 20,
            count_max: 20,
        }
    }
}

impl ArchiveConfig {
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !(self.price_max > 0.0) || !self.price_max.is_finite() {
            errs.push(format!("archive.price_max must be positive, got {}", self.price_max));
        }
        if self.price_bins == 0 {
            errs.push("archive.price_bins must be at least 1".into());
        }
        if self.count_max == 0 {
            errs.push("archive.count_max must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Number of count bins (0..=count_max).
    pub fn count_bins(&self) -> usize {
        self.count_max + 1
    }

    pub fn cells(&self) -> usize {
        self.price_bins * self.count_bins()
    }
}

/// Cell coordinates of a measure value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub price: usize,
    pub count: usize,
}

pub fn compute_measures(arrangement: &Arrangement, palette: &CategoryPalette) -> Result<MeasureValue> {
    let mut total_price = 0.0;
    for p in &arrangement.placements {
        let entry = palette
            .get(p.category_id)
            .ok_or(Error::UnknownCategory(p.category_id))?;
        total_price += entry.unit_price;
    }
    Ok(MeasureValue {
        total_price,
        furniture_count: arrangement.placements.len(),
    })
}

/// Price bins are half-open except the last, which is closed; prices and
/// counts past the top clamp into the top bin.
pub fn bin_measures(value: &MeasureValue, config: &ArchiveConfig) -> CellIndex {
    let width = config.price_max / config.price_bins as f64;
    let raw = (value.total_price.max(0.0) / width).floor();
    let price = if raw >= config.price_bins as f64 {
        config.price_bins - 1
    } else {
        raw as usize
    };
    CellIndex {
        price,
        count: value.furniture_count.min(config.count_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Rgb;
    use crate::grid::{FurniturePlacement, Orientation, Rect};
    use crate::palette::CategoryEntry;
    use proptest::prelude::*;

    fn palette(prices: &[f64]) -> CategoryPalette {
        let cats = prices
            .iter()
            .enumerate()
            .map(|(id, &unit_price)| CategoryEntry {
                id,
                name: format!("c{id}"),
                color: Rgb([40 + 40 * id as u8, 100, 100]),
                unit_price,
                default_aspect: 1.0,
            })
            .collect();
        CategoryPalette::new(cats, Rgb::BLACK).unwrap()
    }

    fn arrangement(categories: &[usize]) -> Arrangement {
        Arrangement {
            placements: categories
                .iter()
                .enumerate()
                .map(|(i, &category_id)| FurniturePlacement {
                    category_id,
                    rect: Rect::new(3 * i, 0, 2, 2),
                    orientation: Orientation::Deg0,
                    fit_cost: 0.0,
                })
                .collect(),
            repair_cost: 0.0,
            overlap_pairs: vec![],
        }
    }

    #[test]
    fn empty_arrangement_measures_zero() {
        let m = compute_measures(&Arrangement::empty(), &palette(&[100.0])).unwrap();
        assert_eq!(
            m,
            MeasureValue {
                total_price: 0.0,
                furniture_count: 0
            }
        );
    }

    #[test]
    fn prices_add_up() {
        let p = palette(&[100.0, 250.0]);
        let m = compute_measures(&arrangement(&[0, 1]), &p).unwrap();
        assert_eq!(
            m,
            MeasureValue {
                total_price: 350.0,
                furniture_count: 2
            }
        );
    }

    #[test]
    fn few_expensive_pieces_can_outprice_many_cheap_ones() {
        let p = palette(&[30.0, 2500.0]);
        let two = compute_measures(&arrangement(&[1, 1]), &p).unwrap();
        let five = compute_measures(&arrangement(&[0, 0, 0, 0, 0]), &p).unwrap();
        assert!(two.total_price > five.total_price);
        assert!(two.furniture_count < five.furniture_count);
    }

    #[test]
    fn unknown_category_rejected() {
        let p = palette(&[10.0]);
        assert!(matches!(
            compute_measures(&arrangement(&[0, 3]), &p),
            Err(Error::UnknownCategory(3))
        ));
    }

    #[test]
    fn binning_examples() {
        let cfg = ArchiveConfig {
            price_max: 1000.0,
            price_bins: 20,
            count_max: 20,
        };
        let bin = |price, count| {
            bin_measures(
                &MeasureValue {
                    total_price: price,
                    furniture_count: count,
                },
                &cfg,
            )
        };
        assert_eq!(bin(437.0, 3), CellIndex { price: 8, count: 3 });
        assert_eq!(bin(1000.0, 1), CellIndex { price: 19, count: 1 });
        assert_eq!(bin(0.0, 0), CellIndex { price: 0, count: 0 });
        assert_eq!(bin(1e9, 99), CellIndex { price: 19, count: 20 });
        assert_eq!(bin(50.0, 0).price, 1);
        assert_eq!(bin(49.999, 0).price, 0);
    }

    proptest! {
        #[test]
        fn binning_is_monotone(a in 0.0f64..30_000.0, b in 0.0f64..30_000.0, n in 0usize..40, extra in 0usize..5) {
            let cfg = ArchiveConfig::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let c_lo = bin_measures(&MeasureValue { total_price: lo, furniture_count: n }, &cfg);
            let c_hi = bin_measures(&MeasureValue { total_price: hi, furniture_count: n + extra }, &cfg);
            prop_assert!(c_lo.price <= c_hi.price);
            prop_assert!(c_lo.count <= c_hi.count);
            prop_assert!(c_hi.price < cfg.price_bins && c_hi.count <= cfg.count_max);
        }
    }
}
