//! Fixed-point color costs.
//!
//! Each per-pixel Euclidean RGB distance is rounded once to a multiple of
//! 2⁻¹⁶; every sum after that is exact integer arithmetic, so repair
//! costs do not depend on summation order.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::color::Rgb;

pub const UNITS_PER_RGB: i64 = 1 << 16;
const MAX_DIST2: usize = 3 * 255 * 255;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cost(pub i64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / UNITS_PER_RGB as f64
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, rhs: Cost) -> Cost {
        Cost(self.0 - rhs.0)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.0 += rhs.0;
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        Cost(iter.map(|c| c.0).sum())
    }
}

fn table() -> &'static [i64] {
    static TABLE: OnceLock<Vec<i64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=MAX_DIST2)
            .map(|d2| ((d2 as f64).sqrt() * UNITS_PER_RGB as f64).round() as i64)
            .collect()
    })
}

/// Quantized Euclidean distance between two colors.
pub fn color_cost(a: Rgb, b: Rgb) -> Cost {
    Cost(table()[a.dist2(b) as usize])
}
