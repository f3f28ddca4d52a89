//! Built-in procedural generator.
//!
//! The decode is a pure function of the latent quantized to a 1/1024
//! lattice, so nearby latents on the same lattice point give identical
//! grids. Every step uses portable integer and IEEE-754 arithmetic so other
//! implementations of the wire protocol can reproduce it byte for byte:
//!
//! 1. `q_i = floor(z_i * 1024)`, `v_i = q_i / 1024`, `s(v) = 1 / (1 + exp(-v))`.
//! 2. Piece count `k = min(floor(s(v_0) * (k_max + 1)), k_max)`.
//! 3. Layout slots are `v_1 .. v_{d-3}` (`L = d - 3` of them). Piece `j`
//!    reads role `r` (0 category, 1 width, 2 height, 3 x, 4 y) from slot
//!    `t = 5j + r` as `u = frac(s(v_{1 + t mod L}) + t * PHI)`, with
//!    `PHI = 0.6180339887498949`.
//! 4. `category = min(floor(u0 * K), K-1)`, `w = min(size_min + floor(u1 * span), size_max, W)`
//!    (likewise `h`), `x = min(floor(u3 * (W - w + 1)), W - w)` (likewise `y`),
//!    with `span = size_max - size_min + 1`. A piece whose rectangle grown by
//!    one cell touches an earlier accepted piece is dropped; the rest are
//!    painted in order on the background.
//! 5. Noise std `= noise_max * max(0, 2 s(v_{d-2}) - 1)`, flip count
//!    `= floor(flip_max * max(0, 2 s(v_{d-1}) - 1))`.
//! 6. The corruption RNG is SplitMix64 seeded by folding
//!    `h = mix(h ^ q_i)` over all `q_i` (two's complement), starting from
//!    `0x243F6A8885A308D3`, where `mix` is the SplitMix64 output function.
//!    If std > 0, each channel of each pixel (row-major) becomes
//!    `clamp(floor(c + std * g + 0.5), 0, 255)` where `g` is a Box-Muller
//!    normal built from two draws `a`, `b`: `u1 = ((a >> 11) + 1) * 2^-53`,
//!    `u2 = (b >> 11) * 2^-53`, `g = sqrt(-2 ln u1) cos(2π u2)`. Then each
//!    flip draws `a`, `b`: pixel `a mod (W*H)` gets color bytes
//!    `(b >> 16, b >> 24, b >> 32) & 0xff`.

use serde::{Deserialize, Serialize};

use crate::color::Rgb;
use crate::error::{Error, Result};
use crate::grid::{OccupancyGrid, Rect};
use crate::palette::CategoryPalette;

const LATTICE: f64 = 1024.0;
const PHI: f64 = 0.6180339887498949;
const SEED_BASIS: u64 = 0x243F_6A88_85A3_08D3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub latent_dim: usize,
    pub width: usize,
    pub height: usize,
    pub k_max: usize,
    pub size_min: usize,
    pub size_max: usize,
    pub noise_max: f64,
    pub flip_max: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            latent_dim: 16,
            width: 64,
            height: 64,
            k_max: 10,
            size_min: 2,
            size_max: 12,
            noise_max: 25.0,
            flip_max: 48,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if self.latent_dim < 4 {
            errs.push(format!(
                "generator.latent_dim must be at least 4, got {}",
                self.latent_dim
            ));
        }
        if self.width == 0 || self.height == 0 {
            errs.push("generator width and height must be positive".into());
        }
        if self.size_min == 0 || self.size_min > self.size_max {
            errs.push(format!(
                "generator sizes must satisfy 1 <= size_min <= size_max, got {}..{}",
                self.size_min, self.size_max
            ));
        }
        if !(self.noise_max >= 0.0) || !self.noise_max.is_finite() {
            errs.push(format!(
                "generator.noise_max must be non-negative, got {}",
                self.noise_max
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// One decoded furniture piece, before painting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Piece {
    pub category_id: usize,
    pub rect: Rect,
}

/// Everything the decode derives from a latent.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub pieces: Vec<Piece>,
    pub noise_std: f64,
    pub flips: usize,
    pub seed: u64,
}

/// `rect` grown by one cell on every side (clipped at the top-left edge).
fn halo(rect: Rect) -> Rect {
    let x = rect.x.saturating_sub(1);
    let y = rect.y.saturating_sub(1);
    Rect::new(x, y, rect.x + rect.w + 1 - x, rect.y + rect.h + 1 - y)
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64; tiny, and specified exactly so the decode is portable.
#[derive(Clone, Debug)]
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.0)
    }

    fn normal(&mut self) -> f64 {
        let a = self.next_u64();
        let b = self.next_u64();
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

fn check_latent(z: &[f64], params: &SynthParams) -> Result<()> {
    if z.len() != params.latent_dim {
        return Err(Error::LatentDim {
            expected: params.latent_dim,
            got: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("latent contains non-finite values".into()));
    }
    Ok(())
}

/// Decodes the layout and corruption parameters without painting.
pub fn decode(z: &[f64], palette: &CategoryPalette, params: &SynthParams) -> Result<Decoded> {
    check_latent(z, params)?;
    let d = params.latent_dim;
    let q: Vec<i64> = z.iter().map(|&v| (v * LATTICE).floor() as i64).collect();
    let s: Vec<f64> = q.iter().map(|&qi| sigmoid(qi as f64 / LATTICE)).collect();

    let k_max = params.k_max;
    let k = ((s[0] * (k_max + 1) as f64).floor() as usize).min(k_max);
    let slots = d - 3;
    let n_cat = palette.len();
    let (gw, gh) = (params.width, params.height);
    let span = params.size_max - params.size_min + 1;

    let mut pieces: Vec<Piece> = Vec::with_capacity(k);
    for j in 0..k {
        let u = |r: usize| -> f64 {
            let t = 5 * j + r;
            (s[1 + t % slots] + t as f64 * PHI).fract()
        };
        let category_id = ((u(0) * n_cat as f64).floor() as usize).min(n_cat - 1);
        let w = (params.size_min + (u(1) * span as f64).floor() as usize)
            .min(params.size_max)
            .min(gw);
        let h = (params.size_min + (u(2) * span as f64).floor() as usize)
            .min(params.size_max)
            .min(gh);
        let x = ((u(3) * (gw - w + 1) as f64).floor() as usize).min(gw - w);
        let y = ((u(4) * (gh - h + 1) as f64).floor() as usize).min(gh - h);
        let rect = Rect::new(x, y, w, h);
        let grown = halo(rect);
        if pieces.iter().all(|p| !p.rect.intersects(&grown)) {
            pieces.push(Piece { category_id, rect });
        }
    }

    let noise_std = params.noise_max * (2.0 * s[d - 2] - 1.0).max(0.0);
    let flips = (params.flip_max as f64 * (2.0 * s[d - 1] - 1.0).max(0.0)).floor() as usize;
    let seed = q.iter().fold(SEED_BASIS, |h, &qi| mix(h ^ qi as u64));
    Ok(Decoded {
        pieces,
        noise_std,
        flips,
        seed,
    })
}

/// The clean layout: decoded pieces painted on the background.
pub fn paint_clean(decoded: &Decoded, palette: &CategoryPalette, params: &SynthParams) -> OccupancyGrid {
    let mut grid = OccupancyGrid::filled(params.width, params.height, palette.background());
    for p in &decoded.pieces {
        grid.fill_rect(p.rect, palette.categories()[p.category_id].color);
    }
    grid
}

pub fn synth_generate(z: &[f64], palette: &CategoryPalette, params: &SynthParams) -> Result<OccupancyGrid> {
    let decoded = decode(z, palette, params)?;
    let mut grid = paint_clean(&decoded, palette, params);
    let mut rng = SplitMix64(decoded.seed);
    let (w, h) = (params.width, params.height);

    if decoded.noise_std > 0.0 {
        for y in 0..h {
            for x in 0..w {
                let mut c = grid.get(x, y).0;
                for ch in &mut c {
                    let v = (*ch as f64 + decoded.noise_std * rng.normal() + 0.5).floor();
                    *ch = v.clamp(0.0, 255.0) as u8;
                }
                grid.set(x, y, Rgb(c));
            }
        }
    }
    for _ in 0..decoded.flips {
        let pos = (rng.next_u64() % (w * h) as u64) as usize;
        let b = rng.next_u64();
        let color = Rgb([(b >> 16) as u8, (b >> 24) as u8, (b >> 32) as u8]);
        grid.set(pos % w, pos / w, color);
    }
    Ok(grid)
}

#[derive(Clone, Debug)]
pub struct SynthGenerator {
    palette: CategoryPalette,
    params: SynthParams,
}

impl SynthGenerator {
    pub fn new(palette: CategoryPalette, params: SynthParams) -> Result<Self> {
        params.validate().map_err(|e| Error::Config(e.join("; ")))?;
        Ok(SynthGenerator { palette, params })
    }

    pub fn params(&self) -> &SynthParams {
        &self.params
    }

    pub fn generate(&self, z: &[f64]) -> Result<OccupancyGrid> {
        synth_generate(z, &self.palette, &self.params)
    }
}
