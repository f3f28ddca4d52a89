mod common;

use std::collections::HashMap;

use common::{data_dir, embeddings, palette};
use furnish_core::palette::tsne::{self, initial_embedding, joint_affinities, kl_divergence, kl_gradient};
use furnish_core::palette::{
    build_palette, load_catalog, nearest_category, scale_to_rgb, CategoryPalette, Label, Point3, TsneParams,
};
use furnish_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// KL(P||Q) with Q written out directly from the Student-t definition.
fn oracle_kl(p: &[f64], y: &[Point3]) -> f64 {
    let n = y.len();
    let kernel = |i: usize, j: usize| {
        let d2: f64 = (0..3).map(|d| (y[i][d] - y[j][d]).powi(2)).sum();
        1.0 / (1.0 + d2)
    };
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                z += kernel(i, j);
            }
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[i * n + j];
            if i != j && pij > 0.0 {
                kl += pij * (pij / (kernel(i, j) / z)).ln();
            }
        }
    }
    kl
}

fn random_iterate(n: usize, scale: f64, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|_| scale * rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// Central differences of `oracle_kl` over every coordinate, compared to the
/// analytic gradient as a relative error in the Euclidean norm.
fn gradient_error(p: &[f64], y: &[Point3]) -> f64 {
    let analytic = kl_gradient(p, y);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..y.len() {
        for d in 0..3 {
            let h = 1e-5 * y[i][d].abs().max(1.0);
            let mut plus = y.to_vec();
            let mut minus = y.to_vec();
            plus[i][d] += h;
            minus[i][d] -= h;
            let fd = (oracle_kl(p, &plus) - oracle_kl(p, &minus)) / (2.0 * h);
            num += (analytic[i][d] - fd).powi(2);
            den += fd.powi(2);
        }
    }
    (num / den).sqrt()
}

#[test]
fn gradient_matches_finite_differences() {
    let p = joint_affinities(embeddings(), 5.0).unwrap();
    for (seed, scale) in [(1, 0.5), (2, 1.0), (3, 3.0), (4, 10.0)] {
        let y = random_iterate(embeddings().len(), scale, seed);
        let err = gradient_error(&p, &y);
        assert!(err < 1e-4, "seed {seed} scale {scale}: relative error {err:e}");
    }
}

#[test]
fn gradient_matches_finite_differences_on_random_affinities() {
    let n = 9;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.random();
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    let y = random_iterate(n, 2.0, 5);
    let err = gradient_error(&p, &y);
    assert!(err < 1e-4, "relative error {err:e}");
}

#[test]
fn kl_matches_direct_definition() {
    let p = joint_affinities(embeddings(), 5.0).unwrap();
    for seed in 0..3 {
        let y = random_iterate(embeddings().len(), 2.0, seed);
        let (a, b) = (kl_divergence(&p, &y), oracle_kl(&p, &y));
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn joint_affinities_are_a_symmetric_distribution() {
    let p = joint_affinities(embeddings(), 5.0).unwrap();
    let n = embeddings().len();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for i in 0..n {
        assert_eq!(p[i * n + i], 0.0);
        for j in 0..n {
            assert_eq!(p[i * n + j], p[j * n + i]);
            if i != j {
                assert!(p[i * n + j] > 0.0);
            }
        }
    }
}

#[test]
fn final_kl_below_initial_on_bundled_categories() {
    let fit = tsne::fit(embeddings(), &TsneParams::default()).unwrap();
    assert_eq!(fit.points.len(), 25);
    assert!(fit.final_kl < fit.initial_kl, "{} !< {}", fit.final_kl, fit.initial_kl);
    let start = initial_embedding(25, 1e-4, 0);
    let p = joint_affinities(embeddings(), 5.0).unwrap();
    assert_eq!(fit.initial_kl, kl_divergence(&p, &start));
}

#[test]
fn bundled_embeddings_shape() {
    assert_eq!(embeddings().len(), 25);
    assert_eq!(embeddings().dim(), 512);
}

#[test]
fn built_palette_satisfies_invariants() {
    let pal = palette();
    let catalog = load_catalog(data_dir().join("catalog.csv")).unwrap();
    assert_eq!(pal.len(), 25);
    let colors = pal.colors();
    for i in 0..colors.len() {
        for j in i + 1..colors.len() {
            assert!(
                colors[i].dist(colors[j]) >= 20.0,
                "{i},{j}: {}",
                colors[i].dist(colors[j])
            );
        }
        assert!(colors[i].dist(pal.background()) >= 20.0);
    }
    for (id, c) in pal.categories().iter().enumerate() {
        assert_eq!(c.id, id);
        assert_eq!(c.name, embeddings().name(id));
        assert_eq!(c.unit_price, catalog.prices[&c.name]);
        assert!(c.unit_price >= 0.0 && c.default_aspect > 0.0);
    }
}

#[test]
fn every_palette_color_is_its_own_nearest_label() {
    let pal = palette();
    for (id, c) in pal.categories().iter().enumerate() {
        assert_eq!(nearest_category(c.color, pal), (Label::Category(id), 0.0));
    }
    assert_eq!(nearest_category(pal.background(), pal), (Label::Background, 0.0));
}

#[test]
fn palette_build_is_deterministic() {
    let catalog = load_catalog(data_dir().join("catalog.csv")).unwrap();
    let again = build_palette(embeddings(), &catalog.prices, &catalog.aspects, &TsneParams::default()).unwrap();
    assert_eq!(again.to_csv(), palette().to_csv());
}

#[test]
fn missing_price_names_the_category() {
    let catalog = load_catalog(data_dir().join("catalog.csv")).unwrap();
    let mut prices: HashMap<String, f64> = catalog.prices.clone();
    prices.remove("sofa");
    let err = build_palette(embeddings(), &prices, &catalog.aspects, &TsneParams::default()).unwrap_err();
    assert!(matches!(&err, Error::MissingPrice(n) if n == "sofa"), "{err}");
    assert!(err.to_string().contains("sofa"));
}

#[test]
fn palette_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("palette.csv");
    palette().write_csv(&path).unwrap();
    assert_eq!(&CategoryPalette::read_csv(&path).unwrap(), palette());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("id,name,r,g,b,unit_price,default_aspect\n"));
    assert!(text.trim_end().lines().last().unwrap().starts_with("BACKGROUND,,"));
}

proptest! {
    #[test]
    fn scaled_colors_are_idempotent(points in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 1..30)) {
        let once = scale_to_rgb(&points);
        let as_points: Vec<Point3> = once.iter().map(|c| c.0.map(f64::from)).collect();
        let twice = scale_to_rgb(&as_points);
        for ch in 0..3 {
            let lo = once.iter().map(|c| c.0[ch]).min().unwrap();
            let hi = once.iter().map(|c| c.0[ch]).max().unwrap();
            // Each channel spans the full range unless it is constant.
            prop_assert!((lo, hi) == (0, 255) || (lo, hi) == (0, 0));
        }
        prop_assert_eq!(once, twice);
    }
}
