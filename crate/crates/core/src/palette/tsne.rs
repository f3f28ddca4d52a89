//! Exact t-SNE into three dimensions.
//!
//! Input affinities use a Gaussian kernel whose per-point precision is
//! found by bisection so that each conditional distribution has the
//! requested perplexity. Output affinities use a Student-t kernel with one
//! degree of freedom. Optimization is plain gradient descent with momentum,
//! per-coordinate gains and early exaggeration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::embeddings::EmbeddingTable;
use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

const MAX_BANDWIDTH_STEPS: usize = 64;
const ENTROPY_TOL: f64 = 1e-5;
const P_FLOOR: f64 = 1e-12;
const MIN_GAIN: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch: usize,
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
    pub init_std: f64,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams {
            perplexity: 5.0,
            iterations: 1000,
            learning_rate: 100.0,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch: 250,
            exaggeration: 4.0,
            exaggeration_iters: 100,
            init_std: 1e-4,
            seed: 0,
        }
    }
}

impl TsneParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.perplexity > 0.0) || !self.perplexity.is_finite() {
            return Err(Error::TsneParam(format!(
                "perplexity must be positive, got {}",
                self.perplexity
            )));
        }
        if n < 2 || self.perplexity >= (n - 1) as f64 {
            return Err(Error::Perplexity {
                perplexity: self.perplexity,
                limit: n.saturating_sub(1),
            });
        }
        if n < 4 {
            return Err(Error::TsneParam(format!("need at least 4 entries, got {n}")));
        }
        if self.iterations == 0 {
            return Err(Error::TsneParam("iterations must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::TsneParam("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a t-SNE fit, including the objective at both ends of the run.
#[derive(Clone, Debug)]
pub struct TsneFit {
    pub points: Vec<Point3>,
    pub initial_kl: f64,
    pub final_kl: f64,
}

/// Reduces every embedding in `table` to a point in 3D.
pub fn tsne_reduce(table: &EmbeddingTable, params: &TsneParams) -> Result<Vec<Point3>> {
    fit(table, params).map(|f| f.points)
}

pub fn fit(table: &EmbeddingTable, params: &TsneParams) -> Result<TsneFit> {
    let n = table.len();
    params.validate(n)?;

    let p = joint_affinities(table, params.perplexity)?;
    let mut y = initial_embedding(n, params.init_std, params.seed);
    let initial_kl = kl_divergence(&p, &y);

    let mut update = vec![[0.0; 3]; n];
    let mut gains = vec![[1.0; 3]; n];
    let mut p_work: Vec<f64> = p.iter().map(|v| v * params.exaggeration).collect();

    for iter in 0..params.iterations {
        if iter == params.exaggeration_iters {
            p_work.copy_from_slice(&p);
        }
        let momentum = if iter < params.momentum_switch {
            params.initial_momentum
        } else {
            params.final_momentum
        };
        let grad = kl_gradient(&p_work, &y);
        for i in 0..n {
            for d in 0..3 {
                let g = grad[i][d];
                let gain = &mut gains[i][d];
                *gain = if (g > 0.0) != (update[i][d] > 0.0) {
                    *gain + 0.2
                } else {
                    *gain * 0.8
                };
                if *gain < MIN_GAIN {
                    *gain = MIN_GAIN;
                }
                update[i][d] = momentum * update[i][d] - params.learning_rate * *gain * g;
                y[i][d] += update[i][d];
            }
        }
        recenter(&mut y);
    }

    let final_kl = kl_divergence(&p, &y);
    Ok(TsneFit {
        points: y,
        initial_kl,
        final_kl,
    })
}

/// Gaussian(0, `std`) starting points drawn from a seeded generator.
pub fn initial_embedding(n: usize, std: f64, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).expect("std must be finite and non-negative");
    (0..n)
        .map(|_| {
            [
                normal.sample(&mut rng),
                normal.sample(&mut rng),
                normal.sample(&mut rng),
            ]
        })
        .collect()
}

fn recenter(y: &mut [Point3]) {
    let n = y.len() as f64;
    let mut mean = [0.0; 3];
    for p in y.iter() {
        for d in 0..3 {
            mean[d] += p[d];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    for p in y.iter_mut() {
        for d in 0..3 {
            p[d] -= mean[d];
        }
    }
}

fn squared_distances(table: &EmbeddingTable) -> Vec<f64> {
    let n = table.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = table
                .vector(i)
                .iter()
                .zip(table.vector(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[i * n + j] = s;
            d[j * n + i] = s;
        }
    }
    d
}

/// Conditional distribution of row `i` at precision `beta`, returned with
/// its Shannon entropy (nats). Distances are shifted by the row minimum so
/// large inputs do not underflow; the shift cancels in normalization.
fn conditional_row(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let n = out.len();
    let min = (0..n)
        .filter(|&j| j != i)
        .map(|j| dist[j])
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for j in 0..n {
        if j == i {
            out[j] = 0.0;
            continue;
        }
        let shifted = dist[j] - min;
        let v = (-beta * shifted).exp();
        out[j] = v;
        sum += v;
        weighted += shifted * v;
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    sum.ln() + beta * weighted / sum
}

/// Symmetrized joint affinities P (row-major N×N, zero diagonal, sums to 1).
pub fn joint_affinities(table: &EmbeddingTable, perplexity: f64) -> Result<Vec<f64>> {
    let n = table.len();
    let dist = squared_distances(table);
    let target = perplexity.ln();
    let mut cond = vec![0.0; n * n];

    for i in 0..n {
        let row_dist = &dist[i * n..(i + 1) * n];
        let row = &mut cond[i * n..(i + 1) * n];
        let mut beta = 1.0;
        let mut lo = 0.0;
        let mut hi = f64::INFINITY;
        let mut converged = false;
        for _ in 0..MAX_BANDWIDTH_STEPS {
            let h = conditional_row(row_dist, i, beta, row);
            let diff = h - target;
            if diff.abs() < ENTROPY_TOL {
                converged = true;
                break;
            }
            if diff > 0.0 {
                // entropy too high: sharpen the kernel
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        if !converged {
            return Err(Error::Bandwidth {
                index: i,
                name: table.name(i).to_string(),
            });
        }
    }

    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(P_FLOOR);
            }
        }
    }
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    Ok(p)
}

/// Student-t kernel values (1 + |y_i - y_j|^2)^-1 with a zero diagonal, and their sum.
fn student_kernel(y: &[Point3]) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = (0..3).map(|d| (y[i][d] - y[j][d]).powi(2)).sum();
            let v = 1.0 / (1.0 + d2);
            num[i * n + j] = v;
            num[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    (num, sum)
}

/// KL(P || Q) for the embedding `y`.
pub fn kl_divergence(p: &[f64], y: &[Point3]) -> f64 {
    let (num, sum) = student_kernel(y);
    p.iter()
        .zip(num.iter())
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &nij)| pij * (pij / (nij / sum)).ln())
        .sum()
}

/// Gradient of KL(P || Q) with respect to each low-dimensional coordinate:
/// 4 Σ_j (p_ij − q_ij)(1 + |y_i − y_j|²)⁻¹ (y_i − y_j).
pub fn kl_gradient(p: &[f64], y: &[Point3]) -> Vec<Point3> {
    let n = y.len();
    let (num, sum) = student_kernel(y);
    let mut grad = vec![[0.0; 3]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = num[i * n + j];
            let coeff = 4.0 * (p[i * n + j] - k / sum) * k;
            for d in 0..3 {
                grad[i][d] += coeff * (y[i][d] - y[j][d]);
            }
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, Vec<f64>)]) -> EmbeddingTable {
        EmbeddingTable::new(rows.iter().map(|(n, v)| (n.to_string(), v.clone())).collect()).unwrap()
    }

    fn spread_table(n: usize, dim: usize) -> EmbeddingTable {
        let rows = (0..n)
            .map(|i| {
                let v = (0..dim)
                    .map(|k| ((i * 7 + k * 13) % 11) as f64 / 11.0 + (i as f64) * 0.05 * (k % 3) as f64)
                    .collect();
                (format!("c{i}"), v)
            })
            .collect();
        EmbeddingTable::new(rows).unwrap()
    }

    #[test]
    fn two_entries_violate_perplexity() {
        let t = table(&[("a", vec![0.0, 1.0]), ("b", vec![1.0, 0.0])]);
        let err = tsne_reduce(&t, &TsneParams::default()).unwrap_err();
        assert!(matches!(err, Error::Perplexity { .. }), "{err}");
    }

    #[test]
    fn perplexity_equal_to_n_minus_one_rejected() {
        let t = spread_table(6, 4);
        let params = TsneParams {
            perplexity: 5.0,
            ..TsneParams::default()
        };
        assert!(matches!(tsne_reduce(&t, &params), Err(Error::Perplexity { .. })));
    }

    #[test]
    fn identical_points_fail_bandwidth_search() {
        let rows: Vec<_> = (0..8).map(|i| (format!("p{i}"), vec![1.0, 2.0, 3.0])).collect();
        let t = EmbeddingTable::new(rows).unwrap();
        match joint_affinities(&t, 5.0) {
            Err(Error::Bandwidth { index, name }) => {
                assert_eq!(index, 0);
                assert_eq!(name, "p0");
            }
            other => panic!("expected bandwidth error, got {other:?}"),
        }
    }

    #[test]
    fn conditional_rows_hit_target_perplexity() {
        let t = spread_table(12, 8);
        let n = t.len();
        let dist = squared_distances(&t);
        let p = joint_affinities(&t, 4.0).unwrap();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(p[i * n + j], p[j * n + i]);
            }
        }
        // rerun the bisection for one row and check the entropy directly
        let mut row = vec![0.0; n];
        let h_lo = conditional_row(&dist[0..n], 0, 1e-3, &mut row);
        let h_hi = conditional_row(&dist[0..n], 0, 1e3, &mut row);
        assert!(h_lo > 4f64.ln() && h_hi < 4f64.ln());
    }

    #[test]
    fn deterministic_for_seed() {
        let t = spread_table(10, 6);
        let params = TsneParams {
            perplexity: 3.0,
            iterations: 200,
            ..TsneParams::default()
        };
        let a = tsne_reduce(&t, &params).unwrap();
        let b = tsne_reduce(&t, &params).unwrap();
        assert_eq!(a, b);
        let c = tsne_reduce(&t, &params.clone().with_seed(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn kl_decreases_over_run() {
        let t = spread_table(15, 6);
        let params = TsneParams {
            perplexity: 4.0,
            iterations: 500,
            ..TsneParams::default()
        };
        let f = fit(&t, &params).unwrap();
        assert!(f.final_kl < f.initial_kl, "{} !< {}", f.final_kl, f.initial_kl);
        assert_eq!(f.points.len(), 15);
    }
}
