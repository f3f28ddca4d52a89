//! CMA-ES with full covariance, cumulative step-size adaptation and
//! rank-one plus rank-μ covariance updates. Hyperparameters follow Hansen's
//! defaults as functions of the dimension. The update takes solutions
//! already ranked best-first, so the caller decides what "best" means.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

const MIN_EIGENVALUE: f64 = 1e-12;
const MIN_SIGMA: f64 = 1e-12;
const MAX_SIGMA: f64 = 1e6;

/// Raised when the distribution has degenerated and the emitter must restart.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("CMA-ES needs restart: {0}")]
pub struct NeedsRestart(pub String);

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub chi_n: f64,
}

pub fn default_lambda(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

/// Positive log-linear recombination weights for the top `mu` of `lambda`,
/// normalized to sum to one.
pub fn recombination_weights(lambda: usize, mu: usize) -> Vec<f64> {
    let base = ((lambda as f64 + 1.0) / 2.0).ln();
    let raw: Vec<f64> = (1..=mu).map(|i| base - (i as f64).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

impl Hyperparams {
    pub fn new(dim: usize, lambda: usize) -> Self {
        assert!(dim >= 1 && lambda >= 2, "need dim >= 1 and lambda >= 2");
        let n = dim as f64;
        let mu = lambda / 2;
        let weights = recombination_weights(lambda, mu);
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        Hyperparams {
            lambda,
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CmaEsState {
    pub dim: usize,
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    pub path_sigma: DVector<f64>,
    pub path_c: DVector<f64>,
    pub params: Hyperparams,
    pub generation: usize,
    /// Eigenvectors of `cov` (columns).
    basis: DMatrix<f64>,
    /// Square roots of the eigenvalues of `cov`.
    scales: DVector<f64>,
}

impl CmaEsState {
    pub fn new(mean: Vec<f64>, sigma: f64, lambda: Option<usize>) -> Self {
        let dim = mean.len();
        let lambda = lambda.unwrap_or_else(|| default_lambda(dim));
        CmaEsState {
            dim,
            mean: DVector::from_vec(mean),
            sigma,
            cov: DMatrix::identity(dim, dim),
            path_sigma: DVector::zeros(dim),
            path_c: DVector::zeros(dim),
            params: Hyperparams::new(dim, lambda),
            generation: 0,
            basis: DMatrix::identity(dim, dim),
            scales: DVector::from_element(dim, 1.0),
        }
    }

    pub fn lambda(&self) -> usize {
        self.params.lambda
    }

    /// Resets to an isotropic distribution around `mean`.
    pub fn restart(&mut self, mean: Vec<f64>, sigma: f64) {
        *self = CmaEsState::new(mean, sigma, Some(self.params.lambda));
    }

    /// Draws `lambda` points `mean + sigma * A n` with `A Aᵀ = cov`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        (0..self.params.lambda).map(|_| self.sample_one(rng)).collect()
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &self.basis * n.component_mul(&self.scales);
        (&self.mean + y * self.sigma).iter().copied().collect()
    }

    /// One generation of mean, path, step-size and covariance adaptation
    /// from `ranked` (best first, at least `mu` entries).
    pub fn update(&mut self, ranked: &[Vec<f64>]) -> Result<(), NeedsRestart> {
        let p = &self.params;
        assert!(ranked.len() >= p.mu, "need at least mu ranked solutions");
        let n = self.dim as f64;

        let steps: Vec<DVector<f64>> = ranked[..p.mu]
            .iter()
            .map(|x| (DVector::from_column_slice(x) - &self.mean) / self.sigma)
            .collect();
        let mut y_w = DVector::zeros(self.dim);
        for (w, y) in p.weights.iter().zip(&steps) {
            y_w += y * *w;
        }
        self.mean += &y_w * self.sigma;

        // C^{-1/2} y_w = B D^{-1} Bᵀ y_w
        let inv_sqrt_y = &self.basis * (self.basis.transpose() * &y_w).component_div(&self.scales);
        self.path_sigma =
            &self.path_sigma * (1.0 - p.c_sigma) + inv_sqrt_y * (p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff).sqrt();
        let ps_norm = self.path_sigma.norm();
        let gen = (self.generation + 1) as f64;
        let h_sigma = ps_norm / (1.0 - (1.0 - p.c_sigma).powf(2.0 * gen)).sqrt() < (1.4 + 2.0 / (n + 1.0)) * p.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        self.path_c = &self.path_c * (1.0 - p.c_c) + &y_w * (h * (p.c_c * (2.0 - p.c_c) * p.mu_eff).sqrt());

        let mut rank_mu = DMatrix::zeros(self.dim, self.dim);
        for (w, y) in p.weights.iter().zip(&steps) {
            rank_mu += (y * y.transpose()) * *w;
        }
        let delta_h = (1.0 - h) * p.c_c * (2.0 - p.c_c);
        let rank_one = &self.path_c * self.path_c.transpose() + &self.cov * delta_h;
        self.cov = &self.cov * (1.0 - p.c_1 - p.c_mu) + rank_one * p.c_1 + rank_mu * p.c_mu;
        self.cov = (&self.cov + self.cov.transpose()) * 0.5;

        self.sigma *= ((p.c_sigma / p.d_sigma) * (ps_norm / p.chi_n - 1.0)).exp();
        self.generation += 1;
        self.refresh_eigen()
    }

    fn refresh_eigen(&mut self) -> Result<(), NeedsRestart> {
        if !(self.sigma > MIN_SIGMA && self.sigma < MAX_SIGMA) {
            return Err(NeedsRestart(format!("sigma {} out of range", self.sigma)));
        }
        if self.cov.iter().any(|v| !v.is_finite()) || self.mean.iter().any(|v| !v.is_finite()) {
            return Err(NeedsRestart("non-finite state".into()));
        }
        let eig = SymmetricEigen::new(self.cov.clone());
        let min = eig.eigenvalues.min();
        if !(min > MIN_EIGENVALUE) {
            return Err(NeedsRestart(format!("covariance eigenvalue {min} too small")));
        }
        self.scales = eig.eigenvalues.map(f64::sqrt);
        self.basis = eig.eigenvectors;
        Ok(())
    }
}
