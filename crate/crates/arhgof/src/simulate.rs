//! Data-generating processes: exponential covariance kernels, Gaussian
//! element sampling, the ARH(1) recursion with burn-in, and random
//! projection directions.
//!
//! Innovations and initial conditions are sampled full-rank through a
//! Cholesky factor of their covariance kernel; projection directions use
//! a truncated Karhunen–Loève expansion (default 5 terms) of theirs.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::func::{
    weighted_symmetric_eigen, FunctionalSeries, Grid, GridFunction, KernelMatrix,
};
use crate::rng::RngStream;

/// Default KL truncation level for projection directions.
pub const DEFAULT_KL_TRUNCATION: usize = 5;

/// Default burn-in length for the ARH(1) recursion.
pub const DEFAULT_BURN_IN: usize = 500;

/// Relative PSD tolerance: eigenvalues below −tol·(max diagonal) are a
/// hard error, anything between −tol·(max diagonal) and 0 is clamped.
const PSD_RTOL: f64 = 1e-8;

/// A Gaussian measure on H: covariance kernel, mean (zero unless set),
/// and an optional Karhunen–Loève truncation level.
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    kernel: KernelMatrix,
    mean: GridFunction,
    kl_truncation: Option<usize>,
}

impl GaussianSpec {
    /// Centered measure with the given (symmetric) covariance kernel,
    /// sampled full-rank.
    pub fn centered(kernel: KernelMatrix) -> Result<Self> {
        if !kernel.is_symmetric() {
            return Err(Error::NotSymmetric {
                context: "covariance kernel of a Gaussian spec",
                max_asym: f64::NAN,
            });
        }
        let mean = GridFunction::zero(kernel.grid().clone());
        Ok(Self {
            kernel,
            mean,
            kl_truncation: None,
        })
    }

    pub fn with_mean(mut self, mean: GridFunction) -> Result<Self> {
        if !crate::func::same_grid(self.kernel.grid(), mean.grid()) {
            return Err(Error::GridMismatch {
                context: "Gaussian spec mean",
                left: self.kernel.grid().len(),
                right: mean.grid().len(),
            });
        }
        self.mean = mean;
        Ok(self)
    }

    /// Truncates sampling to the top `level` weighted eigenpairs of the
    /// kernel; 1 ≤ level ≤ m.
    pub fn with_kl_truncation(mut self, level: usize) -> Result<Self> {
        let m = self.kernel.grid().len();
        if level == 0 || level > m {
            return Err(Error::Config(format!(
                "KL truncation must be in 1..={m}, got {level}"
            )));
        }
        self.kl_truncation = Some(level);
        Ok(self)
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn mean(&self) -> &GridFunction {
        &self.mean
    }

    pub fn kl_truncation(&self) -> Option<usize> {
        self.kl_truncation
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.kernel.grid()
    }
}

enum SamplerPath {
    /// Zero kernel: every draw is the mean.
    Degenerate,
    /// Full-rank draw mean + L·z with L the (jittered) Cholesky factor.
    Cholesky(DMatrix<f64>),
    /// Truncated KL draw mean + Σ_k ξ_k·(√λ_k φ_k); columns hold √λ_k φ_k.
    Kl(DMatrix<f64>),
}

/// A Gaussian spec compiled for repeated sampling (factorizations done
/// once). Immutable; safe to share across workers.
pub struct GaussianSampler {
    grid: Arc<Grid>,
    mean: Vec<f64>,
    path: SamplerPath,
}

impl GaussianSampler {
    pub fn prepare(spec: &GaussianSpec) -> Result<Self> {
        let grid = spec.kernel.grid().clone();
        let m = grid.len();
        let entries = spec.kernel.entries();
        let mean = spec.mean.values().to_vec();

        if entries.iter().all(|&v| v == 0.0) {
            return Ok(Self {
                grid,
                mean,
                path: SamplerPath::Degenerate,
            });
        }

        let max_diag = (0..m).map(|i| entries[(i, i)]).fold(0.0f64, f64::max);
        let path = match spec.kl_truncation {
            Some(level) => {
                let (vals, funcs) = weighted_symmetric_eigen(&spec.kernel)?;
                if vals[m - 1] < -PSD_RTOL * max_diag {
                    return Err(Error::Numerical(format!(
                        "covariance kernel not PSD: eigenvalue {:e}",
                        vals[m - 1]
                    )));
                }
                let mut comps = DMatrix::zeros(m, level);
                for k in 0..level {
                    let s = vals[k].max(0.0).sqrt();
                    for i in 0..m {
                        comps[(i, k)] = s * funcs[(i, k)];
                    }
                }
                SamplerPath::Kl(comps)
            }
            None => {
                // Exponential kernels are near-singular on fine grids;
                // a small diagonal jitter keeps the factorization alive.
                let trace: f64 = (0..m).map(|i| entries[(i, i)]).sum();
                let jitter = 1e-10 * trace / m as f64;
                let factor = [jitter, 10.0 * jitter]
                    .iter()
                    .find_map(|&j| {
                        let mut k = entries.clone();
                        for i in 0..m {
                            k[(i, i)] += j;
                        }
                        k.cholesky().map(|c| c.unpack())
                    })
                    .ok_or_else(|| {
                        Error::Numerical(
                            "Cholesky factorization failed after jitter retry".into(),
                        )
                    })?;
                SamplerPath::Cholesky(factor)
            }
        };
        Ok(Self { grid, mean, path })
    }

    /// Draws one element. The number of standard-normal variates
    /// consumed is fixed by the path (m full-rank, M truncated), so
    /// sequences of draws are reproducible.
    pub fn sample(&self, rng: &mut ChaCha12Rng) -> GridFunction {
        let m = self.grid.len();
        let mut out = self.mean.clone();
        match &self.path {
            SamplerPath::Degenerate => {}
            SamplerPath::Cholesky(l) => {
                let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
                let x = l * z;
                for i in 0..m {
                    out[i] += x[i];
                }
            }
            SamplerPath::Kl(comps) => {
                let level = comps.ncols();
                let xi = DVector::from_fn(level, |_, _| rng.sample::<f64, _>(StandardNormal));
                let x = comps * xi;
                for i in 0..m {
                    out[i] += x[i];
                }
            }
        }
        // Finite by construction: kernel entries and normals are finite.
        GridFunction::new(self.grid.clone(), out).expect("sampled values finite")
    }
}

/// Draws a single element of the Gaussian measure.
pub fn sample_gaussian(spec: &GaussianSpec, stream: RngStream) -> Result<GridFunction> {
    let sampler = GaussianSampler::prepare(spec)?;
    Ok(sampler.sample(&mut stream.rng()))
}

/// Draws a random projection direction: same as [`sample_gaussian`] but
/// with the KL truncation defaulting to 5 terms when the spec sets none.
pub fn draw_projection_direction(spec: &GaussianSpec, stream: RngStream) -> Result<GridFunction> {
    let spec = match spec.kl_truncation {
        Some(_) => spec.clone(),
        None => spec
            .clone()
            .with_kl_truncation(DEFAULT_KL_TRUNCATION.min(spec.grid().len()))?,
    };
    sample_gaussian(&spec, stream)
}

/// Specification of an ARH(1) process Y_t = Γ(Y_{t−1}) + ε_t.
#[derive(Debug, Clone)]
pub struct ARHSpec {
    gamma: KernelMatrix,
    noise: GaussianSpec,
    initial: GaussianSpec,
    burn_in: usize,
    n: usize,
    spectral_proxy: f64,
}

impl ARHSpec {
    /// Assembles the spec; all three kernels must share one grid.
    ///
    /// A largest-singular-value proxy for ‖Γ‖ is computed up front;
    /// [`ARHSpec::is_contractive`] is false when it reaches 1 and the
    /// process has no stationarity guarantee (callers should warn).
    pub fn new(
        gamma: KernelMatrix,
        noise: GaussianSpec,
        initial: GaussianSpec,
        burn_in: usize,
        n: usize,
    ) -> Result<Self> {
        for (g, ctx) in [
            (noise.grid(), "ARH noise spec"),
            (initial.grid(), "ARH initial spec"),
        ] {
            if !crate::func::same_grid(gamma.grid(), g) {
                return Err(Error::GridMismatch {
                    context: ctx,
                    left: gamma.grid().len(),
                    right: g.len(),
                });
            }
        }
        if n == 0 {
            return Err(Error::Config("sample size n must be positive".into()));
        }
        let spectral_proxy = gamma.operator_norm();
        Ok(Self {
            gamma,
            noise,
            initial,
            burn_in,
            n,
            spectral_proxy,
        })
    }

    pub fn gamma(&self) -> &KernelMatrix {
        &self.gamma
    }

    pub fn noise(&self) -> &GaussianSpec {
        &self.noise
    }

    pub fn initial(&self) -> &GaussianSpec {
        &self.initial
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.gamma.grid()
    }

    /// Largest singular value of the autocorrelation matrix.
    pub fn spectral_proxy(&self) -> f64 {
        self.spectral_proxy
    }

    /// Stationarity heuristic: proxy < 1.
    pub fn is_contractive(&self) -> bool {
        self.spectral_proxy < 1.0
    }
}

/// Simulates the ARH(1) recursion: draws Y₀ from the initial measure,
/// iterates Y_t = Γ(Y_{t−1}) + ε_t for t = 1..burn_in+n, and returns the
/// last n functions. Deterministic given the stream.
pub fn simulate_arh1(spec: &ARHSpec, stream: RngStream) -> Result<FunctionalSeries> {
    let grid = spec.grid().clone();
    let m = grid.len();
    let total = spec.burn_in + spec.n;

    let noise = GaussianSampler::prepare(&spec.noise)?;
    let initial = GaussianSampler::prepare(&spec.initial)?;
    let gm = spec.gamma.entries();

    let mut rng = stream.rng();
    let mut y = DVector::from_column_slice(initial.sample(&mut rng).values());
    let mut next = DVector::zeros(m);
    let mut kept = Vec::with_capacity(spec.n * m);
    for t in 1..=total {
        let eps = noise.sample(&mut rng);
        next.gemv(1.0, gm, &y, 0.0);
        for i in 0..m {
            next[i] += eps.values()[i];
        }
        std::mem::swap(&mut y, &mut next);
        if t > spec.burn_in {
            kept.extend_from_slice(y.as_slice());
        }
    }
    Ok(FunctionalSeries::from_flat(grid, spec.n, kept))
}

/// Exponential covariance kernel σ²·exp(−|u−v|/θ) sampled on the grid.
pub fn exp_kernel(grid: &Arc<Grid>, sigma: f64, theta: f64) -> Result<KernelMatrix> {
    if sigma <= 0.0 || theta <= 0.0 || !sigma.is_finite() || !theta.is_finite() {
        return Err(Error::Config(format!(
            "exp kernel needs sigma > 0 and theta > 0, got sigma={sigma}, theta={theta}"
        )));
    }
    let m = grid.len();
    let nodes = grid.nodes();
    let s2 = sigma * sigma;
    let entries = DMatrix::from_fn(m, m, |i, j| s2 * (-(nodes[i] - nodes[j]).abs() / theta).exp());
    KernelMatrix::new_symmetric(grid.clone(), entries)
}

/// Exponential covariance from config values, where sigma = 0 denotes a
/// degenerate (zero-covariance) law; positive sigma defers to
/// [`exp_kernel`] and its validation.
pub fn config_cov_kernel(grid: &Arc<Grid>, sigma: f64, theta: f64) -> Result<KernelMatrix> {
    if sigma == 0.0 {
        Ok(KernelMatrix::zero(grid.clone()))
    } else {
        exp_kernel(grid, sigma, theta)
    }
}

/// Scaled exponential autocorrelation kernel scale·exp(−|u−v|/θ) — the
/// alternative-hypothesis operator of the simulation study (scale 1/71).
/// Returned as a general kernel: it acts as Γ, not as a covariance.
pub fn scaled_exp_kernel(grid: &Arc<Grid>, scale: f64, theta: f64) -> Result<KernelMatrix> {
    if scale <= 0.0 || theta <= 0.0 || !scale.is_finite() || !theta.is_finite() {
        return Err(Error::Config(format!(
            "scaled exp kernel needs scale > 0 and theta > 0, got scale={scale}, theta={theta}"
        )));
    }
    let m = grid.len();
    let nodes = grid.nodes();
    let entries =
        DMatrix::from_fn(m, m, |i, j| scale * (-(nodes[i] - nodes[j]).abs() / theta).exp());
    KernelMatrix::new_general(grid.clone(), entries)
}

/// Which autocorrelation operator a simulation config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaKind {
    /// Γ = 0 (the null of the illustration).
    Zero,
    /// Γ = scale·exp(−|u−v|/gamma_theta) (the alternative).
    ExpScaled,
}

/// Plain-text simulation configuration (`key = value` lines, `#`
/// comments). Unset keys keep their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m: usize,
    pub sigma_eps: f64,
    pub theta_eps: f64,
    pub sigma_y0: f64,
    pub theta_y0: f64,
    pub gamma_kind: GammaKind,
    pub gamma_theta: f64,
    pub gamma_scale: f64,
    pub burn_in: usize,
    pub n: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    /// The simulation-study defaults: 71 nodes, σ_ε = 0.10, θ = 0.3 for
    /// both innovation and initial kernels, burn-in 500, Γ = 0.
    fn default() -> Self {
        Self {
            m: 71,
            sigma_eps: 0.10,
            theta_eps: 0.3,
            sigma_y0: 0.10,
            theta_y0: 0.3,
            gamma_kind: GammaKind::Zero,
            gamma_theta: 0.8,
            gamma_scale: 1.0 / 71.0,
            burn_in: DEFAULT_BURN_IN,
            n: 200,
            seed: 1,
        }
    }
}

impl SimConfig {
    /// Parses `key = value` text on top of the defaults. Unknown keys
    /// are an error; later lines win over earlier ones.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got {raw:?}", idx + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::Config(format!("line {}: {key} must be {what}, got {value:?}", idx + 1))
            };
            match key {
                "m" => cfg.m = value.parse().map_err(|_| bad("a positive integer"))?,
                "sigma_eps" => cfg.sigma_eps = value.parse().map_err(|_| bad("a number"))?,
                "theta_eps" => cfg.theta_eps = value.parse().map_err(|_| bad("a number"))?,
                "sigma_y0" => cfg.sigma_y0 = value.parse().map_err(|_| bad("a number"))?,
                "theta_y0" => cfg.theta_y0 = value.parse().map_err(|_| bad("a number"))?,
                "gamma_kind" => {
                    cfg.gamma_kind = match value {
                        "zero" => GammaKind::Zero,
                        "exp_scaled" => GammaKind::ExpScaled,
                        _ => return Err(bad("`zero` or `exp_scaled`")),
                    }
                }
                "gamma_theta" => cfg.gamma_theta = value.parse().map_err(|_| bad("a number"))?,
                "gamma_scale" => cfg.gamma_scale = value.parse().map_err(|_| bad("a number"))?,
                "burn_in" => cfg.burn_in = value.parse().map_err(|_| bad("an integer"))?,
                "n" => cfg.n = value.parse().map_err(|_| bad("a positive integer"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("an integer"))?,
                _ => {
                    return Err(Error::Config(format!("line {}: unknown key {key:?}", idx + 1)))
                }
            }
        }
        if cfg.m < 2 {
            return Err(Error::Config(format!("m must be at least 2, got {}", cfg.m)));
        }
        if cfg.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        Ok(cfg)
    }

    /// Serializes every key in a fixed order; `parse` round-trips it.
    pub fn to_text(&self) -> String {
        let kind = match self.gamma_kind {
            GammaKind::Zero => "zero",
            GammaKind::ExpScaled => "exp_scaled",
        };
        format!(
            "m = {}\nsigma_eps = {}\ntheta_eps = {}\nsigma_y0 = {}\ntheta_y0 = {}\n\
             gamma_kind = {}\ngamma_theta = {}\ngamma_scale = {}\nburn_in = {}\nn = {}\nseed = {}\n",
            self.m,
            self.sigma_eps,
            self.theta_eps,
            self.sigma_y0,
            self.theta_y0,
            kind,
            self.gamma_theta,
            self.gamma_scale,
            self.burn_in,
            self.n,
            self.seed,
        )
    }

    pub fn grid(&self) -> Arc<Grid> {
        Grid::uniform(self.m)
    }

    /// Builds the autocorrelation kernel on a given grid.
    pub fn gamma_kernel(&self, grid: &Arc<Grid>) -> Result<KernelMatrix> {
        match self.gamma_kind {
            GammaKind::Zero => Ok(KernelMatrix::zero(grid.clone())),
            GammaKind::ExpScaled => scaled_exp_kernel(grid, self.gamma_scale, self.gamma_theta),
        }
    }

    /// Builds the full ARH(1) spec on the config's uniform grid.
    pub fn build(&self) -> Result<ARHSpec> {
        self.build_on(&self.grid())
    }

    /// Builds the ARH(1) spec on an explicit grid (used for quadrature
    /// sensitivity checks).
    pub fn build_on(&self, grid: &Arc<Grid>) -> Result<ARHSpec> {
        let gamma = self.gamma_kernel(grid)?;
        let noise =
            GaussianSpec::centered(config_cov_kernel(grid, self.sigma_eps, self.theta_eps)?)?;
        let initial =
            GaussianSpec::centered(config_cov_kernel(grid, self.sigma_y0, self.theta_y0)?)?;
        ARHSpec::new(gamma, noise, initial, self.burn_in, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;
    use approx::assert_relative_eq;

    fn eps_spec(grid: &Arc<Grid>) -> GaussianSpec {
        GaussianSpec::centered(exp_kernel(grid, 0.10, 0.3).unwrap()).unwrap()
    }

    /// Sample covariance matrix of draws (rows of `draws`).
    fn sample_cov(draws: &[Vec<f64>], m: usize) -> DMatrix<f64> {
        let r = draws.len() as f64;
        let mut cov = DMatrix::zeros(m, m);
        for d in draws {
            for a in 0..m {
                for b in a..m {
                    cov[(a, b)] += d[a] * d[b];
                }
            }
        }
        for a in 0..m {
            for b in a..m {
                cov[(a, b)] /= r;
                cov[(b, a)] = cov[(a, b)];
            }
        }
        cov
    }

    fn frob(x: &DMatrix<f64>) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn exp_kernel_values() {
        let grid = Grid::uniform(71);
        let k = exp_kernel(&grid, 0.10, 0.3).unwrap();
        for i in 0..71 {
            assert_relative_eq!(k.entries()[(i, i)], 0.01, epsilon = 1e-15);
        }
        // Nodes 0 and 21 are distance 0.3 apart: entry σ²·e^{−1}.
        assert_relative_eq!(grid.nodes()[21] - grid.nodes()[0], 0.3, epsilon = 1e-12);
        assert_relative_eq!(
            k.entries()[(0, 21)],
            0.01 * (-1.0f64).exp(),
            max_relative = 1e-12
        );
        // Huge length scale: constant kernel.
        let flat = exp_kernel(&grid, 0.10, 1e12).unwrap();
        for v in flat.entries().iter() {
            assert_relative_eq!(*v, 0.01, max_relative = 1e-10);
        }
    }

    #[test]
    fn exp_kernel_rejects_bad_params() {
        let grid = Grid::uniform(5);
        assert!(exp_kernel(&grid, 0.0, 0.3).is_err());
        assert!(exp_kernel(&grid, 0.1, -1.0).is_err());
        assert!(scaled_exp_kernel(&grid, -0.1, 0.8).is_err());
    }

    #[test]
    fn zero_kernel_draws_the_mean() {
        let grid = Grid::uniform(11);
        let mean =
            GridFunction::new(grid.clone(), (0..11).map(|i| i as f64).collect()).unwrap();
        let spec = GaussianSpec::centered(KernelMatrix::zero(grid))
            .unwrap()
            .with_mean(mean.clone())
            .unwrap();
        let draw = sample_gaussian(&spec, RngStream::new(9, 0, Purpose::Series)).unwrap();
        assert_eq!(draw.values(), mean.values());
    }

    #[test]
    fn sampling_is_reproducible() {
        let grid = Grid::uniform(31);
        let spec = eps_spec(&grid);
        let s = RngStream::new(77, 3, Purpose::Series);
        let a = sample_gaussian(&spec, s).unwrap();
        let b = sample_gaussian(&spec, s).unwrap();
        assert_eq!(a.values(), b.values());
        let c = sample_gaussian(&spec, RngStream::new(77, 4, Purpose::Series)).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn full_kl_matches_cholesky_covariance() {
        // With all m terms kept, the KL path draws from the same measure
        // as the Cholesky path: both sample covariances should sit near
        // the true kernel.
        let grid = Grid::uniform(21);
        let spec = eps_spec(&grid);
        let kl_spec = spec.clone().with_kl_truncation(21).unwrap();
        let n_draws = 5000;
        let mut rng_a = RngStream::new(5, 0, Purpose::Series).rng();
        let mut rng_b = RngStream::new(5, 1, Purpose::Series).rng();
        let chol = GaussianSampler::prepare(&spec).unwrap();
        let kl = GaussianSampler::prepare(&kl_spec).unwrap();
        let draws_a: Vec<Vec<f64>> = (0..n_draws)
            .map(|_| chol.sample(&mut rng_a).into_values())
            .collect();
        let draws_b: Vec<Vec<f64>> = (0..n_draws)
            .map(|_| kl.sample(&mut rng_b).into_values())
            .collect();
        let truth = spec.kernel().entries();
        let rel_a = frob(&(sample_cov(&draws_a, 21) - truth)) / frob(truth);
        let rel_b = frob(&(sample_cov(&draws_b, 21) - truth)) / frob(truth);
        assert!(rel_a < 0.05, "Cholesky sample covariance off by {rel_a}");
        assert!(rel_b < 0.05, "full-KL sample covariance off by {rel_b}");
    }

    #[test]
    fn truncated_kl_variance_matches_eigen_oracle() {
        // M = 5: pointwise variance at node 0 must match Σ_{k≤5} λ_k·φ_k(0)².
        let grid = Grid::uniform(71);
        let spec = eps_spec(&grid).with_kl_truncation(5).unwrap();
        let (vals, funcs) = weighted_symmetric_eigen(spec.kernel()).unwrap();
        let oracle: f64 = (0..5).map(|k| vals[k].max(0.0) * funcs[(0, k)].powi(2)).sum();
        let sampler = GaussianSampler::prepare(&spec).unwrap();
        let mut rng = RngStream::new(11, 0, Purpose::Series).rng();
        let n_draws = 5000;
        let mut sum_sq = 0.0;
        for _ in 0..n_draws {
            let v = sampler.sample(&mut rng).values()[0];
            sum_sq += v * v;
        }
        let var = sum_sq / n_draws as f64;
        assert_relative_eq!(var, oracle, max_relative = 0.10);
    }

    #[test]
    fn projection_direction_lies_in_top5_span() {
        let grid = Grid::uniform(71);
        let spec = eps_spec(&grid);
        let dir = draw_projection_direction(&spec, RngStream::new(3, 0, Purpose::GammaEps))
            .unwrap();
        let (_, funcs) = weighted_symmetric_eigen(spec.kernel()).unwrap();
        // Remove the top-5 components; the remainder must vanish.
        let mut resid: Vec<f64> = dir.values().to_vec();
        for k in 0..5 {
            let phi: Vec<f64> = (0..71).map(|i| funcs[(i, k)]).collect();
            let coef = grid.dot(dir.values(), &phi);
            for i in 0..71 {
                resid[i] -= coef * phi[i];
            }
        }
        let norm = grid.dot(&resid, &resid).sqrt();
        assert!(norm < 1e-10, "projection outside top-5 span: {norm}");
        // Distinct streams give distinct directions.
        let other = draw_projection_direction(&spec, RngStream::new(3, 1, Purpose::GammaEps))
            .unwrap();
        let diff: f64 = dir
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        assert!(diff > 0.0);
    }

    #[test]
    fn projection_direction_covariance_matches_truncation() {
        // Empirical covariance of many directions ≈ rank-5 truncation of
        // the kernel.
        let grid = Grid::uniform(21);
        let spec = eps_spec(&grid);
        let (vals, funcs) = weighted_symmetric_eigen(spec.kernel()).unwrap();
        let m = 21;
        let mut truth = DMatrix::zeros(m, m);
        for k in 0..5 {
            let lam = vals[k].max(0.0);
            for a in 0..m {
                for b in 0..m {
                    truth[(a, b)] += lam * funcs[(a, k)] * funcs[(b, k)];
                }
            }
        }
        let draws: Vec<Vec<f64>> = (0..5000)
            .map(|rep| {
                draw_projection_direction(&spec, RngStream::new(6, rep, Purpose::GammaY))
                    .unwrap()
                    .into_values()
            })
            .collect();
        let rel = frob(&(sample_cov(&draws, m) - &truth)) / frob(&truth);
        assert!(rel < 0.05, "direction covariance off by {rel}");
    }

    #[test]
    fn degenerate_arh_is_identically_zero() {
        let grid = Grid::uniform(11);
        let zero_noise = GaussianSpec::centered(KernelMatrix::zero(grid.clone())).unwrap();
        let spec = ARHSpec::new(
            KernelMatrix::zero(grid.clone()),
            zero_noise.clone(),
            zero_noise,
            50,
            20,
        )
        .unwrap();
        let series = simulate_arh1(&spec, RngStream::new(0, 0, Purpose::Series)).unwrap();
        assert_eq!(series.len(), 20);
        assert!((0..20).all(|t| series.row(t).iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn white_noise_has_vanishing_lag1_trace() {
        // Γ = 0: successive observations are independent, so the mean of
        // ⟨Y_i, Y_{i+1}⟩ is 0 within Monte Carlo error.
        let grid = Grid::uniform(31);
        let spec = ARHSpec::new(
            KernelMatrix::zero(grid.clone()),
            eps_spec(&grid),
            eps_spec(&grid),
            0,
            2000,
        )
        .unwrap();
        let series = simulate_arh1(&spec, RngStream::new(13, 0, Purpose::Series)).unwrap();
        let ips: Vec<f64> = (0..1999)
            .map(|i| grid.dot(series.row(i), series.row(i + 1)))
            .collect();
        let mean = ips.iter().sum::<f64>() / ips.len() as f64;
        let var = ips.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (ips.len() - 1) as f64;
        let stderr = (var / ips.len() as f64).sqrt();
        assert!(
            mean.abs() < 3.0 * stderr,
            "lag-1 trace {mean} exceeds 3×stderr {stderr}"
        );
    }

    #[test]
    fn alternative_kernel_induces_positive_autocorrelation() {
        // Under the scaled exponential Γ the first principal score is
        // positively autocorrelated; 50 repetitions push the mean
        // correlation well past 3 standard errors.
        let grid = Grid::uniform(71);
        let gamma = scaled_exp_kernel(&grid, 1.0 / 71.0, 0.8).unwrap();
        let spec = ARHSpec::new(gamma, eps_spec(&grid), eps_spec(&grid), 100, 200).unwrap();
        let (_, funcs) = weighted_symmetric_eigen(
            &exp_kernel(&grid, 0.10, 0.3).unwrap(),
        )
        .unwrap();
        let phi1: Vec<f64> = (0..71).map(|i| funcs[(i, 0)]).collect();
        let mut corrs = Vec::new();
        for rep in 0..50 {
            let series = simulate_arh1(&spec, RngStream::new(21, rep, Purpose::Series)).unwrap();
            let scores: Vec<f64> = (0..200).map(|t| grid.dot(series.row(t), &phi1)).collect();
            let mean = scores.iter().sum::<f64>() / 200.0;
            let mut num = 0.0;
            let mut den = 0.0;
            for t in 0..200 {
                let d = scores[t] - mean;
                den += d * d;
                if t < 199 {
                    num += d * (scores[t + 1] - mean);
                }
            }
            corrs.push(num / den);
        }
        let mean = corrs.iter().sum::<f64>() / corrs.len() as f64;
        let var = corrs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (corrs.len() - 1) as f64;
        let stderr = (var / corrs.len() as f64).sqrt();
        assert!(
            mean > 3.0 * stderr,
            "lag-1 score correlation {mean} not significantly positive (stderr {stderr})"
        );
    }

    #[test]
    fn alternative_kernel_is_contractive() {
        let grid = Grid::uniform(71);
        let gamma = scaled_exp_kernel(&grid, 1.0 / 71.0, 0.8).unwrap();
        let spec = ARHSpec::new(gamma, eps_spec(&grid), eps_spec(&grid), 500, 100).unwrap();
        assert!(spec.is_contractive(), "proxy = {}", spec.spectral_proxy());
        assert!(spec.spectral_proxy() > 0.0);
    }

    #[test]
    fn norm_sequence_has_no_trend() {
        // Stationarity proxy: regress ‖Y_t‖ on t over a long simulated
        // stretch; the slope's t-statistic stays below the 1% critical
        // value.
        let grid = Grid::uniform(31);
        let gamma = scaled_exp_kernel(&grid, 1.0 / 71.0, 0.8).unwrap();
        let spec = ARHSpec::new(gamma, eps_spec(&grid), eps_spec(&grid), 200, 2000).unwrap();
        let series = simulate_arh1(&spec, RngStream::new(31, 0, Purpose::Series)).unwrap();
        let norms: Vec<f64> = (0..2000)
            .map(|t| grid.dot(series.row(t), series.row(t)).sqrt())
            .collect();
        let n = norms.len() as f64;
        let tbar = (n - 1.0) / 2.0;
        let ybar = norms.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (t, y) in norms.iter().enumerate() {
            let dt = t as f64 - tbar;
            sxx += dt * dt;
            sxy += dt * (y - ybar);
        }
        let slope = sxy / sxx;
        let resid_var: f64 = norms
            .iter()
            .enumerate()
            .map(|(t, y)| {
                let fit = ybar + slope * (t as f64 - tbar);
                (y - fit).powi(2)
            })
            .sum::<f64>()
            / (n - 2.0);
        let t_stat = slope / (resid_var / sxx).sqrt();
        assert!(t_stat.abs() < 2.576, "trend t-statistic {t_stat}");
    }

    #[test]
    fn burn_in_washes_out_initial_scale() {
        // Doubling the initial measure's σ must not move the variance of
        // the first retained score beyond Monte Carlo resolution.
        let grid = Grid::uniform(21);
        let gamma = scaled_exp_kernel(&grid, 1.0 / 71.0, 0.8).unwrap();
        let (_, funcs) = weighted_symmetric_eigen(
            &exp_kernel(&grid, 0.10, 0.3).unwrap(),
        )
        .unwrap();
        let phi1: Vec<f64> = (0..21).map(|i| funcs[(i, 0)]).collect();
        let reps = 200;
        let mut variances = Vec::new();
        for sigma0 in [0.10, 0.20] {
            let initial =
                GaussianSpec::centered(exp_kernel(&grid, sigma0, 0.3).unwrap()).unwrap();
            let spec =
                ARHSpec::new(gamma.clone(), eps_spec(&grid), initial, DEFAULT_BURN_IN, 1)
                    .unwrap();
            let scores: Vec<f64> = (0..reps)
                .map(|rep| {
                    let s =
                        simulate_arh1(&spec, RngStream::new(55, rep, Purpose::Series)).unwrap();
                    grid.dot(s.row(0), &phi1)
                })
                .collect();
            let mean = scores.iter().sum::<f64>() / reps as f64;
            let var =
                scores.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            variances.push(var);
        }
        // Var of a sample variance ≈ 2σ⁴/(R−1) for Gaussian data.
        let se: f64 = variances
            .iter()
            .map(|v| 2.0 * v * v / (reps - 1) as f64)
            .sum::<f64>()
            .sqrt();
        assert!(
            (variances[0] - variances[1]).abs() < 3.0 * se,
            "burn-in leak: variances {variances:?}, se {se}"
        );
    }

    #[test]
    fn series_draws_are_prefix_stable() {
        // Extending n under the same stream extends the series without
        // changing the earlier rows (common random numbers across n).
        let grid = Grid::uniform(11);
        let base = SimConfig {
            m: 11,
            n: 40,
            burn_in: 30,
            ..SimConfig::default()
        };
        let spec_small = base.build().unwrap();
        let spec_large = SimConfig { n: 80, ..base }.build().unwrap();
        let s = RngStream::new(100, 2, Purpose::Series);
        let small = simulate_arh1(&spec_small, s).unwrap();
        let large = simulate_arh1(&spec_large, s).unwrap();
        for t in 0..40 {
            assert_eq!(small.row(t), large.row(t));
        }
    }

    #[test]
    fn sim_config_round_trips() {
        let cfg = SimConfig {
            m: 31,
            sigma_eps: 0.25,
            gamma_kind: GammaKind::ExpScaled,
            gamma_scale: 0.02,
            seed: 998877,
            ..SimConfig::default()
        };
        let text = cfg.to_text();
        assert_eq!(SimConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn sim_config_parse_errors() {
        assert!(SimConfig::parse("sigma_eps = heaps").is_err());
        assert!(SimConfig::parse("mystery = 3").is_err());
        assert!(SimConfig::parse("m 71").is_err());
        assert!(SimConfig::parse("gamma_kind = cubic").is_err());
        // Comments and blank lines are fine.
        let ok = SimConfig::parse("# study\n\nn = 50 # small\n").unwrap();
        assert_eq!(ok.n, 50);
    }
}
