//! Empirical second-order structure and the projection estimator of the
//! autocorrelation operator.
//!
//! Covariance kernels here are bilinear-form kernels (no quadrature
//! weights folded in): `entries[a][b]` estimates E[Y(u_a)Y(u_b)]. The
//! autocorrelation estimate, by contrast, is returned as an
//! apply-convention matrix (weights folded), directly usable with
//! [`KernelMatrix::apply`] like the simulation kernels.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::func::{
    weighted_symmetric_eigen, FunctionalSeries, Grid, GridFunction, KernelMatrix,
};

/// Eigenvalues (descending, nonnegative) and eigenfunctions (orthonormal
/// in the quadrature inner product) of a symmetric kernel.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    grid: Arc<Grid>,
    eigenvalues: Vec<f64>,
    /// Column k holds φ_k on the grid.
    functions: DMatrix<f64>,
}

impl EigenSystem {
    /// Wraps an explicit eigensystem; functions must be orthonormal in
    /// the grid's inner product to 1e−8.
    pub fn new(grid: Arc<Grid>, eigenvalues: Vec<f64>, functions: DMatrix<f64>) -> Result<Self> {
        let m = grid.len();
        let k = eigenvalues.len();
        if functions.nrows() != m || functions.ncols() != k {
            return Err(Error::InvalidShape(format!(
                "eigensystem functions are {}×{}, expected {m}×{k}",
                functions.nrows(),
                functions.ncols()
            )));
        }
        if eigenvalues.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite {
                context: "eigenvalues must be finite and nonnegative",
            });
        }
        if eigenvalues.windows(2).any(|p| p[1] > p[0]) {
            return Err(Error::InvalidShape(
                "eigenvalues must be in descending order".into(),
            ));
        }
        for a in 0..k {
            for b in a..k {
                let ip = grid.dot(functions.column(a).as_slice(), functions.column(b).as_slice());
                let expect = if a == b { 1.0 } else { 0.0 };
                if (ip - expect).abs() > 1e-8 {
                    return Err(Error::InvalidShape(format!(
                        "eigenfunctions {a},{b} not orthonormal: ⟨φ_{a},φ_{b}⟩ = {ip}"
                    )));
                }
            }
        }
        Ok(Self {
            grid,
            eigenvalues,
            functions,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// φ_k as a slice of grid values.
    pub fn function(&self, k: usize) -> &[f64] {
        // Column-major storage: column k is contiguous.
        let m = self.functions.nrows();
        &self.functions.as_slice()[k * m..(k + 1) * m]
    }

    pub fn grid_function(&self, k: usize) -> GridFunction {
        GridFunction::new(self.grid.clone(), self.function(k).to_vec())
            .expect("eigenfunction values finite")
    }
}

/// Empirical covariance kernel of a series.
///
/// Lag 0: symmetric kernel (1/n)Σ_i Y_i(u_a)Y_i(u_b). Lag 1: general
/// cross-covariance kernel (1/(n−1))Σ_{i<n} Y_i(u_a)Y_{i+1}(u_b).
pub fn empirical_cov_operator(series: &FunctionalSeries, lag: usize) -> Result<KernelMatrix> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let m = series.grid().len();
    let grid = series.grid().clone();
    match lag {
        0 => {
            let x = DMatrix::from_fn(n, m, |i, a| series.row(i)[a]);
            let c = x.tr_mul(&x) / n as f64;
            KernelMatrix::new_symmetric(grid, c)
        }
        1 => {
            let x0 = DMatrix::from_fn(n - 1, m, |i, a| series.row(i)[a]);
            let x1 = DMatrix::from_fn(n - 1, m, |i, a| series.row(i + 1)[a]);
            let c = x0.tr_mul(&x1) / (n - 1) as f64;
            KernelMatrix::new_general(grid, c)
        }
        _ => Err(Error::Config(format!("lag must be 0 or 1, got {lag}"))),
    }
}

/// Weighted symmetric eigendecomposition of a covariance kernel:
/// descending eigenvalues clamped at zero, eigenfunctions orthonormal in
/// the quadrature inner product with a deterministic sign convention.
pub fn eigen_decompose(kernel: &KernelMatrix) -> Result<EigenSystem> {
    let (raw, functions) = weighted_symmetric_eigen(kernel)?;
    let eigenvalues = raw.into_iter().map(|v| v.max(0.0)).collect();
    Ok(EigenSystem {
        grid: kernel.grid().clone(),
        eigenvalues,
        functions,
    })
}

/// Basis used by [`estimate_autocorrelation`].
pub enum BasisChoice<'a> {
    /// Eigenpairs of the empirical lag-0 covariance of the series.
    Empirical,
    /// Externally known eigenfunctions; per-function variances are
    /// re-estimated from the sample as (1/n)Σ_i⟨Y_i,φ_k⟩².
    Known(&'a EigenSystem),
}

/// The estimated autocorrelation operator.
#[derive(Debug, Clone)]
pub struct GammaEstimate {
    operator: KernelMatrix,
    k_n: usize,
    basis: EigenSystem,
    /// coefficients[(l,j)] maps the j-th input score to the l-th output
    /// basis function.
    coefficients: DMatrix<f64>,
    operator_norm: f64,
    norm_bound: f64,
}

impl GammaEstimate {
    /// The estimate as an apply-convention kernel matrix.
    pub fn operator(&self) -> &KernelMatrix {
        &self.operator
    }

    pub fn k_n(&self) -> usize {
        self.k_n
    }

    pub fn basis(&self) -> &EigenSystem {
        &self.basis
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    /// Operator norm of the estimate (largest singular value in H).
    pub fn operator_norm(&self) -> f64 {
        self.operator_norm
    }

    /// The a-priori bound ‖D_n‖·max_{j≤k_n} λ_j^{−1} that the estimate's
    /// norm can never exceed.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Operator-norm error against a reference apply-convention kernel,
    /// restricted to the estimation basis on both sides: the largest
    /// singular value of the k_n×k_n coefficient difference
    /// ⟨φ_l, (Γ̂ − Γ_ref)(φ_j)⟩.
    pub fn restricted_error(&self, reference: &KernelMatrix) -> Result<f64> {
        if !crate::func::same_grid(self.operator.grid(), reference.grid()) {
            return Err(Error::GridMismatch {
                context: "restricted_error",
                left: self.operator.grid().len(),
                right: reference.grid().len(),
            });
        }
        let grid = self.operator.grid();
        let k = self.k_n;
        let mut ref_coefs = DMatrix::zeros(k, k);
        for j in 0..k {
            let phi_j = self.basis.grid_function(j);
            let mapped = reference.apply(&phi_j)?;
            for l in 0..k {
                ref_coefs[(l, j)] = grid.dot(self.basis.function(l), mapped.values());
            }
        }
        let diff = &self.coefficients - ref_coefs;
        Ok(diff.singular_values().max())
    }
}

/// Default truncation level: max(1, ⌊ln n⌋), before the relative
/// eigenvalue floor is applied.
pub fn default_k_n(n: usize) -> usize {
    ((n as f64).ln().floor() as usize).max(1)
}

/// Relative floor under which trailing eigenvalues are dropped from the
/// default truncation schedule.
const EIGENVALUE_FLOOR: f64 = 1e-6;

/// Estimates the autocorrelation operator by projecting onto the leading
/// eigenfunctions of the covariance:
/// Γ̂(f) = Σ_{l≤k} Σ_{j≤k} λ_j^{−1}·[(1/(n−1))Σ_i⟨Y_i,φ_j⟩⟨Y_{i+1},φ_l⟩]·⟨f,φ_j⟩·φ_l.
///
/// `k_n = None` uses the default schedule max(1,⌊ln n⌋) truncated to
/// eigenvalues above 1e−6·λ_1; an explicit `k_n` is used as-is and any
/// nonpositive eigenvalue among the first k_n is an error.
pub fn estimate_autocorrelation(
    series: &FunctionalSeries,
    k_n: Option<usize>,
    basis: BasisChoice<'_>,
) -> Result<GammaEstimate> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let grid = series.grid().clone();
    let m = grid.len();

    let basis_sys: EigenSystem = match basis {
        BasisChoice::Empirical => eigen_decompose(&empirical_cov_operator(series, 0)?)?,
        BasisChoice::Known(sys) => {
            if !crate::func::same_grid(&grid, sys.grid()) {
                return Err(Error::GridMismatch {
                    context: "estimate_autocorrelation basis",
                    left: grid.len(),
                    right: sys.grid().len(),
                });
            }
            // Re-estimate per-direction variances from the sample.
            let k = sys.len();
            let mut lambda = vec![0.0; k];
            for i in 0..n {
                for j in 0..k {
                    let s = grid.dot(series.row(i), sys.function(j));
                    lambda[j] += s * s;
                }
            }
            for v in &mut lambda {
                *v /= n as f64;
            }
            // Known bases need not be variance-ordered; keep function
            // order but expose the estimated variances.
            EigenSystem {
                grid: grid.clone(),
                eigenvalues: lambda,
                functions: sys.functions.clone(),
            }
        }
    };

    let available = basis_sys.len();
    let lead = basis_sys.eigenvalues.first().copied().unwrap_or(0.0);
    if lead <= 0.0 {
        return Err(Error::Numerical(
            "covariance estimate is identically zero; no basis to project on".into(),
        ));
    }
    let k = match k_n {
        Some(k) => {
            if k == 0 || k > available.min(m) {
                return Err(Error::Config(format!(
                    "k_n must be in 1..={}, got {k}",
                    available.min(m)
                )));
            }
            // Eigenvalues get inverted below; values at round-off scale
            // (rank-deficient samples) fail the positivity precondition
            // just like exact zeros.
            if let Some(bad) =
                (0..k).find(|&j| basis_sys.eigenvalues[j] <= EIGENVALUE_FLOOR * lead)
            {
                return Err(Error::Numerical(format!(
                    "eigenvalue {} of the estimation basis is not usably positive ({:e})",
                    bad + 1,
                    basis_sys.eigenvalues[bad]
                )));
            }
            k
        }
        None => {
            let schedule = default_k_n(n).min(available).min(m);
            let floored = (0..schedule)
                .take_while(|&j| basis_sys.eigenvalues[j] > EIGENVALUE_FLOOR * lead)
                .count();
            floored.max(1)
        }
    };

    // Scores S[i][j] = ⟨Y_i, φ_j⟩ for the k retained directions.
    let scores = DMatrix::from_fn(n, k, |i, j| grid.dot(series.row(i), basis_sys.function(j)));
    let s0 = scores.rows(0, n - 1);
    let s1 = scores.rows(1, n - 1);
    // coefficients[(l,j)] = λ_j^{−1}/(n−1)·Σ_i S[i][j]·S[i+1][l].
    let mut coefficients = s1.tr_mul(&s0) / (n - 1) as f64;
    for j in 0..k {
        let inv = 1.0 / basis_sys.eigenvalues[j];
        for l in 0..k {
            coefficients[(l, j)] *= inv;
        }
    }

    // Assemble the apply-convention matrix M = Φ·B·(W∘Φ)ᵀ so that
    // M·f = Σ_{l,j} B[l][j]·⟨f,φ_j⟩·φ_l with the plain product M·f.
    let w = grid.weights();
    let phi_out = DMatrix::from_fn(m, k, |a, l| basis_sys.function(l)[a]);
    let phi_in_w = DMatrix::from_fn(m, k, |a, j| w[a] * basis_sys.function(j)[a]);
    let matrix = &phi_out * &coefficients * phi_in_w.transpose();
    let operator = KernelMatrix::new_general(grid.clone(), matrix)?;

    let operator_norm = operator.operator_norm();
    let d1 = empirical_cov_operator(series, 1)?;
    let max_inv_lambda = (0..k)
        .map(|j| 1.0 / basis_sys.eigenvalues[j])
        .fold(0.0f64, f64::max);
    let norm_bound = d1.operator_norm_integral() * max_inv_lambda;
    debug_assert!(
        operator_norm <= norm_bound * (1.0 + 1e-9) + 1e-300,
        "estimate norm {operator_norm} exceeds bound {norm_bound}"
    );

    let basis_trunc = EigenSystem {
        grid,
        eigenvalues: basis_sys.eigenvalues[..k].to_vec(),
        functions: basis_sys.functions.columns(0, k).into_owned(),
    };
    Ok(GammaEstimate {
        operator,
        k_n: k,
        basis: basis_trunc,
        coefficients,
        operator_norm,
        norm_bound,
    })
}

/// Innovation covariance implied by the null operator:
/// Ĉ₀^Y − Γ₀·Ĉ₀^Y·Γ₀ᵀ, symmetrized and clamped to PSD.
///
/// Γ₀ is an apply-convention kernel; the covariance is a bilinear-form
/// kernel, so the matrix products here mirror operator composition
/// under that mixed convention.
pub fn innovation_cov_h0(series: &FunctionalSeries, gamma0: &KernelMatrix) -> Result<KernelMatrix> {
    if !crate::func::same_grid(series.grid(), gamma0.grid()) {
        return Err(Error::GridMismatch {
            context: "innovation_cov_h0",
            left: series.grid().len(),
            right: gamma0.grid().len(),
        });
    }
    let cov = empirical_cov_operator(series, 0)?;
    if gamma0.entries().iter().all(|&v| v == 0.0) {
        return Ok(cov);
    }
    let g = gamma0.entries();
    let raw = cov.entries() - g * cov.entries() * g.transpose();
    // Exact-symmetrize (the formula is symmetric up to round-off).
    let mut sym = raw.clone();
    for a in 0..sym.nrows() {
        for b in (a + 1)..sym.ncols() {
            let avg = (raw[(a, b)] + raw[(b, a)]) / 2.0;
            sym[(a, b)] = avg;
            sym[(b, a)] = avg;
        }
    }
    let kernel = KernelMatrix::new_symmetric(series.grid().clone(), sym)?;
    // Clamp any negative eigenvalues (possible in finite samples).
    let (raw_vals, functions) = weighted_symmetric_eigen(&kernel)?;
    if raw_vals.last().copied().unwrap_or(0.0) >= 0.0 {
        return Ok(kernel);
    }
    let m = kernel.grid().len();
    let mut rebuilt = DMatrix::zeros(m, m);
    for k in 0..m {
        let lam = raw_vals[k].max(0.0);
        if lam == 0.0 {
            continue;
        }
        for a in 0..m {
            for b in 0..m {
                rebuilt[(a, b)] += lam * functions[(a, k)] * functions[(b, k)];
            }
        }
    }
    KernelMatrix::new_symmetric(series.grid().clone(), rebuilt)
}
