//! Discretized Hilbert-space primitives.
//!
//! Functions in H = L²[0,1] are represented by their values on a fixed
//! grid of m nodes with positive quadrature weights. Inner products and
//! trace norms use the weights explicitly; operator application is a plain
//! matrix–vector product, i.e. the quadrature weight is expected to be
//! folded into the kernel scaling (the integral ∫K(u,v)f(v)dv on the
//! default uniform grid corresponds to a kernel carrying a 1/m factor).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for the near-symmetry check when constructing a
/// symmetric kernel; within it, the matrix is forced exactly symmetric.
const SYMMETRY_RTOL: f64 = 1e-8;

/// Discretization of [0,1]: strictly increasing nodes with positive
/// quadrature weights. Immutable and shared by handle (`Arc`).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds a grid from explicit nodes and weights.
    ///
    /// Nodes must be strictly increasing within [0,1]; weights must be
    /// positive and finite.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if nodes.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "grid needs at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.len() != weights.len() {
            return Err(Error::InvalidShape(format!(
                "grid has {} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes[0] < 0.0 || *nodes.last().unwrap() > 1.0 {
            return Err(Error::InvalidShape("grid nodes must lie in [0,1]".into()));
        }
        if nodes.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidShape(
                "grid nodes must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidShape(
                "grid weights must be positive and finite".into(),
            ));
        }
        Ok(Arc::new(Self { nodes, weights }))
    }

    /// Uniform grid: m equispaced nodes i/(m−1) on [0,1], each with
    /// quadrature weight 1/m. This is the default convention everywhere.
    pub fn uniform(m: usize) -> Arc<Self> {
        assert!(m >= 2, "uniform grid needs at least 2 nodes");
        let h = 1.0 / (m as f64 - 1.0);
        let nodes = (0..m).map(|i| i as f64 * h).collect();
        let weights = vec![1.0 / m as f64; m];
        Arc::new(Self { nodes, weights })
    }

    /// Same nodes as [`Grid::uniform`] but trapezoid-rule weights
    /// (h/2 at the endpoints, h inside). Used to probe sensitivity of
    /// results to the quadrature convention.
    pub fn trapezoid(m: usize) -> Arc<Self> {
        assert!(m >= 2, "trapezoid grid needs at least 2 nodes");
        let h = 1.0 / (m as f64 - 1.0);
        let nodes = (0..m).map(|i| i as f64 * h).collect();
        let mut weights = vec![h; m];
        weights[0] = h / 2.0;
        weights[m - 1] = h / 2.0;
        Arc::new(Self { nodes, weights })
    }

    /// Number of nodes m.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weighted dot product Σ_i w_i a_i b_i of two coordinate slices.
    /// Lengths must already match the grid; hot paths call this directly.
    pub(crate) fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.len());
        debug_assert_eq!(b.len(), self.len());
        let mut acc = 0.0;
        for i in 0..a.len() {
            acc += self.weights[i] * a[i] * b[i];
        }
        acc
    }
}

/// True when two grid handles refer to the same discretization
/// (pointer-identical or structurally equal).
pub fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn check_same_grid(a: &Arc<Grid>, b: &Arc<Grid>, context: &'static str) -> Result<()> {
    if same_grid(a, b) {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            context,
            left: a.len(),
            right: b.len(),
        })
    }
}

/// An element of H: one value per grid node.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps a value vector; length must equal the node count and every
    /// value must be finite.
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidShape(format!(
                "function has {} values on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "grid function values",
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self> {
        let values = vec![c; grid.len()];
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Quadrature inner product ⟨f,g⟩ = Σ_i w_i f_i g_i.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid, "inner_product")?;
        Ok(self.grid.dot(&self.values, &other.values))
    }

    /// Norm ‖f‖ = sqrt(⟨f,f⟩).
    pub fn norm(&self) -> f64 {
        self.grid.dot(&self.values, &self.values).sqrt()
    }

    /// Pointwise difference f − g.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid, "sub")?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Pointwise sum f + g.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid, "add")?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Scalar multiple c·f.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// A kernel sampled on the grid: an m×m matrix acting on grid functions
/// by plain matrix–vector product. Symmetric kernels (covariances) carry
/// a flag set at construction; general kernels (autocorrelation
/// operators) do not.
///
/// Positive semidefiniteness of covariance kernels is *not* checked at
/// construction: eigenvalues slightly negative from round-off are clamped
/// to zero where they are consumed (sampling, eigendecomposition).
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: Arc<Grid>,
    entries: DMatrix<f64>,
    symmetric: bool,
}

impl KernelMatrix {
    /// Wraps a general (not necessarily symmetric) m×m matrix.
    pub fn new_general(grid: Arc<Grid>, entries: DMatrix<f64>) -> Result<Self> {
        Self::check_entries(&grid, &entries)?;
        Ok(Self {
            grid,
            entries,
            symmetric: false,
        })
    }

    /// Wraps a symmetric matrix. The input must be symmetric to within
    /// 1e−8 relative; it is then forced exactly symmetric by averaging
    /// with its transpose so downstream exact-equality invariants hold.
    pub fn new_symmetric(grid: Arc<Grid>, entries: DMatrix<f64>) -> Result<Self> {
        Self::check_entries(&grid, &entries)?;
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        let mut max_asym: f64 = 0.0;
        for i in 0..entries.nrows() {
            for j in (i + 1)..entries.ncols() {
                max_asym = max_asym.max((entries[(i, j)] - entries[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_RTOL * scale {
            return Err(Error::NotSymmetric {
                context: "symmetric kernel construction",
                max_asym,
            });
        }
        let mut sym = entries;
        for i in 0..sym.nrows() {
            for j in (i + 1)..sym.ncols() {
                let avg = (sym[(i, j)] + sym[(j, i)]) / 2.0;
                sym[(i, j)] = avg;
                sym[(j, i)] = avg;
            }
        }
        Ok(Self {
            grid,
            entries: sym,
            symmetric: true,
        })
    }

    fn check_entries(grid: &Arc<Grid>, entries: &DMatrix<f64>) -> Result<()> {
        let m = grid.len();
        if entries.nrows() != m || entries.ncols() != m {
            return Err(Error::InvalidShape(format!(
                "kernel is {}×{} on a {}-node grid",
                entries.nrows(),
                entries.ncols(),
                m
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "kernel entries",
            });
        }
        Ok(())
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        let m = grid.len();
        Self {
            grid,
            entries: DMatrix::zeros(m, m),
            symmetric: true,
        }
    }

    pub fn identity(grid: Arc<Grid>) -> Self {
        let m = grid.len();
        Self {
            grid,
            entries: DMatrix::identity(m, m),
            symmetric: true,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Applies the kernel to a function: (Kf)_i = Σ_j K[i,j]·f_j.
    ///
    /// This is a plain matrix–vector product — kernels are expected to
    /// carry their own quadrature scaling (see module docs).
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        check_same_grid(&self.grid, &f.grid, "apply_operator")?;
        let v = DVector::from_column_slice(&f.values);
        let out = &self.entries * v;
        GridFunction::new(self.grid.clone(), out.as_slice().to_vec())
    }

    /// Bilinear form ∬ f(u)·K(u,v)·g(v) du dv of a kernel that does not
    /// carry quadrature weights (covariance kernels): weights are applied
    /// on both arguments.
    pub fn bilinear_form(&self, f: &GridFunction, g: &GridFunction) -> Result<f64> {
        check_same_grid(&self.grid, &f.grid, "bilinear_form")?;
        check_same_grid(&self.grid, &g.grid, "bilinear_form")?;
        let w = self.grid.weights();
        let m = self.grid.len();
        let mut acc = 0.0;
        for a in 0..m {
            let mut row = 0.0;
            for b in 0..m {
                row += self.entries[(a, b)] * w[b] * g.values[b];
            }
            acc += w[a] * f.values[a] * row;
        }
        Ok(acc)
    }

    /// Quadrature trace Σ_i w_i K[i,i] — the trace norm of a symmetric
    /// PSD kernel (sum of eigenvalues of the weighted operator).
    ///
    /// Errors unless the kernel was constructed symmetric.
    pub fn trace_norm(&self) -> Result<f64> {
        if !self.symmetric {
            return Err(Error::NotSymmetric {
                context: "trace_norm requires a symmetric kernel",
                max_asym: f64::NAN,
            });
        }
        let w = self.grid.weights();
        Ok((0..self.grid.len())
            .map(|i| w[i] * self.entries[(i, i)])
            .sum())
    }

    /// Operator norm of the kernel as a map H → H: the largest singular
    /// value of diag(√w)·K·diag(1/√w). On the uniform grid (equal
    /// weights) this equals the plain spectral norm of the matrix.
    pub fn operator_norm(&self) -> f64 {
        let m = self.grid.len();
        let w = self.grid.weights();
        let mut b = self.entries.clone();
        for i in 0..m {
            let si = w[i].sqrt();
            for j in 0..m {
                b[(i, j)] *= si / w[j].sqrt();
            }
        }
        b.singular_values().max()
    }

    /// Operator norm of the *integral* operator f ↦ Σ_v w_v·K(·,v)·f(v)
    /// whose kernel does not carry quadrature weights (covariance and
    /// cross-covariance kernels): the largest singular value of
    /// diag(√w)·K·diag(√w).
    pub fn operator_norm_integral(&self) -> f64 {
        let m = self.grid.len();
        let w = self.grid.weights();
        let mut b = self.entries.clone();
        for i in 0..m {
            let si = w[i].sqrt();
            for j in 0..m {
                b[(i, j)] *= si * w[j].sqrt();
            }
        }
        b.singular_values().max()
    }

    /// Transposed kernel (the adjoint only on the uniform grid; used for
    /// matrix algebra, not as an operator).
    pub fn transpose(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            entries: self.entries.transpose(),
            symmetric: self.symmetric,
        }
    }
}

/// An ordered sample Y_1,…,Y_n of grid functions with a shared grid,
/// stored row-major.
#[derive(Debug, Clone)]
pub struct FunctionalSeries {
    grid: Arc<Grid>,
    n: usize,
    values: Vec<f64>,
}

impl FunctionalSeries {
    /// Builds a series from row vectors in time order.
    pub fn from_rows(grid: Arc<Grid>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = grid.len();
        let n = rows.len();
        let mut values = Vec::with_capacity(n * m);
        for row in &rows {
            if row.len() != m {
                return Err(Error::InvalidShape(format!(
                    "series row has {} values on a {}-node grid",
                    row.len(),
                    m
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "series values",
                });
            }
            values.extend_from_slice(row);
        }
        Ok(Self { grid, n, values })
    }

    pub(crate) fn from_flat(grid: Arc<Grid>, n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * grid.len());
        Self { grid, n, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Number of observations n.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Values of the t-th observation (0-based).
    pub fn row(&self, t: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[t * m..(t + 1) * m]
    }

    /// The t-th observation as an owned grid function.
    pub fn function(&self, t: usize) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.row(t).to_vec(),
        }
    }
}

/// Symmetric eigendecomposition of a kernel with respect to the grid's
/// weighted inner product.
///
/// Solves the weighted problem via S = diag(√w)·K·diag(√w) and rescales
/// eigenvectors by 1/√w, so the returned column functions are orthonormal
/// under the quadrature inner product. Eigenvalues come back raw (not
/// clamped — callers decide how to treat round-off negatives) in
/// descending order; each eigenfunction's sign is fixed so that its
/// first non-negligible coordinate is positive.
pub(crate) fn weighted_symmetric_eigen(k: &KernelMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !k.symmetric {
        return Err(Error::NotSymmetric {
            context: "eigendecomposition requires a symmetric kernel",
            max_asym: f64::NAN,
        });
    }
    let m = k.grid.len();
    let w = k.grid.weights();
    let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut s = k.entries.clone();
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] *= sqrt_w[i] * sqrt_w[j];
        }
    }
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut values = Vec::with_capacity(m);
    let mut functions = DMatrix::zeros(m, m);
    for (out_col, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col: Vec<f64> = (0..m)
            .map(|i| eig.eigenvectors[(i, src)] / sqrt_w[i])
            .collect();
        let maxabs = col.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-12 * maxabs) {
            if *first < 0.0 {
                for v in &mut col {
                    *v = -*v;
                }
            }
        }
        for i in 0..m {
            functions[(i, out_col)] = col[i];
        }
    }
    Ok((values, functions))
}
