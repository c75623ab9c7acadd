//! The goodness-of-fit engine.
//!
//! The hypothesis Γ = Γ₀ is tested through a marked empirical process in
//! projected form: residuals Y_i − Γ₀(Y_{i−1}) are reduced to scalar
//! marks ⟨residual, γ_ε⟩ gated by scalar covariate thresholds
//! ⟨Y_{i−1}, γ_Y⟩, with (γ_ε, γ_Y) random projection directions. The
//! partial-sum process of marks over threshold order is piecewise
//! constant, so its supremum is attained at an observed jump point.
//! Critical values come from a multiplier bootstrap that re-weights the
//! marks with standard normal draws while keeping thresholds fixed;
//! p-values across projections are combined with a false-discovery-rate
//! adjustment.

use std::io::Write as IoWrite;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimate::{estimate_autocorrelation, innovation_cov_h0, BasisChoice, GammaEstimate};
use crate::func::{FunctionalSeries, GridFunction, KernelMatrix};
use crate::rng::{Purpose, RngStream};
use crate::simulate::{draw_projection_direction, GaussianSpec};

/// Scalar reduction of a series against one projection pair: covariate
/// thresholds t_i = ⟨Y_{i−1}, γ_Y⟩, residual marks
/// m_i = ⟨Y_i − Γ(Y_{i−1}), γ_ε⟩, and the sort permutation of the
/// thresholds. Index i runs over the n−1 observations with an in-sample
/// predecessor.
#[derive(Debug, Clone)]
pub struct ProjectedSample {
    thresholds: Vec<f64>,
    marks: Vec<f64>,
    order: Vec<usize>,
}

impl ProjectedSample {
    /// Builds the sample from parallel threshold/mark vectors.
    pub fn new(thresholds: Vec<f64>, marks: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() || thresholds.len() != marks.len() {
            return Err(Error::InvalidShape(format!(
                "projected sample needs equal nonempty vectors, got {} thresholds, {} marks",
                thresholds.len(),
                marks.len()
            )));
        }
        if thresholds
            .iter()
            .chain(marks.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite {
                context: "projected sample",
            });
        }
        let mut order: Vec<usize> = (0..thresholds.len()).collect();
        order.sort_by(|&a, &b| thresholds[a].total_cmp(&thresholds[b]));
        Ok(Self {
            thresholds,
            marks,
            order,
        })
    }

    /// Effective sample size (number of mark/threshold pairs).
    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    /// Indices sorted by ascending threshold (stable).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Positions in `order` where each distinct-threshold group ends
    /// (exclusive); tied thresholds form one group/jump point.
    fn group_ends(&self) -> Vec<usize> {
        let n = self.len();
        let mut ends = Vec::new();
        let mut pos = 0;
        while pos < n {
            let t = self.thresholds[self.order[pos]];
            let mut end = pos + 1;
            while end < n && self.thresholds[self.order[end]] == t {
                end += 1;
            }
            ends.push(end);
            pos = end;
        }
        ends
    }
}

/// Computes the projected sample of a series under a hypothesized (or
/// estimated) autocorrelation kernel.
pub fn compute_residual_marks(
    series: &FunctionalSeries,
    gamma: &KernelMatrix,
    gamma_eps: &GridFunction,
    gamma_y: &GridFunction,
) -> Result<ProjectedSample> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let grid = series.grid();
    for (g, ctx) in [
        (gamma.grid(), "residual marks: autocorrelation kernel"),
        (gamma_eps.grid(), "residual marks: mark direction"),
        (gamma_y.grid(), "residual marks: threshold direction"),
    ] {
        if !crate::func::same_grid(grid, g) {
            return Err(Error::GridMismatch {
                context: ctx,
                left: grid.len(),
                right: g.len(),
            });
        }
    }
    let m = grid.len();
    let w = grid.weights();
    // ⟨Γ(y), γ_ε⟩ = ⟨y, h⟩ with h_a = Σ_b Γ[b][a]·w_b·γ_ε(b): one
    // matrix–vector product up front instead of one per observation.
    let gamma_is_zero = gamma.entries().iter().all(|&v| v == 0.0);
    let h: Vec<f64> = if gamma_is_zero {
        Vec::new()
    } else {
        let ge = gamma.entries();
        (0..m)
            .map(|a| (0..m).map(|b| ge[(b, a)] * w[b] * gamma_eps.values()[b]).sum())
            .collect()
    };
    let mut thresholds = Vec::with_capacity(n - 1);
    let mut marks = Vec::with_capacity(n - 1);
    for i in 1..n {
        let prev = series.row(i - 1);
        thresholds.push(grid.dot(prev, gamma_y.values()));
        let mut mark = grid.dot(series.row(i), gamma_eps.values());
        if !gamma_is_zero {
            // Plain (unweighted) dot: h already carries the quadrature
            // weights of the mark inner product.
            mark -= prev.iter().zip(&h).map(|(y, hv)| y * hv).sum::<f64>();
        }
        marks.push(mark);
    }
    ProjectedSample::new(thresholds, marks)
}

/// The projected marked empirical process evaluated at its jump points:
/// sorted distinct thresholds, cumulative scaled mark sums
/// V(j) = (1/√n)·Σ_{i: t_i ≤ t_(j)} m_i, and counts N(j).
#[derive(Debug, Clone)]
pub struct MepPath {
    thresholds: Vec<f64>,
    values: Vec<f64>,
    counts: Vec<usize>,
    n: usize,
}

impl MepPath {
    /// Distinct jump locations in ascending order.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Process value at each jump.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of active indices at each jump (nondecreasing, ends at n).
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Effective sample size behind the 1/√n scaling.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Evaluates the process of a projected sample at every jump point.
/// Tied thresholds merge into a single jump with their marks summed.
pub fn mep_path(sample: &ProjectedSample) -> MepPath {
    let n = sample.len();
    let scale = 1.0 / (n as f64).sqrt();
    let ends = sample.group_ends();
    let mut thresholds = Vec::with_capacity(ends.len());
    let mut values = Vec::with_capacity(ends.len());
    let mut counts = Vec::with_capacity(ends.len());
    let mut cum = 0.0;
    let mut start = 0;
    for &end in &ends {
        for pos in start..end {
            cum += sample.marks[sample.order[pos]];
        }
        thresholds.push(sample.thresholds[sample.order[start]]);
        values.push(cum * scale);
        counts.push(end);
        start = end;
    }
    MepPath {
        thresholds,
        values,
        counts,
        n,
    }
}

/// Supremum statistic of a path.
///
/// Raw: max_j |V(j)|. Standardized: max of |V(j)|·√(n/N(j)) over jumps
/// with N(j) ≥ k_min (errors when no jump qualifies).
pub fn sup_statistic(path: &MepPath, standardized: bool, k_min: usize) -> Result<f64> {
    if !standardized {
        return Ok(path
            .values
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs())));
    }
    let mut best: Option<f64> = None;
    for j in 0..path.values.len() {
        if path.counts[j] < k_min {
            continue;
        }
        let scaled = path.values[j].abs() * (path.n as f64 / path.counts[j] as f64).sqrt();
        best = Some(best.map_or(scaled, |b: f64| b.max(scaled)));
    }
    best.ok_or_else(|| {
        Error::InsufficientData {
            needed: k_min,
            got: path.n,
        }
    })
}

/// Multiplier distribution for the bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplierKind {
    #[default]
    Normal,
    Rademacher,
}

/// Test configuration.
#[derive(Debug, Clone)]
pub struct TestConfig {
    /// Number of random projection pairs NP.
    pub n_projections: usize,
    /// Bootstrap replicates B.
    pub n_bootstrap: usize,
    /// Use the standardized statistic instead of the raw supremum.
    pub standardized: bool,
    pub multiplier: MultiplierKind,
    /// Minimum active count for standardized evaluation.
    pub k_min: usize,
    pub alpha: f64,
    /// Report (#+1)/(B+1) instead of the plain #/B bootstrap p-value.
    pub add_one_smoothing: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            n_projections: 5,
            n_bootstrap: 2000,
            standardized: false,
            multiplier: MultiplierKind::Normal,
            k_min: 5,
            alpha: 0.05,
            add_one_smoothing: false,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_projections == 0 {
            return Err(Error::Config("n_projections must be ≥ 1".into()));
        }
        if self.n_bootstrap == 0 {
            return Err(Error::Config("n_bootstrap must be ≥ 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must be in (0,1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Observed statistic and bootstrap p-value for one projection pair.
///
/// For b = 1..B the marks are re-weighted by iid multipliers (drawn in
/// original observation order from per-replicate sub-streams of
/// `stream`, which has its `lane_b` overridden by the replicate index)
/// and the statistic is recomputed on the same thresholds; the p-value
/// counts replicates with S*_b ≥ S. The sort order, tie groups, and
/// prefix structure are computed once and shared by all replicates.
pub fn fast_bootstrap_pvalue(
    sample: &ProjectedSample,
    config: &TestConfig,
    stream: RngStream,
) -> Result<(f64, f64)> {
    config.validate()?;
    let path = mep_path(sample);
    let observed = sup_statistic(&path, config.standardized, config.k_min)?;

    let n = sample.len();
    let scale = 1.0 / (n as f64).sqrt();
    let ends = sample.group_ends();
    // Marks pre-permuted into sorted order so the replicate loop walks
    // memory linearly; eta is drawn in original order then permuted the
    // same way.
    let sorted_marks: Vec<f64> = sample.order.iter().map(|&i| sample.marks[i]).collect();
    let mut eta = vec![0.0f64; n];
    let mut eta_sorted = vec![0.0f64; n];

    let b_total = config.n_bootstrap;
    let mut exceed = 0usize;
    for b in 0..b_total {
        let mut rng = RngStream {
            lane_b: b as u32,
            ..stream
        }
        .rng();
        match config.multiplier {
            MultiplierKind::Normal => {
                for e in eta.iter_mut() {
                    *e = rng.sample(StandardNormal);
                }
            }
            MultiplierKind::Rademacher => {
                for e in eta.iter_mut() {
                    *e = if rng.gen::<u32>() & 1 == 1 { 1.0 } else { -1.0 };
                }
            }
        }
        for (pos, &i) in sample.order.iter().enumerate() {
            eta_sorted[pos] = eta[i];
        }
        let mut cum = 0.0;
        let mut stat = 0.0f64;
        let mut start = 0;
        let mut found = false;
        for &end in &ends {
            for pos in start..end {
                cum += eta_sorted[pos] * sorted_marks[pos];
            }
            if !config.standardized {
                stat = stat.max((cum * scale).abs());
            } else if end >= config.k_min {
                let scaled = (cum * scale).abs() * (n as f64 / end as f64).sqrt();
                stat = if found { stat.max(scaled) } else { scaled };
                found = true;
            }
            start = end;
        }
        if stat >= observed {
            exceed += 1;
        }
    }
    let p = if config.add_one_smoothing {
        (exceed + 1) as f64 / (b_total + 1) as f64
    } else {
        exceed as f64 / b_total as f64
    };
    Ok((observed, p))
}

/// False-discovery-rate combination of per-projection p-values: with
/// order statistics p_(1) ≤ … ≤ p_(K), returns min(1, min_k K·p_(k)/k).
pub fn fdr_combine(p_values: &[f64]) -> Result<f64> {
    if p_values.is_empty() {
        return Err(Error::InvalidShape(
            "fdr_combine needs at least one p-value".into(),
        ));
    }
    if p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidShape(
            "p-values must lie in [0,1]".into(),
        ));
    }
    let mut sorted = p_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k_total = sorted.len() as f64;
    let combined = sorted
        .iter()
        .enumerate()
        .map(|(i, p)| k_total * p / (i + 1) as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(combined.min(1.0))
}

/// Which residual operator the test uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMode {
    /// Residuals against the hypothesized Γ₀ itself.
    Specified,
    /// Residuals against a projection estimate of the autocorrelation
    /// operator fitted from the sample.
    Misspecified,
}

impl std::fmt::Display for TestMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestMode::Specified => write!(f, "specified"),
            TestMode::Misspecified => write!(f, "misspecified"),
        }
    }
}

/// Result of one projection: observed statistic and bootstrap p-value.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Full outcome of a goodness-of-fit test run.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub per_projection: Vec<ProjectionResult>,
    pub combined_p: f64,
    pub reject: bool,
    pub alpha: f64,
    pub mode: TestMode,
    /// Trace norm of the null-implied innovation covariance estimate.
    pub innovation_trace: f64,
    /// Truncation level of the fitted operator (misspecified mode only).
    pub k_n: Option<usize>,
}

impl TestOutcome {
    /// Serializes the outcome: one row per projection, then a summary
    /// row. A single 8-column header covers both row kinds; fields not
    /// applicable to a row are left empty.
    pub fn write_csv<W: IoWrite>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "projection_index,statistic,p_value,combined_p,reject,alpha,mode,k_n"
        )?;
        for (idx, pr) in self.per_projection.iter().enumerate() {
            writeln!(w, "{},{},{},,,,,", idx + 1, pr.statistic, pr.p_value)?;
        }
        let k_n = self.k_n.map(|k| k.to_string()).unwrap_or_default();
        writeln!(
            w,
            "summary,,,{},{},{},{},{}",
            self.combined_p, self.reject, self.alpha, self.mode, k_n
        )?;
        Ok(())
    }
}

/// Runs the full test: draws `config.n_projections` independent
/// (γ_ε, γ_Y) pairs, computes per-projection bootstrap p-values, and
/// combines them.
///
/// The stream argument fixes (base_seed, repetition); purposes and lanes
/// are derived internally — projection k draws its directions on
/// `lane_a = k` of the direction purposes and its multipliers on
/// `lane_a = k` of the bootstrap purpose, so enlarging the number of
/// projections reuses the earlier draws verbatim.
pub fn run_gof_test(
    series: &FunctionalSeries,
    gamma0: &KernelMatrix,
    config: &TestConfig,
    eps_direction_spec: &GaussianSpec,
    y_direction_spec: &GaussianSpec,
    stream: RngStream,
    mode: TestMode,
) -> Result<TestOutcome> {
    config.validate()?;
    let estimate: Option<GammaEstimate> = match mode {
        TestMode::Specified => None,
        TestMode::Misspecified => Some(estimate_autocorrelation(
            series,
            None,
            BasisChoice::Empirical,
        )?),
    };
    let residual_gamma = estimate.as_ref().map(GammaEstimate::operator).unwrap_or(gamma0);

    let mut per_projection = Vec::with_capacity(config.n_projections);
    for k in 0..config.n_projections {
        let lane = k as u32;
        let eps_stream = RngStream::with_lanes(
            stream.base_seed,
            stream.rep,
            Purpose::GammaEps,
            lane,
            0,
        );
        let y_stream =
            RngStream::with_lanes(stream.base_seed, stream.rep, Purpose::GammaY, lane, 0);
        let gamma_eps = draw_projection_direction(eps_direction_spec, eps_stream)?;
        let gamma_y = draw_projection_direction(y_direction_spec, y_stream)?;
        let sample = compute_residual_marks(series, residual_gamma, &gamma_eps, &gamma_y)?;
        let boot_stream =
            RngStream::with_lanes(stream.base_seed, stream.rep, Purpose::Bootstrap, lane, 0);
        let (statistic, p_value) = fast_bootstrap_pvalue(&sample, config, boot_stream)?;
        per_projection.push(ProjectionResult { statistic, p_value });
    }
    let p_values: Vec<f64> = per_projection.iter().map(|pr| pr.p_value).collect();
    let combined_p = fdr_combine(&p_values)?;
    let innovation_trace = innovation_cov_h0(series, gamma0)?.trace_norm()?;
    Ok(TestOutcome {
        per_projection,
        combined_p,
        reject: combined_p <= config.alpha,
        alpha: config.alpha,
        mode,
        innovation_trace,
        k_n: estimate.as_ref().map(GammaEstimate::k_n),
    })
}

/// Supremum distance between the processes built from a reference
/// operator and from an estimate, on identical thresholds: the
/// finite-sample counterpart of the asymptotic equivalence of the
/// specified and misspecified tests.
pub fn equivalence_gap(
    series: &FunctionalSeries,
    gamma_true: &KernelMatrix,
    gamma_est: &GammaEstimate,
    gamma_eps: &GridFunction,
    gamma_y: &GridFunction,
) -> Result<f64> {
    let sample_true = compute_residual_marks(series, gamma_true, gamma_eps, gamma_y)?;
    let sample_est =
        compute_residual_marks(series, gamma_est.operator(), gamma_eps, gamma_y)?;
    let path_true = mep_path(&sample_true);
    let path_est = mep_path(&sample_est);
    debug_assert_eq!(path_true.thresholds, path_est.thresholds);
    Ok(path_true
        .values
        .iter()
        .zip(&path_est.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Theoretical variance of the projected process at a threshold whose
/// covariate CDF value is `prob`: prob·⟨C_ε γ_ε, γ_ε⟩, with the
/// covariance kernel in bilinear (weight-free) convention. The
/// covariance between values at two thresholds follows as
/// min(F(s), F(t))·⟨C_ε γ_ε, γ_ε⟩.
pub fn variance_oracle(
    eps_kernel: &KernelMatrix,
    gamma_eps: &GridFunction,
    prob: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Config(format!(
            "prob must lie in [0,1], got {prob}"
        )));
    }
    Ok(prob * eps_kernel.bilinear_form(gamma_eps, gamma_eps)?)
}
