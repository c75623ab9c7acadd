//! Monte Carlo size/power studies over (sample size × projection count)
//! grids, with deterministic parallelism and resumable checkpoints.
//!
//! The work unit is one repetition of one sample size: simulate a
//! series, run the test once with the largest requested projection
//! count, then read off the decision for every smaller count from the
//! per-projection p-value prefix (projection streams are nested, so the
//! prefix decisions equal what separate smaller runs would produce).
//! Every random draw is addressed by (base_seed, repetition, purpose,
//! lane), so the result is byte-identical for any worker count.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Grid, KernelMatrix};
use crate::meptest::{fdr_combine, run_gof_test, TestConfig, TestMode};
use crate::rng::{Purpose, RngStream};
use crate::simulate::{config_cov_kernel, simulate_arh1, ARHSpec, GaussianSpec, SimConfig};

/// Repetitions between checkpoint writes.
pub const CHECKPOINT_EVERY: usize = 25;

/// Which data-generating operator the study simulates under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Simulate under the hypothesized operator Γ₀ (size study).
    Null,
    /// Simulate under the configured alternative kernel (power study).
    Alternative,
}

/// Scale presets for a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// R = 200 repetitions, B = 500 bootstrap replicates: minutes-scale.
    Desk,
    /// R = 500, B = 2000: the full simulation-study scale.
    Paper,
}

impl Preset {
    pub fn apply(self, config: &mut StudyConfig) {
        match self {
            Preset::Desk => {
                config.reps = 200;
                config.test.n_bootstrap = 500;
            }
            Preset::Paper => {
                config.reps = 500;
                config.test.n_bootstrap = 2000;
            }
        }
    }
}

/// Full description of one study.
///
/// `dgp` carries the grid, noise/initial laws, burn-in, and the
/// alternative kernel; its `n` and `seed` fields are superseded by
/// `sample_sizes` and `base_seed`. The hypothesized operator under test
/// is always Γ₀ = 0 here; under [`Hypothesis::Null`] the series is
/// simulated under Γ₀ itself, under [`Hypothesis::Alternative`] under
/// `dgp`'s kernel. `test.n_projections` is superseded by the largest
/// entry of `np_list`.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub dgp: SimConfig,
    pub hypothesis: Hypothesis,
    pub sample_sizes: Vec<usize>,
    pub np_list: Vec<usize>,
    pub reps: usize,
    pub test: TestConfig,
    pub base_seed: u64,
    /// Worker threads; 0 uses the global default pool.
    pub workers: usize,
    /// Where to keep the resumable state file, if anywhere.
    pub checkpoint: Option<PathBuf>,
}

impl StudyConfig {
    /// Study with the simulation-study defaults: n ∈ {50, 100, 200},
    /// NP ∈ {1, 2, 3, 4, 5, 10, 15}, R = 500, B = 2000.
    pub fn new(dgp: SimConfig, hypothesis: Hypothesis) -> Self {
        let base_seed = dgp.seed;
        Self {
            dgp,
            hypothesis,
            sample_sizes: vec![50, 100, 200],
            np_list: vec![1, 2, 3, 4, 5, 10, 15],
            reps: 500,
            test: TestConfig::default(),
            base_seed,
            workers: 0,
            checkpoint: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be ≥ 1".into()));
        }
        if self.sample_sizes.is_empty() || self.np_list.is_empty() {
            return Err(Error::Config(
                "sample_sizes and np_list must be nonempty".into(),
            ));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!(
                "sample sizes must be ≥ 2, got {n}"
            )));
        }
        if self.np_list.contains(&0) {
            return Err(Error::Config("projection counts must be ≥ 1".into()));
        }
        self.test.validate()
    }

    /// Canonical text identifying the study outcome (everything except
    /// scheduling: workers and checkpoint location are excluded).
    fn canonical_text(&self) -> String {
        let hyp = match self.hypothesis {
            Hypothesis::Null => "null",
            Hypothesis::Alternative => "alternative",
        };
        format!(
            "{}hypothesis = {hyp}\nsample_sizes = {:?}\nnp_list = {:?}\nreps = {}\n\
             n_bootstrap = {}\nstandardized = {}\nmultiplier = {:?}\nk_min = {}\n\
             alpha = {}\nadd_one = {}\nbase_seed = {}\n",
            self.dgp.to_text(),
            self.sample_sizes,
            self.np_list,
            self.reps,
            self.test.n_bootstrap,
            self.test.standardized,
            self.test.multiplier,
            self.test.k_min,
            self.test.alpha,
            self.test.add_one_smoothing,
            self.base_seed,
        )
    }

    fn digest(&self) -> String {
        fnv1a64(&self.canonical_text())
    }
}

fn fnv1a64(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Rejection-rate surface of a finished study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub sample_sizes: Vec<usize>,
    pub np_list: Vec<usize>,
    pub reps: usize,
    /// Rates indexed [sample_size][np].
    pub rates: Vec<Vec<f64>>,
    /// Binomial standard errors √(rate·(1−rate)/R), same indexing.
    pub stderr: Vec<Vec<f64>>,
    pub wall_time_secs: f64,
}

/// Serialized intermediate state of a running study.
#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    config_digest: String,
    completed_reps: usize,
    rejections: Vec<Vec<u32>>,
    elapsed_secs: f64,
}

fn load_checkpoint(
    path: &PathBuf,
    digest: &str,
    n_len: usize,
    np_len: usize,
) -> Result<Option<Checkpoint>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let state: Checkpoint = serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!(
            "unreadable study state file {}: {e}",
            path.display()
        ))
    })?;
    if state.config_digest != digest {
        // Stale state from a different study: start fresh.
        return Ok(None);
    }
    if state.rejections.len() != n_len
        || state.rejections.iter().any(|row| row.len() != np_len)
    {
        return Err(Error::Config(format!(
            "study state file {} does not match the configured grid",
            path.display()
        )));
    }
    Ok(Some(state))
}

fn save_checkpoint(path: &PathBuf, state: &Checkpoint) -> Result<()> {
    let text = serde_json::to_string(state).expect("checkpoint serializes");
    fs::write(path, text)?;
    Ok(())
}

/// Runs a size study (simulation under Γ₀).
pub fn run_size_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.hypothesis != Hypothesis::Null {
        return Err(Error::Config(
            "size study requires the null hypothesis".into(),
        ));
    }
    run_study(config)
}

/// Runs a power study (simulation under the alternative kernel).
pub fn run_power_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.hypothesis != Hypothesis::Alternative {
        return Err(Error::Config(
            "power study requires the alternative hypothesis".into(),
        ));
    }
    run_study(config)
}

fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let grid: Arc<Grid> = config.dgp.grid();
    let gamma0 = KernelMatrix::zero(grid.clone());
    let gamma_sim = match config.hypothesis {
        Hypothesis::Null => gamma0.clone(),
        Hypothesis::Alternative => config.dgp.gamma_kernel(&grid)?,
    };
    let noise = GaussianSpec::centered(config_cov_kernel(
        &grid,
        config.dgp.sigma_eps,
        config.dgp.theta_eps,
    )?)?;
    let initial = GaussianSpec::centered(config_cov_kernel(
        &grid,
        config.dgp.sigma_y0,
        config.dgp.theta_y0,
    )?)?;
    // Projection directions follow the innovation law (marks) and the
    // initial-state law (thresholds).
    let eps_dir = noise.clone();
    let y_dir = initial.clone();
    let specs_by_n: Vec<ARHSpec> = config
        .sample_sizes
        .iter()
        .map(|&n| {
            ARHSpec::new(
                gamma_sim.clone(),
                noise.clone(),
                initial.clone(),
                config.dgp.burn_in,
                n,
            )
        })
        .collect::<Result<_>>()?;
    let np_max = *config.np_list.iter().max().expect("nonempty np_list");
    let test_full = TestConfig {
        n_projections: np_max,
        ..config.test.clone()
    };

    let n_len = config.sample_sizes.len();
    let np_len = config.np_list.len();
    let digest = config.digest();
    let mut counts = vec![vec![0u32; np_len]; n_len];
    let mut done = 0usize;
    let mut prior_elapsed = 0.0f64;
    if let Some(path) = &config.checkpoint {
        if let Some(state) = load_checkpoint(path, &digest, n_len, np_len)? {
            counts = state.rejections;
            done = state.completed_reps.min(config.reps);
            prior_elapsed = state.elapsed_secs;
        }
    }

    let pool = if config.workers > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?,
        )
    } else {
        None
    };

    let run_one = |&(n_idx, rep): &(usize, u32)| -> Result<(usize, Vec<bool>)> {
        let series = simulate_arh1(
            &specs_by_n[n_idx],
            RngStream::new(config.base_seed, rep, Purpose::Series),
        )?;
        let outcome = run_gof_test(
            &series,
            &gamma0,
            &test_full,
            &eps_dir,
            &y_dir,
            RngStream::new(config.base_seed, rep, Purpose::Series),
            TestMode::Specified,
        )?;
        let ps: Vec<f64> = outcome.per_projection.iter().map(|pr| pr.p_value).collect();
        let decisions = config
            .np_list
            .iter()
            .map(|&np| Ok(fdr_combine(&ps[..np])? <= config.test.alpha))
            .collect::<Result<Vec<bool>>>()?;
        Ok((n_idx, decisions))
    };

    let started = Instant::now();
    while done < config.reps {
        let upto = (done + CHECKPOINT_EVERY).min(config.reps);
        let tasks: Vec<(usize, u32)> = (done..upto)
            .flat_map(|rep| (0..n_len).map(move |n_idx| (n_idx, rep as u32)))
            .collect();
        let batch: Result<Vec<(usize, Vec<bool>)>> = match &pool {
            Some(p) => p.install(|| tasks.par_iter().map(run_one).collect()),
            None => tasks.par_iter().map(run_one).collect(),
        };
        let rows = match batch {
            Ok(rows) => rows,
            Err(e) => {
                // Flush what finished before propagating.
                if let Some(path) = &config.checkpoint {
                    let _ = save_checkpoint(
                        path,
                        &Checkpoint {
                            config_digest: digest.clone(),
                            completed_reps: done,
                            rejections: counts.clone(),
                            elapsed_secs: prior_elapsed + started.elapsed().as_secs_f64(),
                        },
                    );
                }
                return Err(e);
            }
        };
        for (n_idx, decisions) in rows {
            for (j, rejected) in decisions.iter().enumerate() {
                counts[n_idx][j] += *rejected as u32;
            }
        }
        done = upto;
        if done < config.reps {
            if let Some(path) = &config.checkpoint {
                save_checkpoint(
                    path,
                    &Checkpoint {
                        config_digest: digest.clone(),
                        completed_reps: done,
                        rejections: counts.clone(),
                        elapsed_secs: prior_elapsed + started.elapsed().as_secs_f64(),
                    },
                )?;
            }
        }
    }
    if let Some(path) = &config.checkpoint {
        let _ = fs::remove_file(path);
    }

    let r = config.reps as f64;
    let rates: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / r).collect())
        .collect();
    let stderr: Vec<Vec<f64>> = rates
        .iter()
        .map(|row| row.iter().map(|&p| (p * (1.0 - p) / r).sqrt()).collect())
        .collect();
    Ok(StudyResult {
        sample_sizes: config.sample_sizes.clone(),
        np_list: config.np_list.clone(),
        reps: config.reps,
        rates,
        stderr,
        wall_time_secs: prior_elapsed + started.elapsed().as_secs_f64(),
    })
}

/// Output format for a study table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// Renders a result as a table with rows = sample size and columns =
/// projection count. CSV cells carry full precision (and exclude the
/// wall time), so identical studies emit identical bytes; markdown cells
/// are rounded to 3 decimals.
pub fn emit_table(result: &StudyResult, format: TableFormat, with_stderr: bool) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push('n');
            for np in &result.np_list {
                out.push_str(&format!(",{np}"));
            }
            if with_stderr {
                for np in &result.np_list {
                    out.push_str(&format!(",se_{np}"));
                }
            }
            out.push('\n');
            for (i, n) in result.sample_sizes.iter().enumerate() {
                out.push_str(&n.to_string());
                for rate in &result.rates[i] {
                    out.push_str(&format!(",{rate}"));
                }
                if with_stderr {
                    for se in &result.stderr[i] {
                        out.push_str(&format!(",{se}"));
                    }
                }
                out.push('\n');
            }
        }
        TableFormat::Markdown => {
            out.push_str("| n \\ NP |");
            for np in &result.np_list {
                out.push_str(&format!(" {np} |"));
            }
            out.push_str("\n|---|");
            for _ in &result.np_list {
                out.push_str("---|");
            }
            out.push('\n');
            for (i, n) in result.sample_sizes.iter().enumerate() {
                out.push_str(&format!("| {n} |"));
                for (j, rate) in result.rates[i].iter().enumerate() {
                    if with_stderr {
                        out.push_str(&format!(" {rate:.3} ± {:.3} |", result.stderr[i][j]));
                    } else {
                        out.push_str(&format!(" {rate:.3} |"));
                    }
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Parses a CSV table produced by [`emit_table`] back into a result.
/// Only the surface itself round-trips: repetition count and wall time
/// are not part of the table and come back as zero; standard errors are
/// zero unless `se_` columns are present.
pub fn parse_table(text: &str) -> Result<StudyResult> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Config("empty study table".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"n") {
        return Err(Error::CsvParse {
            line: 1,
            message: format!("expected header to start with `n`, got {:?}", cols.first()),
        });
    }
    let np_list: Vec<usize> = cols[1..]
        .iter()
        .take_while(|c| !c.starts_with("se_"))
        .map(|c| {
            c.parse().map_err(|_| Error::CsvParse {
                line: 1,
                message: format!("bad projection-count column {c:?}"),
            })
        })
        .collect::<Result<_>>()?;
    let np_len = np_list.len();
    let with_stderr = cols.len() == 1 + 2 * np_len;
    if !with_stderr && cols.len() != 1 + np_len {
        return Err(Error::CsvParse {
            line: 1,
            message: format!("unexpected column count {}", cols.len()),
        });
    }
    let mut sample_sizes = Vec::new();
    let mut rates = Vec::new();
    let mut stderr = Vec::new();
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::CsvParse {
                line: idx + 1,
                message: format!(
                    "expected {} fields, got {}",
                    cols.len(),
                    fields.len()
                ),
            });
        }
        let bad = |what: &str, field: &str| Error::CsvParse {
            line: idx + 1,
            message: format!("bad {what} {field:?}"),
        };
        sample_sizes.push(
            fields[0]
                .parse::<usize>()
                .map_err(|_| bad("sample size", fields[0]))?,
        );
        let row: Vec<f64> = fields[1..=np_len]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad("rate", f)))
            .collect::<Result<_>>()?;
        if row.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::CsvParse {
                line: idx + 1,
                message: "rates must lie in [0,1]".into(),
            });
        }
        rates.push(row);
        stderr.push(if with_stderr {
            fields[1 + np_len..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| bad("stderr", f)))
                .collect::<Result<_>>()?
        } else {
            vec![0.0; np_len]
        });
    }
    Ok(StudyResult {
        sample_sizes,
        np_list,
        reps: 0,
        rates,
        stderr,
        wall_time_secs: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::GammaKind;
    use tempfile::tempdir;

    /// A study small enough to run in milliseconds.
    fn tiny_config() -> StudyConfig {
        let dgp = SimConfig {
            m: 7,
            burn_in: 5,
            ..SimConfig::default()
        };
        let mut cfg = StudyConfig::new(dgp, Hypothesis::Null);
        cfg.sample_sizes = vec![8, 12];
        cfg.np_list = vec![1, 2];
        cfg.reps = 6;
        cfg.test.n_bootstrap = 10;
        cfg.base_seed = 3;
        cfg
    }

    #[test]
    fn identical_result_for_any_worker_count() {
        let mut one = tiny_config();
        one.workers = 1;
        let mut three = tiny_config();
        three.workers = 3;
        let ra = run_size_study(&one).unwrap();
        let rb = run_size_study(&three).unwrap();
        assert_eq!(ra.rates, rb.rates);
        assert_eq!(
            emit_table(&ra, TableFormat::Csv, true),
            emit_table(&rb, TableFormat::Csv, true)
        );
    }

    #[test]
    fn single_repetition_rates_are_binary() {
        let mut cfg = tiny_config();
        cfg.reps = 1;
        let result = run_size_study(&cfg).unwrap();
        for row in &result.rates {
            for &rate in row {
                assert!(rate == 0.0 || rate == 1.0);
            }
        }
    }

    #[test]
    fn degenerate_dgp_never_rejects() {
        let mut cfg = tiny_config();
        cfg.dgp.sigma_eps = 0.0;
        cfg.dgp.sigma_y0 = 0.0;
        let result = run_size_study(&cfg).unwrap();
        for row in &result.rates {
            assert!(row.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn alternative_equal_to_null_reduces_to_size_study() {
        // Γ under the alternative configured as the zero kernel: the
        // power study must reproduce the size study exactly.
        let size = run_size_study(&tiny_config()).unwrap();
        let mut cfg = tiny_config();
        cfg.hypothesis = Hypothesis::Alternative;
        cfg.dgp.gamma_kind = GammaKind::Zero;
        let power = run_power_study(&cfg).unwrap();
        assert_eq!(size.rates, power.rates);
    }

    #[test]
    fn stderr_consistent_with_rates() {
        let result = run_size_study(&tiny_config()).unwrap();
        let r = result.reps as f64;
        for (row, serow) in result.rates.iter().zip(&result.stderr) {
            for (&p, &se) in row.iter().zip(serow) {
                assert_eq!(se, (p * (1.0 - p) / r).sqrt());
            }
        }
    }

    #[test]
    fn csv_round_trips_exactly() {
        let result = run_size_study(&tiny_config()).unwrap();
        for with_stderr in [false, true] {
            let text = emit_table(&result, TableFormat::Csv, with_stderr);
            let parsed = parse_table(&text).unwrap();
            assert_eq!(parsed.sample_sizes, result.sample_sizes);
            assert_eq!(parsed.np_list, result.np_list);
            assert_eq!(parsed.rates, result.rates);
            if with_stderr {
                assert_eq!(parsed.stderr, result.stderr);
            }
        }
    }

    #[test]
    fn markdown_layout() {
        let result = StudyResult {
            sample_sizes: vec![50, 100],
            np_list: vec![1, 5],
            reps: 10,
            rates: vec![vec![0.05, 0.1], vec![0.2, 0.25]],
            stderr: vec![vec![0.0; 2]; 2],
            wall_time_secs: 0.0,
        };
        let text = emit_table(&result, TableFormat::Markdown, false);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "| n \\ NP | 1 | 5 |");
        assert_eq!(lines[2], "| 50 | 0.050 | 0.100 |");
        assert_eq!(lines[3], "| 100 | 0.200 | 0.250 |");
    }

    #[test]
    fn single_cell_table() {
        let result = StudyResult {
            sample_sizes: vec![200],
            np_list: vec![1],
            reps: 20,
            rates: vec![vec![0.05]],
            stderr: vec![vec![0.0]],
            wall_time_secs: 0.0,
        };
        let md = emit_table(&result, TableFormat::Markdown, false);
        assert!(md.lines().last().unwrap().contains("0.050"));
        let csv = emit_table(&result, TableFormat::Csv, false);
        assert_eq!(csv, "n,1\n200,0.05\n");
    }

    #[test]
    fn resume_from_checkpoint_matches_uninterrupted_run() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("study.state.json");

        let mut full = tiny_config();
        full.reps = 4;
        let reference = run_size_study(&full).unwrap();

        // Counts after the first two repetitions, obtained from an
        // independent two-rep run (per-rep streams only depend on the
        // repetition index, not on the total).
        let mut first_half = tiny_config();
        first_half.reps = 2;
        let half = run_size_study(&first_half).unwrap();
        let counts: Vec<Vec<u32>> = half
            .rates
            .iter()
            .map(|row| row.iter().map(|r| (r * 2.0).round() as u32).collect())
            .collect();

        let mut resumed_cfg = tiny_config();
        resumed_cfg.reps = 4;
        resumed_cfg.checkpoint = Some(path.clone());
        save_checkpoint(
            &path,
            &Checkpoint {
                config_digest: resumed_cfg.digest(),
                completed_reps: 2,
                rejections: counts,
                elapsed_secs: 0.0,
            },
        )
        .unwrap();
        let resumed = run_size_study(&resumed_cfg).unwrap();
        assert_eq!(resumed.rates, reference.rates);
        // The state file is cleaned up on completion.
        assert!(!path.exists());
    }

    #[test]
    fn stale_checkpoint_is_ignored() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("study.state.json");
        let mut cfg = tiny_config();
        cfg.checkpoint = Some(path.clone());
        save_checkpoint(
            &path,
            &Checkpoint {
                config_digest: "0000000000000000".into(),
                completed_reps: 6,
                rejections: vec![vec![6, 6], vec![6, 6]],
                elapsed_secs: 0.0,
            },
        )
        .unwrap();
        let fresh = run_size_study(&cfg).unwrap();
        let reference = run_size_study(&tiny_config()).unwrap();
        assert_eq!(fresh.rates, reference.rates);
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny_config();
        cfg.np_list.clear();
        assert!(run_size_study(&cfg).is_err());
        let mut cfg = tiny_config();
        cfg.reps = 0;
        assert!(run_size_study(&cfg).is_err());
        let cfg = tiny_config();
        assert!(run_power_study(&cfg).is_err()); // null hypothesis
        let mut cfg = tiny_config();
        cfg.hypothesis = Hypothesis::Alternative;
        assert!(run_size_study(&cfg).is_err());
    }

    #[test]
    fn parse_rejects_malformed_tables() {
        assert!(parse_table("").is_err());
        assert!(parse_table("x,1\n50,0.05\n").is_err());
        assert!(parse_table("n,1\n50,1.5\n").is_err());
        assert!(parse_table("n,1\n50,0.05,0.01\n").is_err());
        assert!(parse_table("n,1,se_1\n50,abc,0.0\n").is_err());
    }
}
