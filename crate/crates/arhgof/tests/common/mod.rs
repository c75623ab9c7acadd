//! Shared helpers for integration tests.
//!
//! `brute` holds direct reference implementations of the projected
//! empirical process written without the library's sort/prefix
//! machinery — every value is a full O(n) or O(n²) loop — so agreement
//! with the library is meaningful evidence, not shared code agreeing
//! with itself.

#![allow(dead_code)]

pub mod brute {
    use arhgof::meptest::{MultiplierKind, TestConfig};
    use arhgof::rng::RngStream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    /// Process value at threshold level `t`: (1/√n)·Σ_i m_i·1[t_i ≤ t].
    pub fn v_at(thresholds: &[f64], marks: &[f64], t: f64) -> f64 {
        let n = thresholds.len() as f64;
        let mut sum = 0.0;
        for i in 0..thresholds.len() {
            if thresholds[i] <= t {
                sum += marks[i];
            }
        }
        sum / n.sqrt()
    }

    fn count_at(thresholds: &[f64], t: f64) -> usize {
        thresholds.iter().filter(|&&ti| ti <= t).count()
    }

    /// Distinct threshold levels in ascending order.
    pub fn levels(thresholds: &[f64]) -> Vec<f64> {
        let mut ls = thresholds.to_vec();
        ls.sort_by(f64::total_cmp);
        ls.dedup();
        ls
    }

    /// Supremum statistic by exhaustive evaluation at every level.
    /// Returns None when the standardized variant has no admissible
    /// level.
    pub fn sup(
        thresholds: &[f64],
        marks: &[f64],
        standardized: bool,
        k_min: usize,
    ) -> Option<f64> {
        let n = thresholds.len() as f64;
        let mut best: Option<f64> = None;
        for t in levels(thresholds) {
            let v = v_at(thresholds, marks, t).abs();
            let stat = if standardized {
                let count = count_at(thresholds, t);
                if count < k_min {
                    continue;
                }
                v * (n / count as f64).sqrt()
            } else {
                v
            };
            best = Some(best.map_or(stat, |b: f64| b.max(stat)));
        }
        if standardized {
            best
        } else {
            Some(best.unwrap_or(0.0))
        }
    }

    /// Multiplier bootstrap by direct recomputation: replicate b draws
    /// its multipliers in original observation order from the stream
    /// with `lane_b` = b, re-marks the sample, and evaluates the
    /// supremum exhaustively.
    pub fn bootstrap_p(
        thresholds: &[f64],
        marks: &[f64],
        config: &TestConfig,
        stream: RngStream,
    ) -> (f64, f64) {
        let observed = sup(thresholds, marks, config.standardized, config.k_min).unwrap();
        let n = marks.len();
        let mut exceed = 0usize;
        for b in 0..config.n_bootstrap {
            let mut rng = RngStream {
                lane_b: b as u32,
                ..stream
            }
            .rng();
            let mut remarked = vec![0.0f64; n];
            for i in 0..n {
                let eta: f64 = match config.multiplier {
                    MultiplierKind::Normal => rng.sample(StandardNormal),
                    MultiplierKind::Rademacher => {
                        if rng.gen::<u32>() & 1 == 1 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                remarked[i] = eta * marks[i];
            }
            let star = sup(thresholds, &remarked, config.standardized, config.k_min).unwrap();
            if star >= observed {
                exceed += 1;
            }
        }
        let p = if config.add_one_smoothing {
            (exceed + 1) as f64 / (config.n_bootstrap + 1) as f64
        } else {
            exceed as f64 / config.n_bootstrap as f64
        };
        (observed, p)
    }
}
