//! Seeded trial loops, space metering and report statistics.

mod report;

pub use report::{Summary, TrialRecord, TrialReport};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("wilson interval needs at least one trial")]
    NoTrials,
    #[error("successes {successes} exceed trials {trials}")]
    TooManySuccesses { successes: u64, trials: u64 },
    #[error("confidence level {0} outside (0, 1)")]
    BadLevel(f64),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Running bit count of an algorithm's tracked state, with its peak.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpaceMeter {
    current: u64,
    peak: u64,
}

impl SpaceMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, bits: u64) {
        self.current = bits;
        self.peak = self.peak.max(bits);
    }

    pub fn add(&mut self, bits: u64) {
        self.set(self.current + bits);
    }

    pub fn sub(&mut self, bits: u64) {
        self.current = self.current.checked_sub(bits).expect("meter underflow");
    }

    pub fn current(&self) -> u64 {
        self.current
    }

    pub fn peak(&self) -> u64 {
        self.peak
    }
}

/// Wilson score interval for a binomial proportion at confidence `level`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64), HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    if successes > trials {
        return Err(HarnessError::TooManySuccesses { successes, trials });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(HarnessError::BadLevel(level));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

/// RNG for one trial: the root seed picks the key, the trial index the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials in parallel. Trial `t` gets
/// [`trial_rng`]`(seed, t)`, so the report does not depend on scheduling.
pub fn run_experiment<F>(
    experiment: &str,
    seed: u64,
    trials: u64,
    trial: F,
) -> Result<TrialReport, HarnessError>
where
    F: Fn(u64, &mut ChaCha8Rng) -> TrialRecord + Sync,
{
    if experiment.is_empty() {
        return Err(HarnessError::InvalidConfig("empty experiment id".into()));
    }
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut r = trial(t, &mut rng);
            r.trial = t;
            r
        })
        .collect();
    Ok(TrialReport::new(experiment, seed, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn meter_tracks_peak() {
        let mut m = SpaceMeter::new();
        m.add(10);
        m.add(5);
        m.sub(12);
        m.set(7);
        assert_eq!((m.current(), m.peak()), (7, 15));
    }

    #[test]
    fn wilson_edges() {
        assert_eq!(wilson_interval(0, 50, 0.95).unwrap().0, 0.0);
        assert_eq!(wilson_interval(50, 50, 0.95).unwrap().1, 1.0);
        assert!(matches!(wilson_interval(0, 0, 0.95), Err(HarnessError::NoTrials)));
        assert!(wilson_interval(3, 2, 0.95).is_err());
    }

    // The Wilson bounds are the two roots p of (p_hat - p)^2 = z^2 p (1 - p) / n.
    // Solve each by bisection with a z taken from a fixed table.
    #[test]
    fn wilson_matches_score_equation() {
        let z = 1.959_963_984_540_054_f64;
        let g = |p: f64, ph: f64, n: f64| (ph - p).powi(2) - z * z * p * (1.0 - p) / n;
        let bisect = |mut a: f64, mut b: f64, ph: f64, n: f64| {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if (g(a, ph, n) > 0.0) == (g(m, ph, n) > 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        for trials in [1u64, 7, 40, 333, 1000] {
            for k in 0..=trials.min(40) {
                let succ = k * trials / trials.clamp(1, 40);
                let n = trials as f64;
                let ph = succ as f64 / n;
                let (lo, hi) = wilson_interval(succ, trials, 0.95).unwrap();
                let want_lo = if succ == 0 { 0.0 } else { bisect(0.0, ph, ph, n) };
                let want_hi = if succ == trials { 1.0 } else { bisect(ph, 1.0, ph, n) };
                assert!((lo - want_lo).abs() < 1e-6, "{succ}/{trials}: {lo} vs {want_lo}");
                assert!((hi - want_hi).abs() < 1e-6, "{succ}/{trials}: {hi} vs {want_hi}");
            }
        }
    }

    fn bernoulli(seed: u64, trials: u64, p: f64) -> TrialReport {
        run_experiment("bernoulli", seed, trials, |_, rng| {
            let hit = rng.gen_bool(p);
            TrialRecord::outcome(hit.to_string(), "true", hit)
        })
        .unwrap()
    }

    #[test]
    fn same_seed_same_report() {
        let a = serde_json::to_string(&bernoulli(9, 300, 0.3)).unwrap();
        let b = serde_json::to_string(&bernoulli(9, 300, 0.3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, serde_json::to_string(&bernoulli(10, 300, 0.3)).unwrap());
    }

    #[test]
    fn zero_trials_gives_empty_report() {
        let r = bernoulli(1, 0, 0.5);
        assert!(r.records.is_empty());
        assert_eq!(r.summary.trials, 0);
        assert_eq!(r.summary.wilson, None);
    }

    // Long-run rate of a calibrated coin lies in the 95% interval for most seeds.
    #[test]
    fn interval_covers_calibrated_rate() {
        let covered = (0..40)
            .filter(|&s| {
                let (lo, hi) = bernoulli(s, 400, 0.25).summary.wilson.unwrap();
                lo <= 0.25 && 0.25 <= hi
            })
            .count();
        assert!(covered >= 34, "covered {covered}/40");
    }
}
