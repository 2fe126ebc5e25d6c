use std::io::Write;

use serde::Serialize;

use super::{wilson_interval, HarnessError};

/// One trial's outcome.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub answer: String,
    pub truth: String,
    pub correct: bool,
    pub estimate: Option<f64>,
    pub rel_err: Option<f64>,
    pub peak_bits: u64,
    pub stream_len: u64,
}

impl TrialRecord {
    pub fn outcome(answer: impl Into<String>, truth: impl Into<String>, correct: bool) -> Self {
        Self {
            answer: answer.into(),
            truth: truth.into(),
            correct,
            ..Self::default()
        }
    }

    pub fn with_space(mut self, peak_bits: u64, stream_len: u64) -> Self {
        self.peak_bits = peak_bits;
        self.stream_len = stream_len;
        self
    }

    pub fn with_estimate(mut self, estimate: f64, truth: f64) -> Self {
        self.estimate = Some(estimate);
        self.rel_err = (truth != 0.0).then(|| (estimate - truth).abs() / truth.abs());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: Option<f64>,
    /// 95% Wilson interval of the success rate.
    pub wilson: Option<(f64, f64)>,
    pub mean_estimate: Option<f64>,
    pub var_estimate: Option<f64>,
    pub mean_peak_bits: Option<f64>,
    pub max_peak_bits: u64,
}

impl Summary {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let trials = records.len() as u64;
        let successes = records.iter().filter(|r| r.correct).count() as u64;
        let estimates: Vec<f64> = records.iter().filter_map(|r| r.estimate).collect();
        let (mean_estimate, var_estimate) = mean_var(&estimates);
        let peaks: Vec<f64> = records.iter().map(|r| r.peak_bits as f64).collect();
        Self {
            trials,
            successes,
            success_rate: (trials > 0).then(|| successes as f64 / trials as f64),
            wilson: wilson_interval(successes, trials, 0.95).ok(),
            mean_estimate,
            var_estimate,
            mean_peak_bits: mean_var(&peaks).0,
            max_peak_bits: records.iter().map(|r| r.peak_bits).max().unwrap_or(0),
        }
    }
}

fn mean_var(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = (xs.len() > 1).then(|| xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0));
    (Some(mean), var)
}

/// Records of an experiment with their aggregate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub experiment: String,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

impl TrialReport {
    pub fn new(experiment: &str, seed: u64, records: Vec<TrialRecord>) -> Self {
        let summary = Summary::from_records(&records);
        Self {
            experiment: experiment.to_string(),
            seed,
            records,
            summary,
        }
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// One row per trial.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
