//! Confidence binning and calibration metrics.
//!
//! The miscalibration score is `Σ_m (|B_m|/N)·(conf(B_m) − acc(B_m))`, so a
//! positive value means the model is overconfident and a negative value means
//! it is underconfident. ECE is the same sum over absolute gaps.

use serde::Serialize;

use crate::attacks::{self, AttackConfig, AttackOutcome, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::Model;
use crate::parallel;

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub confidence: f64,
    pub correct: bool,
}

impl PredictionRecord {
    pub fn new(confidence: f64, correct: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::input(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Self {
            confidence,
            correct,
        })
    }
}

impl From<&AttackOutcome> for PredictionRecord {
    fn from(o: &AttackOutcome) -> Self {
        Self {
            confidence: o.max_confidence.clamp(0.0, 1.0),
            correct: o.correct,
        }
    }
}

/// One equal-width confidence bin. Empty bins report zero confidence and
/// zero accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

/// Bin index for `confidence`: intervals `[m/M, (m+1)/M)`, with 1.0 in the last.
pub fn bin_index(confidence: f64, num_bins: usize) -> usize {
    ((confidence * num_bins as f64).floor() as usize).min(num_bins - 1)
}

/// Sorts records into `num_bins` equal-width bins over `[0, 1]`.
pub fn bin_predictions(records: &[PredictionRecord], num_bins: usize) -> Result<Vec<Bin>> {
    if num_bins == 0 {
        return Err(Error::config("need at least one bin"));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("no prediction records to bin".into()));
    }
    let mut counts = vec![0usize; num_bins];
    let mut conf = vec![0.0f64; num_bins];
    let mut hits = vec![0usize; num_bins];
    for r in records {
        if !(0.0..=1.0).contains(&r.confidence) {
            return Err(Error::input(format!(
                "confidence {} outside [0, 1]",
                r.confidence
            )));
        }
        let m = bin_index(r.confidence, num_bins);
        counts[m] += 1;
        conf[m] += r.confidence;
        hits[m] += usize::from(r.correct);
    }
    Ok((0..num_bins)
        .map(|m| match counts[m] {
            0 => Bin {
                count: 0,
                mean_confidence: 0.0,
                accuracy: 0.0,
            },
            n => Bin {
                count: n,
                mean_confidence: conf[m] / n as f64,
                accuracy: hits[m] as f64 / n as f64,
            },
        })
        .collect())
}

fn weighted_gap(bins: &[Bin], total: usize, gap: impl Fn(f64) -> f64) -> Result<f64> {
    if total == 0 {
        return Err(Error::EmptyInput("total record count is zero".into()));
    }
    let n = total as f64;
    Ok(bins
        .iter()
        .map(|b| b.count as f64 / n * gap(b.mean_confidence - b.accuracy))
        .sum())
}

/// Signed miscalibration score; positive means overconfident.
pub fn mcs(bins: &[Bin], total: usize) -> Result<f64> {
    weighted_gap(bins, total, |g| g)
}

/// Expected calibration error.
pub fn ece(bins: &[Bin], total: usize) -> Result<f64> {
    weighted_gap(bins, total, f64::abs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub num_bins: usize,
    pub bins: Vec<Bin>,
    pub mcs: f64,
    pub ece: f64,
    #[serde(rename = "acc")]
    pub overall_acc: f64,
    #[serde(rename = "conf")]
    pub overall_conf: f64,
    /// Mean probability assigned to the ground-truth class. Only available
    /// when the report was built from attack outcomes.
    #[serde(rename = "gt_conf", skip_serializing_if = "Option::is_none")]
    pub mean_ground_truth_conf: Option<f64>,
    #[serde(rename = "n")]
    pub total: usize,
}

impl CalibrationReport {
    pub fn from_records(records: &[PredictionRecord], num_bins: usize) -> Result<Self> {
        let bins = bin_predictions(records, num_bins)?;
        let total = records.len();
        let n = total as f64;
        Ok(Self {
            num_bins,
            mcs: mcs(&bins, total)?,
            ece: ece(&bins, total)?,
            overall_acc: records.iter().filter(|r| r.correct).count() as f64 / n,
            overall_conf: records.iter().map(|r| r.confidence).sum::<f64>() / n,
            mean_ground_truth_conf: None,
            bins,
            total,
        })
    }

    pub fn from_outcomes(outcomes: &[AttackOutcome], num_bins: usize) -> Result<Self> {
        let records: Vec<PredictionRecord> = outcomes.iter().map(PredictionRecord::from).collect();
        let mut report = Self::from_records(&records, num_bins)?;
        report.mean_ground_truth_conf = Some(
            outcomes
                .iter()
                .map(|o| o.ground_truth_confidence)
                .sum::<f64>()
                / outcomes.len() as f64,
        );
        Ok(report)
    }
}

/// Which perturbation (if any) to apply before scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub method: Method,
    pub config: AttackConfig,
}

/// Runs `attack` (crafted against `threat`) on every example and scores the
/// predictions of `target`. Example `i` uses the RNG stream `(seed, i)`.
pub fn attack_outcomes(
    threat: &Model,
    target: &Model,
    dataset: &Dataset,
    attack: Option<&AttackSpec>,
) -> Result<Vec<AttackOutcome>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset has no examples".into()));
    }
    for m in [threat, target] {
        if m.num_classes() != dataset.num_classes() || m.input_dim() != dataset.feature_dim() {
            return Err(Error::input(format!(
                "model ({} inputs, {} classes) does not fit dataset ({} features, {} classes)",
                m.input_dim(),
                m.num_classes(),
                dataset.feature_dim(),
                dataset.num_classes()
            )));
        }
    }
    if let Some(spec) = attack {
        spec.config.validate()?;
    }
    let features = dataset.features();
    let labels = dataset.labels();
    parallel::map_indices(dataset.len(), |i| {
        let (x, label) = (&features[i], labels[i]);
        match attack {
            None => AttackOutcome::evaluate(target, x, x.with_values(vec![0.0; x.len()]), label),
            Some(spec) => {
                let cfg = spec.config.for_example(i as u64);
                attacks::run(spec.method, threat, target, x, label, &cfg)
            }
        }
    })
    .into_iter()
    .collect()
}

/// Whitebox evaluation: the attack is crafted against `model` itself.
pub fn evaluate(
    model: &Model,
    dataset: &Dataset,
    attack: Option<&AttackSpec>,
    num_bins: usize,
) -> Result<CalibrationReport> {
    evaluate_transfer(model, model, dataset, attack, num_bins)
}

/// Transfer evaluation: perturbations crafted on `threat`, scored on `target`.
pub fn evaluate_transfer(
    threat: &Model,
    target: &Model,
    dataset: &Dataset,
    attack: Option<&AttackSpec>,
    num_bins: usize,
) -> Result<CalibrationReport> {
    if num_bins == 0 {
        return Err(Error::config("need at least one bin"));
    }
    let outcomes = attack_outcomes(threat, target, dataset, attack)?;
    CalibrationReport::from_outcomes(&outcomes, num_bins)
}
