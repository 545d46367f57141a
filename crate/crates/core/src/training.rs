//! Plain, adversarial, inverse-adversarial and combined training.
//!
//! All four strategies share one mini-batch SGD loop on cross-entropy against
//! the clean labels; they differ only in how each batch is augmented before
//! the gradient is taken. Perturbations are regenerated for every batch with
//! the current parameters.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::attacks::{self, AttackConfig, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{self, LossTarget, Model, ParamGrads};
use crate::parallel;
use crate::rng;
use crate::tensor::Tensor;

/// Inner-attack iterations used during training unless overridden.
pub const DEFAULT_INNER_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Strategy {
    /// Clean inputs only.
    #[serde(rename = "pt")]
    Plain,
    /// PGD adversarial examples.
    #[serde(rename = "at")]
    Adversarial,
    /// Inverse adversarial examples.
    #[serde(rename = "iat")]
    InverseAdversarial,
    /// Each batch twice: one PGD copy and one IAA copy.
    #[serde(rename = "at-iat")]
    Combined,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Plain => "pt",
            Strategy::Adversarial => "at",
            Strategy::InverseAdversarial => "iat",
            Strategy::Combined => "at-iat",
        }
    }

    fn generators(self) -> &'static [Method] {
        match self {
            Strategy::Plain => &[],
            Strategy::Adversarial => &[Method::Pgd],
            Strategy::InverseAdversarial => &[Method::Iaa],
            Strategy::Combined => &[Method::Pgd, Method::Iaa],
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "pt" | "plain" => Ok(Strategy::Plain),
            "at" | "pgd-at" => Ok(Strategy::Adversarial),
            "iat" => Ok(Strategy::InverseAdversarial),
            "at-iat" | "at+iat" => Ok(Strategy::Combined),
            other => Err(Error::config(format!(
                "unknown training strategy {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainConfig {
    pub strategy: Strategy,
    pub eta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Perturbation generator settings; ignored for [`Strategy::Plain`].
    pub inner_attack: AttackConfig,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(strategy: Strategy, eta: f64, epochs: usize) -> Self {
        Self {
            strategy,
            eta,
            epochs,
            batch_size: 32,
            inner_attack: AttackConfig::new(0.3, DEFAULT_INNER_ITERATIONS),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!(
                "learning rate {} must be finite and >= 0",
                self.eta
            )));
        }
        if self.epochs == 0 {
            return Err(Error::config("need at least one epoch"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be positive"));
        }
        if self.strategy != Strategy::Plain {
            if self.inner_attack.epsilon <= 0.0 {
                return Err(Error::config(format!(
                    "strategy {} needs a positive inner-attack epsilon",
                    self.strategy.name()
                )));
            }
            self.inner_attack.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean cross-entropy over every (possibly augmented) input seen this epoch.
    pub loss: f64,
    /// Fraction of those inputs classified correctly before each update.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub checksum: u64,
}

impl TrainHistory {
    /// `epoch,loss,acc` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,acc\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{},{}\n", e.epoch, e.loss, e.accuracy));
        }
        out
    }
}

struct ExampleStep {
    grads: ParamGrads,
    loss: f64,
    correct: bool,
}

fn example_step(model: &Model, x: &Tensor, label: usize) -> Result<ExampleStep> {
    let trace = model.trace(x)?;
    let probs = trace.probs();
    let loss = nn::cross_entropy(
        probs,
        LossTarget::OneHot {
            class: label,
            num_classes: model.num_classes(),
        },
    )?;
    let dl_dz = nn::cross_entropy_grad_logits(probs, label)?;
    Ok(ExampleStep {
        grads: trace.param_grads(&dl_dz)?,
        loss,
        correct: probs.argmax() == label,
    })
}

/// Inputs fed to the loss for one batch, each paired with its clean label.
pub fn augment_batch(
    model: &Model,
    dataset: &Dataset,
    batch: &[usize],
    strategy: Strategy,
    inner: &AttackConfig,
    stream: u64,
) -> Result<Vec<(Tensor, usize)>> {
    let features = dataset.features();
    let labels = dataset.labels();
    if strategy == Strategy::Plain {
        return Ok(batch
            .iter()
            .map(|&i| (features[i].clone(), labels[i]))
            .collect());
    }
    let gens = strategy.generators();
    let jobs = gens.len() * batch.len();
    parallel::map_indices(jobs, |j| {
        let (g, b) = (j / batch.len(), j % batch.len());
        let i = batch[b];
        let cfg = inner.for_example(rng::derive(stream, i as u64));
        let n = attacks::perturb(gens[g], model, &features[i], labels[i], &cfg)?;
        let x = &features[i];
        let x_hat = Tensor::new(
            x.shape().to_vec(),
            x.values()
                .iter()
                .zip(n.values())
                .map(|(&a, &d)| (a + d).clamp(0.0, 1.0))
                .collect(),
        )?;
        Ok((x_hat, labels[i]))
    })
    .into_iter()
    .collect()
}

/// Trains `model` on `dataset` and returns the final model with its history.
pub fn train(model: &Model, dataset: &Dataset, cfg: &TrainConfig) -> Result<(Model, TrainHistory)> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyInput("training set has no examples".into()));
    }
    if dataset.num_classes() != model.num_classes() || dataset.feature_dim() != model.input_dim() {
        return Err(Error::input(format!(
            "model ({} inputs, {} classes) does not fit dataset ({} features, {} classes)",
            model.input_dim(),
            model.num_classes(),
            dataset.feature_dim(),
            dataset.num_classes()
        )));
    }

    let mut model = model.clone();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::from_seed(rng::derive(cfg.seed, epoch as u64)));
        let epoch_stream = rng::derive(cfg.inner_attack.seed, epoch as u64);
        let (mut loss_sum, mut hits, mut seen) = (0.0f64, 0usize, 0usize);

        for batch in order.chunks(cfg.batch_size) {
            let inputs = augment_batch(
                &model,
                dataset,
                batch,
                cfg.strategy,
                &cfg.inner_attack,
                epoch_stream,
            )?;
            let steps = parallel::map_indices(inputs.len(), |j| {
                example_step(&model, &inputs[j].0, inputs[j].1)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;

            let mut grads = ParamGrads::zeros_like(&model);
            for s in &steps {
                grads.accumulate(&s.grads);
                loss_sum += s.loss;
                hits += usize::from(s.correct);
            }
            seen += steps.len();
            grads.scale(1.0 / steps.len() as f64);
            model = nn::sgd_step(&model, &grads, cfg.eta)?;
        }

        history.push(EpochStats {
            epoch: epoch + 1,
            loss: loss_sum / seen as f64,
            accuracy: hits as f64 / seen as f64,
        });
    }

    let checksum = nn::checksum(&model);
    Ok((
        model,
        TrainHistory {
            epochs: history,
            checksum,
        },
    ))
}

/// Fraction of `dataset` that `model` classifies correctly.
pub fn accuracy(model: &Model, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset has no examples".into()));
    }
    let hits = parallel::map_indices(dataset.len(), |i| {
        model
            .forward(&dataset.features()[i])
            .map(|f| f.probs.argmax() == dataset.labels()[i])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .into_iter()
    .filter(|&h| h)
    .count();
    Ok(hits as f64 / dataset.len() as f64)
}
