//! Browser bindings for the calibration-attack lab.
//!
//! Everything here is plain Rust returning JSON strings; the `#[wasm_bindgen]`
//! wrappers only translate errors into JavaScript exceptions.

use miscal::attacks::{iaa_loss, minimizer_confidence};
use miscal::calibration::{self, AttackSpec, CalibrationReport};
use miscal::data::{synth_blobs, BlobSpec};
use miscal::nn::ProbVector;
use miscal::training::{self, train};
use miscal::{AttackConfig, Dataset, Method, Model, Strategy, Tensor, TrainConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const LAB_CLASSES: usize = 3;
const LAB_HIDDEN: usize = 16;

#[derive(Serialize)]
struct LossCurve {
    lambda: f64,
    classes: usize,
    p: Vec<f64>,
    loss: Vec<f64>,
    minimizer: f64,
}

/// IAA loss along the symmetric ray `y_G = p`, every other class `(1-p)/(K-1)`.
pub fn loss_curve_json(lambda: f64, classes: usize, points: usize) -> Result<String, String> {
    let (minimizer, _) = minimizer_confidence(lambda, classes).map_err(|e| e.to_string())?;
    let points = points.max(2);
    let mut p = Vec::with_capacity(points);
    let mut loss = Vec::with_capacity(points);
    for i in 0..points {
        // stay strictly inside the simplex so every log is finite
        let pg = 1e-3 + (1.0 - 2e-3) * i as f64 / (points - 1) as f64;
        let rest = (1.0 - pg) / (classes - 1) as f64;
        let mut y = vec![rest; classes];
        y[0] = pg;
        let y = ProbVector::new(y).map_err(|e| e.to_string())?;
        p.push(pg);
        loss.push(iaa_loss(&y, 0, lambda).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&LossCurve {
        lambda,
        classes,
        p,
        loss,
        minimizer,
    })
    .map_err(|e| e.to_string())
}

/// A 2-D, three-class toy problem with a trainable MLP.
pub struct Lab {
    data: Dataset,
    model: Model,
    seed: u64,
}

#[derive(Serialize)]
struct Point {
    x: [f32; 2],
    x_hat: [f32; 2],
    label: usize,
    predicted: usize,
    confidence: f64,
}

#[derive(Serialize)]
struct AttackView<'a> {
    method: &'a str,
    report: &'a CalibrationReport,
    clean: &'a CalibrationReport,
    points: Vec<Point>,
}

#[derive(Serialize)]
struct TrainView {
    strategy: &'static str,
    accuracy: f64,
    loss: Vec<f64>,
}

impl Lab {
    pub fn new(seed: u64, per_class: usize, spread: f64) -> Result<Self, String> {
        let spec = BlobSpec {
            classes: LAB_CLASSES,
            per_class,
            dim: 2,
            spread,
            seed,
        };
        let data = synth_blobs(&spec).map_err(|e| e.to_string())?;
        let model = Model::init(&[2, LAB_HIDDEN, LAB_CLASSES], seed).map_err(|e| e.to_string())?;
        Ok(Self { data, model, seed })
    }

    pub fn train_json(
        &mut self,
        strategy: &str,
        epochs: usize,
        eta: f64,
        eps: f32,
    ) -> Result<String, String> {
        let strategy: Strategy = strategy.parse().map_err(|e: miscal::Error| e.to_string())?;
        let cfg = TrainConfig {
            inner_attack: AttackConfig::new(eps, 10),
            batch_size: 16,
            seed: self.seed,
            ..TrainConfig::new(strategy, eta, epochs)
        };
        let init =
            Model::init(&[2, LAB_HIDDEN, LAB_CLASSES], self.seed).map_err(|e| e.to_string())?;
        let (model, history) = train(&init, &self.data, &cfg).map_err(|e| e.to_string())?;
        self.model = model;
        let view = TrainView {
            strategy: strategy.name(),
            accuracy: training::accuracy(&self.model, &self.data).map_err(|e| e.to_string())?,
            loss: history.epochs.iter().map(|e| e.loss).collect(),
        };
        serde_json::to_string(&view).map_err(|e| e.to_string())
    }

    pub fn attack_json(
        &self,
        method: &str,
        eps: f32,
        lambda: f64,
        iters: usize,
    ) -> Result<String, String> {
        let method: Method = method.parse().map_err(|e: miscal::Error| e.to_string())?;
        let config = AttackConfig::new(eps, iters)
            .with_lambda(lambda)
            .with_seed(self.seed);
        let spec = AttackSpec { method, config };
        let outcomes =
            calibration::attack_outcomes(&self.model, &self.model, &self.data, Some(&spec))
                .map_err(|e| e.to_string())?;
        let report = CalibrationReport::from_outcomes(&outcomes, 10).map_err(|e| e.to_string())?;
        let clean =
            calibration::evaluate(&self.model, &self.data, None, 10).map_err(|e| e.to_string())?;
        let points = outcomes
            .iter()
            .zip(self.data.features().iter().zip(self.data.labels()))
            .map(|(o, (x, &label))| Point {
                x: [x.values()[0], x.values()[1]],
                x_hat: [o.x_hat.values()[0], o.x_hat.values()[1]],
                label,
                predicted: o.predicted_label,
                confidence: o.max_confidence,
            })
            .collect();
        let view = AttackView {
            method: method.name(),
            report: &report,
            clean: &clean,
            points,
        };
        serde_json::to_string(&view).map_err(|e| e.to_string())
    }

    /// Predicted class and confidence on a `res × res` grid over the unit
    /// square, row-major from the top-left, as `[class, conf, class, conf, ...]`.
    pub fn decision_grid(&self, res: usize) -> Result<Vec<f64>, String> {
        let res = res.max(2);
        let mut out = Vec::with_capacity(res * res * 2);
        for row in 0..res {
            for col in 0..res {
                let x = col as f32 / (res - 1) as f32;
                let y = 1.0 - row as f32 / (res - 1) as f32;
                let t = Tensor::from_vec(vec![x, y]).map_err(|e| e.to_string())?;
                let probs = self.model.forward(&t).map_err(|e| e.to_string())?.probs;
                out.push(probs.argmax() as f64);
                out.push(probs.max());
            }
        }
        Ok(out)
    }
}

#[wasm_bindgen]
pub fn loss_curve(lambda: f64, classes: usize, points: usize) -> Result<String, JsError> {
    loss_curve_json(lambda, classes, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn minimizer(lambda: f64, classes: usize) -> Result<f64, JsError> {
    minimizer_confidence(lambda, classes)
        .map(|(g, _)| g)
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = Lab)]
pub struct JsLab(Lab);

#[wasm_bindgen(js_class = Lab)]
impl JsLab {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, per_class: usize, spread: f64) -> Result<JsLab, JsError> {
        Lab::new(seed, per_class, spread)
            .map(JsLab)
            .map_err(|e| JsError::new(&e))
    }

    pub fn train(
        &mut self,
        strategy: &str,
        epochs: usize,
        eta: f64,
        eps: f32,
    ) -> Result<String, JsError> {
        self.0
            .train_json(strategy, epochs, eta, eps)
            .map_err(|e| JsError::new(&e))
    }

    pub fn attack(
        &self,
        method: &str,
        eps: f32,
        lambda: f64,
        iters: usize,
    ) -> Result<String, JsError> {
        self.0
            .attack_json(method, eps, lambda, iters)
            .map_err(|e| JsError::new(&e))
    }

    pub fn grid(&self, res: usize) -> Result<Vec<f64>, JsError> {
        self.0.decision_grid(res).map_err(|e| JsError::new(&e))
    }
}
