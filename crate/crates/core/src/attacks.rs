//! L∞-bounded perturbation generators and the inverse adversarial loss.
//!
//! The inverse adversarial loss for ground truth `G` and weight `λ` is
//!
//! ```text
//! L(y) = CE(y, onehot(G)) + λ · CE(y, uniform(K))
//! ```
//!
//! Its gradient with respect to the logits is `(1 + λ)·y − (onehot(G) + λ/K)`,
//! which vanishes at `y_G = (1 + λ/K)/(1 + λ)` and `y_k = (λ/K)/(1 + λ)`
//! elsewhere. The minimiser keeps `G` on top by a margin of `1/(1 + λ)` while
//! its confidence shrinks towards `1/K` as `λ` grows.
//!
//! All three generators keep the perturbed input inside `[0, 1]` and every
//! perturbation inside the ε-ball.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nn::{self, LossTarget, Model, ProbVector};
use crate::rng;
use crate::tensor::Tensor;

/// The `λ` used when none is given.
pub const DEFAULT_LAMBDA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Inverse adversarial attack: descend the inverse adversarial loss.
    Iaa,
    /// Projected gradient ascent on cross-entropy with a random start.
    Pgd,
    /// I.i.d. uniform noise in the ε-ball.
    Uniform,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Iaa => "iaa",
            Method::Pgd => "pgd",
            Method::Uniform => "un",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iaa" => Ok(Method::Iaa),
            "pgd" => Ok(Method::Pgd),
            "un" | "uniform" | "noise" => Ok(Method::Uniform),
            other => Err(Error::config(format!("unknown attack method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackConfig {
    /// L∞ radius of the perturbation set, in input units.
    pub epsilon: f32,
    pub iterations: usize,
    /// Step size; `None` means `epsilon / iterations`.
    pub alpha: Option<f32>,
    pub lambda: f64,
    pub seed: u64,
    /// Start from random noise (`true`) or from zero.
    pub random_start: bool,
}

impl AttackConfig {
    pub fn new(epsilon: f32, iterations: usize) -> Self {
        Self {
            epsilon,
            iterations,
            alpha: None,
            lambda: DEFAULT_LAMBDA,
            seed: 0,
            random_start: true,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f32) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_random_start(mut self, random_start: bool) -> Self {
        self.random_start = random_start;
        self
    }

    pub fn step(&self) -> f32 {
        self.alpha
            .unwrap_or(self.epsilon / self.iterations.max(1) as f32)
    }

    /// Configuration for the `index`-th example of a run: same parameters,
    /// private RNG stream.
    pub fn for_example(&self, index: u64) -> Self {
        Self {
            seed: rng::derive(self.seed, index),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!(
                "epsilon {} must be finite and >= 0",
                self.epsilon
            )));
        }
        if self.iterations == 0 {
            return Err(Error::config("attack needs at least one iteration"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(format!(
                "lambda {} must be finite and >= 0",
                self.lambda
            )));
        }
        let alpha = self.step();
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::config(format!(
                "step size {alpha} must be finite and >= 0"
            )));
        }
        if self.epsilon > 0.0 {
            if alpha <= 0.0 {
                return Err(Error::config("step size must be positive when epsilon > 0"));
            }
            // relative slack for the ε/T · T round trip in f32
            let reach = alpha as f64 * self.iterations as f64;
            if reach < self.epsilon as f64 * (1.0 - 1e-6) {
                return Err(Error::config(format!(
                    "budget unreachable: alpha·T = {reach} < epsilon = {}",
                    self.epsilon
                )));
            }
        }
        Ok(())
    }
}

/// Result of perturbing one example.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub x_hat: Tensor,
    pub perturbation: Tensor,
    pub predicted_label: usize,
    pub max_confidence: f64,
    pub ground_truth_confidence: f64,
    pub correct: bool,
}

impl AttackOutcome {
    /// Evaluates `model` on `clip(x + perturbation)`.
    pub fn evaluate(model: &Model, x: &Tensor, perturbation: Tensor, label: usize) -> Result<Self> {
        check_label(model, label)?;
        let x_hat = x.with_values(
            x.values()
                .iter()
                .zip(perturbation.values())
                .map(|(&a, &n)| (a + n).clamp(0.0, 1.0))
                .collect(),
        );
        let probs = model.forward(&x_hat)?.probs;
        let predicted_label = probs.argmax();
        Ok(Self {
            max_confidence: probs.max(),
            ground_truth_confidence: probs.as_slice()[label],
            correct: predicted_label == label,
            predicted_label,
            perturbation,
            x_hat,
        })
    }
}

fn check_label(model: &Model, label: usize) -> Result<()> {
    if label >= model.num_classes() {
        return Err(Error::input(format!(
            "label {label} out of range for {} classes",
            model.num_classes()
        )));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::config(format!(
            "lambda {lambda} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// `CE(y, onehot(G)) + λ·CE(y, uniform(K))`.
pub fn iaa_loss(y: &ProbVector, label: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let k = y.len();
    let fit = nn::cross_entropy(
        y,
        LossTarget::OneHot {
            class: label,
            num_classes: k,
        },
    )?;
    let spread = nn::cross_entropy(y, LossTarget::Uniform { num_classes: k })?;
    Ok(fit + lambda * spread)
}

/// Gradient of [`iaa_loss`] with respect to the logits that produced `y`.
pub fn iaa_loss_grad_logits(y: &ProbVector, label: usize, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let k = y.len();
    if label >= k {
        return Err(Error::input(format!(
            "label {label} out of range for {k} classes"
        )));
    }
    let uniform = lambda / k as f64;
    Ok(y.as_slice()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let target = if i == label { 1.0 + uniform } else { uniform };
            (1.0 + lambda) * p - target
        })
        .collect())
}

/// Closed-form minimiser of [`iaa_loss`] over the simplex, as
/// `(ground-truth probability, every other probability)`.
pub fn minimizer_confidence(lambda: f64, num_classes: usize) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if num_classes < 2 {
        return Err(Error::config("need at least two classes"));
    }
    if lambda == 0.0 {
        return Err(Error::DegenerateConfig(
            "lambda = 0 puts the minimiser at the one-hot vertex".into(),
        ));
    }
    let share = lambda / num_classes as f64;
    Ok(((1.0 + share) / (1.0 + lambda), share / (1.0 + lambda)))
}

/// `+1`, `-1` or `0`.
fn sign(v: f64) -> f32 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Clamps `n` into `[-radius, radius]` and then so that `x + n ∈ [0, 1]`.
fn project(x: &[f32], n: &mut [f32], radius: f32) {
    for (ni, &xi) in n.iter_mut().zip(x) {
        let clamped = ni.clamp(-radius, radius);
        *ni = (xi + clamped).clamp(0.0, 1.0) - xi;
    }
}

fn uniform_vec(rng: &mut rng::Rng, len: usize, radius: f32) -> Vec<f32> {
    if radius <= 0.0 {
        return vec![0.0; len];
    }
    (0..len)
        .map(|_| rng.random_range(-radius..=radius))
        .collect()
}

fn check_inputs(model: &Model, x: &Tensor, label: usize) -> Result<()> {
    if x.len() != model.input_dim() {
        return Err(Error::input(format!(
            "input has {} features, model expects {}",
            x.len(),
            model.input_dim()
        )));
    }
    if !x.all_in_unit_range() {
        return Err(Error::input("input features must lie in [0, 1]"));
    }
    check_label(model, label)
}

/// Signed-gradient loop shared by IAA and PGD. `direction` is `-1` to descend
/// and `+1` to ascend; `radius(t)` is the clamp applied after step `t`.
fn signed_gradient_loop(
    model: &Model,
    x: &Tensor,
    mut n: Vec<f32>,
    cfg: &AttackConfig,
    direction: f32,
    radius: impl Fn(usize) -> f32,
    loss_grad: impl Fn(&ProbVector) -> Result<Vec<f64>>,
) -> Result<Vec<f32>> {
    let xs = x.values();
    let alpha = cfg.step();
    let mut x_hat = x.clone();
    for t in 1..=cfg.iterations {
        x_hat = x_hat.with_values(
            xs.iter()
                .zip(&n)
                .map(|(&a, &b)| (a + b).clamp(0.0, 1.0))
                .collect(),
        );
        let trace = model.trace(&x_hat)?;
        let dl_dz = loss_grad(trace.probs())?;
        let grad = trace.input_grad(&dl_dz)?;
        for (ni, g) in n.iter_mut().zip(grad) {
            *ni += direction * alpha * sign(g);
        }
        project(xs, &mut n, radius(t));
    }
    Ok(n)
}

/// Perturbation found by the inverse adversarial attack on `model`.
pub fn iaa_perturbation(
    model: &Model,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
) -> Result<Tensor> {
    cfg.validate()?;
    check_inputs(model, x, label)?;
    let d = x.len();
    if cfg.epsilon == 0.0 {
        return Ok(x.with_values(vec![0.0; d]));
    }
    let alpha = cfg.step();
    let mut rng = rng::from_seed(cfg.seed);
    let mut n0 = if cfg.random_start {
        uniform_vec(&mut rng, d, alpha)
    } else {
        vec![0.0; d]
    };
    project(x.values(), &mut n0, f32::INFINITY);
    let (eps, steps) = (cfg.epsilon, cfg.iterations);
    let n = signed_gradient_loop(
        model,
        x,
        n0,
        cfg,
        -1.0,
        |t| (t as f64 * eps as f64 / steps as f64) as f32,
        |y| iaa_loss_grad_logits(y, label, cfg.lambda),
    )?;
    Ok(x.with_values(n))
}

/// Perturbation found by PGD (cross-entropy ascent) on `model`.
pub fn pgd_perturbation(
    model: &Model,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
) -> Result<Tensor> {
    cfg.validate()?;
    check_inputs(model, x, label)?;
    let d = x.len();
    if cfg.epsilon == 0.0 {
        return Ok(x.with_values(vec![0.0; d]));
    }
    let mut rng = rng::from_seed(cfg.seed);
    let mut n0 = if cfg.random_start {
        uniform_vec(&mut rng, d, cfg.epsilon)
    } else {
        vec![0.0; d]
    };
    project(x.values(), &mut n0, cfg.epsilon);
    let eps = cfg.epsilon;
    let n = signed_gradient_loop(
        model,
        x,
        n0,
        cfg,
        1.0,
        |_| eps,
        |y| nn::cross_entropy_grad_logits(y, label),
    )?;
    Ok(x.with_values(n))
}

/// Uniform noise in the ε-ball, clipped so that `x + N ∈ [0, 1]`.
pub fn uniform_perturbation(x: &Tensor, epsilon: f32, seed: u64) -> Result<Tensor> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::config(format!(
            "epsilon {epsilon} must be finite and >= 0"
        )));
    }
    if !x.all_in_unit_range() {
        return Err(Error::input("input features must lie in [0, 1]"));
    }
    let mut rng = rng::from_seed(seed);
    let mut n = uniform_vec(&mut rng, x.len(), epsilon);
    project(x.values(), &mut n, epsilon);
    Ok(x.with_values(n))
}

/// Inverse adversarial attack: sign-gradient descent on [`iaa_loss`] with the
/// clamp radius growing linearly to ε over the iterations.
pub fn iaa_attack(
    model: &Model,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
) -> Result<AttackOutcome> {
    let n = iaa_perturbation(model, x, label, cfg)?;
    AttackOutcome::evaluate(model, x, n, label)
}

/// PGD: sign-gradient ascent on cross-entropy from a random start, clamped
/// to the ε-ball after every step.
pub fn pgd_attack(
    model: &Model,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
) -> Result<AttackOutcome> {
    let n = pgd_perturbation(model, x, label, cfg)?;
    AttackOutcome::evaluate(model, x, n, label)
}

pub fn uniform_noise(
    model: &Model,
    x: &Tensor,
    label: usize,
    epsilon: f32,
    seed: u64,
) -> Result<AttackOutcome> {
    check_inputs(model, x, label)?;
    let n = uniform_perturbation(x, epsilon, seed)?;
    AttackOutcome::evaluate(model, x, n, label)
}

/// Perturbation crafted against `threat` by `method`.
pub fn perturb(
    method: Method,
    threat: &Model,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
) -> Result<Tensor> {
    match method {
        Method::Iaa => iaa_perturbation(threat, x, label, cfg),
        Method::Pgd => pgd_perturbation(threat, x, label, cfg),
        Method::Uniform => {
            cfg.validate()?;
            check_inputs(threat, x, label)?;
            uniform_perturbation(x, cfg.epsilon, cfg.seed)
        }
    }
}

/// Crafts with `method` against `threat` and evaluates on `target`.
pub fn run(
    method: Method,
    threat: &Model,
    target: &Model,
    x: &Tensor,
    label: usize,
    cfg: &AttackConfig,
) -> Result<AttackOutcome> {
    let n = perturb(method, threat, x, label, cfg)?;
    AttackOutcome::evaluate(target, x, n, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{softmax, Dense};

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn ten_class_quarter() -> ProbVector {
        let mut p = vec![1.0 / 12.0; 10];
        p[0] = 0.25;
        ProbVector::new(p).unwrap()
    }

    #[test]
    fn loss_examples() {
        let u = ProbVector::uniform(10).unwrap();
        approx(iaa_loss(&u, 3, 5.0).unwrap(), 6.0 * 10f64.ln(), 1e-12);
        approx(iaa_loss(&u, 3, 5.0).unwrap(), 13.8155, 1e-4);

        let y = ten_class_quarter();
        let plain = nn::cross_entropy(
            &y,
            LossTarget::OneHot {
                class: 0,
                num_classes: 10,
            },
        )
        .unwrap();
        assert_eq!(iaa_loss(&y, 0, 0.0).unwrap(), plain);
        // -ln 0.25 + 5·(-(0.1·ln 0.25 + 0.9·ln(1/12)))
        approx(iaa_loss(&y, 0, 5.0).unwrap(), 13.261_521_465_725_84, 1e-10);
    }

    #[test]
    fn negative_lambda_is_rejected() {
        let u = ProbVector::uniform(4).unwrap();
        assert!(matches!(
            iaa_loss(&u, 0, -1.0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            iaa_loss_grad_logits(&u, 0, -0.5),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn grad_examples() {
        let u = ProbVector::uniform(10).unwrap();
        let g = iaa_loss_grad_logits(&u, 0, 5.0).unwrap();
        approx(g[0], -0.9, 1e-12);
        for &v in &g[1..] {
            approx(v, 0.1, 1e-12);
        }

        let (yg, yo) = minimizer_confidence(5.0, 10).unwrap();
        let mut p = vec![yo; 10];
        p[4] = yg;
        let g = iaa_loss_grad_logits(&ProbVector::new(p).unwrap(), 4, 5.0).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12), "{g:?}");
    }

    #[test]
    fn minimizer_anchor_values() {
        approx(minimizer_confidence(5.0, 10).unwrap().0, 0.25, 1e-12);
        approx(minimizer_confidence(5.0, 1000).unwrap().0, 0.1675, 1e-12);
        approx(minimizer_confidence(1.0, 10).unwrap().0, 0.55, 1e-12);
        assert!(matches!(
            minimizer_confidence(0.0, 10),
            Err(Error::DegenerateConfig(_))
        ));
    }

    #[test]
    fn minimizer_identities() {
        for &lambda in &[0.5, 1.0, 3.0, 5.0, 7.0, 10.0] {
            for &k in &[2usize, 10, 100] {
                let (yg, yo) = minimizer_confidence(lambda, k).unwrap();
                approx(yg + (k - 1) as f64 * yo, 1.0, 1e-12);
                approx(yg - yo, 1.0 / (1.0 + lambda), 1e-12);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(AttackConfig::new(0.3, 40).validate().is_ok());
        assert!(AttackConfig::new(0.0, 1).validate().is_ok());
        assert!(AttackConfig::new(0.3, 0).validate().is_err());
        assert!(AttackConfig::new(0.3, 10)
            .with_alpha(0.01)
            .validate()
            .is_err());
        assert!(AttackConfig::new(0.3, 10)
            .with_alpha(0.0)
            .validate()
            .is_err());
        assert!(AttackConfig::new(-0.1, 10).validate().is_err());
        assert!(AttackConfig::new(0.3, 10)
            .with_lambda(-1.0)
            .validate()
            .is_err());
        let model = Model::init(&[3, 2], 0).unwrap();
        let x = Tensor::from_vec(vec![0.5; 3]).unwrap();
        let bad = AttackConfig::new(0.3, 10).with_alpha(0.001);
        assert!(matches!(
            iaa_attack(&model, &x, 0, &bad),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            pgd_attack(&model, &x, 0, &bad),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn zero_budget_is_identity() {
        let model = Model::init(&[6, 5, 3], 4).unwrap();
        let x = Tensor::from_vec(vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap();
        let clean = model.forward(&x).unwrap().probs;
        let cfg = AttackConfig::new(0.0, 10).with_seed(3);
        let outcomes = [
            iaa_attack(&model, &x, 1, &cfg).unwrap(),
            pgd_attack(&model, &x, 1, &cfg).unwrap(),
            uniform_noise(&model, &x, 1, 0.0, 3).unwrap(),
        ];
        for o in outcomes {
            assert_eq!(o.x_hat, x);
            assert!(o.perturbation.values().iter().all(|&v| v == 0.0));
            assert_eq!(o.predicted_label, clean.argmax());
            assert_eq!(o.max_confidence, clean.max());
        }
    }

    fn frozen_linear() -> Model {
        // 2 classes over 3 features
        Model::new(vec![Dense::new(
            3,
            2,
            vec![1.0, -2.0, 0.5, -1.0, 1.0, 0.0],
            vec![0.0; 2],
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn single_iaa_step_on_linear_model() {
        let model = frozen_linear();
        let x = Tensor::from_vec(vec![0.5, 0.5, 0.5]).unwrap();
        let cfg = AttackConfig::new(0.1, 1).with_random_start(false);
        let out = iaa_attack(&model, &x, 0, &cfg).unwrap();

        let y = model.forward(&x).unwrap().probs;
        let g = iaa_loss_grad_logits(&y, 0, cfg.lambda).unwrap();
        let w = model.layers()[0].weight();
        let expected: Vec<f32> = (0..3)
            .map(|j| {
                let wt_g = w[j] as f64 * g[0] + w[3 + j] as f64 * g[1];
                (-0.1 * sign(wt_g)).clamp(-0.1, 0.1)
            })
            .collect();
        assert_close(out.perturbation.values(), &expected);
    }

    fn assert_close(a: &[f32], b: &[f32]) {
        assert_eq!(a.len(), b.len());
        for (u, v) in a.iter().zip(b) {
            assert!((u - v).abs() <= 1e-6, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn single_pgd_step_is_fgsm() {
        let model = frozen_linear();
        let x = Tensor::from_vec(vec![0.3, 0.6, 0.5]).unwrap();
        let cfg = AttackConfig::new(0.05, 1).with_random_start(false);
        let out = pgd_attack(&model, &x, 1, &cfg).unwrap();
        let y = model.forward(&x).unwrap().probs;
        let up = nn::cross_entropy_grad_logits(&y, 1).unwrap();
        let grad = nn::backprop_to_input(&model, &x, &up).unwrap();
        let expected: Vec<f32> = grad
            .values()
            .iter()
            .map(|&g| 0.05 * sign(g as f64))
            .collect();
        assert!(expected.iter().all(|&v| v != 0.0));
        assert_close(out.perturbation.values(), &expected);
    }

    #[test]
    fn uniform_noise_is_bounded_and_deterministic() {
        let x = Tensor::from_vec(vec![0.0, 0.5, 1.0, 0.25]).unwrap();
        let a = uniform_perturbation(&x, 0.2, 99).unwrap();
        let b = uniform_perturbation(&x, 0.2, 99).unwrap();
        let c = uniform_perturbation(&x, 0.2, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.values().iter().all(|v| v.abs() <= 0.2));
        assert!(a.values()[0] >= 0.0 && a.values()[2] <= 0.0);
    }

    #[test]
    fn attacks_are_reproducible() {
        let model = Model::init(&[8, 6, 4], 1).unwrap();
        let x = Tensor::from_vec(vec![0.3; 8]).unwrap();
        let cfg = AttackConfig::new(0.2, 7).with_seed(12);
        assert_eq!(
            iaa_attack(&model, &x, 2, &cfg).unwrap(),
            iaa_attack(&model, &x, 2, &cfg).unwrap()
        );
        assert_eq!(
            pgd_attack(&model, &x, 2, &cfg).unwrap(),
            pgd_attack(&model, &x, 2, &cfg).unwrap()
        );
    }

    #[test]
    fn iaa_drives_confidence_towards_minimizer() {
        // Strong linear classifier where class 0 wins by a wide margin.
        let model = Model::new(vec![Dense::new(
            4,
            3,
            vec![4.0, 4.0, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 4.0],
            vec![0.0; 3],
        )
        .unwrap()])
        .unwrap();
        let x = Tensor::from_vec(vec![0.8, 0.8, 0.2, 0.2]).unwrap();
        let clean = model.forward(&x).unwrap().probs;
        let cfg = AttackConfig::new(0.5, 200).with_lambda(5.0).with_seed(1);
        let out = iaa_attack(&model, &x, 0, &cfg).unwrap();
        assert!(out.correct);
        let (yg, _) = minimizer_confidence(5.0, 3).unwrap();
        assert!(clean.max() > 0.99);
        approx(out.ground_truth_confidence, yg, 0.05);
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        let model = Model::init(&[2, 2], 0).unwrap();
        let x = Tensor::from_vec(vec![1.5, 0.0]).unwrap();
        let cfg = AttackConfig::new(0.1, 2);
        assert!(iaa_attack(&model, &x, 0, &cfg).is_err());
        let x = Tensor::from_vec(vec![0.5, 0.0]).unwrap();
        assert!(iaa_attack(&model, &x, 2, &cfg).is_err());
    }

    #[test]
    fn softmax_feeds_loss() {
        let y = softmax(&[0.2, -0.4, 1.0]).unwrap();
        assert!(iaa_loss(&y, 2, 5.0).unwrap() > 0.0);
    }
}
