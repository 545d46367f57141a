//! Dense ReLU networks with exact reverse-mode gradients.
//!
//! Parameters are stored as `f32`. All arithmetic (matrix-vector products,
//! softmax, losses, gradients) runs in `f64` so that gradients can be checked
//! against finite differences at tight tolerances.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor;

/// Lower bound applied to probabilities before taking their logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// One affine layer. `weight` is `outputs × inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    inputs: usize,
    outputs: usize,
    weight: Vec<f32>,
    bias: Vec<f32>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, weight: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::input("layer dimensions must be positive"));
        }
        if weight.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::input(format!(
                "layer {inputs}->{outputs} needs {} weights and {outputs} biases, got {} and {}",
                inputs * outputs,
                weight.len(),
                bias.len()
            )));
        }
        if weight.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite layer parameter"));
        }
        Ok(Self {
            inputs,
            outputs,
            weight,
            bias,
        })
    }

    /// Glorot-uniform weights, zero bias.
    fn glorot(inputs: usize, outputs: usize, rng: &mut rng::Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt() as f32;
        let weight = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        Self {
            inputs,
            outputs,
            weight,
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight(&self) -> &[f32] {
        &self.weight
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    fn apply(&self, input: &[f64]) -> Vec<f64> {
        self.weight
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, &b)| {
                row.iter()
                    .zip(input)
                    .fold(b as f64, |acc, (&w, &x)| acc + w as f64 * x)
            })
            .collect()
    }
}

/// A stack of dense layers with ReLU between consecutive layers and a linear
/// final layer whose width is the number of classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    layers: Vec<Dense>,
}

impl Model {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::input("model needs at least one layer"));
        };
        if last.outputs < 2 {
            return Err(Error::input("model needs at least two classes"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::input(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].outputs,
                    i + 1,
                    pair[1].inputs
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Randomly initialised model with the given layer widths, e.g.
    /// `[32, 16, 10]` for one hidden layer of 16 units.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::input(format!("bad layer dims {dims:?}")));
        }
        let mut rng = rng::from_seed(seed);
        let layers = dims
            .windows(2)
            .map(|w| Dense::glorot(w[0], w[1], &mut rng))
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn num_classes(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    /// Layer widths from input to output.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// Runs the forward pass and keeps every intermediate activation.
    pub fn trace(&self, x: &Tensor) -> Result<Trace<'_>> {
        if x.len() != self.input_dim() {
            return Err(Error::input(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut current: Vec<f64> = x.values().iter().map(|&v| v as f64).collect();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = layer.apply(&current);
            if i + 1 < self.layers.len() {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(current);
            current = next;
        }
        let probs = softmax(&current)?;
        Ok(Trace {
            model: self,
            activations,
            logits: current,
            probs,
        })
    }

    /// Logits and softmax probabilities for `x`.
    pub fn forward(&self, x: &Tensor) -> Result<Forward> {
        let trace = self.trace(x)?;
        Ok(Forward {
            logits: trace.logits,
            probs: trace.probs,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub logits: Vec<f64>,
    pub probs: ProbVector,
}

/// Forward-pass record used by both backward passes.
#[derive(Debug)]
pub struct Trace<'m> {
    model: &'m Model,
    /// Input to each layer (post-ReLU for hidden layers).
    activations: Vec<Vec<f64>>,
    logits: Vec<f64>,
    probs: ProbVector,
}

impl Trace<'_> {
    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn probs(&self) -> &ProbVector {
        &self.probs
    }

    fn check_upstream(&self, dl_dz: &[f64]) -> Result<()> {
        if dl_dz.len() != self.logits.len() {
            return Err(Error::input(format!(
                "upstream gradient has {} entries, model has {} classes",
                dl_dz.len(),
                self.logits.len()
            )));
        }
        if dl_dz.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite upstream gradient"));
        }
        Ok(())
    }

    /// Walks the layers backwards, handing each layer's output-gradient to
    /// `visit` and returning the gradient with respect to the network input.
    fn backward(&self, dl_dz: &[f64], mut visit: impl FnMut(usize, &[f64], &[f64])) -> Vec<f64> {
        let layers = &self.model.layers;
        let mut delta = dl_dz.to_vec();
        for i in (0..layers.len()).rev() {
            let layer = &layers[i];
            let input = &self.activations[i];
            visit(i, &delta, input);
            let mut prev = vec![0.0f64; layer.inputs];
            for (row, &d) in layer.weight.chunks_exact(layer.inputs).zip(&delta) {
                if d != 0.0 {
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += w as f64 * d;
                    }
                }
            }
            if i > 0 {
                // input[j] == 0 exactly when the previous pre-activation was <= 0
                for (p, &a) in prev.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        delta
    }

    /// Gradient of a scalar loss with respect to the input, given `dL/dz`.
    pub fn input_grad(&self, dl_dz: &[f64]) -> Result<Vec<f64>> {
        self.check_upstream(dl_dz)?;
        Ok(self.backward(dl_dz, |_, _, _| {}))
    }

    /// Gradient of a scalar loss with respect to every parameter, given `dL/dz`.
    pub fn param_grads(&self, dl_dz: &[f64]) -> Result<ParamGrads> {
        self.check_upstream(dl_dz)?;
        let mut grads = ParamGrads::zeros_like(self.model);
        self.backward(dl_dz, |i, delta, input| {
            let g = &mut grads.layers[i];
            for ((row, b), &d) in g
                .weight
                .chunks_exact_mut(input.len())
                .zip(&mut g.bias)
                .zip(delta)
            {
                *b += d;
                for (w, &a) in row.iter_mut().zip(input) {
                    *w += d * a;
                }
            }
        });
        Ok(grads)
    }
}

/// Gradient of `dL/dz` pulled back to the input of `model` at `x`.
pub fn backprop_to_input(model: &Model, x: &Tensor, dl_dz: &[f64]) -> Result<Tensor> {
    let grad = model.trace(x)?.input_grad(dl_dz)?;
    Ok(x.with_values(grad.into_iter().map(|g| g as f32).collect()))
}

/// Gradient of `dL/dz` pulled back to every parameter of `model` at `x`.
pub fn backprop_to_params(model: &Model, x: &Tensor, dl_dz: &[f64]) -> Result<ParamGrads> {
    model.trace(x)?.param_grads(dl_dz)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Parameter gradients, laid out exactly like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub layers: Vec<LayerGrads>,
}

impl ParamGrads {
    pub fn zeros_like(model: &Model) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| LayerGrads {
                    weight: vec![0.0; l.weight.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weight.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()).copied())
    }

    /// `self += other`. Panics if the layouts differ.
    pub fn accumulate(&mut self, other: &ParamGrads) {
        assert!(self.same_layout(other), "gradient layout mismatch");
        for (a, b) in self.values_mut().zip(other.values()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values_mut().for_each(|v| *v *= factor);
    }

    fn same_layout(&self, other: &ParamGrads) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weight.len() == b.weight.len() && a.bias.len() == b.bias.len())
    }

    fn matches(&self, model: &Model) -> bool {
        self.same_layout(&ParamGrads::zeros_like(model))
    }
}

/// One plain gradient-descent step: `θ ← θ − η·∇θ`. Returns a new model.
pub fn sgd_step(model: &Model, grads: &ParamGrads, eta: f64) -> Result<Model> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::config(format!(
            "learning rate {eta} must be finite and >= 0"
        )));
    }
    if !grads.matches(model) {
        return Err(Error::input("gradient layout does not match model"));
    }
    let step = |p: &[f32], g: &[f64]| -> Vec<f32> {
        p.iter()
            .zip(g)
            .map(|(&p, &g)| (p as f64 - eta * g) as f32)
            .collect()
    };
    let layers = model
        .layers
        .iter()
        .zip(&grads.layers)
        .map(|(l, g)| Dense {
            inputs: l.inputs,
            outputs: l.outputs,
            weight: step(&l.weight, &g.weight),
            bias: step(&l.bias, &g.bias),
        })
        .collect::<Vec<_>>();
    if layers
        .iter()
        .any(|l| l.weight.iter().chain(&l.bias).any(|v| !v.is_finite()))
    {
        return Err(Error::input("update produced non-finite parameters"));
    }
    Ok(Model { layers })
}

/// A categorical distribution over `K` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Accepts `probs` if every entry lies in `[0, 1]` and they sum to one
    /// within `1e-6`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::input("distribution needs at least two classes"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::input("probabilities must lie in [0, 1]"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::input(format!("probabilities sum to {sum}")));
        }
        Ok(Self(probs))
    }

    pub fn uniform(num_classes: usize) -> Result<Self> {
        Self::new(vec![1.0 / num_classes as f64; num_classes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Result<ProbVector> {
    if logits.len() < 2 {
        return Err(Error::input("softmax needs at least two logits"));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::input("non-finite logit"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(ProbVector(exps.into_iter().map(|e| e / total).collect()))
}

/// Target distribution for a cross-entropy term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTarget {
    OneHot { class: usize, num_classes: usize },
    Uniform { num_classes: usize },
}

impl LossTarget {
    pub fn num_classes(&self) -> usize {
        match *self {
            LossTarget::OneHot { num_classes, .. } | LossTarget::Uniform { num_classes } => {
                num_classes
            }
        }
    }

    pub fn weight(&self, k: usize) -> f64 {
        match *self {
            LossTarget::OneHot { class, .. } => f64::from(u8::from(k == class)),
            LossTarget::Uniform { num_classes } => 1.0 / num_classes as f64,
        }
    }

    fn validate(&self) -> Result<()> {
        if let LossTarget::OneHot { class, num_classes } = *self {
            if class >= num_classes {
                return Err(Error::input(format!(
                    "class {class} out of range for {num_classes} classes"
                )));
            }
        }
        Ok(())
    }
}

/// `−Σ target_k · ln(max(y_k, PROB_FLOOR))`, in nats.
pub fn cross_entropy(y: &ProbVector, target: LossTarget) -> Result<f64> {
    target.validate()?;
    if y.len() != target.num_classes() {
        return Err(Error::input(format!(
            "distribution has {} classes, target has {}",
            y.len(),
            target.num_classes()
        )));
    }
    Ok(-y
        .0
        .iter()
        .enumerate()
        .map(|(k, &p)| target.weight(k) * p.max(PROB_FLOOR).ln())
        .sum::<f64>())
}

/// `dCE/dz` for the one-hot target, i.e. `y − onehot(class)`.
pub fn cross_entropy_grad_logits(y: &ProbVector, class: usize) -> Result<Vec<f64>> {
    if class >= y.len() {
        return Err(Error::input(format!("class {class} out of range")));
    }
    Ok(y.0
        .iter()
        .enumerate()
        .map(|(k, &p)| if k == class { p - 1.0 } else { p })
        .collect())
}

/// FNV-1a over the little-endian bytes of every parameter, in layer order.
pub fn checksum(model: &Model) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for layer in &model.layers {
        for v in layer.weight.iter().chain(&layer.bias) {
            for b in v.to_le_bytes() {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn linear(inputs: usize, outputs: usize, weight: Vec<f32>) -> Model {
        Model::new(vec![Dense::new(
            inputs,
            outputs,
            weight,
            vec![0.0; outputs],
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn softmax_zero_logits_are_uniform() {
        let y = softmax(&[0.0; 10]).unwrap();
        for &p in y.as_slice() {
            approx(p, 0.1, 1e-15);
        }
    }

    #[test]
    fn softmax_closed_form_and_shift() {
        let y = softmax(&[3f64.ln(), 0.0]).unwrap();
        approx(y.as_slice()[0], 0.75, 1e-15);
        approx(y.as_slice()[1], 0.25, 1e-15);

        let z = [0.3, -1.2, 4.0, 0.0];
        let shifted: Vec<f64> = z.iter().map(|v| v + 123.4).collect();
        let (a, b) = (softmax(&z).unwrap(), softmax(&shifted).unwrap());
        for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
            approx(*p, *q, 1e-7);
        }
    }

    #[test]
    fn softmax_rejects_non_finite() {
        assert!(matches!(
            softmax(&[0.0, f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
        assert!(softmax(&[f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn softmax_survives_huge_logits() {
        let y = softmax(&[1000.0, 0.0, -1000.0]).unwrap();
        approx(y.as_slice()[0], 1.0, 1e-12);
    }

    #[test]
    fn cross_entropy_examples() {
        let y = ProbVector::new(vec![0.25, 0.75]).unwrap();
        let ce = cross_entropy(
            &y,
            LossTarget::OneHot {
                class: 1,
                num_classes: 2,
            },
        )
        .unwrap();
        approx(ce, -(0.75f64.ln()), 1e-12);
        approx(ce, 0.2877, 1e-4);

        let u = ProbVector::uniform(10).unwrap();
        let ce = cross_entropy(&u, LossTarget::Uniform { num_classes: 10 }).unwrap();
        approx(ce, 10f64.ln(), 1e-12);

        // direct summation: -(0.1 ln 0.25 + 0.9 ln(1/12))
        let mut probs = vec![1.0 / 12.0; 10];
        probs[0] = 0.25;
        let y = ProbVector::new(probs).unwrap();
        let ce = cross_entropy(&y, LossTarget::Uniform { num_classes: 10 }).unwrap();
        approx(ce, 2.375_045_420_921_19, 1e-12);
        approx(ce, 2.3751, 1e-4);
    }

    #[test]
    fn cross_entropy_dimension_mismatch() {
        let y = ProbVector::uniform(3).unwrap();
        assert!(cross_entropy(&y, LossTarget::Uniform { num_classes: 4 }).is_err());
        assert!(cross_entropy(
            &y,
            LossTarget::OneHot {
                class: 3,
                num_classes: 3
            }
        )
        .is_err());
    }

    #[test]
    fn cross_entropy_floor_keeps_loss_finite() {
        let y = ProbVector::new(vec![1.0, 0.0]).unwrap();
        let ce = cross_entropy(
            &y,
            LossTarget::OneHot {
                class: 1,
                num_classes: 2,
            },
        )
        .unwrap();
        approx(ce, -(PROB_FLOOR.ln()), 1e-9);
        let ce = cross_entropy(
            &y,
            LossTarget::OneHot {
                class: 0,
                num_classes: 2,
            },
        )
        .unwrap();
        assert_eq!(ce, 0.0);
    }

    #[test]
    fn zero_model_is_uniform() {
        let model = Model::new(vec![
            Dense::new(3, 4, vec![0.0; 12], vec![0.0; 4]).unwrap(),
            Dense::new(4, 5, vec![0.0; 20], vec![0.0; 5]).unwrap(),
        ])
        .unwrap();
        let x = Tensor::from_vec(vec![0.2, 0.9, 0.4]).unwrap();
        let out = model.forward(&x).unwrap();
        for &p in out.probs.as_slice() {
            approx(p, 0.2, 1e-15);
        }
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let model = linear(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let x = Tensor::from_vec(vec![0.1, 0.5, 0.9]).unwrap();
        let out = model.forward(&x).unwrap();
        for (z, v) in out.logits.iter().zip(x.values()) {
            assert_eq!(*z, *v as f64);
        }
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let model = Model::init(&[4, 3], 1).unwrap();
        let x = Tensor::from_vec(vec![0.0; 5]).unwrap();
        assert!(matches!(model.forward(&x), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn model_rejects_broken_chains() {
        let a = Dense::new(2, 3, vec![0.0; 6], vec![0.0; 3]).unwrap();
        let b = Dense::new(4, 2, vec![0.0; 8], vec![0.0; 2]).unwrap();
        assert!(Model::new(vec![a, b]).is_err());
        let one_class = Dense::new(2, 1, vec![0.0; 2], vec![0.0]).unwrap();
        assert!(Model::new(vec![one_class]).is_err());
        assert!(Model::new(vec![]).is_err());
    }

    #[test]
    fn linear_input_grad_is_transpose_product() {
        // W = [[1, 2], [3, 4], [5, 6]] (3 outputs, 2 inputs)
        let model = linear(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let x = Tensor::from_vec(vec![0.3, 0.7]).unwrap();
        let g = backprop_to_input(&model, &x, &[1.0, -1.0, 0.5]).unwrap();
        assert_eq!(g.values(), &[1.0 - 3.0 + 2.5, 2.0 - 4.0 + 3.0]);
        assert_eq!(g.shape(), x.shape());
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let model = Model::init(&[5, 4, 3], 9).unwrap();
        let x = Tensor::from_vec(vec![0.5; 5]).unwrap();
        let gi = backprop_to_input(&model, &x, &[0.0; 3]).unwrap();
        assert!(gi.values().iter().all(|&v| v == 0.0));
        let gp = backprop_to_params(&model, &x, &[0.0; 3]).unwrap();
        assert!(gp.values().all(|v| v == 0.0));
    }

    #[test]
    fn bias_grad_equals_upstream() {
        let model = Model::init(&[4, 3], 2).unwrap();
        let x = Tensor::from_vec(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let up = [0.3, -0.8, 0.5];
        let gp = backprop_to_params(&model, &x, &up).unwrap();
        assert_eq!(gp.layers[0].bias, up.to_vec());
    }

    #[test]
    fn backprop_rejects_bad_upstream() {
        let model = Model::init(&[4, 3], 2).unwrap();
        let x = Tensor::from_vec(vec![0.1; 4]).unwrap();
        assert!(backprop_to_input(&model, &x, &[0.0; 2]).is_err());
        assert!(backprop_to_params(&model, &x, &[0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn sgd_identity_and_arithmetic() {
        let model = linear(1, 2, vec![1.0, -1.0]);
        let mut grads = ParamGrads::zeros_like(&model);
        grads.layers[0].weight = vec![2.0, 0.0];
        assert_eq!(sgd_step(&model, &grads, 0.0).unwrap(), model);
        let updated = sgd_step(&model, &grads, 0.1).unwrap();
        assert_eq!(updated.layers()[0].weight()[0], 0.8);
        assert_eq!(model.layers()[0].weight()[0], 1.0);
    }

    #[test]
    fn sgd_composes_with_frozen_gradients() {
        let model = linear(1, 2, vec![1.0, 0.5]);
        let mut g1 = ParamGrads::zeros_like(&model);
        g1.layers[0].weight = vec![0.25, -0.5];
        let mut g2 = ParamGrads::zeros_like(&model);
        g2.layers[0].weight = vec![0.75, 1.0];
        let twice = sgd_step(&sgd_step(&model, &g1, 0.5).unwrap(), &g2, 0.5).unwrap();
        let mut sum = g1.clone();
        sum.accumulate(&g2);
        let once = sgd_step(&model, &sum, 0.5).unwrap();
        assert_eq!(twice, once);
        assert_eq!(once.layers()[0].weight(), &[0.5, 0.25]);
    }

    #[test]
    fn sgd_rejects_bad_inputs() {
        let model = Model::init(&[3, 2], 0).unwrap();
        let other = Model::init(&[3, 4, 2], 0).unwrap();
        let grads = ParamGrads::zeros_like(&other);
        assert!(sgd_step(&model, &grads, 0.1).is_err());
        let grads = ParamGrads::zeros_like(&model);
        assert!(matches!(
            sgd_step(&model, &grads, -1.0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = Model::init(&[32, 16, 10], 7).unwrap();
        let b = Model::init(&[32, 16, 10], 7).unwrap();
        let c = Model::init(&[32, 16, 10], 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.num_params(), 32 * 16 + 16 + 16 * 10 + 10);
        let limit = (6.0f64 / 48.0).sqrt() as f32;
        assert!(a.layers()[0].weight().iter().all(|w| w.abs() <= limit));
        assert_eq!(checksum(&a), checksum(&b));
        assert_ne!(checksum(&a), checksum(&c));
    }

    #[test]
    fn argmax_ties_go_low() {
        let y = ProbVector::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert_eq!(y.argmax(), 0);
        let y = ProbVector::new(vec![0.2, 0.4, 0.4]).unwrap();
        assert_eq!(y.argmax(), 1);
    }
}
