//! Desk-scale classifiers: a linear softmax model and a one-hidden-layer
//! tanh MLP, with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, RaclError, Result};
use crate::prob::{softmax_slice, ProbDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearSoftmax,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Hidden width; only read for [`ModelKind::Mlp`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_size: Option<usize>,
    pub input_dim: usize,
}

impl ModelSpec {
    pub fn linear(input_dim: usize) -> Self {
        Self { kind: ModelKind::LinearSoftmax, hidden_size: None, input_dim }
    }

    pub fn mlp(input_dim: usize, hidden_size: usize) -> Self {
        Self { kind: ModelKind::Mlp, hidden_size: Some(hidden_size), input_dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(RaclError::InvalidConfig("input_dim must be positive".into()));
        }
        if self.kind == ModelKind::Mlp && !matches!(self.hidden_size, Some(h) if h > 0) {
            return Err(RaclError::InvalidConfig("mlp needs a positive hidden_size".into()));
        }
        Ok(())
    }
}

/// Fully connected layer, weights stored row-major as `out_dim × in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }

    fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let mut draw = || rng.gen_range(-bound..=bound);
        let weights = (0..in_dim * out_dim).map(|_| draw()).collect();
        let bias = (0..out_dim).map(|_| draw()).collect();
        Self { in_dim, out_dim, weights, bias }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|o| {
                let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    /// Accumulates `∂L/∂W` and `∂L/∂b` into `grad` and returns `∂L/∂x`.
    fn backward(&self, x: &[f64], d_out: &[f64], grad: &mut Dense) -> Vec<f64> {
        let mut d_in = vec![0.0; self.in_dim];
        for (o, &d) in d_out.iter().enumerate().take(self.out_dim) {
            grad.bias[o] += d;
            let row = o * self.in_dim;
            for i in 0..self.in_dim {
                grad.weights[row + i] += d * x[i];
                d_in[i] += d * self.weights[row + i];
            }
        }
        d_in
    }

    pub fn weights_nested(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.in_dim).map(<[f64]>::to_vec).collect()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    num_classes: usize,
    layers: Vec<Dense>,
}

/// Parameter-shaped gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<Dense>,
}

impl Gradients {
    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|v| *v *= factor);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    hidden: Option<Vec<f64>>,
    pub logits: Vec<f64>,
}

impl Model {
    /// Seeded initialization, uniform in ±1/√fan_in for weights and biases.
    pub fn init<R: Rng>(spec: ModelSpec, num_classes: usize, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        if num_classes < 2 {
            return Err(RaclError::InvalidConfig("need at least 2 classes".into()));
        }
        let layers = match spec.kind {
            ModelKind::LinearSoftmax => vec![Dense::init(spec.input_dim, num_classes, rng)],
            ModelKind::Mlp => {
                let h = spec.hidden_size.unwrap_or_default();
                let first = Dense::init(spec.input_dim, h, rng);
                let second = Dense::init(h, num_classes, rng);
                vec![first, second]
            }
        };
        Ok(Self { spec, num_classes, layers })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            layers: self.layers.iter().map(|l| Dense::zeros(l.in_dim, l.out_dim)).collect(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> ForwardTrace {
        match self.spec.kind {
            ModelKind::LinearSoftmax => {
                ForwardTrace { hidden: None, logits: self.layers[0].forward(x) }
            }
            ModelKind::Mlp => {
                let hidden: Vec<f64> =
                    self.layers[0].forward(x).into_iter().map(f64::tanh).collect();
                let logits = self.layers[1].forward(&hidden);
                ForwardTrace { hidden: Some(hidden), logits }
            }
        }
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.spec.input_dim, x.len())?;
        Ok(self.forward(x).logits)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<ProbDist> {
        let z = self.logits(x)?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(RaclError::Divergence { epoch: 0, detail: "non-finite logits".into() });
        }
        Ok(ProbDist::from_raw(softmax_slice(&z)))
    }

    /// Accumulates the parameter gradient for one sample given `∂L/∂logits`.
    pub fn backward(&self, x: &[f64], trace: &ForwardTrace, d_logits: &[f64], grads: &mut Gradients) {
        match (&self.spec.kind, &trace.hidden) {
            (ModelKind::Mlp, Some(hidden)) => {
                let d_hidden = self.layers[1].backward(hidden, d_logits, &mut grads.layers[1]);
                let d_pre: Vec<f64> = d_hidden
                    .iter()
                    .zip(hidden)
                    .map(|(d, h)| d * (1.0 - h * h))
                    .collect();
                self.layers[0].backward(x, &d_pre, &mut grads.layers[0]);
            }
            _ => {
                self.layers[0].backward(x, d_logits, &mut grads.layers[0]);
            }
        }
    }

    /// Adds `l2 · θ` to every weight gradient; biases are not decayed.
    pub fn add_weight_decay(&self, grads: &mut Gradients, l2: f64) {
        if l2 == 0.0 {
            return;
        }
        for (p, g) in self.layers.iter().zip(&mut grads.layers) {
            for (gw, w) in g.weights.iter_mut().zip(&p.weights) {
                *gw += l2 * w;
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        check_dims(self.num_params(), values.len())?;
        let mut it = values.iter();
        for l in &mut self.layers {
            for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *v = *it.next().unwrap_or(&0.0);
            }
        }
        Ok(())
    }

    /// `v ← μ v + g`, `θ ← θ − lr v`.
    pub fn momentum_step(&mut self, grads: &Gradients, velocity: &mut Gradients, lr: f64, momentum: f64) {
        for ((p, g), v) in self.layers.iter_mut().zip(&grads.layers).zip(&mut velocity.layers) {
            let params = p.weights.iter_mut().chain(p.bias.iter_mut());
            let gs = g.weights.iter().chain(&g.bias);
            let vs = v.weights.iter_mut().chain(v.bias.iter_mut());
            for ((p, g), v) in params.zip(gs).zip(vs) {
                *v = momentum * *v + g;
                *p -= lr * *v;
            }
        }
    }

    pub fn to_file(&self, seed: u64, config_hash: String) -> ModelFile {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            spec: self.spec,
            num_classes: self.num_classes,
            weights: self
                .layers
                .iter()
                .map(|l| LayerWeights { weights: l.weights_nested(), bias: l.bias.clone() })
                .collect(),
            seed,
            config_hash,
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        file.spec.validate()?;
        let expected: Vec<(usize, usize)> = match file.spec.kind {
            ModelKind::LinearSoftmax => vec![(file.spec.input_dim, file.num_classes)],
            ModelKind::Mlp => {
                let h = file.spec.hidden_size.unwrap_or_default();
                vec![(file.spec.input_dim, h), (h, file.num_classes)]
            }
        };
        if file.weights.len() != expected.len() {
            return Err(RaclError::Parse("model layer count does not match spec".into()));
        }
        let mut layers = Vec::new();
        for (lw, (in_dim, out_dim)) in file.weights.iter().zip(expected) {
            if lw.weights.len() != out_dim
                || lw.weights.iter().any(|r| r.len() != in_dim)
                || lw.bias.len() != out_dim
            {
                return Err(RaclError::Parse("model weight shape does not match spec".into()));
            }
            layers.push(Dense {
                in_dim,
                out_dim,
                weights: lw.weights.concat(),
                bias: lw.bias.clone(),
            });
        }
        Ok(Self { spec: file.spec, num_classes: file.num_classes, layers })
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// On-disk model: spec, nested weight arrays, seed and config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub num_classes: usize,
    pub weights: Vec<LayerWeights>,
    pub seed: u64,
    pub config_hash: String,
}
