//! Small multilayer perceptron with a linear output head, the offline
//! full-batch trainer that fits it, and the online adaptive output layer
//! used by the adaptive controller.
//!
//! The network maps a feature vector through hidden layers sharing one
//! activation function onto a single linear output. Training minimizes the
//! half mean squared error cost = (1/2P) * sum((prediction - target)^2)
//! over the whole dataset each epoch, with plain gradient descent, Adam, or
//! RMSprop updates. Inputs and targets are z-scored before training and the
//! statistics travel with the model, so callers always speak physical units.
//!
//! The adaptive head treats the last hidden layer of a frozen trained
//! network as a fixed feature basis sigma(x) and integrates the output
//! weight law dW/dt = gamma * s * sigma(x), where s is the sliding surface
//! value supplied by the controller. A norm projection bounds drift.

use crate::error::{Error, Result};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

/// Hidden-layer activation function. The output layer is always linear so
/// the network can produce signed targets of any magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Relu,
    Tanh,
}

impl Activation {
    /// All hidden activations, in the order sweep tables are laid out.
    pub const ALL: [Activation; 3] = [Activation::Sigmoid, Activation::Relu, Activation::Tanh];

    /// Value of the activation at pre-activation `x`.
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative with respect to the pre-activation. The rectifier
    /// subgradient at exactly zero is defined as 0.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = self.apply(x);
                s * (1.0 - s)
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - x.tanh().powi(2),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        })
    }
}

/// Layer widths of the stock network: two inputs, two hidden layers of
/// three units, one output.
pub const DEFAULT_LAYER_SIZES: [usize; 4] = [2, 3, 3, 1];

/// Fully connected feedforward network. `weights[l]` holds one row per
/// destination unit, `weights[l][i][j]` connecting source unit `j` of layer
/// `l` to destination unit `i`. Hidden layers apply `activation`; the final
/// layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-layer signals captured during a forward pass. `pre[l]` is the affine
/// input to layer `l`, `post[l]` its output after the activation (the last
/// layer is linear, so `post` and `pre` coincide there).
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

impl ForwardPass {
    /// Output vector of the network (the last layer's activations).
    pub fn output(&self) -> &[f64] {
        self.post
            .last()
            .expect("forward pass has at least one layer")
    }
}

/// Gradients of the cost with the same shape as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            weights: net
                .weights
                .iter()
                .map(|m| m.iter().map(|r| vec![0.0; r.len()]).collect())
                .collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, k: f64) {
        for m in &mut self.weights {
            for r in m {
                for x in r {
                    *x *= k;
                }
            }
        }
        for b in &mut self.biases {
            for x in b {
                *x *= k;
            }
        }
    }

    fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .all(|m| m.iter().all(|r| r.iter().all(|x| x.is_finite())))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }
}

impl Mlp {
    /// Builds a network with weights drawn uniformly from
    /// +-sqrt(6 / (fan_in + fan_out)) per layer and zero biases, using a
    /// counter-based generator so the same seed always yields the same
    /// parameters.
    pub fn new(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            weights.push(
                (0..fan_out)
                    .map(|_| (0..fan_in).map(|_| dist.sample(&mut rng)).collect())
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            weights,
            biases,
        })
    }

    /// Builds a network with every weight and bias zero.
    pub fn zeros(layer_sizes: &[usize], activation: Activation) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let weights = layer_sizes
            .windows(2)
            .map(|w| vec![vec![0.0; w[0]]; w[1]])
            .collect();
        let biases = layer_sizes.windows(2).map(|w| vec![0.0; w[1]]).collect();
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            weights,
            biases,
        })
    }

    /// Checks shape consistency and finiteness of every parameter.
    pub fn validate(&self) -> Result<()> {
        validate_sizes(&self.layer_sizes)?;
        let layers = self.layer_sizes.len() - 1;
        if self.weights.len() != layers {
            return Err(Error::DimensionMismatch {
                context: "weight layer count",
                expected: layers,
                got: self.weights.len(),
            });
        }
        if self.biases.len() != layers {
            return Err(Error::DimensionMismatch {
                context: "bias layer count",
                expected: layers,
                got: self.biases.len(),
            });
        }
        for l in 0..layers {
            let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            if self.weights[l].len() != fan_out {
                return Err(Error::DimensionMismatch {
                    context: "weight rows",
                    expected: fan_out,
                    got: self.weights[l].len(),
                });
            }
            for row in &self.weights[l] {
                if row.len() != fan_in {
                    return Err(Error::DimensionMismatch {
                        context: "weight columns",
                        expected: fan_in,
                        got: row.len(),
                    });
                }
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteValue("network weight"));
                }
            }
            if self.biases[l].len() != fan_out {
                return Err(Error::DimensionMismatch {
                    context: "bias length",
                    expected: fan_out,
                    got: self.biases[l].len(),
                });
            }
            if self.biases[l].iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteValue("network bias"));
            }
        }
        Ok(())
    }

    /// Runs the network and returns every layer's pre- and post-activation
    /// signals. Hidden layers apply the activation; the last layer is left
    /// linear.
    pub fn forward(&self, input: &[f64]) -> Result<ForwardPass> {
        if input.len() != self.layer_sizes[0] {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.layer_sizes[0],
                got: input.len(),
            });
        }
        let layers = self.weights.len();
        let mut pre = Vec::with_capacity(layers);
        let mut post = Vec::with_capacity(layers);
        let mut h: Vec<f64> = input.to_vec();
        for l in 0..layers {
            let s: Vec<f64> = self.weights[l]
                .iter()
                .zip(&self.biases[l])
                .map(|(row, b)| row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>() + b)
                .collect();
            h = if l + 1 < layers {
                s.iter().map(|&x| self.activation.apply(x)).collect()
            } else {
                s.clone()
            };
            pre.push(s);
            post.push(h.clone());
        }
        Ok(ForwardPass { pre, post })
    }

    /// Scalar output of a single-output network.
    pub fn output(&self, input: &[f64]) -> Result<f64> {
        let out = self.forward(input)?;
        if out.output().len() != 1 {
            return Err(Error::DimensionMismatch {
                context: "scalar output",
                expected: 1,
                got: out.output().len(),
            });
        }
        Ok(out.output()[0])
    }

    /// Activation vector of the last hidden layer, the feature basis
    /// sigma(x) the adaptive head weighs. Shares the forward code path.
    pub fn hidden_features(&self, input: &[f64]) -> Result<Vec<f64>> {
        let pass = self.forward(input)?;
        let layers = pass.post.len();
        if layers < 2 {
            return Err(Error::DimensionMismatch {
                context: "hidden layers",
                expected: 2,
                got: layers,
            });
        }
        Ok(pass.post[layers - 2].clone())
    }

    /// Exact gradients of the single-sample cost 0.5 * (output - target)^2
    /// with respect to every weight and bias.
    pub fn backward(&self, input: &[f64], target: f64) -> Result<Gradients> {
        let pass = self.forward(input)?;
        let layers = self.weights.len();
        if pass.output().len() != 1 {
            return Err(Error::DimensionMismatch {
                context: "scalar output",
                expected: 1,
                got: pass.output().len(),
            });
        }
        let mut grads = Gradients::zeros_like(self);
        // Linear output head, so the top delta is just the residual.
        let mut delta = vec![pass.output()[0] - target];
        for l in (0..layers).rev() {
            let below: &[f64] = if l == 0 { input } else { &pass.post[l - 1] };
            for (i, &d) in delta.iter().enumerate() {
                grads.biases[l][i] = d;
                for (j, &h) in below.iter().enumerate() {
                    grads.weights[l][i][j] = d * h;
                }
            }
            if l > 0 {
                delta = (0..below.len())
                    .map(|j| {
                        let back: f64 = delta
                            .iter()
                            .enumerate()
                            .map(|(i, d)| self.weights[l][i][j] * d)
                            .sum();
                        back * self.activation.derivative(pass.pre[l - 1][j])
                    })
                    .collect();
            }
        }
        if !grads.is_finite() {
            return Err(Error::NonFiniteValue("gradient"));
        }
        Ok(grads)
    }
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::DimensionMismatch {
            context: "layer count",
            expected: 2,
            got: layer_sizes.len(),
        });
    }
    if layer_sizes.contains(&0) {
        return Err(Error::invalid(
            "layer_sizes",
            "every layer needs at least one unit",
            0.0,
        ));
    }
    Ok(())
}

/// Half mean squared error: (1/2P) * sum((prediction - target)^2).
pub fn cost(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("cost over zero samples"));
    }
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            context: "cost inputs",
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).powi(2))
        .sum();
    Ok(sum / (2.0 * predictions.len() as f64))
}

/// Root mean squared error, the comparison metric reported next to the
/// training cost.
pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    Ok((2.0 * cost(predictions, targets)?).sqrt())
}

/// Pearson correlation coefficient between predictions and targets.
pub fn correlation(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("correlation over zero samples"));
    }
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            context: "correlation inputs",
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    let n = predictions.len() as f64;
    let mp = predictions.iter().sum::<f64>() / n;
    let mt = targets.iter().sum::<f64>() / n;
    let (mut spt, mut spp, mut stt) = (0.0, 0.0, 0.0);
    for (p, t) in predictions.iter().zip(targets) {
        spt += (p - mp) * (t - mt);
        spp += (p - mp).powi(2);
        stt += (t - mt).powi(2);
    }
    Ok(spt / (spp.sqrt() * stt.sqrt()))
}

/// Weight update rule for the full-batch trainer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam,
    Rmsprop,
}

impl Optimizer {
    /// All optimizers, in the order sweep tables are laid out.
    pub const ALL: [Optimizer; 3] = [Optimizer::Sgd, Optimizer::Adam, Optimizer::Rmsprop];
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
            Optimizer::Rmsprop => "rmsprop",
        })
    }
}

/// Offline training configuration. Every epoch performs exactly one
/// full-batch weight update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: Optimizer::Sgd,
            learning_rate: 0.1,
            epochs: 260,
            seed: 5,
        }
    }
}

impl TrainConfig {
    /// Rejects non-finite or negative rates and zero epochs. A zero rate is
    /// accepted; it makes training a no-op, which callers may rely on.
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::invalid(
                "learning_rate",
                "must be finite and nonnegative",
                self.learning_rate,
            ));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be at least 1", 0.0));
        }
        Ok(())
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const RMSPROP_DECAY: f64 = 0.9;
const RMSPROP_EPS: f64 = 1e-8;

/// First and second moment accumulators, one scalar pair per parameter.
struct OptimizerState {
    m: Gradients,
    v: Gradients,
}

impl OptimizerState {
    fn new(net: &Mlp) -> Self {
        OptimizerState {
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
        }
    }

    /// Applies one update step. `t` is the 1-based epoch index, used for
    /// Adam's bias correction.
    fn step(&mut self, net: &mut Mlp, grads: &Gradients, cfg: &TrainConfig, t: usize) {
        let lr = cfg.learning_rate;
        let opt = cfg.optimizer;
        let update = |theta: &mut f64, g: f64, m: &mut f64, v: &mut f64| match opt {
            Optimizer::Sgd => *theta -= lr * g,
            Optimizer::Adam => {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let mhat = *m / (1.0 - ADAM_BETA1.powi(t as i32));
                let vhat = *v / (1.0 - ADAM_BETA2.powi(t as i32));
                *theta -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
            }
            Optimizer::Rmsprop => {
                *v = RMSPROP_DECAY * *v + (1.0 - RMSPROP_DECAY) * g * g;
                *theta -= lr * g / (v.sqrt() + RMSPROP_EPS);
            }
        };
        for l in 0..net.weights.len() {
            for i in 0..net.weights[l].len() {
                for j in 0..net.weights[l][i].len() {
                    update(
                        &mut net.weights[l][i][j],
                        grads.weights[l][i][j],
                        &mut self.m.weights[l][i][j],
                        &mut self.v.weights[l][i][j],
                    );
                }
            }
            for i in 0..net.biases[l].len() {
                update(
                    &mut net.biases[l][i],
                    grads.biases[l][i],
                    &mut self.m.biases[l][i],
                    &mut self.v.biases[l][i],
                );
            }
        }
    }
}

/// Cost and RMSE over one epoch, recorded after the epoch's update. Index 0
/// holds the untrained network's values, so the vectors have epochs + 1
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub cost_history: Vec<f64>,
    pub rmse_history: Vec<f64>,
}

fn batch_metrics(net: &Mlp, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(f64, f64)> {
    let mut preds = Vec::with_capacity(inputs.len());
    for x in inputs {
        preds.push(net.output(x)?);
    }
    Ok((cost(&preds, targets)?, rmse(&preds, targets)?))
}

/// Trains the network in place with one full-batch update per epoch.
/// Inputs and targets are taken as given (the caller standardizes; see
/// [`train_model`] for the physical-units entry point). A non-finite cost
/// aborts with the offending epoch index.
pub fn train(
    net: &mut Mlp,
    inputs: &[Vec<f64>],
    targets: &[f64],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    net.validate()?;
    if inputs.is_empty() {
        return Err(Error::EmptyInput("training dataset"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            context: "training targets",
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    let scale = 1.0 / inputs.len() as f64;
    let mut state = OptimizerState::new(net);
    let mut report = TrainReport {
        cost_history: Vec::with_capacity(cfg.epochs + 1),
        rmse_history: Vec::with_capacity(cfg.epochs + 1),
    };
    let (c0, r0) = batch_metrics(net, inputs, targets)?;
    report.cost_history.push(c0);
    report.rmse_history.push(r0);
    for epoch in 1..=cfg.epochs {
        let mut grads = Gradients::zeros_like(net);
        for (x, &t) in inputs.iter().zip(targets) {
            match net.backward(x, t) {
                Ok(g) => grads.accumulate(&g),
                Err(Error::NonFiniteValue(_)) => return Err(Error::TrainingDiverged { epoch }),
                Err(e) => return Err(e),
            }
        }
        grads.scale(scale);
        state.step(net, &grads, cfg, epoch);
        let (c, r) = match batch_metrics(net, inputs, targets) {
            Ok(pair) => pair,
            Err(_) => return Err(Error::TrainingDiverged { epoch }),
        };
        if !c.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        report.cost_history.push(c);
        report.rmse_history.push(r);
    }
    Ok(report)
}

/// One sample of the regression dataset: tracking error, its rate, and the
/// lumped plant term the network learns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub e: f64,
    pub edot: f64,
    pub f: f64,
}

/// Regression dataset. Never empty, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<DataRow>,
}

impl Dataset {
    pub fn new(rows: Vec<DataRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("dataset"));
        }
        for r in &rows {
            if !(r.e.is_finite() && r.edot.is_finite() && r.f.is_finite()) {
                return Err(Error::NonFiniteValue("dataset row"));
            }
        }
        Ok(Dataset { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reads a `e,edot,f` headed CSV file.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for record in reader.deserialize() {
            rows.push(record?);
        }
        Dataset::new(rows)
    }

    /// Writes the dataset as a `e,edot,f` headed CSV file.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Z-scoring statistics fitted on a training set and stored with the model
/// so inference can accept physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl Standardization {
    /// Population mean and standard deviation per column. A zero spread
    /// falls back to a unit scale so constant columns stay usable.
    pub fn fit(data: &Dataset) -> Self {
        let n = data.len() as f64;
        let cols = |sel: fn(&DataRow) -> f64| {
            let mean = data.rows.iter().map(sel).sum::<f64>() / n;
            let var = data
                .rows
                .iter()
                .map(|r| (sel(r) - mean).powi(2))
                .sum::<f64>()
                / n;
            let std = var.sqrt();
            (mean, if std > 0.0 { std } else { 1.0 })
        };
        let (me, se) = cols(|r| r.e);
        let (md, sd) = cols(|r| r.edot);
        let (mf, sf) = cols(|r| r.f);
        Standardization {
            input_mean: vec![me, md],
            input_std: vec![se, sd],
            target_mean: mf,
            target_std: sf,
        }
    }

    pub fn standardize_input(&self, e: f64, edot: f64) -> Vec<f64> {
        vec![
            (e - self.input_mean[0]) / self.input_std[0],
            (edot - self.input_mean[1]) / self.input_std[1],
        ]
    }

    pub fn standardize_target(&self, f: f64) -> f64 {
        (f - self.target_mean) / self.target_std
    }

    pub fn destandardize_target(&self, z: f64) -> f64 {
        self.target_mean + self.target_std * z
    }
}

/// A trained network bundled with its z-scoring statistics and the seed it
/// was initialized from. Serializes to a flat JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    #[serde(flatten)]
    pub net: Mlp,
    #[serde(flatten)]
    pub stats: Standardization,
    pub seed: u64,
}

impl TrainedModel {
    /// Physical-units prediction of the lumped plant term.
    pub fn predict(&self, e: f64, edot: f64) -> Result<f64> {
        let x = self.stats.standardize_input(e, edot);
        Ok(self.stats.destandardize_target(self.net.output(&x)?))
    }

    /// Feature basis sigma(x) for physical inputs.
    pub fn hidden_features(&self, e: f64, edot: f64) -> Result<Vec<f64>> {
        let x = self.stats.standardize_input(e, edot);
        self.net.hidden_features(&x)
    }

    /// Builds the online head from the trained output layer. The trained
    /// weights are rescaled to physical units; the de-standardization
    /// remainder (target mean plus scaled output bias) becomes a fixed
    /// offset the adaptation law never touches.
    pub fn head(&self, gain_gamma: f64, approx_error_bound: f64) -> Result<AdaptiveHead> {
        let out_row = self
            .net
            .weights
            .last()
            .and_then(|m| m.first())
            .ok_or(Error::EmptyInput("output layer"))?;
        let out_bias = self
            .net
            .biases
            .last()
            .and_then(|b| b.first())
            .copied()
            .unwrap_or(0.0);
        let weights = out_row.iter().map(|w| self.stats.target_std * w).collect();
        let offset = self.stats.target_mean + self.stats.target_std * out_bias;
        AdaptiveHead::new(weights, offset, gain_gamma, approx_error_bound)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text.as_bytes())?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let model: TrainedModel = serde_json::from_str(&text)?;
        model.net.validate()?;
        Ok(model)
    }
}

/// Standardizes the dataset, initializes a stock-topology network from the
/// config seed, and trains it. The returned model speaks physical units.
pub fn train_model(
    data: &Dataset,
    activation: Activation,
    cfg: &TrainConfig,
) -> Result<(TrainedModel, TrainReport)> {
    let stats = Standardization::fit(data);
    let inputs: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| stats.standardize_input(r.e, r.edot))
        .collect();
    let targets: Vec<f64> = data
        .rows
        .iter()
        .map(|r| stats.standardize_target(r.f))
        .collect();
    let mut net = Mlp::new(&DEFAULT_LAYER_SIZES, activation, cfg.seed)?;
    let report = train(&mut net, &inputs, &targets, cfg)?;
    Ok((
        TrainedModel {
            net,
            stats,
            seed: cfg.seed,
        },
        report,
    ))
}

/// One cell of the optimizer-by-activation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub optimizer: Optimizer,
    pub activation: Activation,
    pub rmse: f64,
}

/// Results of the 3x3 sweep, row-major by optimizer then activation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl SweepTable {
    /// Cell with the smallest RMSE; first one wins ties.
    pub fn best(&self) -> &SweepCell {
        self.cells
            .iter()
            .min_by(|a, b| a.rmse.total_cmp(&b.rmse))
            .expect("sweep table has nine cells")
    }
}

/// Trains one model per optimizer-activation pair, every cell starting
/// from the same seed, and tabulates each cell's final standardized RMSE.
/// A diverging cell scores infinity instead of failing the sweep.
pub fn hyperparameter_sweep(
    data: &Dataset,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<SweepTable> {
    let mut cells = Vec::with_capacity(9);
    for opt in Optimizer::ALL {
        for act in Activation::ALL {
            let cfg = TrainConfig {
                optimizer: opt,
                learning_rate,
                epochs,
                seed,
            };
            let rmse = match train_model(data, act, &cfg) {
                Ok((_, report)) => *report.rmse_history.last().expect("nonempty history"),
                Err(Error::TrainingDiverged { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            cells.push(SweepCell {
                optimizer: opt,
                activation: act,
                rmse,
            });
        }
    }
    Ok(SweepTable {
        cells,
        epochs,
        learning_rate,
    })
}

/// Online output layer: physical-units weights over the frozen feature
/// basis, plus a fixed offset. The integrated law is dW/dt = gamma * s *
/// sigma(x), projected back onto a norm ball to bound drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveHead {
    pub weights: Vec<f64>,
    pub offset: f64,
    pub gain_gamma: f64,
    pub approx_error_bound: f64,
    pub max_norm: f64,
}

impl AdaptiveHead {
    /// The projection radius is ten times the initial weight norm, floored
    /// at ten so a zero-initialized head can still adapt.
    pub fn new(
        weights: Vec<f64>,
        offset: f64,
        gain_gamma: f64,
        approx_error_bound: f64,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("adaptive head weights"));
        }
        if weights.iter().any(|w| !w.is_finite()) || !offset.is_finite() {
            return Err(Error::NonFiniteValue("adaptive head weight"));
        }
        if !gain_gamma.is_finite() || gain_gamma < 0.0 {
            return Err(Error::invalid(
                "gain_gamma",
                "must be finite and nonnegative",
                gain_gamma,
            ));
        }
        if !approx_error_bound.is_finite() || approx_error_bound < 0.0 {
            return Err(Error::invalid(
                "approx_error_bound",
                "must be finite and nonnegative",
                approx_error_bound,
            ));
        }
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        Ok(AdaptiveHead {
            weights,
            offset,
            gain_gamma,
            approx_error_bound,
            max_norm: 10.0 * norm.max(1.0),
        })
    }

    /// Approximated plant term: W dot sigma(x) plus the fixed offset.
    pub fn f_hat(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                context: "adaptive head features",
                expected: self.weights.len(),
                got: features.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(features)
            .map(|(w, s)| w * s)
            .sum::<f64>()
            + self.offset)
    }

    /// Forward-Euler step of the adaptation law over `dt` seconds, then
    /// projection onto the norm ball.
    pub fn adapt(&mut self, s: f64, features: &[f64], dt: f64) -> Result<()> {
        if features.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                context: "adaptive head features",
                expected: self.weights.len(),
                got: features.len(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive and finite", dt));
        }
        let step = self.gain_gamma * s * dt;
        for (w, &sig) in self.weights.iter_mut().zip(features) {
            *w += step * sig;
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteValue("adaptive weight update"));
        }
        let norm = self.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm > self.max_norm {
            let k = self.max_norm / norm;
            for w in &mut self.weights {
                *w *= k;
            }
        }
        Ok(())
    }
}
