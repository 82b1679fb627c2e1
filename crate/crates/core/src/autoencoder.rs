//! Dense undercomplete autoencoder with hand-written backpropagation.
//!
//! The network has five node layers, `n -> h -> m_b -> h -> n`, realised by
//! four dense layers with tanh activations. Training minimises the mean
//! SmoothL1 reconstruction loss with SGD or RMSProp and, at the end of each of
//! the trailing `nu` fraction of epochs, records the bottleneck activations of
//! the whole training set. Those blocks, stacked, form the augmented latent
//! training set.

use std::collections::VecDeque;
use std::fs::File;
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::NumericDataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// `y = act(W x + b)` with `W` stored as `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>, activation: Activation) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::Shape(format!(
                "weights have {} rows but bias has {} entries",
                weights.nrows(),
                bias.len()
            )));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Shape("layer parameters must be finite".into()));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn input_width(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.nrows()
    }

    fn forward(&self, input: ArrayView2<f64>) -> Array2<f64> {
        let mut z = input.dot(&self.weights.t());
        z += &self.bias;
        let act = self.activation;
        z.mapv_inplace(|v| act.apply(v));
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeModel {
    pub layers: Vec<DenseLayer>,
    /// Index of the layer whose output is the bottleneck.
    pub bottleneck_index: usize,
}

impl AeModel {
    pub fn new(layers: Vec<DenseLayer>, bottleneck_index: usize) -> Result<Self> {
        if layers.is_empty() || bottleneck_index >= layers.len() {
            return Err(Error::Shape(format!(
                "bottleneck index {bottleneck_index} outside {} layers",
                layers.len()
            )));
        }
        for pair in layers.windows(2) {
            if pair[0].output_width() != pair[1].input_width() {
                return Err(Error::Shape(format!(
                    "layer output width {} does not feed input width {}",
                    pair[0].output_width(),
                    pair[1].input_width()
                )));
            }
        }
        Ok(Self {
            layers,
            bottleneck_index,
        })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn output_width(&self) -> usize {
        self.layers
            .last()
            .map(DenseLayer::output_width)
            .unwrap_or(0)
    }

    pub fn bottleneck_width(&self) -> usize {
        self.layers[self.bottleneck_index].output_width()
    }

    /// Node-layer widths, input first.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_width())
            .chain(self.layers.iter().map(DenseLayer::output_width))
            .collect()
    }

    pub fn n_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.input_width() {
            return Err(Error::Shape(format!(
                "input has {width} features, model expects {}",
                self.input_width()
            )));
        }
        Ok(())
    }

    /// Activations of every node layer, input included.
    fn trace(&self, batch: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(batch.to_owned());
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("non-empty").view());
            acts.push(next);
        }
        acts
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelDoc>(s)?.try_into()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// On-disk model layout: widths, then per layer a row-major weight array.
#[derive(Serialize, Deserialize)]
struct ModelDoc {
    widths: Vec<usize>,
    bottleneck_index: usize,
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    activation: Activation,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl From<&AeModel> for ModelDoc {
    fn from(m: &AeModel) -> Self {
        Self {
            widths: m.widths(),
            bottleneck_index: m.bottleneck_index,
            layers: m
                .layers
                .iter()
                .map(|l| LayerDoc {
                    activation: l.activation,
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelDoc> for AeModel {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        if doc.widths.len() != doc.layers.len() + 1 {
            return Err(Error::Schema(format!(
                "{} widths for {} layers",
                doc.widths.len(),
                doc.layers.len()
            )));
        }
        let layers = doc
            .layers
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let w = Array2::from_shape_vec((doc.widths[i + 1], doc.widths[i]), l.weights)
                    .map_err(|e| Error::Schema(format!("layer {i} weights: {e}")))?;
                DenseLayer::new(w, Array1::from(l.bias), l.activation)
            })
            .collect::<Result<Vec<_>>>()?;
        AeModel::new(layers, doc.bottleneck_index)
    }
}

/// How `1 + sqrt(n)` is turned into an integer bottleneck width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BottleneckRounding {
    #[default]
    Nearest,
    Floor,
    Ceil,
}

/// Bottleneck width for `n_features` inputs, kept strictly below the input
/// width so the network stays undercomplete.
pub fn bottleneck_width(n_features: usize, rounding: BottleneckRounding) -> usize {
    let raw = 1.0 + (n_features as f64).sqrt();
    let w = match rounding {
        BottleneckRounding::Nearest => raw.round(),
        BottleneckRounding::Floor => raw.floor(),
        BottleneckRounding::Ceil => raw.ceil(),
    } as usize;
    w.clamp(1, n_features.saturating_sub(1).max(1))
}

pub fn build_ae(n_features: usize, seed: u64) -> Result<AeModel> {
    build_ae_with(n_features, BottleneckRounding::Nearest, seed)
}

/// Builds the `n -> h -> m_b -> h -> n` network with `h = (n + m_b) / 2`
/// (integer division), tanh everywhere and weights drawn uniformly from
/// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`. Biases start at zero.
pub fn build_ae_with(
    n_features: usize,
    rounding: BottleneckRounding,
    seed: u64,
) -> Result<AeModel> {
    if n_features < 2 {
        return Err(Error::Config(format!(
            "autoencoder needs at least 2 features, got {n_features}"
        )));
    }
    let m_b = bottleneck_width(n_features, rounding);
    let h = (n_features + m_b) / 2;
    let widths = [n_features, h, m_b, h, n_features];

    let mut r = rng::seeded(seed);
    let layers = widths
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let weights =
                Array2::from_shape_simple_fn((fan_out, fan_in), || r.random_range(-bound..=bound));
            DenseLayer::new(weights, Array1::zeros(fan_out), Activation::Tanh)
        })
        .collect::<Result<Vec<_>>>()?;
    AeModel::new(layers, 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub latent: Array2<f64>,
    pub recon: Array2<f64>,
}

pub fn forward(model: &AeModel, batch: ArrayView2<f64>) -> Result<ForwardOutput> {
    model.check_width(batch.ncols())?;
    let mut acts = model.trace(batch);
    let recon = acts.pop().expect("at least one layer");
    let latent = if model.bottleneck_index + 1 == model.layers.len() {
        recon.clone()
    } else {
        acts.swap_remove(model.bottleneck_index + 1)
    };
    Ok(ForwardOutput { latent, recon })
}

fn smooth_l1_elem(d: f64) -> f64 {
    if d.abs() < 1.0 {
        0.5 * d * d
    } else {
        d.abs() - 0.5
    }
}

fn smooth_l1_grad_elem(d: f64) -> f64 {
    if d.abs() < 1.0 {
        d
    } else {
        d.signum()
    }
}

/// Mean SmoothL1 over all elements: `0.5 d^2` when `|d| < 1`, else `|d| - 0.5`.
pub fn smooth_l1(recon: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<f64> {
    if recon.dim() != target.dim() {
        return Err(Error::Shape(format!(
            "reconstruction {:?} vs target {:?}",
            recon.dim(),
            target.dim()
        )));
    }
    if recon.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = recon
        .iter()
        .zip(target.iter())
        .map(|(r, t)| smooth_l1_elem(r - t))
        .sum();
    Ok(total / recon.len() as f64)
}

/// Parameter-shaped buffers, used for gradients and optimizer state alike.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub bias: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &AeModel) -> Self {
        Self {
            weights: model
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect(),
            bias: model
                .layers
                .iter()
                .map(|l| Array1::zeros(l.bias.len()))
                .collect(),
        }
    }

    fn matches(&self, model: &AeModel) -> bool {
        self.weights.len() == model.layers.len()
            && self.bias.len() == model.layers.len()
            && model.layers.iter().enumerate().all(|(i, l)| {
                self.weights[i].dim() == l.weights.dim() && self.bias[i].len() == l.bias.len()
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.bias.iter().flat_map(|b| b.iter()))
    }
}

fn ensure_matches(g: &Gradients, model: &AeModel, what: &str) -> Result<()> {
    if !g.matches(model) {
        return Err(Error::Shape(format!(
            "{what} shapes do not match the model"
        )));
    }
    Ok(())
}

/// Analytic gradients of the mean SmoothL1 loss, along with the loss itself.
pub fn backward(
    model: &AeModel,
    batch: ArrayView2<f64>,
    target: ArrayView2<f64>,
) -> Result<(Gradients, f64)> {
    model.check_width(batch.ncols())?;
    if target.dim() != (batch.nrows(), model.output_width()) {
        return Err(Error::Shape(format!(
            "target {:?} does not match output ({}, {})",
            target.dim(),
            batch.nrows(),
            model.output_width()
        )));
    }
    let acts = model.trace(batch);
    let out = acts.last().expect("non-empty");
    let loss = smooth_l1(out.view(), target)?;
    let scale = 1.0 / out.len().max(1) as f64;

    // dL/dA at the output
    let mut upstream = Array2::from_shape_fn(out.dim(), |(i, j)| {
        smooth_l1_grad_elem(out[[i, j]] - target[[i, j]]) * scale
    });

    let mut grads = Gradients::zeros_like(model);
    for (l, layer) in model.layers.iter().enumerate().rev() {
        let a_out = &acts[l + 1];
        let act = layer.activation;
        let delta = ndarray::Zip::from(&upstream)
            .and(a_out)
            .map_collect(|&g, &a| g * act.derivative_from_output(a));
        grads.weights[l] = delta.t().dot(&acts[l]);
        grads.bias[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            upstream = delta.dot(&layer.weights);
        }
    }
    Ok((grads, loss))
}

/// `p <- p - lr * g`.
pub fn sgd_step(model: &mut AeModel, grads: &Gradients, lr: f64) -> Result<()> {
    ensure_matches(grads, model, "gradient")?;
    for (l, layer) in model.layers.iter_mut().enumerate() {
        layer.weights.scaled_add(-lr, &grads.weights[l]);
        layer.bias.scaled_add(-lr, &grads.bias[l]);
    }
    Ok(())
}

/// Running mean of squared gradients per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RmspropState {
    pub mean_square: Gradients,
}

impl RmspropState {
    pub fn new(model: &AeModel) -> Self {
        Self {
            mean_square: Gradients::zeros_like(model),
        }
    }
}

/// `v <- decay v + (1 - decay) g^2`, `p <- p - lr g / (sqrt(v) + eps)`.
pub fn rmsprop_step(
    model: &mut AeModel,
    grads: &Gradients,
    state: &mut RmspropState,
    lr: f64,
    decay: f64,
    eps: f64,
) -> Result<()> {
    ensure_matches(grads, model, "gradient")?;
    ensure_matches(&state.mean_square, model, "RMSProp state")?;
    let update = |p: &mut f64, g: f64, v: &mut f64| {
        *v = decay * *v + (1.0 - decay) * g * g;
        *p -= lr * g / (v.sqrt() + eps);
    };
    for (l, layer) in model.layers.iter_mut().enumerate() {
        ndarray::Zip::from(&mut layer.weights)
            .and(&grads.weights[l])
            .and(&mut state.mean_square.weights[l])
            .for_each(|p, &g, v| update(p, g, v));
        ndarray::Zip::from(&mut layer.bias)
            .and(&grads.bias[l])
            .and(&mut state.mean_square.bias[l])
            .for_each(|p, &g, v| update(p, g, v));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Sgd,
    Rmsprop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub n_epochs: usize,
    /// Fraction of trailing epochs whose latents are harvested.
    pub nu: f64,
    /// `None` picks 64 for more than 2000 training rows, 16 otherwise.
    pub batch_size: Option<usize>,
    /// `None` picks 0.01 for SGD and 0.001 for RMSProp.
    pub learning_rate: Option<f64>,
    pub optimizer: Optimizer,
    pub rmsprop_decay: f64,
    pub rmsprop_eps: f64,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub early_stop_patience: usize,
    pub early_stop_min_delta: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_epochs: 100,
            nu: 0.25,
            batch_size: None,
            learning_rate: None,
            optimizer: Optimizer::Sgd,
            rmsprop_decay: 0.9,
            rmsprop_eps: 1e-8,
            early_stop_patience: 20,
            early_stop_min_delta: 1e-5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_epochs == 0 {
            return Err(Error::Config("n_epochs must be at least 1".into()));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::Config(format!("nu {} outside (0, 1]", self.nu)));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.effective_learning_rate().is_nan() || self.effective_learning_rate() <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.optimizer == Optimizer::Rmsprop
            && !(self.rmsprop_decay > 0.0 && self.rmsprop_decay < 1.0 && self.rmsprop_eps > 0.0)
        {
            return Err(Error::Config(
                "RMSProp needs decay in (0, 1) and eps > 0".into(),
            ));
        }
        if self.early_stop_min_delta.is_nan() || self.early_stop_min_delta < 0.0 {
            return Err(Error::Config(
                "early-stop min_delta must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn effective_learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(match self.optimizer {
            Optimizer::Sgd => 0.01,
            Optimizer::Rmsprop => 0.001,
        })
    }

    pub fn effective_batch_size(&self, n_rows: usize) -> usize {
        self.batch_size
            .unwrap_or(if n_rows > 2000 { 64 } else { 16 })
    }
}

/// First harvested epoch (0-based) when `executed` epochs ran: the smallest
/// `i` with `i >= (1 - nu) * executed`, but never past the last epoch.
pub fn harvest_start(executed: usize, nu: f64) -> usize {
    // tolerance absorbs rounding in (1 - nu) * executed
    let start = ((1.0 - nu) * executed as f64 - 1e-9).ceil().max(0.0) as usize;
    start.min(executed.saturating_sub(1))
}

/// Bottleneck latents of the training set stacked over the harvested epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedLatentSet {
    pub matrix: Array2<f64>,
    pub source_epochs: Vec<usize>,
    pub rows_per_epoch: usize,
}

impl AugmentedLatentSet {
    /// The block contributed by the last harvested epoch.
    pub fn last_block(&self) -> ndarray::ArrayView2<'_, f64> {
        let n = self.matrix.nrows();
        self.matrix.slice(s![n - self.rows_per_epoch.., ..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Absent when no validation rows were supplied.
    pub val_loss: Option<f64>,
}

pub fn write_loss_history_csv(path: impl AsRef<Path>, history: &[LossRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["epoch", "train_loss", "val_loss"])?;
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            r.val_loss.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AeModel,
    pub harvest: AugmentedLatentSet,
    pub history: Vec<LossRecord>,
    pub stopped_early: bool,
}

/// Trains `model` on `train` and harvests bottleneck latents.
///
/// Each epoch shuffles the rows, takes one optimizer step per mini-batch and
/// then runs a full forward pass over `train`, which yields both the epoch's
/// training loss and its latent block. Blocks are kept for epochs in the
/// trailing `nu` window. When early stopping ends training after `E` epochs
/// the window is the trailing `nu` fraction of those `E` epochs (at least the
/// final one).
pub fn train_with_harvest(
    mut model: AeModel,
    train: &NumericDataset,
    val: &NumericDataset,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::InsufficientData("training set is empty".into()));
    }
    model.check_width(train.n_features())?;
    model.check_width(val.n_features())?;

    let batch_size = cfg.effective_batch_size(n);
    let lr = cfg.effective_learning_rate();
    let mut r = rng::seeded(cfg.seed);
    let mut rms = RmspropState::new(&model);
    let mut order: Vec<usize> = (0..n).collect();

    let early_stopping = cfg.early_stop_patience > 0 && val.n_rows() > 0;
    let mut best_val = f64::INFINITY;
    let mut stale = 0;
    let mut stopped_early = false;

    let mut blocks: VecDeque<(usize, Array2<f64>)> = VecDeque::new();
    let mut history = Vec::with_capacity(cfg.n_epochs);

    for epoch in 0..cfg.n_epochs {
        order.shuffle(&mut r);
        for chunk in order.chunks(batch_size) {
            let batch = train.matrix.select(Axis(0), chunk);
            let (grads, loss) = backward(&model, batch.view(), batch.view())?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    what: "batch loss",
                });
            }
            match cfg.optimizer {
                Optimizer::Sgd => sgd_step(&mut model, &grads, lr)?,
                Optimizer::Rmsprop => rmsprop_step(
                    &mut model,
                    &grads,
                    &mut rms,
                    lr,
                    cfg.rmsprop_decay,
                    cfg.rmsprop_eps,
                )?,
            }
        }
        let params_finite = model
            .layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()));
        if !params_finite {
            return Err(Error::Diverged {
                epoch,
                what: "parameters",
            });
        }

        let full = forward(&model, train.matrix.view())?;
        let train_loss = smooth_l1(full.recon.view(), train.matrix.view())?;
        if !train_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                what: "training loss",
            });
        }
        let val_loss = if val.n_rows() > 0 {
            let out = forward(&model, val.matrix.view())?;
            let v = smooth_l1(out.recon.view(), val.matrix.view())?;
            if !v.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    what: "validation loss",
                });
            }
            Some(v)
        } else {
            None
        };
        history.push(LossRecord {
            epoch,
            train_loss,
            val_loss,
        });

        // The window start only grows with the executed epoch count, so
        // blocks before it are never needed again.
        let start = harvest_start(epoch + 1, cfg.nu);
        while blocks.front().is_some_and(|(e, _)| *e < start) {
            blocks.pop_front();
        }
        let final_start = harvest_start(cfg.n_epochs, cfg.nu);
        if epoch >= start && (early_stopping || epoch >= final_start) {
            blocks.push_back((epoch, full.latent));
        }

        if early_stopping {
            let v = val_loss.expect("validation rows present");
            if v < best_val - cfg.early_stop_min_delta {
                best_val = v;
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.early_stop_patience {
                    stopped_early = epoch + 1 < cfg.n_epochs;
                    break;
                }
            }
        }
    }

    let m_b = model.bottleneck_width();
    let source_epochs: Vec<usize> = blocks.iter().map(|(e, _)| *e).collect();
    let mut matrix = Array2::zeros((n * blocks.len(), m_b));
    for (k, (_, block)) in blocks.iter().enumerate() {
        matrix.slice_mut(s![k * n..(k + 1) * n, ..]).assign(block);
    }
    Ok(TrainOutcome {
        model,
        harvest: AugmentedLatentSet {
            matrix,
            source_epochs,
            rows_per_epoch: n,
        },
        history,
        stopped_early,
    })
}

/// Bottleneck activations for every row of `ds`.
pub fn encode(model: &AeModel, ds: &NumericDataset) -> Result<Array2<f64>> {
    encode_matrix(model, ds.matrix.view())
}

pub fn encode_matrix(model: &AeModel, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(forward(model, x)?.latent)
}
