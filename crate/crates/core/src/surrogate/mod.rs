//! Monte-Carlo-dropout surrogate: one network per objective, trained on
//! scaled data with the squared-error loss or, when gradients are
//! available, the Sobolev loss; predictions average `S` stochastic passes.

mod checkpoint;
pub mod network;

use std::time::Instant;

use ndarray::{Array1, Array2, Axis};

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use network::{sobolev_loss, Adam, Batch, DropoutMask, LossParts, Mlp, MlpGrad, Real, HIDDEN};

/// Precision used for surrogate training and prediction.
pub type Net = Mlp<f32>;

use crate::domain::{Archive, BoxBounds, DecisionVector, ObjectiveVector};
use crate::error::{check_len, Error, Result};
use crate::rng::RngStream;

pub const DEFAULT_DROPOUT: f64 = 0.05;
pub const DEFAULT_MC_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiniBatch {
    /// Full batch up to 512 samples, otherwise batches of 256.
    Auto,
    Full,
    Size(usize),
}

impl MiniBatch {
    fn resolve(self, n: usize) -> usize {
        match self {
            MiniBatch::Auto if n <= 512 => n,
            MiniBatch::Auto => 256,
            MiniBatch::Full => n,
            MiniBatch::Size(s) => s.clamp(1, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Probability of dropping a hidden unit.
    pub dropout_rate: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub sobolev_weight: f64,
    pub minibatch: MiniBatch,
    pub hidden: usize,
    /// Start from the previous ensemble's weights instead of a fresh init.
    pub warm_start: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            dropout_rate: DEFAULT_DROPOUT,
            epochs: 2000,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            sobolev_weight: 1.0,
            minibatch: MiniBatch::Auto,
            hidden: HIDDEN,
            warm_start: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(0.0..1.0).contains(&self.dropout_rate) {
            errs.push(format!("dropout rate {} must lie in [0, 1)", self.dropout_rate));
        }
        if self.epochs < 1 {
            errs.push("epochs must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            errs.push(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.sobolev_weight < 0.0 || !self.sobolev_weight.is_finite() {
            errs.push(format!(
                "sobolev weight {} must be finite and >= 0",
                self.sobolev_weight
            ));
        }
        if self.hidden < 1 {
            errs.push("hidden width must be at least 1".into());
        }
        errs
    }
}

/// Affine map from the search box to `[-1, 1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputScaler {
    center: Vec<f64>,
    half_width: Vec<f64>,
}

impl InputScaler {
    pub fn from_bounds(b: &BoxBounds) -> Self {
        Self {
            center: (0..b.dim()).map(|i| 0.5 * (b.lower()[i] + b.upper()[i])).collect(),
            half_width: (0..b.dim()).map(|i| 0.5 * b.width(i)).collect(),
        }
    }

    pub fn half_width(&self) -> &[f64] {
        &self.half_width
    }

    pub fn scale(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.center.iter().zip(&self.half_width))
            .map(|(v, (c, h))| (v - c) / h)
            .collect()
    }

    pub fn scale_rows(&self, xs: &[DecisionVector]) -> Array2<f64> {
        let n = self.center.len();
        let mut out = Array2::zeros((xs.len(), n));
        for (mut row, x) in out.outer_iter_mut().zip(xs) {
            for i in 0..n {
                row[i] = (x[i] - self.center[i]) / self.half_width[i];
            }
        }
        out
    }
}

/// Standardizes one objective: zero mean, unit (population) std.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputScaler {
    pub mean: f64,
    pub std: f64,
}

impl OutputScaler {
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        Self {
            mean,
            std: if std > 1e-12 { std } else { 1.0 },
        }
    }

    pub fn scale(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn unscale(&self, y: f64) -> f64 {
        y * self.std + self.mean
    }
}

/// Predictive mean and standard deviation in objective units.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: ObjectiveVector,
    pub std: Vec<f64>,
}

/// Mean and `1/S` standard deviation of Monte-Carlo outputs.
pub fn mc_moments(samples: &[f64]) -> (f64, f64) {
    let s = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / s;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / s;
    (mean, var.sqrt())
}

/// Result of fitting one network.
#[derive(Debug, Clone)]
pub struct TrainedNetwork<F = f32> {
    pub net: Mlp<F>,
    /// Summed loss of every epoch, in scaled units.
    pub epoch_losses: Vec<f64>,
}

impl<F> TrainedNetwork<F> {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// Trains a network on already scaled data. `grad` holds target input
/// gradients, one row per sample. The data is converted to `F` once.
pub fn train_scaled<F: Real>(
    x: &Array2<f64>,
    y: &Array1<f64>,
    grad: Option<&Array2<f64>>,
    cfg: &TrainingConfig,
    init: Option<Mlp<F>>,
    rng: &mut RngStream,
) -> Result<TrainedNetwork<F>> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let (rows, n) = x.dim();
    check_len(rows, y.len())?;
    if let Some(g) = grad {
        if g.dim() != (rows, n) {
            return Err(Error::TrainingData(format!(
                "gradient targets have shape {:?}, expected ({rows}, {n})",
                g.dim()
            )));
        }
    }
    let mut net = match init {
        Some(w) => {
            check_len(n, w.n())?;
            w
        }
        None => Mlp::init(n, cfg.hidden, rng),
    };
    let hidden = net.hidden();
    let x = x.mapv(F::of);
    let y = y.mapv(F::of);
    let grad = grad.map(|g| g.mapv(F::of));
    let grad = grad.as_ref();
    let mut adam = Adam::new(
        net.param_count(),
        cfg.learning_rate,
        cfg.adam_beta1,
        cfg.adam_beta2,
        cfg.adam_eps,
    );
    let weight = if grad.is_some() { cfg.sobolev_weight } else { 0.0 };
    let batch_size = cfg.minibatch.resolve(rows);
    let mut order: Vec<usize> = (0..rows).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        if batch_size >= rows {
            let mask = DropoutMask::<F>::sample(hidden, cfg.dropout_rate, rng);
            let batch = Batch {
                x: x.view(),
                y: y.view(),
                grad: grad.map(|g| g.view()),
            };
            let (loss, g) = net.loss_and_grad(
                batch,
                mask.z1.broadcast((rows, hidden)).unwrap(),
                mask.z2.broadcast((rows, hidden)).unwrap(),
                weight,
            );
            epoch_loss += loss.total();
            adam.update(&mut net, &g);
        } else {
            rng.shuffle(&mut order);
            for chunk in order.chunks(batch_size) {
                let xb = x.select(Axis(0), chunk);
                let yb = y.select(Axis(0), chunk);
                let gb = grad.map(|g| g.select(Axis(0), chunk));
                let mask = DropoutMask::<F>::sample(hidden, cfg.dropout_rate, rng);
                let batch = Batch {
                    x: xb.view(),
                    y: yb.view(),
                    grad: gb.as_ref().map(|g| g.view()),
                };
                let (loss, g) = net.loss_and_grad(
                    batch,
                    mask.z1.broadcast((chunk.len(), hidden)).unwrap(),
                    mask.z2.broadcast((chunk.len(), hidden)).unwrap(),
                    weight,
                );
                epoch_loss += loss.total();
                adam.update(&mut net, &g);
            }
        }
        if !epoch_loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        losses.push(epoch_loss);
    }
    if !net.is_finite() {
        return Err(Error::TrainingDiverged {
            epoch: cfg.epochs.saturating_sub(1),
        });
    }
    Ok(TrainedNetwork {
        net,
        epoch_losses: losses,
    })
}

/// One objective's network with its output scaler.
#[derive(Debug, Clone)]
pub struct ObjectiveModel {
    pub net: Net,
    pub output: OutputScaler,
    pub epoch_losses: Vec<f64>,
}

/// Scaled training matrices for objective `j`. Gradients are carried over
/// by the chain rule: `dy'/dx'_i = dy/dx_i * half_width_i / std`.
pub fn training_data(
    data: &Archive,
    j: usize,
    input: &InputScaler,
) -> Result<(Array2<f64>, Array1<f64>, Option<Array2<f64>>, OutputScaler)> {
    if data.len() < 2 {
        return Err(Error::TrainingData(format!(
            "need at least 2 samples, got {}",
            data.len()
        )));
    }
    let entries = data.entries();
    let m = entries[0].f.len();
    if j >= m {
        return Err(Error::Dimension {
            expected: m,
            found: j + 1,
        });
    }
    let with_grad = entries.iter().filter(|e| e.grad.is_some()).count();
    if with_grad != 0 && with_grad != entries.len() {
        return Err(Error::TrainingData(format!(
            "{with_grad} of {} samples carry gradients; it must be all or none",
            entries.len()
        )));
    }
    let xs: Vec<DecisionVector> = entries.iter().map(|e| e.x.clone()).collect();
    let x = input.scale_rows(&xs);
    let raw: Vec<f64> = entries.iter().map(|e| e.f[j]).collect();
    let output = OutputScaler::fit(&raw);
    let y = Array1::from_iter(raw.iter().map(|v| output.scale(*v)));
    let grad = if with_grad > 0 {
        let n = x.ncols();
        let mut g = Array2::zeros((entries.len(), n));
        for (mut row, e) in g.outer_iter_mut().zip(entries) {
            let jac = e.grad.as_ref().unwrap();
            for i in 0..n {
                row[i] = jac[[j, i]] * input.half_width()[i] / output.std;
            }
        }
        Some(g)
    } else {
        None
    };
    Ok((x, y, grad, output))
}

/// Fits the network for objective `j` of `data`.
pub fn train(
    data: &Archive,
    j: usize,
    bounds: &BoxBounds,
    cfg: &TrainingConfig,
    init: Option<Net>,
    rng: &mut RngStream,
) -> Result<ObjectiveModel> {
    let input = InputScaler::from_bounds(bounds);
    let (x, y, grad, output) = training_data(data, j, &input)?;
    let trained = train_scaled::<f32>(&x, &y, grad.as_ref(), cfg, init, rng)?;
    Ok(ObjectiveModel {
        net: trained.net,
        output,
        epoch_losses: trained.epoch_losses,
    })
}

/// `m` independently trained networks answering mean/std queries.
#[derive(Debug, Clone)]
pub struct SurrogateEnsemble {
    bounds: BoxBounds,
    input: InputScaler,
    models: Vec<ObjectiveModel>,
    mc_samples: usize,
    dropout_rate: f64,
    train_seconds: f64,
}

impl SurrogateEnsemble {
    /// Trains one network per objective. `rngs[j]` drives objective `j`;
    /// with `threads > 1` the objectives train concurrently.
    pub fn fit(
        data: &Archive,
        bounds: &BoxBounds,
        cfg: &TrainingConfig,
        mc_samples: usize,
        rngs: &[RngStream],
        previous: Option<&SurrogateEnsemble>,
        threads: usize,
    ) -> Result<Self> {
        if mc_samples < 2 {
            return Err(Error::Config(vec![format!(
                "mc_samples must be at least 2, got {mc_samples}"
            )]));
        }
        let m = data.entries().first().map_or(0, |e| e.f.len());
        if rngs.len() != m {
            return Err(Error::Dimension {
                expected: m,
                found: rngs.len(),
            });
        }
        let start = Instant::now();
        let init_for = |j: usize| -> Option<Net> {
            if cfg.warm_start {
                previous.and_then(|p| p.models.get(j)).map(|mdl| mdl.net.clone())
            } else {
                None
            }
        };
        let fit_one = |j: usize| -> Result<ObjectiveModel> {
            let mut rng = rngs[j].clone();
            train(data, j, bounds, cfg, init_for(j), &mut rng)
        };
        let models: Vec<ObjectiveModel> = if threads > 1 && m > 1 {
            let results: Vec<Result<ObjectiveModel>> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..m)
                    .map(|j| {
                        let fit_one = &fit_one;
                        scope.spawn(move || fit_one(j))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training thread panicked"))
                    .collect()
            });
            results.into_iter().collect::<Result<_>>()?
        } else {
            (0..m).map(fit_one).collect::<Result<_>>()?
        };
        Ok(Self {
            bounds: bounds.clone(),
            input: InputScaler::from_bounds(bounds),
            models,
            mc_samples,
            dropout_rate: cfg.dropout_rate,
            train_seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn from_parts(bounds: &BoxBounds, models: Vec<ObjectiveModel>, mc_samples: usize, dropout_rate: f64) -> Self {
        Self {
            bounds: bounds.clone(),
            input: InputScaler::from_bounds(bounds),
            models,
            mc_samples,
            dropout_rate,
            train_seconds: 0.0,
        }
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn models(&self) -> &[ObjectiveModel] {
        &self.models
    }

    pub fn m(&self) -> usize {
        self.models.len()
    }

    pub fn mc_samples(&self) -> usize {
        self.mc_samples
    }

    pub fn train_seconds(&self) -> f64 {
        self.train_seconds
    }

    pub fn final_losses(&self) -> Vec<f64> {
        self.models
            .iter()
            .map(|mdl| mdl.epoch_losses.last().copied().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn predict(&self, x: &[f64], rng: &mut RngStream) -> Prediction {
        self.predict_batch(&[x.to_vec()], rng)
            .pop()
            .expect("one row in, one row out")
    }

    /// For every objective and row: `S` passes with independent masks, then
    /// mean and `1/S` std mapped back to objective units.
    pub fn predict_batch(&self, xs: &[DecisionVector], rng: &mut RngStream) -> Vec<Prediction> {
        let scaled = self.input.scale_rows(xs).mapv(|v| v as f32);
        let mut preds: Vec<Prediction> = (0..xs.len())
            .map(|_| Prediction {
                mean: Vec::with_capacity(self.m()),
                std: Vec::with_capacity(self.m()),
            })
            .collect();
        for model in &self.models {
            let outs = model
                .net
                .mc_outputs(scaled.view(), self.mc_samples, self.dropout_rate, rng);
            for (pred, row) in preds.iter_mut().zip(outs.outer_iter()) {
                let samples: Vec<f64> = row.iter().map(|v| *v as f64).collect();
                let (mean, std) = mc_moments(&samples);
                pred.mean.push(model.output.unscale(mean));
                pred.std.push(std * model.output.std);
            }
        }
        preds
    }
}
