//! Channel-independent linear direct multi-horizon forecaster.
//!
//! Each variable `j` has its own `O × I` matrix `W_j` and bias `b_j` mapping
//! its input window to its whole output window in one step. Training is plain
//! mini-batch gradient descent from zero on the batch mean of the weighted
//! loss, so the only thing that differs between weighting schemes is the
//! per-window weight vector.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{error_weight, weighted_loss_unchecked, ErrorReweightKind, LossKind};
use crate::series::{SeriesView, WindowPair, WindowSet};
use crate::synth::rng;
use crate::weighting::WeightTable;

const MODEL_MAGIC: &str = "reld-linear-forecaster";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearForecaster {
    input_len: usize,
    output_len: usize,
    dims: usize,
    /// `dims × O × I`, row-major.
    weights: Vec<f64>,
    /// `dims × O`.
    bias: Vec<f64>,
}

impl LinearForecaster {
    /// All-zero parameters.
    pub fn zeros(input_len: usize, output_len: usize, dims: usize) -> Self {
        LinearForecaster {
            input_len,
            output_len,
            dims,
            weights: vec![0.0; dims * output_len * input_len],
            bias: vec![0.0; dims * output_len],
        }
    }

    pub fn from_parameters(
        input_len: usize,
        output_len: usize,
        dims: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != dims * output_len * input_len || bias.len() != dims * output_len {
            return Err(Error::ShapeMismatch(format!(
                "expected {} weights and {} biases, got {} and {}",
                dims * output_len * input_len,
                dims * output_len,
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(LinearForecaster {
            input_len,
            output_len,
            dims,
            weights,
            bias,
        })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn num_parameters(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// `W_j[o, k]`.
    pub fn weight(&self, dim: usize, o: usize, k: usize) -> f64 {
        self.weights[(dim * self.output_len + o) * self.input_len + k]
    }

    pub fn set_weight(&mut self, dim: usize, o: usize, k: usize, value: f64) {
        self.weights[(dim * self.output_len + o) * self.input_len + k] = value;
    }

    pub fn set_bias(&mut self, dim: usize, o: usize, value: f64) {
        self.bias[dim * self.output_len + o] = value;
    }

    fn check_input(&self, x: SeriesView<'_>) -> Result<()> {
        if x.rows() != self.input_len || x.dims() != self.dims {
            return Err(Error::ShapeMismatch(format!(
                "model expects {}x{} input, got {}x{}",
                self.input_len,
                self.dims,
                x.rows(),
                x.dims()
            )));
        }
        Ok(())
    }

    /// Predicts the `O × m` output (row-major).
    pub fn predict(&self, x: SeriesView<'_>) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.output_len * self.dims];
        self.predict_into(x.as_slice(), &mut out);
        Ok(out)
    }

    fn predict_into(&self, x: &[f64], out: &mut [f64]) {
        let (ni, no, m) = (self.input_len, self.output_len, self.dims);
        for j in 0..m {
            for o in 0..no {
                let row = &self.weights[(j * no + o) * ni..(j * no + o + 1) * ni];
                let mut acc = self.bias[j * no + o];
                for (k, w) in row.iter().enumerate() {
                    acc += w * x[k * m + j];
                }
                out[o * m + j] = acc;
            }
        }
    }

    /// Loss of one window and its gradient, accumulated into `grad`
    /// (weights first, then biases) after scaling by `scale`.
    #[allow(clippy::too_many_arguments)]
    fn loss_and_grad(
        &self,
        x: &[f64],
        y: &[f64],
        w: &[f64],
        kind: LossKind,
        scale: f64,
        pred: &mut [f64],
        grad: &mut [f64],
    ) -> f64 {
        let (ni, no, m) = (self.input_len, self.output_len, self.dims);
        self.predict_into(x, pred);
        let loss = weighted_loss_unchecked(y, pred, w, kind);
        let norm = scale / (m * no) as f64;
        let (gw, gb) = grad.split_at_mut(self.weights.len());
        for j in 0..m {
            for o in 0..no {
                let r = pred[o * m + j] - y[o * m + j];
                let g = norm * w[j] * kind.derivative(r);
                if g == 0.0 {
                    continue;
                }
                gb[j * no + o] += g;
                let row = &mut gw[(j * no + o) * ni..(j * no + o + 1) * ni];
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot += g * x[k * m + j];
                }
            }
        }
        loss
    }

    fn apply_step(&mut self, grad: &[f64], step: f64) {
        let (gw, gb) = grad.split_at(self.weights.len());
        for (p, g) in self.weights.iter_mut().zip(gw) {
            *p -= step * g;
        }
        for (p, g) in self.bias.iter_mut().zip(gb) {
            *p -= step * g;
        }
    }

    fn parameter_mut(&mut self, idx: usize) -> &mut f64 {
        let nw = self.weights.len();
        if idx < nw {
            &mut self.weights[idx]
        } else {
            &mut self.bias[idx - nw]
        }
    }

    /// Writes a versioned text file: magic and version, then `I O m`, then
    /// row-major weights and biases, one per line.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::new();
        let _ = writeln!(text, "{MODEL_MAGIC} v{MODEL_VERSION}");
        let _ = writeln!(text, "{} {} {}", self.input_len, self.output_len, self.dims);
        for v in self.weights.iter().chain(&self.bias) {
            let _ = writeln!(text, "{v:?}");
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != format!("{MODEL_MAGIC} v{MODEL_VERSION}") {
            return Err(Error::ModelFormat(format!("unrecognized header {header:?}")));
        }
        let dims: Vec<usize> = lines
            .next()
            .unwrap_or_default()
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::ModelFormat(format!("bad dimension {s:?}"))))
            .collect::<Result<_>>()?;
        let [ni, no, m] = dims[..] else {
            return Err(Error::ModelFormat("expected `input_len output_len dims`".into()));
        };
        let values: Vec<f64> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse().map_err(|_| Error::ModelFormat(format!("bad value {l:?}"))))
            .collect::<Result<_>>()?;
        let nw = m * no * ni;
        if values.len() != nw + m * no {
            return Err(Error::ModelFormat(format!(
                "expected {} parameters, found {}",
                nw + m * no,
                values.len()
            )));
        }
        let bias = values[nw..].to_vec();
        let mut weights = values;
        weights.truncate(nw);
        Self::from_parameters(ni, no, m, weights, bias)
    }
}

/// How per-window loss weights are obtained during training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainScheme {
    Uniform,
    Reld,
    InvLd,
    /// Factor recomputed from the window's current mean absolute error and
    /// held constant during the gradient step.
    ErrorReweight(ErrorReweightKind),
}

impl TrainScheme {
    pub fn name(&self) -> &'static str {
        match self {
            TrainScheme::Uniform => "uniform",
            TrainScheme::Reld => "reld",
            TrainScheme::InvLd => "invld",
            TrainScheme::ErrorReweight(kind) => kind.name(),
        }
    }

    fn needs_table(&self) -> bool {
        matches!(self, TrainScheme::Reld | TrainScheme::InvLd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub scheme: TrainScheme,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 32,
            seed: 0,
            loss: LossKind::L2,
            scheme: TrainScheme::Uniform,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("epochs and batch size must be >= 1".into()));
        }
        self.loss.validate()?;
        if let TrainScheme::ErrorReweight(kind) = self.scheme {
            kind.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearForecaster,
    /// Mean training loss seen during each epoch.
    pub loss_trace: Vec<f64>,
}

/// Trains a zero-initialized forecaster on `windows`.
///
/// `weights` must be aligned with `windows` by `t` for the ReLD and invLD
/// schemes. The uniform and error-based schemes ignore it.
pub fn train(
    windows: &WindowSet<'_>,
    weights: Option<&WeightTable>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let spec = windows.spec();
    let m = windows.dims();
    let model = LinearForecaster::zeros(spec.input_len, spec.output_len, m);
    train_from(model, windows, weights, cfg)
}

/// Continues training from an existing model.
pub fn train_from(
    mut model: LinearForecaster,
    windows: &WindowSet<'_>,
    weights: Option<&WeightTable>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let spec = windows.spec();
    let m = windows.dims();
    if model.input_len != spec.input_len || model.output_len != spec.output_len || model.dims != m {
        return Err(Error::ShapeMismatch("model shape does not match the windows".into()));
    }
    let n = windows.len();
    let table = if cfg.scheme.needs_table() {
        let table = weights.ok_or_else(|| {
            Error::Misaligned(format!("scheme {} requires a weight table", cfg.scheme.name()))
        })?;
        check_alignment(windows, table, m)?;
        Some(table)
    } else {
        None
    };

    let mut rng = rng(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; model.num_parameters()];
    let mut pred = vec![0.0; spec.output_len * m];
    let mut w = vec![1.0; m];
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut batch_loss = 0.0;
            for &i in batch {
                let pair = windows.get(i);
                let (x, y) = (pair.x.as_slice(), pair.y.as_slice());
                if let Some(table) = table {
                    if table.dims() == m {
                        w.copy_from_slice(table.row(i));
                    } else {
                        w.iter_mut().for_each(|v| *v = table.get(i, 0));
                    }
                }
                let factor = match cfg.scheme {
                    TrainScheme::ErrorReweight(kind) => {
                        model.predict_into(x, &mut pred);
                        let mae = pred.iter().zip(y).map(|(p, t)| (p - t).abs()).sum::<f64>()
                            / y.len() as f64;
                        error_weight(mae, kind)
                    }
                    _ => 1.0,
                };
                let loss = model.loss_and_grad(x, y, &w, cfg.loss, factor, &mut pred, &mut grad);
                batch_loss += factor * loss;
            }
            let mean = batch_loss / batch.len() as f64;
            if !mean.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    loss: mean,
                });
            }
            epoch_loss += batch_loss;
            model.apply_step(&grad, cfg.learning_rate / batch.len() as f64);
        }
        trace.push(epoch_loss / n as f64);
    }
    if model.weights.iter().chain(&model.bias).any(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            epoch: cfg.epochs,
            batch: 0,
            loss: f64::NAN,
        });
    }
    Ok(TrainOutcome {
        model,
        loss_trace: trace,
    })
}

fn check_alignment(windows: &WindowSet<'_>, table: &WeightTable, m: usize) -> Result<()> {
    if table.len() != windows.len() {
        return Err(Error::Misaligned(format!(
            "{} weight rows for {} windows",
            table.len(),
            windows.len()
        )));
    }
    if table.dims() != m && table.dims() != 1 {
        return Err(Error::Misaligned(format!(
            "{} weight columns for {} variables",
            table.dims(),
            m
        )));
    }
    if let Some(i) = (0..windows.len()).find(|&i| table.t_values()[i] != windows.t(i)) {
        return Err(Error::Misaligned(format!(
            "window {i} has t = {} but weight row has t = {}",
            windows.t(i),
            table.t_values()[i]
        )));
    }
    Ok(())
}

/// Unweighted per-window loss of `model` on every window.
pub fn window_losses(model: &LinearForecaster, windows: &WindowSet<'_>, kind: LossKind) -> Result<Vec<f64>> {
    let ones = vec![1.0; windows.dims()];
    windows
        .iter()
        .map(|pair| {
            let pred = model.predict(pair.x)?;
            Ok(weighted_loss_unchecked(pair.y.as_slice(), &pred, &ones, kind))
        })
        .collect()
}

/// Test-set metrics, optionally split into normal and abrupt windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mse: f64,
    pub mae: f64,
    pub count: usize,
    pub mse_normal: Option<f64>,
    pub mse_abrupt: Option<f64>,
    pub count_normal: Option<usize>,
    pub count_abrupt: Option<usize>,
}

impl EvalReport {
    /// `key=value` lines; absent fields are omitted.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mse={}", self.mse);
        let _ = writeln!(out, "mae={}", self.mae);
        let _ = writeln!(out, "count={}", self.count);
        if let Some(v) = self.mse_normal {
            let _ = writeln!(out, "mse_normal={v}");
        }
        if let Some(v) = self.mse_abrupt {
            let _ = writeln!(out, "mse_abrupt={v}");
        }
        if let Some(v) = self.count_normal {
            let _ = writeln!(out, "count_normal={v}");
        }
        if let Some(v) = self.count_abrupt {
            let _ = writeln!(out, "count_abrupt={v}");
        }
        out
    }
}

/// Unweighted MSE and MAE over `windows`, split by `labels` when given.
pub fn evaluate(
    model: &LinearForecaster,
    windows: &WindowSet<'_>,
    labels: Option<&[bool]>,
) -> Result<EvalReport> {
    if let Some(labels) = labels {
        if labels.len() != windows.len() {
            return Err(Error::Misaligned(format!(
                "{} labels for {} windows",
                labels.len(),
                windows.len()
            )));
        }
    }
    if windows.is_empty() {
        return Err(Error::EmptyInput("no test windows".into()));
    }
    let mut sq = Vec::with_capacity(windows.len());
    let mut abs = Vec::with_capacity(windows.len());
    for pair in windows.iter() {
        let pred = model.predict(pair.x)?;
        let y = pair.y.as_slice();
        let k = y.len() as f64;
        sq.push(pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / k);
        abs.push(pred.iter().zip(y).map(|(p, t)| (p - t).abs()).sum::<f64>() / k);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut report = EvalReport {
        mse: mean(&sq),
        mae: mean(&abs),
        count: sq.len(),
        mse_normal: None,
        mse_abrupt: None,
        count_normal: None,
        count_abrupt: None,
    };
    if let Some(labels) = labels {
        let split = |want: bool| -> (Option<f64>, usize) {
            let picked: Vec<f64> = sq
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == want)
                .map(|(v, _)| *v)
                .collect();
            let n = picked.len();
            ((n > 0).then(|| mean(&picked)), n)
        };
        let (normal, n_normal) = split(false);
        let (abrupt, n_abrupt) = split(true);
        report.mse_normal = normal;
        report.mse_abrupt = abrupt;
        report.count_normal = Some(n_normal);
        report.count_abrupt = Some(n_abrupt);
    }
    Ok(report)
}

/// Analytic gradient of the weighted loss of one window, weights then biases.
pub fn loss_gradient(
    model: &LinearForecaster,
    window: &WindowPair<'_>,
    w: &[f64],
    kind: LossKind,
) -> Result<(f64, Vec<f64>)> {
    model.check_input(window.x)?;
    if window.y.rows() != model.output_len || w.len() != model.dims {
        return Err(Error::ShapeMismatch("window or weights do not match the model".into()));
    }
    let mut grad = vec![0.0; model.num_parameters()];
    let mut pred = vec![0.0; model.output_len * model.dims];
    let loss = model.loss_and_grad(
        window.x.as_slice(),
        window.y.as_slice(),
        w,
        kind,
        1.0,
        &mut pred,
        &mut grad,
    );
    Ok((loss, grad))
}

pub const GRAD_CHECK_STEP: f64 = 1e-5;
/// Gradient magnitudes below this are compared in absolute terms.
pub const GRAD_CHECK_FLOOR: f64 = 1e-4;

/// Largest relative difference between the analytic gradient and central
/// finite differences (step `1e-5`) over every parameter.
///
/// The relative error of one parameter is `|a - n| / max(|a|, |n|, 1e-4)`.
pub fn grad_check(
    model: &LinearForecaster,
    window: &WindowPair<'_>,
    w: &[f64],
    kind: LossKind,
) -> Result<f64> {
    let (_, analytic) = loss_gradient(model, window, w, kind)?;
    let (x, y) = (window.x.as_slice(), window.y.as_slice());
    let mut probe = model.clone();
    let mut pred = vec![0.0; model.output_len * model.dims];
    let mut eval = |m: &LinearForecaster| {
        m.predict_into(x, &mut pred);
        weighted_loss_unchecked(y, &pred, w, kind)
    };
    let mut worst = 0.0f64;
    for (idx, &a) in analytic.iter().enumerate() {
        let original = *probe.parameter_mut(idx);
        *probe.parameter_mut(idx) = original + GRAD_CHECK_STEP;
        let plus = eval(&probe);
        *probe.parameter_mut(idx) = original - GRAD_CHECK_STEP;
        let minus = eval(&probe);
        *probe.parameter_mut(idx) = original;
        let numeric = (plus - minus) / (2.0 * GRAD_CHECK_STEP);
        let denom = a.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_windows, Series, WindowSpec};

    #[test]
    fn zero_model_predicts_zero() {
        let m = LinearForecaster::zeros(4, 2, 2);
        let x = [1.0; 8];
        assert_eq!(m.predict(SeriesView::new(&x, 4, 2)).unwrap(), vec![0.0; 4]);
        assert!(m.predict(SeriesView::new(&x, 8, 1)).is_err());
    }

    #[test]
    fn selection_matrix_copies_tail() {
        let mut m = LinearForecaster::zeros(4, 2, 1);
        m.set_weight(0, 0, 2, 1.0);
        m.set_weight(0, 1, 3, 1.0);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(m.predict(SeriesView::new(&x, 4, 1)).unwrap(), vec![3.0, 4.0]);
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert_eq!(m.predict(SeriesView::new(&x2, 4, 1)).unwrap(), vec![6.0, 8.0]);
    }

    #[test]
    fn constant_series_is_learned() {
        let s = Series::univariate(vec![3.0; 60]).unwrap();
        let w = make_windows(&s, WindowSpec::new(4, 2).unwrap()).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.02,
            epochs: 300,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let out = train(&w, None, &cfg).unwrap();
        let report = evaluate(&out.model, &w, None).unwrap();
        assert!(report.mse < 1e-6, "mse = {}", report.mse);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let s = Series::univariate((0..50).map(|t| (t as f64 * 0.3).sin()).collect()).unwrap();
        let w = make_windows(&s, WindowSpec::new(5, 3).unwrap()).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 4,
            ..TrainConfig::default()
        };
        let out = train(&w, None, &cfg).unwrap();
        assert_eq!(out.model, LinearForecaster::zeros(5, 3, 1));
        let first = out.loss_trace[0];
        assert!(out.loss_trace.iter().all(|l| (l - first).abs() <= 1e-12 * first));
    }

    #[test]
    fn divergence_is_reported() {
        let s = Series::univariate((0..50).map(|t| (t as f64 * 0.3).sin() * 100.0).collect()).unwrap();
        let w = make_windows(&s, WindowSpec::new(5, 3).unwrap()).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e6,
            epochs: 50,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&w, None, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn misaligned_weights_rejected() {
        let s = Series::univariate((0..50).map(|t| t as f64).collect()).unwrap();
        let w = make_windows(&s, WindowSpec::new(5, 3).unwrap()).unwrap();
        let table = WeightTable::uniform((0..w.len()).collect(), 1);
        let cfg = TrainConfig {
            scheme: TrainScheme::Reld,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&w, Some(&table), &cfg), Err(Error::Misaligned(_))));
        assert!(matches!(train(&w, None, &cfg), Err(Error::Misaligned(_))));
    }

    #[test]
    fn evaluate_split() {
        // Two windows with squared errors 1 and 3 under a zero model.
        let values = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 3f64.sqrt(), 3f64.sqrt()];
        let s = Series::univariate(values.to_vec()).unwrap();
        let spec = WindowSpec::with_stride(2, 2, 4).unwrap();
        let w = make_windows(&s, spec).unwrap();
        assert_eq!(w.len(), 2);
        let r = evaluate(&LinearForecaster::zeros(2, 2, 1), &w, Some(&[false, true])).unwrap();
        assert!((r.mse - 2.0).abs() < 1e-12);
        assert_eq!(r.mse_normal, Some(1.0));
        assert!((r.mse_abrupt.unwrap() - 3.0).abs() < 1e-12);

        let r = evaluate(&LinearForecaster::zeros(2, 2, 1), &w, Some(&[false, false])).unwrap();
        assert_eq!(r.mse_normal, Some(r.mse));
        assert_eq!(r.mse_abrupt, None);
        assert!(!r.to_key_value().contains("mse_abrupt"));
        assert!(evaluate(&LinearForecaster::zeros(2, 2, 1), &w, Some(&[false])).is_err());
    }

    #[test]
    fn zero_residual_gradient() {
        let s = Series::univariate(vec![0.0; 10]).unwrap();
        let w = make_windows(&s, WindowSpec::new(3, 2).unwrap()).unwrap();
        let model = LinearForecaster::zeros(3, 2, 1);
        let (loss, grad) = loss_gradient(&model, &w.get(0), &[1.0], LossKind::L2).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
        assert_eq!(grad_check(&model, &w.get(0), &[1.0], LossKind::L2).unwrap(), 0.0);
    }

    #[test]
    fn save_load_round_trip() {
        let mut m = LinearForecaster::zeros(3, 2, 2);
        m.set_weight(1, 1, 2, 0.1 + 0.2);
        m.set_bias(0, 1, -1e-17);
        let f = tempfile::NamedTempFile::new().unwrap();
        m.save(f.path()).unwrap();
        assert_eq!(LinearForecaster::load(f.path()).unwrap(), m);

        std::fs::write(f.path(), "something else\n1 1 1\n0\n0\n").unwrap();
        assert!(matches!(LinearForecaster::load(f.path()), Err(Error::ModelFormat(_))));
    }
}
