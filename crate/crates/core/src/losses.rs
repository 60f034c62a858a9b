//! Weighted forecasting loss and the comparison baselines: error-based
//! reweighting factors and input preprocessing (smoothing, outlier filtering).

use crate::error::{Error, Result};
use crate::series::{Series, SeriesView};

/// Per-element penalty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LossKind {
    #[default]
    L2,
    L1,
    Huber { delta: f64 },
}


impl LossKind {
    pub fn huber() -> Self {
        LossKind::Huber { delta: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LossKind::Huber { delta } if !(delta > 0.0 && delta.is_finite()) => Err(
                Error::InvalidParameter(format!("Huber delta must be positive, got {delta}")),
            ),
            _ => Ok(()),
        }
    }

    /// Penalty of residual `r`.
    pub fn penalty(&self, r: f64) -> f64 {
        match *self {
            LossKind::L2 => r * r,
            LossKind::L1 => r.abs(),
            LossKind::Huber { delta } => {
                let a = r.abs();
                if a <= delta {
                    0.5 * r * r
                } else {
                    delta * (a - 0.5 * delta)
                }
            }
        }
    }

    /// Derivative of the penalty with respect to `r` (subgradient 0 at the L1 kink).
    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            LossKind::L2 => 2.0 * r,
            LossKind::L1 => {
                if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Huber { delta } => r.clamp(-delta, delta),
        }
    }

    pub fn name(&self) -> String {
        match self {
            LossKind::L2 => "l2".into(),
            LossKind::L1 => "l1".into(),
            LossKind::Huber { delta } => format!("huber({delta})"),
        }
    }
}

/// `(1 / (m·O)) · Σ_j w_j Σ_i penalty(y_ij - ŷ_ij)`.
pub fn weighted_loss(
    y: SeriesView<'_>,
    y_hat: SeriesView<'_>,
    weights: &[f64],
    kind: LossKind,
) -> Result<f64> {
    if y.rows() != y_hat.rows() || y.dims() != y_hat.dims() {
        return Err(Error::ShapeMismatch(format!(
            "target is {}x{}, prediction is {}x{}",
            y.rows(),
            y.dims(),
            y_hat.rows(),
            y_hat.dims()
        )));
    }
    if weights.len() != y.dims() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} variables",
            weights.len(),
            y.dims()
        )));
    }
    Ok(weighted_loss_unchecked(y.as_slice(), y_hat.as_slice(), weights, kind))
}

/// Row-major `O × m` buffers, shapes already checked.
pub(crate) fn weighted_loss_unchecked(y: &[f64], y_hat: &[f64], weights: &[f64], kind: LossKind) -> f64 {
    let m = weights.len();
    let mut per_dim = vec![0.0; m];
    for (k, (a, b)) in y.iter().zip(y_hat).enumerate() {
        per_dim[k % m] += kind.penalty(a - b);
    }
    let total: f64 = per_dim.iter().zip(weights).map(|(s, w)| w * s).sum();
    total / y.len() as f64
}

/// Error-driven per-sample reweighting used as a baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorReweightKind {
    /// `sigmoid(β|e|)^γ`
    FocalR { beta: f64, gamma: f64 },
    /// `sigmoid(-β|e|)^γ`
    FlipFocalR { beta: f64, gamma: f64 },
    /// `1 / (|e| + ε)`
    InvL2 { epsilon: f64 },
}

impl ErrorReweightKind {
    pub fn focal() -> Self {
        ErrorReweightKind::FocalR {
            beta: 1.0,
            gamma: 1.0,
        }
    }

    pub fn flip_focal() -> Self {
        ErrorReweightKind::FlipFocalR {
            beta: 1.0,
            gamma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ErrorReweightKind::FocalR { beta, gamma }
            | ErrorReweightKind::FlipFocalR { beta, gamma } => beta > 0.0 && gamma > 0.0,
            ErrorReweightKind::InvL2 { epsilon } => epsilon > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "error reweighting parameters must be positive: {self:?}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorReweightKind::FocalR { .. } => "focal",
            ErrorReweightKind::FlipFocalR { .. } => "flip-focal",
            ErrorReweightKind::InvL2 { .. } => "inv-l2",
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Factor multiplying the loss of a sample with error `e`.
pub fn error_weight(e: f64, kind: ErrorReweightKind) -> f64 {
    match kind {
        ErrorReweightKind::FocalR { beta, gamma } => sigmoid(beta * e.abs()).powf(gamma),
        ErrorReweightKind::FlipFocalR { beta, gamma } => sigmoid(-beta * e.abs()).powf(gamma),
        ErrorReweightKind::InvL2 { epsilon } => 1.0 / (e.abs() + epsilon),
    }
}

/// Trailing moving average of width `k`; the first `k - 1` rows average the
/// available prefix.
pub fn moving_average(series: &Series, k: usize) -> Result<Series> {
    if k == 0 {
        return Err(Error::InvalidParameter("moving average width must be >= 1".into()));
    }
    series.map_columns(|col| {
        (0..col.len())
            .map(|t| {
                let window = &col[(t + 1).saturating_sub(k)..=t];
                // Offsetting by the first value keeps constant windows exact.
                let base = window[0];
                base + window.iter().map(|v| v - base).sum::<f64>() / window.len() as f64
            })
            .collect()
    })
}

/// Exponential smoothing `s_t = α·x_t + (1-α)·s_{t-1}`, `s_0 = x_0`.
pub fn ema(series: &Series, alpha: f64) -> Result<Series> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0, 1], got {alpha}")));
    }
    series.map_columns(|col| {
        let mut out = Vec::with_capacity(col.len());
        let mut s = col[0];
        out.push(s);
        for &x in &col[1..] {
            s = if alpha == 1.0 { x } else { s + alpha * (x - s) };
            out.push(s);
        }
        out
    })
}

/// Replaces values farther than `z_threshold` standard deviations from the
/// column mean by linear interpolation between the nearest kept neighbours.
///
/// Returns the filtered series and a row-major mask of replaced cells.
pub fn filter_outliers(series: &Series, z_threshold: f64) -> Result<(Series, Vec<bool>)> {
    if !(z_threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "z threshold must be positive, got {z_threshold}"
        )));
    }
    if series.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: series.len(),
        });
    }
    let m = series.dims();
    let mut mask = vec![false; series.len() * m];
    let mut columns = Vec::with_capacity(m);
    for j in 0..m {
        let col = series.column(j);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        if sd == 0.0 {
            columns.push(col);
            continue;
        }
        let outlier: Vec<bool> = col.iter().map(|v| (v - mean).abs() > z_threshold * sd).collect();
        let kept: Vec<usize> = (0..col.len()).filter(|&t| !outlier[t]).collect();
        let mut out = col.clone();
        for t in (0..col.len()).filter(|&t| outlier[t]) {
            mask[t * m + j] = true;
            let next = kept.partition_point(|&k| k < t);
            out[t] = match (next.checked_sub(1).map(|i| kept[i]), kept.get(next)) {
                (Some(a), Some(&b)) => {
                    let frac = (t - a) as f64 / (b - a) as f64;
                    col[a] + frac * (col[b] - col[a])
                }
                (Some(a), None) => col[a],
                (None, Some(&b)) => col[b],
                (None, None) => col[t],
            };
        }
        columns.push(out);
    }
    let filtered = Series::from_columns(&columns)?.with_name(series.name());
    Ok((filtered, mask))
}
