//! End-to-end pipelines behind the `reld` binary: synthetic data generation,
//! weighting, train/evaluate runs and the self-verification suite.
//!
//! Every function here is deterministic given its arguments. Files are written
//! under an output directory and start with a `# ...` comment line carrying the
//! caller-supplied flag record.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::discrepancy::{
    hotelling_ld, kpss_ld, ld_profile, periodicity_residual, welch_ld, window_moment_residual,
    LdMetric, LdProfile, LongRunVariance,
};
use crate::error::{Error, Result};
use crate::export::{write_density_csv, write_mask_csv, write_profile_csv, write_weights_csv};
use crate::losses::{ema, filter_outliers, moving_average};
use crate::forecaster::{evaluate, train, EvalReport, TrainConfig, TrainOutcome, TrainScheme};
use crate::series::{make_windows, write_csv, Series, SeriesView, WindowSpec};
use crate::synth::{
    gen_periodic, gen_rect, inject_abrupt, rng, window_labels, AbruptEvent, LabeledSeries,
    PeriodicSpec, RectSpec,
};
use crate::weighting::{invld_weights, reld, DensityEstimate, ReldConfig, WeightTable};

/// The labeled scenario used to compare weighting schemes: a sine with one
/// harmonic and Gaussian noise, carrying two flukes, a frequency change and a
/// level shift.
///
/// Event positions are fixed fractions of the length. With a 70/30 split the
/// first fluke and the level shift fall in the training part, the second fluke
/// and the frequency change in the test part.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub length: usize,
    pub period: usize,
    pub amplitude: f64,
    pub noise_sigma: f64,
    /// Fluke and level-shift size as a multiple of `amplitude`.
    pub event_scale: f64,
    pub frequency_multiplier: f64,
    /// Length of the frequency-change interval in periods.
    pub frequency_periods: usize,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            length: 2400,
            period: 24,
            amplitude: 1.0,
            noise_sigma: 0.1,
            event_scale: 5.0,
            frequency_multiplier: 3.0,
            frequency_periods: 2,
            seed: 0,
        }
    }
}

impl BenchmarkSpec {
    pub fn with_seed(seed: u64) -> Self {
        BenchmarkSpec {
            seed,
            ..Self::default()
        }
    }

    pub fn base(&self) -> PeriodicSpec {
        PeriodicSpec::sine(self.length, self.period, self.amplitude)
            .with_component(2.0, 0.3 * self.amplitude, 0.7)
            .with_noise(self.noise_sigma, self.seed)
    }

    /// The four events, positioned by fractions of the length and jittered by
    /// up to half a period from the seed.
    pub fn events(&self) -> Vec<AbruptEvent> {
        let mut r = rng(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let half = (self.period / 2).max(1);
        let mut at = |fraction: f64| {
            let centre = (fraction * self.length as f64) as usize;
            centre + r.random_range(0..half)
        };
        let magnitude = self.event_scale * self.amplitude;
        vec![
            AbruptEvent::fluke(at(0.20), magnitude),
            AbruptEvent::trend_shift(at(0.45), magnitude),
            AbruptEvent::fluke(at(0.80), -magnitude),
            AbruptEvent::frequency_change(
                at(0.90),
                self.frequency_periods * self.period,
                self.frequency_multiplier,
            ),
        ]
    }

    pub fn generate(&self) -> Result<LabeledSeries> {
        let base = self.base();
        let clean = gen_periodic(&base)?;
        let labeled = inject_abrupt(&clean, &base, &self.events())?;
        LabeledSeries::new(labeled.series.with_name("benchmark"), labeled.mask)
    }
}

/// What `gen` produces.
#[derive(Debug, Clone, PartialEq)]
pub enum GenKind {
    Periodic(PeriodicSpec),
    Rect(RectSpec),
    Benchmark(BenchmarkSpec),
}

impl GenKind {
    pub fn generate(&self) -> Result<LabeledSeries> {
        match self {
            GenKind::Periodic(spec) => Ok(LabeledSeries::unlabeled(gen_periodic(spec)?)),
            GenKind::Rect(spec) => gen_rect(spec),
            GenKind::Benchmark(spec) => spec.generate(),
        }
    }
}

/// Writes `series.csv` and `mask.csv` under `out_dir`.
pub fn cmd_gen(kind: &GenKind, out_dir: &Path, comment: &str) -> Result<Vec<PathBuf>> {
    let labeled = kind.generate()?;
    create_dir(out_dir)?;
    let series_path = out_dir.join("series.csv");
    let mask_path = out_dir.join("mask.csv");
    write_csv(&labeled.series, &series_path, Some(comment))?;
    write_mask_csv(&labeled.mask, &mask_path, Some(comment))?;
    Ok(vec![series_path, mask_path])
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Settings shared by `weigh` and `train-eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub window: WindowSpec,
    pub metric: LdMetric,
    pub reld: ReldConfig,
    pub train: TrainConfig,
    /// Fraction of rows in the training prefix.
    pub split: f64,
    /// Z-score every column with training-prefix statistics before windowing.
    pub standardize: bool,
    /// Applied to the training split only.
    pub preprocess: Preprocess,
}

/// Training-series preprocessing baselines.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Preprocess {
    #[default]
    None,
    MovingAverage(usize),
    Ema(f64),
    /// Replace points beyond this many standard deviations.
    FilterOutliers(f64),
}

impl Preprocess {
    pub fn apply(&self, series: &Series) -> Result<Series> {
        match *self {
            Preprocess::None => Ok(series.clone()),
            Preprocess::MovingAverage(k) => moving_average(series, k),
            Preprocess::Ema(alpha) => ema(series, alpha),
            Preprocess::FilterOutliers(z) => Ok(filter_outliers(series, z)?.0),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            window: WindowSpec {
                input_len: 48,
                output_len: 24,
                stride: 1,
            },
            metric: LdMetric::welch(),
            reld: ReldConfig::default(),
            train: TrainConfig::default(),
            split: 0.7,
            standardize: true,
            preprocess: Preprocess::None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.metric.validate()?;
        self.reld.kernel.validate()?;
        if self.reld.num_bins == 0 {
            return Err(Error::InvalidParameter("bin count must be >= 1".into()));
        }
        self.train.validate()?;
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "split fraction must lie in (0, 1), got {}",
                self.split
            )));
        }
        Ok(())
    }
}

/// Per-column affine map fitted on one series and applied to others.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations; constant columns
    /// get scale 1.
    pub fn fit(series: &Series) -> Self {
        let n = series.len() as f64;
        let (mut mean, mut scale) = (Vec::new(), Vec::new());
        for j in 0..series.dims() {
            let col = series.column(j);
            let mu = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n).sqrt();
            mean.push(mu);
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    pub fn identity(dims: usize) -> Self {
        Standardizer {
            mean: vec![0.0; dims],
            scale: vec![1.0; dims],
        }
    }

    pub fn apply(&self, series: &Series) -> Result<Series> {
        let m = series.dims();
        let values = series
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| (v - self.mean[k % m]) / self.scale[k % m])
            .collect();
        Ok(Series::from_rows(values, m)?.with_name(series.name()))
    }
}

/// Chronological split of a labeled series.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: LabeledSeries,
    /// Test rows preceded by the last `input_len` training rows as warm-up,
    /// so the first test window predicts the first test row.
    pub test: LabeledSeries,
    /// Index of the first test row in the original series.
    pub boundary: usize,
}

pub fn chronological_split(labeled: &LabeledSeries, fraction: f64, spec: WindowSpec) -> Result<Split> {
    let len = labeled.series.len();
    let boundary = (fraction * len as f64).round() as usize;
    if boundary < spec.span() || len - boundary < spec.output_len {
        return Err(Error::SeriesTooShort {
            len,
            input_len: spec.input_len,
            output_len: spec.output_len,
        });
    }
    Ok(Split {
        train: labeled.slice(0, boundary)?,
        test: labeled.slice(boundary - spec.input_len, len)?,
        boundary,
    })
}

/// LD profile and weights for one scheme, plus the time spent.
#[derive(Debug, Clone)]
pub struct Weighting {
    pub profile: LdProfile,
    pub weights: WeightTable,
    /// One estimate per LD column, present for ReLD.
    pub densities: Vec<DensityEstimate>,
    pub seconds: f64,
}

/// Computes LD and ReLD weights (`invld = false`) or invLD weights.
pub fn compute_weighting(series: &Series, cfg: &ExperimentConfig, invld: bool) -> Result<Weighting> {
    let start = Instant::now();
    let profile = ld_profile(series, cfg.window, cfg.metric)?;
    let (weights, densities) = if invld {
        (invld_weights(&profile)?, Vec::new())
    } else {
        reld(&profile, &cfg.reld)?
    };
    Ok(Weighting {
        profile,
        weights,
        densities,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Writes `ld_profile.csv`, `weights.csv` and one `density_dim{j}.csv` per
/// LD column. Returns the weighting result for reporting.
pub fn cmd_weigh(series: &Series, cfg: &ExperimentConfig, out_dir: &Path, comment: &str) -> Result<Weighting> {
    cfg.validate()?;
    let result = compute_weighting(series, cfg, false)?;
    create_dir(out_dir)?;
    write_profile_csv(&result.profile, out_dir.join("ld_profile.csv"), Some(comment))?;
    write_weights_csv(&result.profile, &result.weights, out_dir.join("weights.csv"), Some(comment))?;
    for (j, density) in result.densities.iter().enumerate() {
        write_density_csv(density, out_dir.join(format!("density_dim{j}.csv")), Some(comment))?;
    }
    Ok(result)
}

/// Everything produced by one train/evaluate run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: EvalReport,
    pub outcome: TrainOutcome,
    /// Training-split weights for the ReLD and invLD schemes.
    pub weighting: Option<Weighting>,
    pub standardizer: Standardizer,
}

/// Splits, optionally standardizes, weights the training windows, trains and
/// evaluates on the test tail. `labeled_mask = false` leaves the split
/// metrics out of the report.
pub fn train_eval(labeled: &LabeledSeries, labeled_mask: bool, cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let split = chronological_split(labeled, cfg.split, cfg.window)?;
    let standardizer = if cfg.standardize {
        Standardizer::fit(&split.train.series)
    } else {
        Standardizer::identity(labeled.series.dims())
    };
    let train_series = cfg.preprocess.apply(&standardizer.apply(&split.train.series)?)?;
    let test_series = standardizer.apply(&split.test.series)?;

    let weighting = match cfg.train.scheme {
        TrainScheme::Reld => Some(compute_weighting(&train_series, cfg, false)?),
        TrainScheme::InvLd => Some(compute_weighting(&train_series, cfg, true)?),
        _ => None,
    };
    let train_windows = make_windows(&train_series, cfg.window)?;
    let outcome = train(&train_windows, weighting.as_ref().map(|w| &w.weights), &cfg.train)?;

    let test_windows = make_windows(&test_series, cfg.window)?;
    let labels = if labeled_mask {
        let test = LabeledSeries::new(test_series.clone(), split.test.mask.clone())?;
        Some(window_labels(&test, cfg.window)?)
    } else {
        None
    };
    let report = evaluate(&outcome.model, &test_windows, labels.as_deref())?;
    Ok(RunResult {
        report,
        outcome,
        weighting,
        standardizer,
    })
}

/// Runs [`train_eval`] and writes `report.txt` (key=value), `report.json`,
/// `loss_trace.csv` and `model.txt`.
pub fn cmd_train_eval(
    labeled: &LabeledSeries,
    labeled_mask: bool,
    cfg: &ExperimentConfig,
    out_dir: &Path,
    comment: &str,
) -> Result<RunResult> {
    let result = train_eval(labeled, labeled_mask, cfg)?;
    create_dir(out_dir)?;
    let mut text = format!("# {comment}\nscheme={}\n", cfg.train.scheme.name());
    text.push_str(&result.report.to_key_value());
    if let Some(w) = &result.weighting {
        text.push_str(&format!("weighting_seconds={}\n", w.seconds));
    }
    write_text(&out_dir.join("report.txt"), &text)?;

    #[derive(Serialize)]
    struct JsonReport<'a> {
        flags: &'a str,
        scheme: &'a str,
        #[serde(flatten)]
        report: &'a EvalReport,
        loss_trace: &'a [f64],
    }
    let json = serde_json::to_string_pretty(&JsonReport {
        flags: comment,
        scheme: cfg.train.scheme.name(),
        report: &result.report,
        loss_trace: &result.outcome.loss_trace,
    })
    .map_err(|e| Error::InvalidParameter(format!("cannot serialize report: {e}")))?;
    write_text(&out_dir.join("report.json"), &(json + "\n"))?;

    let mut trace = format!("# {comment}\nepoch,loss\n");
    for (e, l) in result.outcome.loss_trace.iter().enumerate() {
        trace.push_str(&format!("{e},{l:?}\n"));
    }
    write_text(&out_dir.join("loss_trace.csv"), &trace)?;
    result.outcome.model.save(out_dir.join("model.txt"))?;
    Ok(result)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            passed: value < tolerance,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Adds a fluke to the periodicity fixture; the periodicity checks are
    /// then expected to fail.
    pub inject_fluke: bool,
    pub seed: u64,
}

pub const VERIFY_PERIOD: usize = 64;
pub const VERIFY_WINDOW: usize = 32;
pub const VERIFY_LENGTH: usize = 12 * VERIFY_PERIOD;
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Periodicity, moment and oracle checks. The caller decides the exit code
/// from [`Check::passed`].
pub fn cmd_verify(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let base = PeriodicSpec::sine(VERIFY_LENGTH, VERIFY_PERIOD, 1.0);
    let mut fixture = gen_periodic(&base)?;
    if opts.inject_fluke {
        fixture = inject_abrupt(&fixture, &base, &[AbruptEvent::fluke(VERIFY_LENGTH / 2, 5.0)])?.series;
    }
    let spec = WindowSpec::new(VERIFY_WINDOW, VERIFY_WINDOW)?;
    for metric in [LdMetric::welch(), LdMetric::hotelling(), LdMetric::kpss()] {
        let profile = ld_profile(&fixture, spec, metric)?;
        let residual = periodicity_residual(&profile, VERIFY_PERIOD)?;
        checks.push(Check::below(&format!("periodicity_{}", metric.name()), residual, RESIDUAL_TOL));
    }
    let (mean_res, var_res) = window_moment_residual(&fixture, VERIFY_WINDOW, VERIFY_PERIOD)?;
    checks.push(Check::below("window_mean_shift", mean_res, RESIDUAL_TOL));
    checks.push(Check::below("window_variance_shift", var_res, RESIDUAL_TOL));

    let mut r = rng(opts.seed);
    checks.push(Check::below("welch_oracle", welch_oracle_error(&mut r, 1000)?, 1e-10));
    checks.push(Check::below("kpss_oracle", kpss_oracle_error(&mut r, 200)?, 1e-8));
    checks.push(Check::below("hotelling_student", hotelling_student_error(&mut r, 200)?, 1e-10));

    let sampled = gen_periodic(&PeriodicSpec::sine(256, VERIFY_PERIOD, 1.0))?;
    let aliased = Series::univariate(sampled.column(0).into_iter().step_by(VERIFY_PERIOD).collect())?;
    let profile = ld_profile(&aliased, WindowSpec::new(2, 2)?, LdMetric::welch())?;
    let non_finite = profile.values().iter().filter(|v| !v.is_finite()).count();
    checks.push(Check::below("constant_window_non_finite", non_finite as f64, 0.5));
    Ok(checks)
}

fn random_sample(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let shift = r.random_range(-5.0..5.0);
    let spread = r.random_range(0.1..3.0);
    (0..n).map(|_| shift + spread * r.random_range(-1.0..1.0)).collect()
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Welch t computed straight from its definition, textbook sums only.
pub fn welch_formula(x: &[f64], y: &[f64], epsilon: f64) -> f64 {
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let mx = x.iter().sum::<f64>() / nx;
    let my = y.iter().sum::<f64>() / ny;
    let vx = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / (nx - 1.0);
    let vy = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / (ny - 1.0);
    (mx - my) / (vx / nx + vy / ny + epsilon).sqrt()
}

fn welch_oracle_error(r: &mut impl Rng, trials: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let nx = r.random_range(2..64);
        let ny = r.random_range(2..64);
        let x = random_sample(r, nx);
        let y = random_sample(r, ny);
        let got = welch_ld(SeriesView::new(&x, nx, 1), SeriesView::new(&y, ny, 1), 1e-8)?[0];
        worst = worst.max(relative_error(got, welch_formula(&x, &y, 1e-8)));
    }
    Ok(worst)
}

/// KPSS with simple variance, step by step: least-squares trend by the normal
/// equations, residual partial sums, then the normalized sum of squares.
pub fn kpss_formula(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let (mut st, mut stt, mut sz, mut stz) = (0.0, 0.0, 0.0, 0.0);
    for (i, &v) in z.iter().enumerate() {
        let t = (i + 1) as f64;
        st += t;
        stt += t * t;
        sz += v;
        stz += t * v;
    }
    let det = n * stt - st * st;
    let slope = (n * stz - st * sz) / det;
    let intercept = (sz - slope * st) / n;
    let residuals: Vec<f64> = z
        .iter()
        .enumerate()
        .map(|(i, &v)| v - intercept - slope * (i + 1) as f64)
        .collect();
    let sigma2 = residuals.iter().map(|e| e * e).sum::<f64>() / n;
    let mut partial = 0.0;
    let mut total = 0.0;
    for e in &residuals {
        partial += e;
        total += partial * partial;
    }
    total / (n * n * sigma2)
}

fn kpss_oracle_error(r: &mut impl Rng, trials: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = r.random_range(8..128);
        let slope = r.random_range(-0.2..0.2);
        let mut z = random_sample(r, n);
        for (i, v) in z.iter_mut().enumerate() {
            *v += slope * i as f64;
        }
        let got = kpss_ld(&z, LongRunVariance::Simple)?;
        worst = worst.max(relative_error(got, kpss_formula(&z)));
    }
    Ok(worst)
}

/// Squared pooled two-sample Student t.
pub fn student_t2(x: &[f64], y: &[f64]) -> f64 {
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let mx = x.iter().sum::<f64>() / nx;
    let my = y.iter().sum::<f64>() / ny;
    let ss = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() + y.iter().map(|v| (v - my).powi(2)).sum::<f64>();
    let pooled = ss / (nx + ny - 2.0);
    (mx - my).powi(2) / (pooled * (1.0 / nx + 1.0 / ny))
}

fn hotelling_student_error(r: &mut impl Rng, trials: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let nx = r.random_range(3..64);
        let ny = r.random_range(3..64);
        let x = random_sample(r, nx);
        let y = random_sample(r, ny);
        let got = hotelling_ld(SeriesView::new(&x, nx, 1), SeriesView::new(&y, ny, 1), 0.0)?;
        worst = worst.max(relative_error(got, student_t2(&x, &y)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_events_fit_and_split() {
        let spec = BenchmarkSpec::with_seed(3);
        let labeled = spec.generate().unwrap();
        assert_eq!(labeled.series.len(), spec.length);
        assert!(labeled.mask.iter().any(|&m| m));
        let split = chronological_split(&labeled, 0.7, ExperimentConfig::default().window).unwrap();
        assert!(split.train.mask.iter().any(|&m| m));
        assert!(split.test.mask.iter().any(|&m| m));
        assert_eq!(split.boundary, 1680);
        assert_eq!(split.test.series.len(), 2400 - 1680 + 48);
    }

    #[test]
    fn standardizer_roundtrip_stats() {
        let s = Series::from_columns(&[vec![1.0, 2.0, 3.0, 4.0], vec![5.0; 4]]).unwrap();
        let z = Standardizer::fit(&s).apply(&s).unwrap();
        let col = z.column(0);
        assert!(col.iter().sum::<f64>().abs() < 1e-12);
        assert!((col.iter().map(|v| v * v).sum::<f64>() / 4.0 - 1.0).abs() < 1e-12);
        assert_eq!(z.column(1), vec![0.0; 4]);
    }

    #[test]
    fn split_rejects_short_prefix() {
        let labeled = LabeledSeries::unlabeled(Series::univariate(vec![0.0; 100]).unwrap());
        assert!(chronological_split(&labeled, 0.1, WindowSpec::new(48, 24).unwrap()).is_err());
    }

    #[test]
    fn verify_passes_and_negative_control_fails() {
        let checks = cmd_verify(&VerifyOptions::default()).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        let checks = cmd_verify(&VerifyOptions {
            inject_fluke: true,
            seed: 0,
        })
        .unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"periodicity_welch"), "{failed:?}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.split = 1.0;
        assert!(cfg.validate().is_err());
    }
}
