//! Local discrepancy between the input and output halves of each window.
//!
//! Three statistics are offered. The Welch t statistic is the default and is
//! computed per variable. Hotelling's t² collapses all variables into one
//! value through the pooled covariance. The KPSS statistic treats the joined
//! window of each variable as one sequence and measures how far it strays from
//! trend stationarity.
//!
//! For a series sampled from a periodic function, the windowed mean and
//! variance are periodic in the window start, and so is the Welch LD. The
//! residual helpers at the bottom of this module measure how closely a computed
//! profile follows that property.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{column_mean_var, make_windows, Series, SeriesView, WindowSpec};

pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Which output rows enter the Hotelling output-side covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceIndexing {
    /// All `O` output rows.
    #[default]
    AllPoints,
    /// Output rows `1..O`, skipping the first one, with the `O - 1` divisor
    /// unchanged. Kept for comparison with the printed formula.
    SkipFirstOutput,
}

/// Long-run variance estimator for the KPSS statistic.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LongRunVariance {
    /// Mean of squared residuals.
    #[default]
    Simple,
    /// Newey-West with Bartlett weights up to the given lag.
    NeweyWest { bandwidth: usize },
}

/// Statistic used as local discrepancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LdMetric {
    WelchT {
        epsilon: f64,
    },
    HotellingT2 {
        ridge: f64,
        indexing: CovarianceIndexing,
    },
    Kpss {
        lrv: LongRunVariance,
    },
}

impl Default for LdMetric {
    fn default() -> Self {
        LdMetric::welch()
    }
}

impl LdMetric {
    pub fn welch() -> Self {
        LdMetric::WelchT {
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn hotelling() -> Self {
        LdMetric::HotellingT2 {
            ridge: DEFAULT_RIDGE,
            indexing: CovarianceIndexing::AllPoints,
        }
    }

    pub fn kpss() -> Self {
        LdMetric::Kpss {
            lrv: LongRunVariance::Simple,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LdMetric::WelchT { .. } => "welch",
            LdMetric::HotellingT2 { .. } => "hotelling",
            LdMetric::Kpss { .. } => "kpss",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LdMetric::WelchT { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => Err(
                Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")),
            ),
            LdMetric::HotellingT2 { ridge, .. } if !(ridge >= 0.0 && ridge.is_finite()) => Err(
                Error::InvalidParameter(format!("ridge must be non-negative, got {ridge}")),
            ),
            _ => Ok(()),
        }
    }

    /// Number of LD columns produced for an `m`-variate series.
    pub fn output_dims(&self, m: usize) -> usize {
        match self {
            LdMetric::HotellingT2 { .. } => 1,
            _ => m,
        }
    }

    /// Evaluates the metric on one window, writing `output_dims` values into `out`.
    pub fn evaluate(&self, x: SeriesView<'_>, y: SeriesView<'_>, out: &mut [f64]) -> Result<()> {
        match *self {
            LdMetric::WelchT { epsilon } => {
                check_sides(x, y)?;
                for (j, slot) in out.iter_mut().enumerate() {
                    *slot = welch_column(x, y, j, epsilon);
                }
            }
            LdMetric::HotellingT2 { ridge, indexing } => {
                out[0] = hotelling_ld_with(x, y, ridge, indexing)?;
            }
            LdMetric::Kpss { lrv } => {
                let n = x.rows() + y.rows();
                let mut column = Vec::with_capacity(n);
                for (j, slot) in out.iter_mut().enumerate() {
                    column.clear();
                    column.extend(x.column(j).chain(y.column(j)));
                    *slot = kpss_ld(&column, lrv)?;
                }
            }
        }
        Ok(())
    }
}

fn check_sides(x: SeriesView<'_>, y: SeriesView<'_>) -> Result<()> {
    if x.dims() != y.dims() {
        return Err(Error::ShapeMismatch(format!(
            "input has {} variables, output has {}",
            x.dims(),
            y.dims()
        )));
    }
    let k = x.rows().min(y.rows());
    if k < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: k });
    }
    Ok(())
}

fn welch_column(x: SeriesView<'_>, y: SeriesView<'_>, j: usize, epsilon: f64) -> f64 {
    let (nx, ny) = (x.rows(), y.rows());
    let (mx, vx) = column_mean_var(x.column(j), nx);
    let (my, vy) = column_mean_var(y.column(j), ny);
    (mx - my) / (vx / nx as f64 + vy / ny as f64 + epsilon).sqrt()
}

/// Welch t statistic per variable:
/// `(mean(x) - mean(y)) / sqrt(var(x)/I + var(y)/O + epsilon)`.
///
/// Variances are unbiased. With `epsilon = 0` and two constant sides the
/// result is not finite; any positive `epsilon` keeps it finite.
pub fn welch_ld(x: SeriesView<'_>, y: SeriesView<'_>, epsilon: f64) -> Result<Vec<f64>> {
    check_sides(x, y)?;
    Ok((0..x.dims()).map(|j| welch_column(x, y, j, epsilon)).collect())
}

/// Hotelling's two-sample t² with a ridge-regularized pooled covariance.
pub fn hotelling_ld(x: SeriesView<'_>, y: SeriesView<'_>, ridge: f64) -> Result<f64> {
    hotelling_ld_with(x, y, ridge, CovarianceIndexing::AllPoints)
}

pub fn hotelling_ld_with(
    x: SeriesView<'_>,
    y: SeriesView<'_>,
    ridge: f64,
    indexing: CovarianceIndexing,
) -> Result<f64> {
    check_sides(x, y)?;
    let m = x.dims();
    let (ni, no) = (x.rows(), y.rows());
    if ni + no < m + 2 {
        return Err(Error::TooFewPoints {
            needed: m + 2,
            got: ni + no,
        });
    }
    let mean_x = column_means(x);
    let mean_y = column_means(y);

    let mut scatter_x = DMatrix::<f64>::zeros(m, m);
    accumulate_scatter(&mut scatter_x, x, &mean_x, 0);
    let mut scatter_y = DMatrix::<f64>::zeros(m, m);
    let skip = match indexing {
        CovarianceIndexing::AllPoints => 0,
        CovarianceIndexing::SkipFirstOutput => 1,
    };
    accumulate_scatter(&mut scatter_y, y, &mean_y, skip);

    // (I-1)·Σx + (O-1)·Σy is just the summed scatter.
    let mut pooled = (scatter_x + scatter_y) / (ni + no - 2) as f64;
    for d in 0..m {
        pooled[(d, d)] += ridge;
    }

    let diff = mean_x - mean_y;
    if diff.iter().all(|&d| d == 0.0) {
        return Ok(0.0);
    }

    let eigen = SymmetricEigen::new(pooled);
    let max = eigen.eigenvalues.max();
    let min = eigen.eigenvalues.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= 1.0 / f64::EPSILON) {
        return Err(Error::SingularCovariance { condition });
    }
    let projected = eigen.eigenvectors.transpose() * &diff;
    let quad: f64 = projected
        .iter()
        .zip(eigen.eigenvalues.iter())
        .map(|(p, l)| p * p / l)
        .sum();
    let scale = (ni * no) as f64 / (ni + no) as f64;
    Ok((scale * quad).max(0.0))
}

fn column_means(v: SeriesView<'_>) -> DVector<f64> {
    let n = v.rows() as f64;
    DVector::from_iterator(v.dims(), (0..v.dims()).map(|j| v.column(j).sum::<f64>() / n))
}

fn accumulate_scatter(acc: &mut DMatrix<f64>, v: SeriesView<'_>, mean: &DVector<f64>, skip: usize) {
    let m = v.dims();
    for r in skip..v.rows() {
        let row = v.row(r);
        for a in 0..m {
            let da = row[a] - mean[a];
            for b in 0..m {
                acc[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
}

/// KPSS statistic of one sequence around an intercept-plus-trend fit.
///
/// Returns `(1/n²) Σ E_k² / σ²` where `E_k` are partial sums of the OLS
/// residuals and `σ²` their long-run variance. A sequence that lies on a line
/// (residual energy below `1e-24` of the signal energy) yields 0.
pub fn kpss_ld(window: &[f64], lrv: LongRunVariance) -> Result<f64> {
    let n = window.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let nf = n as f64;
    let k_mean = (nf - 1.0) / 2.0;
    let y_mean = window.iter().sum::<f64>() / nf;
    let sxx = nf * (nf * nf - 1.0) / 12.0;
    let sxy: f64 = window
        .iter()
        .enumerate()
        .map(|(k, &y)| (k as f64 - k_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;

    let residuals: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(k, &y)| (y - y_mean) - slope * (k as f64 - k_mean))
        .collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let energy: f64 = window.iter().map(|y| y * y).sum();
    if sse == 0.0 || sse <= 1e-24 * energy {
        return Ok(0.0);
    }

    let sigma2 = long_run_variance(&residuals, lrv);
    if !(sigma2 > 0.0) {
        return Ok(0.0);
    }
    let mut partial = 0.0;
    let mut acc = 0.0;
    for e in &residuals {
        partial += e;
        acc += partial * partial;
    }
    Ok((acc / (nf * nf * sigma2)).max(0.0))
}

fn long_run_variance(residuals: &[f64], lrv: LongRunVariance) -> f64 {
    let n = residuals.len();
    let autocov = |lag: usize| -> f64 {
        residuals[lag..]
            .iter()
            .zip(residuals)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    match lrv {
        LongRunVariance::Simple => autocov(0),
        LongRunVariance::NeweyWest { bandwidth } => {
            let lags = bandwidth.min(n - 1);
            let mut s = autocov(0);
            for lag in 1..=lags {
                let w = 1.0 - lag as f64 / (lags as f64 + 1.0);
                s += 2.0 * w * autocov(lag);
            }
            s
        }
    }
}

/// Per-window LD values over a training range.
#[derive(Debug, Clone, PartialEq)]
pub struct LdProfile {
    t_values: Vec<usize>,
    ld: Vec<f64>,
    dims: usize,
    metric: LdMetric,
    spec: WindowSpec,
}

impl LdProfile {
    /// Wraps precomputed values (`t_values.len() × dims`, row-major).
    pub fn from_parts(
        t_values: Vec<usize>,
        ld: Vec<f64>,
        dims: usize,
        metric: LdMetric,
        spec: WindowSpec,
    ) -> Result<Self> {
        if dims == 0 || ld.len() != t_values.len() * dims {
            return Err(Error::ShapeMismatch(format!(
                "{} LD values for {} windows of {} columns",
                ld.len(),
                t_values.len(),
                dims
            )));
        }
        if ld.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("LD values must be finite".into()));
        }
        Ok(LdProfile {
            t_values,
            ld,
            dims,
            metric,
            spec,
        })
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    /// Number of LD columns (`m` for Welch and KPSS, 1 for Hotelling).
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn t_values(&self) -> &[usize] {
        &self.t_values
    }

    pub fn metric(&self) -> LdMetric {
        self.metric
    }

    pub fn spec(&self) -> WindowSpec {
        self.spec
    }

    pub fn get(&self, window: usize, dim: usize) -> f64 {
        self.ld[window * self.dims + dim]
    }

    pub fn row(&self, window: usize) -> &[f64] {
        &self.ld[window * self.dims..(window + 1) * self.dims]
    }

    pub fn column(&self, dim: usize) -> Vec<f64> {
        self.ld.iter().skip(dim).step_by(self.dims).copied().collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.ld
    }
}

/// Applies `metric` to every window of `series`, in parallel, keeping `t` order.
pub fn ld_profile(series: &Series, spec: WindowSpec, metric: LdMetric) -> Result<LdProfile> {
    metric.validate()?;
    let windows = make_windows(series, spec)?;
    let dims = metric.output_dims(series.dims());
    let mut ld = vec![0.0; windows.len() * dims];
    ld.par_chunks_mut(dims)
        .enumerate()
        .try_for_each(|(i, out)| {
            let pair = windows.get(i);
            metric.evaluate(pair.x, pair.y, out)
        })?;
    LdProfile::from_parts(windows.t_values(), ld, dims, metric, spec)
}

/// Largest `|ld(t + period) - ld(t)|` over all comparable windows and columns.
pub fn periodicity_residual(profile: &LdProfile, period: usize) -> Result<f64> {
    let stride = profile.spec().stride;
    if period == 0 || !period.is_multiple_of(stride) {
        return Err(Error::InvalidParameter(format!(
            "period {period} must be a positive multiple of the stride {stride}"
        )));
    }
    let coverage = profile.len() * stride;
    if coverage < 2 * period {
        return Err(Error::InsufficientCoverage { period, coverage });
    }
    let shift = period / stride;
    let mut worst = 0.0f64;
    for i in 0..profile.len() - shift {
        for (a, b) in profile.row(i).iter().zip(profile.row(i + shift)) {
            worst = worst.max((b - a).abs());
        }
    }
    Ok(worst)
}

/// Largest shift of the windowed mean and population variance under a shift
/// of one period: `max_a |m(a+p) - m(a)|` and `max_a |s(a+p) - s(a)|`.
pub fn window_moment_residual(
    series: &Series,
    window_len: usize,
    period: usize,
) -> Result<(f64, f64)> {
    if window_len == 0 || period == 0 {
        return Err(Error::InvalidParameter("window and period must be positive".into()));
    }
    let needed = 2 * period + window_len;
    if series.len() < needed {
        return Err(Error::InsufficientCoverage {
            period,
            coverage: series.len().saturating_sub(window_len),
        });
    }
    let starts = series.len() - window_len + 1;
    let mut mean_res = 0.0f64;
    let mut var_res = 0.0f64;
    for j in 0..series.dims() {
        let column = series.column(j);
        let moments: Vec<(f64, f64)> = column
            .windows(window_len)
            .map(population_moments)
            .collect();
        debug_assert_eq!(moments.len(), starts);
        for a in 0..starts - period {
            let (m0, s0) = moments[a];
            let (m1, s1) = moments[a + period];
            mean_res = mean_res.max((m1 - m0).abs());
            var_res = var_res.max((s1 - s0).abs());
        }
    }
    Ok((mean_res, var_res))
}

fn population_moments(w: &[f64]) -> (f64, f64) {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(data: &[f64], dims: usize) -> SeriesView<'_> {
        SeriesView::new(data, data.len() / dims, dims)
    }

    #[test]
    fn welch_hand_example() {
        let v = welch_ld(view(&[0.0, 2.0], 1), view(&[4.0, 6.0], 1), 0.0).unwrap();
        assert!((v[0] + 4.0 / 2f64.sqrt()).abs() < 1e-12);
        let swapped = welch_ld(view(&[4.0, 6.0], 1), view(&[0.0, 2.0], 1), 0.0).unwrap();
        assert!((swapped[0] - 2.828427).abs() < 1e-6);
    }

    #[test]
    fn welch_constant_is_zero() {
        let v = welch_ld(view(&[3.0; 5], 1), view(&[3.0; 4], 1), DEFAULT_EPSILON).unwrap();
        assert_eq!(v, vec![0.0]);
    }

    #[test]
    fn welch_zero_variance_stays_finite() {
        let v = welch_ld(view(&[1.0; 4], 1), view(&[2.0; 4], 1), DEFAULT_EPSILON).unwrap();
        assert!(v[0].is_finite());
        assert!((v[0] + 1e4).abs() < 1e-6);
    }

    #[test]
    fn welch_needs_two_points() {
        assert!(welch_ld(view(&[1.0], 1), view(&[2.0, 3.0], 1), 0.0).is_err());
    }

    #[test]
    fn hotelling_univariate_matches_pooled_t() {
        let v = hotelling_ld(view(&[0.0, 2.0], 1), view(&[4.0, 6.0], 1), 0.0).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn hotelling_equal_means_is_zero() {
        let x = [0.0, 1.0, 2.0, 5.0, 4.0, -3.0];
        let y = [1.0, 3.0, 3.0, -1.0];
        assert_eq!(hotelling_ld(view(&x, 2), view(&y, 2), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn hotelling_singular_without_ridge() {
        // Second variable is constant, so the pooled covariance is rank one.
        let x = [0.0, 1.0, 2.0, 1.0, 4.0, 1.0];
        let y = [1.0, 1.0, 3.0, 1.0, 5.0, 1.0];
        let err = hotelling_ld(view(&x, 2), view(&y, 2), 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularCovariance { .. }));
        assert!(err.to_string().contains("ridge"));
        assert!(hotelling_ld(view(&x, 2), view(&y, 2), 1e-3).unwrap() > 0.0);
    }

    #[test]
    fn hotelling_skip_first_output_differs() {
        let x = [0.0, 0.3, 2.0, 0.1, 1.0, 0.9];
        let y = [4.0, 1.0, 6.0, 1.5, 3.0, 0.2];
        let all = hotelling_ld(view(&x, 2), view(&y, 2), 0.0).unwrap();
        let skip =
            hotelling_ld_with(view(&x, 2), view(&y, 2), 0.0, CovarianceIndexing::SkipFirstOutput)
                .unwrap();
        assert!(all > 0.0 && skip > 0.0);
        assert!((all - skip).abs() > 1e-6);
    }

    #[test]
    fn hotelling_needs_enough_points() {
        let x = [0.0, 1.0, 2.0, 1.0, 2.0, 3.0];
        let y = [1.0, 0.0, 3.0, 1.0, 5.0, 2.0];
        assert!(matches!(
            hotelling_ld(view(&x, 3), view(&y, 3), 1.0),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn kpss_on_line_is_zero() {
        let w: Vec<f64> = (0..10).map(|k| 1.5 + 0.3 * k as f64).collect();
        assert_eq!(kpss_ld(&w, LongRunVariance::Simple).unwrap(), 0.0);
        assert_eq!(kpss_ld(&[0.1; 7], LongRunVariance::Simple).unwrap(), 0.0);
        assert!(kpss_ld(&[1.0, 2.0], LongRunVariance::Simple).is_err());
    }

    #[test]
    fn kpss_newey_west_nonnegative() {
        let w = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 0.5, 2.0];
        for bw in [0, 1, 3, 50] {
            let v = kpss_ld(&w, LongRunVariance::NeweyWest { bandwidth: bw }).unwrap();
            assert!(v >= 0.0 && v.is_finite());
        }
        // Bandwidth 0 collapses to the simple estimator.
        assert_eq!(
            kpss_ld(&w, LongRunVariance::NeweyWest { bandwidth: 0 }).unwrap(),
            kpss_ld(&w, LongRunVariance::Simple).unwrap()
        );
    }

    #[test]
    fn profile_shape_and_order() {
        let s = Series::from_rows((0..40).map(|v| (v as f64 * 0.7).sin()).collect(), 2).unwrap();
        let spec = WindowSpec::new(4, 3).unwrap();
        for metric in [LdMetric::welch(), LdMetric::kpss(), LdMetric::hotelling()] {
            let p = ld_profile(&s, spec, metric).unwrap();
            assert_eq!(p.len(), 14);
            assert_eq!(p.t_values(), &(4..18).collect::<Vec<_>>()[..]);
            assert_eq!(p.dims(), metric.output_dims(2));
        }
    }

    #[test]
    fn constant_series_profile_is_zero() {
        let s = Series::univariate(vec![2.5; 50]).unwrap();
        let p = ld_profile(&s, WindowSpec::new(5, 5).unwrap(), LdMetric::welch()).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
        assert_eq!(periodicity_residual(&p, 7).unwrap(), 0.0);
    }

    #[test]
    fn invalid_metric_rejected() {
        let s = Series::univariate(vec![2.5; 50]).unwrap();
        let spec = WindowSpec::new(5, 5).unwrap();
        assert!(ld_profile(&s, spec, LdMetric::WelchT { epsilon: 0.0 }).is_err());
        let bad = LdMetric::HotellingT2 {
            ridge: -1.0,
            indexing: CovarianceIndexing::AllPoints,
        };
        assert!(ld_profile(&s, spec, bad).is_err());
    }

    #[test]
    fn periodicity_residual_errors() {
        let s = Series::univariate((0..40).map(|v| v as f64).collect()).unwrap();
        let p = ld_profile(&s, WindowSpec::with_stride(3, 3, 2).unwrap(), LdMetric::welch())
            .unwrap();
        assert!(periodicity_residual(&p, 3).is_err());
        assert!(matches!(
            periodicity_residual(&p, 40),
            Err(Error::InsufficientCoverage { .. })
        ));
    }

    #[test]
    fn moment_residual_cases() {
        let s = Series::univariate(vec![4.0; 200]).unwrap();
        assert_eq!(window_moment_residual(&s, 32, 64).unwrap(), (0.0, 0.0));

        let slope = 0.25;
        let s = Series::univariate((0..400).map(|t| slope * t as f64).collect()).unwrap();
        let (mean_res, var_res) = window_moment_residual(&s, 32, 64).unwrap();
        assert!((mean_res - slope * 64.0).abs() < 1e-9);
        assert!(var_res < 1e-9);

        assert!(window_moment_residual(&s, 300, 64).is_err());
    }
}
