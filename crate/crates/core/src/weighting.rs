//! Loss weights from an LD profile.
//!
//! ReLD bins each LD column into an equal-width histogram, smooths the counts
//! with a discrete Gaussian kernel and gives every window a weight
//! proportional to the smoothed density of its own bin. Windows whose LD is
//! common get large weights; rare LD values (abrupt changes) get small ones.
//! The invLD ablation skips the density and uses `1 / (|v| + 1)` directly.
//!
//! All schemes are normalized so each column has mean weight 1.

use rayon::prelude::*;

use crate::discrepancy::LdProfile;
use crate::error::{Error, Result};

pub const DEFAULT_NUM_BINS: usize = 200;
pub const DEFAULT_KERNEL_SIZE: usize = 5;
pub const DEFAULT_KERNEL_SIGMA: f64 = 2.0;
/// Smallest bin width, in LD units, used when the LD range is very narrow.
pub const DEFAULT_MIN_BIN_WIDTH: f64 = 1e-3;
/// Lower clamp applied to normalized weights.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// Equal-width histogram of LD values.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn num_bins(&self) -> usize {
        self.counts.len()
    }

    /// `num_bins + 1` ascending edges.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bin index of `value`; values outside the range clamp to the end bins.
    pub fn bin_of(&self, value: f64) -> usize {
        bin_index(value, self.edges[0], self.bin_width(), self.num_bins())
    }
}

fn bin_index(value: f64, lo: f64, width: f64, bins: usize) -> usize {
    let pos = ((value - lo) / width).floor();
    if pos <= 0.0 {
        0
    } else {
        (pos as usize).min(bins - 1)
    }
}

/// Bins `ld` into `num_bins` equal-width bins over `[min, max]`.
///
/// The right edge of the last bin is inclusive. When the range is narrower
/// than `num_bins * DEFAULT_MIN_BIN_WIDTH` the bins are widened around the
/// midpoint, so near-identical LD values share a bin.
pub fn build_histogram(ld: &[f64], num_bins: usize) -> Result<Histogram> {
    build_histogram_with(ld, num_bins, DEFAULT_MIN_BIN_WIDTH)
}

/// [`build_histogram`] with an explicit minimum bin width (`0` disables it).
pub fn build_histogram_with(ld: &[f64], num_bins: usize, min_bin_width: f64) -> Result<Histogram> {
    if ld.is_empty() {
        return Err(Error::EmptyInput("no LD values to bin".into()));
    }
    if num_bins == 0 {
        return Err(Error::InvalidParameter("num_bins must be positive".into()));
    }
    if !(min_bin_width >= 0.0 && min_bin_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "min_bin_width must be non-negative, got {min_bin_width}"
        )));
    }
    if ld.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("LD values must be finite".into()));
    }
    let (min, max) = ld
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let bins = num_bins as f64;
    let (lo, width) = if max - min >= bins * min_bin_width && max > min {
        (min, (max - min) / bins)
    } else if min_bin_width > 0.0 {
        // Centre the data in the middle bin.
        let width = min_bin_width;
        let centre_bin = (num_bins / 2) as f64 + 0.5;
        (0.5 * (min + max) - centre_bin * width, width)
    } else {
        // Degenerate range: everything lands in bin 0.
        (min, 1.0)
    };

    let mut edges: Vec<f64> = (0..=num_bins).map(|b| lo + b as f64 * width).collect();
    if max - min >= bins * min_bin_width && max > min {
        edges[num_bins] = max;
    }
    let mut counts = vec![0u64; num_bins];
    for &v in ld {
        counts[bin_index(v, lo, width, num_bins)] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// How the kernel is treated where it overhangs the histogram range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeMode {
    /// Mass falling outside the range is dropped.
    #[default]
    ZeroPad,
    /// The in-range part of the kernel is rescaled to sum to 1.
    Renormalize,
}

/// Discrete Gaussian smoothing kernel, in bin units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub size: usize,
    pub sigma: f64,
    pub edge_mode: EdgeMode,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            size: DEFAULT_KERNEL_SIZE,
            sigma: DEFAULT_KERNEL_SIGMA,
            edge_mode: EdgeMode::ZeroPad,
        }
    }
}

impl KernelSpec {
    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        let k = KernelSpec {
            size,
            sigma,
            edge_mode: EdgeMode::ZeroPad,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be odd and positive, got {}",
                self.size
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Normalized symmetric weights, index `half + i` for offset `i`.
    pub fn weights(&self) -> Vec<f64> {
        let half = (self.size / 2) as i64;
        let raw: Vec<f64> = (-half..=half)
            .map(|i| (-((i * i) as f64) / (2.0 * self.sigma * self.sigma)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// Kernel-smoothed histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    histogram: Histogram,
    density: Vec<f64>,
    kernel: KernelSpec,
}

impl DensityEstimate {
    pub fn histogram(&self) -> &Histogram {
        &self.histogram
    }

    pub fn edges(&self) -> &[f64] {
        self.histogram.edges()
    }

    pub fn counts(&self) -> &[u64] {
        self.histogram.counts()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// Smoothed density of the bin containing `value`.
    pub fn density_at(&self, value: f64) -> f64 {
        self.density[self.histogram.bin_of(value)]
    }
}

/// Convolves the histogram counts with the kernel. The output is not
/// renormalized.
pub fn smooth_density(hist: &Histogram, kernel: KernelSpec) -> Result<DensityEstimate> {
    kernel.validate()?;
    let w = kernel.weights();
    let half = (kernel.size / 2) as isize;
    let n = hist.num_bins() as isize;
    let density = (0..n)
        .map(|b| {
            let mut acc = 0.0;
            let mut mass = 0.0;
            for i in -half..=half {
                let src = b - i;
                if (0..n).contains(&src) {
                    let k = w[(i + half) as usize];
                    acc += k * hist.counts[src as usize] as f64;
                    mass += k;
                }
            }
            match kernel.edge_mode {
                EdgeMode::ZeroPad => acc,
                EdgeMode::Renormalize => acc / mass,
            }
        })
        .collect();
    Ok(DensityEstimate {
        histogram: hist.clone(),
        density,
        kernel,
    })
}

/// Settings for ReLD weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReldConfig {
    pub num_bins: usize,
    pub kernel: KernelSpec,
    pub min_bin_width: f64,
}

impl Default for ReldConfig {
    fn default() -> Self {
        ReldConfig {
            num_bins: DEFAULT_NUM_BINS,
            kernel: KernelSpec::default(),
            min_bin_width: DEFAULT_MIN_BIN_WIDTH,
        }
    }
}

impl ReldConfig {
    pub fn with_bins(num_bins: usize) -> Self {
        ReldConfig {
            num_bins,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    Uniform,
    Reld,
    InvLd,
}

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Uniform => "uniform",
            WeightScheme::Reld => "reld",
            WeightScheme::InvLd => "invld",
        }
    }
}

/// Per-window, per-column loss weights with mean 1 in every column.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    t_values: Vec<usize>,
    weights: Vec<f64>,
    dims: usize,
    scaling: Vec<f64>,
    scheme: WeightScheme,
}

impl WeightTable {
    /// All-ones weights.
    pub fn uniform(t_values: Vec<usize>, dims: usize) -> Self {
        let n = t_values.len();
        WeightTable {
            t_values,
            weights: vec![1.0; n * dims],
            dims,
            scaling: vec![1.0; dims],
            scheme: WeightScheme::Uniform,
        }
    }

    /// Normalizes `raw` (`t_values.len() × dims`, row-major) to mean one.
    pub fn from_raw(
        t_values: Vec<usize>,
        raw: &[f64],
        dims: usize,
        scheme: WeightScheme,
    ) -> Result<Self> {
        if dims == 0 || raw.len() != t_values.len() * dims {
            return Err(Error::ShapeMismatch(format!(
                "{} raw weights for {} windows of {} columns",
                raw.len(),
                t_values.len(),
                dims
            )));
        }
        let (weights, scaling) = normalize_weights(raw, dims)?;
        Ok(WeightTable {
            t_values,
            weights,
            dims,
            scaling,
            scheme,
        })
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn t_values(&self) -> &[usize] {
        &self.t_values
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    /// Per-column scaling constant `c`.
    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, window: usize, dim: usize) -> f64 {
        self.weights[window * self.dims + dim]
    }

    pub fn row(&self, window: usize) -> &[f64] {
        &self.weights[window * self.dims..(window + 1) * self.dims]
    }

    pub fn column(&self, dim: usize) -> Vec<f64> {
        self.weights.iter().skip(dim).step_by(self.dims).copied().collect()
    }

    /// Weight vector for an `m`-variate loss; a single column is broadcast.
    pub fn weights_for(&self, window: usize, m: usize) -> Result<Vec<f64>> {
        if self.dims == m {
            Ok(self.row(window).to_vec())
        } else if self.dims == 1 {
            Ok(vec![self.get(window, 0); m])
        } else {
            Err(Error::ShapeMismatch(format!(
                "{} weight columns cannot serve {} variables",
                self.dims, m
            )))
        }
    }

    /// Returns a copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= factor);
        out.scaling.iter_mut().for_each(|c| *c *= factor);
        out
    }
}

/// Rescales every column of `raw` to mean one: `c = N / Σ raw`, `w = max(c·raw, 1e-6)`.
///
/// Returns the weights and the per-column `c`. A column of identical values
/// becomes exactly 1.
pub fn normalize_weights(raw: &[f64], dims: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if dims == 0 || !raw.len().is_multiple_of(dims) || raw.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} raw weights in {} columns",
            raw.len(),
            dims
        )));
    }
    if let Some(v) = raw.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "raw weights must be finite and non-negative, got {v}"
        )));
    }
    let n = raw.len() / dims;
    let mut weights = vec![0.0; raw.len()];
    let mut scaling = Vec::with_capacity(dims);
    for j in 0..dims {
        let column = raw.iter().skip(j).step_by(dims);
        let total: f64 = column.clone().sum();
        if total == 0.0 {
            return Err(Error::ZeroWeightColumn { dim: j });
        }
        let first = raw[j];
        let constant = column.clone().all(|&v| v == first);
        let c = if constant { 1.0 / first } else { n as f64 / total };
        for (i, &r) in column.enumerate() {
            weights[i * dims + j] = if constant { 1.0 } else { (c * r).max(WEIGHT_FLOOR) };
        }
        scaling.push(c);
    }
    Ok((weights, scaling))
}

/// Per-column smoothed LD densities.
pub fn ld_densities(profile: &LdProfile, cfg: &ReldConfig) -> Result<Vec<DensityEstimate>> {
    if profile.is_empty() {
        return Err(Error::EmptyInput("LD profile has no windows".into()));
    }
    cfg.kernel.validate()?;
    (0..profile.dims())
        .into_par_iter()
        .map(|j| {
            let column = profile.column(j);
            let hist = build_histogram_with(&column, cfg.num_bins, cfg.min_bin_width)?;
            smooth_density(&hist, cfg.kernel)
        })
        .collect()
}

/// ReLD weights and the densities they were read from.
pub fn reld(profile: &LdProfile, cfg: &ReldConfig) -> Result<(WeightTable, Vec<DensityEstimate>)> {
    let densities = ld_densities(profile, cfg)?;
    let dims = profile.dims();
    let mut raw = vec![0.0; profile.len() * dims];
    for (i, row) in raw.chunks_mut(dims).enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = densities[j].density_at(profile.get(i, j));
        }
    }
    let table = WeightTable::from_raw(profile.t_values().to_vec(), &raw, dims, WeightScheme::Reld)?;
    Ok((table, densities))
}

/// Weights proportional to the smoothed LD density of each window's bin.
pub fn reld_weights(profile: &LdProfile, num_bins: usize, kernel: KernelSpec) -> Result<WeightTable> {
    let cfg = ReldConfig {
        num_bins,
        kernel,
        ..ReldConfig::default()
    };
    reld(profile, &cfg).map(|(table, _)| table)
}

/// Weights proportional to `1 / (|v| + 1)`.
pub fn invld_weights(profile: &LdProfile) -> Result<WeightTable> {
    if profile.is_empty() {
        return Err(Error::EmptyInput("LD profile has no windows".into()));
    }
    let raw: Vec<f64> = profile.values().iter().map(|v| 1.0 / (v.abs() + 1.0)).collect();
    WeightTable::from_raw(
        profile.t_values().to_vec(),
        &raw,
        profile.dims(),
        WeightScheme::InvLd,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::LdMetric;
    use crate::series::WindowSpec;

    fn profile(values: Vec<f64>, dims: usize) -> LdProfile {
        let n = values.len() / dims;
        LdProfile::from_parts(
            (0..n).map(|i| i + 2).collect(),
            values,
            dims,
            LdMetric::welch(),
            WindowSpec::new(2, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn histogram_degenerate_range() {
        let h = build_histogram(&[5.0, 5.0, 5.0], 200).unwrap();
        assert_eq!(h.num_bins(), 200);
        assert_eq!(h.counts().iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.total(), 3);

        let h = build_histogram_with(&[5.0, 5.0, 5.0], 10, 0.0).unwrap();
        assert_eq!(h.counts()[0], 3);
    }

    #[test]
    fn histogram_right_edge_rule() {
        let h = build_histogram(&[0.0, 1.0, 2.0, 3.0], 4).unwrap();
        assert_eq!(h.counts(), &[1, 1, 1, 1]);
        assert_eq!(h.edges(), &[0.0, 0.75, 1.5, 2.25, 3.0]);
    }

    #[test]
    fn histogram_narrow_range_is_widened() {
        let h = build_histogram(&[1.0, 1.0 + 1e-6, 1.0 + 2e-6], 200).unwrap();
        assert!((h.bin_width() - DEFAULT_MIN_BIN_WIDTH).abs() < 1e-15);
        assert_eq!(h.counts().iter().filter(|&&c| c > 0).count(), 1);
        assert!(h.edges()[0] < 1.0 && *h.edges().last().unwrap() > 1.0 + 2e-6);
    }

    #[test]
    fn histogram_errors() {
        assert!(build_histogram(&[], 10).is_err());
        assert!(build_histogram(&[1.0], 0).is_err());
        assert!(build_histogram(&[f64::NAN], 3).is_err());
    }

    #[test]
    fn kernel_weights_symmetric_and_normalized() {
        let w = KernelSpec::default().weights();
        assert_eq!(w.len(), 5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(w[0], w[4]);
        assert_eq!(w[1], w[3]);
        assert!(KernelSpec::gaussian(4, 1.0).is_err());
        assert!(KernelSpec::gaussian(3, 0.0).is_err());
    }

    #[test]
    fn impulse_response() {
        let mut counts = vec![0u64; 11];
        counts[5] = 1;
        let h = Histogram {
            edges: (0..=11).map(f64::from).collect(),
            counts,
        };
        let d = smooth_density(&h, KernelSpec::default()).unwrap();
        let w = KernelSpec::default().weights();
        assert_eq!(&d.density()[3..8], &w[..]);
        assert_eq!(d.density().iter().filter(|&&v| v > 0.0).count(), 5);
        let peak = d.density().iter().cloned().fold(0.0, f64::max);
        assert_eq!(d.density()[5], peak);
    }

    #[test]
    fn identity_kernel() {
        let h = build_histogram(&[0.0, 0.1, 0.1, 3.0, 2.2], 7).unwrap();
        let d = smooth_density(&h, KernelSpec::gaussian(1, 2.0).unwrap()).unwrap();
        let counts: Vec<f64> = h.counts().iter().map(|&c| c as f64).collect();
        assert_eq!(d.density(), &counts[..]);
    }

    #[test]
    fn three_bin_convolution() {
        let h = Histogram {
            edges: vec![0.0, 1.0, 2.0, 3.0],
            counts: vec![0, 4, 0],
        };
        let d = smooth_density(&h, KernelSpec::gaussian(3, 1.0).unwrap()).unwrap();
        let total = 1.0 + 2.0 * (-0.5f64).exp();
        let side = 4.0 * (-0.5f64).exp() / total;
        let centre = 4.0 / total;
        let expect = [side, centre, side];
        for (a, b) in d.density().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn renormalized_edges_keep_mass() {
        let h = Histogram {
            edges: vec![0.0, 1.0, 2.0, 3.0],
            counts: vec![4, 0, 0],
        };
        let zero = smooth_density(&h, KernelSpec::gaussian(3, 1.0).unwrap()).unwrap();
        let kernel = KernelSpec {
            edge_mode: EdgeMode::Renormalize,
            ..KernelSpec::gaussian(3, 1.0).unwrap()
        };
        let renorm = smooth_density(&h, kernel).unwrap();
        assert!(renorm.density()[0] > zero.density()[0]);
    }

    #[test]
    fn normalize_examples() {
        let (w, c) = normalize_weights(&[2.0, 2.0, 2.0], 1).unwrap();
        assert_eq!(w, vec![1.0, 1.0, 1.0]);
        assert_eq!(c, vec![0.5]);

        let (w, c) = normalize_weights(&[1.0, 3.0], 1).unwrap();
        assert_eq!(w, vec![0.5, 1.5]);
        assert_eq!(c, vec![0.5]);

        let (w, c) = normalize_weights(&[0.0, 1.0, 3.0], 1).unwrap();
        assert_eq!(w[0], WEIGHT_FLOOR);
        assert_eq!(c, vec![0.75]);
        assert_eq!(&w[1..], &[0.75, 2.25]);

        assert!(matches!(
            normalize_weights(&[1.0, 0.0, 2.0, 0.0], 2),
            Err(Error::ZeroWeightColumn { dim: 1 })
        ));
    }

    #[test]
    fn invld_example() {
        let w = invld_weights(&profile(vec![0.0, 1.0, 3.0], 1)).unwrap();
        let expect = [12.0 / 7.0, 6.0 / 7.0, 3.0 / 7.0];
        for (a, b) in w.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = invld_weights(&profile(vec![0.0; 4], 1)).unwrap();
        assert!(zero.values().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn reld_constant_profile_is_uniform() {
        let w = reld_weights(&profile(vec![0.3; 50], 1), 200, KernelSpec::default()).unwrap();
        assert!(w.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn reld_two_clusters() {
        let mut ld = Vec::new();
        for i in 0..95 {
            ld.push(0.001 * (i % 5) as f64);
        }
        for i in 0..5 {
            ld.push(10.0 + 0.001 * i as f64);
        }
        let p = profile(ld, 1);
        let cfg = ReldConfig::default();
        let (w, dens) = reld(&p, &cfg).unwrap();
        let d_normal = dens[0].density_at(0.0);
        let d_abrupt = dens[0].density_at(10.0);
        let ratio = w.get(0, 0) / w.get(99, 0);
        assert!((ratio - d_normal / d_abrupt).abs() < 1e-9 * ratio);
        assert!(w.get(99, 0) < 1.0 && w.get(0, 0) > 1.0);
        // 95 windows in the lowest bin, 5 in the highest: w0 = 95 / k0, etc.
        let w0 = KernelSpec::default().weights()[2];
        assert!((d_normal - 95.0 * w0).abs() < 1e-9);
        assert!((d_abrupt - 5.0 * w0).abs() < 1e-9);
    }

    #[test]
    fn hotelling_weights_broadcast() {
        let w = WeightTable::from_raw(vec![3, 4], &[1.0, 3.0], 1, WeightScheme::Reld).unwrap();
        assert_eq!(w.weights_for(1, 3).unwrap(), vec![1.5; 3]);
        let w2 = WeightTable::uniform(vec![3, 4], 2);
        assert!(w2.weights_for(0, 3).is_err());
    }
}
