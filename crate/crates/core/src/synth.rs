//! Labeled synthetic series: periodic signals with injected abrupt changes,
//! and rectangular pulse trains with optional removed pulses.
//!
//! All randomness comes from a ChaCha8 generator seeded with
//! `seed_from_u64(seed)`; Gaussian noise is drawn with `rand_distr::Normal`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::{Series, WindowSpec};

/// Identifier of the pseudorandom generator behind every seeded routine.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64";

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One sinusoidal component: `amplitude · sin(2π·multiplier·t/p + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub multiplier: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpec {
    pub length: usize,
    /// Base period in samples.
    pub period: usize,
    pub components: Vec<Harmonic>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl PeriodicSpec {
    /// Single noise-free sine of the given amplitude.
    pub fn sine(length: usize, period: usize, amplitude: f64) -> Self {
        PeriodicSpec {
            length,
            period,
            components: vec![Harmonic {
                multiplier: 1.0,
                amplitude,
                phase: 0.0,
            }],
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    pub fn with_component(mut self, multiplier: f64, amplitude: f64, phase: f64) -> Self {
        self.components.push(Harmonic {
            multiplier,
            amplitude,
            phase,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.period < 2 {
            return Err(Error::InvalidParameter("period must be >= 2".into()));
        }
        if self.length < 2 * self.period {
            return Err(Error::InvalidParameter(format!(
                "length {} must cover at least two periods of {}",
                self.length, self.period
            )));
        }
        if self.components.is_empty() {
            return Err(Error::InvalidParameter("at least one component is required".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter("noise sigma must be non-negative".into()));
        }
        Ok(())
    }

    /// Sum of component amplitudes, a bound on the noise-free signal.
    pub fn peak(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude.abs()).sum()
    }

    /// Noise-free value at time `t` with the period scaled by `1 / freq_scale`.
    fn clean(&self, t: usize, freq_scale: f64) -> f64 {
        let p = self.period as f64;
        self.components
            .iter()
            .map(|c| c.amplitude * (2.0 * PI * c.multiplier * freq_scale * t as f64 / p + c.phase).sin())
            .sum()
    }
}

/// Sum of sinusoids plus seeded Gaussian noise.
pub fn gen_periodic(spec: &PeriodicSpec) -> Result<Series> {
    spec.validate()?;
    let mut values: Vec<f64> = (0..spec.length).map(|t| spec.clean(t, 1.0)).collect();
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = rng(spec.seed);
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(Series::univariate(values)?.with_name("periodic"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbruptKind {
    /// Adds `magnitude` at a single index.
    Fluke,
    /// Re-synthesizes the interval with the period divided by `|magnitude|`.
    FrequencyChange,
    /// Adds `magnitude` to every index from `start` on.
    TrendShift,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbruptEvent {
    pub kind: AbruptKind,
    pub start: usize,
    pub duration: usize,
    pub magnitude: f64,
}

impl AbruptEvent {
    pub fn fluke(at: usize, magnitude: f64) -> Self {
        AbruptEvent {
            kind: AbruptKind::Fluke,
            start: at,
            duration: 1,
            magnitude,
        }
    }

    pub fn frequency_change(start: usize, duration: usize, multiplier: f64) -> Self {
        AbruptEvent {
            kind: AbruptKind::FrequencyChange,
            start,
            duration,
            magnitude: multiplier,
        }
    }

    pub fn trend_shift(at: usize, magnitude: f64) -> Self {
        AbruptEvent {
            kind: AbruptKind::TrendShift,
            start: at,
            duration: 1,
            magnitude,
        }
    }

    /// Indices labeled abrupt: the modified interval, or the transition
    /// index for a trend shift.
    fn labeled_range(&self) -> std::ops::Range<usize> {
        match self.kind {
            AbruptKind::Fluke | AbruptKind::TrendShift => self.start..self.start + 1,
            AbruptKind::FrequencyChange => self.start..self.start + self.duration,
        }
    }
}

/// A series with per-row abrupt-change labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub series: Series,
    pub mask: Vec<bool>,
}

impl LabeledSeries {
    pub fn new(series: Series, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != series.len() {
            return Err(Error::ShapeMismatch(format!(
                "mask of length {} for series of length {}",
                mask.len(),
                series.len()
            )));
        }
        Ok(LabeledSeries { series, mask })
    }

    pub fn unlabeled(series: Series) -> Self {
        let mask = vec![false; series.len()];
        LabeledSeries { series, mask }
    }

    /// Rows `[start, end)` with their labels.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        LabeledSeries::new(self.series.slice(start, end)?, self.mask[start..end].to_vec())
    }
}

/// Applies `events` to a series generated from `base`.
///
/// Flukes and trend shifts add to the existing values, so noise is kept. A
/// frequency change swaps the clean periodic part for the faster one and also
/// keeps the noise.
pub fn inject_abrupt(
    series: &Series,
    base: &PeriodicSpec,
    events: &[AbruptEvent],
) -> Result<LabeledSeries> {
    let len = series.len();
    let mut claimed = vec![false; len];
    for ev in events {
        if ev.duration == 0 {
            return Err(Error::InvalidParameter("event duration must be positive".into()));
        }
        if ev.kind == AbruptKind::FrequencyChange && !(ev.magnitude.abs() > 0.0) {
            return Err(Error::InvalidParameter("frequency multiplier must be non-zero".into()));
        }
        let range = ev.labeled_range();
        if range.end > len {
            return Err(Error::InvalidParameter(format!(
                "event {:?} at {} extends past the series end {}",
                ev.kind, ev.start, len
            )));
        }
        for i in range {
            if claimed[i] {
                return Err(Error::OverlappingEvents { index: i });
            }
            claimed[i] = true;
        }
    }

    let dims = series.dims();
    let mut values = series.values().to_vec();
    let mut mask = vec![false; len];
    for ev in events {
        match ev.kind {
            AbruptKind::Fluke => {
                for v in &mut values[ev.start * dims..(ev.start + 1) * dims] {
                    *v += ev.magnitude;
                }
            }
            AbruptKind::FrequencyChange => {
                let scale = ev.magnitude.abs();
                for t in ev.start..ev.start + ev.duration {
                    let delta = base.clean(t, scale) - base.clean(t, 1.0);
                    for v in &mut values[t * dims..(t + 1) * dims] {
                        *v += delta;
                    }
                }
            }
            AbruptKind::TrendShift => {
                for v in &mut values[ev.start * dims..] {
                    *v += ev.magnitude;
                }
            }
        }
        for i in ev.labeled_range() {
            mask[i] = true;
        }
    }
    let out = Series::from_rows(values, dims)?.with_name(series.name());
    LabeledSeries::new(out, mask)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectSpec {
    pub length: usize,
    pub period: usize,
    /// Fraction of each period spent high.
    pub duty: f64,
    pub amplitude: f64,
    /// Amplitude multiplier applied once per period.
    pub amplitude_growth: f64,
    pub broken: bool,
    pub removal_prob: f64,
    pub seed: u64,
}

impl RectSpec {
    pub fn normal(length: usize, period: usize, amplitude_growth: f64) -> Self {
        RectSpec {
            length,
            period,
            duty: 0.5,
            amplitude: 1.0,
            amplitude_growth,
            broken: false,
            removal_prob: 0.0,
            seed: 0,
        }
    }

    pub fn broken(mut self, removal_prob: f64, seed: u64) -> Self {
        self.broken = true;
        self.removal_prob = removal_prob;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.period < 2 || self.length == 0 {
            return Err(Error::InvalidParameter("period must be >= 2 and length positive".into()));
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::InvalidParameter(format!("duty must be in (0, 1), got {}", self.duty)));
        }
        if !(0.0..=1.0).contains(&self.removal_prob) {
            return Err(Error::InvalidParameter(format!(
                "removal probability must be in [0, 1], got {}",
                self.removal_prob
            )));
        }
        if !(self.amplitude_growth >= 1.0 && self.amplitude_growth.is_finite()) {
            return Err(Error::InvalidParameter("amplitude growth must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of high samples at the start of each period.
    pub fn high_len(&self) -> usize {
        ((self.duty * self.period as f64).round() as usize).clamp(1, self.period - 1)
    }
}

/// Pulse train; with `broken`, each pulse is flattened with probability
/// `removal_prob` and its interval labeled.
pub fn gen_rect(spec: &RectSpec) -> Result<LabeledSeries> {
    spec.validate()?;
    let high = spec.high_len();
    let mut rng = rng(spec.seed);
    let mut values = vec![0.0; spec.length];
    let mut mask = vec![false; spec.length];
    let mut amplitude = spec.amplitude;
    for (k, start) in (0..spec.length).step_by(spec.period).enumerate() {
        if k > 0 {
            amplitude *= spec.amplitude_growth;
        }
        let end = (start + high).min(spec.length);
        let removed = spec.broken && rng.random::<f64>() < spec.removal_prob;
        for t in start..end {
            if removed {
                mask[t] = true;
            } else {
                values[t] = amplitude;
            }
        }
    }
    let name = if spec.broken { "rect-broken" } else { "rect-normal" };
    LabeledSeries::new(Series::univariate(values)?.with_name(name), mask)
}

/// A window is abrupt iff its output rows `[t, t + O)` contain a labeled row.
pub fn window_labels(labeled: &LabeledSeries, spec: WindowSpec) -> Result<Vec<bool>> {
    spec.validate()?;
    let n = spec.count(labeled.series.len());
    if n == 0 {
        return Err(Error::SeriesTooShort {
            len: labeled.series.len(),
            input_len: spec.input_len,
            output_len: spec.output_len,
        });
    }
    let mut prefix = vec![0usize; labeled.mask.len() + 1];
    for (i, &m) in labeled.mask.iter().enumerate() {
        prefix[i + 1] = prefix[i] + usize::from(m);
    }
    Ok((0..n)
        .map(|i| {
            let t = spec.input_len + i * spec.stride;
            prefix[t + spec.output_len] > prefix[t]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_repeats_and_is_bounded() {
        let spec = PeriodicSpec::sine(256, 64, 2.0).with_component(3.0, 0.5, 0.3);
        let s = gen_periodic(&spec).unwrap();
        assert!((s.get(0, 0) - s.get(64, 0)).abs() < 1e-12);
        assert!(s.values().iter().all(|v| v.abs() <= spec.peak() + 1e-12));
    }

    #[test]
    fn periodic_is_seeded() {
        let spec = PeriodicSpec::sine(300, 20, 1.0).with_noise(0.3, 11);
        assert_eq!(gen_periodic(&spec).unwrap(), gen_periodic(&spec).unwrap());
        let other = PeriodicSpec::sine(300, 20, 1.0).with_noise(0.3, 12);
        assert_ne!(gen_periodic(&spec).unwrap(), gen_periodic(&other).unwrap());
    }

    #[test]
    fn periodic_validation() {
        assert!(gen_periodic(&PeriodicSpec::sine(100, 1, 1.0)).is_err());
        assert!(gen_periodic(&PeriodicSpec::sine(100, 60, 1.0)).is_err());
    }

    fn zero_base() -> (Series, PeriodicSpec) {
        let spec = PeriodicSpec::sine(40, 10, 0.0);
        (gen_periodic(&spec).unwrap(), spec)
    }

    #[test]
    fn fluke_and_shift_on_zero_series() {
        let (s, base) = zero_base();
        let l = inject_abrupt(&s, &base, &[AbruptEvent::fluke(7, 0.0)]).unwrap();
        assert_eq!(l.series, s);
        assert_eq!(l.mask.iter().filter(|&&m| m).count(), 1);

        let l = inject_abrupt(&s, &base, &[AbruptEvent::fluke(7, 10.0)]).unwrap();
        for t in 0..40 {
            assert_eq!(l.series.get(t, 0), if t == 7 { 10.0 } else { 0.0 });
        }

        let l = inject_abrupt(&s, &base, &[AbruptEvent::trend_shift(12, 3.0)]).unwrap();
        for t in 0..40 {
            assert_eq!(l.series.get(t, 0), if t >= 12 { 3.0 } else { 0.0 });
        }
        assert!(l.mask[12] && l.mask.iter().filter(|&&m| m).count() == 1);
    }

    #[test]
    fn frequency_change_rewrites_interval() {
        let base = PeriodicSpec::sine(200, 20, 1.0);
        let s = gen_periodic(&base).unwrap();
        let l = inject_abrupt(&s, &base, &[AbruptEvent::frequency_change(50, 30, 2.0)]).unwrap();
        for t in 50..80 {
            let expect = (2.0 * PI * 2.0 * t as f64 / 20.0).sin();
            assert!((l.series.get(t, 0) - expect).abs() < 1e-12);
            assert!(l.mask[t]);
        }
        assert_eq!(l.series.get(49, 0), s.get(49, 0));
        assert_eq!(l.series.get(80, 0), s.get(80, 0));
    }

    #[test]
    fn overlapping_events_rejected() {
        let (s, base) = zero_base();
        let events = [AbruptEvent::frequency_change(5, 10, 2.0), AbruptEvent::fluke(8, 1.0)];
        assert!(matches!(
            inject_abrupt(&s, &base, &events),
            Err(Error::OverlappingEvents { index: 8 })
        ));
        assert!(inject_abrupt(&s, &base, &[AbruptEvent::fluke(40, 1.0)]).is_err());
    }

    #[test]
    fn square_wave() {
        let l = gen_rect(&RectSpec::normal(40, 10, 1.0)).unwrap();
        assert!(l.mask.iter().all(|&m| !m));
        for t in 0..40 {
            assert_eq!(l.series.get(t, 0), if t % 10 < 5 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn rect_growth() {
        let l = gen_rect(&RectSpec::normal(30, 10, 2.0)).unwrap();
        assert_eq!(l.series.get(0, 0), 1.0);
        assert_eq!(l.series.get(10, 0), 2.0);
        assert_eq!(l.series.get(24, 0), 4.0);
    }

    #[test]
    fn rect_removal_limits() {
        let normal = gen_rect(&RectSpec::normal(100, 10, 1.02)).unwrap();
        let none = gen_rect(&RectSpec::normal(100, 10, 1.02).broken(0.0, 3)).unwrap();
        assert_eq!(normal.series.values(), none.series.values());
        assert_eq!(normal.mask, none.mask);

        let all = gen_rect(&RectSpec::normal(100, 10, 1.02).broken(1.0, 3)).unwrap();
        assert!(all.series.values().iter().all(|&v| v == 0.0));
        for t in 0..100 {
            assert_eq!(all.mask[t], t % 10 < 5);
        }
    }

    #[test]
    fn rect_validation() {
        let mut spec = RectSpec::normal(100, 10, 1.0);
        spec.duty = 1.0;
        assert!(gen_rect(&spec).is_err());
        let spec = RectSpec::normal(100, 10, 1.0).broken(1.5, 0);
        assert!(gen_rect(&spec).is_err());
    }

    #[test]
    fn labels_single_index() {
        let s = Series::univariate(vec![0.0; 30]).unwrap();
        let mut mask = vec![false; 30];
        mask[15] = true;
        let l = LabeledSeries::new(s, mask).unwrap();
        let spec = WindowSpec::new(4, 3).unwrap();
        let labels = window_labels(&l, spec).unwrap();
        for (i, &abrupt) in labels.iter().enumerate() {
            let t = 4 + i;
            assert_eq!(abrupt, t <= 15 && 15 <= t + 2, "t = {t}");
        }
        assert_eq!(labels.iter().filter(|&&a| a).count(), 3);
    }

    #[test]
    fn labels_all_or_nothing() {
        let s = Series::univariate(vec![0.0; 30]).unwrap();
        let spec = WindowSpec::new(4, 3).unwrap();
        let none = window_labels(&LabeledSeries::unlabeled(s.clone()), spec).unwrap();
        assert!(none.iter().all(|&a| !a));
        let all = window_labels(&LabeledSeries::new(s, vec![true; 30]).unwrap(), spec).unwrap();
        assert!(all.iter().all(|&a| a));
    }
}
