//! Alternative LD statistics on a three-variable series: Hotelling t² gives
//! one joint value per window, KPSS one trend-stationarity value per
//! variable. Both feed the same density weighting.
//!
//! cargo run --release --example hotelling_kpss

use reld::{
    gen_periodic, inject_abrupt, ld_profile, LabeledSeries, reld, window_labels, AbruptEvent, LdMetric,
    LongRunVariance, PeriodicSpec, ReldConfig, Series, WindowSpec,
};

fn main() -> reld::Result<()> {
    let mut columns = Vec::new();
    let mut mask = vec![false; 1440];
    for (j, period) in [24usize, 36, 48].into_iter().enumerate() {
        let base = PeriodicSpec::sine(1440, period, 1.0).with_noise(0.1, j as u64);
        let s = gen_periodic(&base)?;
        let labeled = inject_abrupt(&s, &base, &[AbruptEvent::trend_shift(700 + 10 * j, 4.0)])?;
        columns.push(labeled.series.column(0));
        for (m, &l) in mask.iter_mut().zip(&labeled.mask) {
            *m |= l;
        }
    }
    let series = Series::from_columns(&columns)?;
    let labeled = LabeledSeries::new(series, mask)?;
    let spec = WindowSpec::new(48, 24)?;
    let labels = window_labels(&labeled, spec)?;

    for metric in [
        LdMetric::welch(),
        LdMetric::hotelling(),
        LdMetric::kpss(),
        LdMetric::Kpss { lrv: LongRunVariance::NeweyWest { bandwidth: 4 } },
    ] {
        let profile = ld_profile(&labeled.series, spec, metric)?;
        let (weights, _) = reld(&profile, &ReldConfig::default())?;
        let col = weights.column(0);
        let (mut abrupt, mut normal) = (Vec::new(), Vec::new());
        for (w, &l) in col.iter().zip(&labels) {
            if l { abrupt.push(*w) } else { normal.push(*w) }
        }
        let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "{:<10} {} LD column(s); first-column weight: normal {:.3}, abrupt {:.3}",
            metric.name(),
            profile.dims(),
            avg(&normal),
            avg(&abrupt)
        );
    }
    Ok(())
}
