//! Rectangular pulse trains. With growing amplitude every one-period window
//! has nearly the same LD, so ReLD leaves the weights flat. Removing pulses at
//! random creates rare LD values that get down-weighted.
//!
//! cargo run --release --example rect_series

use reld::experiment::{train_eval, ExperimentConfig};
use reld::{gen_rect, ld_profile, reld, window_labels, LdMetric, RectSpec, ReldConfig, TrainScheme, WindowSpec};

fn main() -> reld::Result<()> {
    let period = 24;
    let spec = WindowSpec::new(period, period)?;

    let normal = gen_rect(&RectSpec::normal(2400, period, 1.02))?;
    let (w, _) = reld(&ld_profile(&normal.series, spec, LdMetric::welch())?, &ReldConfig::default())?;
    let col = w.column(0);
    let max = col.iter().cloned().fold(f64::MIN, f64::max);
    let min = col.iter().cloned().fold(f64::MAX, f64::min);
    println!("rect-normal: weight max/min = {:.4}", max / min);

    for seed in 0..3 {
        let broken = gen_rect(&RectSpec::normal(2400, period, 1.02).broken(0.3, seed))?;
        let (w, _) = reld(&ld_profile(&broken.series, spec, LdMetric::welch())?, &ReldConfig::default())?;
        let labels = window_labels(&broken, spec)?;
        let (mut removed, mut intact) = ((0.0, 0), (0.0, 0));
        for (i, &l) in labels.iter().enumerate() {
            let slot = if l { &mut removed } else { &mut intact };
            slot.0 += w.get(i, 0);
            slot.1 += 1;
        }
        let mut cfg = ExperimentConfig { window: spec, ..ExperimentConfig::default() };
        cfg.train.seed = seed;
        let uniform = train_eval(&broken, true, &cfg)?.report.mse;
        cfg.train.scheme = TrainScheme::Reld;
        let weighted = train_eval(&broken, true, &cfg)?.report.mse;
        println!(
            "rect-broken seed {seed}: mean weight removed {:.3} / intact {:.3}; test mse uniform {uniform:.4}, reld {weighted:.4}",
            removed.0 / removed.1 as f64,
            intact.0 / intact.1 as f64
        );
    }
    Ok(())
}
