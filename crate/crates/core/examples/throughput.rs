//! Weighting cost at the size of a common benchmark: 34369 windows of
//! 96 + 96 rows over seven variables.
//!
//! cargo run --release --example throughput

use std::time::Instant;

use reld::{gen_periodic, ld_profile, reld, LdMetric, PeriodicSpec, ReldConfig, Series, WindowSpec};

fn main() -> reld::Result<()> {
    let spec = WindowSpec::new(96, 96)?;
    let len = 34369 + spec.span() - 1;
    let columns = (0..7)
        .map(|j| {
            let p = PeriodicSpec::sine(len, 96, 1.0).with_component(4.0, 0.3, j as f64).with_noise(0.2, j);
            gen_periodic(&p).map(|s| s.column(0))
        })
        .collect::<reld::Result<Vec<_>>>()?;
    let series = Series::from_columns(&columns)?;

    let start = Instant::now();
    let profile = ld_profile(&series, spec, LdMetric::welch())?;
    let after_ld = start.elapsed();
    let (weights, _) = reld(&profile, &ReldConfig::default())?;
    let total = start.elapsed();
    println!("{} windows x {} variables", weights.len(), weights.dims());
    println!("LD {:.3} s, density and weights {:.3} s, total {:.3} s", after_ld.as_secs_f64(), (total - after_ld).as_secs_f64(), total.as_secs_f64());
    Ok(())
}
