//! LD of a clean periodic series is itself periodic, and so are the windowed
//! mean and variance. A single fluke breaks both.
//!
//! cargo run --release --example periodicity

use reld::{
    gen_periodic, inject_abrupt, ld_profile, periodicity_residual, window_moment_residual,
    AbruptEvent, LdMetric, PeriodicSpec, WindowSpec,
};

fn main() -> reld::Result<()> {
    let period = 64;
    let base = PeriodicSpec::sine(16 * period, period, 1.0).with_component(3.0, 0.4, 1.1);
    let clean = gen_periodic(&base)?;
    let spec = WindowSpec::new(32, 32)?;

    println!("{:<10} {:>14} {:>14}", "metric", "clean", "with fluke");
    let broken = inject_abrupt(&clean, &base, &[AbruptEvent::fluke(8 * period + 5, 4.0)])?.series;
    for metric in [LdMetric::welch(), LdMetric::hotelling(), LdMetric::kpss()] {
        let a = periodicity_residual(&ld_profile(&clean, spec, metric)?, period)?;
        let b = periodicity_residual(&ld_profile(&broken, spec, metric)?, period)?;
        println!("{:<10} {:>14.3e} {:>14.3e}", metric.name(), a, b);
    }

    let (mean_shift, var_shift) = window_moment_residual(&clean, 32, period)?;
    println!("window mean shift {mean_shift:.3e}, variance shift {var_shift:.3e}");
    Ok(())
}
