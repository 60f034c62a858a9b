//! Uniform, ReLD and invLD training of the linear forecaster on the benchmark
//! series, reported as MSE on normal and abrupt test windows.
//!
//! cargo run --release --example train_eval [seeds]

use reld::experiment::{train_eval, BenchmarkSpec, ExperimentConfig};
use reld::TrainScheme;

fn main() -> reld::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    println!("{:<5} {:<8} {:>10} {:>10} {:>10}", "seed", "scheme", "mse", "mse_N", "mse_A");
    for seed in 0..seeds {
        let labeled = BenchmarkSpec::with_seed(seed).generate()?;
        for scheme in [TrainScheme::Uniform, TrainScheme::Reld, TrainScheme::InvLd] {
            let mut cfg = ExperimentConfig::default();
            cfg.train.seed = seed;
            cfg.train.scheme = scheme;
            let report = train_eval(&labeled, true, &cfg)?.report;
            println!(
                "{seed:<5} {:<8} {:>10.5} {:>10.5} {:>10.5}",
                scheme.name(),
                report.mse,
                report.mse_normal.unwrap_or(f64::NAN),
                report.mse_abrupt.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
