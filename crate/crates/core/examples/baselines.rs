//! The comparison baselines: error-driven reweighting (Focal-R, flip Focal-R,
//! inverse error) and training-series preprocessing (moving average, EMA,
//! outlier filtering), next to ReLD.
//!
//! cargo run --release --example baselines

use reld::experiment::{train_eval, BenchmarkSpec, ExperimentConfig, Preprocess};
use reld::{error_weight, ErrorReweightKind, TrainScheme};

fn main() -> reld::Result<()> {
    println!("error factors at e = 0, 0.5, 2:");
    for kind in [
        ErrorReweightKind::focal(),
        ErrorReweightKind::flip_focal(),
        ErrorReweightKind::InvL2 { epsilon: 1e-3 },
    ] {
        let f: Vec<String> = [0.0, 0.5, 2.0].iter().map(|&e| format!("{:.4}", error_weight(e, kind))).collect();
        println!("  {:<10} {}", kind.name(), f.join("  "));
    }

    let labeled = BenchmarkSpec::with_seed(2).generate()?;
    let runs: Vec<(&str, TrainScheme, Preprocess)> = vec![
        ("uniform", TrainScheme::Uniform, Preprocess::None),
        ("reld", TrainScheme::Reld, Preprocess::None),
        ("focal", TrainScheme::ErrorReweight(ErrorReweightKind::focal()), Preprocess::None),
        ("flip-focal", TrainScheme::ErrorReweight(ErrorReweightKind::flip_focal()), Preprocess::None),
        ("ma-3", TrainScheme::Uniform, Preprocess::MovingAverage(3)),
        ("ema-0.5", TrainScheme::Uniform, Preprocess::Ema(0.5)),
        ("filter-3sd", TrainScheme::Uniform, Preprocess::FilterOutliers(3.0)),
    ];
    println!("\n{:<11} {:>10} {:>10} {:>10}", "run", "mse", "mse_N", "mse_A");
    for (name, scheme, preprocess) in runs {
        let mut cfg = ExperimentConfig::default();
        cfg.train.scheme = scheme;
        cfg.preprocess = preprocess;
        let r = train_eval(&labeled, true, &cfg)?.report;
        println!(
            "{name:<11} {:>10.5} {:>10.5} {:>10.5}",
            r.mse,
            r.mse_normal.unwrap_or(f64::NAN),
            r.mse_abrupt.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
