//! ReLD and invLD weights on the labeled benchmark series: abrupt windows end
//! up with small weights, normal windows slightly above one.
//!
//! cargo run --release --example weighting

use reld::experiment::BenchmarkSpec;
use reld::{invld_weights, ld_profile, reld, window_labels, LdMetric, ReldConfig, WindowSpec};

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n.max(1) as f64
}

fn main() -> reld::Result<()> {
    let labeled = BenchmarkSpec::with_seed(1).generate()?;
    let spec = WindowSpec::new(48, 24)?;
    let profile = ld_profile(&labeled.series, spec, LdMetric::welch())?;
    let labels = window_labels(&labeled, spec)?;

    let (weights, densities) = reld(&profile, &ReldConfig::default())?;
    let density = &densities[0];
    let peak = density
        .density()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(b, _)| b)
        .unwrap_or(0);
    println!(
        "{} windows, LD range [{:.2}, {:.2}], densest bin starts at {:.3}",
        profile.len(),
        density.edges()[0],
        density.edges()[density.edges().len() - 1],
        density.edges()[peak]
    );

    let invld = invld_weights(&profile)?;
    for (name, table) in [("reld", &weights), ("invld", &invld)] {
        let col = table.column(0);
        let normal = mean(col.iter().zip(&labels).filter(|(_, &l)| !l).map(|(w, _)| *w));
        let abrupt = mean(col.iter().zip(&labels).filter(|(_, &l)| l).map(|(w, _)| *w));
        println!("{name:<6} mean weight: normal {normal:.3}, abrupt {abrupt:.3}, overall {:.3}", mean(col.into_iter()));
    }

    let mut ranked: Vec<usize> = (0..profile.len()).collect();
    ranked.sort_by(|&a, &b| weights.get(a, 0).total_cmp(&weights.get(b, 0)));
    println!("\nlowest ReLD weights:");
    for &i in ranked.iter().take(5) {
        println!("  t={:<5} ld={:>9.3} weight={:.2e} abrupt={}", profile.t_values()[i], profile.get(i, 0), weights.get(i, 0), labels[i]);
    }
    Ok(())
}
