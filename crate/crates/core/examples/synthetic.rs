//! Build labeled synthetic series and write them as CSV into a scratch
//! directory, the same files `reld gen` produces.
//!
//! cargo run --release --example synthetic [out_dir]

use std::path::PathBuf;

use reld::experiment::{cmd_gen, BenchmarkSpec, GenKind};
use reld::{gen_periodic, inject_abrupt, AbruptEvent, PeriodicSpec, RectSpec};

fn main() -> reld::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("reld-synthetic"));

    // Events by hand.
    let base = PeriodicSpec::sine(600, 50, 1.0).with_noise(0.05, 3);
    let series = gen_periodic(&base)?;
    let labeled = inject_abrupt(
        &series,
        &base,
        &[
            AbruptEvent::fluke(120, 5.0),
            AbruptEvent::frequency_change(300, 100, 2.5),
            AbruptEvent::trend_shift(480, -3.0),
        ],
    )?;
    let flagged = labeled.mask.iter().filter(|&&m| m).count();
    println!("hand-built: {} rows, {flagged} labeled abrupt", labeled.series.len());

    for (name, kind) in [
        ("benchmark", GenKind::Benchmark(BenchmarkSpec::with_seed(7))),
        ("rect-broken", GenKind::Rect(RectSpec::normal(960, 24, 1.02).broken(0.3, 7))),
    ] {
        let dir = out.join(name);
        let files = cmd_gen(&kind, &dir, &format!("example synthetic {name}"))?;
        let labeled = kind.generate()?;
        let flagged = labeled.mask.iter().filter(|&&m| m).count();
        println!("{name}: {} rows, {flagged} labeled, wrote {}", labeled.series.len(), files[0].display());
    }
    Ok(())
}
