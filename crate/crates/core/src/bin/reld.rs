//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 verification failure.
//!
//! Window times `t` in every output file are 0-based row indices of the first
//! predicted row.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use reld::discrepancy::{CovarianceIndexing, LongRunVariance};
use reld::experiment::{
    cmd_gen, cmd_train_eval, cmd_verify, cmd_weigh, BenchmarkSpec, ExperimentConfig, GenKind,
    Preprocess, VerifyOptions,
};
use reld::weighting::EdgeMode;
use reld::{
    load_csv, ErrorReweightKind, Error, KernelSpec, LabeledSeries, LdMetric, LossKind,
    PeriodicSpec, RectSpec, ReldConfig, TrainConfig, TrainScheme, WindowSpec,
};

#[derive(Debug, Parser)]
#[command(name = "reld", version, about = "Local-discrepancy loss reweighting for time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic series and its abrupt-change mask.
    Gen(GenArgs),
    /// Compute the LD profile, LD densities and ReLD weights of a CSV series.
    Weigh(WeighArgs),
    /// Train the linear forecaster on the head of a series and evaluate on the tail.
    TrainEval(TrainEvalArgs),
    /// Run the periodicity, moment and oracle self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Periodic,
    Rect,
    Benchmark,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "periodic")]
    kind: Kind,
    #[arg(long, default_value_t = 4096)]
    length: usize,
    #[arg(long, default_value_t = 64)]
    period: usize,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Gaussian noise standard deviation (periodic and benchmark).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rect only: flatten pulses at random.
    #[arg(long)]
    broken: bool,
    #[arg(long, default_value_t = 0.3)]
    removal_prob: f64,
    /// Rect only: amplitude multiplier per period.
    #[arg(long, default_value_t = 1.0)]
    growth: f64,
    #[arg(long, default_value_t = 0.5)]
    duty: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Metric {
    Welch,
    Hotelling,
    Kpss,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Lrv {
    Simple,
    NeweyWest,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Input CSV; one column per variable, optional leading timestamp column.
    #[arg(long)]
    input: PathBuf,
    /// Treat the first row as data rather than a header.
    #[arg(long)]
    no_header: bool,
    #[arg(long, default_value_t = 48)]
    input_len: usize,
    #[arg(long, default_value_t = 24)]
    output_len: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, value_enum, default_value = "welch")]
    metric: Metric,
    #[arg(long, default_value_t = reld::discrepancy::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = reld::discrepancy::DEFAULT_RIDGE)]
    ridge: f64,
    /// Hotelling: leave the first output row out of the output covariance.
    #[arg(long)]
    skip_first_output: bool,
    #[arg(long, value_enum, default_value = "simple")]
    lrv: Lrv,
    /// Newey-West lag; defaults to floor(4 (n/100)^(1/4)).
    #[arg(long)]
    bandwidth: Option<usize>,
    #[arg(long, default_value_t = reld::weighting::DEFAULT_NUM_BINS)]
    bins: usize,
    #[arg(long, default_value_t = reld::weighting::DEFAULT_KERNEL_SIZE)]
    kernel_size: usize,
    #[arg(long, default_value_t = reld::weighting::DEFAULT_KERNEL_SIGMA)]
    sigma: f64,
    /// Renormalize the kernel at the histogram edges instead of zero padding.
    #[arg(long)]
    renormalize: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct WeighArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scheme {
    Uniform,
    Reld,
    Invld,
    Focal,
    FlipFocal,
    InvL2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Loss {
    L2,
    L1,
    Huber,
}

#[derive(Debug, Args)]
struct TrainEvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// 0/1 abrupt-change mask CSV, one row per series row.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "uniform")]
    scheme: Scheme,
    #[arg(long, value_enum, default_value = "l2")]
    loss: Loss,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Focal-R / flip Focal-R sharpness.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_shuffle: bool,
    /// Fraction of rows used for training.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[arg(long)]
    no_standardize: bool,
    /// Moving-average width applied to the training split.
    #[arg(long, conflicts_with_all = ["ema", "filter_z"])]
    ma: Option<usize>,
    #[arg(long, conflicts_with = "filter_z")]
    ema: Option<f64>,
    /// Replace training points beyond this z-score by interpolation.
    #[arg(long)]
    filter_z: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Negative control: add a fluke to the periodicity fixture.
    #[arg(long)]
    inject_fluke: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Data(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::InvalidWindowSpec(_) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let flags = format!("reld {:?}", cli.command);
    match run(cli.command, &flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(3),
    }
}

fn run(command: Command, flags: &str) -> Result<(), Failure> {
    match command {
        Command::Gen(args) => gen(args, flags),
        Command::Weigh(args) => weigh(args, flags),
        Command::TrainEval(args) => train_eval(args, flags),
        Command::Verify(args) => verify(args),
    }
}

fn gen(args: GenArgs, flags: &str) -> Result<(), Failure> {
    let kind = match args.kind {
        Kind::Periodic => GenKind::Periodic(
            PeriodicSpec::sine(args.length, args.period, args.amplitude).with_noise(args.noise, args.seed),
        ),
        Kind::Rect => {
            let mut spec = RectSpec::normal(args.length, args.period, args.growth);
            spec.amplitude = args.amplitude;
            spec.duty = args.duty;
            if args.broken {
                spec = spec.broken(args.removal_prob, args.seed);
            }
            GenKind::Rect(spec)
        }
        Kind::Benchmark => GenKind::Benchmark(BenchmarkSpec {
            length: args.length,
            period: args.period,
            amplitude: args.amplitude,
            noise_sigma: args.noise,
            seed: args.seed,
            ..BenchmarkSpec::default()
        }),
    };
    for path in cmd_gen(&kind, &args.out, flags)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn experiment_config(c: &CommonArgs) -> Result<ExperimentConfig, Failure> {
    let metric = match c.metric {
        Metric::Welch => LdMetric::WelchT { epsilon: c.epsilon },
        Metric::Hotelling => LdMetric::HotellingT2 {
            ridge: c.ridge,
            indexing: if c.skip_first_output {
                CovarianceIndexing::SkipFirstOutput
            } else {
                CovarianceIndexing::AllPoints
            },
        },
        Metric::Kpss => LdMetric::Kpss {
            lrv: match c.lrv {
                Lrv::Simple => LongRunVariance::Simple,
                Lrv::NeweyWest => {
                    let n = (c.input_len + c.output_len) as f64;
                    let default = (4.0 * (n / 100.0).powf(0.25)).floor() as usize;
                    LongRunVariance::NeweyWest {
                        bandwidth: c.bandwidth.unwrap_or(default),
                    }
                }
            },
        },
    };
    let mut kernel = KernelSpec::gaussian(c.kernel_size, c.sigma)?;
    if c.renormalize {
        kernel.edge_mode = EdgeMode::Renormalize;
    }
    Ok(ExperimentConfig {
        window: WindowSpec::with_stride(c.input_len, c.output_len, c.stride)?,
        metric,
        reld: ReldConfig {
            num_bins: c.bins,
            kernel,
            ..ReldConfig::default()
        },
        ..ExperimentConfig::default()
    })
}

fn weigh(args: WeighArgs, flags: &str) -> Result<(), Failure> {
    let cfg = experiment_config(&args.common)?;
    cfg.validate()?;
    let series = load_csv(&args.common.input, !args.common.no_header)?;
    let result = cmd_weigh(&series, &cfg, &args.common.out, flags)?;
    println!("windows={}", result.profile.len());
    println!("weighting_seconds={:.6}", result.seconds);
    println!("wrote {}", args.common.out.display());
    Ok(())
}

fn train_eval(args: TrainEvalArgs, flags: &str) -> Result<(), Failure> {
    let mut cfg = experiment_config(&args.common)?;
    let loss = match args.loss {
        Loss::L2 => LossKind::L2,
        Loss::L1 => LossKind::L1,
        Loss::Huber => LossKind::Huber { delta: args.delta },
    };
    let scheme = match args.scheme {
        Scheme::Uniform => TrainScheme::Uniform,
        Scheme::Reld => TrainScheme::Reld,
        Scheme::Invld => TrainScheme::InvLd,
        Scheme::Focal => TrainScheme::ErrorReweight(ErrorReweightKind::FocalR {
            beta: args.beta,
            gamma: args.gamma,
        }),
        Scheme::FlipFocal => TrainScheme::ErrorReweight(ErrorReweightKind::FlipFocalR {
            beta: args.beta,
            gamma: args.gamma,
        }),
        Scheme::InvL2 => TrainScheme::ErrorReweight(ErrorReweightKind::InvL2 { epsilon: 1e-3 }),
    };
    cfg.train = TrainConfig {
        learning_rate: args.lr,
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: args.seed,
        loss,
        scheme,
        shuffle: !args.no_shuffle,
    };
    cfg.split = args.split;
    cfg.standardize = !args.no_standardize;
    cfg.preprocess = match (args.ma, args.ema, args.filter_z) {
        (Some(k), _, _) => Preprocess::MovingAverage(k),
        (_, Some(a), _) => Preprocess::Ema(a),
        (_, _, Some(z)) => Preprocess::FilterOutliers(z),
        _ => Preprocess::None,
    };
    cfg.validate()?;

    let series = load_csv(&args.common.input, !args.common.no_header)?;
    let (labeled, has_mask) = match &args.mask {
        Some(path) => (LabeledSeries::new(series, reld::export::read_mask_csv(path)?)?, true),
        None => {
            eprintln!("warning: no --mask given; mse_normal and mse_abrupt are omitted");
            (LabeledSeries::unlabeled(series), false)
        }
    };
    let result = cmd_train_eval(&labeled, has_mask, &cfg, &args.common.out, flags)?;
    print!("{}", result.report.to_key_value());
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let checks = cmd_verify(&VerifyOptions {
        inject_fluke: args.inject_fluke,
        seed: args.seed,
    })?;
    let mut ok = true;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<28} value={:.3e} tolerance={:.1e}", c.name, c.value, c.tolerance);
        ok &= c.passed;
    }
    if ok {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
