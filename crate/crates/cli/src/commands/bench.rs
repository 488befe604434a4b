use std::collections::BTreeMap;
use std::path::PathBuf;

use burstkernel::bench::{run_bench, BackendTiming, BenchConfig};
use burstkernel::{Backend, Precision};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::emit_json;

/// Time the filtering backends on a synthetic burst.
#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    /// Odd kernel side K.
    #[arg(long)]
    pub ksize: Option<usize>,
    /// Basis size B.
    #[arg(long = "basis", alias = "B")]
    pub basis: Option<usize>,
    #[arg(long)]
    pub channels: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Comma-separated backends (default: direct,fourier).
    #[arg(long, value_delimiter = ',')]
    pub backends: Option<Vec<Backend>>,
    /// Block side for the direct and Fourier passes (0 = whole frame).
    #[arg(long)]
    pub tile: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub precision: Option<Precision>,
    /// Comma-separated kernel sizes to run in turn instead of --ksize.
    #[arg(long, value_delimiter = ',')]
    pub scaling: Option<Vec<usize>>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Run {
    ksize: usize,
    results: Vec<BackendTiming>,
}

#[derive(Serialize)]
struct Report {
    precision: Precision,
    width: usize,
    height: usize,
    frames: usize,
    basis: usize,
    channels: usize,
    tile: usize,
    trials: usize,
    warmup: usize,
    seed: u64,
    runs: Vec<Run>,
    /// Median time at the largest K over the smallest, per backend; null
    /// with fewer than two kernel sizes.
    scaling_ratio: Option<BTreeMap<String, f64>>,
}

pub fn run(args: &BenchArgs, cfg: &Config) -> CliResult<()> {
    let d = BenchConfig::default();
    let base = BenchConfig {
        width: cfg.pick(args.width, "width", d.width)?,
        height: cfg.pick(args.height, "height", d.height)?,
        frames: cfg.pick(args.frames, "frames", d.frames)?,
        ksize: cfg.pick(args.ksize, "ksize", d.ksize)?,
        basis: cfg.pick(args.basis, "basis", d.basis)?,
        channels: cfg.pick(args.channels, "channels", d.channels)?,
        trials: cfg.pick(args.trials, "trials", d.trials)?,
        warmup: cfg.pick(args.warmup, "warmup", d.warmup)?,
        backends: cfg.pick(args.backends.clone(), "backends", d.backends.clone())?,
        tile: cfg.pick(args.tile, "tile", d.tile)?,
        seed: cfg.pick(args.seed, "seed", d.seed)?,
    };
    if base.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if base.ksize.is_multiple_of(2) {
        return Err(CliError::Usage(format!("--ksize must be odd, got {}", base.ksize)));
    }
    let precision = cfg.pick(args.precision, "precision", Precision::F32)?;
    let ksizes = cfg.pick(args.scaling.clone(), "scaling", vec![base.ksize])?;
    if ksizes.is_empty() || ksizes.iter().any(|k| k % 2 == 0) {
        return Err(CliError::Usage(format!("--scaling needs odd kernel sizes, got {ksizes:?}")));
    }

    let mut runs = Vec::new();
    for &k in &ksizes {
        let c = BenchConfig { ksize: k, ..base.clone() };
        let report = match precision {
            Precision::F32 => run_bench::<f32>(&c)?,
            Precision::F64 => run_bench::<f64>(&c)?,
        };
        runs.push(Run { ksize: k, results: report.results });
    }
    let scaling_ratio = (runs.len() > 1).then(|| {
        let lo = runs.iter().min_by_key(|r| r.ksize).expect("non-empty");
        let hi = runs.iter().max_by_key(|r| r.ksize).expect("non-empty");
        lo.results
            .iter()
            .zip(&hi.results)
            .map(|(a, b)| (a.report.backend.to_string(), b.report.wall_time_ms.unwrap_or(0.0) / a.report.wall_time_ms.unwrap_or(1.0)))
            .collect()
    });
    let report = Report {
        precision,
        width: base.width,
        height: base.height,
        frames: base.frames,
        basis: base.basis,
        channels: base.channels,
        tile: base.tile,
        trials: base.trials,
        warmup: base.warmup,
        seed: base.seed,
        runs,
        scaling_ratio,
    };
    emit_json(args.out.as_deref(), &report)
}
