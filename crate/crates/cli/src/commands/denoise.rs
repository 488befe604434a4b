use std::path::{Path, PathBuf};
use std::time::Instant;

use burstkernel::kernels::{relative_error, CompressedField};
use burstkernel::metrics::LossTerms;
use burstkernel::normalize::FIELD_TOL;
use burstkernel::png::{read_png, write_png, BitDepth};
use burstkernel::{
    compress_kernel_field, estimate_kernels_nlm, filter_direct, filter_factored, filter_fourier_tiled, flop_report,
    loss_terms, per_frame_estimates, psnr, reconstruct_kernels, validate_kernel_field, Backend, Burst, CostParams,
    FftPlanCache, FlopReport, Image, KernelField, KernelShape, NlmConfig, Precision, Real, Tensor, TensorCodec,
    ValidationReport,
};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::noise::{resolve, NoiseArgs, ResolvedNoise};
use crate::output::write_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Non-local means over the burst.
    Nlm,
    /// All weight on the reference pixel; reproduces frame 1.
    Delta,
}

/// Estimate kernels, optionally compress them, filter, and score.
#[derive(Debug, clap::Args)]
pub struct DenoiseArgs {
    /// Noisy burst tensor (`T×H×W×C`).
    #[arg(long)]
    pub noisy: PathBuf,
    /// Clean reference: a burst or image tensor, or a PNG. Enables PSNR and
    /// loss reporting.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Simulation metadata to take the noise parameters from.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
    /// Odd kernel side K.
    #[arg(long)]
    pub ksize: Option<usize>,
    #[arg(long)]
    pub patch_radius: Option<usize>,
    /// NLM bandwidth in units of the local noise level.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Separate kernels per color channel.
    #[arg(long)]
    pub per_channel: Option<bool>,
    /// Compress the kernel field to this many basis elements.
    #[arg(long = "basis", alias = "B")]
    pub basis: Option<usize>,
    #[arg(long)]
    pub backend: Option<Backend>,
    #[arg(long)]
    pub precision: Option<Precision>,
    /// Fourier tile side (0 = whole frame).
    #[arg(long)]
    pub tile: Option<usize>,
}

struct Settings {
    estimator: Estimator,
    nlm: NlmConfig,
    basis: Option<usize>,
    backend: Backend,
    precision: Precision,
    tile: usize,
    noise: Option<ResolvedNoise>,
}

#[derive(Serialize)]
struct CompressionReport {
    basis: usize,
    relative_error: f64,
    optimal_error: f64,
    leading_singular_values: Vec<f64>,
}

#[derive(Serialize)]
struct Metrics {
    backend: Backend,
    precision: Precision,
    estimator: Estimator,
    ksize: usize,
    frames: usize,
    height: usize,
    width: usize,
    channels: usize,
    basis: Option<usize>,
    tile: usize,
    noise: Option<ResolvedNoise>,
    field_validation: ValidationReport,
    compression: Option<CompressionReport>,
    psnr: Option<f64>,
    noisy_psnr: Option<f64>,
    loss_terms: Option<LossTerms>,
    per_frame_psnr: Option<Vec<f64>>,
    flops: FlopReport,
    wall_time_ms: f64,
}

fn load_reference<T: Real>(path: &Path) -> CliResult<Image<T>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        return Ok(read_png(path)?);
    }
    let tensor = Tensor::load(path)?;
    match tensor.rank() {
        4 => Ok(Burst::<T>::from_tensor(&tensor)?.reference().clone()),
        3 => Ok(Image::<T>::from_tensor(&tensor)?),
        r => Err(CliError::Data(format!("{}: expected an image or burst tensor, got rank {r}", path.display()))),
    }
}

pub fn run(args: &DenoiseArgs, cfg: &Config) -> CliResult<()> {
    let estimator = cfg.pick(args.estimator, "estimator", Estimator::Nlm)?;
    let noise = resolve(&args.noise, args.meta.as_deref(), cfg, Some(&args.noisy), None)?;
    if estimator == Estimator::Nlm && noise.is_none() {
        return Err(CliError::Usage(
            "NLM needs noise parameters: pass --gain, --sigma-r/--sigma-s or --meta, or keep metadata.json next to the burst"
                .into(),
        ));
    }
    let defaults = NlmConfig::default();
    let settings = Settings {
        estimator,
        nlm: NlmConfig {
            ksize: cfg.pick(args.ksize, "ksize", defaults.ksize)?,
            patch_radius: cfg.pick(args.patch_radius, "patch_radius", defaults.patch_radius)?,
            bandwidth: cfg.pick(args.bandwidth, "bandwidth", defaults.bandwidth)?,
            per_channel: cfg.pick(args.per_channel, "per_channel", defaults.per_channel)?,
        },
        basis: cfg.pick_opt(args.basis, "basis")?,
        backend: cfg.pick(args.backend, "backend", Backend::Direct)?,
        precision: cfg.pick(args.precision, "precision", Precision::F32)?,
        tile: cfg.pick(args.tile, "tile", 0)?,
        noise,
    };
    if settings.backend != Backend::Direct && settings.basis.is_none() {
        return Err(CliError::Usage(format!("the {} backend filters with a basis; pass --basis B", settings.backend)));
    }
    match settings.precision {
        Precision::F32 => denoise::<f32>(args, &settings),
        Precision::F64 => denoise::<f64>(args, &settings),
    }
}

fn denoise<T: Real>(args: &DenoiseArgs, s: &Settings) -> CliResult<()> {
    let noisy = Burst::<T>::load(&args.noisy)?;
    let clean = args.clean.as_deref().map(load_reference::<T>).transpose()?;
    if let Some(c) = &clean {
        if !c.same_shape(noisy.reference()) {
            return Err(CliError::Data("clean reference and noisy burst differ in shape".into()));
        }
    }

    let field: KernelField<T> = match s.estimator {
        Estimator::Nlm => estimate_kernels_nlm(&noisy, &s.noise.as_ref().expect("checked").params()?, &s.nlm)?,
        Estimator::Delta => {
            let groups = if s.nlm.per_channel { noisy.channels() } else { 1 };
            let shape = KernelShape::new(s.nlm.ksize, noisy.len(), groups)?;
            KernelField::delta(noisy.height(), noisy.width(), shape)
        }
    };
    let field_validation = validate_kernel_field(&field, FIELD_TOL);
    let shape = field.shape();

    let compressed: Option<(CompressedField<T>, KernelField<T>)> = match s.basis {
        Some(b) => {
            let c = compress_kernel_field(&field, b)?;
            let rec = reconstruct_kernels(&c.basis, &c.coeffs)?;
            Some((c, rec))
        }
        None => None,
    };
    let applied = compressed.as_ref().map(|(_, rec)| rec).unwrap_or(&field);

    let start = Instant::now();
    let out = match (s.backend, &compressed) {
        (Backend::Direct, _) => filter_direct(&noisy, applied)?,
        (Backend::Factored, Some((c, _))) => filter_factored(&noisy, &c.basis, &c.coeffs)?,
        (Backend::Fourier, Some((c, _))) => {
            filter_fourier_tiled(&noisy, &c.basis, &c.coeffs, &FftPlanCache::new(), Some(s.tile))?
        }
        _ => unreachable!("basis presence checked before loading"),
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    if out.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numerical("filtered output is not finite".into()));
    }

    let (psnr_out, noisy_psnr, losses, per_frame) = match &clean {
        Some(c) => {
            let frames = per_frame_estimates(&noisy, applied)?;
            let per = frames.iter().map(|f| psnr(c, f)).collect::<Result<Vec<_>, _>>()?;
            (Some(psnr(c, &out)?), Some(psnr(c, noisy.reference())?), Some(loss_terms(&out, c)?), Some(per))
        }
        None => (None, None, None, None),
    };

    let cost = CostParams {
        height: noisy.height(),
        width: noisy.width(),
        ksize: shape.ksize,
        frames: shape.frames,
        basis: s.basis.unwrap_or(1),
        channels: noisy.channels(),
    };
    let metrics = Metrics {
        backend: s.backend,
        precision: s.precision,
        estimator: s.estimator,
        ksize: shape.ksize,
        frames: shape.frames,
        height: noisy.height(),
        width: noisy.width(),
        channels: noisy.channels(),
        basis: s.basis,
        tile: s.tile,
        noise: s.noise.clone(),
        field_validation,
        compression: compressed
            .as_ref()
            .map(|(c, rec)| -> CliResult<CompressionReport> {
                Ok(CompressionReport {
                    basis: c.basis.len(),
                    relative_error: relative_error(&field, rec)?,
                    optimal_error: c.optimal_error(),
                    leading_singular_values: c.singular_values.iter().take(c.basis.len()).copied().collect(),
                })
            })
            .transpose()?,
        psnr: psnr_out,
        noisy_psnr,
        loss_terms: losses,
        per_frame_psnr: per_frame,
        flops: flop_report(&cost, s.backend)?,
        wall_time_ms,
    };

    std::fs::create_dir_all(&args.out)?;
    out.save(args.out.join("denoised.bkt"))?;
    write_png(&out, args.out.join("denoised.png"), BitDepth::Sixteen)?;
    write_json(&args.out.join("metrics.json"), &metrics)
}
