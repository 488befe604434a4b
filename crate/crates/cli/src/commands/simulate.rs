use std::path::PathBuf;

use burstkernel::png::{read_png, write_png, BitDepth};
use burstkernel::sim::{synthetic_scene, Shift};
use burstkernel::{add_noise, synth_motion, Image, MotionConfig, TensorCodec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::noise::{resolve, NoiseArgs, ResolvedNoise};
use crate::output::write_json;

/// Simulate a noisy burst from a PNG or a procedural scene.
#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Source image (8/16-bit grayscale or RGB PNG). A procedural scene is
    /// generated when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long)]
    pub frames: Option<usize>,
    /// Bound on every frame's integer shift. A PNG input is cropped by this
    /// margin on each side; a procedural scene is generated larger instead.
    #[arg(long)]
    pub max_shift: Option<usize>,
    /// Independent per-frame part of the shift budget (default: all of it).
    #[arg(long)]
    pub jitter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Procedural scene height.
    #[arg(long)]
    pub height: Option<usize>,
    /// Procedural scene width.
    #[arg(long)]
    pub width: Option<usize>,
    /// Procedural scene channels (1 or 3).
    #[arg(long)]
    pub channels: Option<usize>,
}

#[derive(Serialize)]
struct Metadata {
    input: Option<String>,
    seed: u64,
    frames: usize,
    height: usize,
    width: usize,
    channels: usize,
    max_shift: usize,
    jitter: usize,
    gain: Option<u32>,
    sigma_r: f64,
    sigma_s: f64,
    outside_training_range: bool,
    shifts: Vec<Shift>,
}

pub fn run(args: &SimulateArgs, cfg: &Config) -> CliResult<()> {
    let frames = cfg.pick(args.frames, "frames", 8)?;
    let max_shift = cfg.pick(args.max_shift, "max_shift", 2)?;
    let jitter = cfg.pick(args.jitter, "jitter", max_shift)?;
    let seed = cfg.pick(args.seed, "seed", 0)?;
    let noise: ResolvedNoise = resolve(&args.noise, None, cfg, None, Some(1))?.expect("fallback gain given");

    let clean_src: Image<f64> = match &args.input {
        Some(path) => read_png(path)?,
        None => {
            let h = cfg.pick(args.height, "height", 256)?;
            let w = cfg.pick(args.width, "width", 256)?;
            let c = cfg.pick(args.channels, "channels", 1)?;
            if c != 1 && c != 3 {
                return Err(CliError::Usage(format!("--channels must be 1 or 3, got {c}")));
            }
            // Margin so the cropped burst comes out at exactly h × w.
            synthetic_scene(h + 2 * max_shift, w + 2 * max_shift, c, seed)
        }
    };
    let motion = MotionConfig { max_shift, jitter, seed };
    let shifted = synth_motion(&clean_src, frames, &motion)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let noisy = add_noise(&shifted.burst, &noise.params()?, &mut rng);

    std::fs::create_dir_all(&args.out)?;
    shifted.burst.save(args.out.join("clean.bkt"))?;
    noisy.save(args.out.join("noisy.bkt"))?;
    write_png(shifted.burst.reference(), args.out.join("clean.png"), BitDepth::Sixteen)?;
    write_png(noisy.reference(), args.out.join("noisy.png"), BitDepth::Sixteen)?;
    let meta = Metadata {
        input: args.input.as_ref().map(|p| p.display().to_string()),
        seed,
        frames,
        height: noisy.height(),
        width: noisy.width(),
        channels: noisy.channels(),
        max_shift,
        jitter,
        gain: noise.gain,
        sigma_r: noise.sigma_r,
        sigma_s: noise.sigma_s,
        outside_training_range: noise.outside_training_range,
        shifts: shifted.shifts,
    };
    write_json(&args.out.join("metadata.json"), &meta)
}
