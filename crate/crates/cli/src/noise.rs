use std::path::Path;

use burstkernel::sim::GainPreset;
use burstkernel::NoiseParams;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};

/// Noise flags shared by every subcommand that needs `σ_r`, `σ_s`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct NoiseArgs {
    /// Gain preset (1, 2, 4 or 8).
    #[arg(long)]
    pub gain: Option<u32>,
    /// Read-noise standard deviation; requires --sigma-s.
    #[arg(long, requires = "sigma_s")]
    pub sigma_r: Option<f64>,
    /// Shot-noise scale; requires --sigma-r.
    #[arg(long, requires = "sigma_r")]
    pub sigma_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedNoise {
    pub gain: Option<u32>,
    pub sigma_r: f64,
    pub sigma_s: f64,
    pub outside_training_range: bool,
}

impl ResolvedNoise {
    pub fn params(&self) -> CliResult<NoiseParams> {
        Ok(NoiseParams::new(self.sigma_r, self.sigma_s)?)
    }

    fn from_gain(level: u32) -> CliResult<Self> {
        let preset = GainPreset::lookup(level)?;
        let p = preset.params();
        Ok(Self {
            gain: Some(level),
            sigma_r: p.sigma_r,
            sigma_s: p.sigma_s,
            outside_training_range: preset.outside_training_range(),
        })
    }

    fn from_sigmas(sigma_r: f64, sigma_s: f64) -> CliResult<Self> {
        NoiseParams::new(sigma_r, sigma_s)?;
        Ok(Self { gain: None, sigma_r, sigma_s, outside_training_range: false })
    }
}

#[derive(serde::Deserialize)]
struct MetadataNoise {
    gain: Option<u32>,
    sigma_r: f64,
    sigma_s: f64,
}

fn from_metadata(path: &Path) -> CliResult<ResolvedNoise> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read metadata {}: {e}", path.display())))?;
    let meta: MetadataNoise = serde_json::from_str(&text)?;
    match meta.gain {
        Some(g) => ResolvedNoise::from_gain(g),
        None => ResolvedNoise::from_sigmas(meta.sigma_r, meta.sigma_s),
    }
}

/// Explicit σ flags, then the gain flag, then an explicit metadata file,
/// then σ / gain from the config file, then `metadata.json` next to the
/// burst. `fallback_gain` is used when nothing else applies.
pub fn resolve(
    args: &NoiseArgs,
    meta: Option<&Path>,
    cfg: &Config,
    burst: Option<&Path>,
    fallback_gain: Option<u32>,
) -> CliResult<Option<ResolvedNoise>> {
    if let (Some(r), Some(s)) = (args.sigma_r, args.sigma_s) {
        return ResolvedNoise::from_sigmas(r, s).map(Some);
    }
    if let Some(g) = args.gain {
        return ResolvedNoise::from_gain(g).map(Some);
    }
    if let Some(m) = meta {
        return from_metadata(m).map(Some);
    }
    let (cr, cs) = (cfg.get::<f64>("sigma_r")?, cfg.get::<f64>("sigma_s")?);
    match (cr, cs) {
        (Some(r), Some(s)) => return ResolvedNoise::from_sigmas(r, s).map(Some),
        (None, None) => {}
        _ => return Err(CliError::Usage("config must set both sigma_r and sigma_s".into())),
    }
    if let Some(g) = cfg.get::<u32>("gain")? {
        return ResolvedNoise::from_gain(g).map(Some);
    }
    if let Some(sibling) = burst.and_then(|b| b.parent()).map(|d| d.join("metadata.json")) {
        if sibling.is_file() {
            return from_metadata(&sibling).map(Some);
        }
    }
    fallback_gain.map(ResolvedNoise::from_gain).transpose()
}
