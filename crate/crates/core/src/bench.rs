//! Wall-clock benchmark of the filtering backends on a synthetic burst.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoefficientField, KernelBasis, KernelField, KernelShape};
use crate::filter::{filter_direct_window, filter_factored, filter_fourier_tiled, Backend, FftPlanCache, FOURIER_TILE};
use crate::image::{Burst, Image};
use crate::metrics::{flop_report, CostParams, FlopReport};
use crate::scalar::Real;
use crate::sim::{add_noise, gain_preset, synth_motion, synthetic_scene, MotionConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub ksize: usize,
    pub basis: usize,
    pub channels: usize,
    pub trials: usize,
    pub warmup: usize,
    pub backends: Vec<Backend>,
    /// Output block side for the direct and Fourier passes; 0 runs each on
    /// the whole frame.
    pub tile: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            width: 1024,
            height: 768,
            frames: 8,
            ksize: 15,
            basis: 90,
            channels: 1,
            trials: 5,
            warmup: 1,
            backends: vec![Backend::Direct, Backend::Fourier],
            tile: FOURIER_TILE,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn cost_params(&self) -> CostParams {
        CostParams {
            height: self.height,
            width: self.width,
            ksize: self.ksize,
            frames: self.frames,
            basis: self.basis,
            channels: self.channels,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BackendTiming {
    #[serde(flatten)]
    pub report: FlopReport,
    pub trials_ms: Vec<f64>,
    /// `max − min` over trials; `None` for a single trial.
    pub spread_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub precision: &'static str,
    pub tile: usize,
    pub trials: usize,
    pub warmup: usize,
    pub results: Vec<BackendTiming>,
}

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Inputs for one benchmark: a noisy burst plus random normalized basis,
/// coefficients, and per-block kernel fields for the direct backend.
pub struct BenchInputs<T: Real> {
    pub burst: Burst<T>,
    pub basis: KernelBasis<T>,
    pub coeffs: CoefficientField<T>,
    fields: HashMap<(usize, usize), KernelField<T>>,
    tiles: Vec<(usize, usize, usize, usize)>,
}

impl<T: Real> BenchInputs<T> {
    pub fn generate(cfg: &BenchConfig) -> Result<Self> {
        let p = cfg.cost_params();
        if [p.height, p.width, p.ksize, p.frames, p.basis, p.channels].contains(&0) || cfg.ksize.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("invalid benchmark size {p:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let margin = 2;
        let scene = synthetic_scene::<T>(cfg.height + 2 * margin, cfg.width + 2 * margin, cfg.channels, cfg.seed);
        let clean = synth_motion(&scene, cfg.frames, &MotionConfig::uniform(margin, cfg.seed))?.burst;
        let burst = add_noise(&clean, &gain_preset(1)?, &mut rng);
        let shape = KernelShape::new(cfg.ksize, cfg.frames, 1)?;
        let mut logits = |n: usize| (0..n).map(|_| T::of(rng.random_range(-2.0..2.0))).collect::<Vec<T>>();
        let basis = KernelBasis::from_logits(shape, cfg.basis, logits(cfg.basis * shape.len()))?;
        let coeffs = CoefficientField::from_logits(cfg.height, cfg.width, cfg.basis, logits(cfg.height * cfg.width * cfg.basis))?;

        let block = if cfg.tile == 0 { cfg.height.max(cfg.width) } else { cfg.tile };
        let mut tiles = Vec::new();
        let mut fields = HashMap::new();
        for y0 in (0..cfg.height).step_by(block) {
            for x0 in (0..cfg.width).step_by(block) {
                let (h, w) = (block.min(cfg.height - y0), block.min(cfg.width - x0));
                tiles.push((y0, x0, h, w));
                if let std::collections::hash_map::Entry::Vacant(e) = fields.entry((h, w)) {
                    e.insert(KernelField::from_logits(h, w, shape, logits(h * w * shape.len()))?);
                }
            }
        }
        Ok(Self { burst, basis, coeffs, fields, tiles })
    }

    /// Direct filtering block by block, reusing one random field per block
    /// size so the full-frame field never has to be materialized.
    pub fn run_direct(&self) -> Result<Image<T>> {
        let b = &self.burst;
        let mut out = Image::zeros(b.height(), b.width(), b.channels());
        for &(y0, x0, h, w) in &self.tiles {
            let part = filter_direct_window(b, &self.fields[&(h, w)], y0, x0)?;
            for c in 0..b.channels() {
                let (src, dst) = (part.plane(c), out.plane_mut(c));
                for y in 0..h {
                    dst[(y0 + y) * b.width() + x0..][..w].copy_from_slice(&src[y * w..(y + 1) * w]);
                }
            }
        }
        Ok(out)
    }

    pub fn run(&self, backend: Backend, tile: usize, cache: &FftPlanCache<T>) -> Result<Image<T>> {
        match backend {
            Backend::Direct => self.run_direct(),
            Backend::Factored => filter_factored(&self.burst, &self.basis, &self.coeffs),
            Backend::Fourier => filter_fourier_tiled(&self.burst, &self.basis, &self.coeffs, cache, Some(tile)),
        }
    }
}

/// Times every configured backend: `warmup` untimed runs, then `trials`
/// timed runs summarized by their median.
pub fn run_bench<T: Real>(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let inputs = BenchInputs::<T>::generate(cfg)?;
    let cache = FftPlanCache::new();
    let mut results = Vec::new();
    for &backend in &cfg.backends {
        for _ in 0..cfg.warmup {
            inputs.run(backend, cfg.tile, &cache)?;
        }
        let mut trials_ms = Vec::with_capacity(cfg.trials);
        for _ in 0..cfg.trials {
            let start = Instant::now();
            let out = inputs.run(backend, cfg.tile, &cache)?;
            trials_ms.push(start.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(out);
        }
        let mut report = flop_report(&cfg.cost_params(), backend)?;
        report.wall_time_ms = Some(median(&trials_ms));
        let spread_ms = (trials_ms.len() > 1).then(|| {
            let max = trials_ms.iter().copied().fold(f64::MIN, f64::max);
            let min = trials_ms.iter().copied().fold(f64::MAX, f64::min);
            max - min
        });
        results.push(BackendTiming { report, trials_ms, spread_ms });
    }
    Ok(BenchReport { precision: T::NAME, tile: cfg.tile, trials: cfg.trials, warmup: cfg.warmup, results })
}
