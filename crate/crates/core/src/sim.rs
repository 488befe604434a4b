//! Synthetic bursts: scene generation, inter-frame motion and
//! signal-dependent Gaussian noise.
//!
//! All randomness comes from caller-supplied RNGs or explicit seeds, so a
//! fixed seed reproduces a burst bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{Burst, Image, NoiseParams};
use crate::scalar::Real;

/// Sensor gain levels with `(log10 σ_s, log10 σ_r)` noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainPreset {
    pub level: u32,
    pub log10_sigma_s: f64,
    pub log10_sigma_r: f64,
}

impl GainPreset {
    pub const ALL: [GainPreset; 4] = [
        GainPreset { level: 1, log10_sigma_s: -2.2, log10_sigma_r: -2.6 },
        GainPreset { level: 2, log10_sigma_s: -1.8, log10_sigma_r: -2.2 },
        GainPreset { level: 4, log10_sigma_s: -1.4, log10_sigma_r: -1.8 },
        GainPreset { level: 8, log10_sigma_s: -1.1, log10_sigma_r: -1.5 },
    ];

    pub fn lookup(level: u32) -> Result<GainPreset> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.level == level)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gain level {level} (expected 1, 2, 4 or 8)")))
    }

    pub fn params(&self) -> NoiseParams {
        NoiseParams {
            sigma_r: 10f64.powf(self.log10_sigma_r),
            sigma_s: 10f64.powf(self.log10_sigma_s),
        }
    }

    /// Gain 8 lies beyond the noise levels denoisers are usually tuned on.
    pub fn outside_training_range(&self) -> bool {
        self.level == 8
    }
}

pub fn gain_preset(level: u32) -> Result<NoiseParams> {
    GainPreset::lookup(level).map(|p| p.params())
}

/// Range of `log10 σ_r` drawn by [`sample_noise_params`].
pub const LOG10_SIGMA_R_RANGE: (f64, f64) = (-3.0, -1.5);
/// Range of `log10 σ_s` drawn by [`sample_noise_params`].
pub const LOG10_SIGMA_S_RANGE: (f64, f64) = (-4.0, -2.0);

/// Draws noise parameters uniformly in the log10 domain.
pub fn sample_noise_params<R: Rng + ?Sized>(rng: &mut R) -> NoiseParams {
    let lr = rng.random_range(LOG10_SIGMA_R_RANGE.0..=LOG10_SIGMA_R_RANGE.1);
    let ls = rng.random_range(LOG10_SIGMA_S_RANGE.0..=LOG10_SIGMA_S_RANGE.1);
    NoiseParams {
        sigma_r: 10f64.powf(lr),
        sigma_s: 10f64.powf(ls),
    }
}

/// Global integer translation of one frame relative to the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
pub struct Shift {
    pub dy: i64,
    pub dx: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MotionConfig {
    /// Bound on `|dy|` and `|dx|` for every frame.
    pub max_shift: usize,
    /// Bound on the independent per-frame component; the rest of the
    /// budget (`max_shift - jitter`) goes to a linear drift across the burst.
    pub jitter: usize,
    pub seed: u64,
}

impl MotionConfig {
    /// Independent uniform shifts in `[-max_shift, max_shift]`.
    pub fn uniform(max_shift: usize, seed: u64) -> Self {
        Self { max_shift, jitter: max_shift, seed }
    }
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self::uniform(2, 0)
    }
}

/// A burst together with the shift applied to each frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedBurst<T> {
    pub burst: Burst<T>,
    pub shifts: Vec<Shift>,
}

/// Crops `frames` translated windows out of `clean`.
///
/// Frames are `(H - 2m) × (W - 2m)` for `m = max_shift`; frame 0 is the
/// central crop and frame `t` samples `clean[m + y + dy_t, m + x + dx_t]`.
pub fn synth_motion<T: Real>(clean: &Image<T>, frames: usize, cfg: &MotionConfig) -> Result<ShiftedBurst<T>> {
    if frames == 0 {
        return Err(Error::InvalidArgument("a burst needs at least one frame".into()));
    }
    if cfg.jitter > cfg.max_shift {
        return Err(Error::InvalidArgument(format!(
            "jitter {} exceeds max_shift {}",
            cfg.jitter, cfg.max_shift
        )));
    }
    let m = cfg.max_shift;
    if clean.height() <= 2 * m || clean.width() <= 2 * m {
        return Err(Error::InvalidArgument(format!(
            "{}x{} image is too small for max_shift {m}",
            clean.height(),
            clean.width()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let drift_bound = (cfg.max_shift - cfg.jitter) as i64;
    let jitter = cfg.jitter as i64;
    let drift = (
        rng.random_range(-drift_bound..=drift_bound),
        rng.random_range(-drift_bound..=drift_bound),
    );
    let mut shifts = vec![Shift::default()];
    for t in 1..frames {
        let frac = if frames > 1 { t as f64 / (frames - 1) as f64 } else { 0.0 };
        let dy = (drift.0 as f64 * frac).round() as i64 + rng.random_range(-jitter..=jitter);
        let dx = (drift.1 as f64 * frac).round() as i64 + rng.random_range(-jitter..=jitter);
        shifts.push(Shift { dy, dx });
    }
    let burst = Burst::new(shifts.iter().map(|s| crop_shifted(clean, m, *s)).collect())?;
    Ok(ShiftedBurst { burst, shifts })
}

pub(crate) fn crop_shifted<T: Real>(clean: &Image<T>, margin: usize, shift: Shift) -> Image<T> {
    let (h, w) = (clean.height() - 2 * margin, clean.width() - 2 * margin);
    let oy = (margin as i64 + shift.dy) as usize;
    let ox = (margin as i64 + shift.dx) as usize;
    Image::from_fn(h, w, clean.channels(), |y, x, c| clean.get(oy + y, ox + x, c))
}

/// Adds `N(0, σ_r² + σ_s²·max(X, 0))` noise to every sample independently.
/// Output is not clipped.
pub fn add_noise<T: Real, R: Rng + ?Sized>(burst: &Burst<T>, params: &NoiseParams, rng: &mut R) -> Burst<T> {
    let frames = burst
        .frames()
        .iter()
        .map(|f| {
            f.map(|x| {
                let z: f64 = rng.sample(StandardNormal);
                T::of(x.as_f64() + z * params.variance(x.as_f64()).sqrt())
            })
        })
        .collect();
    Burst::new(frames).expect("noise preserves frame shapes")
}

/// Procedural test scene: smooth shading, flat shapes with sharp edges,
/// oriented gratings and thin lines, in roughly `[0.05, 0.95]`.
pub fn synthetic_scene<T: Real>(height: usize, width: usize, channels: usize, seed: u64) -> Image<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (hf, wf) = (height.max(1) as f64, width.max(1) as f64);

    let tint: Vec<f64> = (0..channels).map(|_| rng.random_range(0.8..1.2)).collect();
    let grad = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
    let base = rng.random_range(0.35..0.55);

    enum Shape {
        Disc { cy: f64, cx: f64, r: f64 },
        Rect { y0: f64, x0: f64, y1: f64, x1: f64 },
        Grating { cy: f64, cx: f64, r: f64, freq: f64, angle: f64 },
        Line { y0: f64, x0: f64, angle: f64, width: f64 },
    }
    let n_shapes = 6 + ((hf * wf).sqrt() / 24.0) as usize;
    let shapes: Vec<(Shape, f64)> = (0..n_shapes)
        .map(|i| {
            let cy = rng.random_range(0.0..hf);
            let cx = rng.random_range(0.0..wf);
            let size = rng.random_range(0.08..0.3) * hf.min(wf);
            let shape = match i % 4 {
                0 => Shape::Disc { cy, cx, r: size },
                1 => Shape::Rect { y0: cy, x0: cx, y1: cy + size, x1: cx + 1.5 * size },
                2 => Shape::Grating {
                    cy,
                    cx,
                    r: size,
                    freq: rng.random_range(0.15..0.6),
                    angle: rng.random_range(0.0..std::f64::consts::PI),
                },
                _ => Shape::Line {
                    y0: cy,
                    x0: cx,
                    angle: rng.random_range(0.0..std::f64::consts::PI),
                    width: rng.random_range(0.6..1.8),
                },
            };
            (shape, rng.random_range(-0.35..0.35))
        })
        .collect();

    Image::from_fn(height, width, channels, |y, x, c| {
        let (yf, xf) = (y as f64, x as f64);
        let mut v = base + grad.0 * (yf / hf - 0.5) + grad.1 * (xf / wf - 0.5);
        for (shape, amp) in &shapes {
            let contrib = match *shape {
                Shape::Disc { cy, cx, r } => ((yf - cy).powi(2) + (xf - cx).powi(2) <= r * r) as u8 as f64,
                Shape::Rect { y0, x0, y1, x1 } => (yf >= y0 && yf < y1 && xf >= x0 && xf < x1) as u8 as f64,
                Shape::Grating { cy, cx, r, freq, angle } => {
                    if (yf - cy).powi(2) + (xf - cx).powi(2) <= r * r {
                        0.5 * (freq * (xf * angle.cos() + yf * angle.sin())).sin()
                    } else {
                        0.0
                    }
                }
                Shape::Line { y0, x0, angle, width } => {
                    let d = ((yf - y0) * angle.cos() - (xf - x0) * angle.sin()).abs();
                    (d <= width) as u8 as f64
                }
            };
            v += amp * contrib;
        }
        T::of((v * tint[c]).clamp(0.05, 0.95))
    })
}
