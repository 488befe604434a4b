use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{KernelField, KernelShape};
use crate::image::{Burst, NoiseParams};
use crate::normalize::softmax_in_place;
use crate::scalar::Real;

/// Default bandwidth `h`, in units of the local noise standard deviation.
pub const DEFAULT_BANDWIDTH: f64 = 0.6;

/// Floor on the local noise variance, so noiseless bursts stay finite.
const MIN_NOISE_VAR: f64 = 1e-20;

/// Offsets whose integral images are held in memory at once.
const OFFSET_BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NlmConfig {
    /// Patches are `(2p + 1)²`.
    pub patch_radius: usize,
    /// Odd kernel side `K`.
    pub ksize: usize,
    pub bandwidth: f64,
    /// One kernel group per color channel instead of one shared kernel.
    pub per_channel: bool,
}

impl Default for NlmConfig {
    fn default() -> Self {
        Self {
            patch_radius: 2,
            ksize: 15,
            bandwidth: DEFAULT_BANDWIDTH,
            per_channel: false,
        }
    }
}

/// Non-local-means kernels for every pixel of the reference frame.
///
/// The weight of tap `(δ, t)` at pixel `n` is the softmax over all taps of
/// `−d² / (2 h² σ̂²)`, where `d²` is the mean squared difference between the
/// reference patch at `n` and the patch at `n − δ` in frame `t` (over pixel
/// pairs that are both inside the frame), and `σ̂² = σ_r² + σ_s²·Î` uses the
/// mean `Î` of the reference patch. Taps whose center `n − δ` falls outside
/// the frame get weight zero.
pub fn estimate_kernels_nlm<T: Real>(noisy: &Burst<T>, params: &NoiseParams, cfg: &NlmConfig) -> Result<KernelField<T>> {
    if !(cfg.bandwidth > 0.0 && cfg.bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {}", cfg.bandwidth)));
    }
    let groups = if cfg.per_channel { noisy.channels() } else { 1 };
    let shape = KernelShape::new(cfg.ksize, noisy.len(), groups)?;
    let (h, w) = (noisy.height(), noisy.width());
    let (k, r, p) = (shape.ksize, shape.radius(), cfg.patch_radius);
    let d = shape.len();

    let group_channels = |g: usize| -> Vec<usize> {
        if cfg.per_channel {
            vec![g]
        } else {
            (0..noisy.channels()).collect()
        }
    };

    // 1 / (2 h² σ̂²) per pixel and group
    let inv_scale: Vec<Vec<f64>> = (0..groups)
        .map(|g| {
            let chans = group_channels(g);
            let mut sum_img = vec![0.0; h * w];
            for &c in &chans {
                for (s, v) in sum_img.iter_mut().zip(noisy.reference().plane(c)) {
                    *s += v.as_f64();
                }
            }
            let integral = Integral::new(&sum_img, h, w);
            let ones = Integral::new(&vec![1.0; h * w], h, w);
            (0..h * w)
                .map(|i| {
                    let (y, x) = (i / w, i % w);
                    let mean = integral.patch(y, x, p) / (ones.patch(y, x, p) * chans.len() as f64);
                    let var = params.variance(mean).max(MIN_NOISE_VAR);
                    1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth * var)
                })
                .collect()
        })
        .collect();

    let offsets: Vec<(usize, usize, usize)> = (0..noisy.len())
        .flat_map(|t| (0..k).flat_map(move |iy| (0..k).map(move |ix| (t, iy, ix))))
        .collect();

    let mut weights = vec![T::zero(); h * w * d];
    if h == 0 || w == 0 {
        return KernelField::new(h, w, shape, weights, true);
    }
    for (g, group_scale) in inv_scale.iter().enumerate() {
        let chans = group_channels(g);
        for batch in offsets.chunks(OFFSET_BATCH) {
            // (squared difference sums, valid pair counts) per offset
            let sums: Vec<(Integral, Integral)> = batch
                .par_iter()
                .map(|&(t, iy, ix)| {
                    let (dy, dx) = (iy as i64 - r as i64, ix as i64 - r as i64);
                    let mut diff = vec![0.0; h * w];
                    let mut valid = vec![0.0; h * w];
                    for y in 0..h {
                        let sy = y as i64 - dy;
                        if sy < 0 || sy >= h as i64 {
                            continue;
                        }
                        for x in 0..w {
                            let sx = x as i64 - dx;
                            if sx < 0 || sx >= w as i64 {
                                continue;
                            }
                            let (i, j) = (y * w + x, sy as usize * w + sx as usize);
                            valid[i] = chans.len() as f64;
                            diff[i] = chans
                                .iter()
                                .map(|&c| {
                                    let a = noisy.reference().plane(c)[i].as_f64();
                                    let b = noisy.frame(t).plane(c)[j].as_f64();
                                    (a - b) * (a - b)
                                })
                                .sum();
                        }
                    }
                    (Integral::new(&diff, h, w), Integral::new(&valid, h, w))
                })
                .collect();

            weights.par_chunks_mut(w * d).enumerate().for_each(|(y, row)| {
                for x in 0..w {
                    let kernel = &mut row[x * d..(x + 1) * d];
                    let scale = group_scale[y * w + x];
                    for (&(t, iy, ix), (diff, valid)) in batch.iter().zip(&sums) {
                        let (sy, sx) = (y as i64 - (iy as i64 - r as i64), x as i64 - (ix as i64 - r as i64));
                        let idx = shape.index(g, t, iy, ix);
                        kernel[idx] = if sy < 0 || sy >= h as i64 || sx < 0 || sx >= w as i64 {
                            T::neg_infinity()
                        } else {
                            let d2 = diff.patch(y, x, p) / valid.patch(y, x, p);
                            T::of(-d2 * scale)
                        };
                    }
                }
            });
        }
    }
    weights.par_chunks_mut(shape.group_len()).for_each(softmax_in_place);
    KernelField::new(h, w, shape, weights, true)
}

/// Summed-area table with a zero border row and column.
struct Integral {
    h: usize,
    w: usize,
    table: Vec<f64>,
}

impl Integral {
    fn new(values: &[f64], h: usize, w: usize) -> Self {
        let mut table = vec![0.0; (h + 1) * (w + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += values[y * w + x];
                table[(y + 1) * (w + 1) + x + 1] = table[y * (w + 1) + x + 1] + row;
            }
        }
        Self { h, w, table }
    }

    /// Sum over the `(2p + 1)²` box centered at `(y, x)`, clipped to the grid.
    fn patch(&self, y: usize, x: usize, p: usize) -> f64 {
        let (y0, x0) = (y.saturating_sub(p), x.saturating_sub(p));
        let (y1, x1) = ((y + p + 1).min(self.h), (x + p + 1).min(self.w));
        let at = |yy: usize, xx: usize| self.table[yy * (self.w + 1) + xx];
        at(y1, x1) - at(y0, x1) - at(y1, x0) + at(y0, x0)
    }
}
