use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::KernelField;
use crate::image::{Burst, Image};
use crate::scalar::Real;

/// Applies a per-pixel kernel field to a burst.
///
/// Color images use kernel group `c` for channel `c`, or group 0 for every
/// channel when the field has a single group.
pub fn filter_direct<T: Real>(noisy: &Burst<T>, field: &KernelField<T>) -> Result<Image<T>> {
    if field.height() != noisy.height() || field.width() != noisy.width() {
        return Err(Error::DimensionMismatch(format!(
            "kernel field is {}x{}, burst is {}x{}",
            field.height(),
            field.width(),
            noisy.height(),
            noisy.width()
        )));
    }
    filter_direct_window(noisy, field, 0, 0)
}

/// Filters only the output window `[y0, y0 + field.height()) ×
/// [x0, x0 + field.width())`, reading the full burst (zero outside it).
pub fn filter_direct_window<T: Real>(noisy: &Burst<T>, field: &KernelField<T>, y0: usize, x0: usize) -> Result<Image<T>> {
    check(noisy, field, y0, x0)?;
    Ok(accumulate(noisy, field, y0, x0, 0..noisy.len(), T::one()))
}

/// Single-frame estimates `T · Σ_δ w_n[δ, t] · I_t[n − δ]`, one per frame.
/// Their mean is the [`filter_direct`] output.
pub fn per_frame_estimates<T: Real>(noisy: &Burst<T>, field: &KernelField<T>) -> Result<Vec<Image<T>>> {
    if field.height() != noisy.height() || field.width() != noisy.width() {
        return Err(Error::DimensionMismatch("kernel field and burst differ in size".into()));
    }
    check(noisy, field, 0, 0)?;
    let scale = T::of(noisy.len() as f64);
    Ok((0..noisy.len())
        .map(|t| accumulate(noisy, field, 0, 0, t..t + 1, scale))
        .collect())
}

fn check<T: Real>(noisy: &Burst<T>, field: &KernelField<T>, y0: usize, x0: usize) -> Result<()> {
    field.shape().check_burst(noisy.len(), noisy.channels())?;
    if y0 + field.height() > noisy.height() || x0 + field.width() > noisy.width() {
        return Err(Error::DimensionMismatch(format!(
            "window {}x{} at ({y0}, {x0}) exceeds {}x{} burst",
            field.height(),
            field.width(),
            noisy.height(),
            noisy.width()
        )));
    }
    Ok(())
}

fn accumulate<T: Real>(
    noisy: &Burst<T>,
    field: &KernelField<T>,
    y0: usize,
    x0: usize,
    frames: Range<usize>,
    scale: T,
) -> Image<T> {
    let shape = field.shape();
    let (h, w, channels) = (noisy.height(), noisy.width(), noisy.channels());
    let (fh, fw) = (field.height(), field.width());
    let (k, r) = (shape.ksize, shape.radius());

    // rows of the window, each holding `channels × fw` samples
    let rows: Vec<Vec<T>> = (0..fh)
        .into_par_iter()
        .map(|wy| {
            let y = y0 + wy;
            let iy_lo = (y + r).saturating_sub(h - 1);
            let iy_hi = (k - 1).min(y + r);
            let mut row = vec![T::zero(); channels * fw];
            for wx in 0..fw {
                let x = x0 + wx;
                let ix_lo = (x + r).saturating_sub(w - 1);
                let ix_hi = (k - 1).min(x + r);
                let kernel = field.kernel(wy, wx);
                for c in 0..channels {
                    let g = shape.group_for_channel(c);
                    let mut acc = T::zero();
                    for t in frames.clone() {
                        let plane = noisy.frame(t).plane(c);
                        for iy in iy_lo..=iy_hi {
                            let sy = y + r - iy;
                            let base = shape.index(g, t, iy, 0);
                            let taps = &kernel[base + ix_lo..=base + ix_hi];
                            let src = &plane[sy * w + (x + r - ix_hi)..=sy * w + (x + r - ix_lo)];
                            acc += taps.iter().zip(src.iter().rev()).fold(T::zero(), |s, (&a, &b)| s + a * b);
                        }
                    }
                    row[c * fw + wx] = acc * scale;
                }
            }
            row
        })
        .collect();

    let mut out = Image::zeros(fh, fw, channels);
    for (wy, row) in rows.iter().enumerate() {
        for c in 0..channels {
            out.plane_mut(c)[wy * fw..(wy + 1) * fw].copy_from_slice(&row[c * fw..(c + 1) * fw]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::KernelShape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_burst(rng: &mut ChaCha8Rng, h: usize, w: usize, c: usize, t: usize) -> Burst<f64> {
        Burst::new(
            (0..t)
                .map(|_| Image::from_fn(h, w, c, |_, _, _| rng.random_range(0.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn delta_kernel_returns_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let burst = random_burst(&mut rng, 7, 9, 3, 3);
        let field = KernelField::delta(7, 9, KernelShape::new(5, 3, 3).unwrap());
        assert_eq!(filter_direct(&burst, &field).unwrap(), *burst.reference());
    }

    #[test]
    fn uniform_kernel_on_constant_burst() {
        let v = 0.37f64;
        let (h, w, k) = (9, 10, 3);
        let frame = Image::filled(h, w, 1, v);
        let burst = Burst::new(vec![frame.clone(), frame]).unwrap();
        let field = KernelField::uniform(h, w, KernelShape::new(k, 2, 1).unwrap());
        let out = filter_direct(&burst, &field).unwrap();
        for y in 0..h {
            for x in 0..w {
                let inside = |p: usize, n: usize| (p >= 1) as usize + 1 + (p + 1 < n) as usize;
                let frac = (inside(y, h) * inside(x, w)) as f64 / 9.0;
                assert!((out.get(y, x, 0) - v * frac).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn window_matches_full_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let burst = random_burst(&mut rng, 12, 11, 1, 2);
        let s = KernelShape::new(5, 2, 1).unwrap();
        let logits: Vec<f64> = (0..12 * 11 * s.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let field = KernelField::from_logits(12, 11, s, logits).unwrap();
        let full = filter_direct(&burst, &field).unwrap();

        let mut sub = Vec::new();
        for y in 3..8 {
            for x in 4..10 {
                sub.extend_from_slice(field.kernel(y, x));
            }
        }
        let window = KernelField::new(5, 6, s, sub, true).unwrap();
        let part = filter_direct_window(&burst, &window, 3, 4).unwrap();
        for y in 0..5 {
            for x in 0..6 {
                assert_eq!(part.get(y, x, 0), full.get(y + 3, x + 4, 0));
            }
        }
        assert!(filter_direct_window(&burst, &window, 8, 0).is_err());
    }

    #[test]
    fn all_mass_on_first_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let burst = random_burst(&mut rng, 6, 6, 1, 3);
        let s = KernelShape::new(3, 3, 1).unwrap();
        let mut weights = vec![0.0; 36 * s.len()];
        for px in weights.chunks_mut(s.len()) {
            for (i, w) in px[..9].iter_mut().enumerate() {
                *w = (i + 1) as f64 / 45.0;
            }
        }
        let field = KernelField::new(6, 6, s, weights, true).unwrap();
        let direct = filter_direct(&burst, &field).unwrap();
        let est = per_frame_estimates(&burst, &field).unwrap();
        assert!(est[0].max_abs_diff(&direct.map(|v| 3.0 * v)).unwrap() < 1e-14);
        assert!(est[1..].iter().all(|e| e.as_slice().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn identical_frames_uniform_in_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let frame = Image::from_fn(8, 8, 1, |_, _, _| rng.random_range(0.0..1.0));
        let burst = Burst::new(vec![frame.clone(), frame.clone(), frame]).unwrap();
        let s = KernelShape::new(3, 3, 1).unwrap();
        let spatial: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut kernel = Vec::new();
        for _ in 0..3 {
            kernel.extend(spatial.iter().map(|v| v / 3.0));
        }
        let field = KernelField::broadcast(8, 8, s, &kernel, false).unwrap();
        let direct = filter_direct(&burst, &field).unwrap();
        for e in per_frame_estimates(&burst, &field).unwrap() {
            assert!(e.max_abs_diff(&direct).unwrap() < 1e-14);
        }
    }

    #[test]
    fn dimension_errors() {
        let burst = Burst::new(vec![Image::<f32>::zeros(4, 4, 3)]).unwrap();
        let wrong_size = KernelField::delta(4, 5, KernelShape::new(3, 1, 1).unwrap());
        assert!(filter_direct(&burst, &wrong_size).is_err());
        let wrong_frames = KernelField::delta(4, 4, KernelShape::new(3, 2, 1).unwrap());
        assert!(filter_direct(&burst, &wrong_frames).is_err());
        let wrong_groups = KernelField::delta(4, 4, KernelShape::new(3, 1, 2).unwrap());
        assert!(filter_direct(&burst, &wrong_groups).is_err());
    }
}
