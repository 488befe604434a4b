use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;

/// Zero-padded "same" convolution `Σ_δ v[δ]·I[n − δ]` of every channel of
/// `frame` with one `ksize × ksize` kernel (row-major, centered).
pub fn conv2d_uniform<T: Real>(frame: &Image<T>, kernel: &[T], ksize: usize) -> Result<Image<T>> {
    if ksize.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("kernel size must be odd, got {ksize}")));
    }
    if kernel.len() != ksize * ksize {
        return Err(Error::DimensionMismatch(format!(
            "{} taps for a {ksize}x{ksize} kernel",
            kernel.len()
        )));
    }
    let mut out = Image::zeros(frame.height(), frame.width(), frame.channels());
    for c in 0..frame.channels() {
        convolve_plane_add(frame.plane(c), frame.height(), frame.width(), kernel, ksize, out.plane_mut(c));
    }
    Ok(out)
}

/// Adds the convolution of `src` (`h × w`) with `kernel` into `dst`.
pub(crate) fn convolve_plane_add<T: Real>(src: &[T], h: usize, w: usize, kernel: &[T], ksize: usize, dst: &mut [T]) {
    if h == 0 || w == 0 {
        return;
    }
    let r = ksize / 2;
    dst.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        let iy_lo = (y + r).saturating_sub(h - 1);
        let iy_hi = (ksize - 1).min(y + r);
        for (x, out) in row.iter_mut().enumerate() {
            let ix_lo = (x + r).saturating_sub(w - 1);
            let ix_hi = (ksize - 1).min(x + r);
            let mut acc = T::zero();
            for iy in iy_lo..=iy_hi {
                let sy = y + r - iy;
                let taps = &kernel[iy * ksize + ix_lo..=iy * ksize + ix_hi];
                let srow = &src[sy * w + (x + r - ix_hi)..=sy * w + (x + r - ix_lo)];
                acc += taps.iter().zip(srow.iter().rev()).fold(T::zero(), |s, (&a, &b)| s + a * b);
            }
            *out += acc;
        }
    });
}
