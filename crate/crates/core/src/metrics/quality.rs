use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;

/// Reported in place of `+∞` for identical images.
pub const PSNR_CAP: f64 = 99.0;

fn check_shape<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.height(),
            a.width(),
            a.channels(),
            b.height(),
            b.width(),
            b.channels()
        )));
    }
    Ok(())
}

pub fn mse<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    check_shape(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| {
            let d = x.as_f64() - y.as_f64();
            d * d
        })
        .sum();
    Ok(sum / a.len() as f64)
}

/// `10·log10(1 / MSE)` for unit peak, capped at [`PSNR_CAP`].
pub fn psnr<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 { PSNR_CAP } else { (-10.0 * m.log10()).min(PSNR_CAP) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossTerms {
    pub l2_intensity: f64,
    pub l1_gradient: f64,
}

/// Mean squared intensity error and mean absolute gradient error.
///
/// Gradients are forward differences, zero in the last column (x) and last
/// row (y). `l1_gradient = (Σ|∂x e| + Σ|∂y e|) / (H·W·C)` with `e = pred − truth`.
pub fn loss_terms<T: Real>(pred: &Image<T>, truth: &Image<T>) -> Result<LossTerms> {
    let l2_intensity = mse(pred, truth)?;
    let (h, w) = (pred.height(), pred.width());
    let mut grad = 0.0;
    for c in 0..pred.channels() {
        let (p, t) = (pred.plane(c), truth.plane(c));
        let e = |i: usize| p[i].as_f64() - t[i].as_f64();
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    grad += (e(i + 1) - e(i)).abs();
                }
                if y + 1 < h {
                    grad += (e(i + w) - e(i)).abs();
                }
            }
        }
    }
    let l1_gradient = if pred.is_empty() { 0.0 } else { grad / pred.len() as f64 };
    Ok(LossTerms { l2_intensity, l1_gradient })
}
