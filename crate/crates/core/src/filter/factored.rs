use crate::error::Result;
use crate::field::{CoefficientField, KernelBasis};
use crate::image::{Burst, Image};
use crate::scalar::Real;

use super::conv::convolve_plane_add;

/// Basis-factored filtering in the spatial domain.
///
/// For every basis kernel `b` the burst is reduced to
/// `F_b = Σ_t I_t ⋆ v_{b,t}`, then each pixel mixes `Σ_b c_n[b]·F_b[n]`.
/// Basis elements are visited in order, so the per-pixel sum order is fixed.
pub fn filter_factored<T: Real>(noisy: &Burst<T>, basis: &KernelBasis<T>, coeffs: &CoefficientField<T>) -> Result<Image<T>> {
    let shape = basis.shape();
    shape.check_burst(noisy.len(), noisy.channels())?;
    coeffs.check(basis, noisy.height(), noisy.width())?;
    let (h, w) = (noisy.height(), noisy.width());

    let mut out = Image::zeros(h, w, noisy.channels());
    let mut filtered = vec![T::zero(); h * w];
    for b in 0..basis.len() {
        let weights = coeffs.component(b);
        for c in 0..noisy.channels() {
            let g = shape.group_for_channel(c);
            filtered.iter_mut().for_each(|v| *v = T::zero());
            for t in 0..noisy.len() {
                convolve_plane_add(noisy.frame(t).plane(c), h, w, basis.slice(b, g, t), shape.ksize, &mut filtered);
            }
            for ((o, &f), &cw) in out.plane_mut(c).iter_mut().zip(&filtered).zip(&weights) {
                *o += cw * f;
            }
        }
    }
    Ok(out)
}
