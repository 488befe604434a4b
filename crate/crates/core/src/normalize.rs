//! Softmax normalization and the averaging contract for kernels.
//!
//! A kernel "averages" when each channel group is nonnegative and sums to
//! one. Softmax over the logits of one group is how every normalized
//! construction path in the crate enforces it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CoefficientField, KernelBasis, KernelField, KernelShape};
use crate::scalar::Real;

/// Sum tolerance for softmax outputs.
pub const SOFTMAX_TOL: f64 = 1e-6;

/// Default tolerance of [`validate_kernel_field`] for normalized fields.
pub const FIELD_TOL: f64 = 1e-5;

/// Exponentiates and normalizes `values` so they sum to one.
///
/// The maximum is subtracted first, so the result is invariant to adding a
/// constant to every input.
pub fn softmax_normalize<T: Real>(values: &[T]) -> Result<Vec<T>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("softmax input"));
    }
    let mut out = values.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

/// In-place softmax; entries equal to `-inf` get weight zero. An all
/// `-inf` (or empty) slice is left as zeros.
pub(crate) fn softmax_in_place<T: Real>(values: &mut [T]) {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        values.iter_mut().for_each(|v| *v = T::zero());
        return;
    }
    let mut sum = T::zero();
    for v in values.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    let inv = T::one() / sum;
    values.iter_mut().for_each(|v| *v *= inv);
}

/// Result of checking a field against the averaging contract.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    /// Largest `|Σw − 1|` over all pixels and channel groups.
    pub max_deviation: f64,
    pub min_weight: f64,
    /// Pixels with a group sum off by more than `tol` or a weight below `-tol`.
    pub violating_pixels: usize,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.violating_pixels == 0
    }
}

pub fn validate_kernel_field<T: Real>(field: &KernelField<T>, tol: f64) -> ValidationReport {
    let shape = field.shape();
    let group_len = shape.group_len();
    let per_pixel: Vec<(f64, f64, bool)> = field
        .weights()
        .par_chunks(shape.len().max(1))
        .map(|kernel| {
            let mut dev = 0.0f64;
            let mut min = f64::INFINITY;
            for group in kernel.chunks(group_len) {
                let mut sum = 0.0;
                for &w in group {
                    let w = w.as_f64();
                    sum += w;
                    min = min.min(w);
                }
                dev = dev.max((sum - 1.0).abs());
            }
            (dev, min, dev > tol || min < -tol)
        })
        .collect();
    let mut report = ValidationReport {
        max_deviation: 0.0,
        min_weight: if per_pixel.is_empty() { 0.0 } else { f64::INFINITY },
        violating_pixels: 0,
    };
    for (dev, min, bad) in per_pixel {
        report.max_deviation = report.max_deviation.max(dev);
        report.min_weight = report.min_weight.min(min);
        report.violating_pixels += bad as usize;
    }
    report
}

fn softmax_groups<T: Real>(shape: KernelShape, data: &mut [T]) -> Result<()> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel logits"));
    }
    data.par_chunks_mut(shape.group_len()).for_each(softmax_in_place);
    Ok(())
}

impl<T: Real> KernelField<T> {
    /// Normalized field from per-pixel logits, softmax taken per channel group.
    pub fn from_logits(height: usize, width: usize, shape: KernelShape, mut logits: Vec<T>) -> Result<Self> {
        softmax_groups(shape, &mut logits)?;
        KernelField::new(height, width, shape, logits, true)
    }
}

impl<T: Real> KernelBasis<T> {
    /// Normalized basis from logits; each element is softmaxed per channel
    /// group, so every group of every element sums to one.
    pub fn from_logits(shape: KernelShape, len: usize, mut logits: Vec<T>) -> Result<Self> {
        softmax_groups(shape, &mut logits)?;
        KernelBasis::new(shape, len, logits, true)
    }
}

impl<T: Real> CoefficientField<T> {
    pub fn from_logits(height: usize, width: usize, len: usize, mut logits: Vec<T>) -> Result<Self> {
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficient logits"));
        }
        if len > 0 {
            logits.par_chunks_mut(len).for_each(softmax_in_place);
        }
        CoefficientField::new(height, width, len, logits, true)
    }
}

/// Clamps negative weights to zero and rescales every group to sum to one.
///
/// Restores the averaging contract for fields reconstructed from an
/// unconstrained factorization. A group with no positive mass becomes a
/// delta on `(δ = 0, frame 0)`.
pub fn clamp_renormalize<T: Real>(field: &KernelField<T>) -> KernelField<T> {
    let shape = field.shape();
    let mut weights = field.weights().to_vec();
    weights.par_chunks_mut(shape.group_len()).for_each(|group| {
        let mut sum = T::zero();
        for w in group.iter_mut() {
            if *w < T::zero() {
                *w = T::zero();
            }
            sum += *w;
        }
        if sum > T::zero() {
            let inv = T::one() / sum;
            group.iter_mut().for_each(|w| *w *= inv);
        } else {
            group[shape.index(0, 0, shape.radius(), shape.radius())] = T::one();
        }
    });
    KernelField::new(field.height(), field.width(), shape, weights, true)
        .expect("clamped weights keep the field's shape and stay finite")
}
