use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CoefficientField, KernelBasis, KernelField};
use crate::scalar::Real;

/// Rows of the field matrix folded into the Gram matrix at once.
const GRAM_BLOCK: usize = 4096;

/// `w_n = Σ_b c_n[b] · v_b` at every pixel.
///
/// The result is flagged normalized when both inputs are, since a convex
/// combination of averaging kernels averages.
pub fn reconstruct_kernels<T: Real>(basis: &KernelBasis<T>, coeffs: &CoefficientField<T>) -> Result<KernelField<T>> {
    if coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients per pixel for a basis of {}",
            coeffs.len(),
            basis.len()
        )));
    }
    let shape = basis.shape();
    let d = shape.len();
    let (h, w) = (coeffs.height(), coeffs.width());
    let mut weights = vec![T::zero(); h * w * d];
    weights
        .par_chunks_mut(d.max(1))
        .zip(coeffs.as_slice().par_chunks(basis.len().max(1)))
        .for_each(|(kernel, c)| {
            for (b, &cb) in c.iter().enumerate() {
                for (k, &v) in kernel.iter_mut().zip(basis.element(b)) {
                    *k += cb * v;
                }
            }
        });
    KernelField::new(h, w, shape, weights, basis.is_normalized() && coeffs.is_normalized())
}

/// Rank-`B` factorization of a kernel field.
#[derive(Debug, Clone)]
pub struct CompressedField<T> {
    pub basis: KernelBasis<T>,
    pub coeffs: CoefficientField<T>,
    /// All singular values of the `HW × K²TC` field matrix, descending.
    /// Taken from a Gram matrix, so absolute accuracy is about
    /// `sqrt(ε)·σ_max`.
    pub singular_values: Vec<f64>,
}

impl<T: Real> CompressedField<T> {
    /// `sqrt(Σ_{i ≥ B} σ_i²)`, the smallest Frobenius error any rank-`B`
    /// factorization can reach.
    pub fn optimal_error(&self) -> f64 {
        self.singular_values[self.basis.len().min(self.singular_values.len())..]
            .iter()
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt()
    }
}

/// Truncated SVD of the field viewed as an `HW × K²TC` matrix `M`.
///
/// Basis rows are the top `B` right singular vectors and coefficients are
/// `U_B Σ_B`, so `coeffs · basis` is the best rank-`B` approximation of `M`
/// in Frobenius norm. Neither output is normalized.
///
/// The factors come from the symmetric eigendecomposition of the smaller
/// Gram matrix (`MᵀM` or `MMᵀ`), accumulated in `f64`.
pub fn compress_kernel_field<T: Real>(field: &KernelField<T>, rank: usize) -> Result<CompressedField<T>> {
    let shape = field.shape();
    let (n, d) = (field.pixels(), shape.len());
    if rank == 0 || rank > n.min(d) {
        return Err(Error::InvalidArgument(format!(
            "basis size {rank} must be in 1..={} for a {n}x{d} field matrix",
            n.min(d)
        )));
    }
    let m = field.weights();
    let block = |r0: usize, r1: usize| Mat::<f64>::from_fn(r1 - r0, d, |i, j| m[(r0 + i) * d + j].as_f64());

    let (basis_rows, coeff_cols, singular_values) = if n >= d {
        let mut gram = Mat::<f64>::zeros(d, d);
        for r0 in (0..n).step_by(GRAM_BLOCK) {
            let blk = block(r0, (r0 + GRAM_BLOCK).min(n));
            gram = &gram + blk.transpose() * &blk;
        }
        let eig = gram
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let (u, s) = (eig.U(), eig.S());
        let sv: Vec<f64> = (0..d).rev().map(|i| s[i].max(0.0).sqrt()).collect();
        let top = Mat::<f64>::from_fn(d, rank, |i, j| u[(i, d - 1 - j)]);
        let mut coeffs = Mat::<f64>::zeros(n, rank);
        for r0 in (0..n).step_by(GRAM_BLOCK) {
            let r1 = (r0 + GRAM_BLOCK).min(n);
            let prod = block(r0, r1) * &top;
            for i in 0..r1 - r0 {
                for j in 0..rank {
                    coeffs[(r0 + i, j)] = prod[(i, j)];
                }
            }
        }
        let rows: Vec<Vec<f64>> = (0..rank).map(|j| (0..d).map(|i| top[(i, j)]).collect()).collect();
        let cols: Vec<Vec<f64>> = (0..rank).map(|j| (0..n).map(|i| coeffs[(i, j)]).collect()).collect();
        (rows, cols, sv)
    } else {
        let full = block(0, n);
        let gram = &full * full.transpose();
        let eig = gram
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let (u, s) = (eig.U(), eig.S());
        let sv: Vec<f64> = (0..n).rev().map(|i| s[i].max(0.0).sqrt()).collect();
        let top = Mat::<f64>::from_fn(n, rank, |i, j| u[(i, n - 1 - j)]);
        let proj = full.transpose() * &top;
        let tiny = sv[0] * 1e-13;
        let mut rows = Vec::with_capacity(rank);
        let mut cols = Vec::with_capacity(rank);
        for (j, &sigma) in sv.iter().enumerate().take(rank) {
            if sigma > tiny {
                rows.push((0..d).map(|i| proj[(i, j)] / sigma).collect());
                cols.push((0..n).map(|i| top[(i, j)] * sigma).collect());
            } else {
                rows.push(vec![0.0; d]);
                cols.push(vec![0.0; n]);
            }
        }
        (rows, cols, sv)
    };

    let mut elements = Vec::with_capacity(rank * d);
    let mut coeff_data = vec![T::zero(); n * rank];
    for (j, (row, col)) in basis_rows.iter().zip(&coeff_cols).enumerate() {
        // sign convention: each basis kernel has nonnegative total weight
        let sign = if row.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        elements.extend(row.iter().map(|&v| T::of(sign * v)));
        for (i, &c) in col.iter().enumerate() {
            coeff_data[i * rank + j] = T::of(sign * c);
        }
    }
    Ok(CompressedField {
        basis: KernelBasis::new(shape, rank, elements, false)?,
        coeffs: CoefficientField::new(field.height(), field.width(), rank, coeff_data, false)?,
        singular_values,
    })
}

/// `‖a − b‖_F / ‖a‖_F` over the weights of two fields of the same shape.
pub fn relative_error<T: Real>(reference: &KernelField<T>, approx: &KernelField<T>) -> Result<f64> {
    if reference.weights().len() != approx.weights().len() || reference.shape() != approx.shape() {
        return Err(Error::DimensionMismatch("fields differ in shape".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in reference.weights().iter().zip(approx.weights()) {
        let (a, b) = (a.as_f64(), b.as_f64());
        num += (a - b) * (a - b);
        den += a * a;
    }
    Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
}
