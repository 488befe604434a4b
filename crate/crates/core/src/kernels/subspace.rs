use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::KernelBasis;
use crate::scalar::Real;

/// Singular values below `DEFAULT_RANK_TOL · σ_max` do not count toward rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Singular values of the `B × K²TC` basis matrix, descending.
pub fn basis_singular_values<T: Real>(basis: &KernelBasis<T>) -> Result<Vec<f64>> {
    let d = basis.shape().len();
    let data = basis.as_slice();
    let m = Mat::<f64>::from_fn(basis.len(), d, |i, j| data[i * d + j].as_f64());
    let mut sv = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

fn numerical_rank(sv: &[f64], tol: f64) -> usize {
    let max = sv.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Number of singular values exceeding `tol · σ_max`.
pub fn basis_rank<T: Real>(basis: &KernelBasis<T>, tol: f64) -> Result<usize> {
    Ok(numerical_rank(&basis_singular_values(basis)?, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapStats {
    pub rank_a: usize,
    pub rank_b: usize,
    /// Rank of the stacked `2B`-row matrix.
    pub pair_rank: usize,
    /// `1 − pair_rank / (rank_a + rank_b)`, in `[0, 0.5]`.
    pub ratio: f64,
}

/// Shared-subspace measure between two bases at the default tolerance.
pub fn overlap_ratio<T: Real>(a: &KernelBasis<T>, b: &KernelBasis<T>) -> Result<OverlapStats> {
    overlap_ratio_with_tol(a, b, DEFAULT_RANK_TOL)
}

pub fn overlap_ratio_with_tol<T: Real>(a: &KernelBasis<T>, b: &KernelBasis<T>, tol: f64) -> Result<OverlapStats> {
    let joint = a.concat(b)?;
    let rank_a = basis_rank(a, tol)?;
    let rank_b = basis_rank(b, tol)?;
    let pair_rank = basis_rank(&joint, tol)?;
    let denom = rank_a + rank_b;
    let ratio = if denom == 0 { 0.0 } else { 1.0 - pair_rank as f64 / denom as f64 };
    Ok(OverlapStats { rank_a, rank_b, pair_rank, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::KernelShape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shape() -> KernelShape {
        KernelShape::new(3, 2, 1).unwrap()
    }

    fn gaussian_rows(rng: &mut ChaCha8Rng, rows: usize, d: usize) -> Vec<f64> {
        (0..rows * d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// `rows × d` matrix of rank `r` as a product of random factors.
    fn low_rank(rng: &mut ChaCha8Rng, rows: usize, r: usize, d: usize) -> Vec<f64> {
        let a = gaussian_rows(rng, rows, r);
        let b = gaussian_rows(rng, r, d);
        let mut out = vec![0.0; rows * d];
        for i in 0..rows {
            for k in 0..r {
                for j in 0..d {
                    out[i * d + j] += a[i * r + k] * b[k * d + j];
                }
            }
        }
        out
    }

    fn standard_rows(idx: &[usize], d: usize) -> Vec<f64> {
        let mut out = vec![0.0; idx.len() * d];
        for (r, &i) in idx.iter().enumerate() {
            out[r * d + i] = 1.0;
        }
        out
    }

    #[test]
    fn copies_have_rank_one() {
        let s = shape();
        let row: Vec<f64> = (0..s.len()).map(|i| i as f64 + 1.0).collect();
        let data = row.repeat(6);
        let basis = KernelBasis::new(s, 6, data, false).unwrap();
        assert_eq!(basis_rank(&basis, DEFAULT_RANK_TOL).unwrap(), 1);
    }

    #[test]
    fn orthonormal_rows_are_full_rank() {
        let s = shape();
        let basis = KernelBasis::new(s, 5, standard_rows(&[0, 3, 7, 11, 17], s.len()), false).unwrap();
        assert_eq!(basis_rank(&basis, DEFAULT_RANK_TOL).unwrap(), 5);
        let sv = basis_singular_values(&basis).unwrap();
        assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn product_construction_rank_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = shape();
        let basis = KernelBasis::new(s, 8, low_rank(&mut rng, 8, 5, s.len()), false).unwrap();
        assert_eq!(basis_rank(&basis, DEFAULT_RANK_TOL).unwrap(), 5);
        let oracle = nalgebra::DMatrix::from_row_slice(8, s.len(), basis.as_slice()).singular_values();
        let max = oracle.max();
        assert_eq!(oracle.iter().filter(|&&v| v > DEFAULT_RANK_TOL * max).count(), 5);
    }

    #[test]
    fn rank_ignores_row_order_and_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = shape();
        let d = s.len();
        let data = low_rank(&mut rng, 6, 4, d);
        let base = KernelBasis::new(s, 6, data.clone(), false).unwrap();
        let perm = [3, 0, 5, 1, 4, 2];
        let scales = [2.0, -0.5, 7.0, 1e-3, -3.0, 11.0];
        let mut moved = Vec::with_capacity(data.len());
        for (r, &p) in perm.iter().enumerate() {
            moved.extend(data[p * d..(p + 1) * d].iter().map(|v| v * scales[r]));
        }
        let other = KernelBasis::new(s, 6, moved, false).unwrap();
        assert_eq!(basis_rank(&base, DEFAULT_RANK_TOL).unwrap(), basis_rank(&other, DEFAULT_RANK_TOL).unwrap());
    }

    #[test]
    fn zero_basis_has_rank_zero() {
        let basis = KernelBasis::new(shape(), 2, vec![0.0; 2 * 18], false).unwrap();
        assert_eq!(basis_rank(&basis, DEFAULT_RANK_TOL).unwrap(), 0);
        assert_eq!(overlap_ratio(&basis, &basis).unwrap().ratio, 0.0);
    }

    #[test]
    fn identical_bases_overlap_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = shape();
        let v = KernelBasis::new(s, 4, gaussian_rows(&mut rng, 4, s.len()), false).unwrap();
        let stats = overlap_ratio(&v, &v).unwrap();
        assert_eq!(stats.ratio, 0.5);
        assert_eq!(stats.pair_rank, 4);
    }

    #[test]
    fn complementary_bases_do_not_overlap() {
        let s = shape();
        let d = s.len();
        let a = KernelBasis::new(s, 4, standard_rows(&[0, 1, 2, 3], d), false).unwrap();
        let b = KernelBasis::new(s, 4, standard_rows(&[4, 5, 6, 7], d), false).unwrap();
        assert_eq!(overlap_ratio(&a, &b).unwrap().ratio, 0.0);
    }

    #[test]
    fn half_shared_row_space() {
        let s = shape();
        let d = s.len();
        let a = KernelBasis::new(s, 4, standard_rows(&[0, 1, 2, 3], d), false).unwrap();
        let b = KernelBasis::new(s, 4, standard_rows(&[2, 3, 4, 5], d), false).unwrap();
        let stats = overlap_ratio(&a, &b).unwrap();
        assert_eq!(stats.pair_rank, 6);
        assert_eq!(stats.ratio, 0.25);
    }

    #[test]
    fn symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = shape();
        let d = s.len();
        for _ in 0..20 {
            let ra = rng.random_range(1..=6);
            let rb = rng.random_range(1..=6);
            let a = KernelBasis::new(s, 6, low_rank(&mut rng, 6, ra, d), false).unwrap();
            let b = KernelBasis::new(s, 6, low_rank(&mut rng, 6, rb, d), false).unwrap();
            let ab = overlap_ratio(&a, &b).unwrap();
            let ba = overlap_ratio(&b, &a).unwrap();
            assert_eq!(ab.ratio, ba.ratio);
            assert!((0.0..=0.5).contains(&ab.ratio));
        }
    }

    #[test]
    fn shape_mismatch_errors() {
        let a = KernelBasis::new(shape(), 1, vec![1.0; 18], false).unwrap();
        let b = KernelBasis::new(KernelShape::new(3, 1, 1).unwrap(), 1, vec![1.0; 9], false).unwrap();
        assert!(overlap_ratio(&a, &b).is_err());
    }
}
