//! Kernel-field estimation, low-rank compression onto a burst-specific
//! basis, and analysis of basis subspaces.

mod basis;
mod cluster;
mod nlm;
mod subspace;

pub use basis::{compress_kernel_field, reconstruct_kernels, relative_error, CompressedField};
pub use cluster::{cluster_coefficients, wcss_of, Clustering};
pub use nlm::{estimate_kernels_nlm, NlmConfig, DEFAULT_BANDWIDTH};
pub use subspace::{basis_rank, basis_singular_values, overlap_ratio, overlap_ratio_with_tol, OverlapStats, DEFAULT_RANK_TOL};
