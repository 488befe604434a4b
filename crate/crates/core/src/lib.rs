//! Burst denoising with spatially-varying kernels.
//!
//! A kernel field assigns every output pixel its own `K × K × T` averaging
//! kernel over a burst of `T` frames. This crate simulates noisy bursts,
//! estimates kernel fields without a learned model, compresses them onto a
//! small per-burst basis, filters with three interchangeable backends, and
//! reports quality and cost.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root name the concrete instantiations.

pub mod bench;
pub mod error;
pub mod field;
pub mod filter;
pub mod image;
pub mod kernels;
pub mod metrics;
pub mod normalize;
pub mod png;
pub mod scalar;
pub mod sim;
pub mod tensor;

pub use error::{Error, Result};
pub use field::{CoefficientField, KernelBasis, KernelField, KernelShape};
pub use filter::{
    conv2d_uniform, filter_direct, filter_factored, filter_fourier, filter_fourier_tiled, per_frame_estimates, Backend,
    FftPlanCache,
};
pub use image::{Burst, Image, NoiseParams};
pub use kernels::{
    basis_rank, cluster_coefficients, compress_kernel_field, estimate_kernels_nlm, overlap_ratio, reconstruct_kernels,
    NlmConfig,
};
pub use metrics::{flop_report, loss_terms, prediction_count, psnr, CostParams, FlopReport, PredictionMode};
pub use normalize::{clamp_renormalize, softmax_normalize, validate_kernel_field, ValidationReport};
pub use scalar::{Precision, Real};
pub use sim::{add_noise, gain_preset, sample_noise_params, synth_motion, GainPreset, MotionConfig};
pub use tensor::{Tensor, TensorCodec};

pub type Image32 = Image<f32>;
pub type Image64 = Image<f64>;
pub type Burst32 = Burst<f32>;
pub type Burst64 = Burst<f64>;
pub type KernelField32 = KernelField<f32>;
pub type KernelField64 = KernelField<f64>;
pub type KernelBasis32 = KernelBasis<f32>;
pub type KernelBasis64 = KernelBasis<f64>;
pub type CoefficientField32 = CoefficientField<f32>;
pub type CoefficientField64 = CoefficientField<f64>;
