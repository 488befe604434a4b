//! Image quality, loss terms as measurements, and analytic cost accounting.

mod cost;
mod quality;

pub use cost::{
    flop_report, fourier_grid, prediction_count, CostParams, FlopReport, PredictionMode, FFT_FLOPS_PER_POINT_LOG,
    FLOPS_PER_COMPLEX_PRODUCT,
};
pub use quality::{loss_terms, mse, psnr, LossTerms, PSNR_CAP};
