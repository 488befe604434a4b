//! Spatially-varying kernel filtering.
//!
//! All three backends compute the same thing: every output pixel is
//! `Σ_t Σ_δ w_n[δ, t] · I_t[n − δ]`. The index `n − δ` makes this a true
//! convolution, so kernels are never flipped, and samples outside the frame
//! are zero in every backend.
//!
//! * [`filter_direct`] applies a materialized per-pixel [`KernelField`].
//! * [`filter_factored`] convolves every frame with every basis kernel and
//!   mixes the `B` results with the per-pixel coefficients.
//! * [`filter_fourier`] does the factored computation with FFTs, reusing
//!   each frame's forward transform for all basis kernels.
//!
//! [`KernelField`]: crate::field::KernelField

mod conv;
mod direct;
mod factored;
mod fourier;

pub use conv::conv2d_uniform;
pub use direct::{filter_direct, filter_direct_window, per_frame_estimates};
pub use factored::filter_factored;
pub use fourier::{filter_fourier, filter_fourier_tiled, next_smooth, Fft2d, FftPlanCache, FOURIER_TILE};

use crate::error::Error;

/// Filtering implementation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Direct,
    Factored,
    Fourier,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Direct, Backend::Factored, Backend::Fourier];

    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Direct => "direct",
            Backend::Factored => "factored",
            Backend::Fourier => "fourier",
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Backend::Direct),
            "factored" => Ok(Backend::Factored),
            "fourier" => Ok(Backend::Fourier),
            other => Err(Error::InvalidArgument(format!(
                "unknown backend `{other}` (expected direct, factored or fourier)"
            ))),
        }
    }
}
