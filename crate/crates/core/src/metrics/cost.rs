use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{next_smooth, Backend};

/// Model cost of one real FFT of `n` points.
pub const FFT_FLOPS_PER_POINT_LOG: f64 = 2.5;
/// One complex multiply-add per half-spectrum bin.
pub const FLOPS_PER_COMPLEX_PRODUCT: f64 = 6.0;

/// Problem size: `H × W` pixels, `K × K` taps, `T` frames, `B` basis
/// elements, `C` channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostParams {
    pub height: usize,
    pub width: usize,
    pub ksize: usize,
    pub frames: usize,
    pub basis: usize,
    pub channels: usize,
}

impl CostParams {
    fn check(&self) -> Result<()> {
        if [self.height, self.width, self.ksize, self.frames, self.basis, self.channels].contains(&0) {
            return Err(Error::InvalidArgument(format!("all cost dimensions must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMode {
    /// One full kernel per pixel.
    Kpn,
    /// Per-pixel coefficients plus a shared basis.
    Basis,
}

/// Values a predictor emits: `WHK²TC` per-pixel kernels, or `WHB + K²TBC`
/// for a basis and its coefficients.
pub fn prediction_count(p: &CostParams, mode: PredictionMode) -> Result<u128> {
    p.check()?;
    let [h, w, k, t, b, c] = [p.height, p.width, p.ksize, p.frames, p.basis, p.channels].map(|v| v as u128);
    let overflow = || Error::InvalidArgument("prediction count overflows u128".into());
    let kernel = k.checked_mul(k).and_then(|v| v.checked_mul(t)).and_then(|v| v.checked_mul(c)).ok_or_else(overflow)?;
    let pixels = h.checked_mul(w).ok_or_else(overflow)?;
    match mode {
        PredictionMode::Kpn => pixels.checked_mul(kernel).ok_or_else(overflow),
        PredictionMode::Basis => pixels
            .checked_mul(b)
            .and_then(|v| kernel.checked_mul(b).and_then(|u| v.checked_add(u)))
            .ok_or_else(overflow),
    }
}

/// Analytic cost of one filtering pass. A MAC counts as two FLOPs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopReport {
    pub backend: Backend,
    #[serde(rename = "H")]
    pub height: usize,
    #[serde(rename = "W")]
    pub width: usize,
    #[serde(rename = "K")]
    pub ksize: usize,
    #[serde(rename = "T")]
    pub frames: usize,
    #[serde(rename = "B")]
    pub basis: usize,
    #[serde(rename = "C")]
    pub channels: usize,
    pub prediction_count: u64,
    pub filter_macs: u64,
    /// Transforms plus the frequency-domain products.
    pub fft_flops: f64,
    pub mixing_macs: u64,
    /// `2·(filter_macs + mixing_macs) + fft_flops`.
    pub total_flops: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<f64>,
}

impl FlopReport {
    pub fn params(&self) -> CostParams {
        CostParams {
            height: self.height,
            width: self.width,
            ksize: self.ksize,
            frames: self.frames,
            basis: self.basis,
            channels: self.channels,
        }
    }
}

/// Padded FFT grid `(rows, cols)` used for a full-frame Fourier pass.
pub fn fourier_grid(p: &CostParams) -> (usize, usize) {
    (next_smooth(p.height + p.ksize - 1), next_smooth(p.width + p.ksize - 1))
}

/// Cost model per backend:
///
/// * direct: `HWK²TC` filter MACs.
/// * factored: `HWK²TBC` filter MACs and `HWBC` mixing MACs.
/// * fourier: `(TC + BTC + BC)` real transforms of the padded grid (`n`
///   points, `2.5·n·log2 n` each), `6` FLOPs per half-spectrum bin for each
///   of the `BTC` spectrum products, and `HWBC` mixing MACs.
pub fn flop_report(p: &CostParams, backend: Backend) -> Result<FlopReport> {
    p.check()?;
    let mode = match backend {
        Backend::Direct => PredictionMode::Kpn,
        Backend::Factored | Backend::Fourier => PredictionMode::Basis,
    };
    let to_u64 = |v: u128| u64::try_from(v).map_err(|_| Error::InvalidArgument("count exceeds u64".into()));
    let prediction = to_u64(prediction_count(p, mode)?)?;
    let [h, w, k, t, b, c] = [p.height, p.width, p.ksize, p.frames, p.basis, p.channels].map(|v| v as u128);
    let (filter, mixing, fft) = match backend {
        Backend::Direct => (h * w * k * k * t * c, 0, 0.0),
        Backend::Factored => (h * w * k * k * t * b * c, h * w * b * c, 0.0),
        Backend::Fourier => {
            let (rows, cols) = fourier_grid(p);
            let n = (rows * cols) as f64;
            let transforms = (t * c + b * t * c + b * c) as f64;
            let bins = (rows * (cols / 2 + 1)) as f64;
            let products = (b * t * c) as f64;
            let fft = transforms * FFT_FLOPS_PER_POINT_LOG * n * n.log2() + FLOPS_PER_COMPLEX_PRODUCT * bins * products;
            (0, h * w * b * c, fft)
        }
    };
    let filter_macs = to_u64(filter)?;
    let mixing_macs = to_u64(mixing)?;
    Ok(FlopReport {
        backend,
        height: p.height,
        width: p.width,
        ksize: p.ksize,
        frames: p.frames,
        basis: p.basis,
        channels: p.channels,
        prediction_count: prediction,
        filter_macs,
        fft_flops: fft,
        mixing_macs,
        total_flops: 2.0 * (filter_macs as f64 + mixing_macs as f64) + fft,
        wall_time_ms: None,
    })
}
