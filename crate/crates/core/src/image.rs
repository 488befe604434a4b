//! Images, bursts and the noise parameters that describe them.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A `height × width × channels` intensity grid.
///
/// Samples are stored planar (`channel`, `y`, `x`) so that each channel can
/// be handed to the convolution routines as one contiguous plane. Nominal
/// range is `[0, 1]`; noisy frames may leave it.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Real> Image<T> {
    /// Builds an image from planar data, rejecting wrong lengths and
    /// non-finite samples.
    pub fn from_planar(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidArgument("image needs at least one channel".into()));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::DimensionOverflow(format!("{height}x{width}x{channels}")))?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "image {height}x{width}x{channels} needs {expected} samples, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image data"));
        }
        Ok(Self { height, width, channels, data })
    }

    /// Builds an image from interleaved `(y, x, c)` samples.
    pub fn from_interleaved(height: usize, width: usize, channels: usize, data: &[T]) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::DimensionMismatch(format!(
                "interleaved buffer of {} samples for {height}x{width}x{channels}",
                data.len()
            )));
        }
        let hw = height * width;
        let mut planar = vec![T::zero(); data.len()];
        for (i, px) in data.chunks_exact(channels.max(1)).enumerate() {
            for (c, &v) in px.iter().enumerate() {
                planar[c * hw + i] = v;
            }
        }
        Self::from_planar(height, width, channels, planar)
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![T::zero(); height * width * channels],
        }
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: T) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    /// Builds an image by evaluating `f(y, x, c)` at every sample.
    pub fn from_fn(height: usize, width: usize, channels: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(height * width * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(y, x, c));
                }
            }
        }
        Self { height, width, channels, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape<U>(&self, other: &Image<U>) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> T {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: T) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// Planar sample buffer.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[T] {
        let hw = self.height * self.width;
        &self.data[c * hw..(c + 1) * hw]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [T] {
        let hw = self.height * self.width;
        &mut self.data[c * hw..(c + 1) * hw]
    }

    /// Samples in `(y, x, c)` order.
    pub fn to_interleaved(&self) -> Vec<T> {
        let hw = self.height * self.width;
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..hw {
            for c in 0..self.channels {
                out.push(self.data[c * hw + i]);
            }
        }
        out
    }

    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Image {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    /// Largest absolute sample difference; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Image<T>) -> Option<f64> {
        if !self.same_shape(other) {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a.as_f64() - b.as_f64()).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// `T` aligned frames of one scene; frame 0 is the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Burst<T> {
    frames: Vec<Image<T>>,
}

impl<T: Real> Burst<T> {
    pub fn new(frames: Vec<Image<T>>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidArgument("burst needs at least one frame".into()))?;
        if let Some((i, _)) = frames.iter().enumerate().find(|(_, f)| !f.same_shape(first)) {
            return Err(Error::DimensionMismatch(format!(
                "frame {i} is {}x{}x{}, reference is {}x{}x{}",
                frames[i].height,
                frames[i].width,
                frames[i].channels,
                first.height,
                first.width,
                first.channels
            )));
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels
    }

    pub fn reference(&self) -> &Image<T> {
        &self.frames[0]
    }

    pub fn frame(&self, t: usize) -> &Image<T> {
        &self.frames[t]
    }

    pub fn frames(&self) -> &[Image<T>] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Image<T>> {
        self.frames
    }

    pub fn cast<U: Real>(&self) -> Burst<U> {
        Burst {
            frames: self.frames.iter().map(Image::cast).collect(),
        }
    }
}

/// Read and shot noise standard deviations in intensity units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    pub sigma_r: f64,
    pub sigma_s: f64,
}

impl NoiseParams {
    pub fn new(sigma_r: f64, sigma_s: f64) -> Result<Self> {
        if !(sigma_r.is_finite() && sigma_s.is_finite()) {
            return Err(Error::NonFinite("noise parameters"));
        }
        if sigma_r < 0.0 || sigma_s < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise parameters must be nonnegative (sigma_r={sigma_r}, sigma_s={sigma_s})"
            )));
        }
        Ok(Self { sigma_r, sigma_s })
    }

    /// `sigma_r^2 + sigma_s^2 * max(x, 0)`.
    #[inline]
    pub fn variance(&self, x: f64) -> f64 {
        self.sigma_r * self.sigma_r + self.sigma_s * self.sigma_s * x.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaved_round_trip() {
        let data: Vec<f64> = (0..24).map(f64::from).collect();
        let img = Image::from_interleaved(2, 4, 3, &data).unwrap();
        assert_eq!(img.get(1, 2, 1), data[(4 + 2) * 3 + 1]);
        assert_eq!(img.to_interleaved(), data);
    }

    #[test]
    fn rejects_bad_images() {
        assert!(Image::<f32>::from_planar(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(Image::<f32>::from_planar(1, 2, 1, vec![0.0, f32::NAN]).is_err());
        assert!(Image::<f32>::from_planar(1, 1, 0, vec![]).is_err());
    }

    #[test]
    fn burst_requires_matching_frames() {
        let a = Image::<f32>::zeros(4, 4, 1);
        let b = Image::<f32>::zeros(4, 5, 1);
        assert!(Burst::new(vec![a.clone(), b]).is_err());
        assert!(Burst::<f32>::new(vec![]).is_err());
        assert_eq!(Burst::new(vec![a.clone(), a]).unwrap().len(), 2);
    }

    #[test]
    fn noise_params_validate() {
        assert!(NoiseParams::new(-1e-3, 0.0).is_err());
        assert!(NoiseParams::new(0.0, f64::INFINITY).is_err());
        let p = NoiseParams::new(0.1, 0.2).unwrap();
        assert!((p.variance(-1.0) - 0.01).abs() < 1e-15);
        assert!((p.variance(0.5) - (0.01 + 0.04 * 0.5)).abs() < 1e-15);
    }
}
