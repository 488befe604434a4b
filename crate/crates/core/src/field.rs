//! Per-pixel kernel fields and their low-rank factorization.
//!
//! Every 3D kernel is stored as one contiguous vector of
//! `groups × frames × ksize × ksize` weights in `(group, frame, dy, dx)`
//! order, with `dy, dx` running over the centered window
//! `-(K-1)/2 ..= (K-1)/2`. A window index `i` maps to the offset `i - r`.
//! The on-disk tensor layouts differ and are handled in [`crate::tensor`].

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of one spatio-temporal kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelShape {
    /// Odd spatial side length `K`.
    pub ksize: usize,
    pub frames: usize,
    /// Channel groups: 1 for a shared kernel, or the image channel count.
    pub groups: usize,
}

impl KernelShape {
    pub fn new(ksize: usize, frames: usize, groups: usize) -> Result<Self> {
        if ksize.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("kernel size must be odd, got {ksize}")));
        }
        if frames == 0 || groups == 0 {
            return Err(Error::InvalidArgument("kernel needs at least one frame and group".into()));
        }
        Ok(Self { ksize, frames, groups })
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.ksize / 2
    }

    #[inline]
    pub fn taps(&self) -> usize {
        self.ksize * self.ksize
    }

    /// Weights per group, `K²T`.
    #[inline]
    pub fn group_len(&self) -> usize {
        self.taps() * self.frames
    }

    /// Weights per kernel, `K²TC`.
    #[inline]
    pub fn len(&self) -> usize {
        self.group_len() * self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, group: usize, frame: usize, iy: usize, ix: usize) -> usize {
        ((group * self.frames + frame) * self.ksize + iy) * self.ksize + ix
    }

    /// Flat index of the `(δ = 0, frame)` tap of `group`.
    #[inline]
    pub fn center(&self, group: usize, frame: usize) -> usize {
        self.index(group, frame, self.radius(), self.radius())
    }

    /// Which kernel group filters image channel `channel`.
    #[inline]
    pub fn group_for_channel(&self, channel: usize) -> usize {
        if self.groups == 1 {
            0
        } else {
            channel
        }
    }

    /// Checks the shape against a burst of `frames × channels`.
    pub fn check_burst(&self, frames: usize, channels: usize) -> Result<()> {
        if self.frames != frames {
            return Err(Error::DimensionMismatch(format!(
                "kernels span {} frames, burst has {frames}",
                self.frames
            )));
        }
        if self.groups != 1 && self.groups != channels {
            return Err(Error::DimensionMismatch(format!(
                "{} kernel groups cannot filter a {channels}-channel image",
                self.groups
            )));
        }
        Ok(())
    }
}

/// One kernel per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField<T> {
    height: usize,
    width: usize,
    shape: KernelShape,
    weights: Vec<T>,
    normalized: bool,
}

impl<T: Real> KernelField<T> {
    /// Wraps raw weights. `normalized` asserts the averaging contract
    /// (every group nonnegative and summing to one); it is not re-checked
    /// here, see [`crate::normalize::validate_kernel_field`].
    pub fn new(height: usize, width: usize, shape: KernelShape, weights: Vec<T>, normalized: bool) -> Result<Self> {
        let expected = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(shape.len()))
            .ok_or_else(|| Error::DimensionOverflow("kernel field".into()))?;
        if weights.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "kernel field {height}x{width} with {} weights per pixel needs {expected}, got {}",
                shape.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel field"));
        }
        Ok(Self { height, width, shape, weights, normalized })
    }

    /// All mass on `(δ = 0, frame 0)` in every group.
    pub fn delta(height: usize, width: usize, shape: KernelShape) -> Self {
        let mut weights = vec![T::zero(); height * width * shape.len()];
        for px in weights.chunks_exact_mut(shape.len()) {
            for g in 0..shape.groups {
                px[shape.center(g, 0)] = T::one();
            }
        }
        Self { height, width, shape, weights, normalized: true }
    }

    /// `1 / (K²T)` everywhere.
    pub fn uniform(height: usize, width: usize, shape: KernelShape) -> Self {
        let w = T::of(1.0 / shape.group_len() as f64);
        Self {
            height,
            width,
            shape,
            weights: vec![w; height * width * shape.len()],
            normalized: true,
        }
    }

    /// Same kernel at every pixel.
    pub fn broadcast(height: usize, width: usize, shape: KernelShape, kernel: &[T], normalized: bool) -> Result<Self> {
        if kernel.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "kernel of {} weights for shape needing {}",
                kernel.len(),
                shape.len()
            )));
        }
        let mut weights = Vec::with_capacity(height * width * shape.len());
        for _ in 0..height * width {
            weights.extend_from_slice(kernel);
        }
        Self::new(height, width, shape, weights, normalized)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<T> {
        self.weights
    }

    #[inline]
    pub fn kernel(&self, y: usize, x: usize) -> &[T] {
        let d = self.shape.len();
        let start = (y * self.width + x) * d;
        &self.weights[start..start + d]
    }

    pub fn kernel_mut(&mut self, y: usize, x: usize) -> &mut [T] {
        let d = self.shape.len();
        let start = (y * self.width + x) * d;
        self.normalized = false;
        &mut self.weights[start..start + d]
    }

    /// Returns the field with every weight multiplied by `s`; the
    /// normalized flag is dropped unless `s == 1`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            weights: self.weights.iter().map(|&w| w * s).collect(),
            normalized: self.normalized && s == T::one(),
            ..*self
        }
    }

    pub fn cast<U: Real>(&self) -> KernelField<U> {
        KernelField {
            height: self.height,
            width: self.width,
            shape: self.shape,
            weights: self.weights.iter().map(|v| U::of(v.as_f64())).collect(),
            normalized: self.normalized,
        }
    }

    pub(crate) fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }
}

/// `B` global kernels shared by every pixel of a burst.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis<T> {
    shape: KernelShape,
    len: usize,
    elements: Vec<T>,
    normalized: bool,
}

impl<T: Real> KernelBasis<T> {
    /// `elements` holds the `B` kernels back to back (a row-major
    /// `B × K²TC` matrix).
    pub fn new(shape: KernelShape, len: usize, elements: Vec<T>, normalized: bool) -> Result<Self> {
        if elements.len() != len * shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "basis of {len} kernels with {} weights needs {}, got {}",
                shape.len(),
                len * shape.len(),
                elements.len()
            )));
        }
        if elements.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel basis"));
        }
        Ok(Self { shape, len, elements, normalized })
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    /// Number of basis kernels `B`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn as_slice(&self) -> &[T] {
        &self.elements
    }

    pub fn element(&self, b: usize) -> &[T] {
        let d = self.shape.len();
        &self.elements[b * d..(b + 1) * d]
    }

    /// The `K × K` spatial slice of element `b` for one group and frame.
    pub fn slice(&self, b: usize, group: usize, frame: usize) -> &[T] {
        let start = b * self.shape.len() + self.shape.index(group, frame, 0, 0);
        &self.elements[start..start + self.shape.taps()]
    }

    pub fn cast<U: Real>(&self) -> KernelBasis<U> {
        KernelBasis {
            shape: self.shape,
            len: self.len,
            elements: self.elements.iter().map(|v| U::of(v.as_f64())).collect(),
            normalized: self.normalized,
        }
    }

    /// Basis made of the rows of `self` followed by the rows of `other`.
    pub fn concat(&self, other: &KernelBasis<T>) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch("bases have different kernel shapes".into()));
        }
        let mut elements = self.elements.clone();
        elements.extend_from_slice(&other.elements);
        Ok(Self {
            shape: self.shape,
            len: self.len + other.len,
            elements,
            normalized: self.normalized && other.normalized,
        })
    }
}

/// Per-pixel mixing weights over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField<T> {
    height: usize,
    width: usize,
    len: usize,
    coeffs: Vec<T>,
    normalized: bool,
}

impl<T: Real> CoefficientField<T> {
    pub fn new(height: usize, width: usize, len: usize, coeffs: Vec<T>, normalized: bool) -> Result<Self> {
        if coeffs.len() != height * width * len {
            return Err(Error::DimensionMismatch(format!(
                "coefficient field {height}x{width}x{len} needs {}, got {}",
                height * width * len,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficient field"));
        }
        Ok(Self { height, width, len, coeffs, normalized })
    }

    /// Every pixel uses the same coefficient vector.
    pub fn constant(height: usize, width: usize, coeffs: &[T], normalized: bool) -> Self {
        let mut all = Vec::with_capacity(height * width * coeffs.len());
        for _ in 0..height * width {
            all.extend_from_slice(coeffs);
        }
        Self {
            height,
            width,
            len: coeffs.len(),
            coeffs: all,
            normalized,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Basis size `B`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn as_slice(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> &[T] {
        let start = (y * self.width + x) * self.len;
        &self.coeffs[start..start + self.len]
    }

    /// Coefficient `b` of every pixel, row-major.
    pub fn component(&self, b: usize) -> Vec<T> {
        self.coeffs.iter().skip(b).step_by(self.len).copied().collect()
    }

    pub fn cast<U: Real>(&self) -> CoefficientField<U> {
        CoefficientField {
            height: self.height,
            width: self.width,
            len: self.len,
            coeffs: self.coeffs.iter().map(|v| U::of(v.as_f64())).collect(),
            normalized: self.normalized,
        }
    }

    /// Checks compatibility with `basis` and a `height × width` image.
    pub fn check(&self, basis: &KernelBasis<T>, height: usize, width: usize) -> Result<()> {
        if self.len != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients per pixel for a basis of {}",
                self.len,
                basis.len()
            )));
        }
        if self.height != height || self.width != width {
            return Err(Error::DimensionMismatch(format!(
                "coefficients are {}x{}, image is {height}x{width}",
                self.height, self.width
            )));
        }
        Ok(())
    }
}
