//! The `BKT1` binary tensor container.
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"BKT1" | rank: u32 | dims: rank × u32 | payload: prod(dims) × f32
//! ```
//!
//! Payloads are row-major. Domain types use these axis orders:
//!
//! | type               | axes                          |
//! |--------------------|-------------------------------|
//! | `Image`            | `(y, x, c)`                   |
//! | `Burst`            | `(t, y, x, c)`                |
//! | `KernelField`      | `(n_y, n_x, δ_y, δ_x, t, c)`  |
//! | `KernelBasis`      | `(δ_y, δ_x, t, c, b)`         |
//! | `CoefficientField` | `(n_y, n_x, b)`               |
//!
//! The normalized flag of fields, bases and coefficients is not stored; on
//! load it is set when the data satisfies the averaging contract at
//! [`FIELD_TOL`].

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{CoefficientField, KernelBasis, KernelField, KernelShape};
use crate::image::{Burst, Image};
use crate::normalize::{validate_kernel_field, FIELD_TOL};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"BKT1";

/// Upper bound on the rank accepted when decoding.
pub const MAX_RANK: usize = 16;

/// A dense row-major `f32` array with its dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

fn element_count(dims: &[usize]) -> Result<usize> {
    dims.iter().try_fold(1usize, |acc, &d| {
        acc.checked_mul(d)
            .ok_or_else(|| Error::DimensionOverflow(format!("dims {dims:?}")))
    })
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if dims.len() > MAX_RANK {
            return Err(Error::DimensionOverflow(format!("rank {} exceeds {MAX_RANK}", dims.len())));
        }
        if let Some(d) = dims.iter().find(|&&d| d > u32::MAX as usize) {
            return Err(Error::DimensionOverflow(format!("dimension {d} does not fit in u32")));
        }
        let n = element_count(&dims)?;
        if n != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} hold {n} elements, payload has {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let mut take = |n: usize, what: &str| -> Result<&[u8]> {
            if cursor.len() < n {
                return Err(Error::Truncated(format!("{what}: need {n} bytes, {} left", cursor.len())));
            }
            let (head, tail) = cursor.split_at(n);
            cursor = tail;
            Ok(head)
        };
        let u32_at = |b: &[u8]| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize;

        if take(4, "magic")? != MAGIC {
            return Err(Error::BadMagic);
        }
        let rank = u32_at(take(4, "rank")?);
        if rank > MAX_RANK {
            return Err(Error::DimensionOverflow(format!("rank {rank} exceeds {MAX_RANK}")));
        }
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(u32_at(take(4, "dims")?));
        }
        let n = element_count(&dims)?;
        let payload_len = n
            .checked_mul(4)
            .ok_or_else(|| Error::DimensionOverflow(format!("payload of dims {dims:?}")))?;
        let payload = take(payload_len, "payload")?;
        let data = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if !cursor.is_empty() {
            return Err(Error::Malformed(format!("{} trailing bytes", cursor.len())));
        }
        Ok(Self { dims, data })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    fn expect_rank(&self, rank: usize, what: &str) -> Result<()> {
        if self.rank() != rank {
            return Err(Error::DimensionMismatch(format!(
                "{what} tensor must have rank {rank}, got dims {:?}",
                self.dims
            )));
        }
        Ok(())
    }
}

/// Conversion between a domain type and its [`Tensor`] layout.
pub trait TensorCodec: Sized {
    fn to_tensor(&self) -> Tensor;

    fn from_tensor(tensor: &Tensor) -> Result<Self>;

    fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_tensor().save(path)
    }

    fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_tensor(&Tensor::load(path)?)
    }
}

fn to_f32<T: Real>(v: T) -> f32 {
    v.as_f64() as f32
}

fn from_f32<T: Real>(v: f32) -> T {
    T::of(v as f64)
}

impl<T: Real> TensorCodec for Image<T> {
    fn to_tensor(&self) -> Tensor {
        let data = self.to_interleaved().into_iter().map(to_f32).collect();
        Tensor::new(vec![self.height(), self.width(), self.channels()], data).expect("image dims are consistent")
    }

    fn from_tensor(tensor: &Tensor) -> Result<Self> {
        tensor.expect_rank(3, "image")?;
        let d = tensor.dims();
        let data: Vec<T> = tensor.data().iter().map(|&v| from_f32(v)).collect();
        Image::from_interleaved(d[0], d[1], d[2], &data)
    }
}

impl<T: Real> TensorCodec for Burst<T> {
    fn to_tensor(&self) -> Tensor {
        let mut data = Vec::with_capacity(self.len() * self.reference().len());
        for f in self.frames() {
            data.extend(f.to_interleaved().into_iter().map(to_f32));
        }
        Tensor::new(vec![self.len(), self.height(), self.width(), self.channels()], data)
            .expect("burst dims are consistent")
    }

    fn from_tensor(tensor: &Tensor) -> Result<Self> {
        tensor.expect_rank(4, "burst")?;
        let d = tensor.dims();
        let frame_len = d[1] * d[2] * d[3];
        let frames = (0..d[0])
            .map(|t| {
                let chunk: Vec<T> = tensor.data()[t * frame_len..(t + 1) * frame_len]
                    .iter()
                    .map(|&v| from_f32(v))
                    .collect();
                Image::from_interleaved(d[1], d[2], d[3], &chunk)
            })
            .collect::<Result<Vec<_>>>()?;
        Burst::new(frames)
    }
}

impl<T: Real> TensorCodec for KernelField<T> {
    fn to_tensor(&self) -> Tensor {
        let s = self.shape();
        let mut data = Vec::with_capacity(self.weights().len());
        for y in 0..self.height() {
            for x in 0..self.width() {
                let k = self.kernel(y, x);
                for iy in 0..s.ksize {
                    for ix in 0..s.ksize {
                        for t in 0..s.frames {
                            for g in 0..s.groups {
                                data.push(to_f32(k[s.index(g, t, iy, ix)]));
                            }
                        }
                    }
                }
            }
        }
        Tensor::new(
            vec![self.height(), self.width(), s.ksize, s.ksize, s.frames, s.groups],
            data,
        )
        .expect("field dims are consistent")
    }

    fn from_tensor(tensor: &Tensor) -> Result<Self> {
        tensor.expect_rank(6, "kernel field")?;
        let d = tensor.dims();
        if d[2] != d[3] {
            return Err(Error::Malformed(format!("non-square kernel window {}x{}", d[2], d[3])));
        }
        let s = KernelShape::new(d[2], d[4], d[5])?;
        let mut weights = vec![T::zero(); tensor.data().len()];
        let mut src = tensor.data().iter();
        for px in weights.chunks_exact_mut(s.len()) {
            for iy in 0..s.ksize {
                for ix in 0..s.ksize {
                    for t in 0..s.frames {
                        for g in 0..s.groups {
                            px[s.index(g, t, iy, ix)] = from_f32(*src.next().expect("length checked"));
                        }
                    }
                }
            }
        }
        let field = KernelField::new(d[0], d[1], s, weights, false)?;
        let normalized = validate_kernel_field(&field, FIELD_TOL).passes();
        Ok(field.with_normalized(normalized))
    }
}

fn groups_average<T: Real>(values: &[T], group_len: usize) -> bool {
    group_len > 0
        && values.chunks(group_len).all(|g| {
            let sum: f64 = g.iter().map(|v| v.as_f64()).sum();
            (sum - 1.0).abs() <= FIELD_TOL && g.iter().all(|v| v.as_f64() >= -FIELD_TOL)
        })
}

impl<T: Real> TensorCodec for KernelBasis<T> {
    fn to_tensor(&self) -> Tensor {
        let s = self.shape();
        let mut data = Vec::with_capacity(self.as_slice().len());
        for iy in 0..s.ksize {
            for ix in 0..s.ksize {
                for t in 0..s.frames {
                    for g in 0..s.groups {
                        for b in 0..self.len() {
                            data.push(to_f32(self.element(b)[s.index(g, t, iy, ix)]));
                        }
                    }
                }
            }
        }
        Tensor::new(vec![s.ksize, s.ksize, s.frames, s.groups, self.len()], data).expect("basis dims are consistent")
    }

    fn from_tensor(tensor: &Tensor) -> Result<Self> {
        tensor.expect_rank(5, "kernel basis")?;
        let d = tensor.dims();
        if d[0] != d[1] {
            return Err(Error::Malformed(format!("non-square kernel window {}x{}", d[0], d[1])));
        }
        let s = KernelShape::new(d[0], d[2], d[3])?;
        let len = d[4];
        let mut elements = vec![T::zero(); tensor.data().len()];
        let mut src = tensor.data().iter();
        for iy in 0..s.ksize {
            for ix in 0..s.ksize {
                for t in 0..s.frames {
                    for g in 0..s.groups {
                        for b in 0..len {
                            elements[b * s.len() + s.index(g, t, iy, ix)] =
                                from_f32(*src.next().expect("length checked"));
                        }
                    }
                }
            }
        }
        let normalized = len > 0 && groups_average(&elements, s.group_len());
        KernelBasis::new(s, len, elements, normalized)
    }
}

impl<T: Real> TensorCodec for CoefficientField<T> {
    fn to_tensor(&self) -> Tensor {
        Tensor::new(
            vec![self.height(), self.width(), self.len()],
            self.as_slice().iter().map(|&v| to_f32(v)).collect(),
        )
        .expect("coefficient dims are consistent")
    }

    fn from_tensor(tensor: &Tensor) -> Result<Self> {
        tensor.expect_rank(3, "coefficient field")?;
        let d = tensor.dims();
        let coeffs: Vec<T> = tensor.data().iter().map(|&v| from_f32(v)).collect();
        let normalized = d[2] > 0 && groups_average(&coeffs, d[2]);
        CoefficientField::new(d[0], d[1], d[2], coeffs, normalized)
    }
}
