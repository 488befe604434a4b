#![allow(dead_code)]

use burstkernel::{Burst, CoefficientField, Image, KernelBasis, KernelField, KernelShape, Real};
use rand::{Rng, RngCore};

/// One randomized filtering problem.
#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub height: usize,
    pub width: usize,
    pub ksize: usize,
    pub frames: usize,
    pub basis: usize,
    pub channels: usize,
    pub groups: usize,
}

impl Case {
    pub fn sample(rng: &mut impl Rng) -> Self {
        let channels = [1, 3][rng.random_range(0..2)];
        Case {
            height: rng.random_range(1..=64),
            width: rng.random_range(1..=64),
            ksize: [3, 5, 15][rng.random_range(0..3)],
            frames: [2, 8][rng.random_range(0..2)],
            basis: [1, 4, 90][rng.random_range(0..3)],
            channels,
            groups: if channels == 3 && rng.random_bool(0.5) { 3 } else { 1 },
        }
    }

    pub fn shape(&self) -> KernelShape {
        KernelShape::new(self.ksize, self.frames, self.groups).unwrap()
    }
}

pub fn random_burst<T: Real>(rng: &mut impl Rng, frames: usize, h: usize, w: usize, c: usize) -> Burst<T> {
    let frames = (0..frames)
        .map(|_| Image::from_fn(h, w, c, |_, _, _| T::of(rng.random_range(-0.2..1.2))))
        .collect();
    Burst::new(frames).unwrap()
}

pub fn logits<T: Real>(rng: &mut impl Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::of(rng.random_range(-3.0..3.0))).collect()
}

pub fn normalized_basis<T: Real>(rng: &mut impl Rng, shape: KernelShape, b: usize) -> KernelBasis<T> {
    KernelBasis::from_logits(shape, b, logits(rng, b * shape.len())).unwrap()
}

pub fn normalized_coeffs<T: Real>(rng: &mut impl Rng, h: usize, w: usize, b: usize) -> CoefficientField<T> {
    CoefficientField::from_logits(h, w, b, logits(rng, h * w * b)).unwrap()
}

pub fn raw_basis<T: Real>(rng: &mut impl Rng, shape: KernelShape, b: usize) -> KernelBasis<T> {
    let data = (0..b * shape.len()).map(|_| T::of(rng.random_range(-1.0..1.0))).collect();
    KernelBasis::new(shape, b, data, false).unwrap()
}

pub fn raw_coeffs<T: Real>(rng: &mut impl Rng, h: usize, w: usize, b: usize) -> CoefficientField<T> {
    let data = (0..h * w * b).map(|_| T::of(rng.random_range(-1.0..1.0))).collect();
    CoefficientField::new(h, w, b, data, false).unwrap()
}

pub fn random_field<T: Real>(rng: &mut impl Rng, h: usize, w: usize, shape: KernelShape) -> KernelField<T> {
    KernelField::from_logits(h, w, shape, logits(rng, h * w * shape.len())).unwrap()
}

/// `Σ_t Σ_δ w_n[δ, t] · I_t[n − δ]` written as plainly as possible.
pub fn naive_filter(noisy: &Burst<f64>, field: &KernelField<f64>) -> Image<f64> {
    let shape = field.shape();
    let (h, w, c) = (noisy.height(), noisy.width(), noisy.channels());
    let r = shape.radius() as isize;
    let mut out = Image::zeros(h, w, c);
    for ch in 0..c {
        let g = shape.group_for_channel(ch);
        for y in 0..h {
            for x in 0..w {
                let kernel = field.kernel(y, x);
                let mut acc = 0.0;
                for t in 0..shape.frames {
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let (sy, sx) = (y as isize - dy, x as isize - dx);
                            if sy < 0 || sx < 0 || sy >= h as isize || sx >= w as isize {
                                continue;
                            }
                            let wgt = kernel[shape.index(g, t, (dy + r) as usize, (dx + r) as usize)];
                            acc += wgt * noisy.frame(t).get(sy as usize, sx as usize, ch);
                        }
                    }
                }
                out.set(y, x, ch, acc);
            }
        }
    }
    out
}

/// Fresh generator for case `i` of a suite, independent of other cases.
pub fn case_rng(suite: u64, i: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut seed = rand_chacha::ChaCha8Rng::seed_from_u64(suite);
    seed.set_stream(i);
    rand_chacha::ChaCha8Rng::seed_from_u64(seed.next_u64())
}
