use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use rayon::prelude::*;
use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{CoefficientField, KernelBasis, KernelShape};
use crate::image::{Burst, Image};
use crate::scalar::Real;

/// Tile side used by the tiled Fourier path.
pub const FOURIER_TILE: usize = 128;

/// Largest FFT side this module will plan.
const MAX_FFT_SIDE: usize = 1 << 28;

/// Smallest `m ≥ n` whose only prime factors are 2, 3 and 5.
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Real 2D FFT of a `rows × cols` grid.
///
/// Spectra hold the `cols / 2 + 1` non-redundant columns and are stored
/// transposed (`column`, `row`), so the column pass runs over contiguous
/// memory. Only products of spectra from the same plan are meaningful.
pub struct Fft2d<T: Real> {
    rows: usize,
    cols: usize,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft2d<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn half_cols(&self) -> usize {
        self.cols / 2 + 1
    }

    pub fn spectrum_len(&self) -> usize {
        self.half_cols() * self.rows
    }

    /// Transforms `input` (`rows × cols`, row-major, used as scratch).
    pub fn forward(&self, input: &mut [T]) -> Vec<Complex<T>> {
        assert_eq!(input.len(), self.rows * self.cols, "fft input size");
        let (rows, half) = (self.rows, self.half_cols());
        let mut row_spec = vec![Complex::default(); rows * half];
        input
            .par_chunks_mut(self.cols)
            .zip(row_spec.par_chunks_mut(half))
            .for_each_init(
                || self.r2c.make_scratch_vec(),
                |scratch, (row, out)| {
                    if row.iter().all(|v| v.is_zero()) {
                        return;
                    }
                    self.r2c
                        .process_with_scratch(row, out, scratch)
                        .expect("buffer sizes come from the plan");
                },
            );
        let mut spec = transpose(&row_spec, rows, half);
        let scratch_len = self.col_fwd.get_inplace_scratch_len();
        spec.par_chunks_mut(rows).for_each_init(
            || vec![Complex::default(); scratch_len],
            |scratch, col| self.col_fwd.process_with_scratch(col, scratch),
        );
        spec
    }

    /// Inverse of [`Fft2d::forward`], including the `1 / (rows·cols)` scale.
    pub fn inverse(&self, mut spec: Vec<Complex<T>>) -> Vec<T> {
        assert_eq!(spec.len(), self.spectrum_len(), "spectrum size");
        let (rows, half, cols) = (self.rows, self.half_cols(), self.cols);
        let scratch_len = self.col_inv.get_inplace_scratch_len();
        spec.par_chunks_mut(rows).for_each_init(
            || vec![Complex::default(); scratch_len],
            |scratch, col| self.col_inv.process_with_scratch(col, scratch),
        );
        let mut row_spec = transpose(&spec, half, rows);
        let scale = T::one() / T::of((rows * cols) as f64);
        let mut out = vec![T::zero(); rows * cols];
        row_spec
            .par_chunks_mut(half)
            .zip(out.par_chunks_mut(cols))
            .for_each_init(
                || self.c2r.make_scratch_vec(),
                |scratch, (row, dst)| {
                    // DC and Nyquist bins of a real row are real; drop roundoff
                    row[0].im = T::zero();
                    if cols % 2 == 0 {
                        row[half - 1].im = T::zero();
                    }
                    self.c2r
                        .process_with_scratch(row, dst, scratch)
                        .expect("buffer sizes come from the plan");
                    dst.iter_mut().for_each(|v| *v *= scale);
                },
            );
        out
    }
}

fn transpose<T: Copy + Default + Send + Sync>(src: &[T], rows: usize, cols: usize) -> Vec<T> {
    const BLOCK: usize = 32;
    let mut dst = vec![T::default(); src.len()];
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
    dst
}

type PlanMap<T> = HashMap<(usize, usize), Arc<Fft2d<T>>>;

/// Shared store of 2D FFT plans keyed by grid size.
///
/// Lookups take a read lock; planning a new size takes the write lock.
/// Plans are deterministic, so results never depend on what is cached.
pub struct FftPlanCache<T: Real> {
    plans: RwLock<PlanMap<T>>,
    planners: Mutex<(RealFftPlanner<T>, FftPlanner<T>)>,
}

impl<T: Real> Default for FftPlanCache<T> {
    fn default() -> Self {
        Self {
            plans: RwLock::new(HashMap::new()),
            planners: Mutex::new((RealFftPlanner::new(), FftPlanner::new())),
        }
    }
}

impl<T: Real> FftPlanCache<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.plans.read().expect("plan cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plan(&self, rows: usize, cols: usize) -> Arc<Fft2d<T>> {
        if let Some(p) = self.plans.read().expect("plan cache poisoned").get(&(rows, cols)) {
            return Arc::clone(p);
        }
        let mut plans = self.plans.write().expect("plan cache poisoned");
        if let Some(p) = plans.get(&(rows, cols)) {
            return Arc::clone(p);
        }
        let mut planners = self.planners.lock().expect("planner poisoned");
        let (real, complex) = &mut *planners;
        let plan = Arc::new(Fft2d {
            rows,
            cols,
            r2c: real.plan_fft_forward(cols),
            c2r: real.plan_fft_inverse(cols),
            col_fwd: complex.plan_fft_forward(rows),
            col_inv: complex.plan_fft_inverse(rows),
        });
        plans.insert((rows, cols), Arc::clone(&plan));
        plan
    }
}

/// Output region `[y0, y0 + h) × [x0, x0 + w)` plus its FFT grid.
#[derive(Debug, Clone, Copy)]
struct Tile {
    y0: usize,
    x0: usize,
    h: usize,
    w: usize,
    rows: usize,
    cols: usize,
}

fn fft_side(n: usize, ksize: usize) -> Result<usize> {
    let need = n
        .checked_add(ksize - 1)
        .filter(|&m| m <= MAX_FFT_SIDE)
        .ok_or_else(|| Error::DimensionOverflow(format!("FFT side for {n} samples and K={ksize}")))?;
    Ok(next_smooth(need))
}

fn make_tiles(height: usize, width: usize, tile: Option<usize>, ksize: usize) -> Result<Vec<Tile>> {
    let (th, tw) = match tile {
        Some(t) if t > 0 => (t, t),
        _ => (height.max(1), width.max(1)),
    };
    let mut tiles = Vec::new();
    for y0 in (0..height).step_by(th) {
        for x0 in (0..width).step_by(tw) {
            let (h, w) = (th.min(height - y0), tw.min(width - x0));
            tiles.push(Tile {
                y0,
                x0,
                h,
                w,
                rows: fft_side(h, ksize)?,
                cols: fft_side(w, ksize)?,
            });
        }
    }
    Ok(tiles)
}

/// Fourier-domain factored filtering over the whole frame.
///
/// Each frame is transformed once on a zero-padded grid of at least
/// `(H + K − 1) × (W + K − 1)`; for every basis element the products
/// `Σ_t F(I_t)·F(v_{b,t})` are accumulated and inverted once, then mixed
/// with the coefficients as in [`super::filter_factored`].
pub fn filter_fourier<T: Real>(
    noisy: &Burst<T>,
    basis: &KernelBasis<T>,
    coeffs: &CoefficientField<T>,
    cache: &FftPlanCache<T>,
) -> Result<Image<T>> {
    filter_fourier_tiled(noisy, basis, coeffs, cache, None)
}

/// Like [`filter_fourier`] but processes `tile × tile` output blocks, each
/// read with a `(K − 1) / 2` halo so the stitched result matches the
/// untiled one. `None` or `Some(0)` means a single full-frame tile.
pub fn filter_fourier_tiled<T: Real>(
    noisy: &Burst<T>,
    basis: &KernelBasis<T>,
    coeffs: &CoefficientField<T>,
    cache: &FftPlanCache<T>,
    tile: Option<usize>,
) -> Result<Image<T>> {
    let shape = basis.shape();
    shape.check_burst(noisy.len(), noisy.channels())?;
    coeffs.check(basis, noisy.height(), noisy.width())?;
    let (height, width, channels) = (noisy.height(), noisy.width(), noisy.channels());
    let mut out = Image::zeros(height, width, channels);
    if height == 0 || width == 0 {
        return Ok(out);
    }
    let tiles = make_tiles(height, width, tile, shape.ksize)?;
    let r = shape.radius();

    // forward transforms of every (tile, channel, frame), reused for all b
    let frame_spectra: Vec<Vec<Vec<Complex<T>>>> = tiles
        .par_iter()
        .map(|tile| {
            let plan = cache.plan(tile.rows, tile.cols);
            (0..channels)
                .flat_map(|c| (0..noisy.len()).map(move |t| (c, t)))
                .map(|(c, t)| {
                    let mut grid = halo_grid(noisy.frame(t), c, tile, r);
                    plan.forward(&mut grid)
                })
                .collect()
        })
        .collect();

    let mut sizes: Vec<(usize, usize)> = tiles.iter().map(|t| (t.rows, t.cols)).collect();
    sizes.sort_unstable();
    sizes.dedup();

    for b in 0..basis.len() {
        let kernel_spectra: HashMap<(usize, usize), Vec<Vec<Complex<T>>>> = sizes
            .iter()
            .map(|&(rows, cols)| {
                let plan = cache.plan(rows, cols);
                let spectra = (0..shape.groups)
                    .flat_map(|g| (0..shape.frames).map(move |t| (g, t)))
                    .map(|(g, t)| {
                        let mut grid = kernel_grid(basis.slice(b, g, t), shape, rows, cols);
                        plan.forward(&mut grid)
                    })
                    .collect();
                ((rows, cols), spectra)
            })
            .collect();

        let filtered: Vec<Vec<T>> = tiles
            .par_iter()
            .zip(&frame_spectra)
            .map(|(tile, spectra)| {
                let plan = cache.plan(tile.rows, tile.cols);
                let kspec = &kernel_spectra[&(tile.rows, tile.cols)];
                let mut interior = Vec::with_capacity(channels * tile.h * tile.w);
                for c in 0..channels {
                    let g = shape.group_for_channel(c);
                    let mut acc = vec![Complex::<T>::default(); plan.spectrum_len()];
                    for t in 0..noisy.len() {
                        let fs = &spectra[c * noisy.len() + t];
                        let ks = &kspec[g * shape.frames + t];
                        for ((a, &f), &k) in acc.iter_mut().zip(fs).zip(ks) {
                            *a = *a + f * k;
                        }
                    }
                    let spatial = plan.inverse(acc);
                    for wy in 0..tile.h {
                        let start = (r + wy) * tile.cols + r;
                        interior.extend_from_slice(&spatial[start..start + tile.w]);
                    }
                }
                interior
            })
            .collect();

        for (tile, interior) in tiles.iter().zip(&filtered) {
            for c in 0..channels {
                let block = &interior[c * tile.h * tile.w..(c + 1) * tile.h * tile.w];
                let plane = out.plane_mut(c);
                for wy in 0..tile.h {
                    let y = tile.y0 + wy;
                    for wx in 0..tile.w {
                        let x = tile.x0 + wx;
                        plane[y * width + x] += coeffs.at(y, x)[b] * block[wy * tile.w + wx];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Channel `c` of the tile plus its halo, zero outside the frame, placed at
/// the origin of a `rows × cols` grid.
fn halo_grid<T: Real>(frame: &Image<T>, c: usize, tile: &Tile, r: usize) -> Vec<T> {
    let mut grid = vec![T::zero(); tile.rows * tile.cols];
    let plane = frame.plane(c);
    let (h, w) = (frame.height() as i64, frame.width() as i64);
    for ey in 0..tile.h + 2 * r {
        let sy = tile.y0 as i64 - r as i64 + ey as i64;
        if sy < 0 || sy >= h {
            continue;
        }
        let x_start = tile.x0 as i64 - r as i64;
        let ex_lo = (-x_start).max(0) as usize;
        let ex_hi = ((w - x_start) as usize).min(tile.w + 2 * r);
        if ex_lo >= ex_hi {
            continue;
        }
        let src = &plane[sy as usize * w as usize..];
        let s0 = (x_start + ex_lo as i64) as usize;
        grid[ey * tile.cols + ex_lo..ey * tile.cols + ex_hi].copy_from_slice(&src[s0..s0 + (ex_hi - ex_lo)]);
    }
    grid
}

/// Kernel with tap `δ` stored at `δ mod (rows, cols)`, so the convolution
/// output at grid index `m` lines up with input index `m`.
fn kernel_grid<T: Real>(taps: &[T], shape: KernelShape, rows: usize, cols: usize) -> Vec<T> {
    let mut grid = vec![T::zero(); rows * cols];
    let (k, r) = (shape.ksize as i64, shape.radius() as i64);
    for iy in 0..k {
        let gy = (iy - r).rem_euclid(rows as i64) as usize;
        for ix in 0..k {
            let gx = (ix - r).rem_euclid(cols as i64) as usize;
            grid[gy * cols + gx] += taps[(iy * k + ix) as usize];
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_smooth(1), 1);
        assert_eq!(next_smooth(7), 8);
        assert_eq!(next_smooth(142), 144);
        assert_eq!(next_smooth(1030), 1080);
        assert_eq!(next_smooth(158), 160);
        assert_eq!(next_smooth(134), 135);
    }

    #[test]
    fn fft_round_trip() {
        let cache = FftPlanCache::<f64>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (rows, cols) in [(6, 10), (9, 15), (8, 1), (1, 7)] {
            let plan = cache.plan(rows, cols);
            let x: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
            let back = plan.inverse(plan.forward(&mut x.clone()));
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert_eq!(cache.len(), 4);
    }

    #[test]
    fn fft_matches_dft_oracle() {
        let (rows, cols) = (5, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let plan = FftPlanCache::<f64>::new().plan(rows, cols);
        let spec = plan.forward(&mut x.clone());
        for kx in 0..cols / 2 + 1 {
            for ky in 0..rows {
                let mut s = Complex::new(0.0, 0.0);
                for y in 0..rows {
                    for xx in 0..cols {
                        let ang = -2.0 * std::f64::consts::PI
                            * ((ky * y) as f64 / rows as f64 + (kx * xx) as f64 / cols as f64);
                        s += Complex::from_polar(x[y * cols + xx], ang);
                    }
                }
                assert!((spec[kx * rows + ky] - s).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn cache_is_shared_across_threads() {
        let cache = Arc::new(FftPlanCache::<f32>::new());
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let cache = Arc::clone(&cache);
                std::thread::spawn(move || cache.plan(8 + (i % 2), 10).rows())
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn tiles_cover_frame() {
        let tiles = make_tiles(300, 130, Some(128), 15).unwrap();
        assert_eq!(tiles.len(), 6);
        let area: usize = tiles.iter().map(|t| t.h * t.w).sum();
        assert_eq!(area, 300 * 130);
        assert_eq!((tiles[0].rows, tiles[0].cols), (144, 144));
        let whole = make_tiles(300, 130, None, 15).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!((whole[0].rows, whole[0].cols), (320, 144));
    }

    #[test]
    fn fft_side_overflow() {
        assert!(fft_side(usize::MAX - 1, 15).is_err());
        assert!(fft_side(MAX_FFT_SIDE, 3).is_err());
    }
}
