mod common;

use burstkernel::filter::filter_direct_window;
use burstkernel::{
    filter_direct, filter_factored, filter_fourier, filter_fourier_tiled, per_frame_estimates, reconstruct_kernels,
    Burst, FftPlanCache, Image, KernelShape,
};
use common::*;
use rand::Rng;

fn max_diff<T: burstkernel::Real>(a: &Image<T>, b: &Image<T>) -> f64 {
    a.max_abs_diff(b).unwrap()
}

#[test]
fn three_backends_agree_f64_unconstrained() {
    let cache = FftPlanCache::new();
    for i in 0..25 {
        let mut rng = case_rng(100, i);
        let case = Case::sample(&mut rng);
        let case = Case { basis: case.basis.min(4), ..case };
        let s = case.shape();
        let burst = random_burst::<f64>(&mut rng, case.frames, case.height, case.width, case.channels);
        let basis = raw_basis(&mut rng, s, case.basis);
        let coeffs = raw_coeffs(&mut rng, case.height, case.width, case.basis);
        let direct = filter_direct(&burst, &reconstruct_kernels(&basis, &coeffs).unwrap()).unwrap();
        let factored = filter_factored(&burst, &basis, &coeffs).unwrap();
        let fourier = filter_fourier(&burst, &basis, &coeffs, &cache).unwrap();
        assert!(max_diff(&direct, &factored) <= 1e-10, "{case:?}");
        assert!(max_diff(&direct, &fourier) <= 1e-9, "{case:?}");
    }
}

#[test]
fn single_element_basis_matches_broadcast_kernel() {
    let mut rng = case_rng(101, 0);
    let s = KernelShape::new(5, 2, 1).unwrap();
    let burst = random_burst::<f64>(&mut rng, 2, 16, 16, 1);
    let basis = normalized_basis(&mut rng, s, 1);
    let coeffs = burstkernel::CoefficientField::constant(16, 16, &[1.0], true);
    let field = burstkernel::KernelField::broadcast(16, 16, s, basis.element(0), true).unwrap();
    let factored = filter_factored(&burst, &basis, &coeffs).unwrap();
    assert!(max_diff(&factored, &filter_direct(&burst, &field).unwrap()) <= 1e-12);
    let zero = burstkernel::CoefficientField::constant(16, 16, &[0.0], false);
    assert!(filter_factored(&burst, &basis, &zero).unwrap().as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn delta_basis_recovers_reference() {
    let mut rng = case_rng(102, 0);
    let s = KernelShape::new(7, 3, 1).unwrap();
    let burst = random_burst::<f32>(&mut rng, 3, 20, 33, 3);
    let mut delta = vec![0.0f32; s.len()];
    delta[s.center(0, 0)] = 1.0;
    let basis = burstkernel::KernelBasis::new(s, 1, delta, true).unwrap();
    let coeffs = burstkernel::CoefficientField::constant(20, 33, &[1.0], true);
    let out = filter_fourier(&burst, &basis, &coeffs, &FftPlanCache::new()).unwrap();
    assert!(max_diff(&out, burst.reference()) <= 1e-5);
}

#[test]
fn filtering_is_linear_in_the_burst() {
    let mut rng = case_rng(103, 0);
    let s = KernelShape::new(5, 2, 3).unwrap();
    let a = random_burst::<f64>(&mut rng, 2, 18, 21, 3);
    let b = random_burst::<f64>(&mut rng, 2, 18, 21, 3);
    let (alpha, beta) = (0.7, -1.3);
    let mixed = Burst::new(
        a.frames()
            .iter()
            .zip(b.frames())
            .map(|(fa, fb)| {
                let data = fa.as_slice().iter().zip(fb.as_slice()).map(|(x, y)| alpha * x + beta * y).collect();
                Image::from_planar(18, 21, 3, data).unwrap()
            })
            .collect(),
    )
    .unwrap();
    let basis = raw_basis(&mut rng, s, 4);
    let coeffs = raw_coeffs(&mut rng, 18, 21, 4);
    let field = reconstruct_kernels(&basis, &coeffs).unwrap();
    let cache = FftPlanCache::new();
    type Filter<'a> = Box<dyn Fn(&Burst<f64>) -> Image<f64> + 'a>;
    let filters: [Filter; 3] = [
        Box::new(|x| filter_direct(x, &field).unwrap()),
        Box::new(|x| filter_factored(x, &basis, &coeffs).unwrap()),
        Box::new(|x| filter_fourier(x, &basis, &coeffs, &cache).unwrap()),
    ];
    for f in &filters {
        let (fa, fb, fm) = (f(&a), f(&b), f(&mixed));
        for ((m, x), y) in fm.as_slice().iter().zip(fa.as_slice()).zip(fb.as_slice()) {
            assert!((m - (alpha * x + beta * y)).abs() <= 1e-6);
        }
    }
}

#[test]
fn normalized_kernels_preserve_constants_in_the_interior() {
    let mut rng = case_rng(104, 0);
    for (k, t, c) in [(3, 2, 1), (5, 8, 3), (15, 2, 1)] {
        let s = KernelShape::new(k, t, if c == 3 { 3 } else { 1 }).unwrap();
        let (h, w) = (40, 37);
        let frames = (0..t).map(|_| Image::<f32>::filled(h, w, c, 0.42)).collect();
        let burst = Burst::new(frames).unwrap();
        let basis = normalized_basis(&mut rng, s, 4);
        let coeffs = normalized_coeffs(&mut rng, h, w, 4);
        let field = random_field::<f32>(&mut rng, h, w, s);
        let outs = [
            filter_direct(&burst, &field).unwrap(),
            filter_factored(&burst, &basis, &coeffs).unwrap(),
            filter_fourier(&burst, &basis, &coeffs, &FftPlanCache::new()).unwrap(),
        ];
        let r = s.radius();
        for out in &outs {
            for ch in 0..c {
                for y in r..h - r {
                    for x in r..w - r {
                        assert!((out.get(y, x, ch) - 0.42).abs() <= 1e-5);
                    }
                }
            }
        }
    }
}

#[test]
fn tiled_fourier_matches_full_frame() {
    let cache = FftPlanCache::new();
    for (i, (h, w, k)) in [(200, 150, 15), (129, 300, 5), (64, 64, 3), (10, 260, 31)].into_iter().enumerate() {
        let mut rng = case_rng(105, i as u64);
        let s = KernelShape::new(k, 2, 1).unwrap();
        let burst = random_burst::<f32>(&mut rng, 2, h, w, 1);
        let basis = normalized_basis(&mut rng, s, 3);
        let coeffs = normalized_coeffs(&mut rng, h, w, 3);
        let full = filter_fourier(&burst, &basis, &coeffs, &cache).unwrap();
        let tiled = filter_fourier_tiled(&burst, &basis, &coeffs, &cache, Some(128)).unwrap();
        assert!(max_diff(&full, &tiled) <= 1e-5, "{h}x{w} K={k}");
    }
}

#[test]
fn plan_cache_state_does_not_change_results() {
    let mut rng = case_rng(106, 0);
    let s = KernelShape::new(9, 3, 1).unwrap();
    let burst = random_burst::<f64>(&mut rng, 3, 45, 52, 1);
    let basis = raw_basis(&mut rng, s, 5);
    let coeffs = raw_coeffs(&mut rng, 45, 52, 5);
    let warm = FftPlanCache::new();
    let first = filter_fourier(&burst, &basis, &coeffs, &warm).unwrap();
    assert!(!warm.is_empty());
    let again = filter_fourier(&burst, &basis, &coeffs, &warm).unwrap();
    let cold = filter_fourier(&burst, &basis, &coeffs, &FftPlanCache::new()).unwrap();
    let bits = |im: &Image<f64>| im.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&first), bits(&again));
    assert_eq!(bits(&first), bits(&cold));
}

#[test]
fn direct_matches_naive_oracle_in_f32() {
    let mut rng = case_rng(107, 0);
    let s = KernelShape::new(3, 2, 1).unwrap();
    let burst = random_burst::<f64>(&mut rng, 2, 8, 8, 1);
    let field = random_field::<f64>(&mut rng, 8, 8, s);
    let oracle = naive_filter(&burst, &field);
    let out = filter_direct(&burst.cast::<f32>(), &field.cast::<f32>()).unwrap();
    assert!(max_diff(&out.cast::<f64>(), &oracle) <= 1e-6);
}

#[test]
fn windows_tile_the_full_output() {
    let mut rng = case_rng(108, 0);
    let s = KernelShape::new(5, 2, 1).unwrap();
    let burst = random_burst::<f64>(&mut rng, 2, 30, 30, 1);
    let field = random_field::<f64>(&mut rng, 30, 30, s);
    let full = filter_direct(&burst, &field).unwrap();
    let y0 = rng.random_range(0..20);
    let x0 = rng.random_range(0..20);
    let mut sub = Vec::new();
    for y in 0..10 {
        for x in 0..10 {
            sub.extend_from_slice(field.kernel(y0 + y, x0 + x));
        }
    }
    let part = burstkernel::KernelField::new(10, 10, s, sub, true).unwrap();
    let win = filter_direct_window(&burst, &part, y0, x0).unwrap();
    for y in 0..10 {
        for x in 0..10 {
            assert_eq!(win.get(y, x, 0), full.get(y0 + y, x0 + x, 0));
        }
    }
}

#[test]
fn per_frame_mean_is_the_filtered_output() {
    let mut rng = case_rng(109, 0);
    let s = KernelShape::new(5, 4, 3).unwrap();
    let burst = random_burst::<f64>(&mut rng, 4, 19, 23, 3);
    let field = random_field::<f64>(&mut rng, 19, 23, s);
    let est = per_frame_estimates(&burst, &field).unwrap();
    let full = filter_direct(&burst, &field).unwrap();
    for i in 0..full.len() {
        let mean = est.iter().map(|e| e.as_slice()[i]).sum::<f64>() / 4.0;
        assert!((mean - full.as_slice()[i]).abs() <= 1e-10);
    }
}
