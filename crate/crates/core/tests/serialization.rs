mod common;

use burstkernel::{KernelBasis, KernelShape, Tensor, TensorCodec};
use common::*;

#[test]
fn random_basis_round_trips_bit_exact() {
    let mut rng = case_rng(300, 0);
    let dir = tempfile::tempdir().unwrap();
    for (k, t, g, b) in [(3, 2, 1, 4), (15, 8, 1, 90), (5, 3, 3, 7)] {
        let s = KernelShape::new(k, t, g).unwrap();
        let basis = raw_basis::<f32>(&mut rng, s, b);
        let path = dir.path().join(format!("basis_{k}_{t}_{g}_{b}.bkt"));
        basis.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = KernelBasis::<f32>::load(&path).unwrap();
        assert_eq!(back.shape(), s);
        let a: Vec<u32> = basis.as_slice().iter().map(|v| v.to_bits()).collect();
        let z: Vec<u32> = back.as_slice().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, z);
        back.save(&path).unwrap();
        assert_eq!(bytes, std::fs::read(&path).unwrap());
    }
}

#[test]
fn every_type_round_trips() {
    let mut rng = case_rng(301, 0);
    let dir = tempfile::tempdir().unwrap();
    let s = KernelShape::new(3, 2, 3).unwrap();
    let burst = random_burst::<f32>(&mut rng, 2, 7, 9, 3);
    let field = random_field::<f32>(&mut rng, 7, 9, s);
    let coeffs = normalized_coeffs::<f32>(&mut rng, 7, 9, 4);
    let p = |n: &str| dir.path().join(n);

    burst.save(p("b")).unwrap();
    assert_eq!(burstkernel::Burst::<f32>::load(p("b")).unwrap(), burst);
    burst.reference().save(p("i")).unwrap();
    assert_eq!(&burstkernel::Image::<f32>::load(p("i")).unwrap(), burst.reference());
    field.save(p("f")).unwrap();
    let f2 = burstkernel::KernelField::<f32>::load(p("f")).unwrap();
    assert_eq!(f2.weights(), field.weights());
    assert!(f2.is_normalized());
    coeffs.save(p("c")).unwrap();
    assert_eq!(burstkernel::CoefficientField::<f32>::load(p("c")).unwrap().as_slice(), coeffs.as_slice());

    let t = Tensor::new(vec![2, 0, 3], vec![]).unwrap();
    t.save(p("e")).unwrap();
    assert_eq!(Tensor::load(p("e")).unwrap(), t);
}
