mod common;

use cvnet_core::dynamics::{probe_mask, ModeSqueeze, QuadraticModel};
use cvnet_core::gaussian::GaussianState;
use cvnet_core::netmodel::preset;
use cvnet_core::symplectic::{bloch_messiah, orthogonality_residual, SymplecticMatrix};
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn construct_then_decompose() {
    let mut rng = common::rng(101);
    for _ in 0..50 {
        let m = rng.random_range(1..=8);
        let (s, r) = common::random_symplectic(&mut rng, m, 1.2);
        let f = bloch_messiah(&s).unwrap();
        let rel = (f.reconstruct() - s.matrix()).norm() / s.matrix().norm();
        assert!(rel < 1e-10, "reconstruction {rel:e}");
        for (got, want) in f.squeezing().iter().zip(&r) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(orthogonality_residual(f.r1.matrix()) < 1e-10);
        assert!(orthogonality_residual(f.r2.matrix()) < 1e-10);
        assert!(f.r1.residual() < 1e-10);
        assert!(f.r2.residual() < 1e-10);
    }
}

#[test]
fn non_symplectic_input_rejected() {
    let mut bad = DMatrix::identity(4, 4);
    bad[(0, 0)] = 1.1;
    assert!(SymplecticMatrix::new(bad.clone(), 1e-8).is_err());
    assert!(SymplecticMatrix::new(bad, 1.0).is_ok());
}

#[test]
fn determinant_is_one() {
    let mut rng = common::rng(3);
    for _ in 0..20 {
        let (s, _) = common::random_symplectic(&mut rng, 4, 1.0);
        assert!((s.matrix().determinant() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn passive_factors_keep_vacuum() {
    let mut rng = common::rng(8);
    let (s, _) = common::random_symplectic(&mut rng, 5, 0.8);
    let f = bloch_messiah(&s).unwrap();
    let vac = DMatrix::<f64>::identity(10, 10) * 0.5;
    for r in [&f.r1, &f.r2] {
        assert!((r.matrix() * &vac * r.matrix().transpose() - &vac).norm() < 1e-10);
    }
}

#[test]
fn identity_factors_discard_to_vacuum() {
    let f = bloch_messiah(&SymplecticMatrix::identity(4)).unwrap();
    assert_eq!(f.discard_passive(), DMatrix::identity(8, 8) * 0.5);
}

#[test]
fn network1_effective_matrix_discards_passive_factor() {
    let model = QuadraticModel::assemble(&preset(1).unwrap().graph(0.58).unwrap()).unwrap();
    let mut prep = vec![ModeSqueeze::NONE; 17];
    prep[0] = ModeSqueeze::new(0.2, 0.0);
    prep[1] = ModeSqueeze::new(0.15, std::f64::consts::PI);
    let s = model.compose_preparation(&model.evolve(150.0).unwrap(), &prep).unwrap();
    let f = bloch_messiah(&s).unwrap();
    assert_eq!(f.modes(), 17);
    let direct = GaussianState::vacuum(17).propagate(&s).unwrap();
    assert!((f.discard_passive() - direct.cov()).norm() < 1e-10);
}

#[test]
fn masks_are_canonical_pairs_across_times() {
    let model = QuadraticModel::assemble(&preset(4).unwrap().graph(0.75).unwrap()).unwrap();
    for t in [0.0, 2.0, 45.0, 90.0, 300.0] {
        let mask = probe_mask(&model.evolve(t).unwrap()).unwrap();
        assert_eq!(mask.q_row.len(), 102);
        assert!(mask.norm_residual() < 1e-10);
        assert!((mask.pairing() - 1.0).abs() < 1e-10);
    }
}
