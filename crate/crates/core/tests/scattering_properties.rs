//! Property tests for the port algebra: every passive matrix dilates to a
//! unitary of minimal size with the input as its upper-left block, and port
//! closure of a unitary network equalizes coupling magnitudes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use qle_core::scattering::{classify, close_port, dilate_to_unitary, ScatteringMatrix, TOL_S};

fn random_passive(rng: &mut impl Rng, dim: usize) -> ScatteringMatrix {
    let raw = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let s = ScatteringMatrix::new(raw.clone()).unwrap();
    let sigma = s.sigma_max().max(1e-6);
    let shrink = 1.0 / (sigma * (1.0 + rng.gen_range(0.0..1.0)));
    ScatteringMatrix::new(raw.map(|z| z * shrink)).unwrap()
}

fn random_unitary(rng: &mut impl Rng, dim: usize) -> ScatteringMatrix {
    let raw = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    ScatteringMatrix::new(raw.qr().q()).unwrap()
}

#[test]
fn dilations_are_unitary_minimal_and_block_faithful() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd11a7e);
    for _ in 0..200 {
        let dim = rng.gen_range(1..=6);
        let s = random_passive(&mut rng, dim);
        let dilated = dilate_to_unitary(&s).unwrap();
        assert!(classify(&dilated).unitary);

        let block = dilated.entries().view((0, 0), (dim, dim)).into_owned();
        let block_err = (&block - s.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(block_err <= 10.0 * TOL_S, "block error {block_err}");

        // Added ports must match the count of singular values below 1.
        let gram = s.entries().adjoint() * s.entries();
        let defect_rank = gram
            .symmetric_eigenvalues()
            .iter()
            .filter(|&&l| l.max(0.0).sqrt() < 1.0 - qle_core::scattering::TOL_RANK)
            .count();
        assert_eq!(dilated.dim() - dim, defect_rank);
    }
}

#[test]
fn random_unitaries_dilate_to_themselves() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d);
    for _ in 0..50 {
        let dim = rng.gen_range(1..=6);
        let s = random_unitary(&mut rng, dim);
        let dilated = dilate_to_unitary(&s).unwrap();
        assert_eq!(dilated.dim(), dim);
        assert_eq!(dilated, s);
    }
}

#[test]
fn closing_any_port_of_a_unitary_equalizes_magnitudes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc105e);
    for _ in 0..100 {
        let s = random_unitary(&mut rng, 3);
        let port = rng.gen_range(0..3);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let reduced = match close_port(&s, port, phase) {
            Ok(r) => r,
            // A mirror phase can resonate with a perfectly reflecting port;
            // that singular closure is a documented error, not a failure.
            Err(qle_core::scattering::ScatteringError::SingularClosure { .. }) => continue,
            Err(other) => panic!("unexpected error {other}"),
        };
        let s12 = reduced.entries()[(0, 1)].norm();
        let s21 = reduced.entries()[(1, 0)].norm();
        assert!((s12 - s21).abs() <= TOL_S, "{s12} vs {s21}");
    }
}

#[test]
fn dilating_a_projector_chain_adds_exactly_its_nullity() {
    // diag(1, 1/2, 0): one singular value at 1, so two ports get added.
    let s = ScatteringMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 0.0),
    ])))
    .unwrap();
    let dilated = dilate_to_unitary(&s).unwrap();
    assert_eq!(dilated.dim(), 5);
    assert!(classify(&dilated).unitary);
}
