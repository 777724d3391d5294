//! Integration coverage for the quon calculus edge cases and error paths.

use num_complex::Complex64 as C64;
use quon_core::numerics::{compare_up_to_scalar, roots, tensor_compose, Tensor, Tolerance};
use quon_core::qudit_core::{gate, GateName};
use quon_core::quon_calculus::{
    braid_matrix, eval_network, joint_check, quon_basis, Arc, Axis, BasisSet, BraidSign, Circle,
    Point, QuonError, QuonIo, StringNetwork,
};

const ONE: C64 = C64::new(1.0, 0.0);

#[test]
fn y_basis_is_y_eigenbasis() {
    let tol = Tolerance::default();
    for d in 2..=5usize {
        let y = gate(d, GateName::Y);
        let mut vs = Vec::new();
        for k in 0..d {
            let v = quon_basis(d, Axis::Y, k as i64).as_tensor();
            assert!((v.norm() - 1.0).abs() < 1e-9);
            let yv = tensor_compose(&y, &v).unwrap();
            let lam = compare_up_to_scalar(&yv, &v, tol).unwrap();
            assert!(lam.is_some(), "d={d} k={k}");
            assert!((lam.unwrap().norm() - 1.0).abs() < 1e-9, "unimodular eigenvalue");
            vs.push(v);
        }
        for (i, vi) in vs.iter().enumerate() {
            for (j, vj) in vs.iter().enumerate() {
                let mut inner = C64::new(0.0, 0.0);
                for (a, b) in vi.entries().iter().zip(vj.entries()) {
                    inner += a.conj() * b;
                }
                let expect = if i == j { ONE } else { C64::new(0.0, 0.0) };
                assert!((inner - expect).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn x_basis_eigenvalue_assignment() {
    // the F-image of the Z-basis diagonalizes X with eigenvalue q^{-k}
    for d in 2..=5usize {
        let r = roots(d).unwrap();
        let x = gate(d, GateName::X);
        for k in 0..d {
            let v = quon_basis(d, Axis::X, k as i64).as_tensor();
            let xv = tensor_compose(&x, &v).unwrap();
            assert!(xv.approx_eq(&v.scale(r.q_pow(-(k as i64))), Tolerance::default()));
        }
    }
}

#[test]
fn network_point_usage_is_checked() {
    let d = 2;
    let mut net = StringNetwork::new(d);
    let q = net.add_quon(QuonIo::Out, Some(0));
    net.arcs.push(Arc::plain(Point::new(q, 1), Point::new(q, 2)));
    // legs 3 and 4 unused
    match eval_network(&net) {
        Err(QuonError::GraphError(_)) => {}
        other => panic!("expected graph error, got {other:?}"),
    }
}

#[test]
fn charged_measurement_pattern_is_refused() {
    let d = 3;
    let mut net = StringNetwork::new(d);
    let q = net.add_quon(QuonIo::In, Some(0));
    net.arcs.push(Arc {
        a: Point::new(q, 1),
        b: Point::new(q, 4),
        charge_a: 1,
        charge_b: 0,
    });
    net.arcs.push(Arc::plain(Point::new(q, 2), Point::new(q, 3)));
    assert_eq!(
        eval_network(&net).unwrap_err(),
        QuonError::NonCancellingCharges
    );
}

#[test]
fn multi_charge_circle_values() {
    let d = 3;
    let r = roots(d).unwrap();
    // charges that cancel around the loop keep the sqrt(d) value
    let mut net = StringNetwork::new(d);
    net.circles.push(Circle {
        charges: vec![1, 2, -1, 1],
    });
    let t = eval_network(&net).unwrap();
    assert!((t.get(&[], &[]) - C64::new(r.sqrt_d(), 0.0)).norm() < 1e-12);
    // net charge 2 kills the loop
    let mut net2 = StringNetwork::new(d);
    net2.circles.push(Circle {
        charges: vec![1, 1],
    });
    assert!(eval_network(&net2).unwrap().get(&[], &[]).norm() < 1e-12);
}

#[test]
fn braid_two_matches_gaussian_kernel() {
    for d in 1..=6usize {
        let r = roots(d).unwrap();
        let b2 = braid_matrix(d, 2, BraidSign::Positive);
        let w = r.omega_sqrt();
        for row in 0..d {
            for col in 0..d {
                let diff = row as i64 - col as i64;
                let expect = w * r.zeta_pow(-(diff * diff)) / r.sqrt_d();
                assert!((b2.get(&[row], &[col]) - expect).norm() < 1e-9, "d={d}");
            }
        }
    }
}

#[test]
fn joint_mixed_parity_requires_zero_map() {
    let d = 2;
    let left = BasisSet::standard(d, 1);
    let right = BasisSet::standard(d, 2);
    let zero = Tensor::zeros(d, 0, 0);
    let rep = joint_check(d, 1, 2, &zero, &left, &right).unwrap();
    assert_eq!(rep.max_deviation, 0.0);
    let nonzero = Tensor::scalar(d, ONE);
    assert!(matches!(
        joint_check(d, 1, 2, &nonzero, &left, &right),
        Err(QuonError::ShapeError(_))
    ));
}

#[test]
fn joint_scalar_sector() {
    let d = 3;
    let left = BasisSet::standard(d, 1);
    let right = BasisSet::standard(d, 1);
    let t = Tensor::scalar(d, C64::new(0.3, -1.2));
    let rep = joint_check(d, 1, 1, &t, &left, &right).unwrap();
    assert!(rep.max_deviation < 1e-12);
    assert!(rep.onb_deviation < 1e-9);
}
