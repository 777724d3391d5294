//! Scalar infrastructure (roots of unity, tolerance comparison) and the dense
//! complex tensor type shared by every evaluator in this crate.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("qudit dimension must be at least 1")]
    InvalidDimension,
    #[error("tensor shapes are incompatible: {0}")]
    ShapeError(String),
}

/// Comparison tolerance used throughout the identity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(eps: f64) -> Self {
        assert!(eps > 0.0, "tolerance must be positive");
        Tolerance { eps }
    }
}

/// The scalars attached to a fixed qudit dimension: q = exp(2πi/d), its square
/// root ζ with ζ^{d²} = 1, the Gauss-sum phase ω = d^{-1/2}·Σ_j ζ^{j²}, and √d.
///
/// Canonical ζ: q^{(d+1)/2} for odd d, exp(iπ/d) for even d.
#[derive(Debug, Clone)]
pub struct RootSystem {
    d: usize,
    q: C64,
    zeta: C64,
    omega: C64,
    sqrt_d: f64,
}

impl RootSystem {
    pub fn new(d: usize) -> Result<Self, NumericsError> {
        if d == 0 {
            return Err(NumericsError::InvalidDimension);
        }
        // zeta = exp(i*pi*m/d) with m = d+1 (odd d) or 1 (even d)
        let m = if d % 2 == 1 { d as i64 + 1 } else { 1 };
        let q = zeta_pow_raw(m, d, 2);
        let zeta = zeta_pow_raw(m, d, 1);
        let mut omega = C64::new(0.0, 0.0);
        for j in 0..d as i64 {
            omega += zeta_pow_raw(m, d, j * j);
        }
        omega /= (d as f64).sqrt();
        Ok(RootSystem {
            d,
            q,
            zeta,
            omega,
            sqrt_d: (d as f64).sqrt(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn q(&self) -> C64 {
        self.q
    }
    pub fn zeta(&self) -> C64 {
        self.zeta
    }
    pub fn omega(&self) -> C64 {
        self.omega
    }
    pub fn sqrt_d(&self) -> f64 {
        self.sqrt_d
    }

    /// q^n for any integer n, computed from a reduced angle.
    pub fn q_pow(&self, n: i64) -> C64 {
        let r = n.rem_euclid(self.d as i64);
        C64::from_polar(1.0, 2.0 * PI * r as f64 / self.d as f64)
    }

    /// ζ^n for any integer n, computed from a reduced angle.
    pub fn zeta_pow(&self, n: i64) -> C64 {
        let m = if self.d % 2 == 1 { self.d as i64 + 1 } else { 1 };
        zeta_pow_raw(m, self.d, n)
    }

    /// Principal square root of ω (ω is a phase).
    pub fn omega_sqrt(&self) -> C64 {
        C64::from_polar(1.0, self.omega.arg() / 2.0)
    }
}

fn zeta_pow_raw(m: i64, d: usize, n: i64) -> C64 {
    // zeta^n = exp(i*pi*m*n/d); reduce m*n modulo 2d to keep angles small.
    let twod = 2 * d as i64;
    let r = (m % twod * (n % twod)).rem_euclid(twod);
    C64::from_polar(1.0, PI * r as f64 / d as f64)
}

pub fn roots(d: usize) -> Result<RootSystem, NumericsError> {
    RootSystem::new(d)
}

/// Dense complex tensor on (C^d)^{⊗(out+in)} with a declared leg partition.
///
/// Entries are stored row-major over the concatenated index list
/// (out indices first, then in indices), each index running over 0..d-1.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    d: usize,
    out_legs: usize,
    in_legs: usize,
    entries: Vec<C64>,
}

impl Tensor {
    pub fn zeros(d: usize, out_legs: usize, in_legs: usize) -> Self {
        let len = d.pow((out_legs + in_legs) as u32);
        Tensor {
            d,
            out_legs,
            in_legs,
            entries: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn scalar(d: usize, value: C64) -> Self {
        Tensor {
            d,
            out_legs: 0,
            in_legs: 0,
            entries: vec![value],
        }
    }

    /// Identity on k legs.
    pub fn identity(d: usize, k: usize) -> Self {
        let mut t = Tensor::zeros(d, k, k);
        let side = d.pow(k as u32);
        for i in 0..side {
            t.entries[i * side + i] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn from_entries(d: usize, out_legs: usize, in_legs: usize, entries: Vec<C64>) -> Self {
        assert_eq!(entries.len(), d.pow((out_legs + in_legs) as u32));
        Tensor {
            d,
            out_legs,
            in_legs,
            entries,
        }
    }

    /// d×d matrix from a function of (row, col).
    pub fn from_matrix_fn(d: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut t = Tensor::zeros(d, 1, 1);
        for r in 0..d {
            for c in 0..d {
                t.entries[r * d + c] = f(r, c);
            }
        }
        t
    }

    /// Basis column vector |k1..km⟩.
    pub fn basis_state(d: usize, indices: &[usize]) -> Self {
        let mut t = Tensor::zeros(d, indices.len(), 0);
        let mut flat = 0;
        for &i in indices {
            assert!(i < d);
            flat = flat * d + i;
        }
        t.entries[flat] = C64::new(1.0, 0.0);
        t
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn out_legs(&self) -> usize {
        self.out_legs
    }
    pub fn in_legs(&self) -> usize {
        self.in_legs
    }
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }
    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn out_dim(&self) -> usize {
        self.d.pow(self.out_legs as u32)
    }
    pub fn in_dim(&self) -> usize {
        self.d.pow(self.in_legs as u32)
    }

    pub fn get(&self, out_idx: &[usize], in_idx: &[usize]) -> C64 {
        self.entries[self.flatten(out_idx, in_idx)]
    }

    pub fn set(&mut self, out_idx: &[usize], in_idx: &[usize], v: C64) {
        let i = self.flatten(out_idx, in_idx);
        self.entries[i] = v;
    }

    fn flatten(&self, out_idx: &[usize], in_idx: &[usize]) -> usize {
        assert_eq!(out_idx.len(), self.out_legs);
        assert_eq!(in_idx.len(), self.in_legs);
        let mut flat = 0;
        for &i in out_idx.iter().chain(in_idx.iter()) {
            debug_assert!(i < self.d);
            flat = flat * self.d + i;
        }
        flat
    }

    pub fn scale(&self, s: C64) -> Tensor {
        let mut t = self.clone();
        for e in &mut t.entries {
            *e *= s;
        }
        t
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor, NumericsError> {
        if self.d != other.d || self.out_legs != other.out_legs || self.in_legs != other.in_legs {
            return Err(NumericsError::ShapeError("add".into()));
        }
        let mut t = self.clone();
        for (e, o) in t.entries.iter_mut().zip(&other.entries) {
            *e += o;
        }
        Ok(t)
    }

    /// Adjoint: swaps the leg partition, transposes and conjugates.
    pub fn dagger(&self) -> Tensor {
        let od = self.out_dim();
        let id = self.in_dim();
        let mut t = Tensor::zeros(self.d, self.in_legs, self.out_legs);
        for o in 0..od {
            for i in 0..id {
                t.entries[i * od + o] = self.entries[o * id + i].conj();
            }
        }
        t
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.entries.len(), other.entries.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Tensor, tol: Tolerance) -> bool {
        self.d == other.d
            && self.out_legs == other.out_legs
            && self.in_legs == other.in_legs
            && self.max_abs_diff(other) <= tol.eps
    }
}

/// Vertical composition a∘b (contraction of a's inputs with b's outputs).
pub fn tensor_compose(a: &Tensor, b: &Tensor) -> Result<Tensor, NumericsError> {
    if a.d != b.d {
        return Err(NumericsError::ShapeError("dimension mismatch".into()));
    }
    if a.in_legs != b.out_legs {
        return Err(NumericsError::ShapeError(format!(
            "compose needs matching inner legs, got {} in vs {} out",
            a.in_legs, b.out_legs
        )));
    }
    let od = a.out_dim();
    let md = a.in_dim();
    let id = b.in_dim();
    let mut t = Tensor::zeros(a.d, a.out_legs, b.in_legs);
    for o in 0..od {
        for m in 0..md {
            let av = a.entries[o * md + m];
            if av == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..id {
                t.entries[o * id + i] += av * b.entries[m * id + i];
            }
        }
    }
    Ok(t)
}

/// Horizontal juxtaposition: leg counts add, index order is (a legs, b legs)
/// on both the out and the in side.
pub fn tensor_kron(a: &Tensor, b: &Tensor) -> Result<Tensor, NumericsError> {
    if a.d != b.d {
        return Err(NumericsError::ShapeError("dimension mismatch".into()));
    }
    let (ao, ai, bo, bi) = (a.out_dim(), a.in_dim(), b.out_dim(), b.in_dim());
    let mut t = Tensor::zeros(a.d, a.out_legs + b.out_legs, a.in_legs + b.in_legs);
    for oa in 0..ao {
        for ob in 0..bo {
            for ia in 0..ai {
                for ib in 0..bi {
                    t.entries[((oa * bo + ob) * ai + ia) * bi + ib] =
                        a.entries[oa * ai + ia] * b.entries[ob * bi + ib];
                }
            }
        }
    }
    Ok(t)
}

/// Finds λ with a = λ·b entrywise within tol, taking λ from the
/// largest-magnitude entry of b. Both zero → λ = 1. No such λ → None.
pub fn compare_up_to_scalar(
    a: &Tensor,
    b: &Tensor,
    tol: Tolerance,
) -> Result<Option<C64>, NumericsError> {
    if a.d != b.d || a.out_legs != b.out_legs || a.in_legs != b.in_legs {
        return Err(NumericsError::ShapeError("compare".into()));
    }
    let mut best = 0usize;
    let mut best_mag = 0.0;
    for (i, e) in b.entries.iter().enumerate() {
        if e.norm() > best_mag {
            best_mag = e.norm();
            best = i;
        }
    }
    if best_mag <= tol.eps {
        // b is zero: a must be zero too
        if a.entries.iter().all(|e| e.norm() <= tol.eps) {
            return Ok(Some(C64::new(1.0, 0.0)));
        }
        return Ok(None);
    }
    let lambda = a.entries[best] / b.entries[best];
    for (x, y) in a.entries.iter().zip(&b.entries) {
        if (x - lambda * y).norm() > tol.eps {
            return Ok(None);
        }
    }
    Ok(Some(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_system_invariants() {
        for d in 1..=8 {
            let r = roots(d).unwrap();
            assert!((r.zeta() * r.zeta() - r.q()).norm() < 1e-12, "zeta^2 = q, d={d}");
            assert!((r.zeta_pow((d * d) as i64) - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!((r.omega().norm() - 1.0).abs() < 1e-12, "omega phase, d={d}");
            assert!((r.sqrt_d() * r.sqrt_d() - d as f64).abs() < 1e-12);
            assert!((r.q_pow(d as i64) - C64::new(1.0, 0.0)).norm() < 1e-12);
            for k in 1..d {
                assert!((r.q_pow(k as i64) - C64::new(1.0, 0.0)).norm() > 1e-6, "primitive root, d={d} k={k}");
            }
            // omega * sqrt(d) = sum zeta^{j^2} by definition
            let mut s = C64::new(0.0, 0.0);
            for j in 0..d as i64 {
                s += r.zeta_pow(j * j);
            }
            assert!((r.omega() * r.sqrt_d() - s).norm() < 1e-12);
        }
    }

    #[test]
    fn root_system_examples() {
        let r1 = roots(1).unwrap();
        assert!((r1.q() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((r1.zeta() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((r1.omega() - C64::new(1.0, 0.0)).norm() < 1e-12);

        let r2 = roots(2).unwrap();
        assert!((r2.q() - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((r2.zeta() - C64::new(0.0, 1.0)).norm() < 1e-12);
        let expect = C64::from_polar(1.0, PI / 4.0);
        assert!((r2.omega() - expect).norm() < 1e-12);

        let r3 = roots(3).unwrap();
        assert!((r3.zeta() - r3.q_pow(2)).norm() < 1e-12);
        assert!((r3.omega() - C64::new(0.0, -1.0)).norm() < 1e-12);

        assert_eq!(roots(0).unwrap_err(), NumericsError::InvalidDimension);
    }

    #[test]
    fn compose_identity_and_shape_errors() {
        let d = 2;
        let id = Tensor::identity(d, 1);
        let z = Tensor::from_matrix_fn(d, |r, c| {
            if r == c {
                if r == 0 { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) }
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let zz = tensor_compose(&z, &z).unwrap();
        assert!(zz.approx_eq(&id, Tolerance::default()));
        let t2 = Tensor::zeros(d, 2, 2);
        let t3 = Tensor::zeros(d, 3, 3);
        assert!(tensor_compose(&t2, &t3).is_err());
    }

    #[test]
    fn kron_basis_states() {
        let d = 2;
        let k0 = Tensor::basis_state(d, &[0]);
        let k00 = tensor_kron(&k0, &k0).unwrap();
        assert!(k00.approx_eq(&Tensor::basis_state(d, &[0, 0]), Tolerance::default()));
    }

    #[test]
    fn compare_scalar_cases() {
        let d = 2;
        let id = Tensor::identity(d, 1);
        let tol = Tolerance::default();
        assert_eq!(
            compare_up_to_scalar(&id, &id, tol).unwrap(),
            Some(C64::new(1.0, 0.0))
        );
        let i_id = id.scale(C64::new(0.0, 1.0));
        let lam = compare_up_to_scalar(&i_id, &id, tol).unwrap().unwrap();
        assert!((lam - C64::new(0.0, 1.0)).norm() < 1e-12);
        let z0 = Tensor::zeros(d, 1, 1);
        assert_eq!(compare_up_to_scalar(&z0, &z0, tol).unwrap(), Some(C64::new(1.0, 0.0)));
        assert!(compare_up_to_scalar(&z0, &Tensor::zeros(d, 2, 0), tol).is_err());
    }
}
