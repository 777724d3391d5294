//! Dense matrix realizations on (C^d)^{⊗n}: Pauli/Clifford generators,
//! spiders, resource states, the Clifford group census and the
//! teleportation simulator.

use crate::numerics::{roots, tensor_compose, tensor_kron, Tensor};
use num_complex::Complex64 as C64;
use rand::Rng;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuditError {
    #[error("shape error: {0}")]
    ShapeError(String),
    #[error("group closure exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("measurement branch has zero probability")]
    ImpossibleOutcome,
}

/// The fixed single- and two-qudit generator tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateName {
    X,
    Y,
    Z,
    F,
    G,
    F2,
    Cnot,
}

/// Spider colour: black is the "all indices equal" family, white the
/// "index sums equal mod d" family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpiderColor {
    Black,
    White,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpiderSpec {
    pub color: SpiderColor,
    pub in_legs: usize,
    pub out_legs: usize,
}

impl SpiderSpec {
    pub fn black(in_legs: usize, out_legs: usize) -> Self {
        SpiderSpec {
            color: SpiderColor::Black,
            in_legs,
            out_legs,
        }
    }
    pub fn white(in_legs: usize, out_legs: usize) -> Self {
        SpiderSpec {
            color: SpiderColor::White,
            in_legs,
            out_legs,
        }
    }
}

/// X|k⟩=|k+1⟩, Y|k⟩=ζ^{1−2k}|k−1⟩, Z|k⟩=q^k|k⟩, F|k⟩=d^{-1/2}Σ_l q^{kl}|l⟩,
/// G|k⟩=ζ^{k²}|k⟩, F2 = F∘F, CNOT = Σ|k+j,j⟩⟨k,j|.
pub fn gate(d: usize, name: GateName) -> Tensor {
    let r = roots(d).expect("valid dimension");
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match name {
        GateName::X => Tensor::from_matrix_fn(d, |row, col| {
            if row == (col + 1) % d {
                one
            } else {
                zero
            }
        }),
        GateName::Y => Tensor::from_matrix_fn(d, |row, col| {
            if (row + 1) % d == col {
                r.zeta_pow(1 - 2 * col as i64)
            } else {
                zero
            }
        }),
        GateName::Z => Tensor::from_matrix_fn(d, |row, col| {
            if row == col {
                r.q_pow(row as i64)
            } else {
                zero
            }
        }),
        GateName::F => Tensor::from_matrix_fn(d, |row, col| {
            r.q_pow((row * col) as i64) / r.sqrt_d()
        }),
        GateName::G => Tensor::from_matrix_fn(d, |row, col| {
            if row == col {
                r.zeta_pow((row * row) as i64)
            } else {
                zero
            }
        }),
        GateName::F2 => {
            let f = gate(d, GateName::F);
            tensor_compose(&f, &f).expect("square")
        }
        GateName::Cnot => {
            let mut t = Tensor::zeros(d, 2, 2);
            for k in 0..d {
                for j in 0..d {
                    t.set(&[(k + j) % d, j], &[k, j], one);
                }
            }
            t
        }
    }
}

/// Spider tensor: black has entry 1 exactly when all indices agree,
/// white when the out-index sum equals the in-index sum mod d.
pub fn spider(d: usize, spec: SpiderSpec) -> Tensor {
    let legs = spec.in_legs + spec.out_legs;
    let mut t = Tensor::zeros(d, spec.out_legs, spec.in_legs);
    let one = C64::new(1.0, 0.0);
    let total = d.pow(legs as u32);
    for flat in 0..total {
        let mut idx = vec![0usize; legs];
        let mut rem = flat;
        for slot in (0..legs).rev() {
            idx[slot] = rem % d;
            rem /= d;
        }
        let keep = match spec.color {
            SpiderColor::Black => idx.windows(2).all(|w| w[0] == w[1]),
            SpiderColor::White => {
                let outs: usize = idx[..spec.out_legs].iter().sum();
                let ins: usize = idx[spec.out_legs..].iter().sum();
                outs % d == ins % d
            }
        };
        if keep {
            t.entries_mut()[flat] = one;
        }
    }
    if legs == 0 {
        // black 0-0 is the d-valued circle, white 0-0 the trivial condition
        t.entries_mut()[0] = match spec.color {
            SpiderColor::Black => C64::new(d as f64, 0.0),
            SpiderColor::White => one,
        };
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceName {
    BellPlus,
    BellMinus,
    Ghz(usize),
    Max(usize),
}

/// Unit-norm resource states: B± on two qudits, GHZ and Max on n.
pub fn resource_state(d: usize, name: ResourceName) -> Result<Tensor, QuditError> {
    let r = roots(d).expect("valid dimension");
    let one = C64::new(1.0, 0.0);
    match name {
        ResourceName::BellPlus => {
            let mut t = Tensor::zeros(d, 2, 0);
            for k in 0..d {
                t.set(&[k, k], &[], one / r.sqrt_d());
            }
            Ok(t)
        }
        ResourceName::BellMinus => {
            let mut t = Tensor::zeros(d, 2, 0);
            for k in 0..d {
                t.set(&[k, (d - k) % d], &[], one / r.sqrt_d());
            }
            Ok(t)
        }
        ResourceName::Ghz(n) => {
            if n == 0 {
                return Err(QuditError::ShapeError("GHZ needs n >= 1".into()));
            }
            let mut t = Tensor::zeros(d, n, 0);
            for k in 0..d {
                t.set(&vec![k; n], &[], one / r.sqrt_d());
            }
            Ok(t)
        }
        ResourceName::Max(n) => {
            if n == 0 {
                return Err(QuditError::ShapeError("Max needs n >= 1".into()));
            }
            let mut t = spider(d, SpiderSpec::white(0, n));
            let scale = (d as f64).powf((1.0 - n as f64) / 2.0);
            t = t.scale(C64::new(scale, 0.0));
            Ok(t)
        }
    }
}

fn canonical_phase_key(m: &Tensor) -> Vec<(i64, i64)> {
    let mut phase = C64::new(1.0, 0.0);
    for e in m.entries() {
        if e.norm() > 1e-9 {
            phase = e.conj() / e.norm();
            break;
        }
    }
    m.entries()
        .iter()
        .map(|e| {
            let v = e * phase;
            let re = (v.re * 1e6).round() as i64;
            let im = (v.im * 1e6).round() as i64;
            // normalize -0
            (re + 0, im + 0)
        })
        .collect()
}

/// Size of the group generated by {X, Z, F, G} modulo global phase,
/// by breadth-first closure with a canonical phase representative.
pub fn clifford_order(d: usize, cap: usize) -> Result<usize, QuditError> {
    let gens = [
        gate(d, GateName::X),
        gate(d, GateName::Z),
        gate(d, GateName::F),
        gate(d, GateName::G),
    ];
    let id = Tensor::identity(d, 1);
    let mut seen: HashSet<Vec<(i64, i64)>> = HashSet::new();
    seen.insert(canonical_phase_key(&id));
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &gens {
                let prod = tensor_compose(g, m).expect("square");
                let key = canonical_phase_key(&prod);
                if seen.insert(key) {
                    if seen.len() > cap {
                        return Err(QuditError::CapExceeded(cap));
                    }
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    Ok(seen.len())
}

/// Outcome record of one teleportation run.
#[derive(Debug, Clone)]
pub struct TeleportReport {
    pub d: usize,
    pub outcome: (usize, usize),
    pub fidelity: f64,
    pub correction: String,
}

/// The frozen correction family: W(a,b) = X^{s1·a+s2·b} Z^{t1·a+t2·b} (F²)^c
/// with (s1, s2, t1, t2, c) = (0, 1, d-1, 0, 0), i.e. W(a,b) = X^b Z^{-a}.
pub fn correction_family(d: usize) -> (usize, usize, usize, usize, usize) {
    (0, 1, d - 1, 0, 0)
}

fn gate_pow(base: &Tensor, n: usize) -> Tensor {
    let mut acc = Tensor::identity(base.d(), 1);
    for _ in 0..n {
        acc = tensor_compose(&acc, base).expect("square");
    }
    acc
}

fn correction_word(d: usize, family: (usize, usize, usize, usize, usize), a: usize, b: usize) -> (Tensor, String) {
    let (s1, s2, t1, t2, c) = family;
    let xe = (s1 * a + s2 * b) % d;
    let ze = (t1 * a + t2 * b) % d;
    let mut w = tensor_compose(&gate_pow(&gate(d, GateName::X), xe), &gate_pow(&gate(d, GateName::Z), ze))
        .expect("square");
    let mut desc = format!("X^{xe} Z^{ze}");
    if c == 1 {
        w = tensor_compose(&w, &gate(d, GateName::F2)).expect("square");
        desc.push_str(" F2");
    }
    (w, desc)
}

fn run_with_family(
    d: usize,
    input_state: &Tensor,
    outcome: (usize, usize),
    family: (usize, usize, usize, usize, usize),
) -> Result<TeleportReport, QuditError> {
    if input_state.out_legs() != 1 || input_state.in_legs() != 0 || input_state.d() != d {
        return Err(QuditError::ShapeError("input must be a one-qudit vector".into()));
    }
    if (input_state.norm() - 1.0).abs() > 1e-6 {
        return Err(QuditError::ShapeError("input must be unit norm".into()));
    }
    let (a, b) = outcome;
    let bell = resource_state(d, ResourceName::BellMinus)?;
    let state = tensor_kron(input_state, &bell)
        .map_err(|e| QuditError::ShapeError(e.to_string()))?; // wires: input, alice, bob
    let f = gate(d, GateName::F);

    // CNOT with control = input wire, target = alice's wire: |k,j> -> |k,j+k>,
    // then F on the input wire; project wires 1,2 onto (a,b).
    let mut v = vec![C64::new(0.0, 0.0); d];
    for k in 0..d {
        // after the CNOT the amplitude at (k, b, c) came from (k, b-k, c)
        let j_pre = (b + d - k) % d;
        for c in 0..d {
            v[c] += f.get(&[a], &[k]) * state.get(&[k, j_pre, c], &[]);
        }
    }
    let norm: f64 = v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(QuditError::ImpossibleOutcome);
    }
    for e in &mut v {
        *e /= norm;
    }
    let collapsed = Tensor::from_entries(d, 1, 0, v);
    let (w, desc) = correction_word(d, family, a, b);
    let out = tensor_compose(&w, &collapsed).expect("shapes");
    let mut overlap = C64::new(0.0, 0.0);
    for k in 0..d {
        overlap += input_state.get(&[k], &[]).conj() * out.get(&[k], &[]);
    }
    Ok(TeleportReport {
        d,
        outcome,
        fidelity: overlap.norm_sqr(),
        correction: desc,
    })
}

/// Bennett-style teleportation over the shared B₋ pair with the frozen
/// correction family.
pub fn teleport_run(
    d: usize,
    input_state: &Tensor,
    outcome: (usize, usize),
) -> Result<TeleportReport, QuditError> {
    run_with_family(d, input_state, outcome, correction_family(d))
}

/// One-time calibration search over correction words
/// X^{s1·a+s2·b} Z^{t1·a+t2·b} (F²)^c. Returns the first family (in lex
/// order over (c, s1, s2, t1, t2)) that reaches fidelity 1 on a few
/// seeded random states for every outcome.
pub fn calibrate_correction(d: usize) -> Option<(usize, usize, usize, usize, usize)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let states: Vec<Tensor> = (0..3).map(|_| random_state(d, &mut rng)).collect();
    for c in 0..2usize {
        for s1 in 0..d {
            for s2 in 0..d {
                for t1 in 0..d {
                    for t2 in 0..d {
                        let fam = (s1, s2, t1, t2, c);
                        let ok = states.iter().all(|phi| {
                            (0..d).all(|a| {
                                (0..d).all(|b| {
                                    run_with_family(d, phi, (a, b), fam)
                                        .map(|r| r.fidelity >= 1.0 - 1e-9)
                                        .unwrap_or(false)
                                })
                            })
                        });
                        if ok {
                            return Some(fam);
                        }
                    }
                }
            }
        }
    }
    None
}

/// Haar-ish random unit vector (Gaussian components, normalized).
pub fn random_state(d: usize, rng: &mut impl Rng) -> Tensor {
    loop {
        let v: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm: f64 = v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return Tensor::from_entries(d, 1, 0, v.into_iter().map(|e| e / norm).collect());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{compare_up_to_scalar, Tolerance};

    #[test]
    fn gate_examples() {
        let tol = Tolerance::default();
        let d = 3;
        let r = roots(d).unwrap();
        let z = gate(d, GateName::Z);
        for k in 0..d {
            assert!((z.get(&[k], &[k]) - r.q_pow(k as i64)).norm() < 1e-12);
        }
        let x = gate(2, GateName::X);
        assert!((x.get(&[1], &[0]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((x.get(&[0], &[1]) - C64::new(1.0, 0.0)).norm() < 1e-12);

        let cn = gate(2, GateName::Cnot);
        assert!((cn.get(&[0, 0], &[0, 0]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((cn.get(&[1, 1], &[0, 1]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((cn.get(&[1, 0], &[1, 0]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((cn.get(&[0, 1], &[1, 1]) - C64::new(1.0, 0.0)).norm() < 1e-12);

        // ZX = q XZ
        for d in 1..=8 {
            let r = roots(d).unwrap();
            let x = gate(d, GateName::X);
            let z = gate(d, GateName::Z);
            let zx = tensor_compose(&z, &x).unwrap();
            let xz = tensor_compose(&x, &z).unwrap();
            assert!(zx.approx_eq(&xz.scale(r.q()), tol));
        }
    }

    #[test]
    fn gates_unitary_and_orders() {
        let tol = Tolerance::default();
        for d in 1..=8 {
            let id = Tensor::identity(d, 1);
            for name in [GateName::X, GateName::Y, GateName::Z, GateName::F, GateName::G] {
                let g = gate(d, name);
                let gg = tensor_compose(&g, &g.dagger()).unwrap();
                assert!(gg.approx_eq(&id, tol), "unitary {name:?} d={d}");
            }
            assert!(gate_pow(&gate(d, GateName::X), d).approx_eq(&id, tol));
            assert!(gate_pow(&gate(d, GateName::Z), d).approx_eq(&id, tol));
            assert!(gate_pow(&gate(d, GateName::F), 4).approx_eq(&id, tol));
            let f2 = gate(d, GateName::F2);
            for k in 0..d {
                let e = Tensor::basis_state(d, &[k]);
                let out = tensor_compose(&f2, &e).unwrap();
                assert!(out.approx_eq(&Tensor::basis_state(d, &[(d - k) % d]), tol));
            }
        }
    }

    #[test]
    fn spider_examples() {
        let d = 2;
        let sum = spider(d, SpiderSpec::white(2, 1));
        assert!((sum.get(&[0], &[0, 0]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((sum.get(&[1], &[0, 1]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((sum.get(&[1], &[1, 0]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((sum.get(&[0], &[1, 1]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((sum.get(&[1], &[0, 0])).norm() < 1e-12);

        for d in 2..=5 {
            let copy = spider(d, SpiderSpec::black(1, 2));
            for j in 0..d {
                assert!((copy.get(&[j, j], &[j]) - C64::new(1.0, 0.0)).norm() < 1e-12);
            }
            let b00 = spider(d, SpiderSpec::black(0, 0));
            assert!((b00.get(&[], &[]) - C64::new(d as f64, 0.0)).norm() < 1e-12);
            let w00 = spider(d, SpiderSpec::white(0, 0));
            assert!((w00.get(&[], &[]) - C64::new(1.0, 0.0)).norm() < 1e-12);
            let w01 = spider(d, SpiderSpec::white(0, 1));
            assert!(w01.approx_eq(&Tensor::basis_state(d, &[0]), Tolerance::default()));
        }
    }

    #[test]
    fn resource_examples() {
        let tol = Tolerance::default();
        for d in 2..=5 {
            let bp = resource_state(d, ResourceName::BellPlus).unwrap();
            let bm = resource_state(d, ResourceName::BellMinus).unwrap();
            assert!((bp.norm() - 1.0).abs() < 1e-12);
            assert!((bm.norm() - 1.0).abs() < 1e-12);
            // Max(2) = B-
            let m2 = resource_state(d, ResourceName::Max(2)).unwrap();
            assert!(m2.approx_eq(&bm, tol));
            // B- = (I (x) F2) B+
            let f2 = gate(d, GateName::F2);
            let lift = tensor_kron(&Tensor::identity(d, 1), &f2).unwrap();
            assert!(tensor_compose(&lift, &bp).unwrap().approx_eq(&bm, tol));
            let g3 = resource_state(d, ResourceName::Ghz(3)).unwrap();
            assert!((g3.norm() - 1.0).abs() < 1e-12);
            let mx3 = resource_state(d, ResourceName::Max(3)).unwrap();
            assert!((mx3.norm() - 1.0).abs() < 1e-12);
        }
        assert!(resource_state(2, ResourceName::Ghz(0)).is_err());
    }

    #[test]
    fn clifford_small_orders() {
        assert_eq!(clifford_order(1, 10).unwrap(), 1);
        assert_eq!(clifford_order(2, 1000).unwrap(), 24);
        assert_eq!(clifford_order(3, 1000).unwrap(), 216);
        assert_eq!(clifford_order(2, 10).unwrap_err(), QuditError::CapExceeded(10));
    }

    #[test]
    fn teleport_basics() {
        for d in [2usize, 3] {
            let e0 = Tensor::basis_state(d, &[0]);
            for a in 0..d {
                for b in 0..d {
                    let rep = teleport_run(d, &e0, (a, b)).unwrap();
                    assert!(rep.fidelity >= 1.0 - 1e-9, "d={d} outcome=({a},{b})");
                }
            }
        }
    }

    #[test]
    fn bloch_eigenvectors_d2() {
        // X eigenvectors are (|0>±|1>)/sqrt2 and Y's are (|0>±i|1>)/sqrt2 up to phase
        let d = 2;
        let tol = Tolerance::default();
        let x = gate(d, GateName::X);
        let plus = Tensor::from_entries(
            d,
            1,
            0,
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        )
        .scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        let xp = tensor_compose(&x, &plus).unwrap();
        assert!(compare_up_to_scalar(&xp, &plus, tol).unwrap().is_some());
        let y = gate(d, GateName::Y);
        let iy = Tensor::from_entries(
            d,
            1,
            0,
            vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
        )
        .scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        let yp = tensor_compose(&y, &iy).unwrap();
        assert!(compare_up_to_scalar(&yp, &iy, tol).unwrap().is_some());
    }
}
