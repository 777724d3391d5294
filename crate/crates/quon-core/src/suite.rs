//! The named verification battery: every identity the engine claims is
//! checked here as a finite tensor or symbolic equality at desk scale.
//! The command line `check` subcommand and the acceptance tests both run
//! these records.

use crate::exec::{map_collect, Exec};
use crate::numerics::{
    compare_up_to_scalar, roots, tensor_compose, tensor_kron, Tensor, Tolerance,
};
use crate::pf_algebra::{
    jw_rep, pf_adjoint, pf_charge, pf_generator, pf_mul, pf_twisted_mul, ChargeValue, PFElement,
};
use crate::qudit_core::{
    calibrate_correction, clifford_order, correction_family, gate, random_state, resource_state,
    spider, teleport_run, GateName, ResourceName, SpiderColor, SpiderSpec,
};
use crate::quon_calculus::{
    braid_matrix, eval_network, eval_word, find_word, joint_check, quon_basis, string_fourier,
    Axis, BasisSet, BraidSign, Circle, GenusCircle, StrandWord, StringNetwork,
};
use crate::spider_engine::{
    antipode_loop_diagram, apply_rule, bialgebra_square_diagram, cnot_spider_diagram,
    compile_to_quon, compose_diagrams, eval_tensor, fbox_diagram, gate_diagram,
    hopf_counit_diagram, hopf_unit_diagram, juxtapose_diagrams, normalize, rule_suite,
    spider_diagram, wire_diagram, NodeId, NodeKind, RewriteRule, Site, SpiderDiagram,
};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Error,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub max_error: f64,
    pub scalar: Option<C64>,
    pub runtime_ms: u128,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub tol: f64,
    pub seed: u64,
    pub teleport_trials: usize,
    pub soundness_contexts: usize,
    pub exec: Exec,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dims: vec![2, 3, 4, 5],
            tol: 1e-9,
            seed: 42,
            teleport_trials: 20,
            soundness_contexts: 100,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub records: Vec<CheckRecord>,
    pub pass: bool,
}

struct Ctx {
    tol: f64,
    records: Vec<CheckRecord>,
}

impl Ctx {
    fn new(tol: f64) -> Self {
        Ctx {
            tol,
            records: Vec::new(),
        }
    }

    fn push(&mut self, name: String, max_error: f64, scalar: Option<C64>, started: Instant) {
        let status = if max_error.is_finite() && max_error <= self.tol {
            CheckStatus::Pass
        } else if max_error.is_finite() {
            CheckStatus::Fail
        } else {
            CheckStatus::Error
        };
        self.records.push(CheckRecord {
            name,
            status,
            max_error: if max_error.is_finite() { max_error } else { -1.0 },
            scalar,
            runtime_ms: started.elapsed().as_millis(),
        });
    }

    fn check(&mut self, name: impl Into<String>, f: impl FnOnce() -> (f64, Option<C64>)) {
        let started = Instant::now();
        let (err, scalar) = f();
        self.push(name.into(), err, scalar, started);
    }
}

fn phase_error(a: &Tensor, b: &Tensor, tol: Tolerance) -> f64 {
    match compare_up_to_scalar(a, b, tol) {
        Ok(Some(lam)) if (lam.norm() - 1.0).abs() <= 1e-7 => 0.0,
        _ => 1.0,
    }
}

// ---------------------------------------------------------------------------
// numerics
// ---------------------------------------------------------------------------

fn numerics_checks(d: usize, tol: f64, seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    ctx.check(format!("numerics/roots-invariants/d{d}"), || {
        let r = roots(d).expect("d >= 1");
        let mut err: f64 = (r.zeta() * r.zeta() - r.q()).norm();
        err = err.max((r.zeta_pow((d * d) as i64) - ONE).norm());
        err = err.max((r.omega().norm() - 1.0).abs());
        err = err.max((r.sqrt_d() * r.sqrt_d() - d as f64).abs());
        let mut s = C64::new(0.0, 0.0);
        for j in 0..d as i64 {
            s += r.zeta_pow(j * j);
        }
        err = err.max((r.omega() * r.sqrt_d() - s).norm());
        (err, Some(r.omega()))
    });
    ctx.check(format!("numerics/algebraic-laws/d{d}"), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e756d);
        let mut err: f64 = 0.0;
        for _ in 0..5 {
            let rand_t = |rng: &mut ChaCha8Rng, o: usize, i: usize| {
                let mut t = Tensor::zeros(d, o, i);
                for e in t.entries_mut() {
                    *e = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
                t
            };
            let a = rand_t(&mut rng, 1, 1);
            let b = rand_t(&mut rng, 1, 1);
            let c = rand_t(&mut rng, 1, 1);
            let e = rand_t(&mut rng, 1, 1);
            let ab_c = tensor_compose(&tensor_compose(&a, &b).unwrap(), &c).unwrap();
            let a_bc = tensor_compose(&a, &tensor_compose(&b, &c).unwrap()).unwrap();
            err = err.max(ab_c.max_abs_diff(&a_bc));
            let k_abc = tensor_kron(&tensor_kron(&a, &b).unwrap(), &c).unwrap();
            let k_abc2 = tensor_kron(&a, &tensor_kron(&b, &c).unwrap()).unwrap();
            err = err.max(k_abc.max_abs_diff(&k_abc2));
            // interchange: (a (x) b) ∘ (c (x) e) = (a∘c) (x) (b∘e)
            let lhs = tensor_compose(
                &tensor_kron(&a, &b).unwrap(),
                &tensor_kron(&c, &e).unwrap(),
            )
            .unwrap();
            let rhs = tensor_kron(
                &tensor_compose(&a, &c).unwrap(),
                &tensor_compose(&b, &e).unwrap(),
            )
            .unwrap();
            err = err.max(lhs.max_abs_diff(&rhs));
        }
        (err, None)
    });
    ctx.records
}

// ---------------------------------------------------------------------------
// parafermion algebra
// ---------------------------------------------------------------------------

fn random_homogeneous(d: usize, sites: std::ops::Range<usize>, n: usize, rng: &mut ChaCha8Rng) -> PFElement {
    // random combination of monomials of one fixed charge supported in `sites`
    let span: Vec<usize> = sites.collect();
    let charge = rng.gen_range(0..d);
    let mut x = PFElement::zero(d, n);
    for _ in 0..3 {
        let mut expo = vec![0u8; n];
        let mut remaining = charge as i64;
        for (pos, &site) in span.iter().enumerate() {
            let max = d as i64 - 1;
            let v = if pos + 1 == span.len() {
                remaining.rem_euclid(d as i64)
            } else {
                let v = rng.gen_range(0..d) as i64;
                remaining -= v;
                v
            };
            expo[site] = v.min(max).max(0) as u8;
        }
        // fix the total charge exactly
        let total: usize = expo.iter().map(|&a| a as usize).sum();
        if total % d != charge {
            continue;
        }
        let coeff = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        x = x.add(&PFElement::monomial(d, expo, coeff)).unwrap();
    }
    if x.is_zero() {
        let mut expo = vec![0u8; n];
        expo[span[0]] = (charge % d) as u8;
        x = PFElement::monomial(d, expo, ONE);
    }
    x
}

fn pf_checks(d: usize, tol: f64, seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    let r = roots(d).expect("valid");
    // Eq. 1 relations, symbolically, n up to 4
    ctx.check(format!("pf/defining-relations-symbolic/d{d}"), || {
        let mut err: f64 = 0.0;
        for n in 1..=4usize {
            for m in 1..=n {
                let c = pf_generator(d, n, m, 1).unwrap();
                let mut pow = PFElement::unit(d, n);
                for _ in 0..d {
                    pow = pf_mul(&pow, &c).unwrap();
                }
                if !pow.approx_eq(&PFElement::unit(d, n), tol) {
                    err = err.max(1.0);
                }
                for mp in (m + 1)..=n {
                    let cp = pf_generator(d, n, mp, 1).unwrap();
                    let lhs = pf_mul(&c, &cp).unwrap();
                    let rhs = pf_mul(&cp, &c).unwrap().scale(r.q());
                    if !lhs.approx_eq(&rhs, tol) {
                        err = err.max(1.0);
                    }
                }
            }
        }
        (err, None)
    });
    // Eq. 1 under the Jordan-Wigner representation
    ctx.check(format!("pf/defining-relations-jw/d{d}"), || {
        let mut err: f64 = 0.0;
        for n in [2usize, 4] {
            let nprime = n / 2;
            let gens: Vec<Tensor> = (1..=n)
                .map(|m| jw_rep(&pf_generator(d, n, m, 1).unwrap()).unwrap())
                .collect();
            let id = Tensor::identity(d, nprime);
            for m in 0..n {
                let mut pow = id.clone();
                for _ in 0..d {
                    pow = tensor_compose(&pow, &gens[m]).unwrap();
                }
                err = err.max(pow.max_abs_diff(&id));
                let unitary = tensor_compose(&gens[m], &gens[m].dagger()).unwrap();
                err = err.max(unitary.max_abs_diff(&id));
                for mp in (m + 1)..n {
                    let lhs = tensor_compose(&gens[m], &gens[mp]).unwrap();
                    let rhs = tensor_compose(&gens[mp], &gens[m]).unwrap().scale(r.q());
                    err = err.max(lhs.max_abs_diff(&rhs));
                }
            }
        }
        (err, None)
    });
    // para-isotopy q^{kl} and the twisted product interpolation
    ctx.check(format!("pf/para-isotopy/d{d}"), || {
        let mut err: f64 = 0.0;
        let n = 4;
        for k in 0..d as i64 {
            for l in 0..d as i64 {
                let x = pf_mul(
                    &pf_generator(d, n, 1, k).unwrap(),
                    &pf_generator(d, n, 2, 0).unwrap(),
                )
                .unwrap();
                let y = pf_generator(d, n, 3, l).unwrap();
                let lhs = pf_mul(&x, &y).unwrap();
                let rhs = pf_mul(&y, &x).unwrap().scale(r.q_pow(k * l));
                if !lhs.approx_eq(&rhs, tol) {
                    err = err.max(1.0);
                }
                // twisted product: zeta^{kl} (y x) = zeta^{-kl} (x y)
                let t = pf_twisted_mul(&x, &y).unwrap();
                let alt = pf_mul(&x, &y).unwrap().scale(r.zeta_pow(-(k * l)));
                if !t.approx_eq(&alt, tol) {
                    err = err.max(1.0);
                }
            }
        }
        (err, None)
    });
    // adjoint involution and charge additivity on random elements
    ctx.check(format!("pf/adjoint-charge/d{d}"), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7066);
        let mut err: f64 = 0.0;
        for _ in 0..10 {
            let n = 4;
            let x = random_homogeneous(d, 0..2, n, &mut rng);
            let y = random_homogeneous(d, 2..4, n, &mut rng);
            let backx = pf_adjoint(&pf_adjoint(&x));
            if !backx.approx_eq(&x, tol) {
                err = err.max(1.0);
            }
            let (ChargeValue::Value(cx), ChargeValue::Value(cy)) = (pf_charge(&x), pf_charge(&y))
            else {
                err = err.max(1.0);
                continue;
            };
            match pf_charge(&pf_mul(&x, &y).unwrap()) {
                ChargeValue::Value(c) if c == (cx + cy) % d => {}
                _ => err = err.max(1.0),
            }
        }
        (err, None)
    });
    ctx.records
}

fn jw_checks(d: usize, tol: f64, _seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    for nprime in [1usize, 2] {
        let n = 2 * nprime;
        ctx.check(format!("jw/multiplicative/d{d}-n{n}"), || {
            let mut err: f64 = 0.0;
            // spot products of basis monomials
            let mut exps = Vec::new();
            for m in 1..=n {
                exps.push(pf_generator(d, n, m, 1).unwrap());
            }
            for x in &exps {
                for y in &exps {
                    let lhs = jw_rep(&pf_mul(x, y).unwrap()).unwrap();
                    let rhs =
                        tensor_compose(&jw_rep(x).unwrap(), &jw_rep(y).unwrap()).unwrap();
                    err = err.max(lhs.max_abs_diff(&rhs));
                    // adjoint compatibility
                    let adj = jw_rep(&pf_adjoint(x)).unwrap();
                    err = err.max(adj.max_abs_diff(&jw_rep(x).unwrap().dagger()));
                }
            }
            (err, None)
        });
        ctx.check(format!("jw/basis-independence/d{d}-n{n}"), || {
            // the d^{2n'} monomial images span the full matrix algebra
            let side = d.pow(nprime as u32);
            let count = d.pow(n as u32);
            let mut rows: Vec<Vec<C64>> = Vec::with_capacity(count);
            let mut expo = vec![0u8; n];
            for flat in 0..count {
                let mut rem = flat;
                for slot in (0..n).rev() {
                    expo[slot] = (rem % d) as u8;
                    rem /= d;
                }
                let m = jw_rep(&PFElement::monomial(d, expo.clone(), ONE)).unwrap();
                rows.push(m.entries().to_vec());
            }
            let rank = complex_rank(&mut rows, side * side);
            ((count - rank) as f64, None)
        });
    }
    ctx.records
}

fn complex_rank(rows: &mut [Vec<C64>], width: usize) -> usize {
    let mut rank = 0;
    let mut col = 0;
    let n = rows.len();
    while rank < n && col < width {
        // partial pivot
        let mut best = rank;
        for r in rank..n {
            if rows[r][col].norm() > rows[best][col].norm() {
                best = r;
            }
        }
        if rows[best][col].norm() < 1e-9 {
            col += 1;
            continue;
        }
        rows.swap(rank, best);
        let pivot = rows[rank][col];
        for r in 0..n {
            if r != rank {
                let factor = rows[r][col] / pivot;
                if factor.norm() > 0.0 {
                    for c in col..width {
                        let sub = factor * rows[rank][c];
                        rows[r][c] -= sub;
                    }
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

// ---------------------------------------------------------------------------
// clifford census
// ---------------------------------------------------------------------------

fn sl2_order(d: usize) -> usize {
    let mut r = d * d * d;
    let mut rem = d;
    let mut p = 2;
    while p <= rem {
        if rem % p == 0 {
            r = r / (p * p) * (p * p - 1);
            while rem % p == 0 {
                rem /= p;
            }
        }
        p += 1;
    }
    r
}

fn clifford_checks(d: usize, tol: f64, _seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    ctx.check(format!("clifford/census/d{d}"), || {
        let expect = d * d * sl2_order(d);
        match clifford_order(d, 200_000) {
            Ok(n) => ((n as i64 - expect as i64).unsigned_abs() as f64, Some(C64::new(n as f64, 0.0))),
            Err(_) => (f64::INFINITY, None),
        }
    });
    ctx.records
}

// ---------------------------------------------------------------------------
// quon calculus
// ---------------------------------------------------------------------------

fn quon_checks(d: usize, tol: f64, _seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    let tolr = Tolerance::new(tol);
    let r = roots(d).expect("valid");

    ctx.check(format!("quon/bases-orthonormal-eigen/d{d}"), || {
        let mut err: f64 = 0.0;
        for (axis, g) in [
            (Axis::Z, gate(d, GateName::Z)),
            (Axis::X, gate(d, GateName::X)),
            (Axis::Y, gate(d, GateName::Y)),
        ] {
            let vs: Vec<Tensor> = (0..d)
                .map(|k| quon_basis(d, axis, k as i64).as_tensor())
                .collect();
            for (i, vi) in vs.iter().enumerate() {
                for (j, vj) in vs.iter().enumerate() {
                    let mut inner = C64::new(0.0, 0.0);
                    for (a, b) in vi.entries().iter().zip(vj.entries()) {
                        inner += a.conj() * b;
                    }
                    let expect = if i == j { ONE } else { C64::new(0.0, 0.0) };
                    err = err.max((inner - expect).norm());
                }
                let gv = tensor_compose(&g, vi).unwrap();
                err = err.max(phase_error(&gv, vi, tolr));
            }
        }
        (err, None)
    });

    ctx.check(format!("quon/pauli-charge-words/d{d}"), || {
        // recorded global phases: zeta^{-1} (Z), 1 (X), zeta (Y)
        let mut err: f64 = 0.0;
        let z_word = eval_word(&StrandWord::parse(d, "c1:1 c2:-1").unwrap());
        err = err.max(z_word.max_abs_diff(&gate(d, GateName::Z).scale(r.zeta_pow(-1))));
        let x_word = eval_word(&StrandWord::parse(d, "c1:1 c4:-1").unwrap());
        err = err.max(x_word.max_abs_diff(&gate(d, GateName::X)));
        let y_word = eval_word(&StrandWord::parse(d, "c1:-1 c3:1").unwrap());
        err = err.max(y_word.max_abs_diff(&gate(d, GateName::Y).scale(r.zeta())));
        (err, Some(r.zeta()))
    });

    ctx.check(format!("quon/braid-unitary-r2-yb/d{d}"), || {
        let id = Tensor::identity(d, 1);
        let mut err: f64 = 0.0;
        for i in 1..=3usize {
            let b = braid_matrix(d, i, BraidSign::Positive);
            let binv = braid_matrix(d, i, BraidSign::Negative);
            err = err.max(
                tensor_compose(&b, &b.dagger())
                    .unwrap()
                    .max_abs_diff(&id),
            );
            err = err.max(tensor_compose(&b, &binv).unwrap().max_abs_diff(&id));
        }
        let b1 = braid_matrix(d, 1, BraidSign::Positive);
        let b2 = braid_matrix(d, 2, BraidSign::Positive);
        let b3 = braid_matrix(d, 3, BraidSign::Positive);
        let aba = tensor_compose(&tensor_compose(&b1, &b2).unwrap(), &b1).unwrap();
        let bab = tensor_compose(&tensor_compose(&b2, &b1).unwrap(), &b2).unwrap();
        err = err.max(aba.max_abs_diff(&bab));
        let aba2 = tensor_compose(&tensor_compose(&b2, &b3).unwrap(), &b2).unwrap();
        let bab2 = tensor_compose(&tensor_compose(&b3, &b2).unwrap(), &b3).unwrap();
        err = err.max(aba2.max_abs_diff(&bab2));
        (err, None)
    });

    ctx.check(format!("quon/braid-words-f-g/d{d}"), || {
        let g_word: f64 = match find_word(d, &gate(d, GateName::G), 2) {
            Ok(w) if w.gens.len() <= 2 => 0.0,
            _ => 1.0,
        };
        let f_word: f64 = match find_word(d, &gate(d, GateName::F), 4) {
            Ok(w) if w.gens.len() <= 4 => 0.0,
            _ => 1.0,
        };
        (g_word.max(f_word), None)
    });

    ctx.check(format!("quon/string-fourier/d{d}"), || {
        let fs = string_fourier(d);
        let f = gate(d, GateName::F);
        let mut err = phase_error(&fs, &f, tolr);
        let fs2 = tensor_compose(&fs, &fs).unwrap();
        err = err.max(phase_error(&fs2, &gate(d, GateName::F2), tolr));
        // the squared phase must be constant across columns: fs = f exactly here
        err = err.max(fs.max_abs_diff(&f));
        (err, None)
    });

    ctx.check(format!("quon/completeness/d{d}"), || {
        // identity expanded as the charged cap/cup sum, via the braid expansion route:
        // sum over j of zeta^{j^2}-free kernels equals d^{1/2} * I
        let b2p = braid_matrix(d, 2, BraidSign::Positive);
        let b2m = braid_matrix(d, 2, BraidSign::Negative);
        let err = tensor_compose(&b2p, &b2m)
            .unwrap()
            .max_abs_diff(&Tensor::identity(d, 1));
        (err, None)
    });

    ctx.records
}

fn joint_checks(d: usize, tol: f64, seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    for m in 1..=2usize {
        for n in 1..=2usize {
            ctx.check(format!("joint/expansion/d{d}-m{m}-n{n}"), || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((d as u64) << 8) ^ ((m as u64) << 4) ^ n as u64);
                let left = BasisSet::standard(d, m);
                let right = BasisSet::standard(d, n);
                let mut err: f64 = 0.0;
                for _ in 0..50 {
                    let t = if (m + n) % 2 == 1 {
                        Tensor::zeros(d, 0, 0)
                    } else {
                        let legs = m - 1;
                        let mut t = Tensor::zeros(d, legs, 0);
                        for e in t.entries_mut() {
                            *e = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        }
                        t
                    };
                    match joint_check(d, m, n, &t, &left, &right) {
                        Ok(rep) => {
                            err = err.max(rep.max_deviation).max(rep.onb_deviation);
                        }
                        Err(_) => err = f64::INFINITY,
                    }
                }
                (err, None)
            });
        }
    }
    ctx.records
}

fn circle_genus_checks(d: usize, tol: f64, _seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    let r = roots(d).expect("valid");
    ctx.check(format!("genus/circle-values/d{d}"), || {
        let mut err: f64 = 0.0;
        let mut net = StringNetwork::new(d);
        net.circles.push(Circle { charges: vec![] });
        let t = eval_network(&net).unwrap();
        err = err.max((t.get(&[], &[]) - C64::new(r.sqrt_d(), 0.0)).norm());
        if d > 1 {
            let mut net2 = StringNetwork::new(d);
            net2.circles.push(Circle { charges: vec![1] });
            err = err.max(eval_network(&net2).unwrap().get(&[], &[]).norm());
        }
        (err, Some(C64::new(r.sqrt_d(), 0.0)))
    });
    ctx.check(format!("genus/odd-even-closure/d{d}"), || {
        let mut err: f64 = 0.0;
        let mut odd = StringNetwork::new(d);
        odd.genus_incidences.push(GenusCircle {
            strands_a: 1,
            strands_b: 1,
        });
        err = err.max(
            (eval_network(&odd).unwrap().get(&[], &[]) - C64::new(1.0 / r.sqrt_d(), 0.0)).norm(),
        );
        let mut even = StringNetwork::new(d);
        even.genus_incidences.push(GenusCircle {
            strands_a: 2,
            strands_b: 1,
        });
        err = err.max(eval_network(&even).unwrap().get(&[], &[]).norm());
        (err, Some(C64::new(1.0 / r.sqrt_d(), 0.0)))
    });
    ctx.check(format!("genus/hopf-both-paths/d{d}"), || {
        // tensor path
        let lhs = bialgebra_square_diagram(d);
        let site: Vec<NodeId> = {
            let mut ws = Vec::new();
            let mut bs = Vec::new();
            for i in lhs.node_ids() {
                match lhs.node(i) {
                    Some(NodeKind::WSpider { .. }) => ws.push(i),
                    Some(NodeKind::BSpider { .. }) => bs.push(i),
                    _ => {}
                }
            }
            vec![ws[0], ws[1], bs[0], bs[1]]
        };
        let rhs = apply_rule(&lhs, RewriteRule::Bialgebra, &Site::nodes(site)).unwrap();
        let t_l = eval_tensor(&lhs).unwrap();
        let t_r = eval_tensor(&rhs).unwrap();
        let mut err = t_l.max_abs_diff(&t_r);
        // topological path: the compiled left picture equals d^{-1/2} times
        // the compiled right picture, i.e. removing the circled genus
        let net_l = compile_to_quon(&lhs).unwrap();
        let net_r = compile_to_quon(&rhs).unwrap();
        let v_l = eval_network(&net_l).unwrap();
        let v_r = eval_network(&net_r).unwrap();
        err = err.max(v_l.max_abs_diff(&v_r.scale(C64::new(1.0 / r.sqrt_d(), 0.0))));
        // and adding an explicit circled genus to the right reproduces the left
        let mut net_rg = net_r.clone();
        net_rg.genus_incidences.push(GenusCircle {
            strands_a: 1,
            strands_b: 1,
        });
        err = err.max(v_l.max_abs_diff(&eval_network(&net_rg).unwrap()));
        (err, Some(C64::new(1.0 / r.sqrt_d(), 0.0)))
    });
    ctx.records
}

fn hopf_frobenius_checks(d: usize, tol: f64, _seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    for rep in rule_suite(&[d]) {
        ctx.check(format!("hopf/{}/d{d}", rep.rule), || {
            (rep.deviation, Some(rep.scalar))
        });
    }
    ctx.records
}

fn cnot_checks(d: usize, tol: f64, _seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    ctx.check(format!("cnot/spider-decomposition/d{d}"), || {
        // exact to 1e-12: entries are integers
        let t = eval_tensor(&cnot_spider_diagram(d)).unwrap();
        let err = t.max_abs_diff(&gate(d, GateName::Cnot));
        (if err <= 1e-12 { 0.0 } else { err }, None)
    });
    if d <= 3 {
        ctx.check(format!("cnot/top-view-compile/d{d}"), || {
            let diag = cnot_spider_diagram(d);
            let net = compile_to_quon(&diag).unwrap();
            let v = eval_network(&net).unwrap();
            let expect = gate(d, GateName::Cnot).scale(C64::new(1.0 / (d as f64).sqrt(), 0.0));
            (v.max_abs_diff(&expect), Some(C64::new(1.0 / (d as f64).sqrt(), 0.0)))
        });
    }
    ctx.records
}

fn resource_checks(d: usize, tol: f64, _seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    let r = roots(d).expect("valid");
    ctx.check(format!("resource/bell-identities/d{d}"), || {
        let bp = resource_state(d, ResourceName::BellPlus).unwrap();
        let bm = resource_state(d, ResourceName::BellMinus).unwrap();
        let m2 = resource_state(d, ResourceName::Max(2)).unwrap();
        let mut err = m2.max_abs_diff(&bm);
        let lift = tensor_kron(&Tensor::identity(d, 1), &gate(d, GateName::F2)).unwrap();
        err = err.max(tensor_compose(&lift, &bp).unwrap().max_abs_diff(&bm));
        (err, None)
    });
    ctx.check(format!("resource/ghz-compile/d{d}"), || {
        // black 0->3 spider compiles to the stacked top view; the recorded
        // scalar against the unit-norm state is d^{1/2}
        let diag = spider_diagram(d, SpiderColor::Black, 0, 3);
        let v = eval_network(&compile_to_quon(&diag).unwrap()).unwrap();
        let ghz = resource_state(d, ResourceName::Ghz(3)).unwrap();
        let err = v.max_abs_diff(&ghz.scale(C64::new(r.sqrt_d(), 0.0)));
        (err, Some(C64::new(r.sqrt_d(), 0.0)))
    });
    ctx.check(format!("resource/max-compile/d{d}"), || {
        let diag = spider_diagram(d, SpiderColor::White, 0, 3);
        let v = eval_network(&compile_to_quon(&diag).unwrap()).unwrap();
        let mx = resource_state(d, ResourceName::Max(3)).unwrap();
        let err = v.max_abs_diff(&mx.scale(C64::new(r.sqrt_d(), 0.0)));
        (err, Some(C64::new(r.sqrt_d(), 0.0)))
    });
    ctx.check(format!("resource/copy-compile/d{d}"), || {
        let diag = spider_diagram(d, SpiderColor::Black, 1, 2);
        let v = eval_network(&compile_to_quon(&diag).unwrap()).unwrap();
        let copy = spider(d, SpiderSpec::black(1, 2));
        (v.max_abs_diff(&copy), Some(ONE))
    });
    ctx.records
}

fn teleport_checks(d: usize, tol: f64, seed: u64, trials: usize) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    if d > 7 {
        return ctx.records;
    }
    ctx.check(format!("teleport/fidelity/d{d}"), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x74656c ^ (d as u64));
        let mut worst: f64 = 1.0;
        for _ in 0..trials {
            let phi = random_state(d, &mut rng);
            for a in 0..d {
                for b in 0..d {
                    match teleport_run(d, &phi, (a, b)) {
                        Ok(rep) => worst = worst.min(rep.fidelity),
                        Err(_) => worst = f64::NEG_INFINITY,
                    }
                }
            }
        }
        if worst.is_finite() {
            (1.0 - worst, None)
        } else {
            (f64::INFINITY, None)
        }
    });
    ctx.check(format!("teleport/calibration-deterministic/d{d}"), || {
        match calibrate_correction(d) {
            Some(found) if found == correction_family(d) => (0.0, None),
            _ => (1.0, None),
        }
    });
    ctx.records
}

// ---------------------------------------------------------------------------
// rewrite-rule soundness in randomized contexts
// ---------------------------------------------------------------------------

fn random_single_wire_gadget(d: usize, rng: &mut ChaCha8Rng) -> SpiderDiagram {
    match rng.gen_range(0..7u8) {
        0 => wire_diagram(d),
        1 => gate_diagram(d, GateName::Z),
        2 => gate_diagram(d, GateName::X),
        3 => gate_diagram(d, GateName::G),
        4 => fbox_diagram(d, 1),
        5 => spider_diagram(d, SpiderColor::Black, 1, 1),
        _ => spider_diagram(d, SpiderColor::White, 1, 1),
    }
}

fn random_layer(d: usize, wires: usize, rng: &mut ChaCha8Rng) -> SpiderDiagram {
    let mut acc = SpiderDiagram::new(d);
    for _ in 0..wires {
        let mut chain = wire_diagram(d);
        for _ in 0..rng.gen_range(0..2u8) {
            chain = compose_diagrams(&random_single_wire_gadget(d, rng), &chain).expect("1-wire");
        }
        acc = juxtapose_diagrams(&acc, &chain).expect("shapes");
    }
    acc
}

/// Embeds a pattern into a random context and returns the embedded diagram
/// together with the node-id offset of the pattern's nodes.
pub fn embed_in_random_context(
    pattern: &SpiderDiagram,
    rng: &mut ChaCha8Rng,
) -> (SpiderDiagram, usize) {
    let d = pattern.d;
    let pre = random_layer(d, pattern.n_inputs(), rng);
    let post = random_layer(d, pattern.n_outputs(), rng);
    let offset = pre_node_count(&pre);
    let mid = compose_diagrams(pattern, &pre).expect("shapes");
    let mut full = compose_diagrams(&post, &mid).expect("shapes");
    if rng.gen_bool(0.3) {
        // a disconnected scalar component stresses the scalar bookkeeping
        full = juxtapose_diagrams(&full, &spider_diagram(d, SpiderColor::Black, 0, 0))
            .expect("shapes");
    }
    (full, offset)
}

fn pre_node_count(pre: &SpiderDiagram) -> usize {
    // compose(pattern, pre) stores pre's nodes first
    pre.raw_len()
}

fn soundness_checks(d: usize, tol: f64, seed: u64, contexts: usize) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    let instances: Vec<(&str, RewriteRule, SpiderDiagram, Site)> = canonical_instances(d);
    for (name, rule, pattern, site) in instances {
        ctx.check(format!("soundness/{name}/d{d}"), || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x736f756e ^ (d as u64) << 3);
            let mut err: f64 = 0.0;
            for _ in 0..contexts {
                let (embedded, offset) = embed_in_random_context(&pattern, &mut rng);
                let shifted = Site::nodes(site.nodes.iter().map(|&n| n + offset).collect());
                let before = match eval_tensor(&embedded) {
                    Ok(t) => t,
                    Err(_) => {
                        err = f64::INFINITY;
                        break;
                    }
                };
                let after = match apply_rule(&embedded, rule, &shifted) {
                    Ok(g) => match eval_tensor(&g) {
                        Ok(t) => t,
                        Err(_) => {
                            err = f64::INFINITY;
                            break;
                        }
                    },
                    Err(_) => {
                        err = f64::INFINITY;
                        break;
                    }
                };
                err = err.max(before.max_abs_diff(&after));
            }
            (err, None)
        });
    }
    ctx.records
}

/// The canonical (rule, pattern, site) instances used for soundness testing.
pub fn canonical_instances(d: usize) -> Vec<(&'static str, RewriteRule, SpiderDiagram, Site)> {
    let mut out = Vec::new();
    {
        let copy = spider_diagram(d, SpiderColor::Black, 1, 2);
        let chain = compose_diagrams(
            &juxtapose_diagrams(&copy, &wire_diagram(d)).expect("shapes"),
            &copy,
        )
        .expect("shapes");
        let spiders: Vec<NodeId> = chain
            .node_ids()
            .filter(|&i| matches!(chain.node(i), Some(NodeKind::BSpider { .. })))
            .collect();
        out.push(("fuse-black", RewriteRule::FuseBlack, chain, Site::nodes(spiders)));
    }
    {
        let split = spider_diagram(d, SpiderColor::White, 1, 2);
        let chain = compose_diagrams(
            &juxtapose_diagrams(&split, &wire_diagram(d)).expect("shapes"),
            &split,
        )
        .expect("shapes");
        let spiders: Vec<NodeId> = chain
            .node_ids()
            .filter(|&i| matches!(chain.node(i), Some(NodeKind::WSpider { .. })))
            .collect();
        out.push(("fuse-white", RewriteRule::FuseWhite, chain, Site::nodes(spiders)));
    }
    {
        let mul = spider_diagram(d, SpiderColor::White, 2, 1);
        let unit = spider_diagram(d, SpiderColor::White, 0, 1);
        let diag = compose_diagrams(
            &mul,
            &juxtapose_diagrams(&unit, &wire_diagram(d)).expect("shapes"),
        )
        .expect("shapes");
        let unit_node = diag
            .node_ids()
            .find(|&i| matches!(diag.node(i), Some(NodeKind::WSpider { ins: 0, outs: 1 })))
            .expect("present");
        out.push(("unit-cancel", RewriteRule::UnitCancel, diag, Site::nodes(vec![unit_node])));
    }
    {
        let square = bialgebra_square_diagram(d);
        let mut ws = Vec::new();
        let mut bs = Vec::new();
        for i in square.node_ids() {
            match square.node(i) {
                Some(NodeKind::WSpider { .. }) => ws.push(i),
                Some(NodeKind::BSpider { .. }) => bs.push(i),
                _ => {}
            }
        }
        out.push((
            "bialgebra",
            RewriteRule::Bialgebra,
            square,
            Site::nodes(vec![ws[0], ws[1], bs[0], bs[1]]),
        ));
    }
    {
        let diag = antipode_loop_diagram(d, true);
        let mut w = usize::MAX;
        let mut b = usize::MAX;
        for i in diag.node_ids() {
            match diag.node(i) {
                Some(NodeKind::WSpider { .. }) => w = i,
                Some(NodeKind::BSpider { .. }) => b = i,
                _ => {}
            }
        }
        out.push(("antipode-loop", RewriteRule::AntipodeLoop, diag, Site::nodes(vec![w, b])));
    }
    {
        let diag = hopf_counit_diagram(d);
        let b = diag
            .node_ids()
            .find(|&i| matches!(diag.node(i), Some(NodeKind::BSpider { .. })))
            .expect("present");
        let u = diag
            .node_ids()
            .find(|&i| matches!(diag.node(i), Some(NodeKind::WSpider { .. })))
            .expect("present");
        out.push(("hopf-counit", RewriteRule::HopfLaw, diag, Site::nodes(vec![b, u])));
    }
    {
        let diag = hopf_unit_diagram(d);
        let w = diag
            .node_ids()
            .find(|&i| matches!(diag.node(i), Some(NodeKind::WSpider { .. })))
            .expect("present");
        let u = diag
            .node_ids()
            .find(|&i| matches!(diag.node(i), Some(NodeKind::BSpider { .. })))
            .expect("present");
        out.push(("hopf-unit", RewriteRule::HopfLaw, diag, Site::nodes(vec![w, u])));
    }
    {
        let w = spider_diagram(d, SpiderColor::White, 1, 2);
        let s = w
            .node_ids()
            .find(|&i| matches!(w.node(i), Some(NodeKind::WSpider { .. })))
            .expect("present");
        out.push(("color-change", RewriteRule::ColorChange, w, Site::nodes(vec![s])));
    }
    {
        let mut g = wire_diagram(d);
        g.genus_marks = 1;
        out.push(("genus-cancel", RewriteRule::GenusCancel, g, Site::empty()));
    }
    out
}

fn normalize_checks(d: usize, tol: f64, seed: u64) -> Vec<CheckRecord> {
    let mut ctx = Ctx::new(tol);
    ctx.check(format!("normalize/terminates-and-preserves/d{d}"), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f726d ^ d as u64);
        let mut err: f64 = 0.0;
        for _ in 0..10 {
            // random stack of spiders over two wires
            let mut diag = identity_like(d);
            for _ in 0..rng.gen_range(1..4u8) {
                let layer = random_two_wire_layer(d, &mut rng);
                diag = compose_diagrams(&layer, &diag).expect("shapes");
            }
            let before = eval_tensor(&diag).expect("well-formed");
            let normal = normalize(&diag);
            let after = eval_tensor(&normal).expect("well-formed");
            err = err.max(before.max_abs_diff(&after));
        }
        (err, None)
    });
    ctx.check(format!("normalize/ghz-construction/d{d}"), || {
        // two stacked copies normalize to a single spider computing GHZ(3)
        let copy = spider_diagram(d, SpiderColor::Black, 1, 2);
        let unit = spider_diagram(d, SpiderColor::Black, 0, 1);
        let two = compose_diagrams(
            &juxtapose_diagrams(&copy, &wire_diagram(d)).expect("shapes"),
            &copy,
        )
        .expect("shapes");
        let built = compose_diagrams(&two, &unit).expect("shapes");
        let normal = normalize(&built);
        let t = eval_tensor(&normal).expect("well-formed");
        let ghz = resource_state(d, ResourceName::Ghz(3)).unwrap();
        let err = t.max_abs_diff(&ghz.scale(C64::new((d as f64).sqrt(), 0.0)));
        // normal form should be the single 0->3 spider plus boundaries
        let spiders = normal
            .node_ids()
            .filter(|&i| matches!(normal.node(i), Some(NodeKind::BSpider { .. })))
            .count();
        (err.max(if spiders == 1 { 0.0 } else { 1.0 }), None)
    });
    ctx.records
}

fn identity_like(d: usize) -> SpiderDiagram {
    juxtapose_diagrams(&wire_diagram(d), &wire_diagram(d)).expect("shapes")
}

fn random_two_wire_layer(d: usize, rng: &mut ChaCha8Rng) -> SpiderDiagram {
    match rng.gen_range(0..4u8) {
        0 => {
            // copy then merge on wire 0
            let copy = spider_diagram(d, SpiderColor::Black, 1, 2);
            let merge = spider_diagram(d, SpiderColor::Black, 2, 1);
            let grow = juxtapose_diagrams(&copy, &wire_diagram(d)).expect("shapes");
            let shrink = juxtapose_diagrams(&merge, &wire_diagram(d)).expect("shapes");
            compose_diagrams(&shrink, &grow).expect("shapes")
        }
        1 => {
            let split = spider_diagram(d, SpiderColor::White, 1, 2);
            let merge = spider_diagram(d, SpiderColor::White, 2, 1);
            let grow = juxtapose_diagrams(&wire_diagram(d), &split).expect("shapes");
            let shrink = juxtapose_diagrams(&wire_diagram(d), &merge).expect("shapes");
            compose_diagrams(&shrink, &grow).expect("shapes")
        }
        2 => juxtapose_diagrams(
            &spider_diagram(d, SpiderColor::Black, 1, 1),
            &spider_diagram(d, SpiderColor::White, 1, 1),
        )
        .expect("shapes"),
        _ => identity_like(d),
    }
}

// ---------------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------------

type CellFn = fn(usize, f64, u64, &SuiteConfig) -> Vec<CheckRecord>;

fn cells() -> Vec<(&'static str, CellFn)> {
    vec![
        ("numerics", |d, tol, seed, _| numerics_checks(d, tol, seed)),
        ("pf", |d, tol, seed, _| pf_checks(d, tol, seed)),
        ("jw", |d, tol, seed, _| {
            if d <= 3 {
                jw_checks(d, tol, seed)
            } else {
                Vec::new()
            }
        }),
        ("clifford", |d, tol, seed, _| {
            if d <= 5 {
                clifford_checks(d, tol, seed)
            } else {
                Vec::new()
            }
        }),
        ("quon", |d, tol, seed, _| quon_checks(d, tol, seed)),
        ("joint", |d, tol, seed, _| {
            if d <= 3 {
                joint_checks(d, tol, seed)
            } else {
                Vec::new()
            }
        }),
        ("genus", |d, tol, seed, _| circle_genus_checks(d, tol, seed)),
        ("hopf", |d, tol, seed, _| hopf_frobenius_checks(d, tol, seed)),
        ("cnot", |d, tol, seed, _| cnot_checks(d, tol, seed)),
        ("resource", |d, tol, seed, _| resource_checks(d, tol, seed)),
        ("teleport", |d, tol, seed, cfg| {
            teleport_checks(d, tol, seed, cfg.teleport_trials)
        }),
        ("soundness", |d, tol, seed, cfg| {
            if d <= 5 {
                soundness_checks(d, tol, seed, cfg.soundness_contexts)
            } else {
                Vec::new()
            }
        }),
        ("normalize", |d, tol, seed, _| normalize_checks(d, tol, seed)),
    ]
}

/// Runs the full battery over the configured dimensions. Cells execute
/// independently (in parallel under the default strategy); record order is
/// deterministic.
pub fn run_all(config: &SuiteConfig) -> SuiteReport {
    let mut work: Vec<(usize, usize)> = Vec::new(); // (cell index, d)
    let defs = cells();
    for (ci, _) in defs.iter().enumerate() {
        for &d in &config.dims {
            work.push((ci, d));
        }
    }
    let tol = config.tol;
    let seed = config.seed;
    let results: Vec<(usize, usize, Vec<CheckRecord>)> = map_collect(config.exec, work, |(ci, d)| {
        let recs = (cells()[ci].1)(d, tol, seed, config);
        (ci, d, recs)
    });
    let mut ordered = results;
    ordered.sort_by_key(|(ci, d, _)| (*ci, *d));
    let records: Vec<CheckRecord> = ordered.into_iter().flat_map(|(_, _, r)| r).collect();
    let pass = records.iter().all(|r| r.passed());
    SuiteReport { records, pass }
}
