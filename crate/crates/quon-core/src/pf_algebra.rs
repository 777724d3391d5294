//! Symbolic parafermion algebra of order d on n sites: normal forms,
//! multiplication, adjoint, charge grading, twisted product and the
//! Jordan–Wigner matrix representation.
//!
//! Normal form is the sorted monomial basis c_1^{a1} c_2^{a2} ... c_n^{an}
//! with exponents reduced into 0..d-1. The defining relations are
//! c_m^d = 1 and c_m c_{m'} = q c_{m'} c_m for m < m'.

use crate::numerics::{roots, tensor_compose, Tensor};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Coefficients below this magnitude are pruned from normal forms.
pub const ZERO_PRUNE: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum PfError {
    #[error("site index {0} out of range 1..={1}")]
    SiteError(usize, usize),
    #[error("algebra mismatch: operands live in different PF algebras")]
    AlgebraMismatch,
    #[error("twisted product needs homogeneous factors with disjoint, ordered supports")]
    TwistError,
    #[error("Jordan-Wigner representation needs an even number of sites")]
    OddSiteError,
}

/// ℤ_d charge of an element, or the marker for mixed-charge sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeValue {
    Value(usize),
    NonHomogeneous,
}

/// Element of PF_n in normal form: a map from exponent vectors to
/// nonzero coefficients.
#[derive(Debug, Clone)]
pub struct PFElement {
    d: usize,
    n_sites: usize,
    terms: BTreeMap<Vec<u8>, C64>,
}

impl PFElement {
    pub fn zero(d: usize, n_sites: usize) -> Self {
        PFElement {
            d,
            n_sites,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(d: usize, n_sites: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u8; n_sites], C64::new(1.0, 0.0));
        PFElement { d, n_sites, terms }
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn terms(&self) -> &BTreeMap<Vec<u8>, C64> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomial(d: usize, exponents: Vec<u8>, coeff: C64) -> Self {
        let n_sites = exponents.len();
        let mut e = PFElement::zero(d, n_sites);
        e.insert(exponents, coeff);
        e
    }

    fn insert(&mut self, expo: Vec<u8>, coeff: C64) {
        debug_assert!(expo.iter().all(|&a| (a as usize) < self.d.max(1)));
        let slot = self.terms.entry(expo).or_insert(C64::new(0.0, 0.0));
        *slot += coeff;
        if slot.norm() < ZERO_PRUNE {
            // find the key again to remove; small maps, fine
            let key: Vec<Vec<u8>> = self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() < ZERO_PRUNE)
                .map(|(k, _)| k.clone())
                .collect();
            for k in key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = PFElement::zero(self.d, self.n_sites);
        for (k, c) in &self.terms {
            out.insert(k.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, PfError> {
        if self.d != other.d || self.n_sites != other.n_sites {
            return Err(PfError::AlgebraMismatch);
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), *c);
        }
        Ok(out)
    }

    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        if self.d != other.d || self.n_sites != other.n_sites {
            return false;
        }
        let keys: std::collections::BTreeSet<&Vec<u8>> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.terms.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
            let b = other.terms.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
            (a - b).norm() <= eps
        })
    }
}

impl fmt::Display for PFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (expo, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:+.6}{:+.6}i)", coeff.re, coeff.im)?;
            if expo.iter().all(|&a| a == 0) {
                write!(f, " * 1")?;
            } else {
                write!(f, " *")?;
                for (m, &a) in expo.iter().enumerate() {
                    if a != 0 {
                        write!(f, " c{}^{}", m + 1, a)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// The generator c_m^{k mod d} as a single-term element.
pub fn pf_generator(d: usize, n_sites: usize, m: usize, k: i64) -> Result<PFElement, PfError> {
    if m == 0 || m > n_sites {
        return Err(PfError::SiteError(m, n_sites));
    }
    let mut expo = vec![0u8; n_sites];
    expo[m - 1] = k.rem_euclid(d as i64) as u8;
    Ok(PFElement::monomial(d, expo, C64::new(1.0, 0.0)))
}

/// Normal-ordered product. Moving c_m (earlier site) left past c_{m'}
/// (later site) costs q^{-1} per crossing, so
/// c^a · c^b = q^{-Σ_{m<m'} a_{m'} b_m} c^{a+b}.
pub fn pf_mul(a: &PFElement, b: &PFElement) -> Result<PFElement, PfError> {
    if a.d != b.d || a.n_sites != b.n_sites {
        return Err(PfError::AlgebraMismatch);
    }
    let r = roots(a.d).expect("valid dimension");
    let mut out = PFElement::zero(a.d, a.n_sites);
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let mut crossings: i64 = 0;
            for m in 0..a.n_sites {
                for mp in (m + 1)..a.n_sites {
                    crossings += ea[mp] as i64 * eb[m] as i64;
                }
            }
            let phase = r.q_pow(-crossings);
            let expo: Vec<u8> = ea
                .iter()
                .zip(eb.iter())
                .map(|(&x, &y)| ((x as usize + y as usize) % a.d) as u8)
                .collect();
            out.insert(expo, ca * cb * phase);
        }
    }
    Ok(out)
}

/// Antilinear antihomomorphism: conjugate coefficients, reverse products,
/// map c_m^k to c_m^{d-k}. Computed by reversal and renormal-ordering.
pub fn pf_adjoint(a: &PFElement) -> PFElement {
    let mut out = PFElement::zero(a.d, a.n_sites);
    for (expo, coeff) in &a.terms {
        // (c_1^{a1} ... c_n^{an})^* = c_n^{-an} ... c_1^{-a1}
        let mut acc = PFElement::unit(a.d, a.n_sites);
        for m in (0..a.n_sites).rev() {
            if expo[m] != 0 {
                let g = pf_generator(a.d, a.n_sites, m + 1, -(expo[m] as i64)).expect("in range");
                acc = pf_mul(&acc, &g).expect("same algebra");
            }
        }
        for (e, c) in acc.terms {
            out.insert(e, c * coeff.conj());
        }
    }
    out
}

/// Total charge Σ_k a_k mod d when every term agrees, else NonHomogeneous.
/// The zero and unit elements have charge 0.
pub fn pf_charge(a: &PFElement) -> ChargeValue {
    let mut seen: Option<usize> = None;
    for expo in a.terms.keys() {
        let total = expo.iter().map(|&x| x as usize).sum::<usize>() % a.d.max(1);
        match seen {
            None => seen = Some(total),
            Some(t) if t == total => {}
            Some(_) => return ChargeValue::NonHomogeneous,
        }
    }
    ChargeValue::Value(seen.unwrap_or(0))
}

fn support(a: &PFElement) -> Option<(usize, usize)> {
    // (min site, max site) over all terms, 1-based; None if no site is used
    let mut min = usize::MAX;
    let mut max = 0usize;
    for expo in a.terms.keys() {
        for (m, &x) in expo.iter().enumerate() {
            if x != 0 {
                min = min.min(m + 1);
                max = max.max(m + 1);
            }
        }
    }
    if max == 0 {
        None
    } else {
        Some((min, max))
    }
}

/// Twisted product ζ^{|a||b|}·(b·a) for homogeneous a supported strictly
/// left of homogeneous b; equals ζ^{-|a||b|}·(a·b).
pub fn pf_twisted_mul(a: &PFElement, b: &PFElement) -> Result<PFElement, PfError> {
    if a.d != b.d || a.n_sites != b.n_sites {
        return Err(PfError::AlgebraMismatch);
    }
    let (ka, kb) = match (pf_charge(a), pf_charge(b)) {
        (ChargeValue::Value(x), ChargeValue::Value(y)) => (x as i64, y as i64),
        _ => return Err(PfError::TwistError),
    };
    if let (Some((_, amax)), Some((bmin, _))) = (support(a), support(b)) {
        if amax >= bmin {
            return Err(PfError::TwistError);
        }
    }
    let r = roots(a.d).expect("valid dimension");
    let twist = r.zeta_pow(ka * kb);
    Ok(pf_mul(b, a)?.scale(twist))
}

fn jw_generator_matrices(d: usize, n_prime: usize) -> Vec<Tensor> {
    let r = roots(d).expect("valid dimension");
    let x = Tensor::from_matrix_fn(d, |row, col| {
        if row == (col + 1) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let z_inv = Tensor::from_matrix_fn(d, |row, col| {
        if row == col {
            r.q_pow(-(row as i64))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let x_zinv = tensor_compose(&x, &z_inv).expect("square");
    let eye = Tensor::identity(d, 1);
    let mut gens = Vec::with_capacity(2 * n_prime);
    for j in 0..n_prime {
        for flavor in 0..2 {
            let mut m: Option<Tensor> = None;
            for i in 0..n_prime {
                let factor = if i < j {
                    z_inv.clone()
                } else if i == j {
                    if flavor == 1 {
                        x_zinv.scale(r.zeta())
                    } else {
                        x.clone()
                    }
                } else {
                    eye.clone()
                };
                m = Some(match m {
                    None => factor,
                    Some(acc) => crate::numerics::tensor_kron(&acc, &factor).expect("same d"),
                });
            }
            gens.push(m.expect("n_prime >= 1"));
        }
    }
    gens
}

/// Jordan–Wigner representation of an element of PF_{2n'} as a
/// d^{n'} × d^{n'} matrix. Linear, unital, multiplicative and
/// adjoint-compatible; generator images follow this crate's frozen
/// clock/shift convention with a ζ phase correction.
pub fn jw_rep(a: &PFElement) -> Result<Tensor, PfError> {
    if a.n_sites % 2 != 0 {
        return Err(PfError::OddSiteError);
    }
    let n_prime = a.n_sites / 2;
    if n_prime == 0 {
        // PF_0 is the scalars
        let c = a
            .terms
            .get(&Vec::new())
            .copied()
            .unwrap_or(C64::new(0.0, 0.0));
        return Ok(Tensor::scalar(a.d, c));
    }
    let gens = jw_generator_matrices(a.d, n_prime);
    let side_legs = n_prime;
    let mut out = Tensor::zeros(a.d, side_legs, side_legs);
    for (expo, coeff) in &a.terms {
        let mut m = Tensor::identity(a.d, side_legs);
        for (site, &power) in expo.iter().enumerate() {
            for _ in 0..power {
                m = tensor_compose(&m, &gens[site]).expect("square");
            }
        }
        out = out.add(&m.scale(*coeff)).expect("same shape");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tolerance;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn generator_reduces_exponent() {
        let g = pf_generator(3, 2, 1, 4).unwrap();
        assert_eq!(g.terms().len(), 1);
        assert!(g.terms().contains_key(&vec![1u8, 0u8]));

        let u = pf_generator(2, 1, 1, 2).unwrap();
        assert!(u.approx_eq(&PFElement::unit(2, 1), 1e-12));

        assert_eq!(
            pf_generator(3, 1, 2, 0).unwrap_err(),
            PfError::SiteError(2, 1)
        );
    }

    #[test]
    fn mul_normal_orders_with_q_phase() {
        // c_2 c_1 = q^{-1} c_1 c_2 = q^2 c_1 c_2 for d = 3
        let d = 3;
        let r = roots(d).unwrap();
        let c1 = pf_generator(d, 2, 1, 1).unwrap();
        let c2 = pf_generator(d, 2, 2, 1).unwrap();
        let p = pf_mul(&c2, &c1).unwrap();
        let expect = PFElement::monomial(d, vec![1, 1], r.q_pow(2));
        assert!(p.approx_eq(&expect, 1e-12));

        // c_1^2 c_1^2 = c_1 for d = 3
        let c1sq = pf_generator(d, 2, 1, 2).unwrap();
        let p2 = pf_mul(&c1sq, &c1sq).unwrap();
        assert!(p2.approx_eq(&c1, 1e-12));

        // unit law
        let u = PFElement::unit(d, 2);
        assert!(pf_mul(&u, &p).unwrap().approx_eq(&p, 1e-12));

        assert_eq!(
            pf_mul(&c1, &pf_generator(2, 2, 1, 1).unwrap()).unwrap_err(),
            PfError::AlgebraMismatch
        );
    }

    #[test]
    fn adjoint_examples() {
        let d = 3;
        let r = roots(d).unwrap();
        let c1 = pf_generator(d, 1, 1, 1).unwrap();
        let adj = pf_adjoint(&c1);
        assert!(adj.approx_eq(&pf_generator(d, 1, 1, 2).unwrap(), 1e-12));

        // adjoint(c1 c2) = q-phase * c1^2 c2^2: phase is q^{-(d-1)^2} = q^{-4} = q^2
        let c1c2 = pf_mul(
            &pf_generator(d, 2, 1, 1).unwrap(),
            &pf_generator(d, 2, 2, 1).unwrap(),
        )
        .unwrap();
        let adj2 = pf_adjoint(&c1c2);
        let expect = PFElement::monomial(d, vec![2, 2], r.q_pow(2));
        assert!(adj2.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn adjoint_is_involution_on_random_elements() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in 2..=4usize {
            for _ in 0..10 {
                let n = 3;
                let mut x = PFElement::zero(d, n);
                for _ in 0..4 {
                    let expo: Vec<u8> = (0..n).map(|_| rng.gen_range(0..d) as u8).collect();
                    let coeff = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    x = x.add(&PFElement::monomial(d, expo, coeff)).unwrap();
                }
                let back = pf_adjoint(&pf_adjoint(&x));
                assert!(back.approx_eq(&x, 1e-9), "d={d}");
            }
        }
    }

    #[test]
    fn charge_examples() {
        let d = 3;
        let x = pf_mul(
            &pf_generator(d, 2, 1, 1).unwrap(),
            &pf_generator(d, 2, 2, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(pf_charge(&x), ChargeValue::Value(0));
        let mixed = pf_generator(d, 1, 1, 1)
            .unwrap()
            .add(&pf_generator(d, 1, 1, 2).unwrap())
            .unwrap();
        assert_eq!(pf_charge(&mixed), ChargeValue::NonHomogeneous);
        assert_eq!(pf_charge(&PFElement::unit(d, 2)), ChargeValue::Value(0));
    }

    #[test]
    fn twisted_product_examples() {
        let d = 3;
        let r = roots(d).unwrap();
        let c1 = pf_generator(d, 2, 1, 1).unwrap();
        let c2 = pf_generator(d, 2, 2, 1).unwrap();
        // zeta^{1*1} * c_2 c_1 = zeta * q^{-1} c_1 c_2 = zeta^{-1} c_1 c_2
        let t = pf_twisted_mul(&c1, &c2).unwrap();
        let expect = PFElement::monomial(d, vec![1, 1], r.zeta_pow(-1));
        assert!(t.approx_eq(&expect, 1e-12));

        let u = PFElement::unit(d, 2);
        let x = pf_mul(&c1, &c2).unwrap();
        assert!(pf_twisted_mul(&u, &x).unwrap().approx_eq(&x, 1e-12));

        assert_eq!(pf_twisted_mul(&c1, &c1).unwrap_err(), PfError::TwistError);
    }

    #[test]
    fn jw_unit_and_homomorphism() {
        let d = 2;
        let u = PFElement::unit(d, 2);
        let m = jw_rep(&u).unwrap();
        assert!(m.approx_eq(&Tensor::identity(d, 1), Tolerance::default()));

        let c1 = pf_generator(d, 2, 1, 1).unwrap();
        let c2 = pf_generator(d, 2, 2, 1).unwrap();
        let lhs = jw_rep(&pf_mul(&c1, &c2).unwrap()).unwrap();
        let rhs = tensor_compose(&jw_rep(&c1).unwrap(), &jw_rep(&c2).unwrap()).unwrap();
        assert!(lhs.approx_eq(&rhs, Tolerance::default()));

        // d=2, n'=1: two unitaries with U^2 = V^2 = I, UV = -VU
        let uu = jw_rep(&c1).unwrap();
        let vv = jw_rep(&c2).unwrap();
        let id = Tensor::identity(d, 1);
        assert!(tensor_compose(&uu, &uu).unwrap().approx_eq(&id, Tolerance::default()));
        assert!(tensor_compose(&vv, &vv).unwrap().approx_eq(&id, Tolerance::default()));
        let uv = tensor_compose(&uu, &vv).unwrap();
        let vu = tensor_compose(&vv, &uu).unwrap();
        assert!(uv.approx_eq(&vu.scale(c(-1.0, 0.0)), Tolerance::default()));

        let odd = pf_generator(2, 3, 1, 1).unwrap();
        assert_eq!(jw_rep(&odd).unwrap_err(), PfError::OddSiteError);
    }
}
