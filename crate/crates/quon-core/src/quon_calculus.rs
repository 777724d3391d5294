//! The four-string quon model: charged-string bases of the 1-quon space,
//! braid and charge generators, the string Fourier transform, the
//! string-network evaluator with genus annotations, and the handle
//! expansion check.
//!
//! Coordinates. The 1-quon chart is the Z-pairing: strands (1,2) cupped
//! with charge g on leg 1 and strands (3,4) cupped with -g on leg 4;
//! coordinate vectors are indexed by g. Charge insertion at the bottom of
//! strand s acts on these coordinates through the frozen matrices
//! K1 = X, K2 = ζ·X·Z⁻¹, K3 = Z⁻¹, K4 = 1, each of order d.
//!
//! Crossings resolve into the charged cap/cup sum with coefficient
//! (ωd)^{-1/2} ζ^{j²}; together with the rank-one neutral turnback
//! E = J/√d (forced by the completeness relation) this gives
//! b1 = b3 = ω^{-1/2}·diag(ζ^{g²}) and a Gaussian-kernel b2. Negative
//! crossings are the adjoints.

use crate::numerics::{
    compare_up_to_scalar, roots, tensor_compose, Tensor, Tolerance,
};
use crate::qudit_core::{gate, GateName};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuonError {
    #[error("no word of the requested length matches the target")]
    NotFound,
    #[error("loop charges cannot be cancelled under the supported phase-free rules")]
    NonCancellingCharges,
    #[error("basis set is not orthonormal")]
    BasisError,
    #[error("malformed string network: {0}")]
    GraphError(String),
    #[error("shape error: {0}")]
    ShapeError(String),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

// ---------------------------------------------------------------------------
// charge and braid generators on the 1-quon space
// ---------------------------------------------------------------------------

/// Matrix of inserting charge g at the bottom of the given strand (1..4),
/// acting on Z-pairing coordinates.
pub fn charge_matrix(d: usize, strand: usize, g: i64) -> Tensor {
    assert!((1..=4).contains(&strand), "strand must be 1..4");
    let r = roots(d).expect("valid dimension");
    let e = g.rem_euclid(d as i64);
    match strand {
        // K1 = X: |k> -> |k+g>
        1 => Tensor::from_matrix_fn(d, |row, col| {
            if row == (col + e as usize) % d {
                ONE
            } else {
                ZERO
            }
        }),
        // K2 = (zeta X Z^-1)^g : |k> -> zeta^{2g - g^2 - 2gk} |k+g>
        2 => Tensor::from_matrix_fn(d, |row, col| {
            if row == (col + e as usize) % d {
                r.zeta_pow(2 * e - e * e - 2 * e * col as i64)
            } else {
                ZERO
            }
        }),
        // K3 = Z^{-g}: diag(q^{-gk})
        3 => Tensor::from_matrix_fn(d, |row, col| {
            if row == col {
                r.q_pow(-(e * col as i64))
            } else {
                ZERO
            }
        }),
        // K4 = 1
        _ => Tensor::identity(d, 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BraidSign {
    Positive,
    Negative,
}

impl BraidSign {
    pub fn flip(self) -> Self {
        match self {
            BraidSign::Positive => BraidSign::Negative,
            BraidSign::Negative => BraidSign::Positive,
        }
    }
}

/// Crossing of strands (i, i+1) on the 1-quon space. Positions 1 and 3 are
/// diagonal in Z-coordinates; position 2 is the Fourier-type recoupling
/// kernel obtained from the charged cap/cup expansion. Negative crossings
/// are adjoints, so Reidemeister II holds by construction.
pub fn braid_matrix(d: usize, i: usize, sign: BraidSign) -> Tensor {
    assert!((1..=3).contains(&i), "braid position must be 1..3");
    let positive = match i {
        1 | 3 => {
            let r = roots(d).expect("valid dimension");
            let w = r.omega_sqrt();
            Tensor::from_matrix_fn(d, |row, col| {
                if row == col {
                    r.zeta_pow((row * row) as i64) / w
                } else {
                    ZERO
                }
            })
        }
        _ => braid_two_from_expansion(d),
    };
    match sign {
        BraidSign::Positive => positive,
        BraidSign::Negative => positive.dagger(),
    }
}

/// b2 assembled from the crossing expansion: (ωd)^{-1/2} Σ_j ζ^{j²} K_j with
/// K_j = K2(-j)·E·K2(j) and E the neutral (2,3) turnback evaluated from the
/// chargeless recoupling networks.
fn braid_two_from_expansion(d: usize) -> Tensor {
    let r = roots(d).expect("valid dimension");
    let u_out = eval_network(&x_pattern_net(d, 0, 0)).expect("valid net"); // Σ_g e_g
    let u_in = eval_network(&x_pattern_in_net(d)).expect("valid net"); // row of ones
    // E = (1/sqrt d) |u_out><u_in|
    let mut e = Tensor::zeros(d, 1, 1);
    for row in 0..d {
        for col in 0..d {
            let v = u_out.get(&[row], &[]) * u_in.get(&[], &[col]) / r.sqrt_d();
            e.set(&[row], &[col], v);
        }
    }
    let coeff = ONE / (r.omega_sqrt() * r.sqrt_d());
    let mut acc = Tensor::zeros(d, 1, 1);
    for j in 0..d as i64 {
        let kj = tensor_compose(
            &tensor_compose(&charge_matrix(d, 2, -j), &e).expect("square"),
            &charge_matrix(d, 2, j),
        )
        .expect("square");
        acc = acc.add(&kj.scale(r.zeta_pow(j * j))).expect("same shape");
    }
    acc.scale(coeff)
}

// ---------------------------------------------------------------------------
// strand words
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordGen {
    /// Crossing of strands (i, i+1), i in 1..3.
    Braid(u8, BraidSign),
    /// Charge g inserted at the bottom of a strand 1..4.
    Charge(u8, i64),
}

/// A word in the braid and charge generators acting on the 1-quon space;
/// the first generator listed is applied first.
#[derive(Debug, Clone, PartialEq)]
pub struct StrandWord {
    pub d: usize,
    pub gens: Vec<WordGen>,
}

impl StrandWord {
    pub fn new(d: usize, gens: Vec<WordGen>) -> Self {
        StrandWord { d, gens }
    }

    /// Parses the whitespace token form: `b1 b2' c1:2 c4:-1`.
    pub fn parse(d: usize, text: &str) -> Result<Self, QuonError> {
        let mut gens = Vec::new();
        for tok in text.split_whitespace() {
            if let Some(rest) = tok.strip_prefix('b') {
                let (num, sign) = if let Some(n) = rest.strip_suffix('\'') {
                    (n, BraidSign::Negative)
                } else {
                    (rest, BraidSign::Positive)
                };
                let i: u8 = num
                    .parse()
                    .map_err(|_| QuonError::GraphError(format!("bad braid token {tok}")))?;
                if !(1..=3).contains(&i) {
                    return Err(QuonError::GraphError(format!("braid position out of range in {tok}")));
                }
                gens.push(WordGen::Braid(i, sign));
            } else if let Some(rest) = tok.strip_prefix('c') {
                let (s, g) = rest
                    .split_once(':')
                    .ok_or_else(|| QuonError::GraphError(format!("bad charge token {tok}")))?;
                let strand: u8 = s
                    .parse()
                    .map_err(|_| QuonError::GraphError(format!("bad charge token {tok}")))?;
                let charge: i64 = g
                    .parse()
                    .map_err(|_| QuonError::GraphError(format!("bad charge token {tok}")))?;
                if !(1..=4).contains(&strand) {
                    return Err(QuonError::GraphError(format!("strand out of range in {tok}")));
                }
                gens.push(WordGen::Charge(strand, charge));
            } else {
                return Err(QuonError::GraphError(format!("unknown token {tok}")));
            }
        }
        Ok(StrandWord { d, gens })
    }

    pub fn render(&self) -> String {
        self.gens
            .iter()
            .map(|g| match g {
                WordGen::Braid(i, BraidSign::Positive) => format!("b{i}"),
                WordGen::Braid(i, BraidSign::Negative) => format!("b{i}'"),
                WordGen::Charge(s, g) => format!("c{s}:{g}"),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Ordered product of the word's generator matrices, first generator
/// applied first.
pub fn eval_word(word: &StrandWord) -> Tensor {
    let mut acc = Tensor::identity(word.d, 1);
    for gen in &word.gens {
        let m = match *gen {
            WordGen::Braid(i, sign) => braid_matrix(word.d, i as usize, sign),
            WordGen::Charge(s, g) => charge_matrix(word.d, s as usize, g),
        };
        acc = tensor_compose(&m, &acc).expect("square");
    }
    acc
}

/// Exhaustive search over braid-generator words up to max_len, returning the
/// first word (length order, then generator order b1, b2, b3, b1', b2', b3')
/// whose evaluation matches the target up to a global phase.
pub fn find_word(d: usize, target: &Tensor, max_len: usize) -> Result<StrandWord, QuonError> {
    if target.out_legs() != 1 || target.in_legs() != 1 || target.d() != d {
        return Err(QuonError::ShapeError("target must be a d x d matrix".into()));
    }
    let tol = Tolerance::default();
    let gens: Vec<WordGen> = vec![
        WordGen::Braid(1, BraidSign::Positive),
        WordGen::Braid(2, BraidSign::Positive),
        WordGen::Braid(3, BraidSign::Positive),
        WordGen::Braid(1, BraidSign::Negative),
        WordGen::Braid(2, BraidSign::Negative),
        WordGen::Braid(3, BraidSign::Negative),
    ];
    let mats: Vec<Tensor> = gens
        .iter()
        .map(|g| match *g {
            WordGen::Braid(i, sign) => braid_matrix(d, i as usize, sign),
            _ => unreachable!(),
        })
        .collect();
    // breadth-first over word lengths
    let mut frontier: Vec<(Vec<usize>, Tensor)> = vec![(Vec::new(), Tensor::identity(d, 1))];
    for len in 0..=max_len {
        for (word, m) in &frontier {
            if compare_up_to_scalar(m, target, tol)
                .map(|o| o.map(|lam| (lam.norm() - 1.0).abs() < 1e-6).unwrap_or(false))
                .unwrap_or(false)
            {
                let gens_out = word.iter().map(|&i| gens[i]).collect();
                return Ok(StrandWord::new(d, gens_out));
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::with_capacity(frontier.len() * gens.len());
        for (word, m) in &frontier {
            for (gi, gm) in mats.iter().enumerate() {
                let mut w = word.clone();
                w.push(gi);
                next.push((w, tensor_compose(gm, m).expect("square")));
            }
        }
        frontier = next;
    }
    Err(QuonError::NotFound)
}

// ---------------------------------------------------------------------------
// string networks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuonIo {
    In,
    Out,
}

/// One four-point boundary square. Boundary quons stay open in the result
/// (ordered by their boundary position); internal quons must be consumed
/// pairwise by junctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuonSlot {
    pub io: QuonIo,
    /// Position among the network's open legs of the same direction.
    pub boundary: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    pub quon: usize,
    pub leg: u8, // 1..4
}

impl Point {
    pub fn new(quon: usize, leg: u8) -> Self {
        Point { quon, leg }
    }
}

/// A string between two boundary points, with a charge recorded at each end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub a: Point,
    pub b: Point,
    pub charge_a: i64,
    pub charge_b: i64,
}

impl Arc {
    pub fn plain(a: Point, b: Point) -> Self {
        Arc {
            a,
            b,
            charge_a: 0,
            charge_b: 0,
        }
    }
}

/// A crossing between two arcs of one quon (the over arc crosses above).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub over: usize,
    pub under: usize,
}

/// A free closed loop with its cyclic charge word.
#[derive(Debug, Clone, PartialEq)]
pub struct Circle {
    pub charges: Vec<i64>,
}

/// A neutral circle around a genus with the given strand counts passing
/// through on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenusCircle {
    pub strands_a: usize,
    pub strands_b: usize,
}

/// Four-string diagram data: boundary squares, arcs with end charges,
/// crossings, free circles, genus annotations and a tracked global scalar.
#[derive(Debug, Clone)]
pub struct StringNetwork {
    pub d: usize,
    pub quons: Vec<QuonSlot>,
    pub arcs: Vec<Arc>,
    pub crossings: Vec<Crossing>,
    pub junctions: Vec<(usize, usize)>,
    pub circles: Vec<Circle>,
    pub genus_incidences: Vec<GenusCircle>,
    pub free_genus: usize,
    pub scalar: C64,
}

impl StringNetwork {
    pub fn new(d: usize) -> Self {
        StringNetwork {
            d,
            quons: Vec::new(),
            arcs: Vec::new(),
            crossings: Vec::new(),
            junctions: Vec::new(),
            circles: Vec::new(),
            genus_incidences: Vec::new(),
            free_genus: 0,
            scalar: ONE,
        }
    }

    pub fn add_quon(&mut self, io: QuonIo, boundary: Option<usize>) -> usize {
        self.quons.push(QuonSlot { io, boundary });
        self.quons.len() - 1
    }
}

/// Builds the 1-quon out-square network for the Z/X/Y pairing picture of
/// coordinate k (picture charges only, no normalization).
pub fn basis_network(d: usize, axis: Axis, k: i64) -> StringNetwork {
    let mut net = StringNetwork::new(d);
    let q = net.add_quon(QuonIo::Out, Some(0));
    match axis {
        Axis::Z => {
            net.arcs.push(Arc {
                a: Point::new(q, 1),
                b: Point::new(q, 2),
                charge_a: k,
                charge_b: 0,
            });
            net.arcs.push(Arc {
                a: Point::new(q, 3),
                b: Point::new(q, 4),
                charge_a: 0,
                charge_b: -k,
            });
        }
        Axis::X => {
            net.arcs.push(Arc {
                a: Point::new(q, 1),
                b: Point::new(q, 4),
                charge_a: k,
                charge_b: 0,
            });
            net.arcs.push(Arc {
                a: Point::new(q, 2),
                b: Point::new(q, 3),
                charge_a: -k,
                charge_b: 0,
            });
        }
        Axis::Y => {
            net.arcs.push(Arc {
                a: Point::new(q, 1),
                b: Point::new(q, 3),
                charge_a: k,
                charge_b: 0,
            });
            net.arcs.push(Arc {
                a: Point::new(q, 2),
                b: Point::new(q, 4),
                charge_a: -k,
                charge_b: 0,
            });
            // the drawn picture has the (2,4) strand crossing over (1,3)
            net.crossings.push(Crossing { over: 1, under: 0 });
        }
    }
    net
}

fn x_pattern_net(d: usize, c1: i64, c2: i64) -> StringNetwork {
    let mut net = basis_network(d, Axis::X, 0);
    net.arcs[0].charge_a = c1;
    net.arcs[1].charge_a = c2;
    net
}

fn x_pattern_in_net(d: usize) -> StringNetwork {
    let mut net = StringNetwork::new(d);
    let q = net.add_quon(QuonIo::In, Some(0));
    net.arcs.push(Arc::plain(Point::new(q, 1), Point::new(q, 4)));
    net.arcs.push(Arc::plain(Point::new(q, 2), Point::new(q, 3)));
    net
}

// internal labeled dense tensor over square axes
struct Labeled {
    axes: Vec<usize>,
    data: Vec<C64>,
}

impl Labeled {
    fn len_for(d: usize, n: usize) -> usize {
        d.pow(n as u32)
    }
    fn scalar(v: C64) -> Self {
        Labeled {
            axes: Vec::new(),
            data: vec![v],
        }
    }
}

fn outer(a: Labeled, b: Labeled) -> Labeled {
    let mut axes = a.axes.clone();
    axes.extend(&b.axes);
    let mut data = vec![ZERO; a.data.len() * b.data.len()];
    for (i, x) in a.data.iter().enumerate() {
        for (j, y) in b.data.iter().enumerate() {
            data[i * b.data.len() + j] = x * y;
        }
    }
    Labeled { axes, data }
}

fn contract_pair(d: usize, t: Labeled, ax1: usize, ax2: usize) -> Labeled {
    let p1 = t.axes.iter().position(|&a| a == ax1).expect("axis present");
    let p2 = t.axes.iter().position(|&a| a == ax2).expect("axis present");
    let n = t.axes.len();
    let keep: Vec<usize> = (0..n).filter(|&i| i != p1 && i != p2).collect();
    let out_axes: Vec<usize> = keep.iter().map(|&i| t.axes[i]).collect();
    let mut data = vec![ZERO; Labeled::len_for(d, out_axes.len())];
    let mut idx = vec![0usize; n];
    for (flat, v) in t.data.iter().enumerate() {
        if *v == ZERO {
            continue;
        }
        let mut rem = flat;
        for slot in (0..n).rev() {
            idx[slot] = rem % d;
            rem /= d;
        }
        if idx[p1] != idx[p2] {
            continue;
        }
        let mut out_flat = 0;
        for &kslot in &keep {
            out_flat = out_flat * d + idx[kslot];
        }
        data[out_flat] += v;
    }
    Labeled {
        axes: out_axes,
        data,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

// charge of each leg of a single-square component, plus its pairing
struct SquareShape {
    pairing: [(u8, u8); 2],
    leg_charges: [i64; 4],
}

fn square_shape(
    net: &StringNetwork,
    quon: usize,
    arc_ids: &[usize],
) -> Result<SquareShape, QuonError> {
    let mut pairs = Vec::new();
    let mut leg_charges = [0i64; 4];
    for &ai in arc_ids {
        let arc = net.arcs[ai];
        let (la, lb) = (arc.a.leg, arc.b.leg);
        pairs.push(if la < lb { (la, lb) } else { (lb, la) });
        leg_charges[(arc.a.leg - 1) as usize] += arc.charge_a;
        leg_charges[(arc.b.leg - 1) as usize] += arc.charge_b;
        let _ = quon;
    }
    pairs.sort();
    if pairs.len() != 2 {
        return Err(QuonError::GraphError("square must carry two arcs".into()));
    }
    Ok(SquareShape {
        pairing: [pairs[0], pairs[1]],
        leg_charges,
    })
}

fn k_word(d: usize, leg_charges: &[i64; 4]) -> Tensor {
    // strand-1 charge applied first (rightmost factor)
    let mut m = Tensor::identity(d, 1);
    for s in 1..=4usize {
        if leg_charges[s - 1] != 0 {
            m = tensor_compose(&charge_matrix(d, s, leg_charges[s - 1]), &m).expect("square");
        }
    }
    m
}

fn single_square_value(
    net: &StringNetwork,
    quon: usize,
    arc_ids: &[usize],
) -> Result<Labeled, QuonError> {
    let d = net.d;
    let r = roots(d).expect("valid dimension");
    let shape = square_shape(net, quon, arc_ids)?;
    let io = net.quons[quon].io;
    let crossings: Vec<&Crossing> = net
        .crossings
        .iter()
        .filter(|c| arc_ids.contains(&c.over) || arc_ids.contains(&c.under))
        .collect();
    let value: Tensor = match (shape.pairing, io) {
        ([(1, 2), (3, 4)], QuonIo::Out) => {
            if !crossings.is_empty() {
                return Err(QuonError::GraphError("crossing on a Z-pairing square".into()));
            }
            let base = Tensor::basis_state(d, &[0]).scale(C64::new(r.sqrt_d(), 0.0));
            tensor_compose(&k_word(d, &shape.leg_charges), &base).expect("shapes")
        }
        ([(1, 4), (2, 3)], QuonIo::Out) => {
            if !crossings.is_empty() {
                return Err(QuonError::GraphError("crossing on an X-pairing square".into()));
            }
            let mut base = Tensor::zeros(d, 1, 0);
            for g in 0..d {
                base.set(&[g], &[], ONE);
            }
            tensor_compose(&k_word(d, &shape.leg_charges), &base).expect("shapes")
        }
        ([(1, 3), (2, 4)], QuonIo::Out) => {
            if crossings.len() != 1 {
                return Err(QuonError::GraphError(
                    "Y-pairing square needs exactly one crossing".into(),
                ));
            }
            let cross = crossings[0];
            let over_arc = net.arcs[cross.over];
            let over_is_24 = {
                let legs = (over_arc.a.leg.min(over_arc.b.leg), over_arc.a.leg.max(over_arc.b.leg));
                legs == (2, 4)
            };
            // the (2,4)-over drawing is the negative crossing in this
            // crate's sign convention
            let sign = if over_is_24 {
                BraidSign::Negative
            } else {
                BraidSign::Positive
            };
            let b2 = braid_matrix(d, 2, sign);
            let base = tensor_compose(&b2, &Tensor::basis_state(d, &[0]))
                .expect("shapes")
                .scale(C64::new(r.sqrt_d(), 0.0));
            tensor_compose(&k_word(d, &shape.leg_charges), &base).expect("shapes")
        }
        ([(1, 2), (3, 4)], QuonIo::In) | ([(1, 4), (2, 3)], QuonIo::In) => {
            if shape.leg_charges.iter().any(|&c| c != 0) || !crossings.is_empty() {
                return Err(QuonError::NonCancellingCharges);
            }
            if shape.pairing == [(1, 2), (3, 4)] {
                Tensor::basis_state(d, &[0]).scale(C64::new(r.sqrt_d(), 0.0))
            } else {
                let mut base = Tensor::zeros(d, 1, 0);
                for g in 0..d {
                    base.set(&[g], &[], ONE);
                }
                base
            }
        }
        _ => return Err(QuonError::NonCancellingCharges),
    };
    let data: Vec<C64> = (0..d).map(|g| value.get(&[g], &[])).collect();
    Ok(Labeled {
        axes: vec![quon],
        data,
    })
}

/// Detects the 2-square uniform-rotation component (an F-power gluing);
/// returns the rotation p if the component is one.
fn rotation_component(
    net: &StringNetwork,
    squares: &[usize],
    arc_ids: &[usize],
) -> Option<(usize, usize, usize)> {
    if squares.len() != 2 || arc_ids.len() != 4 {
        return None;
    }
    let (qa, qb) = (squares[0], squares[1]);
    // orient: out-square first when roles differ
    let (out_q, in_q) = match (net.quons[qa].io, net.quons[qb].io) {
        (QuonIo::Out, QuonIo::In) => (qa, qb),
        (QuonIo::In, QuonIo::Out) => (qb, qa),
        _ => return None,
    };
    let mut shift: Option<usize> = None;
    for &ai in arc_ids {
        let arc = net.arcs[ai];
        if arc.charge_a != 0 || arc.charge_b != 0 || arc.a.quon == arc.b.quon {
            return None;
        }
        let (po, pi) = if arc.a.quon == out_q {
            (arc.a.leg, arc.b.leg)
        } else {
            (arc.b.leg, arc.a.leg)
        };
        // p with in-leg = rot_p(out-leg): rot_p(j) = ((j-1+p) mod 4)+1
        let p = ((pi as i64 - po as i64).rem_euclid(4)) as usize;
        match shift {
            None => shift = Some(p),
            Some(s) if s == p => {}
            Some(_) => return None,
        }
    }
    shift.map(|p| (out_q, in_q, p))
}

fn component_value(
    net: &StringNetwork,
    squares: &[usize],
    arc_ids: &[usize],
) -> Result<Labeled, QuonError> {
    let d = net.d;
    if squares.len() == 1 {
        return single_square_value(net, squares[0], arc_ids);
    }
    // crossings only supported inside single-square patterns
    for c in &net.crossings {
        if arc_ids.contains(&c.over) || arc_ids.contains(&c.under) {
            return Err(QuonError::NonCancellingCharges);
        }
    }
    if let Some((out_q, in_q, p)) = rotation_component(net, squares, arc_ids) {
        if p % 2 == 1 {
            // odd rotations need the recoupling kernel; Fourier matrix entries
            let f = gate(d, GateName::F);
            let mut fp = Tensor::identity(d, 1);
            for _ in 0..p {
                fp = tensor_compose(&fp, &f).expect("square");
            }
            let mut data = vec![ZERO; d * d];
            let axes = vec![out_q.min(in_q), out_q.max(in_q)];
            for go in 0..d {
                for gi in 0..d {
                    let v = fp.get(&[go], &[gi]);
                    let flat = if axes[0] == out_q { go * d + gi } else { gi * d + go };
                    data[flat] = v;
                }
            }
            return Ok(Labeled { axes, data });
        }
    }
    // delta-form loop tracing over all coordinate assignments
    let n = squares.len();
    let total = Labeled::len_for(d, n);
    if total > 1 << 24 {
        return Err(QuonError::GraphError("component too large".into()));
    }
    let r = roots(d).expect("valid dimension");
    let closure_scale = C64::new((1.0 / r.sqrt_d()).powi(n as i32), 0.0);

    #[derive(Clone, Copy)]
    struct E {
        a: Point,
        b: Point,
        ca: i64,
        cb: i64,
    }
    let base_edges: Vec<E> = arc_ids
        .iter()
        .map(|&ai| {
            let arc = net.arcs[ai];
            E {
                a: arc.a,
                b: arc.b,
                ca: arc.charge_a,
                cb: arc.charge_b,
            }
        })
        .collect();

    let mut data = vec![ZERO; total];
    let mut assignment = vec![0usize; n];
    for flat in 0..total {
        let mut rem = flat;
        for slot in (0..n).rev() {
            assignment[slot] = rem % d;
            rem /= d;
        }
        let mut edges = base_edges.clone();
        for (slot, &q) in squares.iter().enumerate() {
            let g = assignment[slot] as i64;
            // out squares close with caps carrying (-g, +g) at legs 1 and 4,
            // in squares with states carrying (+g, -g)
            let sgn: i64 = match net.quons[q].io {
                QuonIo::Out => -1,
                QuonIo::In => 1,
            };
            edges.push(E {
                a: Point::new(q, 1),
                b: Point::new(q, 2),
                ca: sgn * g,
                cb: 0,
            });
            edges.push(E {
                a: Point::new(q, 3),
                b: Point::new(q, 4),
                ca: 0,
                cb: -sgn * g,
            });
        }
        use std::collections::HashMap;
        let mut at: HashMap<Point, Vec<usize>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            at.entry(e.a).or_default().push(i);
            at.entry(e.b).or_default().push(i);
        }
        for (p, lst) in &at {
            if lst.len() != 2 {
                return Err(QuonError::GraphError(format!(
                    "point {:?} used {} times",
                    p,
                    lst.len()
                )));
            }
        }
        let mut used = vec![false; edges.len()];
        let mut value = closure_scale;
        for start in 0..edges.len() {
            if used[start] {
                continue;
            }
            let mut charge_total: i64 = 0;
            let mut i = start;
            let mut cur = edges[start].a;
            loop {
                used[i] = true;
                let e = edges[i];
                charge_total += e.ca + e.cb;
                let nxt = if e.a == cur { e.b } else { e.a };
                let cand = at[&nxt].iter().copied().find(|&j| j != i).expect("closed");
                i = cand;
                cur = nxt;
                if used[i] {
                    break;
                }
            }
            if charge_total.rem_euclid(d as i64) == 0 {
                value *= C64::new(r.sqrt_d(), 0.0);
            } else {
                value = ZERO;
            }
        }
        data[flat] = value;
    }
    Ok(Labeled {
        axes: squares.to_vec(),
        data,
    })
}

/// Evaluates a string network to a dense tensor over the boundary quons
/// (out legs then in legs, ascending quon index within each class).
pub fn eval_network(net: &StringNetwork) -> Result<Tensor, QuonError> {
    let d = net.d;
    let r = roots(d).expect("valid dimension");

    // point usage validation
    {
        use std::collections::HashMap;
        let mut count: HashMap<Point, usize> = HashMap::new();
        for arc in &net.arcs {
            *count.entry(arc.a).or_insert(0) += 1;
            *count.entry(arc.b).or_insert(0) += 1;
        }
        for q in 0..net.quons.len() {
            for leg in 1..=4u8 {
                let c = count.get(&Point::new(q, leg)).copied().unwrap_or(0);
                if c != 1 {
                    return Err(QuonError::GraphError(format!(
                        "point (quon {q}, leg {leg}) used {c} times"
                    )));
                }
            }
        }
        for c in &net.crossings {
            if c.over >= net.arcs.len() || c.under >= net.arcs.len() {
                return Err(QuonError::GraphError("crossing references missing arc".into()));
            }
        }
    }

    let mut scalar = net.scalar;
    // free circles
    for circle in &net.circles {
        let total: i64 = circle.charges.iter().sum();
        if total.rem_euclid(d as i64) == 0 {
            scalar *= C64::new(r.sqrt_d(), 0.0);
        } else {
            scalar = ZERO;
        }
    }
    // genus incidences: odd/odd strand counts cost d^{-1/2}, otherwise zero
    for inc in &net.genus_incidences {
        if inc.strands_a % 2 == 1 && inc.strands_b % 2 == 1 {
            scalar *= C64::new(1.0 / r.sqrt_d(), 0.0);
        } else {
            scalar = ZERO;
        }
    }

    // connected components of squares through arcs
    let nq = net.quons.len();
    let mut parent: Vec<usize> = (0..nq).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for arc in &net.arcs {
        let (ra, rb) = (find(&mut parent, arc.a.quon), find(&mut parent, arc.b.quon));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut comp_squares: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for q in 0..nq {
        let root = find(&mut parent, q);
        comp_squares.entry(root).or_default().push(q);
    }
    let mut comp_arcs: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (ai, arc) in net.arcs.iter().enumerate() {
        let root = find(&mut parent, arc.a.quon);
        comp_arcs.entry(root).or_default().push(ai);
    }

    // evaluate each component separately
    let mut parts: Vec<Labeled> = Vec::new();
    for (root, squares) in &comp_squares {
        let arcs = comp_arcs.get(root).cloned().unwrap_or_default();
        parts.push(component_value(net, squares, &arcs)?);
    }

    // contract junction pairs eagerly, merging only the parts involved
    for &(a, b) in &net.junctions {
        if net.quons[a].boundary.is_some() || net.quons[b].boundary.is_some() {
            return Err(QuonError::GraphError("junction on a boundary quon".into()));
        }
        let pa = parts
            .iter()
            .position(|p| p.axes.contains(&a))
            .ok_or_else(|| QuonError::GraphError("junction axis missing".into()))?;
        let pb = parts
            .iter()
            .position(|p| p.axes.contains(&b))
            .ok_or_else(|| QuonError::GraphError("junction axis missing".into()))?;
        let merged = if pa == pb {
            parts.swap_remove(pa)
        } else {
            let second = parts.swap_remove(pa.max(pb));
            let first = parts.swap_remove(pa.min(pb));
            outer(first, second)
        };
        parts.push(contract_pair(d, merged, a, b));
    }
    let mut big = Labeled::scalar(ONE);
    for p in parts {
        big = outer(big, p);
    }

    // remaining axes must be exactly the boundary quons, ordered by position
    let mut outs: Vec<(usize, usize)> = Vec::new();
    let mut ins: Vec<(usize, usize)> = Vec::new();
    for (q, slot) in net.quons.iter().enumerate() {
        if let Some(order) = slot.boundary {
            match slot.io {
                QuonIo::Out => outs.push((order, q)),
                QuonIo::In => ins.push((order, q)),
            }
        }
    }
    outs.sort_unstable();
    ins.sort_unstable();
    let outs: Vec<usize> = outs.into_iter().map(|(_, q)| q).collect();
    let ins: Vec<usize> = ins.into_iter().map(|(_, q)| q).collect();
    let expected: std::collections::BTreeSet<usize> =
        outs.iter().chain(ins.iter()).copied().collect();
    let got: std::collections::BTreeSet<usize> = big.axes.iter().copied().collect();
    if expected != got {
        return Err(QuonError::GraphError(
            "internal quons must be consumed by junctions".into(),
        ));
    }

    // permute into (outs..., ins...) order
    let order: Vec<usize> = outs.iter().chain(ins.iter()).copied().collect();
    let n = order.len();
    let mut out_tensor = Tensor::zeros(d, outs.len(), ins.len());
    let positions: Vec<usize> = order
        .iter()
        .map(|q| big.axes.iter().position(|a| a == q).expect("axis"))
        .collect();
    let total = big.data.len();
    let nb = big.axes.len();
    let mut idx = vec![0usize; nb];
    for flat in 0..total {
        let mut rem = flat;
        for slot in (0..nb).rev() {
            idx[slot] = rem % d;
            rem /= d;
        }
        let mut out_flat = 0;
        for slot in 0..n {
            out_flat = out_flat * d + idx[positions[slot]];
        }
        out_tensor.entries_mut()[out_flat] = big.data[flat] * scalar;
    }
    Ok(out_tensor)
}

// ---------------------------------------------------------------------------
// 1-quon bases and the string Fourier transform
// ---------------------------------------------------------------------------

/// Coordinates of a multi-quon vector in the Z-pairing chart.
#[derive(Debug, Clone, PartialEq)]
pub struct QuonVector {
    pub d: usize,
    pub n_quons: usize,
    pub coeffs: Vec<C64>,
}

impl QuonVector {
    pub fn from_tensor(t: &Tensor) -> Self {
        assert_eq!(t.in_legs(), 0);
        QuonVector {
            d: t.d(),
            n_quons: t.out_legs(),
            coeffs: t.entries().to_vec(),
        }
    }

    pub fn as_tensor(&self) -> Tensor {
        Tensor::from_entries(self.d, self.n_quons, 0, self.coeffs.clone())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The three pairing-picture bases of the 1-quon space, evaluated through
/// the network machinery (picture normalization 1/√d applied).
pub fn quon_basis(d: usize, axis: Axis, k: i64) -> QuonVector {
    let r = roots(d).expect("valid dimension");
    let net = basis_network(d, axis, k);
    let raw = eval_network(&net).expect("basis networks are supported");
    QuonVector::from_tensor(&raw.scale(C64::new(1.0 / r.sqrt_d(), 0.0)))
}

/// The 90° rotation of the 1-quon chart (new position j holds old point
/// j+1), evaluated column by column through the network machinery. Equals
/// gate F exactly under this crate's conventions.
pub fn string_fourier(d: usize) -> Tensor {
    let r = roots(d).expect("valid dimension");
    let mut m = Tensor::zeros(d, 1, 1);
    for k in 0..d {
        // rotated Z-picture: arcs (1,4) with charge k at leg 4 and
        // (2,3) with charge -k at leg 3
        let mut net = StringNetwork::new(d);
        let q = net.add_quon(QuonIo::Out, Some(0));
        net.arcs.push(Arc {
            a: Point::new(q, 1),
            b: Point::new(q, 4),
            charge_a: 0,
            charge_b: k as i64,
        });
        net.arcs.push(Arc {
            a: Point::new(q, 2),
            b: Point::new(q, 3),
            charge_a: 0,
            charge_b: -(k as i64),
        });
        let col = eval_network(&net).expect("supported");
        for row in 0..d {
            m.set(&[row], &[k], col.get(&[row], &[]) / r.sqrt_d());
        }
    }
    m
}

// ---------------------------------------------------------------------------
// joint relation
// ---------------------------------------------------------------------------

/// Orthonormal basis of the m-strand-pair sector space. The space is the
/// charge-sector diagonal realization of the m-strand endomorphisms:
/// dimension 1 for m = 1 and d for m = 2 (zero-dimensional between sectors
/// of different parity).
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub d: usize,
    pub m: usize,
    pub vectors: Vec<Tensor>,
}

impl BasisSet {
    pub fn standard(d: usize, m: usize) -> Self {
        assert!((1..=2).contains(&m), "sector rank must be 1 or 2");
        let vectors = match m {
            1 => vec![Tensor::scalar(d, ONE)],
            _ => (0..d).map(|g| Tensor::basis_state(d, &[g])).collect(),
        };
        BasisSet { d, m, vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Gram-matrix orthonormality check at tolerance 1e-9.
    pub fn validate(&self) -> Result<(), QuonError> {
        let n = self.vectors.len();
        for i in 0..n {
            for j in 0..n {
                let mut inner = ZERO;
                for (a, b) in self.vectors[i]
                    .entries()
                    .iter()
                    .zip(self.vectors[j].entries())
                {
                    inner += a.conj() * b;
                }
                let expect = if i == j { ONE } else { ZERO };
                if (inner - expect).norm() > 1e-9 {
                    return Err(QuonError::BasisError);
                }
            }
        }
        Ok(())
    }

    fn rotate(&self, u: &[Vec<C64>]) -> BasisSet {
        let n = self.vectors.len();
        let mut vectors = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Tensor::zeros(self.d, self.vectors[0].out_legs(), 0);
            for j in 0..n {
                acc = acc.add(&self.vectors[j].scale(u[j][i])).expect("same shape");
            }
            vectors.push(acc);
        }
        BasisSet {
            d: self.d,
            m: self.m,
            vectors,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JointReport {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub max_deviation: f64,
    pub onb_deviation: f64,
}

fn entrywise_mul(a: &Tensor, b: &Tensor) -> Tensor {
    let mut out = a.clone();
    for (x, y) in out.entries_mut().iter_mut().zip(b.entries()) {
        *x *= y;
    }
    out
}

fn conj_tensor(a: &Tensor) -> Tensor {
    let mut out = a.clone();
    for x in out.entries_mut() {
        *x = x.conj();
    }
    out
}

fn joint_sides(t: &Tensor, left: &BasisSet, right: &BasisSet) -> (Tensor, Tensor) {
    // side A: sum_a (T ⊙ a) ⊗ conj(a); side B: sum_b b ⊗ (T ⊙ conj(b))
    let d = t.d();
    let legs = t.out_legs();
    let mut side_a = Tensor::zeros(d, 2 * legs, 0);
    for a in &left.vectors {
        let ta = entrywise_mul(t, a);
        let term = crate::numerics::tensor_kron(&ta, &conj_tensor(a)).expect("same d");
        side_a = side_a.add(&term).expect("same shape");
    }
    let mut side_b = Tensor::zeros(d, 2 * legs, 0);
    for b in &right.vectors {
        let tb = entrywise_mul(t, &conj_tensor(b));
        let term = crate::numerics::tensor_kron(b, &tb).expect("same d");
        side_b = side_b.add(&term).expect("same shape");
    }
    (side_a, side_b)
}

fn random_unitary(n: usize, rng: &mut impl Rng) -> Vec<Vec<C64>> {
    // Gram-Schmidt on a random complex matrix
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    for i in 0..n {
        for j in 0..i {
            let inner: C64 = (0..n).map(|k| cols[j][k].conj() * cols[i][k]).sum();
            for k in 0..n {
                let sub = inner * cols[j][k];
                cols[i][k] -= sub;
            }
        }
        let norm: f64 = cols[i].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for k in 0..n {
            cols[i][k] /= norm;
        }
    }
    // transpose into row-major u[j][i]
    let mut u = vec![vec![ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            u[j][i] = cols[i][j];
        }
    }
    u
}

/// Expands the handle attachment both ways over the supplied orthonormal
/// bases and reports the deviation, plus the deviation after a random
/// orthonormal change of basis (seeded deterministically by (d, m, n)).
pub fn joint_check(
    d: usize,
    m: usize,
    n: usize,
    t: &Tensor,
    left: &BasisSet,
    right: &BasisSet,
) -> Result<JointReport, QuonError> {
    left.validate()?;
    right.validate()?;
    if (m + n) % 2 == 1 {
        // sectors of different parity: the hom space is zero, T must vanish
        if t.norm() > 1e-9 {
            return Err(QuonError::ShapeError(
                "mixed-parity sectors carry only the zero map".into(),
            ));
        }
        return Ok(JointReport {
            d,
            m,
            n,
            max_deviation: 0.0,
            onb_deviation: 0.0,
        });
    }
    if m != n {
        return Err(QuonError::ShapeError(
            "equal even-parity sector ranks are required".into(),
        ));
    }
    let expect_legs = m - 1;
    if t.out_legs() != expect_legs || t.in_legs() != 0 || t.d() != d {
        return Err(QuonError::ShapeError(format!(
            "sector map for m={m} must be a {expect_legs}-leg vector"
        )));
    }
    let (side_a, side_b) = joint_sides(t, left, right);
    let max_deviation = side_a.max_abs_diff(&side_b);

    let seed = 0x9e3779b9u64
        .wrapping_mul(d as u64 + 1)
        .wrapping_add((m as u64) << 16)
        .wrapping_add(n as u64);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ul = random_unitary(left.dim(), &mut rng);
    let ur = random_unitary(right.dim(), &mut rng);
    let left2 = left.rotate(&ul);
    let right2 = right.rotate(&ur);
    left2.validate()?;
    right2.validate()?;
    let (side_a2, side_b2) = joint_sides(t, &left2, &right2);
    let onb_deviation = side_a2
        .max_abs_diff(&side_b2)
        .max(side_a2.max_abs_diff(&side_a));

    Ok(JointReport {
        d,
        m,
        n,
        max_deviation,
        onb_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charge_matrix_group_law() {
        for d in 1..=6usize {
            for s in 1..=4usize {
                for g in 0..d as i64 {
                    for h in 0..d as i64 {
                        let lhs = tensor_compose(&charge_matrix(d, s, g), &charge_matrix(d, s, h))
                            .unwrap();
                        let rhs = charge_matrix(d, s, g + h);
                        assert!(lhs.approx_eq(&rhs, Tolerance::default()), "d={d} s={s}");
                    }
                }
            }
            assert!(charge_matrix(d, 1, 0).approx_eq(&Tensor::identity(d, 1), Tolerance::default()));
        }
    }

    #[test]
    fn pauli_words_with_recorded_phases() {
        for d in 2..=6usize {
            let r = roots(d).unwrap();
            let z_word = eval_word(&StrandWord::parse(d, "c1:1 c2:-1").unwrap());
            assert!(z_word.approx_eq(
                &gate(d, GateName::Z).scale(r.zeta_pow(-1)),
                Tolerance::default()
            ));
            let x_word = eval_word(&StrandWord::parse(d, "c1:1 c4:-1").unwrap());
            assert!(x_word.approx_eq(&gate(d, GateName::X), Tolerance::default()));
            let y_word = eval_word(&StrandWord::parse(d, "c1:-1 c3:1").unwrap());
            assert!(y_word.approx_eq(
                &gate(d, GateName::Y).scale(r.zeta_pow(1)),
                Tolerance::default()
            ));
        }
    }

    #[test]
    fn braid_unitary_and_yang_baxter() {
        let tol = Tolerance::default();
        for d in 1..=5usize {
            let id = Tensor::identity(d, 1);
            for i in 1..=3usize {
                let b = braid_matrix(d, i, BraidSign::Positive);
                let binv = braid_matrix(d, i, BraidSign::Negative);
                assert!(tensor_compose(&b, &b.dagger()).unwrap().approx_eq(&id, tol));
                assert!(tensor_compose(&b, &binv).unwrap().approx_eq(&id, tol));
            }
            let b1 = braid_matrix(d, 1, BraidSign::Positive);
            let b2 = braid_matrix(d, 2, BraidSign::Positive);
            let b3 = braid_matrix(d, 3, BraidSign::Positive);
            let aba = tensor_compose(&tensor_compose(&b1, &b2).unwrap(), &b1).unwrap();
            let bab = tensor_compose(&tensor_compose(&b2, &b1).unwrap(), &b2).unwrap();
            assert!(aba.approx_eq(&bab, tol), "yang-baxter 12, d={d}");
            let aba2 = tensor_compose(&tensor_compose(&b2, &b3).unwrap(), &b2).unwrap();
            let bab2 = tensor_compose(&tensor_compose(&b3, &b2).unwrap(), &b3).unwrap();
            assert!(aba2.approx_eq(&bab2, tol), "yang-baxter 23, d={d}");
        }
    }

    #[test]
    fn braid_one_diagonal_entries() {
        // d=2 positive b1 is diagonal proportional to (1, i)
        let d = 2;
        let b1 = braid_matrix(d, 1, BraidSign::Positive);
        let lam = b1.get(&[0], &[0]);
        assert!((b1.get(&[1], &[1]) / lam - C64::new(0.0, 1.0)).norm() < 1e-9);
        assert!(b1.get(&[0], &[1]).norm() < 1e-12);
    }

    #[test]
    fn word_roundtrip_and_eval() {
        let w = StrandWord::parse(3, "b1 b2' c1:2 c4:-1").unwrap();
        assert_eq!(w.render(), "b1 b2' c1:2 c4:-1");
        let empty = StrandWord::new(3, vec![]);
        assert!(eval_word(&empty).approx_eq(&Tensor::identity(3, 1), Tolerance::default()));
    }

    #[test]
    fn find_word_examples() {
        let d = 3;
        let id = Tensor::identity(d, 1);
        let w = find_word(d, &id, 0).unwrap();
        assert!(w.gens.is_empty());
        let g = find_word(d, &gate(d, GateName::G), 2).unwrap();
        assert!(g.gens.len() <= 2);
        let f = find_word(d, &gate(d, GateName::F), 4).unwrap();
        assert!(f.gens.len() <= 4);
        assert_eq!(
            find_word(2, &gate(2, GateName::X), 0).unwrap_err(),
            QuonError::NotFound
        );
    }

    #[test]
    fn circle_values() {
        let d = 3;
        let r = roots(d).unwrap();
        let mut net = StringNetwork::new(d);
        net.circles.push(Circle { charges: vec![] });
        let t = eval_network(&net).unwrap();
        assert!((t.get(&[], &[]) - C64::new(r.sqrt_d(), 0.0)).norm() < 1e-12);

        let mut net2 = StringNetwork::new(d);
        net2.circles.push(Circle { charges: vec![1] });
        let t2 = eval_network(&net2).unwrap();
        assert!(t2.get(&[], &[]).norm() < 1e-12);
    }

    #[test]
    fn genus_rules() {
        let d = 4;
        let r = roots(d).unwrap();
        let mut net = StringNetwork::new(d);
        net.genus_incidences.push(GenusCircle {
            strands_a: 1,
            strands_b: 1,
        });
        let t = eval_network(&net).unwrap();
        assert!((t.get(&[], &[]) - C64::new(1.0 / r.sqrt_d(), 0.0)).norm() < 1e-12);

        let mut net2 = StringNetwork::new(d);
        net2.genus_incidences.push(GenusCircle {
            strands_a: 2,
            strands_b: 2,
        });
        let t2 = eval_network(&net2).unwrap();
        assert!(t2.get(&[], &[]).norm() < 1e-12);
    }

    #[test]
    fn z_basis_is_coordinates() {
        for d in 1..=5usize {
            for k in 0..d {
                let v = quon_basis(d, Axis::Z, k as i64);
                for g in 0..d {
                    let expect = if g == k { ONE } else { ZERO };
                    assert!((v.coeffs[g] - expect).norm() < 1e-12, "d={d} k={k}");
                }
            }
        }
    }

    #[test]
    fn x_basis_matches_fourier_up_to_phase() {
        let tol = Tolerance::default();
        for d in 2..=5usize {
            let f = gate(d, GateName::F);
            for k in 0..d {
                let v = quon_basis(d, Axis::X, k as i64).as_tensor();
                let mut col = Tensor::zeros(d, 1, 0);
                for row in 0..d {
                    col.set(&[row], &[], f.get(&[row], &[k]));
                }
                let lam = compare_up_to_scalar(&v, &col, tol).unwrap();
                assert!(lam.is_some(), "d={d} k={k}");
                assert!((lam.unwrap().norm() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn string_fourier_is_f_exactly() {
        for d in 1..=6usize {
            let fs = string_fourier(d);
            assert!(fs.approx_eq(&gate(d, GateName::F), Tolerance::default()), "d={d}");
        }
    }

    #[test]
    fn completeness_expansion() {
        // (1/sqrt d) sum_j [charged cap over cup on strands (2,3)] = identity
        for d in 1..=5usize {
            let r = roots(d).unwrap();
            let u_out = eval_network(&x_pattern_net(d, 0, 0)).unwrap();
            let u_in = eval_network(&x_pattern_in_net(d)).unwrap();
            let mut acc = Tensor::zeros(d, 1, 1);
            for j in 0..d as i64 {
                let mut e = Tensor::zeros(d, 1, 1);
                for row in 0..d {
                    for col in 0..d {
                        e.set(
                            &[row],
                            &[col],
                            u_out.get(&[row], &[]) * u_in.get(&[], &[col]) / r.sqrt_d(),
                        );
                    }
                }
                let kj = tensor_compose(
                    &tensor_compose(&charge_matrix(d, 2, -j), &e).unwrap(),
                    &charge_matrix(d, 2, j),
                )
                .unwrap();
                acc = acc.add(&kj).unwrap();
            }
            let acc = acc.scale(C64::new(1.0 / r.sqrt_d(), 0.0));
            assert!(acc.approx_eq(&Tensor::identity(d, 1), Tolerance::default()), "d={d}");
        }
    }

    #[test]
    fn joint_identity_and_errors() {
        let d = 3;
        let left = BasisSet::standard(d, 2);
        let right = BasisSet::standard(d, 2);
        let t = Tensor::from_entries(d, 1, 0, vec![ONE; d]); // identity sector map
        let rep = joint_check(d, 2, 2, &t, &left, &right).unwrap();
        assert!(rep.max_deviation < 1e-9);
        assert!(rep.onb_deviation < 1e-9);

        let mut bad = BasisSet::standard(d, 2);
        bad.vectors[1] = bad.vectors[0].clone();
        assert_eq!(
            joint_check(d, 2, 2, &t, &bad, &right).unwrap_err(),
            QuonError::BasisError
        );
    }
}
