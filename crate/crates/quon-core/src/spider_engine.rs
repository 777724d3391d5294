//! Spider-network IR with semantics-preserving rewrite rules for the
//! bi-Frobenius / Hopf structure, tensor compilation, and compilation of
//! spider networks to four-string quon networks (the top view).
//!
//! Scalars are tracked exactly and never quotiented: every rule folds its
//! exact factor into the diagram scalar so that eval(before) = eval(after).

use crate::numerics::Tensor;
use crate::qudit_core::{gate, spider, GateName, SpiderColor, SpiderSpec};
use crate::quon_calculus::{Arc, Point, QuonIo, StringNetwork};
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use thiserror::Error;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error, PartialEq)]
pub enum SpiderError {
    #[error("malformed diagram: {0}")]
    GraphError(String),
    #[error("rule pattern does not match at the given site")]
    NoMatch,
    #[error("diagram contains boxes that have no string-network translation")]
    NotCompilable,
}

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    BSpider { ins: usize, outs: usize },
    WSpider { ins: usize, outs: usize },
    /// F-power box, power 1..3 (power 2 is the antipode).
    FBox { power: u8 },
    Named { gate: GateName },
    Input { order: usize },
    Output { order: usize },
}

impl NodeKind {
    pub fn ins(&self) -> usize {
        match *self {
            NodeKind::BSpider { ins, .. } | NodeKind::WSpider { ins, .. } => ins,
            NodeKind::FBox { .. } => 1,
            NodeKind::Named { gate } => match gate {
                GateName::Cnot => 2,
                _ => 1,
            },
            NodeKind::Input { .. } => 0,
            NodeKind::Output { .. } => 1,
        }
    }

    pub fn outs(&self) -> usize {
        match *self {
            NodeKind::BSpider { outs, .. } | NodeKind::WSpider { outs, .. } => outs,
            NodeKind::FBox { .. } => 1,
            NodeKind::Named { gate } => match gate {
                GateName::Cnot => 2,
                _ => 1,
            },
            NodeKind::Input { .. } => 1,
            NodeKind::Output { .. } => 0,
        }
    }

    fn is_boundary(&self) -> bool {
        matches!(self, NodeKind::Input { .. } | NodeKind::Output { .. })
    }
}

/// A directed edge from an out-port to an in-port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: (NodeId, usize),
    pub to: (NodeId, usize),
}

/// Open graph of spiders, F-boxes and named boxes with a tracked global
/// scalar and genus count. Node ids are stable across rewrites.
#[derive(Debug, Clone)]
pub struct SpiderDiagram {
    pub d: usize,
    nodes: Vec<Option<NodeKind>>,
    edges: Vec<Edge>,
    pub scalar: C64,
    pub genus_marks: usize,
    pub zero: bool,
}

impl SpiderDiagram {
    pub fn new(d: usize) -> Self {
        SpiderDiagram {
            d,
            nodes: Vec::new(),
            edges: Vec::new(),
            scalar: ONE,
            genus_marks: 0,
            zero: false,
        }
    }

    pub fn add_node(&mut self, kind: NodeKind) -> NodeId {
        self.nodes.push(Some(kind));
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, from: (NodeId, usize), to: (NodeId, usize)) {
        self.edges.push(Edge { from, to });
    }

    pub fn node(&self, id: NodeId) -> Option<NodeKind> {
        self.nodes.get(id).copied().flatten()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.map(|_| i))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn live_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_some()).count()
    }

    /// Length of the node arena including removed slots; composition stores
    /// the second operand's nodes first, so this is the id offset of the
    /// first operand's nodes in the composite.
    pub fn raw_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.node_ids()
            .filter(|&i| matches!(self.node(i), Some(NodeKind::Input { .. })))
            .count()
    }

    pub fn n_outputs(&self) -> usize {
        self.node_ids()
            .filter(|&i| matches!(self.node(i), Some(NodeKind::Output { .. })))
            .count()
    }

    fn remove_node(&mut self, id: NodeId) {
        self.nodes[id] = None;
    }

    /// Each in-port and out-port of every live node must be used exactly once.
    pub fn validate(&self) -> Result<(), SpiderError> {
        let mut out_seen: HashMap<(NodeId, usize), usize> = HashMap::new();
        let mut in_seen: HashMap<(NodeId, usize), usize> = HashMap::new();
        for e in &self.edges {
            let from_kind = self
                .node(e.from.0)
                .ok_or_else(|| SpiderError::GraphError(format!("edge from missing node {}", e.from.0)))?;
            let to_kind = self
                .node(e.to.0)
                .ok_or_else(|| SpiderError::GraphError(format!("edge to missing node {}", e.to.0)))?;
            if e.from.1 >= from_kind.outs() {
                return Err(SpiderError::GraphError("out-port index out of range".into()));
            }
            if e.to.1 >= to_kind.ins() {
                return Err(SpiderError::GraphError("in-port index out of range".into()));
            }
            *out_seen.entry(e.from).or_insert(0) += 1;
            *in_seen.entry(e.to).or_insert(0) += 1;
        }
        for id in self.node_ids() {
            let kind = self.node(id).expect("live");
            for o in 0..kind.outs() {
                if out_seen.get(&(id, o)).copied().unwrap_or(0) != 1 {
                    return Err(SpiderError::GraphError(format!(
                        "out port {o} of node {id} not used exactly once"
                    )));
                }
            }
            for i in 0..kind.ins() {
                if in_seen.get(&(id, i)).copied().unwrap_or(0) != 1 {
                    return Err(SpiderError::GraphError(format!(
                        "in port {i} of node {id} not used exactly once"
                    )));
                }
            }
        }
        // boundary orders must be 0..n-1
        let mut in_orders: Vec<usize> = Vec::new();
        let mut out_orders: Vec<usize> = Vec::new();
        for id in self.node_ids() {
            match self.node(id) {
                Some(NodeKind::Input { order }) => in_orders.push(order),
                Some(NodeKind::Output { order }) => out_orders.push(order),
                _ => {}
            }
        }
        in_orders.sort_unstable();
        out_orders.sort_unstable();
        if in_orders.iter().enumerate().any(|(i, &o)| i != o)
            || out_orders.iter().enumerate().any(|(i, &o)| i != o)
        {
            return Err(SpiderError::GraphError("boundary orders must be contiguous".into()));
        }
        Ok(())
    }

    /// Stable text rendering used in tool output.
    pub fn render(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!(
            "diagram d={} scalar=({:+.6}{:+.6}i) genus={}{}",
            self.d,
            self.scalar.re,
            self.scalar.im,
            self.genus_marks,
            if self.zero { " zero" } else { "" }
        ));
        for id in self.node_ids() {
            let kind = self.node(id).expect("live");
            let desc = match kind {
                NodeKind::BSpider { ins, outs } => format!("bspider({ins},{outs})"),
                NodeKind::WSpider { ins, outs } => format!("wspider({ins},{outs})"),
                NodeKind::FBox { power } => format!("fbox^{power}"),
                NodeKind::Named { gate } => format!("{gate:?}"),
                NodeKind::Input { order } => format!("input#{order}"),
                NodeKind::Output { order } => format!("output#{order}"),
            };
            lines.push(format!("  n{id}: {desc}"));
        }
        let mut edges = self.edges.clone();
        edges.sort_by_key(|e| (e.from, e.to));
        for e in edges {
            lines.push(format!(
                "  n{}.out{} -> n{}.in{}",
                e.from.0, e.from.1, e.to.0, e.to.1
            ));
        }
        lines.join("\n")
    }
}

// ---------------------------------------------------------------------------
// construction helpers
// ---------------------------------------------------------------------------

/// Diagram holding one spider with boundary wires on all legs.
pub fn spider_diagram(d: usize, color: SpiderColor, ins: usize, outs: usize) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let s = g.add_node(match color {
        SpiderColor::Black => NodeKind::BSpider { ins, outs },
        SpiderColor::White => NodeKind::WSpider { ins, outs },
    });
    for i in 0..ins {
        let inp = g.add_node(NodeKind::Input { order: i });
        g.add_edge((inp, 0), (s, i));
    }
    for o in 0..outs {
        let out = g.add_node(NodeKind::Output { order: o });
        g.add_edge((s, o), (out, 0));
    }
    g
}

/// A bare wire.
pub fn wire_diagram(d: usize) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let inp = g.add_node(NodeKind::Input { order: 0 });
    let out = g.add_node(NodeKind::Output { order: 0 });
    g.add_edge((inp, 0), (out, 0));
    g
}

/// Identity on k wires.
pub fn identity_diagram(d: usize, k: usize) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    for i in 0..k {
        let inp = g.add_node(NodeKind::Input { order: i });
        let out = g.add_node(NodeKind::Output { order: i });
        g.add_edge((inp, 0), (out, 0));
    }
    g
}

pub fn fbox_diagram(d: usize, power: u8) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let f = g.add_node(NodeKind::FBox { power });
    let inp = g.add_node(NodeKind::Input { order: 0 });
    let out = g.add_node(NodeKind::Output { order: 0 });
    g.add_edge((inp, 0), (f, 0));
    g.add_edge((f, 0), (out, 0));
    g
}

pub fn gate_diagram(d: usize, name: GateName) -> SpiderDiagram {
    match name {
        GateName::F => return fbox_diagram(d, 1),
        GateName::F2 => return fbox_diagram(d, 2),
        _ => {}
    }
    let mut g = SpiderDiagram::new(d);
    let n = g.add_node(NodeKind::Named { gate: name });
    let kind = g.node(n).expect("live");
    for i in 0..kind.ins() {
        let inp = g.add_node(NodeKind::Input { order: i });
        g.add_edge((inp, 0), (n, i));
    }
    for o in 0..kind.outs() {
        let out = g.add_node(NodeKind::Output { order: o });
        g.add_edge((n, o), (out, 0));
    }
    g
}

/// The CNOT decomposition: black copy on the control wire joined to a white
/// sum on the target wire.
pub fn cnot_spider_diagram(d: usize) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let w = g.add_node(NodeKind::WSpider { ins: 2, outs: 1 });
    let b = g.add_node(NodeKind::BSpider { ins: 1, outs: 2 });
    let in_t = g.add_node(NodeKind::Input { order: 0 });
    let in_c = g.add_node(NodeKind::Input { order: 1 });
    let out_t = g.add_node(NodeKind::Output { order: 0 });
    let out_c = g.add_node(NodeKind::Output { order: 1 });
    g.add_edge((in_t, 0), (w, 0));
    g.add_edge((b, 1), (w, 1)); // bridge: copy of the control added to the target
    g.add_edge((w, 0), (out_t, 0));
    g.add_edge((in_c, 0), (b, 0));
    g.add_edge((b, 0), (out_c, 0));
    g
}

/// Vertical composition a∘b: b is applied first; b's outputs feed a's inputs.
pub fn compose_diagrams(a: &SpiderDiagram, b: &SpiderDiagram) -> Result<SpiderDiagram, SpiderError> {
    if a.d != b.d {
        return Err(SpiderError::GraphError("dimension mismatch".into()));
    }
    if a.n_inputs() != b.n_outputs() {
        return Err(SpiderError::GraphError(format!(
            "composition needs matching boundary: {} inputs vs {} outputs",
            a.n_inputs(),
            b.n_outputs()
        )));
    }
    let mut g = SpiderDiagram::new(a.d);
    g.scalar = a.scalar * b.scalar;
    g.genus_marks = a.genus_marks + b.genus_marks;
    g.zero = a.zero || b.zero;
    let offset = b.nodes.len();
    g.nodes = b.nodes.clone();
    g.nodes.extend(a.nodes.clone());
    let mut edges: Vec<Edge> = b.edges.clone();
    edges.extend(a.edges.iter().map(|e| Edge {
        from: (e.from.0 + offset, e.from.1),
        to: (e.to.0 + offset, e.to.1),
    }));
    // splice: b's Output k feeds a's Input k
    let boundary = a.n_inputs();
    for k in 0..boundary {
        let b_out = b
            .node_ids()
            .find(|&i| matches!(b.node(i), Some(NodeKind::Output { order }) if order == k))
            .expect("validated");
        let a_in = a
            .node_ids()
            .find(|&i| matches!(a.node(i), Some(NodeKind::Input { order }) if order == k))
            .expect("validated");
        let a_in = a_in + offset;
        let producer = edges
            .iter()
            .position(|e| e.to.0 == b_out)
            .ok_or_else(|| SpiderError::GraphError("missing boundary edge".into()))?;
        let src = edges[producer].from;
        edges.remove(producer);
        let consumer = edges
            .iter()
            .position(|e| e.from.0 == a_in)
            .ok_or_else(|| SpiderError::GraphError("missing boundary edge".into()))?;
        let dst = edges[consumer].to;
        edges.remove(consumer);
        edges.push(Edge { from: src, to: dst });
        g.nodes[b_out] = None;
        g.nodes[a_in] = None;
    }
    g.edges = edges;
    g.validate()?;
    Ok(g)
}

/// Horizontal juxtaposition: a's wires first, then b's.
pub fn juxtapose_diagrams(
    a: &SpiderDiagram,
    b: &SpiderDiagram,
) -> Result<SpiderDiagram, SpiderError> {
    if a.d != b.d {
        return Err(SpiderError::GraphError("dimension mismatch".into()));
    }
    let mut g = SpiderDiagram::new(a.d);
    g.scalar = a.scalar * b.scalar;
    g.genus_marks = a.genus_marks + b.genus_marks;
    g.zero = a.zero || b.zero;
    g.nodes = a.nodes.clone();
    let offset = a.nodes.len();
    let (in_off, out_off) = (a.n_inputs(), a.n_outputs());
    for n in &b.nodes {
        g.nodes.push(match n {
            Some(NodeKind::Input { order }) => Some(NodeKind::Input {
                order: order + in_off,
            }),
            Some(NodeKind::Output { order }) => Some(NodeKind::Output {
                order: order + out_off,
            }),
            other => *other,
        });
    }
    g.edges = a.edges.clone();
    g.edges.extend(b.edges.iter().map(|e| Edge {
        from: (e.from.0 + offset, e.from.1),
        to: (e.to.0 + offset, e.to.1),
    }));
    g.validate()?;
    Ok(g)
}

// ---------------------------------------------------------------------------
// tensor evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Side {
    Src,
    Dst,
}

#[derive(Debug, Clone)]
struct Blob {
    d: usize,
    legs: Vec<(usize, Side)>, // (edge id, side)
    data: Vec<C64>,
}

impl Blob {
    fn rank(&self) -> usize {
        self.legs.len()
    }
}

fn decode(mut flat: usize, d: usize, n: usize, idx: &mut [usize]) {
    for slot in (0..n).rev() {
        idx[slot] = flat % d;
        flat /= d;
    }
}

fn self_trace(b: &Blob) -> Blob {
    // contract every (e, Src)/(e, Dst) pair inside the blob
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut consumed = vec![false; b.legs.len()];
    for (i, &(e, s)) in b.legs.iter().enumerate() {
        if s != Side::Src || consumed[i] {
            continue;
        }
        if let Some(j) = b
            .legs
            .iter()
            .enumerate()
            .position(|(j, &(e2, s2))| e2 == e && s2 == Side::Dst && !consumed[j])
        {
            pairs.push((i, j));
            consumed[i] = true;
            consumed[j] = true;
        }
    }
    if pairs.is_empty() {
        return b.clone();
    }
    let d = b.d;
    let keep: Vec<usize> = (0..b.legs.len()).filter(|i| !consumed[*i]).collect();
    let legs: Vec<(usize, Side)> = keep.iter().map(|&i| b.legs[i]).collect();
    let nk = keep.len();
    let np = pairs.len();
    let mut data = vec![ZERO; d.pow(nk as u32)];
    let mut kidx = vec![0usize; nk];
    let mut pidx = vec![0usize; np];
    for of in 0..data.len() {
        decode(of, d, nk, &mut kidx);
        let mut acc = ZERO;
        for pf in 0..d.pow(np as u32) {
            decode(pf, d, np, &mut pidx);
            let mut full = vec![0usize; b.legs.len()];
            for (slot, &i) in keep.iter().enumerate() {
                full[i] = kidx[slot];
            }
            for (slot, &(i, j)) in pairs.iter().enumerate() {
                full[i] = pidx[slot];
                full[j] = pidx[slot];
            }
            let mut flat = 0;
            for &x in &full {
                flat = flat * d + x;
            }
            acc += b.data[flat];
        }
        data[of] = acc;
    }
    Blob { d, legs, data }
}

fn contract_two(a: &Blob, b: &Blob) -> Blob {
    let d = a.d;
    // shared edges, as (a leg slot, b leg slot)
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, &(e, s)) in a.legs.iter().enumerate() {
        for (j, &(e2, s2)) in b.legs.iter().enumerate() {
            if e == e2 && s != s2 {
                pairs.push((i, j));
            }
        }
    }
    let a_keep: Vec<usize> = (0..a.legs.len())
        .filter(|i| pairs.iter().all(|&(pi, _)| pi != *i))
        .collect();
    let b_keep: Vec<usize> = (0..b.legs.len())
        .filter(|j| pairs.iter().all(|&(_, pj)| pj != *j))
        .collect();
    let mut legs: Vec<(usize, Side)> = a_keep.iter().map(|&i| a.legs[i]).collect();
    legs.extend(b_keep.iter().map(|&j| b.legs[j]));
    let (na, nb, np) = (a_keep.len(), b_keep.len(), pairs.len());
    let mut data = vec![ZERO; d.pow((na + nb) as u32)];
    let mut ai = vec![0usize; na];
    let mut bi = vec![0usize; nb];
    let mut pi = vec![0usize; np];
    for of in 0..data.len() {
        let mut rem = of;
        for slot in (0..(na + nb)).rev() {
            let v = rem % d;
            rem /= d;
            if slot < na {
                ai[slot] = v;
            } else {
                bi[slot - na] = v;
            }
        }
        let mut acc = ZERO;
        for pf in 0..d.pow(np as u32) {
            decode(pf, d, np, &mut pi);
            let mut a_full = vec![0usize; a.legs.len()];
            for (slot, &i) in a_keep.iter().enumerate() {
                a_full[i] = ai[slot];
            }
            let mut b_full = vec![0usize; b.legs.len()];
            for (slot, &j) in b_keep.iter().enumerate() {
                b_full[j] = bi[slot];
            }
            for (slot, &(i, j)) in pairs.iter().enumerate() {
                a_full[i] = pi[slot];
                b_full[j] = pi[slot];
            }
            let mut fa = 0;
            for &x in &a_full {
                fa = fa * d + x;
            }
            let mut fb = 0;
            for &x in &b_full {
                fb = fb * d + x;
            }
            acc += a.data[fa] * b.data[fb];
        }
        data[of] = acc;
    }
    Blob { d, legs, data }
}

fn outer_blobs(a: &Blob, b: &Blob) -> Blob {
    let mut legs = a.legs.clone();
    legs.extend(&b.legs);
    let mut data = vec![ZERO; a.data.len() * b.data.len()];
    for (i, x) in a.data.iter().enumerate() {
        for (j, y) in b.data.iter().enumerate() {
            data[i * b.data.len() + j] = x * y;
        }
    }
    Blob {
        d: a.d,
        legs,
        data,
    }
}

fn fbox_tensor(d: usize, power: u8) -> Tensor {
    let f = gate(d, GateName::F);
    let mut acc = Tensor::identity(d, 1);
    for _ in 0..power {
        acc = crate::numerics::tensor_compose(&acc, &f).expect("square");
    }
    acc
}

fn node_tensor(d: usize, kind: NodeKind) -> Tensor {
    match kind {
        NodeKind::BSpider { ins, outs } => spider(d, SpiderSpec::black(ins, outs)),
        NodeKind::WSpider { ins, outs } => spider(d, SpiderSpec::white(ins, outs)),
        NodeKind::FBox { power } => fbox_tensor(d, power),
        NodeKind::Named { gate: g } => gate(d, g),
        NodeKind::Input { .. } | NodeKind::Output { .. } => unreachable!("boundary"),
    }
}

/// Contracts the diagram to its tensor: boundary ports map to tensor legs in
/// port order; the result carries diag.scalar and d^{-genus_marks/2}.
pub fn eval_tensor(diag: &SpiderDiagram) -> Result<Tensor, SpiderError> {
    diag.validate()?;
    let d = diag.d;
    let n_in = diag.n_inputs();
    let n_out = diag.n_outputs();
    if diag.zero {
        return Ok(Tensor::zeros(d, n_out, n_in));
    }

    // locate boundary edges
    let mut input_edge = vec![usize::MAX; n_in];
    let mut output_edge = vec![usize::MAX; n_out];
    for (ei, e) in diag.edges.iter().enumerate() {
        if let Some(NodeKind::Input { order }) = diag.node(e.from.0) {
            input_edge[order] = ei;
        }
        if let Some(NodeKind::Output { order }) = diag.node(e.to.0) {
            output_edge[order] = ei;
        }
    }

    // node blobs
    let mut blobs: Vec<Blob> = Vec::new();
    for id in diag.node_ids() {
        let kind = diag.node(id).expect("live");
        if kind.is_boundary() {
            continue;
        }
        let t = node_tensor(d, kind);
        let mut legs = Vec::with_capacity(kind.outs() + kind.ins());
        for o in 0..kind.outs() {
            let ei = diag
                .edges
                .iter()
                .position(|e| e.from == (id, o))
                .expect("validated");
            legs.push((ei, Side::Src));
        }
        for i in 0..kind.ins() {
            let ei = diag
                .edges
                .iter()
                .position(|e| e.to == (id, i))
                .expect("validated");
            legs.push((ei, Side::Dst));
        }
        blobs.push(self_trace(&Blob {
            d,
            legs,
            data: t.entries().to_vec(),
        }));
    }
    // pass-through wires (input connected straight to an output)
    for (ei, e) in diag.edges.iter().enumerate() {
        let from_in = matches!(diag.node(e.from.0), Some(NodeKind::Input { .. }));
        let to_out = matches!(diag.node(e.to.0), Some(NodeKind::Output { .. }));
        if from_in && to_out {
            let ident = Tensor::identity(d, 1);
            blobs.push(Blob {
                d,
                legs: vec![(ei, Side::Src), (ei, Side::Dst)],
                data: ident.entries().to_vec(),
            });
        }
    }

    // greedy contraction, smallest intermediate first
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in 0..blobs.len() {
            for j in (i + 1)..blobs.len() {
                let shared = blobs[i]
                    .legs
                    .iter()
                    .filter(|(e, s)| {
                        blobs[j]
                            .legs
                            .iter()
                            .any(|(e2, s2)| e2 == e && s2 != s)
                    })
                    .count();
                if shared > 0 {
                    let result_rank = blobs[i].rank() + blobs[j].rank() - 2 * shared;
                    if best.map(|(_, _, r)| result_rank < r).unwrap_or(true) {
                        best = Some((i, j, result_rank));
                    }
                }
            }
        }
        match best {
            None => break,
            Some((i, j, _)) => {
                let b = blobs.swap_remove(j);
                let a = blobs.swap_remove(if i < j { i } else { i - 1 });
                blobs.push(self_trace(&contract_two(&a, &b)));
            }
        }
    }

    // outer product of the disconnected remainder
    let mut total = Blob {
        d,
        legs: Vec::new(),
        data: vec![ONE],
    };
    for b in &blobs {
        total = outer_blobs(&total, b);
    }

    // permute into boundary order: outputs then inputs
    let mut target: Vec<(usize, Side)> = Vec::with_capacity(n_out + n_in);
    for &ei in &output_edge {
        target.push((ei, Side::Src));
    }
    for &ei in &input_edge {
        target.push((ei, Side::Dst));
    }
    if target.len() != total.legs.len() {
        return Err(SpiderError::GraphError(
            "internal legs left open after contraction".into(),
        ));
    }
    let positions: Vec<usize> = target
        .iter()
        .map(|t| {
            total
                .legs
                .iter()
                .position(|l| l == t)
                .ok_or_else(|| SpiderError::GraphError("boundary leg missing".into()))
        })
        .collect::<Result<_, _>>()?;
    let n = target.len();
    let genus_factor = C64::new((d as f64).powf(-(diag.genus_marks as f64) / 2.0), 0.0);
    let scale = diag.scalar * genus_factor;
    let mut out = Tensor::zeros(d, n_out, n_in);
    let mut idx = vec![0usize; n];
    for tf in 0..out.entries().len() {
        decode(tf, d, n, &mut idx);
        let mut full = vec![0usize; n];
        for (slot, &p) in positions.iter().enumerate() {
            full[p] = idx[slot];
        }
        let mut flat = 0;
        for &x in &full {
            flat = flat * d + x;
        }
        out.entries_mut()[tf] = total.data[flat] * scale;
    }
    if n == 0 {
        out.entries_mut()[0] = total.data[0] * scale;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// rewrite rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewriteRule {
    FuseBlack,
    FuseWhite,
    UnitCancel,
    Bialgebra,
    AntipodeLoop,
    HopfLaw,
    ColorChange,
    GenusCancel,
}

/// Rewrite site: the pattern's anchor nodes in a rule-specific order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Site {
    pub nodes: Vec<NodeId>,
}

impl Site {
    pub fn nodes(nodes: Vec<NodeId>) -> Self {
        Site { nodes }
    }
    pub fn empty() -> Self {
        Site { nodes: Vec::new() }
    }
}

fn spider_color(kind: NodeKind) -> Option<SpiderColor> {
    match kind {
        NodeKind::BSpider { .. } => Some(SpiderColor::Black),
        NodeKind::WSpider { .. } => Some(SpiderColor::White),
        _ => None,
    }
}

fn make_spider(color: SpiderColor, ins: usize, outs: usize) -> NodeKind {
    match color {
        SpiderColor::Black => NodeKind::BSpider { ins, outs },
        SpiderColor::White => NodeKind::WSpider { ins, outs },
    }
}

/// Endpoints of the edges attached to a node, split into (sources feeding
/// its in-ports, targets fed by its out-ports), excluding edges to `skip`.
fn neighbors(
    diag: &SpiderDiagram,
    id: NodeId,
    skip: &[NodeId],
) -> (Vec<(NodeId, usize)>, Vec<(NodeId, usize)>) {
    let kind = diag.node(id).expect("live");
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    for i in 0..kind.ins() {
        let e = diag
            .edges
            .iter()
            .find(|e| e.to == (id, i))
            .expect("validated");
        if !skip.contains(&e.from.0) {
            sources.push(e.from);
        }
    }
    for o in 0..kind.outs() {
        let e = diag
            .edges
            .iter()
            .find(|e| e.from == (id, o))
            .expect("validated");
        if !skip.contains(&e.to.0) {
            targets.push(e.to);
        }
    }
    (sources, targets)
}

fn edges_between(diag: &SpiderDiagram, a: NodeId, b: NodeId) -> Vec<usize> {
    diag.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            (e.from.0 == a && e.to.0 == b) || (e.from.0 == b && e.to.0 == a)
        })
        .map(|(i, _)| i)
        .collect()
}

fn drop_edges(diag: &mut SpiderDiagram, mut ids: Vec<usize>) {
    ids.sort_unstable();
    for i in ids.into_iter().rev() {
        diag.edges.remove(i);
    }
}

fn fuse(diag: &SpiderDiagram, site: &Site, color: SpiderColor) -> Result<SpiderDiagram, SpiderError> {
    let [a, b] = site.nodes[..] else {
        return Err(SpiderError::NoMatch);
    };
    if a == b {
        return Err(SpiderError::NoMatch);
    }
    let (ka, kb) = match (diag.node(a), diag.node(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(SpiderError::NoMatch),
    };
    if spider_color(ka) != Some(color) || spider_color(kb) != Some(color) {
        return Err(SpiderError::NoMatch);
    }
    let connecting = edges_between(diag, a, b);
    if connecting.len() != 1 {
        return Err(SpiderError::NoMatch);
    }
    let mut g = diag.clone();
    let (a_src, a_tgt) = neighbors(&g, a, &[b]);
    let (b_src, b_tgt) = neighbors(&g, b, &[a]);
    // remove old edges touching a or b
    let dead: Vec<usize> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| [a, b].contains(&e.from.0) || [a, b].contains(&e.to.0))
        .map(|(i, _)| i)
        .collect();
    drop_edges(&mut g, dead);
    g.remove_node(a);
    g.remove_node(b);
    let ins = a_src.len() + b_src.len();
    let outs = a_tgt.len() + b_tgt.len();
    let merged = g.add_node(make_spider(color, ins, outs));
    for (i, src) in a_src.iter().chain(b_src.iter()).enumerate() {
        g.add_edge(*src, (merged, i));
    }
    for (o, tgt) in a_tgt.iter().chain(b_tgt.iter()).enumerate() {
        g.add_edge((merged, o), *tgt);
    }
    g.validate()?;
    Ok(g)
}

fn unit_cancel(diag: &SpiderDiagram, site: &Site) -> Result<SpiderDiagram, SpiderError> {
    let [u] = site.nodes[..] else {
        return Err(SpiderError::NoMatch);
    };
    let ku = diag.node(u).ok_or(SpiderError::NoMatch)?;
    let color = spider_color(ku).ok_or(SpiderError::NoMatch)?;
    if ku.ins() + ku.outs() != 1 {
        return Err(SpiderError::NoMatch);
    }
    let edge_idx = diag
        .edges
        .iter()
        .position(|e| e.from.0 == u || e.to.0 == u)
        .ok_or(SpiderError::NoMatch)?;
    let e = diag.edges[edge_idx];
    let peer = if e.from.0 == u { e.to.0 } else { e.from.0 };
    if peer == u {
        return Err(SpiderError::NoMatch);
    }
    let kp = diag.node(peer).ok_or(SpiderError::NoMatch)?;
    if spider_color(kp) != Some(color) {
        return Err(SpiderError::NoMatch);
    }
    let mut g = diag.clone();
    if kp.ins() + kp.outs() == 1 {
        // bare unit/counit pair: white pair is 1, black pair is d
        g.edges.remove(edge_idx);
        g.remove_node(u);
        g.remove_node(peer);
        if color == SpiderColor::Black {
            g.scalar *= C64::new(g.d as f64, 0.0);
        }
        g.validate()?;
        return Ok(g);
    }
    // absorb the unit into the peer spider, scalar 1
    let (p_src, p_tgt) = neighbors(&g, peer, &[u]);
    let dead: Vec<usize> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| [u, peer].contains(&e.from.0) || [u, peer].contains(&e.to.0))
        .map(|(i, _)| i)
        .collect();
    drop_edges(&mut g, dead);
    g.remove_node(u);
    g.remove_node(peer);
    let shrunk = g.add_node(make_spider(color, p_src.len(), p_tgt.len()));
    for (i, src) in p_src.iter().enumerate() {
        g.add_edge(*src, (shrunk, i));
    }
    for (o, tgt) in p_tgt.iter().enumerate() {
        g.add_edge((shrunk, o), *tgt);
    }
    g.validate()?;
    Ok(g)
}

fn bialgebra(diag: &SpiderDiagram, site: &Site) -> Result<SpiderDiagram, SpiderError> {
    let [w1, w2, b1, b2] = site.nodes[..] else {
        return Err(SpiderError::NoMatch);
    };
    for &w in &[w1, w2] {
        match diag.node(w) {
            Some(NodeKind::WSpider { ins: 1, outs: 2 }) => {}
            _ => return Err(SpiderError::NoMatch),
        }
    }
    for &b in &[b1, b2] {
        match diag.node(b) {
            Some(NodeKind::BSpider { ins: 2, outs: 1 }) => {}
            _ => return Err(SpiderError::NoMatch),
        }
    }
    for &w in &[w1, w2] {
        for &b in &[b1, b2] {
            let edges = edges_between(diag, w, b);
            if edges.len() != 1 {
                return Err(SpiderError::NoMatch);
            }
            let e = diag.edges[edges[0]];
            if e.from.0 != w || e.to.0 != b {
                return Err(SpiderError::NoMatch);
            }
        }
    }
    let mut g = diag.clone();
    let (w1_src, _) = neighbors(&g, w1, &[b1, b2]);
    let (w2_src, _) = neighbors(&g, w2, &[b1, b2]);
    let (_, b1_tgt) = neighbors(&g, b1, &[w1, w2]);
    let (_, b2_tgt) = neighbors(&g, b2, &[w1, w2]);
    if w1_src.len() != 1 || w2_src.len() != 1 || b1_tgt.len() != 1 || b2_tgt.len() != 1 {
        return Err(SpiderError::NoMatch);
    }
    let dead: Vec<usize> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            [w1, w2, b1, b2].contains(&e.from.0) || [w1, w2, b1, b2].contains(&e.to.0)
        })
        .map(|(i, _)| i)
        .collect();
    drop_edges(&mut g, dead);
    for n in [w1, w2, b1, b2] {
        g.remove_node(n);
    }
    let bm = g.add_node(NodeKind::BSpider { ins: 2, outs: 1 });
    let wc = g.add_node(NodeKind::WSpider { ins: 1, outs: 2 });
    g.add_edge(w1_src[0], (bm, 0));
    g.add_edge(w2_src[0], (bm, 1));
    g.add_edge((bm, 0), (wc, 0));
    g.add_edge((wc, 0), b1_tgt[0]);
    g.add_edge((wc, 1), b2_tgt[0]);
    g.validate()?;
    Ok(g)
}

fn antipode_loop(diag: &SpiderDiagram, site: &Site) -> Result<SpiderDiagram, SpiderError> {
    let [w, b] = site.nodes[..] else {
        return Err(SpiderError::NoMatch);
    };
    match diag.node(w) {
        Some(NodeKind::WSpider { ins: 1, outs: 2 }) => {}
        _ => return Err(SpiderError::NoMatch),
    }
    match diag.node(b) {
        Some(NodeKind::BSpider { ins: 2, outs: 1 }) => {}
        _ => return Err(SpiderError::NoMatch),
    }
    // one direct edge w->b, one path w->fbox(2)->b
    let direct = edges_between(diag, w, b);
    if direct.len() != 1 {
        return Err(SpiderError::NoMatch);
    }
    let (_, w_tgt) = neighbors(diag, w, &[b]);
    if w_tgt.len() != 1 {
        return Err(SpiderError::NoMatch);
    }
    let fbox = w_tgt[0].0;
    match diag.node(fbox) {
        Some(NodeKind::FBox { power: 2 }) => {}
        _ => return Err(SpiderError::NoMatch),
    }
    let fb_to_b = edges_between(diag, fbox, b);
    if fb_to_b.len() != 1 {
        return Err(SpiderError::NoMatch);
    }
    let mut g = diag.clone();
    let (w_src, _) = neighbors(&g, w, &[b, fbox]);
    let (_, b_tgt) = neighbors(&g, b, &[w, fbox]);
    if w_src.len() != 1 || b_tgt.len() != 1 {
        return Err(SpiderError::NoMatch);
    }
    let dead: Vec<usize> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            [w, b, fbox].contains(&e.from.0) || [w, b, fbox].contains(&e.to.0)
        })
        .map(|(i, _)| i)
        .collect();
    drop_edges(&mut g, dead);
    for n in [w, b, fbox] {
        g.remove_node(n);
    }
    let counit = g.add_node(NodeKind::WSpider { ins: 1, outs: 0 });
    let unit = g.add_node(NodeKind::BSpider { ins: 0, outs: 1 });
    g.add_edge(w_src[0], (counit, 0));
    g.add_edge((unit, 0), b_tgt[0]);
    g.validate()?;
    Ok(g)
}

fn hopf_law(diag: &SpiderDiagram, site: &Site) -> Result<SpiderDiagram, SpiderError> {
    let [s, u] = site.nodes[..] else {
        return Err(SpiderError::NoMatch);
    };
    match (diag.node(s), diag.node(u)) {
        // white counit capping a black merge
        (Some(NodeKind::BSpider { ins: 2, outs: 1 }), Some(NodeKind::WSpider { ins: 1, outs: 0 })) => {
            if edges_between(diag, s, u).len() != 1 {
                return Err(SpiderError::NoMatch);
            }
            let mut g = diag.clone();
            let (srcs, _) = neighbors(&g, s, &[u]);
            if srcs.len() != 2 {
                return Err(SpiderError::NoMatch);
            }
            let dead: Vec<usize> = g
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| [s, u].contains(&e.from.0) || [s, u].contains(&e.to.0))
                .map(|(i, _)| i)
                .collect();
            drop_edges(&mut g, dead);
            g.remove_node(s);
            g.remove_node(u);
            for src in srcs {
                let c = g.add_node(NodeKind::WSpider { ins: 1, outs: 0 });
                g.add_edge(src, (c, 0));
            }
            g.validate()?;
            Ok(g)
        }
        // black unit feeding a white split
        (Some(NodeKind::WSpider { ins: 1, outs: 2 }), Some(NodeKind::BSpider { ins: 0, outs: 1 })) => {
            if edges_between(diag, s, u).len() != 1 {
                return Err(SpiderError::NoMatch);
            }
            let mut g = diag.clone();
            let (_, tgts) = neighbors(&g, s, &[u]);
            if tgts.len() != 2 {
                return Err(SpiderError::NoMatch);
            }
            let dead: Vec<usize> = g
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| [s, u].contains(&e.from.0) || [s, u].contains(&e.to.0))
                .map(|(i, _)| i)
                .collect();
            drop_edges(&mut g, dead);
            g.remove_node(s);
            g.remove_node(u);
            for tgt in tgts {
                let c = g.add_node(NodeKind::BSpider { ins: 0, outs: 1 });
                g.add_edge((c, 0), tgt);
            }
            g.validate()?;
            Ok(g)
        }
        _ => Err(SpiderError::NoMatch),
    }
}

fn color_change(diag: &SpiderDiagram, site: &Site) -> Result<SpiderDiagram, SpiderError> {
    let [s] = site.nodes[..] else {
        return Err(SpiderError::NoMatch);
    };
    let kind = diag.node(s).ok_or(SpiderError::NoMatch)?;
    let color = spider_color(kind).ok_or(SpiderError::NoMatch)?;
    let (ins, outs) = (kind.ins(), kind.outs());
    let n = ins + outs;
    let mut g = diag.clone();
    let (srcs, tgts) = neighbors(&g, s, &[]);
    let dead: Vec<usize> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.from.0 == s || e.to.0 == s)
        .map(|(i, _)| i)
        .collect();
    drop_edges(&mut g, dead);
    g.remove_node(s);
    let (new_color, out_power, in_power, scale_exp) = match color {
        // white = d^{n/2-1} (F on outs) black (F^{-1} on ins)
        SpiderColor::White => (SpiderColor::Black, 1u8, 3u8, n as f64 / 2.0 - 1.0),
        // black = d^{1-n/2} (F^{-1} on outs) white (F on ins)
        SpiderColor::Black => (SpiderColor::White, 3u8, 1u8, 1.0 - n as f64 / 2.0),
    };
    let flipped = g.add_node(make_spider(new_color, ins, outs));
    for (i, src) in srcs.iter().enumerate() {
        let fb = g.add_node(NodeKind::FBox { power: in_power });
        g.add_edge(*src, (fb, 0));
        g.add_edge((fb, 0), (flipped, i));
    }
    for (o, tgt) in tgts.iter().enumerate() {
        let fb = g.add_node(NodeKind::FBox { power: out_power });
        g.add_edge((flipped, o), (fb, 0));
        g.add_edge((fb, 0), *tgt);
    }
    g.scalar *= C64::new((g.d as f64).powf(scale_exp), 0.0);
    g.validate()?;
    Ok(g)
}

fn genus_cancel(diag: &SpiderDiagram, _site: &Site) -> Result<SpiderDiagram, SpiderError> {
    if diag.genus_marks == 0 {
        return Err(SpiderError::NoMatch);
    }
    let mut g = diag.clone();
    g.genus_marks -= 1;
    g.scalar *= C64::new(1.0 / (g.d as f64).sqrt(), 0.0);
    Ok(g)
}

/// Applies one rewrite at the given site, folding the rule's exact scalar
/// into the diagram scalar; semantics are preserved exactly.
pub fn apply_rule(
    diag: &SpiderDiagram,
    rule: RewriteRule,
    site: &Site,
) -> Result<SpiderDiagram, SpiderError> {
    match rule {
        RewriteRule::FuseBlack => fuse(diag, site, SpiderColor::Black),
        RewriteRule::FuseWhite => fuse(diag, site, SpiderColor::White),
        RewriteRule::UnitCancel => unit_cancel(diag, site),
        RewriteRule::Bialgebra => bialgebra(diag, site),
        RewriteRule::AntipodeLoop => antipode_loop(diag, site),
        RewriteRule::HopfLaw => hopf_law(diag, site),
        RewriteRule::ColorChange => color_change(diag, site),
        RewriteRule::GenusCancel => genus_cancel(diag, site),
    }
}

/// Exhaustively applies the terminating subset {FuseBlack, FuseWhite,
/// UnitCancel, GenusCancel} in ascending node-id order to a fixed point.
pub fn normalize(diag: &SpiderDiagram) -> SpiderDiagram {
    let mut g = diag.clone();
    'outer: loop {
        if let Ok(h) = genus_cancel(&g, &Site::empty()) {
            g = h;
            continue 'outer;
        }
        let ids: Vec<NodeId> = g.node_ids().collect();
        for &a in &ids {
            // unit cancellation first keeps the scan simple
            if let Ok(h) = unit_cancel(&g, &Site::nodes(vec![a])) {
                g = h;
                continue 'outer;
            }
        }
        for &a in &ids {
            for &b in &ids {
                if a >= b {
                    continue;
                }
                for rule in [RewriteRule::FuseBlack, RewriteRule::FuseWhite] {
                    if let Ok(h) = apply_rule(&g, rule, &Site::nodes(vec![a, b])) {
                        g = h;
                        continue 'outer;
                    }
                }
            }
        }
        break;
    }
    g
}

// ---------------------------------------------------------------------------
// compilation to string networks (the top view)
// ---------------------------------------------------------------------------

fn sigma(leg: u8) -> u8 {
    // 180° corner rotation
    match leg {
        1 => 3,
        2 => 4,
        3 => 1,
        _ => 2,
    }
}

fn rot(leg: u8, p: u8) -> u8 {
    ((leg - 1 + p) % 4) + 1
}

/// Emits the hub arcs of one spider over its port squares, given as
/// (square id, is_in_port) in chain order.
fn hub_arcs(net: &mut StringNetwork, color: SpiderColor, squares: &[(usize, bool)]) {
    let n = squares.len();
    if n == 0 {
        // a degree-0 spider's two strands close into circles
        net.circles.push(crate::quon_calculus::Circle { charges: vec![] });
        net.circles.push(crate::quon_calculus::Circle { charges: vec![] });
        return;
    }
    // black hubs chain in the Y-direction with a 180° rotation at in-ports;
    // white hubs chain in the X-direction without rotation
    let pt = |(q, flip): (usize, bool), leg: u8| -> Point {
        let leg = if flip && color == SpiderColor::Black {
            sigma(leg)
        } else {
            leg
        };
        Point::new(q, leg)
    };
    match color {
        SpiderColor::Black => {
            if n == 1 {
                net.arcs.push(Arc::plain(pt(squares[0], 1), pt(squares[0], 4)));
                net.arcs.push(Arc::plain(pt(squares[0], 2), pt(squares[0], 3)));
                return;
            }
            for i in 0..n - 1 {
                net.arcs.push(Arc::plain(pt(squares[i], 1), pt(squares[i + 1], 4)));
                net.arcs.push(Arc::plain(pt(squares[i], 2), pt(squares[i + 1], 3)));
            }
            net.arcs.push(Arc::plain(pt(squares[0], 4), pt(squares[n - 1], 1)));
            net.arcs.push(Arc::plain(pt(squares[0], 3), pt(squares[n - 1], 2)));
        }
        SpiderColor::White => {
            if n == 1 {
                net.arcs.push(Arc::plain(pt(squares[0], 2), pt(squares[0], 1)));
                net.arcs.push(Arc::plain(pt(squares[0], 3), pt(squares[0], 4)));
                return;
            }
            for i in 0..n - 1 {
                net.arcs.push(Arc::plain(pt(squares[i], 2), pt(squares[i + 1], 1)));
                net.arcs.push(Arc::plain(pt(squares[i], 3), pt(squares[i + 1], 4)));
            }
            net.arcs.push(Arc::plain(pt(squares[0], 1), pt(squares[n - 1], 2)));
            net.arcs.push(Arc::plain(pt(squares[0], 4), pt(squares[n - 1], 3)));
        }
    }
}

/// Compiles a spider/F-box diagram to its top-view string network: each wire
/// becomes a four-point square, white spiders expand in the X-direction,
/// black spiders in the Y-direction, F-boxes become 90° recouplings.
///
/// Contract: eval_network(compile_to_quon(g)) equals eval_tensor(g) up to a
/// recorded positive scalar d^{a/2}.
pub fn compile_to_quon(diag: &SpiderDiagram) -> Result<StringNetwork, SpiderError> {
    diag.validate()?;
    let d = diag.d;
    let mut net = StringNetwork::new(d);
    let mut out_sq: HashMap<(NodeId, usize), usize> = HashMap::new();
    let mut in_sq: HashMap<(NodeId, usize), usize> = HashMap::new();

    for id in diag.node_ids() {
        match diag.node(id).expect("live") {
            kind @ (NodeKind::BSpider { .. } | NodeKind::WSpider { .. }) => {
                let color = spider_color(kind).expect("spider");
                let mut squares = Vec::new();
                for o in 0..kind.outs() {
                    let q = net.add_quon(QuonIo::Out, None);
                    out_sq.insert((id, o), q);
                    squares.push((q, false));
                }
                for i in 0..kind.ins() {
                    let q = net.add_quon(QuonIo::In, None);
                    in_sq.insert((id, i), q);
                    squares.push((q, true));
                }
                hub_arcs(&mut net, color, &squares);
            }
            NodeKind::FBox { power } => {
                let qa = net.add_quon(QuonIo::Out, None);
                let qb = net.add_quon(QuonIo::In, None);
                out_sq.insert((id, 0), qa);
                in_sq.insert((id, 0), qb);
                for leg in 1..=4u8 {
                    net.arcs.push(Arc::plain(Point::new(qa, leg), Point::new(qb, rot(leg, power))));
                }
            }
            NodeKind::Named { .. } => return Err(SpiderError::NotCompilable),
            NodeKind::Input { .. } | NodeKind::Output { .. } => {}
        }
    }

    for e in &diag.edges {
        let from_input = match diag.node(e.from.0) {
            Some(NodeKind::Input { order }) => Some(order),
            _ => None,
        };
        let to_output = match diag.node(e.to.0) {
            Some(NodeKind::Output { order }) => Some(order),
            _ => None,
        };
        match (from_input, to_output) {
            (None, None) => {
                net.junctions.push((out_sq[&e.from], in_sq[&e.to]));
            }
            (Some(order), None) => {
                net.quons[in_sq[&e.to]].boundary = Some(order);
            }
            (None, Some(order)) => {
                net.quons[out_sq[&e.from]].boundary = Some(order);
            }
            (Some(in_order), Some(out_order)) => {
                let qo = net.add_quon(QuonIo::Out, Some(out_order));
                let qi = net.add_quon(QuonIo::In, Some(in_order));
                for leg in 1..=4u8 {
                    net.arcs.push(Arc::plain(Point::new(qo, leg), Point::new(qi, leg)));
                }
            }
        }
    }

    for _ in 0..diag.genus_marks {
        net.genus_incidences.push(crate::quon_calculus::GenusCircle {
            strands_a: 1,
            strands_b: 1,
        });
    }
    net.scalar = if diag.zero { ZERO } else { diag.scalar };
    Ok(net)
}

// ---------------------------------------------------------------------------
// rule suite
// ---------------------------------------------------------------------------

/// Verification record of one rewrite-rule or identity instance.
#[derive(Debug, Clone)]
pub struct RuleReport {
    pub rule: String,
    pub d: usize,
    pub deviation: f64,
    pub scalar: C64,
    pub pass: bool,
}

fn report(rule: &str, d: usize, lhs: &Tensor, rhs: &Tensor, scalar: C64, tol: f64) -> RuleReport {
    let deviation = lhs.max_abs_diff(rhs);
    RuleReport {
        rule: rule.to_string(),
        d,
        deviation,
        scalar,
        pass: deviation <= tol,
    }
}

fn rewrite_report(
    rule_name: &str,
    d: usize,
    diag: &SpiderDiagram,
    rule: RewriteRule,
    site: &Site,
    tol: f64,
) -> RuleReport {
    let before = eval_tensor(diag).expect("well-formed lhs");
    let after_diag = apply_rule(diag, rule, site).expect("pattern matches");
    let after = eval_tensor(&after_diag).expect("well-formed rhs");
    let scalar = after_diag.scalar;
    report(rule_name, d, &before, &after, scalar, tol)
}

/// The antipode-loop picture: white split, black merge, two connecting
/// edges with F² on one of them.
pub fn antipode_loop_diagram(d: usize, fbox_on_first: bool) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let w = g.add_node(NodeKind::WSpider { ins: 1, outs: 2 });
    let b = g.add_node(NodeKind::BSpider { ins: 2, outs: 1 });
    let f = g.add_node(NodeKind::FBox { power: 2 });
    let inp = g.add_node(NodeKind::Input { order: 0 });
    let out = g.add_node(NodeKind::Output { order: 0 });
    g.add_edge((inp, 0), (w, 0));
    if fbox_on_first {
        g.add_edge((w, 0), (f, 0));
        g.add_edge((f, 0), (b, 0));
        g.add_edge((w, 1), (b, 1));
    } else {
        g.add_edge((w, 0), (b, 0));
        g.add_edge((w, 1), (f, 0));
        g.add_edge((f, 0), (b, 1));
    }
    g.add_edge((b, 0), (out, 0));
    g
}

/// The crosswise bialgebra square (two white splits feeding two black merges).
pub fn bialgebra_square_diagram(d: usize) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let w1 = g.add_node(NodeKind::WSpider { ins: 1, outs: 2 });
    let w2 = g.add_node(NodeKind::WSpider { ins: 1, outs: 2 });
    let b1 = g.add_node(NodeKind::BSpider { ins: 2, outs: 1 });
    let b2 = g.add_node(NodeKind::BSpider { ins: 2, outs: 1 });
    let i1 = g.add_node(NodeKind::Input { order: 0 });
    let i2 = g.add_node(NodeKind::Input { order: 1 });
    let o1 = g.add_node(NodeKind::Output { order: 0 });
    let o2 = g.add_node(NodeKind::Output { order: 1 });
    g.add_edge((i1, 0), (w1, 0));
    g.add_edge((i2, 0), (w2, 0));
    g.add_edge((w1, 0), (b1, 0));
    g.add_edge((w1, 1), (b2, 0));
    g.add_edge((w2, 0), (b1, 1));
    g.add_edge((w2, 1), (b2, 1));
    g.add_edge((b1, 0), (o1, 0));
    g.add_edge((b2, 0), (o2, 0));
    g
}

/// Black merge capped by the white counit.
pub fn hopf_counit_diagram(d: usize) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let b = g.add_node(NodeKind::BSpider { ins: 2, outs: 1 });
    let u = g.add_node(NodeKind::WSpider { ins: 1, outs: 0 });
    let i1 = g.add_node(NodeKind::Input { order: 0 });
    let i2 = g.add_node(NodeKind::Input { order: 1 });
    g.add_edge((i1, 0), (b, 0));
    g.add_edge((i2, 0), (b, 1));
    g.add_edge((b, 0), (u, 0));
    g
}

/// Black unit feeding the white split.
pub fn hopf_unit_diagram(d: usize) -> SpiderDiagram {
    let mut g = SpiderDiagram::new(d);
    let w = g.add_node(NodeKind::WSpider { ins: 1, outs: 2 });
    let u = g.add_node(NodeKind::BSpider { ins: 0, outs: 1 });
    let o1 = g.add_node(NodeKind::Output { order: 0 });
    let o2 = g.add_node(NodeKind::Output { order: 1 });
    g.add_edge((u, 0), (w, 0));
    g.add_edge((w, 0), (o1, 0));
    g.add_edge((w, 1), (o2, 0));
    g
}

/// The cap/cup zigzag with mixed colours, equal to the antipode F².
pub fn antipode_zigzag_diagram(d: usize, black_cap: bool) -> SpiderDiagram {
    let (cap_color, cup_color) = if black_cap {
        (SpiderColor::Black, SpiderColor::White)
    } else {
        (SpiderColor::White, SpiderColor::Black)
    };
    let cap = spider_diagram(d, cap_color, 2, 0);
    let cup = spider_diagram(d, cup_color, 0, 2);
    let top = juxtapose_diagrams(&cap, &wire_diagram(d)).expect("shapes");
    let bottom = juxtapose_diagrams(&wire_diagram(d), &cup).expect("shapes");
    compose_diagrams(&top, &bottom).expect("shapes")
}

/// Canonical left/right instances of every rule and Hopf/Frobenius identity
/// at the given dimensions; reports are ordered by (rule, d).
pub fn rule_suite(dims: &[usize]) -> Vec<RuleReport> {
    let tol = 1e-9;
    let mut reports = Vec::new();
    for &d in dims {
        // fusion
        let copy = spider_diagram(d, SpiderColor::Black, 1, 2);
        let copy_id = juxtapose_diagrams(&copy, &wire_diagram(d)).expect("shapes");
        let chain = compose_diagrams(&copy_id, &copy).expect("shapes");
        let spiders: Vec<NodeId> = chain
            .node_ids()
            .filter(|&i| matches!(chain.node(i), Some(NodeKind::BSpider { .. })))
            .collect();
        reports.push(rewrite_report(
            "fuse-black",
            d,
            &chain,
            RewriteRule::FuseBlack,
            &Site::nodes(spiders),
            tol,
        ));
        let wsplit = spider_diagram(d, SpiderColor::White, 1, 2);
        let wchain = compose_diagrams(
            &juxtapose_diagrams(&wsplit, &wire_diagram(d)).expect("shapes"),
            &wsplit,
        )
        .expect("shapes");
        let wspiders: Vec<NodeId> = wchain
            .node_ids()
            .filter(|&i| matches!(wchain.node(i), Some(NodeKind::WSpider { .. })))
            .collect();
        reports.push(rewrite_report(
            "fuse-white",
            d,
            &wchain,
            RewriteRule::FuseWhite,
            &Site::nodes(wspiders),
            tol,
        ));

        // unit absorption (Frobenius unit law)
        for (name, color) in [("unit-cancel-white", SpiderColor::White), ("unit-cancel-black", SpiderColor::Black)] {
            let mul = spider_diagram(d, color, 2, 1);
            let unit = spider_diagram(d, color, 0, 1);
            let padded = juxtapose_diagrams(&unit, &wire_diagram(d)).expect("shapes");
            let diag = compose_diagrams(&mul, &padded).expect("shapes");
            let unit_node = diag
                .node_ids()
                .find(|&i| match diag.node(i) {
                    Some(k) => spider_color(k) == Some(color) && k.ins() == 0 && k.outs() == 1,
                    None => false,
                })
                .expect("unit present");
            reports.push(rewrite_report(
                name,
                d,
                &diag,
                RewriteRule::UnitCancel,
                &Site::nodes(vec![unit_node]),
                tol,
            ));
        }

        // hopf 1 (antipode loop), both F² positions
        for (name, first) in [("hopf-1-antipode-loop", true), ("hopf-1-antipode-loop-alt", false)] {
            let diag = antipode_loop_diagram(d, first);
            let (w, b) = {
                let mut w = usize::MAX;
                let mut b = usize::MAX;
                for i in diag.node_ids() {
                    match diag.node(i) {
                        Some(NodeKind::WSpider { .. }) => w = i,
                        Some(NodeKind::BSpider { .. }) => b = i,
                        _ => {}
                    }
                }
                (w, b)
            };
            reports.push(rewrite_report(
                name,
                d,
                &diag,
                RewriteRule::AntipodeLoop,
                &Site::nodes(vec![w, b]),
                tol,
            ));
        }

        // hopf 2 and 3 (unit/counit laws)
        let h2 = hopf_counit_diagram(d);
        let site2: Vec<NodeId> = {
            let b = h2
                .node_ids()
                .find(|&i| matches!(h2.node(i), Some(NodeKind::BSpider { .. })))
                .expect("present");
            let u = h2
                .node_ids()
                .find(|&i| matches!(h2.node(i), Some(NodeKind::WSpider { .. })))
                .expect("present");
            vec![b, u]
        };
        reports.push(rewrite_report("hopf-2", d, &h2, RewriteRule::HopfLaw, &Site::nodes(site2), tol));
        let h3 = hopf_unit_diagram(d);
        let site3: Vec<NodeId> = {
            let w = h3
                .node_ids()
                .find(|&i| matches!(h3.node(i), Some(NodeKind::WSpider { .. })))
                .expect("present");
            let u = h3
                .node_ids()
                .find(|&i| matches!(h3.node(i), Some(NodeKind::BSpider { .. })))
                .expect("present");
            vec![w, u]
        };
        reports.push(rewrite_report("hopf-3", d, &h3, RewriteRule::HopfLaw, &Site::nodes(site3), tol));

        // hopf 4 (bialgebra square)
        let square = bialgebra_square_diagram(d);
        let site4: Vec<NodeId> = {
            let mut ws = Vec::new();
            let mut bs = Vec::new();
            for i in square.node_ids() {
                match square.node(i) {
                    Some(NodeKind::WSpider { .. }) => ws.push(i),
                    Some(NodeKind::BSpider { .. }) => bs.push(i),
                    _ => {}
                }
            }
            vec![ws[0], ws[1], bs[0], bs[1]]
        };
        reports.push(rewrite_report(
            "hopf-4-bialgebra",
            d,
            &square,
            RewriteRule::Bialgebra,
            &Site::nodes(site4),
            tol,
        ));

        // duality: white n-spider = d^{n/2-1} F-conjugated black, n = 1..4
        for n in 1..=4usize {
            let ins = if n >= 2 { 1 } else { 0 };
            let outs = n - ins;
            let w = spider_diagram(d, SpiderColor::White, ins, outs);
            let s = w
                .node_ids()
                .find(|&i| matches!(w.node(i), Some(NodeKind::WSpider { .. })))
                .expect("present");
            let mut rep = rewrite_report(
                &format!("duality-n{n}"),
                d,
                &w,
                RewriteRule::ColorChange,
                &Site::nodes(vec![s]),
                tol,
            );
            rep.scalar = C64::new((d as f64).powf(n as f64 / 2.0 - 1.0), 0.0);
            reports.push(rep);
        }

        // antipode zigzags equal F² on a wire
        let f2 = eval_tensor(&fbox_diagram(d, 2)).expect("wire");
        for (name, black_cap) in [("antipode-zigzag", true), ("antipode-zigzag-flip", false)] {
            let z = antipode_zigzag_diagram(d, black_cap);
            let lhs = eval_tensor(&z).expect("well-formed");
            reports.push(report(name, d, &lhs, &f2, ONE, tol));
        }

        // Frobenius associativity and unit law for both colours
        for (name, color) in [
            ("frobenius-assoc-black", SpiderColor::Black),
            ("frobenius-assoc-white", SpiderColor::White),
        ] {
            let mul = spider_diagram(d, color, 2, 1);
            let left = compose_diagrams(
                &mul,
                &juxtapose_diagrams(&mul, &wire_diagram(d)).expect("shapes"),
            )
            .expect("shapes");
            let right = compose_diagrams(
                &mul,
                &juxtapose_diagrams(&wire_diagram(d), &mul).expect("shapes"),
            )
            .expect("shapes");
            let lhs = eval_tensor(&left).expect("well-formed");
            let rhs = eval_tensor(&right).expect("well-formed");
            reports.push(report(name, d, &lhs, &rhs, ONE, tol));
        }

        // genus cancellation on a wire
        let mut with_genus = wire_diagram(d);
        with_genus.genus_marks = 1;
        reports.push(rewrite_report(
            "genus-cancel",
            d,
            &with_genus,
            RewriteRule::GenusCancel,
            &Site::empty(),
            tol,
        ));
    }
    reports.sort_by(|a, b| (a.rule.clone(), a.d).cmp(&(b.rule.clone(), b.d)));
    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{tensor_compose, tensor_kron, Tolerance};

    #[test]
    fn eval_single_spiders() {
        let tol = Tolerance::default();
        for d in 2..=4usize {
            let b11 = spider_diagram(d, SpiderColor::Black, 1, 1);
            assert!(eval_tensor(&b11)
                .unwrap()
                .approx_eq(&Tensor::identity(d, 1), tol));
            let w01 = spider_diagram(d, SpiderColor::White, 0, 1);
            assert!(eval_tensor(&w01)
                .unwrap()
                .approx_eq(&Tensor::basis_state(d, &[0]), tol));
        }
    }

    #[test]
    fn eval_cnot_decomposition() {
        for d in 2..=5usize {
            let diag = cnot_spider_diagram(d);
            let t = eval_tensor(&diag).unwrap();
            let expect = gate(d, GateName::Cnot);
            assert!(t.max_abs_diff(&expect) < 1e-12, "d={d}");
        }
    }

    #[test]
    fn compose_and_juxtapose() {
        let tol = Tolerance::default();
        let d = 3;
        // Z then Z equals Z^2
        let z = gate_diagram(d, GateName::Z);
        let zz = compose_diagrams(&z, &z).unwrap();
        let expect = tensor_compose(&gate(d, GateName::Z), &gate(d, GateName::Z)).unwrap();
        assert!(eval_tensor(&zz).unwrap().approx_eq(&expect, tol));

        let x = gate_diagram(d, GateName::X);
        let xz = juxtapose_diagrams(&x, &z).unwrap();
        let expect2 = tensor_kron(&gate(d, GateName::X), &gate(d, GateName::Z)).unwrap();
        assert!(eval_tensor(&xz).unwrap().approx_eq(&expect2, tol));
    }

    #[test]
    fn fuse_preserves_semantics() {
        let tol = Tolerance::default();
        for d in 2..=4usize {
            // copy over copy: black(1->2) on wire 0 then fuse
            let copy = spider_diagram(d, SpiderColor::Black, 1, 2);
            let copy_id = juxtapose_diagrams(&copy, &wire_diagram(d)).unwrap();
            let chain = compose_diagrams(&copy_id, &copy).unwrap();
            let before = eval_tensor(&chain).unwrap();
            let spiders: Vec<NodeId> = chain
                .node_ids()
                .filter(|&i| matches!(chain.node(i), Some(NodeKind::BSpider { .. })))
                .collect();
            let fused = apply_rule(&chain, RewriteRule::FuseBlack, &Site::nodes(spiders)).unwrap();
            let after = eval_tensor(&fused).unwrap();
            assert!(before.approx_eq(&after, tol), "d={d}");
            assert_eq!(fused.live_nodes(), chain.live_nodes() - 1);
        }
    }

    #[test]
    fn normalize_chain_of_identities() {
        let tol = Tolerance::default();
        let d = 2;
        let b = spider_diagram(d, SpiderColor::Black, 1, 1);
        let two = compose_diagrams(&b, &b).unwrap();
        let three = compose_diagrams(&two, &b).unwrap();
        let norm = normalize(&three);
        assert!(eval_tensor(&norm)
            .unwrap()
            .approx_eq(&Tensor::identity(d, 1), tol));
        assert_eq!(norm.live_nodes(), 3); // one spider + two boundaries
    }

    #[test]
    fn genus_cancel_scalar() {
        let d = 4;
        let mut g = wire_diagram(d);
        g.genus_marks = 1;
        let before = eval_tensor(&g).unwrap();
        let after_diag = apply_rule(&g, RewriteRule::GenusCancel, &Site::empty()).unwrap();
        let after = eval_tensor(&after_diag).unwrap();
        assert!(before.approx_eq(&after, Tolerance::default()));
        assert_eq!(after_diag.genus_marks, 0);
    }
}
