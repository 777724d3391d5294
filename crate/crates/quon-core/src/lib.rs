//! Verification-grade engine for the quon diagrammatic language.
//!
//! The crate represents parafermion algebras, four-string quon diagrams and
//! spider networks; evaluates them to complex tensors on qudit spaces;
//! applies the rewrite rules of the bi-Frobenius / Hopf structure; and
//! machine-checks the algebraic identities relating all of these
//! (Frobenius, Hopf, joint relation, genus relation, Clifford structure,
//! teleportation).
//!
//! Modules:
//! - [`numerics`]: roots of unity, tolerances, the dense complex [`numerics::Tensor`].
//! - [`pf_algebra`]: the symbolic parafermion algebra and its Jordan–Wigner matrices.
//! - [`qudit_core`]: gates, spiders, resource states, the Clifford census, teleportation.
//! - [`quon_calculus`]: charged-string bases, braids, string networks, the joint relation.
//! - [`spider_engine`]: spider-diagram IR, rewrite rules, quon compilation.
//! - [`suite`]: the named check battery behind the command line tool.

pub mod exec;
pub mod numerics;
pub mod pf_algebra;
pub mod qudit_core;
pub mod quon_calculus;
pub mod spider_engine;
pub mod suite;

pub use numerics::{RootSystem, Tensor, Tolerance};
