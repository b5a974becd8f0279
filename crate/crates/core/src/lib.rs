//! Rigorous-numerics toolkit for elliptic period lattices, Riemann theta
//! functions, Faltings heights and explicit isogeny-degree bounds.
//!
//! Every inequality evaluator returns a [`bounds::BoundReport`] rather than a
//! boolean so that violated checks remain inspectable.

// Reference constants keep their full decimal expansions, and `!(a <= b)` is
// used on purpose so a NaN side reads as a failed check.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod heights;
pub mod interpolation;
pub mod isogeny;
pub mod lattice;
pub mod modular;
pub mod serre;
pub mod smith;
pub mod theta;

pub use bounds::{BoundReport, ProofConstants};
pub use error::{Error, Result};
pub use heights::{CurveRecord, HeightConvention, HeightValue, RationalJ};
pub use lattice::{EllipticLattice, PolarizedTorus, SiegelTau, Subspace, UnimodularMap};
pub use theta::{RiemannTau, TorusPoint};

/// Default tolerance for invariant checks (fundamental domain, integrality).
pub const DEFAULT_TOL: f64 = 1e-9;
