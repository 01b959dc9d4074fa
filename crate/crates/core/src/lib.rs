//! Exact-arithmetic jet calculus on velocity manifolds and Grassmann bundles.
//!
//! The crate implements, over exact rationals, the computational side of the
//! higher-order Lagrangian formalism on non-fibred manifolds: truncated jets
//! of diffeomorphisms (the differential group `L^r_n`), velocity jets and
//! their complete reparametrization invariants `y^σ_I`, exterior calculus in
//! the contact-adapted cobasis, Euler-Lagrange and Helmholtz-Sonin operators
//! on both the homogeneous and the adapted side, and the second-order
//! Lagrange-Souriau form.
//!
//! Everything is symbolic first: expressions are rational functions of jet
//! coordinates with arbitrary-precision rational coefficients, so every
//! identity in the suites is decided exactly, with zero tolerance.

pub mod chart;
pub mod error;
pub mod expr;
pub mod forms;
pub mod grassmann;
pub mod jetgroup;
pub mod linalg;
pub mod multiindex;
pub mod ratio;
pub mod report;
pub mod sample;
pub mod souriau;
pub mod suites;
pub mod variational;

pub use chart::{ChartSide, ChartSpec};
pub use error::{Error, Result};
pub use expr::{Expr, Var};
pub use multiindex::{MultiIndex, SlotPartition};
pub use ratio::Rat;
