//! Multiscale mortar mixed finite elements for high-contrast Darcy flow.
//!
//! The unit square is split into `N x N` coarse blocks of `n x n` fine cells.
//! Each block is solved with lowest-order Raviart-Thomas elements; blocks are
//! glued by a mortar pressure on the coarse skeleton, which reduces the
//! problem to an SPD interface system `A xi = g`. The mortar space on every
//! coarse edge is enriched with POD modes of local harmonic snapshots, and the
//! same spaces give coarse levels for two-level Krylov preconditioners.

pub mod error;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod interface;
pub mod linalg;
pub mod local_mixed;
pub mod mortar_basis;
pub mod solvers;

pub use error::{Error, Result};
pub use field::{realize_field, realize_source, FieldPreset, FieldSpec, PermeabilityField, SourceField, SourceKind};
pub use geometry::{CellRect, GridGeometry, OversampleSpec};
pub use interface::{error_metrics, ErrorReport, GlobalSolution, InterfaceOperator};
pub use local_mixed::monolithic_fine_solve;
pub use mortar_basis::{build_mortar_basis, BasisKind, MortarBasis, SnapshotCase};
pub use solvers::{gmres, pcg, Composition, KrylovOptions, KrylovReport, LinearOperator, Preconditioner};
