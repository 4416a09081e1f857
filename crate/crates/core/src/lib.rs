//! Exact linear algebra for filtered (phi, N)-modules.
//!
//! Everything runs over arbitrary-precision rationals: filtered
//! (phi, N)-modules with their Hodge/Newton numbers and admissibility,
//! refinements (full stable flags) with the graded monodromy operator,
//! critical and strongly critical indices with their L-invariants,
//! rank-one triangulation parameters, duality, and the first-order
//! deformation constraints the invariants impose on a family. Brute-force
//! oracles re-derive the key outputs along independent routes for
//! cross-validation.
//!
//! The JSON workspace schema lives in [`io`], ready-made reports in
//! [`report`], example modules in [`fixtures`] and seeded random instance
//! generation in [`gen`].

pub mod deform;
pub mod fixtures;
pub mod gen;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod phinmod;
pub(crate) mod poly;
pub mod rat;
pub mod refine;
pub mod report;
pub mod subspace;
pub mod triparam;

pub use matrix::Matrix;
pub use phinmod::{AdmissibilityVerdict, FilteredPhiNModule, Filtration};
pub use rat::{Dual, Rat};
pub use refine::{CriticalVerdict, GradedMonodromy, Refinement, SDecomposition};
pub use subspace::{Flag, SubQuotient, Subspace};
