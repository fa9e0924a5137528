//! Exact-arithmetic mutations of Laurent polynomials in two variables and
//! the deformation equations of the associated three-dimensional Gorenstein
//! toric singularities.
//!
//! The crate is organised around the objects it computes with:
//!
//! * [`geometry`] — lattice polygons, edges, slices, support values,
//!   deformation pairs and Minkowski decompositions;
//! * [`laurent`] — Laurent polynomials, mutability, mutations and the degree
//!   transports `ψ` and `ξ`;
//! * [`toric`] — the dual monoid of the cone over a polygon, Hilbert bases,
//!   boundary decompositions, the canonical representation map and the
//!   binomial generators with their linear relations;
//! * [`deform`] — one-parameter and multi-parameter deformation equations
//!   with certified relations, family mutation, and the Cayley families of
//!   Minkowski decompositions;
//! * [`tangent`] — closed-form tangent-space dimensions per degree;
//! * [`classify`] — perimeter-reduction search, zero-mutability and
//!   maximal-mutability decisions, degree persistence and bounded
//!   mutation-equivalence search.
//!
//! All computations are exact: lattice coordinates are `i64` (the build
//! enables overflow checks in release profiles) and coefficients are
//! arbitrary-precision rationals.

pub mod classify;
pub mod deform;
pub mod error;
pub mod geometry;
pub mod io;
pub mod laurent;
pub mod linalg;
pub mod tangent;
pub mod toric;

pub use error::{Error, Result};
pub use geometry::{dv, ext, lv, DualVec, ExtDualVec, LatticeVec, Polygon, Rat};
pub use laurent::LaurentPoly;
pub use toric::{MonoidData, MultiIndex};
