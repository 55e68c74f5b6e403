//! Charged-particle interference with electromagnetic potentials treated as a
//! variable-index medium.
//!
//! The crate evaluates analytic potential landscapes ([`fields`]), the local
//! frequency / wave-vector kinematics of a particle born at a reference point
//! ([`kinematics`]), Huygens-Fresnel propagation of sampled wavefronts under
//! three interchangeable path-phase models ([`propagation`]), a catalog of
//! interferometer experiments ([`scenarios`]) and the fringe metrics used to
//! compare their screen patterns ([`analysis`]).
//!
//! All geometry lives in the transverse/axial `(x, z)` plane; flux tubes are
//! perpendicular to it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fields;
pub mod geom;
pub mod grid;
pub mod kinematics;
pub mod propagation;
pub mod quadrature;
pub mod scenarios;
pub mod sum;
pub mod units;

pub use error::{Error, Result};
pub use geom::{Point, Vec2};
pub use grid::Grid;
pub use units::{Constants, UnitMode};
