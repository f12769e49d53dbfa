//! Stochastic Galerkin discretization of random parabolic evolution problems.
//!
//! The crate combines three independent discretizations of
//! `u_z'(t) = -div(M_z ∇u_z(t))` with random parameter `z`:
//!
//! * a total-degree polynomial chaos expansion in `z` ([`orthopoly`], [`pce`]),
//! * Lagrange finite elements in space ([`spatial`]),
//! * A-stable rational time stepping ([`timestep`]).
//!
//! [`sgsystem`] couples them into one deterministic block system and
//! [`harness`] measures how the full discretization converges along each axis.

pub mod coeffs;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod orthopoly;
pub mod pce;
pub mod poly;
pub mod sgsystem;
pub mod spatial;
pub mod timestep;

pub use coeffs::{CoefficientField, InitialDatum, SeparableField, SpatialProfile, ZFactor};
pub use error::{Error, Result};
pub use linalg::SymSparseMatrix;
pub use orthopoly::{PolyFamily, QuadratureRule};
pub use pce::{DistributionSpec, MultiIndexSet, PceVector, TripleProductTensor};
pub use poly::PolyCoeffs;
pub use sgsystem::{SgOperator, SgState};
pub use spatial::{FeOrder, FeSpace, Mesh};
pub use timestep::{RationalScheme, TimeGrid};
