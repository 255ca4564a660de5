//! Finite elements for second-order elliptic interface problems with
//! discontinuous diffusion coefficients, on meshes that do not fit the
//! interface.
//!
//! The crate covers three capabilities:
//!
//! * a 1D immersed finite element method whose basis is modified on the
//!   single element containing the interface so that flux continuity holds
//!   exactly, plus postprocessing functionals that recover interface and
//!   boundary fluxes at second order;
//! * a 2D augmented method on uniform triangulations of a square: the flux
//!   `v = -beta grad u` becomes an extra unknown in a tube around a
//!   circular interface, and the combined Galerkin/flux/divergence system
//!   is solved in the least-squares sense;
//! * a refinement-study harness that produces convergence tables (CSV or
//!   markdown) for the built-in manufactured problems.
//!
//! Each capability has a runnable example:
//!
//! ```text
//! cargo run --release -p fluxfem --example ifem_basis_1d
//! cargo run --release -p fluxfem --example refinement_1d
//! cargo run --release -p fluxfem --example flux_recovery_1d
//! cargo run --release -p fluxfem --example interpolation_rates
//! cargo run --release -p fluxfem --example augmented_trig_2d
//! cargo run --release -p fluxfem --example tube_studies_2d
//! cargo run --release -p fluxfem --example jump_r2r4_2d
//! ```
//!
//! The same studies are scriptable through the thin `fluxfem` binary
//! (`solve1d`, `study1d`, `solve2d`, `study2d`, `tables` subcommands).

pub mod cut2d;
pub mod error;
pub mod fem2d;
pub mod flux1d;
pub mod harness;
pub mod ifem1d;
pub mod mesh2d;
pub mod norms;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod tube2d;

pub use error::{Error, Result};
pub use solver::LsqMethod;
pub use sparse::{SparseMatrix, TripletBuilder};
