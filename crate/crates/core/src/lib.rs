//! Lowest-order virtual element discretization of the Poisson problem on
//! polygonal meshes, solved with a non-nested W-cycle multigrid whose
//! intergrid operators are L2 projections between explicitly reconstructed
//! reduced-basis spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] polygon measures, clipping, triangulation and quadrature
//! * [`numerics`] sparse symmetric storage, Cholesky, CG, power iteration
//! * [`mesh`] Voronoi mesh generation, hierarchies, validation and JSON I/O
//! * [`vem`] elliptic projector, stabilization, assembly
//! * [`rbspace`] high-fidelity harmonic extensions, POD compression and the
//!   reconstructed element bases
//! * [`transfer`] supermesh cross-mass, prolongation and restriction
//! * [`mg`] Richardson smoothing, the recursive W-cycle and the outer loop
//! * [`cli`] experiment configuration and table generation

pub mod cli;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod mg;
pub mod numerics;
pub mod rbspace;
pub mod transfer;
pub mod vem;

pub use error::{Error, Result};
