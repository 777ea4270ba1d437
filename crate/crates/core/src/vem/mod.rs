//! Lowest-order virtual element discretization of `-Δu = f` with homogeneous
//! Dirichlet data on the unit square.

mod assembly;
mod projector;

pub use assembly::{
    assemble, assemble_with, energy_error, vertex_average_weights, DiscreteSystem, DofMap,
    LocalMatrices,
};
pub use projector::{consistency_stiffness, elliptic_projector, local_load, local_stiffness, ElementProjector};
