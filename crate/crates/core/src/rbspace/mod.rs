//! Reduced-basis surrogate of the local VEM basis.
//!
//! Each local basis function is split as `e_i = Π∇ e_i + ẽ_i`. The
//! non-polynomial part `ẽ_i` is harmonic with known boundary trace; it is
//! approximated on a refined fan sub-triangulation by a Galerkin solve in a
//! POD space trained offline on perturbed regular polygons.

mod basis;
mod compressor;
mod harmonic;
mod lattice;
mod level;

pub use basis::{rb_basis_for_element, ElementRbBasis};
pub use compressor::{
    normalize, regular_polygon, training_polygons, RbCompressor, Truncation, DEFAULT_DEPTH,
    DEFAULT_SNAPSHOTS, RB_FORMAT_VERSION,
};
pub use harmonic::{
    aligned_snapshots, dense_stiffness, fan_lattice, harmonic_extension_hifi, harmonic_interior, projection_at_nodes,
    split_blocks, tilde_boundary_data, tilde_traces, tilde_snapshots, HarmonicExtension,
};
pub use lattice::{p1_mass, p1_stiffness, FanLattice, LatticeNode, SubTriangulation};
pub use level::{build_level_bases, level_mass_matrix, RbLibrary};
