//! L2 transfer operators between the rb spaces of non-nested meshes.

mod broad;
mod operator;
mod supermesh;

pub use broad::candidate_pairs;
pub use operator::{Restriction, TransferOperator};
pub use supermesh::{cell_pair_mass, cross_mass, supermesh_area, RbLevel};
