// SPDX-License-Identifier: MIT OR Apache-2.0

//! Newtonian and magnetization operators on the reference shape, the
//! three-subspace decomposition of cell fields and the associated eigenfamilies.

pub mod cache;
mod decomp;
mod families;
mod grid;
mod ops;

pub use decomp::{subspace_projectors, Decomposition};
pub use families::{
    eigen_div_free, eigen_grad_harmonic, field_moment, half_cross_moment, polarization_p0, polarization_p1, potential_moment,
    vector_potential, EigenFamily, EigenMode, FamilyKind, VectorPotentialSolver, MULTIPLET_TOL,
};
pub use grid::{voxelize, ReferenceShape, VoxelGrid};
pub use ops::{
    kron3, magnetization_apply, magnetization_matrix, newton_complex, newton_real, newtonian_matrix, newtonian_scalar, vertex_newtonian,
    Field, CUBE_SELF, Q1,
};
