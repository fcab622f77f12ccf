//! Galerkin boundary elements for the Laplace-domain operator `Δ − s²`.

mod assembly;
mod kernel;
mod pairs;
mod potentials;
mod spaces;
#[cfg(test)]
mod tests;

pub use assembly::{assemble_block, assemble_k, assemble_v, assemble_vk_between, assemble_w, LaplaceBlock};
pub use kernel::fundamental_solution;
pub use kernel::fundamental_solution_dr;
pub use potentials::{evaluate_potentials, potential_matrices, PotentialMatrices, PotentialOptions};
pub use spaces::{boundary_l2_error, project_boundary_data, BoundaryProjector, BoundarySpaces, SpaceKind};
