//! Finite-difference model of the continuum system: a no-flux Poisson
//! problem `−∇·((r + c)∇p) = S` coupled to the conductivity equation
//! `∂_t c^k = D² Δc^k + (∂_k p)² − ν |c^k|^{γ−2} c^k` with `c^k = 0` on the
//! boundary.
//!
//! Pressures live on grid nodes and component `c^k` on the midpoints of the
//! axis-`k` edges, so a grid field is literally a network whose vertices are
//! the nodes and whose edge conductivities are the midpoint values.

mod evolve;
mod grid;
mod poisson;

pub use evolve::{
    continuum_energy, run_pde, step_conductivity_field, write_snapshots, PdeConfig, PdeEnergy,
    PdeRun, TimeScheme,
};
pub use grid::{DiagonalTensorField, GridSpec};
pub(crate) use poisson::weighted_rhs;
pub use poisson::{
    poisson_matrix, pressure_gradient_sq, sample_sources, solve_poisson_grid, PressureField,
};
