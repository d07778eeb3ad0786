//! Numerical toolkit for two-dimensional Yang-Mills theory on the plane.
//!
//! The crate covers representation theory of U(1), SU(2) and SU(3), the
//! heat-kernel plaquette measure, closed-form Wilson loop expectations,
//! lattice Monte Carlo, decision procedures for the universality,
//! independence and regularity properties of Wilson loop data, a Hellinger
//! refinement scan that tracks separation from the Haar measure, and
//! confinement phenomenology (potentials, area/perimeter fits, Casimir
//! scaling).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod confinement;
pub mod error;
pub mod exact;
pub mod group;
pub mod heat_kernel;
pub mod lattice;
pub mod principles;
pub mod singularity;
pub mod stats;

pub use error::{Error, Result};
pub use exact::{CouplingSpec, RectLoop};
pub use group::{enumerate_irreps, irrep_data, ClassPoint, GroupElement, GroupId, Irrep, IrrepLabel, Quadrature};
pub use heat_kernel::{HeatKernel, HeatKernelSampler, HeatKernelSpec};

/// Deterministic random stream used throughout the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Build the crate's random stream from a seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
