//! Quantum discord and concurrence between two atoms in a leaky cavity driven
//! by broadband (white) noise.
//!
//! The crate is organised bottom-up:
//!
//! * [`qmath`]: dense complex matrices, density matrices, `expm`, partial traces.
//! * [`model`]: operators on `atom1 ⊗ atom2 ⊗ cavity`, the resonant
//!   interaction Hamiltonian and the thermal Liouvillian.
//! * [`dynamics`]: propagation, steady states, settling times, cutoff audits.
//! * [`simplex`]: two-dimensional Nelder–Mead used by the discord optimizer.
//! * [`correlations`]: entropy, mutual information, classical correlation,
//!   discord and concurrence of the two-atom state.

pub mod correlations;
pub mod dynamics;
pub mod model;
pub mod qmath;
pub mod simplex;

pub use qmath::{ComplexMatrix, DensityMatrix, C64};
