//! Normalized solutions of K coupled nonlinear Schrödinger equations on R³
//! with radial symmetry.
//!
//! The library computes ground states and higher critical points of the
//! energy
//!
//! ```text
//! J(u) = ½ ∫ |∇u|² − (1/p) Σ_{i,j} β_ij ∫ |u_i|^{p/2} |u_j|^{p/2}
//! ```
//!
//! on the product of mass spheres ∫ u_i² = ρ_i², restricted to the
//! Nehari–Pohozaev set M(u) = 0. It also evaluates the closed-form
//! existence conditions, the fibering geometry, Morse-index diagnostics
//! via Sturm counts, the β → ∞ decay of the minimax levels, and the
//! repulsive-coupling nonexistence construction.

pub mod conditions;
pub mod error;
pub mod functional;
pub mod grid;
pub mod harness;
pub mod soliton;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
