//! Hidden-unitary quantum evolution with constant non-Hermitian generators.
//!
//! A time-dependent Hermitian Hamiltonian family `h(t)` drives manifestly
//! unitary evolution, but loses the closed exponential solution available in
//! the stationary case. This crate rebuilds the dynamics in a "friendly"
//! representation connected to the physical one by an invertible,
//! generally non-unitary Dyson map `Ω(t)`: states map as `Φ = Ω⁻¹ φ`, the
//! Hamiltonian as `H = Ω⁻¹ h Ω`, and the evolution of `Φ` is generated by
//! `G = H − Σ` with `Σ = i Ω⁻¹ Ω̇`. Choosing `Ω(t)` so that `G` stays
//! constant in time restores the closed form `Φ(t) = e^{−iGt} Φ(0)` — at the
//! price of `G` being non-Hermitian. Unitarity is not lost, only hidden: the
//! metric `Θ = Ω†Ω` defines the physical inner product `⟨Φ₁|Θ|Φ₂⟩`, which the
//! apparently non-unitary evolution conserves exactly.
//!
//! The crate turns that construction into a numerical engine and — just as
//! importantly — into a falsifiable one. Every identity the picture relies on
//! (constancy of `G`, positivity and closed-form evolution of `Θ`,
//! quasi-Hermiticity of `H`, agreement between independently integrated
//! physical evolution and the exponential formula) is recomputed as a
//! residual with a pinned tolerance.
//!
//! # Quick tour
//!
//! ```
//! use dysonflow::model::{HamiltonianFamily, SeedRecipe};
//! use dysonflow::flow::{integrate_flow, generator_from_seed, Grid};
//! use dysonflow::propagate::{evolve_cryptounitary, evolve_physical};
//! use dysonflow::operator::StateVector;
//! use dysonflow::Complex64;
//!
//! // A driven two-level model and a deliberately non-unitary seed.
//! let family = HamiltonianFamily::rabi(1.0, 0.5, 2.0);
//! let seed = SeedRecipe::Scalar(Complex64::new(0.0, 0.3)).build(2, 7)?;
//! let grid = Grid { t_final: 1.0, dt: 1e-2 };
//!
//! // Reconstruct the Dyson map over the grid and assemble the constant
//! // generator, then evolve the same initial state both ways.
//! let flow = integrate_flow(&family, &seed, &grid)?;
//! let generator = generator_from_seed(&family.hamiltonian(0.0), &seed)?;
//! let phi0 = StateVector::basis(2, 0);
//! let direct = evolve_physical(&family, &phi0, &grid)?;
//! let crypto = evolve_cryptounitary(&generator, &flow, &phi0)?;
//!
//! // The pictures agree at the final node.
//! let last = flow.len() - 1;
//! let diff = (direct.states()[last].physical.amplitudes()[0]
//!     - crypto.states()[last].physical.amplitudes()[0])
//!     .norm();
//! assert!(diff < 1e-7);
//! # Ok::<(), dysonflow::Error>(())
//! ```
//!
//! The accompanying guide under `book/` walks through the concepts chapter by
//! chapter; its code snippets compile and run as doc-tests of this crate.

// Dense kernels read best as plain index loops.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod flow;
pub mod model;
pub mod operator;
pub mod propagate;
pub mod runner;
pub mod trace_io;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;

// Compile the guide's code snippets as doc-tests so the book can never drift
// away from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/two-pictures.md")]
    mod two_pictures {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/models-and-seeds.md")]
    mod models_and_seeds {}
    #[doc = include_str!("../../../book/src/dyson-flow.md")]
    mod dyson_flow {}
    #[doc = include_str!("../../../book/src/propagators.md")]
    mod propagators {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
