//! Spectral-Galerkin simulation core for a nonlocal reaction–diffusion
//! equation with state-dependent delay.
//!
//! The model on `Ω = (0, L)` with Dirichlet boundary conditions is
//!
//! ```text
//! ∂u/∂t + A u + d u = F(u_t),        A = −∂²/∂x²,
//! ```
//!
//! where the right-hand side is a nonlocal delayed reaction term: either the
//! discrete-delay form
//!
//! ```text
//! F(u_t)(x) = ∫_Ω b(u(t − η(u(t), u_t), y)) f(x − y) dy
//! ```
//!
//! with a state-dependent lag `η`, or its distributed-delay approximation in
//! which the point evaluation at `t − η` is averaged against a narrow step
//! kernel of width `ε_n`. The crate provides the Dirichlet eigenbasis and
//! spectral fields, the solution-history buffer, delay laws and kernels, the
//! nonlocal right-hand side, an exponential-Euler method-of-steps integrator,
//! and the verification toolkit that checks the model's a-priori estimates
//! (energy growth, dissipativity, continuous dependence, kernel convergence,
//! absorbing sets) on computed trajectories.
//!
//! The crate is `no_std` (with `alloc`); all scalar math goes through
//! `libm`, so results are bit-identical across platforms. Enable the `std`
//! feature to get `std::error::Error` on the error type.

#![no_std]
#![forbid(unsafe_code)]

#[cfg(feature = "std")]
extern crate std;

extern crate alloc;

pub mod analysis;
pub mod delay;
pub mod error;
pub mod history;
pub mod integrator;
pub mod math;
pub mod rhs;
pub mod spectral;

pub use error::{Error, Result};
