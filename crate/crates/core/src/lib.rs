//! Finite-difference machinery for singularly perturbed parabolic
//! delay convection-diffusion problems
//!
//! ```text
//!   eps u_xx + a(x,t) u_x - b(x,t) u_t - c(x,t) u = e(x,t) u(x, t - tau) + f(x,t)
//! ```
//!
//! on `(0,1) x (0,T]`, with a convection coefficient `a(x,t) = a0(x,t) x^p`
//! that degenerates at the left wall (`p >= 1`), history data on
//! `[0,1] x [-tau, 0]` and Dirichlet walls. The small parameter `eps`
//! produces a parabolic boundary layer of width `O(sqrt(eps))` at `x = 0`.
//!
//! The crate provides:
//!
//! * a layer-adapted piecewise-uniform spatial mesh and a uniform time grid
//!   ([`mesh`]),
//! * hybrid, midpoint-upwind and simple-upwind spatial discretizations with
//!   implicit Euler time stepping ([`scheme`], [`solver`]),
//! * temporal Richardson extrapolation ([`extrapolation`]),
//! * double-mesh convergence studies ([`analysis`]),
//! * a self-contained property-check battery ([`verify`]).
//!
//! The crate is `no_std`-compatible: disable default features and enable
//! `libm` to build without the standard library (allocation is still
//! required).

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("spdd-core needs either the `std` or the `libm` feature");

extern crate alloc;

pub mod analysis;
pub mod expr;
pub mod extrapolation;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub(crate) mod real;
pub mod scheme;
pub mod solver;
pub mod verify;
