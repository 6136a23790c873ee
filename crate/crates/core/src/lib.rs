//! Spectral separation of natural Lagrangian systems.
//!
//! Given a potential `U` on `ℝⁿ`, this crate finds the constant symmetric
//! kinetic matrices `A` whose Lagrangian `½q̇ᵀAq̇ − Ũ` shares the equations of
//! motion of `½|q̇|² − U`, diagonalizes a generic such `A` to obtain spectral
//! coordinates, and checks whether `U` splits into independent blocks there.
//! Integration and energy bookkeeping support numerical cross-checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod expr;
pub mod linalg;
pub mod commutant;
pub mod spectral;
pub mod separation;
pub mod dynamics;
pub mod inverse;
pub mod models;
