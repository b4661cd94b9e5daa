//! Guaranteed reachable sets for nonlinear ODEs.
//!
//! The library propagates a *single* trajectory of a controlled
//! embedding system whose state is a set description — a center, an
//! invertible frame matrix, and constraint offsets — instead of
//! propagating the set itself. The frame follows the adjoint of the
//! linearization along the center trajectory, which cancels first-order
//! growth; the offsets grow at rigorously bounded rates computed with
//! interval arithmetic (polytope facets) or corner eigenvalue bounds of
//! a linear differential inclusion (ellipsoids). Every stored set is a
//! guaranteed overapproximation of the reachable states, up to the
//! (non-validated) error of the fixed-step time integration.
//!
//! Layering, bottom up:
//!
//! * [`interval`] — sound interval arithmetic with outward rounding;
//! * [`scalar`] — the generic scalar trait tying `f64`, intervals, and
//!   dual numbers to one evaluation code path;
//! * [`linalg`] — small dense kernels: LU inverse, Jacobi
//!   eigendecomposition, PSD square root, enclosed inverse;
//! * [`autodiff`] — forward-mode Jacobians: point, interval, and mixed,
//!   plus corner enumeration for differential inclusions;
//! * [`parametope`] — the set representations and their facets;
//! * [`systems`] — benchmark vector fields, generic over the scalar;
//! * [`embedding`] — the embedding ODE, offset-rate engines, and the
//!   fixed-step integrator;
//! * [`montecarlo`] — the sampling containment oracle used to audit
//!   computed tubes end to end.

// Indexed loops mirror the matrix subscripts they implement.
#![allow(clippy::needless_range_loop)]

pub mod autodiff;
pub mod embedding;
pub mod error;
pub mod interval;
pub mod linalg;
pub mod montecarlo;
pub mod parametope;
pub mod scalar;
pub mod systems;

pub use error::{Error, Result};
