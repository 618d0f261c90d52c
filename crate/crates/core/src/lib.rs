//! Numerical laboratory for Strichartz estimates of the Airy equation
//! `u_t + u_xxx = 0` on a large periodic box.
//!
//! Modules, bottom-up:
//! - [`spectral`]: grids, transforms, propagators, symmetries.
//! - [`norms`]: mixed space-time norms and the Strichartz functional.
//! - [`refined`]: frequency-concentration functional, Whitney pairs.
//! - [`bubbles`]: greedy profile extraction.
//! - [`separation`]: orthogonality and decoupling diagnostics.
//! - [`extremal`]: ascent on the L2 sphere and the Schrödinger embedding.

pub mod bubbles;
pub mod error;
pub mod extremal;
pub mod norms;
pub mod refined;
pub mod separation;
pub mod spectral;
pub mod synth;

pub use error::{LabError, Result};
