//! Simulator for nuclear-nuclear gates mediated by a microwave-dressed,
//! periodically reset NV electron spin.
//!
//! The crate is organised bottom-up:
//!
//! - [`algebra`]: dense operators on multi-spin registers, partial traces,
//!   superoperators and fidelities.
//! - [`model`]: spin-register description and Hamiltonian / jump-operator
//!   builders at lab, RF-frame and RWA level.
//! - [`effective`]: second-order Schrieffer–Wolff reduction and the derived
//!   effective nuclear model.
//! - [`propagation`]: Lindblad generators, propagators, time-dependent
//!   integration and the periodic electron-reset map.
//! - [`experiments`]: state transfer, fidelity maps, RF spectroscopy,
//!   selectivity, sensing and the gate pipeline.
//! - [`cli`]: configuration parsing, dispatch and output writers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate blas_src;

pub mod algebra;
pub mod cli;
pub mod effective;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod propagation;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// 2π, for converting plain frequencies to angular ones.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
