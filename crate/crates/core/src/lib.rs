//! Numerics for displaced number states of a trapped-ion motional mode.
//!
//! The crate covers the full forward and inverse chain of a kick-and-analyze
//! experiment:
//!
//! * [`fock`]: phonon distributions of displaced Fock states, mixing with an
//!   imperfect preparation, and the location of their interference zeros.
//! * [`oracle`]: a truncated-basis matrix-exponential displacement operator,
//!   used as an independent check of the closed forms.
//! * [`sideband`]: Lamb-Dicke coupling strengths, the Rabi flopping signal on
//!   carrier and first sidebands, and seeded binomial data synthesis.
//! * [`kick`]: segmented-trap potentials, low-pass filtered voltage kicks,
//!   classical equation-of-motion integration and displacement extraction.
//! * [`tomography`]: maximum-likelihood phonon distribution reconstruction
//!   with nuisance parameters and a parametric bootstrap.
//! * [`semiclassics`]: enclosed-area phases between phase-space orbits and
//!   the interference minima they predict.
//!
//! Everything here is `no_std` with `alloc`; IO lives in `displaced-lab`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod fock;
pub mod kick;
pub mod linalg;
pub mod optim;
pub mod oracle;
pub mod semiclassics;
pub mod sideband;
pub mod special;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{
    convolve_preparation, count_ppd_zeros, dns_ppd, ppd_zero_locations, DiagonalDensity,
    DnsParams, PhononDistribution,
};
pub use num_complex::Complex64;
pub use sideband::{matrix_element, rabi_signal, synthesize_dataset, Branch, CouplingConfig, RabiDataset};
