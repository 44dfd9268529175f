//! Density-matrix simulation of ensemble NMR quantum computers.
//!
//! The crate models weakly coupled spin-½ systems as dense 2ⁿ×2ⁿ matrices
//! and provides the pieces needed to run small quantum algorithms the way a
//! liquid-state NMR spectrometer would:
//!
//! * [`spin`] and [`product`]: spin systems, deviation density matrices,
//!   propagators and the product-operator basis.
//! * [`pulse`]: ideal pulse programs (rotations, delays, coupling periods,
//!   gradient crushers, coherence filters, frame shifts).
//! * [`compiler`]: quantum gates, their compilation to pulse programs, abstract
//!   reference frames and refocusing.
//! * [`prep`]: pseudo-pure state preparation.
//! * [`readout`]: stick spectra, eigenstate assignment and tomography.
//! * [`algorithms`]: Deutsch, Deutsch–Jozsa, Grover and the triplet code.
//! * [`entanglement`]: Werner states and separability.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod algorithms;
pub mod compiler;
pub mod entanglement;
pub mod linalg;
pub mod prep;
pub mod product;
pub mod pulse;
pub mod readout;
pub mod spin;

pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use product::{assemble, basis_element, expand, Letter, ProductLabel, ProductOperatorExpansion};
pub use spin::{
    coherence_order_projection, equal_up_to_global_phase, DensityState, Propagator, SpinError, SpinSystem,
};
