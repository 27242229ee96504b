//! Quasi-probability distributions on coherent-state phase spaces.
//!
//! Two backends share one engine: a truncated single-mode oscillator on the
//! plane ([`ccr`]) and spin-j on the sphere ([`su2`]). Every distribution
//! `F^(s)` is a smoothing of the Husimi function by a fractional power of
//! the squared coherent-state overlap ([`spectral`]).

pub mod ccr;
pub mod dynamics;
pub mod error;
pub mod field_io;
pub mod fourier;
pub mod linalg;
pub mod naimark;
pub mod quadrature;
pub mod spectral;
pub mod su2;

pub use error::{QpdError, Result};
