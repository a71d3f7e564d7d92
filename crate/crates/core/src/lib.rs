//! Sequential decoding of classical messages sent through quantum states.
//!
//! Modules build on each other bottom-up: dense linear algebra
//! ([`operators`]), source ensembles and channels ([`ensembles`]), typical
//! projectors ([`typicality`]), random codebooks ([`coding`]), measurements
//! and trajectory simulation ([`decoding`]), and error averages with their
//! analytic bounds ([`analysis`]).

pub mod analysis;
pub mod coding;
pub mod decoding;
pub mod ensembles;
pub mod error;
pub mod operators;
pub mod settings;
pub mod typicality;

pub use error::{Error, Result};
pub use settings::{Settings, EIGENVALUE_FLOOR};
