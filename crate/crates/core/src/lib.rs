//! Exact and numeric toolkit for projective plane flows with rational vector fields.

pub mod algebra;
pub mod classify;
pub mod conjugation;
pub mod error;
pub mod extrude;
pub mod flowcore;
pub mod numeric;
pub mod odeorbit;
pub mod random;

pub use error::{Error, Result};
