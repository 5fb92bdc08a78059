//! Computational laboratory for linear dynamics of weighted backward shifts:
//! ideals and submeasures on the naturals, hereditary-family combinatorics on
//! finite universes, shift orbits with exact dyadic-rational coordinates, and
//! explicit constructions of vectors with prescribed recurrence behavior.

pub mod cantor;
pub mod constructions;
pub mod dyadic;
pub mod error;
pub mod ideals;
pub mod natset;
pub mod shifts;

pub use error::{Error, Result};
