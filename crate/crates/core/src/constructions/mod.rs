//! Explicit vector constructions with certified recurrence behavior.

pub mod eq;
pub mod fhc;
pub mod ne;
pub mod targets;
pub mod tm;
