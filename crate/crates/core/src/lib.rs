//! Illumination of spiky balls and cap bodies.
//!
//! Spiky balls are unions of the unit ball with cones over finitely many
//! vertices. Their illumination reduces to piercing a family of spherical
//! caps with a direction set whose positive hull is the whole space. The
//! crate provides the sphere geometry, instance generators, piercing and
//! covering solvers, the constructions that turn them into certified
//! direction sets, and numerical bounds for high dimensions.

pub mod bounds;
pub mod cli;
pub mod constructions;
pub mod coverings;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod piercing;
pub mod sphere;
pub mod spiky;

pub use error::{Error, Result};
