//! Numerical laboratory for Kropina metrics `F = α²/β` presented through
//! navigation data `(h, W)`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dense;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod kropina;
pub mod riemann;
pub mod sampling;
pub mod scene;
pub mod suite;

pub use error::GeometryError;
pub use fields::{CovectorField, MetricField, MetricSource, VectorField, VectorSource};
pub use kropina::{KropinaData, NavigationData, SprayJet, TangentSample};
pub use scene::{Scene, SceneError};
