//! Sub-Riemannian geometry of the Sol group E(1,1).
//!
//! The crate builds and checks area-stationary surfaces for the
//! sub-Riemannian area functional: level-set geometry and the minimal
//! surface equation, closed-form characteristic curves, ruled surfaces swept
//! from horizontal singular curves, and the second-variation quadratic form.

pub mod export;
pub mod field;
pub mod frame;
pub mod curve;
pub mod par;
pub mod quadrature;
pub mod stability;
pub mod stationary;
pub mod surface;

pub use field::{CatalogSurface, FieldError, ScalarField};
pub use frame::{CoordVector, FrameField, FrameVector, Point};
