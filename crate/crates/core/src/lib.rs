//! Polyharmonic hypersurfaces in pseudo-Riemannian space forms.

pub mod bscroll;
pub mod catalog;
pub mod commands;
pub mod ddouble;
pub mod error;
pub mod expr;
pub mod harmonicity;
pub mod immersion;
pub mod pgeom;
pub mod scalar;
pub mod space_form;

pub use error::{GeomError, Result};
