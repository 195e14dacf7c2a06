//! Desk-scale numerics for the generalized SQG equation on the half-plane.

pub mod error;
pub mod field;
pub mod geom;
pub mod kernel;
pub mod lemmas;
pub mod params;
pub mod quad;
pub mod transport;
pub mod velocity;

pub use error::{GsqgError, Result};
pub use geom::{Rect, Vec2};
