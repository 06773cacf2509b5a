//! Generic numerical building blocks: root finding, ODE integration, interpolation.

pub mod interp;
pub mod ode;
pub mod roots;

pub use ode::{Dopri5, OdeError, StopReason, Trace};
pub use roots::{brent, RootError};
