//! Heteroclinic cycles between saddle-centers of a quartic two-degree-of-freedom
//! Hamiltonian family: Melnikov analysis, monodromy of the normal variational
//! equation, and numerical tracing of periodic-orbit manifolds.

pub mod error;
pub mod manifold;
pub mod model;
pub mod monodromy;
pub mod ode;
pub mod melnikov;
pub mod special;

pub use error::{Error, Result};
