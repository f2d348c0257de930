//! Complex gamma and Gauss hypergeometric functions, and the exact solution of
//! the normal variational equation along the heteroclinic orbit.

mod gamma;
mod hyper;
mod nve;

pub use gamma::{gamma, is_nonpositive_integer, log_gamma, rgamma, sin_pi};
pub use hyper::{gauss_2f1, hypergeometric_series};
pub use nve::{
    connection_coefficients, hypergeom_params, nve_solution_analytic, orbit_coordinate, ConnectionData,
    HypergeomParams,
};
