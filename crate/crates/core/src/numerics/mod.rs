//! Numerical building blocks shared by the solvers.

pub mod banded;
pub mod dopri;
pub mod dual;
pub mod fit;
pub mod gmres;
pub mod quadrature;
pub mod spectral;
pub mod stencil;
