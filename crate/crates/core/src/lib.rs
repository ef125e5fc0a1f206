//! Numerical verification of the main-term formula for the twisted second
//! moment of zeta(s) L(s, chi), together with every finite identity used on
//! the way: characters and Gauss sums, shifted divisor sums, approximate
//! functional equations, Voronoi summation, and finite Euler products.

pub mod afe;
pub mod arith;
pub mod characters;
pub mod error;
pub mod eulerprod;
pub mod moment;
pub mod numkernel;
pub mod offdiag;
pub mod report;
pub mod shifts;
pub mod suites;
pub mod tolerances;
pub mod voronoi;

pub use num_complex::Complex64 as C64;

pub use characters::DirichletCharacter;
pub use error::{Error, Result};
pub use shifts::ShiftTuple;
