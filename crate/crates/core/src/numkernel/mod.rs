//! Complex special functions and quadrature.

mod bessel;
mod gamma;
mod quad;
mod zeta;

pub use bessel::{bessel, bessel_b, bessel_j, bessel_k, bessel_y, BesselKind, MAX_ORDER};
pub use gamma::{complex_gamma, ln_gamma, ln_gamma_ratio};
pub use quad::{
    adaptive_integral, adaptive_integral_on, adaptive_integral_par, composite_gauss_legendre, gauss_legendre,
    vertical_line_integral, GaussLegendre, QuadResult, QuadratureSpec,
};
pub(crate) use zeta::em_tail;
pub use zeta::{completed_l, completed_pair, completed_zeta, dirichlet_l, em_cutoff, hurwitz_zeta, riemann_zeta};
