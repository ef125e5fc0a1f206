//! Tolerances and default truncations shared by tests, the CLI and the
//! acceptance suite.

pub const EXACT_IDENTITY: f64 = 1e-10;
pub const FUNCTIONAL_IDENTITY: f64 = 1e-11;
pub const SERIES_DUALITY: f64 = 1e-12;
pub const AFE_RESIDUAL: f64 = 1e-6;
pub const KERNEL_INDEPENDENCE: f64 = 1e-6;
pub const VORONOI_RESIDUAL: f64 = 1e-6;
pub const MUTATION_FLOOR: f64 = 1e-2;
pub const DELTA_RESIDUAL: f64 = 1e-8;
pub const SUM_FORMULA_FLOOR: f64 = 1e-5;
pub const SUM_FORMULA_TAIL_FACTOR: f64 = 10.0;
pub const DIAGONAL_DECAY_FACTOR: f64 = 1.5;
pub const MOMENT_REL_T1000: f64 = 0.15;
pub const MOMENT_REL_T2000: f64 = 0.10;
pub const MOTOHASHI_REL: f64 = 0.05;
pub const MOLLIFIED_REL: f64 = 0.10;

/// Minimum distance of every shifted zeta/L argument from its pole.
pub const EPS_SHIFT: f64 = 5e-3;
/// Bound on each shift.
pub const MAX_SHIFT: f64 = 0.1;
