//! Fixed numerical tolerances shared by every check in the crate.

/// Two floating quantities that should agree exactly.
pub const EQ_TOL: f64 = 1e-10;

/// Slack allowed on the right-hand side of every verified inequality.
pub const INEQ_SLACK: f64 = 1e-9;

/// Allowed deviation of a stored distribution's total mass from one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Allowed deviation of a caller-supplied distribution's mass from one.
/// Inputs within this band are renormalised.
pub const INPUT_WEIGHT_TOL: f64 = 1e-9;

/// Default cap on |E|^|T| for joint tables and generators.
pub const DEFAULT_STATE_CAP: usize = 4096;

/// Default cap on product-space size for transport problems.
pub const DEFAULT_TRANSPORT_CAP: usize = 256;

/// Above this many sites the spectral radius is computed by shifted power
/// iteration instead of a dense eigendecomposition.
pub const DENSE_EIGEN_MAX_SITES: usize = 64;

/// Largest |E^S| for which the exact jump-rate constant LP is solved.
pub const EXACT_RATE_LP_MAX_STATES: usize = 32;
