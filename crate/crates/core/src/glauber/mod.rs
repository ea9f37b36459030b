//! Heat-bath generators, exact spectral gaps, the semigroup `P_t = e^{tL}`,
//! Lipschitz-contraction checks, and general jump-rate systems.

mod contraction;
mod generator;
mod ips;
mod semigroup;

pub use contraction::{check_contraction, contraction_against, AggregateCheck, ContractionReport, DecayPoint};
pub use generator::{
    build_generator, build_generator_capped, exact_spectral_gap, reversible_spectrum, zero_multiplicity,
    GeneratorMatrix,
};
pub use ips::{
    build_ips_generator, check_ips_contraction, invariant_w1_decay, ips_constants, optimal_constant,
    stationary_distribution, ConstantChoice, IpsConstants, JumpRateFamily, JumpTerm, W1DecayPoint, W1DecayReport,
};
pub use semigroup::{matexp_small, semigroup_apply, semigroup_apply_left};

use crate::models::GaussianPair;

/// Gap of the Gaussian-pair generator restricted to linear functions
/// `span{x₁, x₂}`, from the symmetric 2×2 operator.
pub fn gaussian_linear_gap(g: &GaussianPair) -> f64 {
    let ev = g.linear_generator().symmetric_eigenvalues();
    -ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}
