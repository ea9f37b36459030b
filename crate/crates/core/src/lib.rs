//! Dobrushin interdependence matrices and certified spectral-gap bounds for
//! finite Gibbs measures, together with exact (enumerative) verification of
//! the associated Poincaré, Lipschitz-contraction, transportation and
//! Hoeffding-type inequalities on small spin systems.
//!
//! The crate is organised bottom-up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`wasserstein`] | metrics, finite distributions, exact W1, TV, oscillations |
//! | [`models`] | Ising / Potts / Gaussian pair / φ⁴ grid / free product specifications |
//! | [`dobrushin`] | interdependence matrix, spectral radius, certificates, family calculators |
//! | [`glauber`] | heat-bath generators, exact gaps, semigroups, contraction and jump-rate checks |
//! | [`transport`] | relative entropy, a-priori estimates, T1 and MGF checks |
//! | [`sampler`] | continuous-time Glauber simulation and autocorrelation envelopes |
//!
//! Configurations of a finite system are encoded in mixed radix with site 0
//! as the least significant digit, see [`space::ProductSpace`].

pub mod dobrushin;
pub mod error;
pub mod glauber;
pub mod models;
pub mod report;
pub mod sampler;
pub mod space;
pub mod tolerance;
pub mod transport;
pub mod wasserstein;

pub use dobrushin::{BoundReport, DobrushinMatrix, GapCertificate};
pub use error::{from_toml_error, Error, Result};
pub use models::{FiniteModel, ModelSpec};
pub use space::ProductSpace;
pub use wasserstein::{DiscreteDistribution, Metric, MetricChoice, TransportPlan};
