//! Phase-space stochastic model of polarization-entangled photon pairs from
//! parametric down-conversion.
//!
//! The vacuum is sampled from its Wigner distribution ([`gaussian_modes`]),
//! transformed by the down-conversion map ([`spdc_evolution`]), projected
//! through polarization analyzers ([`polarization_fields`]) and turned into
//! single and coincidence detection rates ([`detection_rates`]). Rates feed the
//! Clauser-Horne inequality ([`bell_analysis`]). Two independent checks back
//! the calculation: the Weyl-symbol algebra ([`ww_algebra`]) and a truncated
//! number-basis computation ([`fock_oracle`]).

pub mod bell_analysis;
pub mod cli;
pub mod detection_rates;
pub mod error;
pub mod fock_oracle;
pub mod gaussian_modes;
pub mod polarization_fields;
pub mod spdc_evolution;
pub mod stats;
pub mod ww_algebra;

pub use error::{Error, Result};
pub use stats::{ComplexEstimate, RateEstimate};

/// Library version recorded in every output row.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
