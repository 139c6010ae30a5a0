//! Reduced free-fermion transport of the command register.

mod appendix;
mod p1;
mod propagator;
mod slater;

pub use appendix::{appendix_estimate, f_bessel, f_exact, g_weight, AppendixEstimate};
pub use p1::{
    default_departures, p1, p1_cosine_form, p1_line, p1_literal, success_bound, transport_report,
    TransportReport,
};
pub use propagator::{dispersion, line_propagator_modulus, propagator, propagator_table};
pub use slater::{
    departures_from_density, expected_departures, one_body_density, slater_config_probability,
    slater_distribution, HoppingModel, Statistics, MAX_HOPPING_CONFIGURATIONS,
};
