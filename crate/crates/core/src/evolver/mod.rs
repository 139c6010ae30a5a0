//! Time evolution, measurement and readout of the automaton.

mod config;
mod measure;
mod replay;
mod subspace;

pub use config::{
    enumerate_subspace, enumerate_subspace_capped, CommandConfiguration, ConfigMove, SubspaceBasis,
    DEFAULT_MAX_CONFIGURATIONS,
};
pub use measure::{
    configuration_distribution, measure_program, postselected_readout, readout, real_program_len,
    repeat_until_success, success_predicate, success_probability, MeasurementOutcome,
    PostselectedReadout, RepeatOutcome,
};
pub use replay::{canonical_interleaving, random_interleaving, replay, replay_moves, SlotTracker};
pub use subspace::{evolve, evolve_full, evolve_with, EvolveOptions, EvolveReport, Method, SubspaceDynamics};
