//! Time-dependent Hamiltonians of the driven transmon and their closed and
//! open-system propagation.

mod integrate;
mod model;

pub use integrate::{
    evolve_lindblad, evolve_schrodinger, evolve_schrodinger_observed, lindblad_final_state, max_sample_spacing,
    passage_consistency, passage_tracking_error, EvolutionResult, MAX_CARRIER_PHASE_STEP, MAX_NORM_STEP,
};
pub use model::{build_hamiltonian, SystemModel};
