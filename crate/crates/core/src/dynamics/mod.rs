//! Coupling profiles, Hamiltonian phases and probe propagation.

mod oracle;
mod profile;
mod propagator;
pub mod quadrature;

pub use oracle::{l2_distance, numeric_propagate_oracle};
pub use profile::{CouplingProfile, ProfileShape};
pub use propagator::{
    analytic_propagator, closed_form_phase, closed_form_phase_difference, drift_integral,
    evolve_probe_element, hamiltonian_phase, lemma_solution, phase_difference, PropagatorElement,
};
