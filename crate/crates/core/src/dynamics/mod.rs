//! Lindblad generators, time evolution and steady states.

mod evolve;
mod expm;
mod integrate;
mod liouvillian;
mod sector;
mod steady;

pub use evolve::{evolve, evolve_with, EvolutionResult, EvolveOptions, Integrator};
pub use expm::expm;
pub use liouvillian::{build_liouvillian, unvectorize, vectorize, Liouvillian, SUPEROPERATOR_DIM_LIMIT};
pub use sector::{sector_reduce, SectorState, CONSERVATION_TOL};
pub use steady::{
    default_t_max, steady_state_from_initial, steady_state_from_initial_with, steady_state_nullspace, NullSpace,
    SteadyStateResult, DEFAULT_STEADY_TOL, NULLSPACE_RTOL,
};

use crate::error::Result;
use crate::model::SectorModel;

impl SectorModel {
    pub fn liouvillian(&self) -> Result<Liouvillian> {
        build_liouvillian(&self.hamiltonian, &self.terms)
    }
}
