//! Reduced-order solver: reduced Newton on the POD basis with the ECM
//! quadrature, and Gappy-POD reconstruction of the dual quantities.

mod gappy;
mod model;
mod solver;

pub use gappy::{gappy_offline, gappy_online, GappyModel};
pub use model::{BuildReport, Quantity, ReducedModel, ReductionTolerances};
pub use solver::{
    hf_step_record, project_online_loading, reconstruct_step, reduced_newton, run_rom_transient, DualRecord, RomSolution,
    RomState, RomStep, RomStepRecord,
};
