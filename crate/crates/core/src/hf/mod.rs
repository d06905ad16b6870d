//! High-fidelity transient solver: loading programs, global Newton
//! iterations and the snapshot archive.

mod archive;
mod loading;
mod solver;

pub use archive::{Snapshot, SnapshotArchive, Variability};
pub use loading::{
    external_force_vector, Keyframe, KeyframeSpec, LoadingProgram, LoadingSpec, PiecewiseLinear, PressureSpec,
    RotationAxis, TemperatureSpec,
};
pub use solver::{newton_iterate, Evaluation, HfModel, NewtonOptions, StepOutcome};
