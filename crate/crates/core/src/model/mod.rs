//! Spin-register description and Hamiltonian / jump-operator builders.

mod dissipation;
mod hamiltonian;
mod register;

pub use dissipation::{build_dissipators, dephasing_jumps, electron_jumps, ElectronRate, Jump};
pub use hamiltonian::{
    build_detuned_effective, build_lab_hamiltonian, build_rf_frame_hamiltonian, build_rwa_hamiltonian,
    rwa_frame_rotation, tilted_drive, LabHamiltonian, RfFrameHamiltonian, StaticHamiltonian, TimeDependentHamiltonian,
};
pub use register::{DissipationSpec, DriveSpec, NuclearSpinSpec, RelaxationModel, SpinRegister, ValidityReport};

/// Default scale applied to D and γ_eB in lab-frame runs.
pub const DEFAULT_LAB_SCALE: f64 = 1e-2;
