//! End-to-end numerical experiments: state transfer, gate fidelity maps,
//! RF spectroscopy, selectivity, sensing, the gate pipeline and the RWA
//! validation.

mod engine;
mod gate;
mod pipeline;
mod rwa;
mod spec;
mod spectroscopy;
mod transfer;

pub use gate::{
    default_gate_time, gate_fidelity, gate_target, run_fidelity_map, run_selectivity, spectator_register,
    target_channel, GateOutcome,
};
pub use pipeline::{parity_contrast, run_gate_pipeline, PipelineMode, PipelineResult};
pub use rwa::{validate_rwa, RwaReport};
pub use spec::{
    cycles, Diagnostics, ElectronState, ExperimentSpec, InitialState, LocalState, Observable, ResetModel, Series,
    SweepResult,
};
pub use spectroscopy::{
    analytic_population, closed_sweep_oracle, detuned_population, dip_metrics, find_dips, run_rf_sweep, run_sensing,
    AnalyticVariant, Dip, DipMetrics,
};
pub use transfer::{
    default_observables, rms_difference, run_state_transfer, transfer_sweep, TransferMode, TransferRun,
};
