//! Master-equation propagation: Lindblad generators, exponential and
//! fixed-step propagators, the periodic electron-reset map and channel
//! diagnostics.

mod channel;
mod lindblad;
mod reset;
mod series;
mod timedep;

pub use channel::{cp_certificate, validate_channel, ChannelReport, CP_TOLERANCE};
pub use lindblad::{propagate_static, LindbladGenerator, Propagator, MAX_DIM};
pub use reset::{cycle_map, reset_evolve, reset_evolve_with, ResetSampling, ResetSchedule};
pub use series::TimeSeries;
pub use timedep::{propagate_timedep, required_time_step, STEPS_PER_PERIOD};
