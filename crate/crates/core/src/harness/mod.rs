//! Potential generators and experiments that turn the transform's analytic
//! properties into measured numbers.

mod experiments;
mod fit;
mod potential;
mod report;

pub use experiments::{
    decay_experiment, dk_system_check, lipschitz_experiment, plancherel_check, roundtrip_check, roundtrip_report,
    DecaySettings, LipschitzSettings, Resolution,
};
pub use fit::{loglog_fit, LogLogFit};
pub use potential::{gen_potential, PotentialKind, PotentialSpec};
pub use report::ExperimentReport;
