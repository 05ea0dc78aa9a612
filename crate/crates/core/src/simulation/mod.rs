//! Staggered time stepping, energy bookkeeping, diagnostics and outputs.

pub mod audit;
pub mod config;
pub mod diagnostics;
pub mod ledger;
pub mod output;
pub mod run;
pub mod sweep;
pub mod trajectory;

pub use audit::{gradient_audit, material_audit, GradientAudit};
pub use config::{validate_config, Model, Preset, RunConfig};
pub use diagnostics::{flux_ls_norm, grad_power_norm, llogl_norm, lp_norm, DiagnosticRow, DiagnosticSeries};
pub use ledger::{compute_edi_slack, EdiInputs, EnergyLedger, LedgerRow};
pub use run::{run_simulation, Invariant, RunStatus, SimulationOutcome, StepRecord};
pub use sweep::{eta_tau_sweep, SweepParameter, SweepReport, SweepSeries};
pub use trajectory::{GapReport, Interpolant, TrajectoryRecord};
