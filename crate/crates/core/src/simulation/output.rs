//! CSV and JSON artifacts of a run, written incrementally.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use csv::Writer;
use serde::Serialize;

use crate::error::Result;
use crate::grid::Grid;
use crate::operators::DiscreteOperators;

use super::config::RunConfig;
use super::diagnostics::DiagnosticRow;
use super::run::{RunStatus, SimulationOutcome, StepRecord};
use super::trajectory::TrajectoryRecord;

/// Seventeen significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub const STEP_COLUMNS: [&str; 26] = [
    "step",
    "t",
    "energy",
    "viscous_dissipation",
    "mobility_dissipation",
    "regularization_dissipation",
    "boundary_dissipation",
    "boundary_exchange",
    "loading_rate",
    "edi_slack",
    "mass",
    "mass_change",
    "boundary_influx",
    "min_det",
    "min_c",
    "mech_iterations",
    "mech_gradient_norm",
    "decrease_certificate",
    "decrease_scale",
    "diff_iterations",
    "fixed_point_residual",
    "weak_residual",
    "subdifferential_residual",
    "mu_max",
    "convexity_gap",
    "convexity_scale",
];

pub const DIAGNOSTIC_COLUMNS: [&str; 11] = [
    "step",
    "t",
    "min_det",
    "min_c",
    "llogl",
    "lp_power",
    "grad_c_m2",
    "grad_c_half",
    "grad_c_full",
    "flux_ls",
    "boundary_mu",
];

fn step_fields(r: &StepRecord) -> Vec<String> {
    let mut out = vec![r.step.to_string()];
    out.extend(
        [
            r.time,
            r.energy,
            r.viscous_dissipation,
            r.mobility_dissipation,
            r.regularization_dissipation,
            r.boundary_dissipation,
            r.boundary_exchange,
            r.loading_rate,
            r.edi_slack,
            r.mass,
            r.mass_change,
            r.boundary_influx,
            r.min_det,
            r.min_c,
        ]
        .map(fmt_float),
    );
    out.push(r.mech_iterations.to_string());
    out.extend([r.mech_gradient_norm, r.decrease_certificate, r.decrease_scale].map(fmt_float));
    out.push(r.diff_iterations.to_string());
    out.extend(
        [
            r.fixed_point_residual,
            r.weak_residual,
            r.subdifferential_residual,
            r.mu_max,
            r.convexity_gap,
            r.convexity_scale,
        ]
        .map(fmt_float),
    );
    out
}

fn diagnostic_fields(r: &DiagnosticRow) -> Vec<String> {
    let mut out = vec![r.step.to_string(), fmt_float(r.time)];
    out.extend(r.values().map(fmt_float));
    out
}

#[derive(Serialize)]
struct Versions {
    porovisco: &'static str,
}

#[derive(Serialize)]
struct Summary {
    steps_completed: usize,
    initial_energy: f64,
    min_edi_slack: Option<f64>,
    edi_tolerance: f64,
    min_det: Option<f64>,
    min_c: Option<f64>,
    initial_mass: f64,
    final_mass: Option<f64>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a RunConfig,
    versions: Versions,
    exit_code: i32,
    #[serde(flatten)]
    status: &'a RunStatus,
    summary: Summary,
}

/// Open output files of one run directory.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
    steps: Writer<File>,
    diagnostics: Writer<File>,
}

impl RunWriter {
    pub fn create(dir: &Path, config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(dir.join("snapshots"))?;
        let mut steps = Writer::from_path(dir.join("steps.csv"))?;
        steps.write_record(STEP_COLUMNS)?;
        steps.flush()?;
        let mut diagnostics = Writer::from_path(dir.join("diagnostics.csv"))?;
        diagnostics.write_record(DIAGNOSTIC_COLUMNS)?;
        diagnostics.flush()?;
        fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            steps,
            diagnostics,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn step_row(&mut self, r: &StepRecord) -> Result<()> {
        self.steps.write_record(step_fields(r))?;
        self.steps.flush()?;
        Ok(())
    }

    pub fn diagnostics_row(&mut self, r: &DiagnosticRow) -> Result<()> {
        self.diagnostics.write_record(diagnostic_fields(r))?;
        self.diagnostics.flush()?;
        Ok(())
    }

    /// `snapshots/nodes_KKKKK.csv` with `x, chi` and `snapshots/cells_KKKKK.csv`
    /// with `x, c, mu, det, c_spatial`; `mu` is empty where undefined.
    pub fn snapshot(
        &mut self,
        grid: &Grid,
        ops: &DiscreteOperators,
        k: usize,
        t: f64,
        traj: &TrajectoryRecord,
    ) -> Result<()> {
        let snap = self.dir.join("snapshots");
        let mut nodes = Writer::from_path(snap.join(format!("nodes_{k:05}.csv")))?;
        nodes.write_record(["x", "chi", "t"])?;
        for (x, chi) in grid.nodes().iter().zip(&traj.chi[k]) {
            nodes.write_record([fmt_float(*x), fmt_float(*chi), fmt_float(t)])?;
        }
        nodes.flush()?;

        let det = ops.grad(&traj.chi[k]);
        let mut cells = Writer::from_path(snap.join(format!("cells_{k:05}.csv")))?;
        cells.write_record(["x", "c", "mu", "det", "c_spatial"])?;
        for (j, x) in grid.cell_centers().iter().enumerate() {
            let c = traj.c[k][j];
            cells.write_record([
                fmt_float(*x),
                fmt_float(c),
                traj.mu[k][j].map(fmt_float).unwrap_or_default(),
                fmt_float(det[j]),
                fmt_float(c / det[j]),
            ])?;
        }
        cells.flush()?;
        Ok(())
    }

    /// Writes `run.json`.
    pub fn finish(&mut self, config: &RunConfig, outcome: &SimulationOutcome) -> Result<()> {
        let summary = Summary {
            steps_completed: outcome.steps.len(),
            initial_energy: outcome.ledger.initial_energy,
            min_edi_slack: outcome.ledger.rows.last().map(|_| outcome.ledger.min_slack()),
            edi_tolerance: outcome.ledger.tolerance(),
            min_det: outcome.diagnostics.rows.first().map(|_| outcome.min_det()),
            min_c: outcome.diagnostics.rows.first().map(|_| {
                outcome
                    .diagnostics
                    .rows
                    .iter()
                    .map(|r| r.min_c)
                    .fold(f64::INFINITY, f64::min)
            }),
            initial_mass: outcome.initial_mass,
            final_mass: outcome.steps.last().map(|s| s.mass),
        };
        let manifest = RunManifest {
            config,
            versions: Versions {
                porovisco: env!("CARGO_PKG_VERSION"),
            },
            exit_code: outcome.exit_code(),
            status: &outcome.status,
            summary,
        };
        fs::write(self.dir.join("run.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}
