//! The staggered time loop.

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_dissipation, assemble_energy};
use crate::diffusion::{face_mobilities, fixed_point_diffusion, DiffusionProblem};
use crate::error::{Error, Result};
use crate::laws::{derive_flux_exponent, ExponentProfile};
use crate::mechanics::{solve_mechanical_step, MechanicalProblem};
use crate::tensor::Mat;

use super::config::{validate_config, Model, RunConfig};
use super::diagnostics::{face_flux, DiagnosticExponents, DiagnosticSeries};
use super::ledger::{EdiInputs, EnergyLedger};
use super::output::RunWriter;
use super::trajectory::TrajectoryRecord;

/// Outcome of a run, mapped to the process exit code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Success,
    ConfigInvalid {
        violations: Vec<String>,
    },
    SolverFailure {
        step: usize,
        message: String,
    },
    InvariantViolation {
        step: usize,
        invariant: Invariant,
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    EnergyDissipation,
    MassBalance,
    Positivity,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::ConfigInvalid { .. } => 2,
            RunStatus::SolverFailure { .. } => 3,
            RunStatus::InvariantViolation { .. } => 4,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Success)
    }
}

/// One row of `steps.csv`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// `E_τ(t_k, χ_k, c_k)`.
    pub energy: f64,
    pub viscous_dissipation: f64,
    pub mobility_dissipation: f64,
    pub regularization_dissipation: f64,
    pub boundary_dissipation: f64,
    pub boundary_exchange: f64,
    pub loading_rate: f64,
    pub edi_slack: f64,
    pub mass: f64,
    pub mass_change: f64,
    pub boundary_influx: f64,
    pub min_det: f64,
    pub min_c: f64,
    pub mech_iterations: usize,
    pub mech_gradient_norm: f64,
    pub decrease_certificate: f64,
    /// `1 + |I(χ_{k−1})|`.
    pub decrease_scale: f64,
    pub diff_iterations: usize,
    pub fixed_point_residual: f64,
    pub weak_residual: f64,
    pub subdifferential_residual: f64,
    pub mu_max: f64,
    pub convexity_gap: f64,
    /// `1 + ∫|Φ(∇χ_k,c_k)| + ∫|Φ(∇χ_k,c_{k−1})| + ∫|μ_k(c_k − c_{k−1})|`.
    pub convexity_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub status: RunStatus,
    pub trajectory: TrajectoryRecord,
    pub ledger: EnergyLedger,
    pub diagnostics: DiagnosticSeries,
    pub steps: Vec<StepRecord>,
    pub initial_mass: f64,
}

impl SimulationOutcome {
    fn empty(status: RunStatus, tau: f64) -> Self {
        SimulationOutcome {
            status,
            trajectory: TrajectoryRecord {
                tau,
                chi: Vec::new(),
                c: Vec::new(),
                mu: Vec::new(),
            },
            ledger: EnergyLedger::default(),
            diagnostics: DiagnosticSeries::new(DiagnosticExponents { m: 0.0, r: 0.0, s: 1.0 }),
            steps: Vec::new(),
            initial_mass: 0.0,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// Empirical lower bound of `det ∇_h χ_k` over the stored states.
    pub fn min_det(&self) -> f64 {
        self.diagnostics.min_det()
    }

    pub fn final_chi(&self) -> Option<&[f64]> {
        self.trajectory.chi.last().map(Vec::as_slice)
    }

    pub fn final_c(&self) -> Option<&[f64]> {
        self.trajectory.c.last().map(Vec::as_slice)
    }
}

/// Runs the configured simulation, writing outputs as it goes when an output
/// directory is configured. Only output failures are returned as errors;
/// invalid configurations and solver failures are reported in the status.
pub fn run_simulation(config: &RunConfig) -> Result<SimulationOutcome> {
    let mut writer = match &config.output.dir {
        Some(dir) => Some(RunWriter::create(dir, config)?),
        None => None,
    };
    let violations = validate_config(config);
    if !violations.is_empty() {
        let status = RunStatus::ConfigInvalid {
            violations: violations.iter().map(|v| v.to_string()).collect(),
        };
        let outcome = SimulationOutcome::empty(status, config.tau());
        if let Some(w) = writer.as_mut() {
            w.finish(config, &outcome)?;
        }
        return Ok(outcome);
    }
    let model = Model::build(config).map_err(|e| match e {
        Error::ConfigInvalid(_) => e,
        other => Error::ConfigInvalid(vec![other.to_string()]),
    })?;
    let outcome = run_model(&model, config, writer.as_mut())?;
    if let Some(w) = writer.as_mut() {
        w.finish(config, &outcome)?;
    }
    Ok(outcome)
}

fn run_model(model: &Model, config: &RunConfig, mut writer: Option<&mut RunWriter>) -> Result<SimulationOutcome> {
    let Model {
        grid,
        ops,
        material,
        hyper,
        visc,
        mobility,
        loads,
        mu_ext,
        eta,
        tau,
        n_steps,
    } = model;
    let (tau, eta, n_steps) = (*tau, *eta, *n_steps);
    let material = material.as_ref();
    let fm = |f: f64| Mat::from_element(1, 1, f);

    let profile = ExponentProfile::assemble(material.exponents(), hyper.p, mobility.m);
    let exponents = DiagnosticExponents {
        m: mobility.m,
        r: profile.r,
        s: derive_flux_exponent(&profile, grid.dim()),
    };

    let (chi0, c0) = model.initial_state(config);
    let mu0: Vec<Option<f64>> = ops
        .grad(&chi0)
        .iter()
        .zip(&c0)
        .map(|(&f, &c)| (c > 0.0).then(|| material.dphi_dc(&fm(f), c)))
        .collect();

    let load_at = |k: usize| loads.step_average(grid, (k - 1) as f64 * tau, k as f64 * tau);
    let mut load_prev = load_at(1);
    let initial_energy = assemble_energy(grid, ops, material, hyper, &chi0, &c0)? - load_prev.apply(grid, &chi0);
    let initial_mass = grid.integrate(&c0);

    let mut ledger = EnergyLedger::new(initial_energy);
    let mut diagnostics = DiagnosticSeries::new(exponents);
    diagnostics.record(grid, ops, 0, 0.0, &chi0, &c0, None, None);
    let mut trajectory = TrajectoryRecord::new(tau, chi0, c0, mu0);
    let mut steps = Vec::with_capacity(n_steps);
    let snapshot_every = config.snapshot_every();
    if let Some(w) = writer.as_deref_mut() {
        w.snapshot(grid, ops, 0, 0.0, &trajectory)?;
        w.diagnostics_row(diagnostics.rows.last().expect("initial row"))?;
    }

    let mut status = RunStatus::Success;
    let mut first_violation: Option<RunStatus> = None;
    let flag = |slot: &mut Option<RunStatus>, step, invariant, detail: String| {
        if slot.is_none() {
            *slot = Some(RunStatus::InvariantViolation {
                step,
                invariant,
                detail,
            });
        }
    };

    for k in 1..=n_steps {
        let t = k as f64 * tau;
        let load = load_at(k);
        let mu_ext_k = mu_ext.mean(t - tau, t);
        let chi_prev = trajectory.chi[k - 1].clone();
        let c_prev = trajectory.c[k - 1].clone();

        let mech = MechanicalProblem {
            grid,
            ops,
            material,
            hyper,
            visc,
            chi_prev: &chi_prev,
            c_prev: &c_prev,
            load,
            tau,
        };
        let mech_res = match solve_mechanical_step(&mech, &config.mechanics) {
            Ok(r) if r.converged => r,
            Ok(r) => {
                status = RunStatus::SolverFailure {
                    step: k,
                    message: format!(
                        "mechanical step did not converge ({:?}, gradient {:e} after {} iterations)",
                        r.termination, r.gradient_norm, r.iterations
                    ),
                };
                break;
            }
            Err(e) => {
                status = RunStatus::SolverFailure {
                    step: k,
                    message: e.at_step(k).to_string(),
                };
                break;
            }
        };
        let chi = mech_res.chi.clone();

        let diff = DiffusionProblem {
            grid,
            ops,
            material,
            mobility,
            chi: &chi,
            c_old: &c_prev,
            tau,
            eta,
            mu_ext: mu_ext_k,
        };
        let diff_res = match fixed_point_diffusion(&diff, &config.diffusion) {
            Ok(r) => r,
            Err(e) => {
                status = RunStatus::SolverFailure {
                    step: k,
                    message: e.at_step(k).to_string(),
                };
                break;
            }
        };

        let e0 = assemble_energy(grid, ops, material, hyper, &chi, &diff_res.c)?;
        let energy = e0 - load.apply(grid, &chi);
        let rate: Vec<f64> = chi.iter().zip(&chi_prev).map(|(a, b)| (a - b) / tau).collect();
        let viscous = tau * assemble_dissipation(ops, visc, &chi_prev, &rate, &c_prev);
        let loading_rate = load.sub(&load_prev).apply(grid, &chi_prev);
        let inputs = EdiInputs::from_step(energy, viscous, tau, &diff_res.dissipation, loading_rate);
        let row = *ledger.push(k, t, inputs);

        let f = ops.grad(&chi);
        let h = grid.h();
        let abs_int = |g: &dyn Fn(usize) -> f64| h * (0..f.len()).map(|j| g(j).abs()).sum::<f64>();
        let convexity_scale = 1.0
            + abs_int(&|j| material.phi(&fm(f[j]), diff_res.c[j]))
            + abs_int(&|j| material.phi(&fm(f[j]), c_prev[j]))
            + abs_int(&|j| diff_res.mu[j] * (diff_res.c[j] - c_prev[j]));
        let mass = grid.integrate(&diff_res.c);
        let record = StepRecord {
            step: k,
            time: t,
            energy,
            viscous_dissipation: viscous,
            mobility_dissipation: inputs.mobility,
            regularization_dissipation: inputs.regularization,
            boundary_dissipation: inputs.boundary,
            boundary_exchange: inputs.exchange,
            loading_rate,
            edi_slack: row.slack,
            mass,
            mass_change: diff_res.mass_change,
            boundary_influx: diff_res.boundary_influx,
            min_det: f.iter().copied().fold(f64::INFINITY, f64::min),
            min_c: diff_res.min_c,
            mech_iterations: mech_res.iterations,
            mech_gradient_norm: mech_res.gradient_norm,
            decrease_certificate: mech_res.decrease_certificate,
            decrease_scale: 1.0 + mech_res.value_at_previous.abs(),
            diff_iterations: diff_res.iterations,
            fixed_point_residual: diff_res.residual,
            weak_residual: diff_res.weak_residual,
            subdifferential_residual: diff_res.subdifferential_residual,
            mu_max: diff_res.mu.iter().fold(0.0, |m, v| m.max(v.abs())),
            convexity_gap: diff_res.convexity_gap,
            convexity_scale,
        };

        if row.slack < -ledger.tolerance() {
            flag(
                &mut first_violation,
                k,
                Invariant::EnergyDissipation,
                format!("EDI slack {:e} below −{:e}", row.slack, ledger.tolerance()),
            );
        }
        let mass_tol = 1e-10 * (grid.integrate(&c_prev).abs() + diff_res.boundary_influx.abs()).max(1e-300);
        if (diff_res.mass_change - diff_res.boundary_influx).abs() > mass_tol {
            flag(
                &mut first_violation,
                k,
                Invariant::MassBalance,
                format!(
                    "mass change {:e} differs from boundary influx {:e}",
                    diff_res.mass_change, diff_res.boundary_influx
                ),
            );
        }
        if !(record.min_c > 0.0 && record.min_det > 0.0) {
            flag(
                &mut first_violation,
                k,
                Invariant::Positivity,
                format!("min c = {:e}, min det = {:e}", record.min_c, record.min_det),
            );
        }

        let m_face = face_mobilities(mobility, &f, &diff_res.c)?;
        let flux = face_flux(ops, &m_face, &diff_res.mu);
        diagnostics.record(grid, ops, k, t, &chi, &diff_res.c, Some(&diff_res.mu), Some(&flux));
        trajectory.push(chi, diff_res.c, diff_res.mu);
        steps.push(record);
        load_prev = load;

        if let Some(w) = writer.as_deref_mut() {
            w.step_row(&record)?;
            w.diagnostics_row(diagnostics.rows.last().expect("row just recorded"))?;
            if k % snapshot_every == 0 || k == n_steps {
                w.snapshot(grid, ops, k, t, &trajectory)?;
            }
        }
    }

    if status.is_success() {
        if let Some(v) = first_violation {
            status = v;
        }
    }
    Ok(SimulationOutcome {
        status,
        trajectory,
        ledger,
        diagnostics,
        steps,
        initial_mass,
    })
}
