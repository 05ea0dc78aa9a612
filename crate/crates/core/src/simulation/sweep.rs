//! Empirical Cauchy study in the regularization weight `η` and step `τ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

use super::config::RunConfig;
use super::run::{run_simulation, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Eta,
    Tau,
}

/// Final-time differences between successive members of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// `‖c_i − c_{i+1}‖_{L²}` at the final time.
    pub c_differences: Vec<f64>,
    /// `‖χ_i − χ_{i+1}‖_{L²}` at the final time.
    pub chi_differences: Vec<f64>,
    pub c_strictly_decreasing: bool,
    pub chi_strictly_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub eta: Option<SweepSeries>,
    pub tau: Option<SweepSeries>,
}

impl SweepReport {
    /// Every requested series has strictly decreasing concentration
    /// differences.
    pub fn monotone(&self) -> bool {
        [&self.eta, &self.tau]
            .iter()
            .filter_map(|s| s.as_ref())
            .all(|s| s.c_strictly_decreasing)
    }
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn check_sorted(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::ConfigInvalid(vec![format!("{name} values must be positive")]));
    }
    if !strictly_decreasing(values) {
        return Err(Error::ConfigInvalid(vec![format!(
            "{name} values must be sorted strictly decreasing"
        )]));
    }
    Ok(())
}

fn member_config(base: &RunConfig, parameter: SweepParameter, value: f64) -> Result<RunConfig> {
    let mut cfg = base.clone();
    match parameter {
        SweepParameter::Eta => cfg.regularization.eta = value,
        SweepParameter::Tau => {
            let n = (cfg.time.final_time / value).round();
            if !(n >= 1.0 && ((cfg.time.final_time / n) - value).abs() <= 1e-12 * value) {
                return Err(Error::ConfigInvalid(vec![format!(
                    "τ = {value} does not divide T = {}",
                    cfg.time.final_time
                )]));
            }
            cfg.time.n_steps = n as usize;
        }
    }
    cfg.output.dir = base.output.dir.as_ref().map(|d| {
        let tag = match parameter {
            SweepParameter::Eta => "eta",
            SweepParameter::Tau => "tau",
        };
        d.join(format!("{tag}_{value:e}"))
    });
    Ok(cfg)
}

fn run_series(base: &RunConfig, parameter: SweepParameter, values: &[f64]) -> Result<SweepSeries> {
    let configs = values
        .iter()
        .map(|&v| member_config(base, parameter, v))
        .collect::<Result<Vec<_>>>()?;
    let finals = configs
        .par_iter()
        .map(|cfg| {
            let out = run_simulation(cfg)?;
            match out.status {
                RunStatus::Success => {}
                RunStatus::ConfigInvalid { violations } => return Err(Error::ConfigInvalid(violations)),
                other => {
                    return Err(Error::InvalidParams(format!(
                        "sweep member failed: {}",
                        serde_json::to_string(&other).unwrap_or_default()
                    )))
                }
            }
            let chi = out.final_chi().expect("successful run").to_vec();
            let c = out.final_c().expect("successful run").to_vec();
            Ok((chi, c))
        })
        .collect::<Result<Vec<_>>>()?;

    let grid = Grid::new(
        base.grid.n_cells,
        base.grid.dirichlet,
        base.permeability.left,
        base.permeability.right,
    )?;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
    let (mut c_differences, mut chi_differences) = (Vec::new(), Vec::new());
    for w in finals.windows(2) {
        c_differences.push(grid.l2_norm(&diff(&w[0].1, &w[1].1)));
        chi_differences.push(grid.nodal_l2_norm(&diff(&w[0].0, &w[1].0)));
    }
    Ok(SweepSeries {
        parameter,
        values: values.to_vec(),
        c_strictly_decreasing: strictly_decreasing(&c_differences),
        chi_strictly_decreasing: strictly_decreasing(&chi_differences),
        c_differences,
        chi_differences,
    })
}

/// Runs the `η` sweep at the configured `τ` and the `τ` sweep at the
/// configured `η`. Both lists must be sorted strictly decreasing; an empty
/// list skips that sweep. Members run in parallel.
pub fn eta_tau_sweep(config: &RunConfig, etas: &[f64], taus: &[f64]) -> Result<SweepReport> {
    check_sorted("η", etas)?;
    check_sorted("τ", taus)?;
    let (eta, tau) = rayon::join(
        || {
            (!etas.is_empty())
                .then(|| run_series(config, SweepParameter::Eta, etas))
                .transpose()
        },
        || {
            (!taus.is_empty())
                .then(|| run_series(config, SweepParameter::Tau, taus))
                .transpose()
        },
    );
    Ok(SweepReport { eta: eta?, tau: tau? })
}
