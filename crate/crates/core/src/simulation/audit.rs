//! Configuration-level audits: the finite-difference check of the
//! incremental gradient and the sampled constitutive assumptions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::assemble_energy;
use crate::error::Result;
use crate::laws::audit::{BoundaryData, InitialData};
use crate::laws::{validate_assumptions, AssumptionReport, LawSet, SamplingPlan};
use crate::mechanics::{gradient_check, MechanicalProblem};

use super::config::{Model, RunConfig};

/// Threshold on the relative gradient error.
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientAudit {
    pub states: usize,
    pub seed: u64,
    pub errors: Vec<f64>,
    pub worst: f64,
    pub passed: bool,
}

/// Checks the incremental gradient at `states` random admissible states
/// near the configured initial data, with loads of the first step.
pub fn gradient_audit(config: &RunConfig, states: usize, seed: u64) -> Result<GradientAudit> {
    let model = Model::build(config)?;
    let (chi0, c0) = model.initial_state(config);
    let grid = &model.grid;
    let h = grid.h();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let load = model.loads.step_average(grid, 0.0, model.tau);
    let mut errors = Vec::with_capacity(states);
    for _ in 0..states {
        let amp = rng.gen_range(0.0..0.05);
        let waves = rng.gen_range(1.0..4.0);
        let prev: Vec<f64> = chi0
            .iter()
            .zip(grid.nodes())
            .map(|(chi, x)| chi + amp * x * (std::f64::consts::PI * waves * x).sin())
            .collect();
        let mut chi = prev.clone();
        for (i, v) in chi.iter_mut().enumerate() {
            if !grid.is_pinned(i) {
                *v += 0.1 * h * rng.gen_range(-1.0..1.0);
            }
        }
        let c: Vec<f64> = c0.iter().map(|c| c.max(1e-3) * rng.gen_range(0.5..2.0)).collect();
        let problem = MechanicalProblem {
            grid,
            ops: &model.ops,
            material: model.material.as_ref(),
            hyper: &model.hyper,
            visc: &model.visc,
            chi_prev: &prev,
            c_prev: &c,
            load,
            tau: model.tau,
        };
        errors.push(gradient_check(&problem, &chi)?);
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Ok(GradientAudit {
        states,
        seed,
        worst,
        passed: worst <= GRADIENT_TOLERANCE,
        errors,
    })
}

/// Samples every constitutive assumption of the configured laws. Laws are
/// probed with `d = 2` matrices regardless of the run dimension so that
/// rotations are nontrivial; boundary and initial data come from the run.
pub fn material_audit(config: &RunConfig, seed: u64) -> Result<AssumptionReport> {
    let model = Model::build(config)?;
    let (chi0, c0) = model.initial_state(config);
    let grid = &model.grid;
    let energy = assemble_energy(grid, &model.ops, model.material.as_ref(), &model.hyper, &chi0, &c0)?;
    let plan = SamplingPlan {
        dim: 2,
        seed,
        boundary: Some(BoundaryData {
            kappa: vec![config.permeability.left, config.permeability.right],
            measure: vec![1.0, 1.0],
            exchange_enabled: grid.exchange_enabled(),
        }),
        initial: Some(InitialData {
            min_det: model.ops.grad(&chi0).into_iter().fold(f64::INFINITY, f64::min),
            min_concentration: c0.iter().copied().fold(f64::INFINITY, f64::min),
            energy,
        }),
        ..Default::default()
    };
    Ok(validate_assumptions(
        LawSet {
            material: model.material.as_ref(),
            hyper: &model.hyper,
            visc: &model.visc,
            mobility: &model.mobility,
        },
        &plan,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::NeoHookeanEntropyParams;
    use crate::simulation::config::MaterialSpec;

    #[test]
    fn benchmark_gradient_audit_passes() {
        let mut cfg = RunConfig::default();
        cfg.grid.n_cells = 16;
        let audit = gradient_audit(&cfg, 5, 3).unwrap();
        assert!(audit.passed, "{audit:?}");
        assert_eq!(audit.errors.len(), 5);
    }

    #[test]
    fn both_materials_pass_the_material_audit() {
        let mut cfg = RunConfig::default();
        let report = material_audit(&cfg, 1).unwrap();
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
        assert!(report.get("initial/admissible").unwrap().passed);
        cfg.material = MaterialSpec::NeoHookeanEntropy(NeoHookeanEntropyParams::default());
        assert!(material_audit(&cfg, 1).unwrap().all_passed());
    }
}
