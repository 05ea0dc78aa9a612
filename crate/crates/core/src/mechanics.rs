//! Incremental minimization for the deformation at one time step.
//!
//! `χ_k ∈ argmin E₀(χ̃, c_{k−1}) + τ R(χ_{k−1}, (χ̃ − χ_{k−1})/τ, c_{k−1}) − ⟨ℓ_k, χ̃⟩`
//! over maps with `χ̃ = id` on the Dirichlet part. The minimizer is sought by
//! L-BFGS warm started at `χ_{k−1}`; the contract is the competitor
//! inequality (the result is never worse than `χ_{k−1}`), not global
//! optimality.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_dissipation, assemble_energy, dissipation_gradient, energy_gradient};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::laws::{FreeEnergy, Hyperstress, ViscousPotential};
use crate::loading::LoadSample;
use crate::numdiff::{gradient as fd_gradient, relative_error};
use crate::operators::DiscreteOperators;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechSolveConfig {
    pub memory: usize,
    pub max_iterations: usize,
    /// Exit when `‖∇I‖∞ ≤ g_tol (1 + |I|)`.
    pub g_tol: f64,
    pub armijo: f64,
    pub backtracking: f64,
    pub max_backtracks: usize,
    /// Trial points with `min det ∇χ ≤ ρ · (current min det)` are rejected.
    pub det_guard: f64,
}

impl Default for MechSolveConfig {
    fn default() -> Self {
        MechSolveConfig {
            memory: 10,
            max_iterations: 500,
            g_tol: 1e-8,
            armijo: 1e-4,
            backtracking: 0.5,
            max_backtracks: 60,
            det_guard: 0.1,
        }
    }
}

impl MechSolveConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.g_tol > 0.0) {
            out.push(format!("mechanics g_tol must be positive (got {})", self.g_tol));
        }
        if !(self.det_guard > 0.0 && self.det_guard < 1.0) {
            out.push(format!(
                "mechanics det_guard must lie in (0, 1) (got {})",
                self.det_guard
            ));
        }
        if !(self.backtracking > 0.0 && self.backtracking < 1.0) {
            out.push(format!(
                "mechanics backtracking must lie in (0, 1) (got {})",
                self.backtracking
            ));
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            out.push(format!("mechanics armijo must lie in (0, 1/2) (got {})", self.armijo));
        }
        if self.memory == 0 || self.max_iterations == 0 {
            out.push("mechanics memory and max_iterations must be positive".into());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientTolerance,
    /// No further decrease is representable in floating point.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechStepResult {
    pub chi: Vec<f64>,
    pub value: f64,
    /// Functional value at the warm start `χ_{k−1}`.
    pub value_at_previous: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub min_det: f64,
    /// `I(χ_{k−1}) − I(χ_k)`; nonnegative up to roundoff.
    pub decrease_certificate: f64,
    pub converged: bool,
    pub termination: Termination,
}

/// Data of one incremental problem.
#[derive(Debug, Clone, Copy)]
pub struct MechanicalProblem<'a> {
    pub grid: &'a Grid,
    pub ops: &'a DiscreteOperators,
    pub material: &'a dyn FreeEnergy,
    pub hyper: &'a dyn Hyperstress,
    pub visc: &'a dyn ViscousPotential,
    pub chi_prev: &'a [f64],
    pub c_prev: &'a [f64],
    pub load: LoadSample,
    pub tau: f64,
}

impl MechanicalProblem<'_> {
    fn rate(&self, chi: &[f64]) -> Vec<f64> {
        chi.iter().zip(self.chi_prev).map(|(a, b)| (a - b) / self.tau).collect()
    }

    /// Incremental functional `I(χ̃)`.
    pub fn functional(&self, chi: &[f64]) -> Result<f64> {
        let e = assemble_energy(self.grid, self.ops, self.material, self.hyper, chi, self.c_prev)?;
        let r = assemble_dissipation(self.ops, self.visc, self.chi_prev, &self.rate(chi), self.c_prev);
        Ok(e + self.tau * r - self.load.apply(self.grid, chi))
    }

    /// Gradient of `I` with respect to the nodal values; pinned components
    /// are zero.
    pub fn gradient(&self, chi: &[f64]) -> Result<Vec<f64>> {
        let mut g = energy_gradient(self.ops, self.material, self.hyper, chi, self.c_prev)?;
        // d/dχ̃ [τ R(χ_prev, (χ̃ − χ_prev)/τ)] = ∂_χ̇ R
        let dr = dissipation_gradient(self.ops, self.visc, self.chi_prev, &self.rate(chi), self.c_prev);
        let load = self.load.covector(self.grid);
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = if self.grid.is_pinned(i) {
                0.0
            } else {
                *gi + dr[i] - load[i]
            };
        }
        Ok(g)
    }
}

pub fn incremental_functional(problem: &MechanicalProblem<'_>, chi: &[f64]) -> Result<f64> {
    problem.functional(chi)
}

pub fn incremental_gradient(problem: &MechanicalProblem<'_>, chi: &[f64]) -> Result<Vec<f64>> {
    problem.gradient(chi)
}

/// `‖g − g_fd‖∞ / ‖g‖∞` over the free nodes, with a five-point central
/// difference oracle.
pub fn gradient_check(problem: &MechanicalProblem<'_>, chi: &[f64]) -> Result<f64> {
    let analytic = problem.gradient(chi)?;
    problem.functional(chi)?;
    let free = problem.grid.free_nodes();
    let x0: Vec<f64> = free.iter().map(|&i| chi[i]).collect();
    let mut work = chi.to_vec();
    let fd = fd_gradient(
        |x| {
            for (k, &i) in free.iter().enumerate() {
                work[i] = x[k];
            }
            problem.functional(&work).unwrap_or(f64::NAN)
        },
        &x0,
    );
    let a: Vec<f64> = free.iter().map(|&i| analytic[i]).collect();
    Ok(relative_error(&a, &fd, f64::MIN_POSITIVE))
}

/// `δ` of the approximate Wolfe condition `φ'(α) ≤ (2δ − 1) φ'(0)`.
const APPROX_WOLFE_DELTA: f64 = 0.1;
/// A line search that fails within this factor of `g_tol` is accepted as
/// converged to roundoff.
const STALL_ACCEPTANCE: f64 = 1e2;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn min_gradient(ops: &DiscreteOperators, chi: &[f64]) -> f64 {
    ops.grad(chi).into_iter().fold(f64::INFINITY, f64::min)
}

/// L-BFGS two-loop recursion: returns `−H ∇I`.
fn lbfgs_direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

pub fn solve_mechanical_step(problem: &MechanicalProblem<'_>, cfg: &MechSolveConfig) -> Result<MechStepResult> {
    let ops = problem.ops;
    let mut chi = problem.chi_prev.to_vec();
    let start_det = min_gradient(ops, &chi);
    if !(start_det > 0.0) {
        return Err(Error::degenerate(start_det, "warm start of the mechanical step"));
    }
    let f_prev = problem.functional(&chi)?;
    let mut f = f_prev;
    let mut g = problem.gradient(&chi)?;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut iterations = 0;

    let termination = loop {
        let gnorm = inf_norm(&g);
        if gnorm <= cfg.g_tol * (1.0 + f.abs()) {
            break Termination::GradientTolerance;
        }
        if iterations >= cfg.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut d = lbfgs_direction(&g, &pairs);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // Curvature information went stale; restart from steepest descent.
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if pairs.is_empty() {
            // Without curvature pairs, cap the first trial displacement at h/10.
            let scale = (0.1 * ops.h() / inf_norm(&d)).min(1.0);
            d.iter_mut().for_each(|v| *v *= scale);
            slope *= scale;
        }

        let det_now = min_gradient(ops, &chi);
        let f_noise = 16.0 * f64::EPSILON * (1.0 + f.abs());
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial: Vec<f64> = chi.iter().zip(&d).map(|(x, di)| x + alpha * di).collect();
            if min_gradient(ops, &trial) > cfg.det_guard * det_now {
                if let Ok(ft) = problem.functional(&trial) {
                    if ft <= f + cfg.armijo * alpha * slope {
                        accepted = Some((trial, ft, None));
                        break;
                    }
                    // Approximate Wolfe test: once the decrease is below the
                    // resolution of f, judge the step by the directional
                    // derivative, which is still computed accurately.
                    if ft <= f + f_noise {
                        let gt = problem.gradient(&trial)?;
                        if dot(&gt, &d) <= -(1.0 - 2.0 * APPROX_WOLFE_DELTA) * slope {
                            accepted = Some((trial, ft, Some(gt)));
                            break;
                        }
                    }
                }
            }
            alpha *= cfg.backtracking;
        }
        let Some((trial, ft, g_trial)) = accepted else {
            break Termination::Stalled;
        };
        let g_new = match g_trial {
            Some(gt) => gt,
            None => problem.gradient(&trial)?,
        };
        let s: Vec<f64> = trial.iter().zip(&chi).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if pairs.len() == cfg.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        chi = trial;
        f = ft;
        g = g_new;
    };

    // The warm start is always a competitor; never return anything worse.
    if f > f_prev {
        chi = problem.chi_prev.to_vec();
        f = f_prev;
        g = problem.gradient(&chi)?;
    }
    let gradient_norm = inf_norm(&g);
    let converged = gradient_norm <= cfg.g_tol * (1.0 + f.abs())
        || (termination == Termination::Stalled && gradient_norm <= STALL_ACCEPTANCE * cfg.g_tol * (1.0 + f.abs()));
    Ok(MechStepResult {
        min_det: min_gradient(ops, &chi),
        chi,
        value: f,
        value_at_previous: f_prev,
        gradient_norm,
        iterations,
        decrease_certificate: f_prev - f,
        converged,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DirichletSides;
    use crate::laws::{
        biot_material, BiotParams, IsotropicViscosity, NeoHookeanEntropy, NeoHookeanEntropyParams, PowerHyperstress,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        grid: Grid,
        ops: DiscreteOperators,
        material: crate::laws::BiotMaterial,
        hyper: PowerHyperstress,
        visc: IsotropicViscosity,
    }

    impl Fixture {
        fn new(n: usize) -> Self {
            let grid = Grid::uniform(n).unwrap();
            let ops = DiscreteOperators::new(&grid, 1);
            Fixture {
                grid,
                ops,
                material: biot_material(BiotParams::default()).unwrap(),
                hyper: PowerHyperstress::default(),
                visc: IsotropicViscosity::default(),
            }
        }

        fn problem<'a>(&'a self, chi_prev: &'a [f64], c: &'a [f64], traction: f64) -> MechanicalProblem<'a> {
            MechanicalProblem {
                grid: &self.grid,
                ops: &self.ops,
                material: &self.material,
                hyper: &self.hyper,
                visc: &self.visc,
                chi_prev,
                c_prev: c,
                load: LoadSample {
                    body_force: 0.0,
                    traction_left: 0.0,
                    traction_right: traction,
                },
                tau: 1.0 / 128.0,
            }
        }
    }

    #[test]
    fn value_at_warm_start_has_no_dissipation() {
        let fx = Fixture::new(16);
        let chi: Vec<f64> = fx.grid.nodes().iter().map(|x| x * 1.1).collect();
        let c = vec![1.3; 16];
        let p = fx.problem(&chi, &c, 0.2);
        let e = assemble_energy(&fx.grid, &fx.ops, &fx.material, &fx.hyper, &chi, &c).unwrap();
        let expect = e - p.load.apply(&fx.grid, &chi);
        assert!((p.functional(&chi).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn calibrated_equilibrium_is_stationary() {
        let fx = Fixture::new(32);
        let id = fx.grid.identity_map();
        let c = vec![1.0; 32];
        let p = fx.problem(&id, &c, 0.0);
        assert!((p.functional(&id).unwrap() + 1.0).abs() < 1e-13);
        let res = solve_mechanical_step(&p, &MechSolveConfig::default()).unwrap();
        assert!(res.iterations <= 2);
        assert!(res.converged);
        let dev = res.chi.iter().zip(&id).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn inverted_cell_is_rejected() {
        let fx = Fixture::new(8);
        let mut chi = fx.grid.identity_map();
        chi[3] = chi[4] + 0.05;
        let c = vec![1.0; 8];
        let p = fx.problem(&chi, &c, 0.0);
        assert!(matches!(p.functional(&chi), Err(Error::DegenerateDeformation { .. })));
        assert!(matches!(
            solve_mechanical_step(&p, &MechSolveConfig::default()),
            Err(Error::DegenerateDeformation { .. })
        ));
    }

    #[test]
    fn pinned_components_of_the_gradient_vanish() {
        let fx = Fixture::new(10);
        let chi: Vec<f64> = fx.grid.nodes().iter().map(|x| x + 0.05 * x * x).collect();
        let c = vec![0.7; 10];
        let g = fx.problem(&fx.grid.identity_map(), &c, 0.5).gradient(&chi).unwrap();
        assert_eq!(g[0], 0.0);
        assert!(g[10] != 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences_at_random_states() {
        let fx = Fixture::new(24);
        let nhe = NeoHookeanEntropy::new(NeoHookeanEntropyParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let prev: Vec<f64> = fx
                .grid
                .nodes()
                .iter()
                .map(|x| x + 0.02 * rng.gen_range(-1.0..1.0) * x)
                .collect();
            let mut chi = prev.clone();
            for v in chi.iter_mut().skip(1) {
                *v += 0.3 * fx.grid.h() * rng.gen_range(-1.0..1.0);
            }
            let c: Vec<f64> = (0..24).map(|_| rng.gen_range(0.2..3.0)).collect();
            let mut p = fx.problem(&prev, &c, rng.gen_range(-1.0..1.0));
            assert!(gradient_check(&p, &chi).unwrap() < 1e-6);
            p.material = &nhe;
            assert!(gradient_check(&p, &chi).unwrap() < 1e-6);
        }
    }

    #[test]
    fn tensile_load_stretches_and_certifies_decrease() {
        let fx = Fixture::new(32);
        let id = fx.grid.identity_map();
        let c = vec![1.0; 32];
        let p = fx.problem(&id, &c, 0.3);
        let res = solve_mechanical_step(&p, &MechSolveConfig::default()).unwrap();
        assert!(
            res.converged,
            "{:?} after {} iterations",
            res.termination, res.iterations
        );
        assert!(res.decrease_certificate > 0.0);
        assert!(res.chi[32] > 1.0);
        assert!(
            res.gradient_norm <= 1e-8 * (1.0 + res.value.abs()),
            "{:?} {} {:e}",
            res.termination,
            res.iterations,
            res.gradient_norm
        );
    }

    #[test]
    fn strong_compression_keeps_determinant_positive() {
        let fx = Fixture::new(32);
        let mut chi = fx.grid.identity_map();
        let c = vec![1.0; 32];
        let mut min_det: f64 = 1.0;
        for _ in 0..20 {
            let p = fx.problem(&chi, &c, -6.0);
            let res = solve_mechanical_step(&p, &MechSolveConfig::default()).unwrap();
            assert!(res.decrease_certificate >= -1e-12 * (1.0 + res.value_at_previous.abs()));
            min_det = min_det.min(res.min_det);
            chi = res.chi;
        }
        assert!(min_det > 0.0 && min_det < 0.9, "δ = {min_det}");
    }

    #[test]
    fn both_ends_pinned_with_body_force() {
        let mut fx = Fixture::new(16);
        fx.grid = Grid::new(16, DirichletSides::Both, 0.0, 0.0).unwrap();
        let id = fx.grid.identity_map();
        let c = vec![1.0; 16];
        let mut p = fx.problem(&id, &c, 0.0);
        p.load = LoadSample {
            body_force: 1.0,
            ..Default::default()
        };
        let res = solve_mechanical_step(&p, &MechSolveConfig::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.chi[0], 0.0);
        assert_eq!(res.chi[16], 1.0);
        assert!(res.chi[8] > 0.5);
    }
}
