//! Regularized diffusion step for `(μ_k, c_k)` at frozen deformation `χ_k`.
//!
//! For a trial potential `μ̃` with `c̃ = c(∇χ_k, μ̃)` the step solves the
//! linear problem
//!
//! ```text
//! a_c̃(μ, ψ) = ∫ ℳ(∇χ_k, c̃)∇μ·∇ψ + η Σ_{|β|=θ} ∂^βμ ∂^βψ dx + ∫ κ μ ψ dS
//!           = −∫ (c̃ − c_{k−1})/τ ψ dx + ∫ κ μ_ext ψ dS,
//! ```
//!
//! whose fixed points `μ = μ̃` are the solutions of the step. The map used
//! here additionally linearizes `c(μ) ≈ c̃ + (μ − μ̃)/∂²_ccΦ` on both sides,
//! which leaves the fixed points unchanged but makes the iteration contract
//! even when `κ = 0` and the plain form annihilates constants.

use serde::{Deserialize, Serialize};

use crate::assembly::admissible_gradients;
use crate::error::{Error, Result};
use crate::grid::{Grid, Side};
use crate::laws::{invert_chemical_potential, FreeEnergy, Mobility};
use crate::linalg::{BandedSpd, LinearSolveOptions};
use crate::operators::{robin_boundary_form, DiscreteOperators};
use crate::tensor::{compensated_sum, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffSolveConfig {
    /// Damping `λ_fp ∈ (0, 1]` of the Picard update.
    pub damping: f64,
    /// Convergence when `‖𝒮(μ) − μ‖∞ ≤ tol (1 + ‖μ‖∞)`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Iterations without a new best residual before giving up.
    pub patience: usize,
    pub max_damping_halvings: usize,
    /// Floor applied to `c_{k−1}` when seeding the iteration.
    pub c_floor: f64,
    pub direct_limit: usize,
    pub cg_rel_tol: f64,
}

impl Default for DiffSolveConfig {
    fn default() -> Self {
        DiffSolveConfig {
            damping: 0.5,
            tol: 1e-12,
            max_iterations: 500,
            patience: 25,
            max_damping_halvings: 4,
            c_floor: 1e-12,
            direct_limit: 4096,
            cg_rel_tol: 1e-12,
        }
    }
}

impl DiffSolveConfig {
    pub fn linear_options(&self) -> LinearSolveOptions {
        LinearSolveOptions {
            direct_limit: self.direct_limit,
            cg_rel_tol: self.cg_rel_tol,
            ..Default::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            out.push(format!("diffusion damping must lie in (0, 1] (got {})", self.damping));
        }
        if !(self.tol > 0.0) {
            out.push(format!("diffusion tol must be positive (got {})", self.tol));
        }
        if !(self.c_floor > 0.0) {
            out.push(format!("diffusion c_floor must be positive (got {})", self.c_floor));
        }
        if self.max_iterations == 0 || self.patience == 0 {
            out.push("diffusion max_iterations and patience must be positive".into());
        }
        out
    }
}

/// Data of one diffusion step.
#[derive(Debug, Clone, Copy)]
pub struct DiffusionProblem<'a> {
    pub grid: &'a Grid,
    pub ops: &'a DiscreteOperators,
    pub material: &'a dyn FreeEnergy,
    pub mobility: &'a dyn Mobility,
    pub chi: &'a [f64],
    pub c_old: &'a [f64],
    pub tau: f64,
    pub eta: f64,
    /// Step-averaged external potential `μ_ext,k`.
    pub mu_ext: f64,
}

/// The four integrals of a diffusion step that enter the energy balance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DissipationBreakdown {
    /// `∫ ℳ(∇χ_k, c_k)∇μ_k·∇μ_k dx`.
    pub mobility: f64,
    /// `η Σ_{|β|=θ} ∫ |∂^βμ_k|² dx`.
    pub regularization: f64,
    /// `∫ κ μ_k² dS`.
    pub boundary_quadratic: f64,
    /// `∫ κ μ_k μ_ext,k dS`.
    pub boundary_exchange: f64,
}

impl DissipationBreakdown {
    /// Per-unit-time dissipation `mobility + regularization + ∫κμ² − ∫κμμ_ext`.
    pub fn net(&self) -> f64 {
        self.mobility + self.regularization + self.boundary_quadratic - self.boundary_exchange
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffStepResult {
    pub mu: Vec<f64>,
    pub c: Vec<f64>,
    pub iterations: usize,
    /// Final fixed-point residual `‖𝒮(μ) − μ‖∞`.
    pub residual: f64,
    pub damping: f64,
    pub dissipation: DissipationBreakdown,
    /// `∫ (c_k − c_{k−1}) dx`.
    pub mass_change: f64,
    /// `τ ∫ κ (μ_ext,k − μ_k) dS`.
    pub boundary_influx: f64,
    /// `max |∂_cΦ(∇χ_k, c_k) − μ_k|`.
    pub subdifferential_residual: f64,
    /// Largest residual of the discrete weak form over cell indicators.
    pub weak_residual: f64,
    /// Residual of the weak form tested with `ψ = 1`.
    pub weak_residual_constant: f64,
    /// `∫Φ(∇χ_k,c_k) − ∫Φ(∇χ_k,c_{k−1}) − ∫μ_k(c_k − c_{k−1})`, nonpositive
    /// by convexity.
    pub convexity_gap: f64,
    pub min_c: f64,
}

/// Assembled SPD matrix of `a_c̃` and the right side `ξ_c̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSystem {
    pub matrix: BandedSpd,
    pub rhs: Vec<f64>,
}

/// Face mobilities: arithmetic means of the two adjacent cell values.
pub fn face_mobilities(mobility: &dyn Mobility, deformation_gradients: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    let cell: Vec<f64> = deformation_gradients
        .iter()
        .zip(c)
        .map(|(&f, &c)| mobility.lagrangian(&Mat::from_element(1, 1, f), c).map(|m| m[(0, 0)]))
        .collect::<Result<_>>()?;
    Ok(cell.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
}

impl DiffusionProblem<'_> {
    fn boundary_cells(&self) -> [(usize, f64); 2] {
        [Side::Left, Side::Right].map(|s| (self.grid.boundary_cell(s), self.grid.kappa(s)))
    }

    /// `a_c̃` without any mass term.
    pub fn bilinear_form(&self, c_tilde: &[f64]) -> Result<BandedSpd> {
        let f = admissible_gradients(self.ops, self.chi)?;
        let n = self.grid.n_cells();
        let theta = self.ops.theta();
        let h = self.grid.h();
        let mut a = BandedSpd::zeros(n, theta.max(1));

        let m_face = face_mobilities(self.mobility, &f, c_tilde)?;
        for (i, (m, w)) in m_face.iter().zip(self.ops.face_weights()).enumerate() {
            let v = w * m / (h * h);
            a.add(i, i, v);
            a.add(i + 1, i + 1, v);
            a.add(i + 1, i, -v);
        }
        let coeffs = self.ops.difference_coeffs();
        for (start, w) in self.ops.difference_weights().iter().enumerate() {
            for (p, cp) in coeffs.iter().enumerate() {
                for (q, cq) in coeffs.iter().enumerate().take(p + 1) {
                    a.add(start + p, start + q, self.eta * w * cp * cq);
                }
            }
        }
        for (j, kappa) in self.boundary_cells() {
            a.add(j, j, kappa);
        }
        Ok(a)
    }

    /// `ξ_c̃`: `−(h/τ)(c̃ − c_{k−1}) + κ μ_ext` on the boundary cells.
    pub fn rhs(&self, c_tilde: &[f64]) -> Vec<f64> {
        let h = self.grid.h();
        let mut b: Vec<f64> = c_tilde
            .iter()
            .zip(self.c_old)
            .map(|(ct, co)| -h / self.tau * (ct - co))
            .collect();
        for (j, kappa) in self.boundary_cells() {
            b[j] += kappa * self.mu_ext;
        }
        b
    }

    fn invert(&self, f: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
        f.iter()
            .zip(mu)
            .map(|(&f, &mu)| invert_chemical_potential(self.material, &Mat::from_element(1, 1, f), mu))
            .collect()
    }

    /// One application of the linearized fixed-point map.
    fn apply_map(&self, f: &[f64], mu_tilde: &[f64], opts: &LinearSolveOptions) -> Result<Vec<f64>> {
        let c_tilde = self.invert(f, mu_tilde)?;
        let mut a = self.bilinear_form(&c_tilde)?;
        let mut rhs = self.rhs(&c_tilde);
        let h = self.grid.h();
        let capacity: Vec<f64> = f
            .iter()
            .zip(&c_tilde)
            .map(|(&f, &c)| h / (self.tau * self.material.d2phi_dcc(&Mat::from_element(1, 1, f), c)))
            .collect();
        a.add_diagonal(&capacity);
        for ((r, cap), mu) in rhs.iter_mut().zip(&capacity).zip(mu_tilde) {
            *r += cap * mu;
        }
        a.solve(&rhs, opts)
    }
}

pub fn assemble_diffusion_system(problem: &DiffusionProblem<'_>, c_tilde: &[f64]) -> Result<DiffusionSystem> {
    if let Some(c) = c_tilde.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::InvalidParams(format!(
            "trial concentration must be positive, found {c}"
        )));
    }
    Ok(DiffusionSystem {
        matrix: problem.bilinear_form(c_tilde)?,
        rhs: problem.rhs(c_tilde),
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn fixed_point_diffusion(problem: &DiffusionProblem<'_>, cfg: &DiffSolveConfig) -> Result<DiffStepResult> {
    let f = admissible_gradients(problem.ops, problem.chi)?;
    let opts = cfg.linear_options();
    let mut mu: Vec<f64> = f
        .iter()
        .zip(problem.c_old)
        .map(|(&f, &c)| {
            problem
                .material
                .dphi_dc(&Mat::from_element(1, 1, f), c.max(cfg.c_floor))
        })
        .collect();

    let mut lambda = cfg.damping;
    let mut halvings = 0;
    let mut previous = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut iterations = 0;
    let (mu, residual) = loop {
        iterations += 1;
        let image = problem.apply_map(&f, &mu, &opts)?;
        let residual = max_diff(&image, &mu);
        if residual <= cfg.tol * (1.0 + inf_norm(&image)) {
            break (image, residual);
        }
        if iterations >= cfg.max_iterations {
            return Err(Error::MaxIterationsExceeded {
                solver: "diffusion fixed point",
                iterations,
                residual,
            });
        }
        if residual > previous && halvings < cfg.max_damping_halvings {
            lambda *= 0.5;
            halvings += 1;
        }
        if residual < best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                return Err(Error::FixedPointDiverged { iterations, residual });
            }
        }
        previous = residual;
        for (m, s) in mu.iter_mut().zip(&image) {
            *m += lambda * (s - *m);
        }
    };

    let c = problem.invert(&f, &mu)?;
    finish(problem, &f, mu, c, iterations, residual, lambda)
}

fn finish(
    problem: &DiffusionProblem<'_>,
    f: &[f64],
    mu: Vec<f64>,
    c: Vec<f64>,
    iterations: usize,
    residual: f64,
    damping: f64,
) -> Result<DiffStepResult> {
    let grid = problem.grid;
    let material = problem.material;
    let a = problem.bilinear_form(&c)?;
    let weak: Vec<f64> = a.matvec(&mu).iter().zip(problem.rhs(&c)).map(|(l, r)| l - r).collect();

    let m_face = face_mobilities(problem.mobility, f, &c)?;
    let mut breakdown = DissipationBreakdown {
        mobility: problem.ops.weighted_gradient_form(&m_face, &mu, &mu),
        regularization: problem.eta * problem.ops.regularization_form(&mu, &mu),
        boundary_quadratic: robin_boundary_form(grid, &mu, &mu),
        boundary_exchange: 0.0,
    };
    breakdown.boundary_exchange = [Side::Left, Side::Right]
        .iter()
        .map(|&s| grid.kappa(s) * mu[grid.boundary_cell(s)] * problem.mu_ext)
        .sum();

    let fm = |f: f64| Mat::from_element(1, 1, f);
    let subdiff = f
        .iter()
        .zip(&c)
        .zip(&mu)
        .map(|((&f, &c), &m)| (material.dphi_dc(&fm(f), c) - m).abs())
        .fold(0.0, f64::max);
    let h = grid.h();
    let convexity_gap = h * compensated_sum(
        f.iter()
            .zip(&c)
            .zip(problem.c_old)
            .zip(&mu)
            .map(|(((&f, &cn), &co), &m)| material.phi(&fm(f), cn) - material.phi(&fm(f), co) - m * (cn - co)),
    );
    let mass_change = h * compensated_sum(c.iter().zip(problem.c_old).map(|(a, b)| a - b));
    let boundary_influx = problem.tau
        * [Side::Left, Side::Right]
            .iter()
            .map(|&s| grid.kappa(s) * (problem.mu_ext - mu[grid.boundary_cell(s)]))
            .sum::<f64>();

    Ok(DiffStepResult {
        min_c: c.iter().copied().fold(f64::INFINITY, f64::min),
        weak_residual: inf_norm(&weak),
        weak_residual_constant: compensated_sum(weak.iter().copied()).abs(),
        mu,
        c,
        iterations,
        residual,
        damping,
        dissipation: breakdown,
        mass_change,
        boundary_influx,
        subdifferential_residual: subdiff,
        convexity_gap,
    })
}

/// The dissipation integrals of a converged step.
pub fn dissipation_breakdown(result: &DiffStepResult) -> DissipationBreakdown {
    result.dissipation
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DirichletSides;
    use crate::laws::{biot_material, BiotMaterial, BiotParams, PowerMobility};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        grid: Grid,
        ops: DiscreteOperators,
        material: BiotMaterial,
        mobility: PowerMobility,
    }

    fn fixture(n: usize, kappa_right: f64) -> Fixture {
        let grid = Grid::new(n, DirichletSides::Left, 0.0, kappa_right).unwrap();
        let ops = DiscreteOperators::new(&grid, 1);
        Fixture {
            grid,
            ops,
            material: biot_material(BiotParams::default()).unwrap(),
            mobility: PowerMobility::default(),
        }
    }

    impl Fixture {
        fn problem<'a>(&'a self, chi: &'a [f64], c_old: &'a [f64], mu_ext: f64) -> DiffusionProblem<'a> {
            DiffusionProblem {
                grid: &self.grid,
                ops: &self.ops,
                material: &self.material,
                mobility: &self.mobility,
                chi,
                c_old,
                tau: 1.0 / 128.0,
                eta: 1e-4,
                mu_ext,
            }
        }
    }

    #[test]
    fn equilibrium_is_reached_in_one_iteration() {
        let fx = fixture(16, 1.0);
        let id = fx.grid.identity_map();
        let c = vec![1.0; 16];
        let res = fixed_point_diffusion(&fx.problem(&id, &c, 0.0), &DiffSolveConfig::default()).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.mu.iter().all(|m| m.abs() < 1e-14));
        assert!(res.c.iter().all(|c| (c - 1.0).abs() < 1e-14));
        let d = dissipation_breakdown(&res);
        assert!(d.mobility.abs() < 1e-25 && d.regularization.abs() < 1e-25);
        assert!(d.boundary_quadratic.abs() < 1e-25 && d.boundary_exchange.abs() < 1e-25);
    }

    #[test]
    fn closed_system_conserves_mass() {
        let fx = fixture(32, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let chi: Vec<f64> = fx.grid.nodes().iter().map(|x| x + 0.05 * (3.0 * x).sin()).collect();
        let c_old: Vec<f64> = (0..32).map(|_| rng.gen_range(0.1..2.0)).collect();
        let res = fixed_point_diffusion(&fx.problem(&chi, &c_old, 0.7), &DiffSolveConfig::default()).unwrap();
        let m0 = fx.grid.integrate(&c_old);
        assert!(res.mass_change.abs() <= 1e-10 * m0, "Δm = {:e}", res.mass_change);
        assert!(res.min_c > 0.0);
        assert!(res.weak_residual_constant < 1e-10);
    }

    #[test]
    fn species_flows_in_under_a_higher_external_potential() {
        let fx = fixture(32, 1.0);
        let id = fx.grid.identity_map();
        let c_old = vec![1.0; 32];
        let res = fixed_point_diffusion(&fx.problem(&id, &c_old, 0.5), &DiffSolveConfig::default()).unwrap();
        assert!(res.mass_change > 0.0);
        assert!((res.mass_change - res.boundary_influx).abs() <= 1e-10 * fx.grid.integrate(&c_old));
    }

    #[test]
    fn empty_cells_are_filled_from_the_boundary() {
        let fx = fixture(16, 1.0);
        let id = fx.grid.identity_map();
        let mut c_old = vec![1.0; 16];
        c_old[3] = 0.0;
        c_old[15] = 0.0;
        let res = fixed_point_diffusion(&fx.problem(&id, &c_old, 0.0), &DiffSolveConfig::default()).unwrap();
        assert!(res.min_c > 0.0);
        assert!((res.mass_change - res.boundary_influx).abs() < 1e-10);
    }

    #[test]
    fn step_invariants_on_a_generic_state() {
        let fx = fixture(24, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chi: Vec<f64> = fx.grid.nodes().iter().map(|x| x * (1.0 + 0.2 * x)).collect();
        let c_old: Vec<f64> = (0..24).map(|_| rng.gen_range(0.3..3.0)).collect();
        let res = fixed_point_diffusion(&fx.problem(&chi, &c_old, -0.3), &DiffSolveConfig::default()).unwrap();
        let mu_scale = 1.0 + inf_norm(&res.mu);
        assert!(res.subdifferential_residual <= 1e-10 * mu_scale);
        assert!(res.convexity_gap <= 1e-10 * (1.0 + fx.grid.integrate(&c_old)));
        assert!(res.weak_residual < 1e-9);
        let d = res.dissipation;
        assert!(d.mobility > 0.0 && d.regularization > 0.0 && d.boundary_quadratic > 0.0);

        // Lower mobility bound: ℳ-term ≥ C₀ ∫ c^m |∇μ|² with C₀ = min ℳ/c^m.
        let f = fx.ops.grad(&chi);
        let c0 = f
            .iter()
            .zip(&res.c)
            .map(|(f, c)| fx.mobility.lagrangian_scalar(*f, *c) / c)
            .fold(f64::INFINITY, f64::min);
        let cm_face: Vec<f64> = res.c.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let lower = c0 * fx.ops.weighted_gradient_form(&cm_face, &res.mu, &res.mu);
        assert!(d.mobility >= lower * (1.0 - 1e-12));

        // Energy identity obtained by testing with ψ = μ_k.
        let lhs = fx.grid.inner(
            &res.mu,
            &res.c.iter().zip(&c_old).map(|(a, b)| a - b).collect::<Vec<_>>(),
        );
        let rhs = -(1.0 / 128.0) * d.net();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn assembled_system_properties() {
        let fx = fixture(12, 0.0);
        let id = fx.grid.identity_map();
        let c_old = vec![1.0; 12];
        let c_tilde: Vec<f64> = (0..12).map(|j| 0.5 + 0.1 * j as f64).collect();
        let sys = assemble_diffusion_system(&fx.problem(&id, &c_old, 0.0), &c_tilde).unwrap();
        // Constants lie in the kernel without boundary exchange.
        let ones = vec![1.0; 12];
        assert!(inf_norm(&sys.matrix.matvec(&ones)) < 1e-9);
        // Symmetric and positive on nonconstant vectors.
        let v: Vec<f64> = (0..12).map(|j| (j as f64).sin()).collect();
        assert!(sys.matrix.form(&v, &v) > 0.0);
        // ⟨ξ, 1⟩ = −∫(c̃ − c_old)/τ.
        let total: f64 = sys.rhs.iter().sum();
        let expect = -128.0 * fx.grid.integrate(&c_tilde.iter().map(|c| c - 1.0).collect::<Vec<_>>());
        assert!((total - expect).abs() < 1e-10);
    }

    #[test]
    fn vanishing_mobility_leaves_the_regularization_laplacian() {
        #[derive(Debug)]
        struct Zero;
        impl Mobility for Zero {
            fn eulerian(&self, f: &Mat, _: f64) -> Mat {
                Mat::zeros(f.nrows(), f.nrows())
            }
            fn exponent(&self) -> f64 {
                1.0
            }
        }
        let fx = fixture(10, 0.0);
        let id = fx.grid.identity_map();
        let c_old = vec![1.0; 10];
        let mut p = fx.problem(&id, &c_old, 0.0);
        p.mobility = &Zero;
        let sys = assemble_diffusion_system(&p, &[1.0; 10]).unwrap();
        let h = fx.grid.h();
        let w = fx.ops.face_weights();
        // interior row: η h (−1, 2, −1)/h²
        assert!((sys.matrix.get(4, 4) - 2.0 * 1e-4 * h / (h * h)).abs() < 1e-12);
        assert!((sys.matrix.get(4, 5) + 1e-4 * h / (h * h)).abs() < 1e-12);
        assert!((sys.matrix.get(0, 0) - 1e-4 * w[0] / (h * h)).abs() < 1e-12);
    }

    #[test]
    fn nearly_empty_state_stays_solvable() {
        let fx = fixture(16, 1.0);
        let id = fx.grid.identity_map();
        let c_old = vec![1e-9; 16];
        let res = fixed_point_diffusion(&fx.problem(&id, &c_old, 0.0), &DiffSolveConfig::default()).unwrap();
        assert!(res.min_c > 0.0);
        assert!(res.mass_change > 0.0);
    }
}
