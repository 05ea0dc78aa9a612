//! Finite-difference operators on the uniform 1-D grid.
//!
//! * `∇χ` at cell centers: `F_j = (χ_{j+1} − χ_j)/h`.
//! * `D²χ` at nodes: central second differences inside, second-order
//!   one-sided stencils `(2, −5, 4, −1)/h²` at both ends, trapezoid weights.
//!   Cell-centered second differences would leave the alternating mode
//!   `χ_i = (−1)^i` invisible to the hyperstress.
//! * `θ`-th differences of cell fields on the `n − θ` windows of `θ + 1`
//!   consecutive cells, each with weight `h`; the two boundary windows absorb
//!   an extra `θh/2` so the weights sum to `|Ω| = 1`. For `θ = 1` these are
//!   the face gradients.

use crate::grid::{Grid, Side};
use crate::tensor::compensated_sum;

/// One row of a sparse nodal stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub entries: Vec<(usize, f64)>,
}

impl Stencil {
    pub fn apply(&self, u: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| w * u[i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperators {
    n_cells: usize,
    h: f64,
    theta: usize,
    hessian_rows: Vec<Stencil>,
    hessian_weights: Vec<f64>,
    difference_coeffs: Vec<f64>,
    difference_weights: Vec<f64>,
    face_weights: Vec<f64>,
}

fn binomial_difference(order: usize, h: f64) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    for _ in 0..order {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] -= c;
            next[i + 1] += c;
        }
        coeffs = next;
    }
    let scale = h.powi(order as i32);
    coeffs.into_iter().map(|c| c / scale).collect()
}

fn window_weights(n_cells: usize, order: usize, h: f64) -> Vec<f64> {
    let windows = n_cells - order;
    let mut w = vec![h; windows];
    w[0] += 0.5 * order as f64 * h;
    w[windows - 1] += 0.5 * order as f64 * h;
    w
}

impl DiscreteOperators {
    /// Panics if the grid has fewer than `θ + 2` cells; configuration
    /// validation rejects such grids first.
    pub fn new(grid: &Grid, theta: usize) -> Self {
        let n = grid.n_cells();
        let h = grid.h();
        assert!(
            theta >= 1 && n >= theta + 2,
            "grid of {n} cells is too coarse for θ = {theta}"
        );
        let h2 = h * h;
        let mut hessian_rows = Vec::with_capacity(n + 1);
        hessian_rows.push(Stencil {
            entries: vec![(0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2)],
        });
        for i in 1..n {
            hessian_rows.push(Stencil {
                entries: vec![(i - 1, 1.0 / h2), (i, -2.0 / h2), (i + 1, 1.0 / h2)],
            });
        }
        hessian_rows.push(Stencil {
            entries: vec![(n, 2.0 / h2), (n - 1, -5.0 / h2), (n - 2, 4.0 / h2), (n - 3, -1.0 / h2)],
        });
        let mut hessian_weights = vec![h; n + 1];
        hessian_weights[0] = 0.5 * h;
        hessian_weights[n] = 0.5 * h;

        DiscreteOperators {
            n_cells: n,
            h,
            theta,
            hessian_rows,
            hessian_weights,
            difference_coeffs: binomial_difference(theta, h),
            difference_weights: window_weights(n, theta, h),
            face_weights: window_weights(n, 1, h),
        }
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Deformation gradients `F_j` at cell centers.
    pub fn grad(&self, chi: &[f64]) -> Vec<f64> {
        chi.windows(2).map(|w| (w[1] - w[0]) / self.h).collect()
    }

    /// Second derivatives `D²χ` at the nodes.
    pub fn hess(&self, chi: &[f64]) -> Vec<f64> {
        self.hessian_rows.iter().map(|s| s.apply(chi)).collect()
    }

    pub fn hessian_rows(&self) -> &[Stencil] {
        &self.hessian_rows
    }

    pub fn hessian_weights(&self) -> &[f64] {
        &self.hessian_weights
    }

    /// Adds `Σ_i w_i s_i ∂(D²χ)_i/∂χ` to `out`, i.e. the transpose of the
    /// weighted Hessian operator applied to nodal stresses `s`.
    pub fn hess_transpose_add(&self, stress: &[f64], out: &mut [f64]) {
        for ((row, w), s) in self.hessian_rows.iter().zip(&self.hessian_weights).zip(stress) {
            for &(i, c) in &row.entries {
                out[i] += w * s * c;
            }
        }
    }

    /// First differences of a cell field across the `n − 1` interior faces.
    pub fn face_gradients(&self, u: &[f64]) -> Vec<f64> {
        u.windows(2).map(|w| (w[1] - w[0]) / self.h).collect()
    }

    pub fn face_weights(&self) -> &[f64] {
        &self.face_weights
    }

    /// `θ`-th differences of a cell field, one per window.
    pub fn theta_differences(&self, u: &[f64]) -> Vec<f64> {
        u.windows(self.theta + 1)
            .map(|w| w.iter().zip(&self.difference_coeffs).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn difference_coeffs(&self) -> &[f64] {
        &self.difference_coeffs
    }

    pub fn difference_weights(&self) -> &[f64] {
        &self.difference_weights
    }

    /// `Σ_{|β|=θ} ∫ ∂^β μ ∂^β ψ dx`.
    pub fn regularization_form(&self, mu: &[f64], psi: &[f64]) -> f64 {
        let a = self.theta_differences(mu);
        let b = self.theta_differences(psi);
        compensated_sum(
            a.iter()
                .zip(&b)
                .zip(&self.difference_weights)
                .map(|((x, y), w)| w * x * y),
        )
    }

    /// `∫ a ∇μ·∇ψ dx` with face coefficients `a`.
    pub fn weighted_gradient_form(&self, a_face: &[f64], mu: &[f64], psi: &[f64]) -> f64 {
        let gm = self.face_gradients(mu);
        let gp = self.face_gradients(psi);
        compensated_sum(
            gm.iter()
                .zip(&gp)
                .zip(a_face.iter().zip(&self.face_weights))
                .map(|((x, y), (a, w))| w * a * x * y),
        )
    }
}

/// `∫_{∂Ω} κ μ ψ dS`, evaluated with the boundary-adjacent cell values.
pub fn robin_boundary_form(grid: &Grid, mu: &[f64], psi: &[f64]) -> f64 {
    [Side::Left, Side::Right]
        .into_iter()
        .map(|s| {
            let j = grid.boundary_cell(s);
            grid.kappa(s) * mu[j] * psi[j]
        })
        .sum()
}

pub fn regularization_form(ops: &DiscreteOperators, mu: &[f64], psi: &[f64]) -> f64 {
    ops.regularization_form(mu, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DirichletSides;
    use proptest::prelude::*;

    fn ops(n: usize, theta: usize) -> (Grid, DiscreteOperators) {
        let g = Grid::uniform(n).unwrap();
        let o = DiscreteOperators::new(&g, theta);
        (g, o)
    }

    #[test]
    fn gradient_of_identity_is_one_everywhere() {
        let (g, o) = ops(17, 1);
        assert!(o.grad(&g.identity_map()).iter().all(|f| (f - 1.0).abs() < 1e-13));
    }

    #[test]
    fn hessian_annihilates_affine_maps() {
        let (g, o) = ops(12, 1);
        let chi: Vec<f64> = g.nodes().iter().map(|x| 1.7 * x - 0.3).collect();
        assert!(o.hess(&chi).iter().all(|s| s.abs() < 1e-10));
    }

    #[test]
    fn hessian_is_exact_on_quadratics_including_boundary_rows() {
        let (g, o) = ops(10, 1);
        let chi: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        assert!(o.hess(&chi).iter().all(|s| (s - 2.0).abs() < 1e-9));
    }

    #[test]
    fn hessian_sees_the_alternating_mode() {
        let (_, o) = ops(8, 1);
        let chi: Vec<f64> = (0..9).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(o.hess(&chi).iter().all(|s| s.abs() > 1.0));
    }

    #[test]
    fn regularization_of_a_constant_vanishes() {
        let (_, o) = ops(9, 1);
        let mu: Vec<f64> = (0..9).map(|j| (j as f64).sin()).collect();
        assert_eq!(o.regularization_form(&mu, &[1.0; 9]), 0.0);
    }

    #[test]
    fn regularization_of_linear_potential_is_one() {
        // ∫ (μ')² = 1 for μ = x; the lumped face weights make this exact.
        for n in [4, 7, 64] {
            let (g, o) = ops(n, 1);
            let x = g.cell_centers();
            assert!((o.regularization_form(&x, &x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn second_order_regularization_kernel_is_affine() {
        let (g, o) = ops(10, 2);
        let x = g.cell_centers();
        let affine: Vec<f64> = x.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!(o.regularization_form(&affine, &affine).abs() < 1e-16);
        let quad: Vec<f64> = x.iter().map(|x| x * x).collect();
        // ∫ (2)² = 4
        assert!((o.regularization_form(&quad, &quad) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn robin_form_without_permeability_vanishes() {
        let g = Grid::uniform(6).unwrap();
        assert_eq!(robin_boundary_form(&g, &[2.0; 6], &[3.0; 6]), 0.0);
        let g = Grid::new(6, DirichletSides::Left, 0.5, 2.0).unwrap();
        let mu = [1.0, 0.0, 0.0, 0.0, 0.0, -1.0];
        assert_eq!(robin_boundary_form(&g, &mu, &mu), 2.5);
    }

    #[test]
    fn hess_transpose_matches_directional_derivative() {
        let (g, o) = ops(9, 1);
        let stress: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).cos()).collect();
        let mut out = vec![0.0; g.n_nodes()];
        o.hess_transpose_add(&stress, &mut out);
        let v: Vec<f64> = (0..10).map(|i| (i as f64 * 1.3).sin()).collect();
        let hv = o.hess(&v);
        let lhs: f64 = out.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = hv
            .iter()
            .zip(&stress)
            .zip(o.hessian_weights())
            .map(|((a, b), w)| a * b * w)
            .sum();
        assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
    }

    proptest! {
        #[test]
        fn regularization_is_symmetric_and_nonnegative(
            theta in 1usize..4,
            mu in prop::collection::vec(-5.0f64..5.0, 12),
            psi in prop::collection::vec(-5.0f64..5.0, 12),
        ) {
            let (_, o) = ops(12, theta);
            let ab = o.regularization_form(&mu, &psi);
            let ba = o.regularization_form(&psi, &mu);
            prop_assert!((ab - ba).abs() <= 1e-9 * ab.abs().max(1.0));
            prop_assert!(o.regularization_form(&mu, &mu) >= 0.0);
        }

        #[test]
        fn operators_are_linear(
            a in prop::collection::vec(-1.0f64..1.0, 9),
            b in prop::collection::vec(-1.0f64..1.0, 9),
            s in -3.0f64..3.0,
        ) {
            let (_, o) = ops(8, 1);
            let comb: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            for (op_c, (op_a, op_b)) in o.hess(&comb).iter().zip(o.hess(&a).iter().zip(o.hess(&b))) {
                prop_assert!((op_c - op_a - s * op_b).abs() < 1e-9);
            }
            for (op_c, (op_a, op_b)) in o.grad(&comb).iter().zip(o.grad(&a).iter().zip(o.grad(&b))) {
                prop_assert!((op_c - op_a - s * op_b).abs() < 1e-11);
            }
        }
    }
}
