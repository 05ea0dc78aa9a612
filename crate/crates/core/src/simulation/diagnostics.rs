//! Norm series monitored along a run: the a priori quantities that stay
//! bounded uniformly in `τ` and `η`.

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, Side};
use crate::operators::DiscreteOperators;
use crate::tensor::compensated_sum;

/// `∫ c log⁺c dx + ‖c‖_{L¹}`, an equivalent norm on `L log L`.
pub fn llogl_norm(grid: &Grid, c: &[f64]) -> f64 {
    let h = grid.h();
    h * compensated_sum(c.iter().map(|&c| {
        let a = c.abs();
        let log_plus = if a > 1.0 { a.ln() } else { 0.0 };
        a * log_plus + a
    }))
}

/// `‖c‖_{L^q}` by the midpoint rule.
pub fn lp_norm(grid: &Grid, c: &[f64], exponent: f64) -> f64 {
    let integral = grid.h() * compensated_sum(c.iter().map(|c| c.abs().powf(exponent)));
    integral.powf(1.0 / exponent)
}

/// `‖∇(c^power)‖_{L²}` from face differences of the cell values.
pub fn grad_power_norm(ops: &DiscreteOperators, c: &[f64], power: f64) -> f64 {
    let u: Vec<f64> = c.iter().map(|c| c.max(0.0).powf(power)).collect();
    let g = ops.face_gradients(&u);
    compensated_sum(g.iter().zip(ops.face_weights()).map(|(g, w)| w * g * g)).sqrt()
}

/// `‖j‖_{L^s}` of a face flux with the face quadrature weights.
pub fn flux_ls_norm(ops: &DiscreteOperators, flux: &[f64], s: f64) -> f64 {
    let integral = compensated_sum(flux.iter().zip(ops.face_weights()).map(|(j, w)| w * j.abs().powf(s)));
    integral.powf(1.0 / s)
}

/// `ℳ∇μ` on interior faces, given the face mobilities.
pub fn face_flux(ops: &DiscreteOperators, face_mobility: &[f64], mu: &[f64]) -> Vec<f64> {
    ops.face_gradients(mu)
        .iter()
        .zip(face_mobility)
        .map(|(g, m)| m * g)
        .collect()
}

/// `‖√κ μ‖_{L²(∂Ω)}`.
pub fn boundary_norm(grid: &Grid, mu: &[f64]) -> f64 {
    [Side::Left, Side::Right]
        .iter()
        .map(|&s| grid.kappa(s) * mu[grid.boundary_cell(s)].powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Diagnostic norms of one state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub time: f64,
    pub min_det: f64,
    pub min_c: f64,
    pub llogl: f64,
    /// `‖c‖_{L^{2+r}}^{2+r}`.
    pub lp_power: f64,
    /// `‖∇c^{m/2}‖²_{L²}`.
    pub grad_c_m2: f64,
    /// `‖∇c^{m/2+ω}‖²_{L²}` for `ω = (1+r)/2`.
    pub grad_c_half: f64,
    /// `‖∇c^{m/2+ω}‖²_{L²}` for `ω = 1+r`.
    pub grad_c_full: f64,
    /// `‖ℳ∇μ‖_{L^s}`; zero for the initial state.
    pub flux_ls: f64,
    pub boundary_mu: f64,
}

impl DiagnosticRow {
    pub fn values(&self) -> [f64; 9] {
        [
            self.min_det,
            self.min_c,
            self.llogl,
            self.lp_power,
            self.grad_c_m2,
            self.grad_c_half,
            self.grad_c_full,
            self.flux_ls,
            self.boundary_mu,
        ]
    }

    /// Finite and below `1e12` in absolute value.
    pub fn is_bounded(&self) -> bool {
        self.values().iter().all(|v| v.is_finite() && v.abs() < 1e12)
    }
}

/// Exponents used for the norm series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticExponents {
    pub m: f64,
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub exponents: DiagnosticExponents,
    pub rows: Vec<DiagnosticRow>,
}

impl DiagnosticSeries {
    pub fn new(exponents: DiagnosticExponents) -> Self {
        DiagnosticSeries {
            exponents,
            rows: Vec::new(),
        }
    }

    /// Evaluates every norm at one state; `flux` and `mu` are absent for
    /// the initial state.
    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        grid: &Grid,
        ops: &DiscreteOperators,
        step: usize,
        time: f64,
        chi: &[f64],
        c: &[f64],
        mu: Option<&[f64]>,
        flux: Option<&[f64]>,
    ) -> &DiagnosticRow {
        let DiagnosticExponents { m, r, s } = self.exponents;
        let sq = |v: f64| v * v;
        let row = DiagnosticRow {
            step,
            time,
            min_det: ops.grad(chi).into_iter().fold(f64::INFINITY, f64::min),
            min_c: c.iter().copied().fold(f64::INFINITY, f64::min),
            llogl: llogl_norm(grid, c),
            lp_power: lp_norm(grid, c, 2.0 + r).powf(2.0 + r),
            grad_c_m2: sq(grad_power_norm(ops, c, m / 2.0)),
            grad_c_half: sq(grad_power_norm(ops, c, m / 2.0 + (1.0 + r) / 2.0)),
            grad_c_full: sq(grad_power_norm(ops, c, m / 2.0 + 1.0 + r)),
            flux_ls: flux.map_or(0.0, |j| flux_ls_norm(ops, j, s)),
            boundary_mu: mu.map_or(0.0, |mu| boundary_norm(grid, mu)),
        };
        self.rows.push(row);
        self.rows.last().expect("row just pushed")
    }

    pub fn all_bounded(&self) -> bool {
        self.rows.iter().all(DiagnosticRow::is_bounded)
    }

    /// Smallest determinant over the run: the empirical lower bound.
    pub fn min_det(&self) -> f64 {
        self.rows.iter().map(|r| r.min_det).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DirichletSides;

    fn setup(n: usize) -> (Grid, DiscreteOperators) {
        let g = Grid::uniform(n).unwrap();
        let o = DiscreteOperators::new(&g, 1);
        (g, o)
    }

    #[test]
    fn constant_concentration() {
        let (g, o) = setup(20);
        let gamma: f64 = 2.5;
        let c = vec![gamma; 20];
        assert!((llogl_norm(&g, &c) - (gamma * gamma.ln() + gamma)).abs() < 1e-14);
        assert!((llogl_norm(&g, &[0.5; 20]) - 0.5).abs() < 1e-15);
        assert_eq!(grad_power_norm(&o, &[1.0; 20], 0.5), 0.0);
        assert!((lp_norm(&g, &c, 3.0) - gamma).abs() < 1e-13);
    }

    #[test]
    fn linear_profile_has_unit_gradient() {
        for n in [8, 32, 128] {
            let (g, o) = setup(n);
            let c = g.cell_centers();
            let norm = grad_power_norm(&o, &c, 1.0);
            assert!((norm * norm - 1.0).abs() < 1e-12, "n = {n}: {norm}");
        }
    }

    #[test]
    fn quadratic_profile_converges_at_second_order() {
        // ∫₀¹ |d/dx x²|² dx = 4/3
        let errors: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let (g, o) = setup(n);
                let c: Vec<f64> = g.cell_centers().iter().map(|x| x.sqrt()).collect();
                (grad_power_norm(&o, &c, 4.0).powi(2) - 4.0 / 3.0).abs()
            })
            .collect();
        assert!(errors[1] < errors[0] / 2.0 && errors[2] < errors[1] / 2.0, "{errors:?}");
    }

    #[test]
    fn flux_and_boundary_norms() {
        let (_, o) = setup(10);
        let flux = vec![2.0; 9];
        // face weights sum to one
        assert!((flux_ls_norm(&o, &flux, 1.5) - 2.0).abs() < 1e-13);
        let g = Grid::new(10, DirichletSides::Left, 4.0, 1.0).unwrap();
        let mut mu = vec![0.0; 10];
        mu[0] = 1.0;
        mu[9] = 3.0;
        assert!((boundary_norm(&g, &mu) - 13.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn series_records_bounded_rows() {
        let (g, o) = setup(12);
        let mut series = DiagnosticSeries::new(DiagnosticExponents { m: 1.0, r: 0.0, s: 1.5 });
        let chi = g.identity_map();
        let c: Vec<f64> = g.cell_centers().iter().map(|x| 1.0 + x).collect();
        let row = *series.record(&g, &o, 0, 0.0, &chi, &c, None, None);
        assert!((row.min_det - 1.0).abs() < 1e-12);
        assert!(row.is_bounded());
        assert_eq!(series.min_det(), row.min_det);
    }
}
