//! Stored time-discrete states and their interpolants in time.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

/// Which interpolant of the nodal sequence `(χ_k)` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolant {
    /// `χ̄(t) = χ_k` on `(t_{k−1}, t_k]`.
    RightConstant,
    /// `χ̲(t) = χ_{k−1}` on `[t_{k−1}, t_k)`.
    LeftConstant,
    /// `χ̂(t)` affine between `χ_{k−1}` and `χ_k`.
    Affine,
}

/// States `(χ_k, c_k, μ_k)` for `k = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub tau: f64,
    pub chi: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    /// `μ_k` for `k ≥ 1`; `mu[0]` is the initial potential, `None` on empty
    /// cells where `∂_cΦ` is undefined.
    pub mu: Vec<Vec<Option<f64>>>,
}

/// Norms of interpolant gaps and rates over `[0, t_N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `‖χ̂ − χ̲‖_{L²(0,T;X)}`.
    pub affine_left_gap: f64,
    /// `‖χ̂ − χ̄‖_{L²(0,T;X)}`.
    pub affine_right_gap: f64,
    /// `‖χ̄ − χ̲‖_{L^∞(0,T;X)}`.
    pub constant_gap_sup: f64,
    /// `‖dχ̂/dt‖_{L²(0,T;X)}`.
    pub rate_norm: f64,
}

impl GapReport {
    /// `‖χ̂ − χ̲‖ ≤ (τ/√3)‖dχ̂/dt‖` and `sup_k ‖χ_k − χ_{k−1}‖ ≤ τ^{1/2}‖dχ̂/dt‖`.
    pub fn holds(&self, tau: f64) -> bool {
        let slack = 1.0 + 1e-12;
        self.affine_left_gap <= slack * tau / 3f64.sqrt() * self.rate_norm
            && self.affine_right_gap <= slack * tau / 3f64.sqrt() * self.rate_norm
            && self.constant_gap_sup <= slack * tau.sqrt() * self.rate_norm
    }
}

/// Two-point Gauss rule on `[0, 1]`.
const GAUSS: [(f64, f64); 2] = [(0.211_324_865_405_187_1, 0.5), (0.788_675_134_594_812_9, 0.5)];

impl TrajectoryRecord {
    pub fn new(tau: f64, chi0: Vec<f64>, c0: Vec<f64>, mu0: Vec<Option<f64>>) -> Self {
        TrajectoryRecord {
            tau,
            chi: vec![chi0],
            c: vec![c0],
            mu: vec![mu0],
        }
    }

    pub fn push(&mut self, chi: Vec<f64>, c: Vec<f64>, mu: Vec<f64>) {
        self.chi.push(chi);
        self.c.push(c);
        self.mu.push(mu.into_iter().map(Some).collect());
    }

    pub fn n_steps(&self) -> usize {
        self.chi.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    /// Interval index `k` with `t ∈ (t_{k−1}, t_k]`, clamped to `1..=N`.
    fn interval(&self, t: f64) -> usize {
        let k = (t / self.tau).ceil() as isize;
        k.clamp(1, self.n_steps().max(1) as isize) as usize
    }

    pub fn chi_at(&self, which: Interpolant, t: f64) -> Vec<f64> {
        if self.n_steps() == 0 {
            return self.chi[0].clone();
        }
        let k = self.interval(t);
        match which {
            Interpolant::RightConstant => self.chi[k].clone(),
            Interpolant::LeftConstant => self.chi[k - 1].clone(),
            Interpolant::Affine => {
                let s = ((t - self.time(k - 1)) / self.tau).clamp(0.0, 1.0);
                self.chi[k - 1]
                    .iter()
                    .zip(&self.chi[k])
                    .map(|(a, b)| (1.0 - s) * a + s * b)
                    .collect()
            }
        }
    }

    /// `δ_τχ_k = (χ_k − χ_{k−1})/τ` for `k ≥ 1`.
    pub fn rate(&self, k: usize) -> Vec<f64> {
        self.chi[k]
            .iter()
            .zip(&self.chi[k - 1])
            .map(|(a, b)| (a - b) / self.tau)
            .collect()
    }

    /// Gap norms with the spatial norm `X` given by `norm`, integrated in
    /// time by two-point Gauss quadrature per step.
    pub fn gap_report(&self, norm: impl Fn(&[f64]) -> f64) -> GapReport {
        let tau = self.tau;
        let (mut left, mut right, mut sup, mut rate) = (0.0, 0.0, 0.0f64, 0.0);
        for k in 1..=self.n_steps() {
            let t0 = self.time(k - 1);
            let rate_norm = norm(&self.rate(k));
            let step = norm(
                &self.chi[k]
                    .iter()
                    .zip(&self.chi[k - 1])
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
            sup = sup.max(step);
            rate += tau * rate_norm * rate_norm;
            for (s, w) in GAUSS {
                let hat = self.chi_at(Interpolant::Affine, t0 + s * tau);
                let diff = |other: &[f64]| norm(&hat.iter().zip(other).map(|(a, b)| a - b).collect::<Vec<_>>());
                left += w * tau * diff(&self.chi[k - 1]).powi(2);
                right += w * tau * diff(&self.chi[k]).powi(2);
            }
        }
        GapReport {
            affine_left_gap: left.sqrt(),
            affine_right_gap: right.sqrt(),
            constant_gap_sup: sup,
            rate_norm: rate.sqrt(),
        }
    }

    /// Gap norms with `X` the nodal `L²` norm of `grid`.
    pub fn l2_gap_report(&self, grid: &Grid) -> GapReport {
        self.gap_report(|u| grid.nodal_l2_norm(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(states: &[Vec<f64>], tau: f64) -> TrajectoryRecord {
        let n = states[0].len();
        let mut r = TrajectoryRecord::new(tau, states[0].clone(), vec![1.0; n], vec![Some(0.0); n]);
        for s in &states[1..] {
            r.push(s.clone(), vec![1.0; n], vec![0.0; n]);
        }
        r
    }

    #[test]
    fn interpolants_at_interior_and_nodal_times() {
        let r = record(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, 2.0]], 0.5);
        assert_eq!(r.chi_at(Interpolant::RightConstant, 0.25), vec![1.0, 2.0]);
        assert_eq!(r.chi_at(Interpolant::LeftConstant, 0.25), vec![0.0, 0.0]);
        assert_eq!(r.chi_at(Interpolant::Affine, 0.25), vec![0.5, 1.0]);
        // t_k belongs to the interval ending there
        assert_eq!(r.chi_at(Interpolant::RightConstant, 0.5), vec![1.0, 2.0]);
        assert_eq!(r.chi_at(Interpolant::Affine, 0.75), vec![2.0, 2.0]);
        assert_eq!(r.rate(2), vec![4.0, 0.0]);
    }

    #[test]
    fn gap_bound_is_attained() {
        let r = record(&[vec![0.0], vec![1.0], vec![1.5]], 0.25);
        let g = r.gap_report(|u| u[0].abs());
        let bound = 0.25 / 3f64.sqrt() * g.rate_norm;
        assert!((g.affine_left_gap - bound).abs() < 1e-14);
        assert!(g.holds(0.25));
    }

    proptest! {
        #[test]
        fn gap_inequalities_hold(
            states in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 2..10),
            tau in 1e-3f64..0.5,
        ) {
            let r = record(&states, tau);
            let g = r.gap_report(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt());
            prop_assert!(g.holds(tau), "{g:?}");
        }
    }
}
