//! Bookkeeping of the discrete energy-dissipation inequality.
//!
//! With `E_k = E₀(χ_k, c_k) − ⟨ℓ_k, χ_k⟩` and `ℓ_0 := ℓ_1`, one step of the
//! staggered scheme satisfies
//!
//! ```text
//! E_k + τR_k + τD_k ≤ E_{k−1} + τX_k − ⟨ℓ_k − ℓ_{k−1}, χ_{k−1}⟩
//! ```
//!
//! where `R_k` is the viscous dissipation, `D_k` the diffusive and boundary
//! dissipation and `X_k = ∫ κ μ_k μ_ext,k dS` the exchange. Summing over steps
//! gives the cumulative slack tracked here.

use serde::{Deserialize, Serialize};

use crate::diffusion::DissipationBreakdown;

/// Per-step quantities entering the inequality, all already multiplied by
/// `τ` where a time integral is meant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EdiInputs {
    /// `E_k`.
    pub energy: f64,
    /// `τ R(χ_{k−1}, δ_τχ_k, c_{k−1})`.
    pub viscous: f64,
    /// `τ ∫ ℳ∇μ_k·∇μ_k`.
    pub mobility: f64,
    /// `τ η Σ|∂^θ μ_k|²`.
    pub regularization: f64,
    /// `τ ∫ κ μ_k² dS`.
    pub boundary: f64,
    /// `τ ∫ κ μ_k μ_ext,k dS`.
    pub exchange: f64,
    /// `⟨ℓ_k − ℓ_{k−1}, χ_{k−1}⟩`.
    pub loading_rate: f64,
}

impl EdiInputs {
    pub fn from_step(energy: f64, viscous: f64, tau: f64, diss: &DissipationBreakdown, loading_rate: f64) -> Self {
        EdiInputs {
            energy,
            viscous,
            mobility: tau * diss.mobility,
            regularization: tau * diss.regularization,
            boundary: tau * diss.boundary_quadratic,
            exchange: tau * diss.boundary_exchange,
            loading_rate,
        }
    }

    pub fn dissipation(&self) -> f64 {
        self.viscous + self.mobility + self.regularization + self.boundary
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub step: usize,
    pub time: f64,
    pub inputs: EdiInputs,
    pub cumulative_dissipation: f64,
    pub cumulative_exchange: f64,
    pub cumulative_loading_rate: f64,
    /// Right side minus left side of the summed inequality.
    pub slack: f64,
    /// Slack of this step's inequality alone.
    pub step_slack: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub initial_energy: f64,
    pub rows: Vec<LedgerRow>,
}

/// Right minus left side of the summed inequality up to step `k`, where
/// `history` holds steps `1..=k`.
pub fn compute_edi_slack(initial_energy: f64, history: &[EdiInputs]) -> f64 {
    let Some(last) = history.last() else {
        return 0.0;
    };
    let (mut rhs, mut lhs) = (initial_energy, last.energy);
    for s in history {
        rhs += s.exchange - s.loading_rate;
        lhs += s.dissipation();
    }
    rhs - lhs
}

impl EnergyLedger {
    pub fn new(initial_energy: f64) -> Self {
        EnergyLedger {
            initial_energy,
            rows: Vec::new(),
        }
    }

    /// Admissible slack deficit `1e−8 (1 + |E_τ(0)|)`.
    pub fn tolerance(&self) -> f64 {
        1e-8 * (1.0 + self.initial_energy.abs())
    }

    pub fn push(&mut self, step: usize, time: f64, inputs: EdiInputs) -> &LedgerRow {
        let (prev_energy, diss, exch, load) = match self.rows.last() {
            Some(r) => (
                r.inputs.energy,
                r.cumulative_dissipation,
                r.cumulative_exchange,
                r.cumulative_loading_rate,
            ),
            None => (self.initial_energy, 0.0, 0.0, 0.0),
        };
        let cumulative_dissipation = diss + inputs.dissipation();
        let cumulative_exchange = exch + inputs.exchange;
        let cumulative_loading_rate = load + inputs.loading_rate;
        let slack = self.initial_energy + cumulative_exchange
            - cumulative_loading_rate
            - (inputs.energy + cumulative_dissipation);
        let step_slack = prev_energy + inputs.exchange - inputs.loading_rate - (inputs.energy + inputs.dissipation());
        self.rows.push(LedgerRow {
            step,
            time,
            inputs,
            cumulative_dissipation,
            cumulative_exchange,
            cumulative_loading_rate,
            slack,
            step_slack,
        });
        self.rows.last().expect("row just pushed")
    }

    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    /// First step whose cumulative slack falls below `−tolerance`.
    pub fn first_violation(&self) -> Option<usize> {
        let tol = self.tolerance();
        self.rows.iter().find(|r| r.slack < -tol).map(|r| r.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(energy: f64) -> EdiInputs {
        EdiInputs {
            energy,
            ..Default::default()
        }
    }

    #[test]
    fn stationary_history_has_zero_slack() {
        let mut ledger = EnergyLedger::new(-1.0);
        for k in 1..=5 {
            ledger.push(k, k as f64 * 0.1, inputs(-1.0));
        }
        assert!(ledger.rows.iter().all(|r| r.slack == 0.0 && r.step_slack == 0.0));
        assert_eq!(ledger.first_violation(), None);
    }

    #[test]
    fn energy_increase_is_detected() {
        let mut ledger = EnergyLedger::new(0.0);
        ledger.push(1, 0.5, inputs(-0.1));
        ledger.push(2, 1.0, inputs(0.2));
        assert_eq!(ledger.first_violation(), Some(2));
        assert!((ledger.min_slack() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn exchange_pays_for_energy_and_loading_costs() {
        let step = EdiInputs {
            energy: 0.3,
            viscous: 0.1,
            mobility: 0.05,
            regularization: 0.01,
            boundary: 0.02,
            exchange: 0.5,
            loading_rate: 0.0,
        };
        // 0 + 0.5 − (0.3 + 0.18)
        assert!((compute_edi_slack(0.0, &[step]) - 0.02).abs() < 1e-15);
        let step = EdiInputs {
            loading_rate: 0.05,
            ..step
        };
        assert!((compute_edi_slack(0.0, &[step]) + 0.03).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn cumulative_slack_is_sum_of_step_slacks(
            e0 in -5.0f64..5.0,
            steps in prop::collection::vec((-5.0f64..5.0, 0.0f64..1.0, 0.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..20),
        ) {
            let mut ledger = EnergyLedger::new(e0);
            let mut history = Vec::new();
            for (k, (e, v, m, x, l)) in steps.into_iter().enumerate() {
                let inp = EdiInputs { energy: e, viscous: v, mobility: m, exchange: x, loading_rate: l, ..Default::default() };
                history.push(inp);
                ledger.push(k + 1, k as f64, inp);
            }
            let sum: f64 = ledger.rows.iter().map(|r| r.step_slack).sum();
            let last = ledger.rows.last().unwrap().slack;
            prop_assert!((sum - last).abs() <= 1e-12 * (1.0 + sum.abs()));
            prop_assert!((compute_edi_slack(e0, &history) - last).abs() <= 1e-12 * (1.0 + last.abs()));
        }
    }
}
