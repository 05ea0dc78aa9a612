//! Closed-form time functions and the step-averaged loads built from them.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::grid::{BoundaryTag, Grid, Side};

/// Named presets; all are Lipschitz in time and have exact averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// `offset + slope·t`.
    Ramp {
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `offset + amplitude·sin(2π·frequency·t + phase)`.
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl Default for TimeFunction {
    fn default() -> Self {
        TimeFunction::zero()
    }
}

impl TimeFunction {
    pub fn zero() -> Self {
        TimeFunction::Constant { value: 0.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeFunction::Constant { value } => value,
            TimeFunction::Ramp { slope, offset } => offset + slope * t,
            TimeFunction::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => offset + amplitude * (TAU * frequency * t + phase).sin(),
        }
    }

    /// Exact average `(1/(t1 − t0)) ∫_{t0}^{t1} value(t) dt`.
    pub fn mean(&self, t0: f64, t1: f64) -> f64 {
        let dt = t1 - t0;
        match *self {
            TimeFunction::Constant { value } => value,
            TimeFunction::Ramp { slope, offset } => offset + slope * 0.5 * (t0 + t1),
            TimeFunction::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                let w = TAU * frequency;
                if w == 0.0 || dt == 0.0 {
                    return offset + amplitude * phase.sin();
                }
                // cos a − cos b = 2 sin((a+b)/2) sin((b−a)/2) avoids cancellation
                let mid = w * 0.5 * (t0 + t1) + phase;
                let half = 0.5 * w * dt;
                offset + amplitude * 2.0 * mid.sin() * half.sin() / (w * dt)
            }
        }
    }

    pub fn lipschitz_constant(&self) -> f64 {
        match *self {
            TimeFunction::Constant { .. } => 0.0,
            TimeFunction::Ramp { slope, .. } => slope.abs(),
            TimeFunction::Sine {
                amplitude, frequency, ..
            } => (amplitude * TAU * frequency).abs(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            TimeFunction::Constant { value } => value.is_finite(),
            TimeFunction::Ramp { slope, offset } => slope.is_finite() && offset.is_finite(),
            TimeFunction::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => [amplitude, frequency, phase, offset].iter().all(|v| v.is_finite()),
        }
    }
}

/// Spatially uniform body force and end traction, both time dependent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub body_force: TimeFunction,
    pub traction: TimeFunction,
}

/// The functional `ℓ_k`: body force density and traction at each Neumann end.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadSample {
    pub body_force: f64,
    pub traction_left: f64,
    pub traction_right: f64,
}

impl LoadSpec {
    /// `ℓ_k = (1/τ) ∫_{t_{k−1}}^{t_k} ℓ(t) dt`.
    pub fn step_average(&self, grid: &Grid, t0: f64, t1: f64) -> LoadSample {
        self.sample(grid, self.body_force.mean(t0, t1), self.traction.mean(t0, t1))
    }

    pub fn at(&self, grid: &Grid, t: f64) -> LoadSample {
        self.sample(grid, self.body_force.value(t), self.traction.value(t))
    }

    fn sample(&self, grid: &Grid, f: f64, g: f64) -> LoadSample {
        let on = |side| {
            if grid.tag(side) == BoundaryTag::NeumannMech {
                g
            } else {
                0.0
            }
        };
        LoadSample {
            body_force: f,
            traction_left: on(Side::Left),
            traction_right: on(Side::Right),
        }
    }
}

impl LoadSample {
    /// `⟨ℓ, χ⟩ = ∫ f χ dx + Σ_{Γ_N} g χ`, trapezoid rule for the body force.
    pub fn apply(&self, grid: &Grid, chi: &[f64]) -> f64 {
        let h = grid.h();
        let body = crate::tensor::compensated_sum(chi.windows(2).map(|w| 0.5 * h * (w[0] + w[1])));
        let n = grid.n_cells();
        self.body_force * body + self.traction_left * chi[0] + self.traction_right * chi[n]
    }

    /// Nodal covector of the linear functional `χ ↦ ⟨ℓ, χ⟩`.
    pub fn covector(&self, grid: &Grid) -> Vec<f64> {
        let h = grid.h();
        let n = grid.n_cells();
        let mut v = vec![self.body_force * h; n + 1];
        v[0] = 0.5 * self.body_force * h + self.traction_left;
        v[n] = 0.5 * self.body_force * h + self.traction_right;
        v
    }

    pub fn sub(&self, other: &LoadSample) -> LoadSample {
        LoadSample {
            body_force: self.body_force - other.body_force,
            traction_left: self.traction_left - other.traction_left,
            traction_right: self.traction_right - other.traction_right,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_load_does_no_work() {
        let g = Grid::uniform(8).unwrap();
        let l = LoadSpec::default().step_average(&g, 0.0, 0.1);
        assert_eq!(l.apply(&g, &g.identity_map()), 0.0);
    }

    #[test]
    fn constant_body_force_on_identity() {
        let g = Grid::uniform(10).unwrap();
        let spec = LoadSpec {
            body_force: TimeFunction::Constant { value: 3.0 },
            ..Default::default()
        };
        let l = spec.step_average(&g, 0.0, 1.0);
        assert!((l.apply(&g, &g.identity_map()) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn ramp_average_is_midpoint_value() {
        let f = TimeFunction::Ramp {
            slope: 1.0,
            offset: 0.0,
        };
        assert!((f.mean(0.0, 0.25) - 0.125).abs() < 1e-16);
    }

    #[test]
    fn sine_average_matches_quadrature() {
        let f = TimeFunction::Sine {
            amplitude: 0.5,
            frequency: 1.0,
            phase: 0.3,
            offset: 0.1,
        };
        let (t0, t1) = (0.2, 0.45);
        let n = 20_000;
        let dt = (t1 - t0) / n as f64;
        let quad: f64 = (0..n).map(|i| f.value(t0 + (i as f64 + 0.5) * dt)).sum::<f64>() / n as f64;
        assert!((f.mean(t0, t1) - quad).abs() < 1e-9);
    }

    #[test]
    fn traction_acts_only_on_neumann_ends() {
        let g = Grid::uniform(4).unwrap();
        let spec = LoadSpec {
            traction: TimeFunction::Constant { value: 2.0 },
            ..Default::default()
        };
        let l = spec.at(&g, 0.0);
        assert_eq!((l.traction_left, l.traction_right), (0.0, 2.0));
        assert_eq!(l.apply(&g, &g.identity_map()), 2.0);
    }

    #[test]
    fn covector_reproduces_the_functional() {
        let g = Grid::new(6, crate::grid::DirichletSides::Right, 0.0, 0.0).unwrap();
        let l = LoadSample {
            body_force: 0.7,
            traction_left: -1.2,
            traction_right: 0.0,
        };
        let chi: Vec<f64> = (0..7).map(|i| (i as f64 * 0.4).exp()).collect();
        let dot: f64 = l.covector(&g).iter().zip(&chi).map(|(a, b)| a * b).sum();
        assert!((dot - l.apply(&g, &chi)).abs() < 1e-13);
    }

    #[test]
    fn presets_deserialize_from_tagged_json() {
        let f: TimeFunction = serde_json::from_str(r#"{"kind":"ramp","slope":0.5}"#).unwrap();
        assert_eq!(
            f,
            TimeFunction::Ramp {
                slope: 0.5,
                offset: 0.0
            }
        );
        let s: TimeFunction = serde_json::from_str(r#"{"kind":"sine","amplitude":1,"frequency":2}"#).unwrap();
        assert_eq!(s.lipschitz_constant(), 2.0 * TAU);
    }
}
