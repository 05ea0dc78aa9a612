use serde::{Deserialize, Serialize};

use super::exponents::{CaseTag, MaterialExponents};
use crate::error::{Error, Result};
use crate::tensor::{cofactor, ddot, det, Mat};

/// Free energy density `Φ(F, c)` together with the derivatives the solvers
/// need. Implementations are extended by `+∞` for `det F ≤ 0` or `c < 0`.
pub trait FreeEnergy: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;

    fn phi(&self, f: &Mat, c: f64) -> f64;

    /// First Piola–Kirchhoff stress `∂_F Φ`.
    fn dphi_df(&self, f: &Mat, c: f64) -> Mat;

    /// Chemical potential `∂_c Φ`.
    fn dphi_dc(&self, f: &Mat, c: f64) -> f64;

    fn d2phi_dcc(&self, f: &Mat, c: f64) -> f64;

    fn d2phi_dfc(&self, f: &Mat, c: f64) -> Mat;

    fn exponents(&self) -> MaterialExponents;

    /// `(C_Φ0, C_Φ1)` with `Φ(F,c) ≥ C_Φ0 |F| + C_Φ0 / (det F)^q − C_Φ1`.
    fn lower_bound_constants(&self, d: usize) -> (f64, f64);

    /// A concentration at which energy and potential are finite for every
    /// admissible `F`; used as the seed of the potential inversion.
    fn reference_concentration(&self) -> f64;
}

/// Compressible neo-Hookean density
/// `a|F|² + b (det F)^{-q} + e (det F)² − n₀`, with `e` and `n₀` chosen so the
/// reference configuration is stress free with zero energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressibleNeoHookean {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    e: f64,
}

impl CompressibleNeoHookean {
    pub fn calibrated(a: f64, b: f64, q: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && q > 0.0) {
            return Err(Error::InvalidParams(format!(
                "elastic coefficients must be positive (a = {a}, b = {b}, q = {q})"
            )));
        }
        let e = 0.5 * (q * b - 2.0 * a);
        if e < 0.0 {
            return Err(Error::InvalidParams(format!(
                "stress-free calibration needs q·b ≥ 2a (q·b = {}, 2a = {})",
                q * b,
                2.0 * a
            )));
        }
        Ok(CompressibleNeoHookean { a, b, q, e })
    }

    pub fn volumetric_coefficient(&self) -> f64 {
        self.e
    }

    fn offset(&self, d: usize) -> f64 {
        self.a * d as f64 + self.b + self.e
    }

    pub fn energy(&self, f: &Mat) -> f64 {
        let j = det(f);
        if j <= 0.0 {
            return f64::INFINITY;
        }
        self.a * ddot(f, f) + self.b * j.powf(-self.q) + self.e * j * j - self.offset(f.nrows())
    }

    pub fn stress(&self, f: &Mat) -> Mat {
        let j = det(f);
        let dj = -self.q * self.b * j.powf(-self.q - 1.0) + 2.0 * self.e * j;
        f * (2.0 * self.a) + cofactor(f) * dj
    }

    /// `(C_Φ0, C_Φ1)` for the elastic part alone, from `a|F|² ≥ 2a|F| − a`.
    fn lower_bound(&self, d: usize) -> (f64, f64) {
        ((2.0 * self.a).min(self.b), self.a + self.offset(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiotParams {
    pub m_b: f64,
    pub beta: f64,
    pub k: f64,
    pub c_eq: f64,
    pub a: f64,
    pub b: f64,
    pub q: f64,
}

impl Default for BiotParams {
    fn default() -> Self {
        BiotParams {
            m_b: 1.0,
            beta: 1.0,
            k: 1.0,
            c_eq: 1.0,
            a: 0.5,
            b: 1.0,
            q: 2.0,
        }
    }
}

/// Biot free energy with Boltzmann entropy:
/// `Φ_el(F) + ½ M_B (c − c_eq − β(det F − 1))² + k c (log(c/c_eq) − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiotMaterial {
    pub params: BiotParams,
    elastic: CompressibleNeoHookean,
}

pub fn biot_material(params: BiotParams) -> Result<BiotMaterial> {
    let BiotParams { m_b, beta, k, c_eq, .. } = params;
    for (name, v) in [("M_B", m_b), ("beta", beta), ("k", k), ("c_eq", c_eq)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
        }
    }
    let elastic = CompressibleNeoHookean::calibrated(params.a, params.b, params.q)?;
    Ok(BiotMaterial { params, elastic })
}

impl BiotMaterial {
    /// Biot pressure `M_B (c − c_eq − β(det F − 1))`.
    pub fn pressure(&self, j: f64, c: f64) -> f64 {
        let p = &self.params;
        p.m_b * (c - p.c_eq - p.beta * (j - 1.0))
    }

    pub fn elastic(&self) -> &CompressibleNeoHookean {
        &self.elastic
    }
}

impl FreeEnergy for BiotMaterial {
    fn name(&self) -> &str {
        "biot"
    }

    fn phi(&self, f: &Mat, c: f64) -> f64 {
        let j = det(f);
        if j <= 0.0 || c < 0.0 {
            return f64::INFINITY;
        }
        let p = &self.params;
        let bracket = c - p.c_eq - p.beta * (j - 1.0);
        let entropy = if c == 0.0 {
            0.0
        } else {
            p.k * c * ((c / p.c_eq).ln() - 1.0)
        };
        self.elastic.energy(f) + 0.5 * p.m_b * bracket * bracket + entropy
    }

    fn dphi_df(&self, f: &Mat, c: f64) -> Mat {
        let j = det(f);
        self.elastic.stress(f) - cofactor(f) * (self.params.beta * self.pressure(j, c))
    }

    fn dphi_dc(&self, f: &Mat, c: f64) -> f64 {
        let p = &self.params;
        self.pressure(det(f), c) + p.k * (c / p.c_eq).ln()
    }

    fn d2phi_dcc(&self, _f: &Mat, c: f64) -> f64 {
        self.params.m_b + self.params.k / c
    }

    fn d2phi_dfc(&self, f: &Mat, _c: f64) -> Mat {
        cofactor(f) * (-self.params.m_b * self.params.beta)
    }

    fn exponents(&self) -> MaterialExponents {
        MaterialExponents {
            q: self.params.q,
            r: 0.0,
            alpha: 0.0,
            gamma1: self.params.m_b,
            gamma2: self.params.m_b,
            case_tag: CaseTag::CaseIIa,
        }
    }

    fn lower_bound_constants(&self, d: usize) -> (f64, f64) {
        let (c0, c1) = self.elastic.lower_bound(d);
        // k c (log(c/c_eq) − 1) ≥ −k c_eq; the Biot square is nonnegative.
        (c0, c1 + self.params.k * self.params.c_eq)
    }

    fn reference_concentration(&self) -> f64 {
        self.params.c_eq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeoHookeanEntropyParams {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub k: f64,
    pub c_ref: f64,
    /// Strength of the volumetric–chemical coupling.
    pub beta: f64,
}

impl Default for NeoHookeanEntropyParams {
    fn default() -> Self {
        NeoHookeanEntropyParams {
            a: 0.5,
            b: 1.0,
            q: 2.0,
            k: 1.0,
            c_ref: 1.0,
            beta: 0.5,
        }
    }
}

/// Neo-Hookean solid with Boltzmann mixing entropy and a bounded coupling:
/// `Φ_el(F) + k c (log(c/c_ref) − 1) + β (det F − 1) ψ(c)` with
/// `ψ(c) = 2√c − 2 arctan √c`, so `ψ'(c) = √c/(1 + c) ≤ c^{-1/2}`.
///
/// Pure-entropy growth (Case I) with cross-derivative exponent α = −1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct NeoHookeanEntropy {
    pub params: NeoHookeanEntropyParams,
    elastic: CompressibleNeoHookean,
    entropy_floor: f64,
}

impl NeoHookeanEntropy {
    pub fn new(params: NeoHookeanEntropyParams) -> Result<Self> {
        for (name, v) in [("k", params.k), ("c_ref", params.c_ref)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(params.beta >= 0.0 && params.beta.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "coupling beta must be nonnegative, got {}",
                params.beta
            )));
        }
        let elastic = CompressibleNeoHookean::calibrated(params.a, params.b, params.q)?;
        let entropy_floor = coupled_entropy_minimum(params.k, params.c_ref, params.beta);
        Ok(NeoHookeanEntropy {
            params,
            elastic,
            entropy_floor,
        })
    }

    fn psi(c: f64) -> f64 {
        let s = c.sqrt();
        2.0 * s - 2.0 * s.atan()
    }

    fn dpsi(c: f64) -> f64 {
        c.sqrt() / (1.0 + c)
    }

    fn d2psi(c: f64) -> f64 {
        (1.0 - c) / (2.0 * c.sqrt() * (1.0 + c) * (1.0 + c))
    }
}

/// `min_c k c (log(c/c_ref) − 1) − 2β√c`. The derivative
/// `k log(c/c_ref) − β/√c` is increasing, so bisection on it finds the minimum.
fn coupled_entropy_minimum(k: f64, c_ref: f64, beta: f64) -> f64 {
    let g = |c: f64| k * c * ((c / c_ref).ln() - 1.0) - 2.0 * beta * c.sqrt();
    let dg = |c: f64| k * (c / c_ref).ln() - beta / c.sqrt();
    let (mut lo, mut hi) = (1e-300_f64.ln(), (c_ref.ln() + 1.0).max(1.0));
    while dg(hi.exp()) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dg(mid.exp()) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    g(hi.exp()).min(0.0)
}

impl FreeEnergy for NeoHookeanEntropy {
    fn name(&self) -> &str {
        "neo-hookean-entropy"
    }

    fn phi(&self, f: &Mat, c: f64) -> f64 {
        let j = det(f);
        if j <= 0.0 || c < 0.0 {
            return f64::INFINITY;
        }
        let p = &self.params;
        let entropy = if c == 0.0 {
            0.0
        } else {
            p.k * c * ((c / p.c_ref).ln() - 1.0)
        };
        self.elastic.energy(f) + entropy + p.beta * (j - 1.0) * Self::psi(c)
    }

    fn dphi_df(&self, f: &Mat, c: f64) -> Mat {
        self.elastic.stress(f) + cofactor(f) * (self.params.beta * Self::psi(c))
    }

    fn dphi_dc(&self, f: &Mat, c: f64) -> f64 {
        let p = &self.params;
        p.k * (c / p.c_ref).ln() + p.beta * (det(f) - 1.0) * Self::dpsi(c)
    }

    fn d2phi_dcc(&self, f: &Mat, c: f64) -> f64 {
        let p = &self.params;
        p.k / c + p.beta * (det(f) - 1.0) * Self::d2psi(c)
    }

    fn d2phi_dfc(&self, f: &Mat, c: f64) -> Mat {
        cofactor(f) * (self.params.beta * Self::dpsi(c))
    }

    fn exponents(&self) -> MaterialExponents {
        MaterialExponents {
            q: self.params.q,
            r: 0.0,
            alpha: -0.5,
            gamma1: 0.0,
            gamma2: 0.0,
            case_tag: CaseTag::CaseI,
        }
    }

    fn lower_bound_constants(&self, d: usize) -> (f64, f64) {
        // For det F > 0 the coupling is at least −β ψ(c) ≥ −2β√c.
        let (c0, c1) = self.elastic.lower_bound(d);
        (c0, c1 - self.entropy_floor)
    }

    fn reference_concentration(&self) -> f64 {
        self.params.c_ref
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::identity;

    fn biot() -> BiotMaterial {
        biot_material(BiotParams::default()).unwrap()
    }

    #[test]
    fn equilibrium_potential_vanishes() {
        let m = biot();
        for d in 1..=3 {
            assert_eq!(m.dphi_dc(&identity(d), 1.0), 0.0);
        }
    }

    #[test]
    fn doubled_concentration_potential() {
        // M_B (2 − 1 − 0) + k log 2
        let m = biot();
        let mu = m.dphi_dc(&identity(1), 2.0);
        assert!((mu - (1.0 + 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn reference_state_is_stress_free() {
        let m = biot();
        for d in 1..=3 {
            let f = identity(d);
            assert!(m.dphi_df(&f, 1.0).amax() < 1e-15);
            assert_eq!(m.elastic().energy(&f), 0.0);
            assert!((m.phi(&f, 1.0) + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn biot_convexity_window() {
        let m = biot();
        let f = identity(2);
        for c in [1e-6, 0.3, 1.0, 7.0, 1e3] {
            let h = m.d2phi_dcc(&f, c);
            assert!((h - (1.0 + 1.0 / c)).abs() <= 1e-12 * h);
            assert!(h >= 1.0 / c);
        }
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        let mut p = BiotParams::default();
        p.k = 0.0;
        assert!(matches!(biot_material(p), Err(Error::InvalidParams(_))));
        let mut p = BiotParams::default();
        p.c_eq = -1.0;
        assert!(matches!(biot_material(p), Err(Error::InvalidParams(_))));
        let mut p = BiotParams::default();
        p.b = 0.1;
        assert!(matches!(biot_material(p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn inadmissible_arguments_have_infinite_energy() {
        let m = biot();
        let f = Mat::from_element(1, 1, -0.5);
        assert_eq!(m.phi(&f, 1.0), f64::INFINITY);
        assert_eq!(m.phi(&identity(1), -1e-3), f64::INFINITY);
        assert!(m.phi(&identity(1), 0.0).is_finite());
    }

    #[test]
    fn coupled_entropy_floor_is_a_lower_bound() {
        let (k, c_ref, beta) = (1.0, 1.0, 0.5);
        let floor = coupled_entropy_minimum(k, c_ref, beta);
        for i in 0..2000 {
            let c = 10f64.powf(-8.0 + 12.0 * i as f64 / 2000.0);
            let g = k * c * ((c / c_ref).ln() - 1.0) - 2.0 * beta * c.sqrt();
            assert!(g >= floor - 1e-12);
        }
    }
}
