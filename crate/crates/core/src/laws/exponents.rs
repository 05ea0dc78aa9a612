use serde::{Deserialize, Serialize};
use std::fmt;

/// Growth regime of `∂²_cc Φ`: Case I is pure entropy (`γ₁ = γ₂ = 0`), the
/// Case II variants add a `γ c^r` contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    CaseI,
    CaseIIa,
    CaseIIb,
}

impl CaseTag {
    pub fn is_case_two(self) -> bool {
        !matches!(self, CaseTag::CaseI)
    }
}

/// Exponents contributed by the free energy alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialExponents {
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub case_tag: CaseTag,
}

/// Full exponent profile of a model: the free-energy exponents together with
/// the hyperstress growth `p` and mobility degeneracy `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub r: f64,
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub case_tag: CaseTag,
}

impl ExponentProfile {
    pub fn assemble(material: MaterialExponents, p: f64, m: f64) -> Self {
        ExponentProfile {
            p,
            q: material.q,
            m,
            r: material.r,
            alpha: material.alpha,
            gamma1: material.gamma1,
            gamma2: material.gamma2,
            case_tag: material.case_tag,
        }
    }

    /// Every structural window the profile violates in dimension `d`.
    pub fn violations(&self, d: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let df = d as f64;
        let ExponentProfile {
            p,
            m,
            r,
            gamma1,
            gamma2,
            case_tag,
            ..
        } = *self;

        if !(p > df && p >= 3.0) {
            out.push(Violation::new(
                Clause::Hyperstress,
                format!("hyperstress exponent requires p > d and p ≥ 3 (p = {p}, d = {d})"),
            ));
        }
        if !(m > 0.0) {
            out.push(Violation::new(
                Clause::Mobility,
                format!("mobility exponent requires m > 0 (m = {m})"),
            ));
        }
        if !(r > -1.0) || !(r + m >= 0.0) {
            out.push(Violation::new(
                Clause::ConvexityWindow,
                format!("entropy exponent requires r > -1 and r + m ≥ 0 (r = {r}, m = {m})"),
            ));
        }
        match case_tag {
            CaseTag::CaseI => {
                if gamma1 != 0.0 || gamma2 != 0.0 {
                    out.push(Violation::new(
                        Clause::ConvexityWindow,
                        format!("Case I requires γ₁ = γ₂ = 0 (γ₁ = {gamma1}, γ₂ = {gamma2})"),
                    ));
                }
                if !(1.0..=2.0).contains(&m) {
                    out.push(Violation::new(
                        Clause::ConvexityWindow,
                        format!("Case I requires 1 ≤ m ≤ 2 (m = {m})"),
                    ));
                }
            }
            CaseTag::CaseIIa | CaseTag::CaseIIb => {
                if !(gamma1 > 0.0 && gamma2 >= gamma1) {
                    out.push(Violation::new(
                        Clause::ConvexityWindow,
                        format!("Case II requires γ₂ ≥ γ₁ > 0 (γ₁ = {gamma1}, γ₂ = {gamma2})"),
                    ));
                }
                let m_max = if case_tag == CaseTag::CaseIIa { 3.0 + r } else { 2.0 };
                if !(m > 0.0 && m <= m_max) {
                    out.push(Violation::new(
                        Clause::ConvexityWindow,
                        format!("{case_tag:?} requires 0 < m ≤ {m_max} (m = {m})"),
                    ));
                }
            }
        }

        if out.is_empty() {
            out.extend(self.cross_derivative_violations(d));
        }
        out
    }

    fn cross_derivative_violations(&self, d: usize) -> Vec<Violation> {
        let s = derive_flux_exponent(self, d);
        let ExponentProfile { p, m, r, alpha, .. } = *self;
        let ceiling = (p - s) / (p * s);
        let mut out = Vec::new();
        let mut fail = |msg: String| out.push(Violation::new(Clause::CrossDerivative, msg));
        match self.case_tag {
            CaseTag::CaseI => {
                if !(m + alpha >= 0.0 && m + alpha <= ceiling) {
                    fail(format!(
                        "Case I requires 0 ≤ m + α ≤ (p − s)/(p s) = {ceiling:.6} (m + α = {}, s = {s:.6})",
                        m + alpha
                    ));
                }
                if !(m + 2.0 * alpha >= 0.0) {
                    fail(format!("Case I requires m + 2α ≥ 0 (m + 2α = {})", m + 2.0 * alpha));
                }
            }
            tag => {
                let ceiling = (2.0 + r) * ceiling;
                if !(alpha >= -1.0) {
                    fail(format!("Case II requires α ≥ −1 (α = {alpha})"));
                }
                if !(m + alpha >= 0.0 && m + alpha <= ceiling) {
                    fail(format!(
                        "Case II requires 0 ≤ m + α ≤ (2 + r)(p − s)/(p s) = {ceiling:.6} (m + α = {}, s = {s:.6})",
                        m + alpha
                    ));
                }
                let upper = if tag == CaseTag::CaseIIa {
                    m + 1.0 + r
                } else {
                    m + 2.0 + 2.0 * r
                };
                let v = m + 2.0 * alpha;
                if !(v >= 0.0 && v < upper) {
                    fail(format!("{tag:?} requires 0 ≤ m + 2α < {upper} (m + 2α = {v})"));
                }
            }
        }
        out
    }
}

/// Integrability exponent `s ∈ (1, 2)` of the diffusive flux `ℳ∇μ`.
///
/// Case I: `s = (md + 2)/(md + 1)`. Case II:
/// `s = min{(md + 2(r+2))/(md + r + 2), (d(m+r+1) + 2(r+2))/(d(m+r+1) + r + 2)}`.
pub fn derive_flux_exponent(profile: &ExponentProfile, d: usize) -> f64 {
    let d = d as f64;
    let (m, r) = (profile.m, profile.r);
    match profile.case_tag {
        CaseTag::CaseI => (m * d + 2.0) / (m * d + 1.0),
        _ => {
            let a = (m * d + 2.0 * (r + 2.0)) / (m * d + r + 2.0);
            let k = d * (m + r + 1.0);
            let b = (k + 2.0 * (r + 2.0)) / (k + r + 2.0);
            a.min(b)
        }
    }
}

/// Structural hypothesis that a check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// Convexity, frame indifference and p-growth of the hyperstress potential.
    Hyperstress,
    /// Symmetry and c^m degeneracy bounds of the mobility.
    Mobility,
    /// Lower bound `Φ ≥ C|F| + C/(det F)^q − C'`.
    Coercivity,
    /// `C₁/c + γ₁c^r ≤ ∂²_cc Φ ≤ C₃/c + γ₂c^r` and the Case I/II exponent ranges.
    ConvexityWindow,
    /// `|∂²_Fc Φ| ≤ C c^α` and the admissible α range.
    CrossDerivative,
    /// Static frame indifference of Φ.
    FrameIndifference,
    /// Existence of a concentration with finite energy and potential.
    FiniteReferenceState,
    /// Quadratic structure and bounds of the viscous potential.
    Viscosity,
    /// Regularity of the external loading.
    Loading,
    /// Nonnegative permeability with positive total boundary weight.
    Permeability,
    /// Initial deformation and concentration admissibility.
    InitialData,
    /// Elliptic regularization order and weight.
    Regularization,
    /// Grid, time partition and solver settings.
    Discretization,
    /// Analytic derivatives against finite differences.
    DerivativeConsistency,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: Clause,
    pub message: String,
}

impl Violation {
    pub fn new(clause: Clause, message: impl Into<String>) -> Self {
        Violation {
            clause,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.clause, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile(case_tag: CaseTag, m: f64, r: f64) -> ExponentProfile {
        let gamma = if case_tag == CaseTag::CaseI { 0.0 } else { 1.0 };
        ExponentProfile {
            p: 4.0,
            q: 2.0,
            m,
            r,
            alpha: 0.0,
            gamma1: gamma,
            gamma2: gamma,
            case_tag,
        }
    }

    #[test]
    fn flux_exponent_examples() {
        assert_eq!(derive_flux_exponent(&profile(CaseTag::CaseI, 1.0, 0.0), 1), 1.5);
        // min{(1 + 4)/(1 + 2), (2 + 4)/(2 + 2)} = min{5/3, 3/2}
        assert_eq!(derive_flux_exponent(&profile(CaseTag::CaseIIa, 1.0, 0.0), 1), 1.5);
        assert_eq!(derive_flux_exponent(&profile(CaseTag::CaseI, 2.0, 0.0), 2), 1.2);
    }

    #[test]
    fn case_one_requires_m_at_least_one() {
        let v = profile(CaseTag::CaseI, 0.5, 0.0).violations(1);
        assert!(v
            .iter()
            .any(|v| v.clause == Clause::ConvexityWindow && v.message.contains("Case I requires 1 ≤ m ≤ 2")));
    }

    #[test]
    fn biot_profile_is_admissible_in_one_and_two_dimensions() {
        let mut p = profile(CaseTag::CaseIIa, 1.0, 0.0);
        // d = 1: m + α = 1 ≤ 2(p − 3/2)/(3p/2) needs p ≥ 6.
        assert!(!p.violations(1).is_empty());
        p.p = 6.0;
        assert!(p.violations(1).is_empty(), "{:?}", p.violations(1));
        assert!(p.violations(2).is_empty(), "{:?}", p.violations(2));
    }

    #[test]
    fn hyperstress_exponent_must_exceed_dimension() {
        let mut p = profile(CaseTag::CaseIIa, 1.0, 0.0);
        p.p = 3.0;
        assert!(p.violations(3).iter().any(|v| v.clause == Clause::Hyperstress));
        p.p = 2.5;
        assert!(p.violations(1).iter().any(|v| v.clause == Clause::Hyperstress));
    }

    #[test]
    fn case_one_alpha_window() {
        // With m = 1, d = 1 the window [−m/2, 1/s − 1/p − m] is empty for p = 4
        // and contains α = −1/2 once p ≥ 6.
        let mut p = profile(CaseTag::CaseI, 1.0, 0.0);
        p.alpha = -0.5;
        assert!(p.violations(1).iter().any(|v| v.clause == Clause::CrossDerivative));
        p.p = 6.0;
        assert!(p.violations(1).is_empty(), "{:?}", p.violations(1));
    }

    proptest! {
        #[test]
        fn flux_exponent_in_open_unit_interval(
            m in 0.01f64..5.0, r in -0.99f64..4.0, d in 1usize..=3, case in 0usize..3
        ) {
            let tag = [CaseTag::CaseI, CaseTag::CaseIIa, CaseTag::CaseIIb][case];
            let s = derive_flux_exponent(&profile(tag, m, r), d);
            prop_assert!(s > 1.0 && s < 2.0, "s = {}", s);
        }
    }
}
