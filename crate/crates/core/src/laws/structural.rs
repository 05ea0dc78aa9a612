//! Hyperstress, viscous and mobility laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{cofactor, ddot, det, identity, Mat, Tensor3};

/// Convex, frame-indifferent potential of the second deformation gradient.
pub trait Hyperstress: Send + Sync + std::fmt::Debug {
    fn h_pot(&self, g: &Tensor3) -> f64;
    /// `𝔥(G) = ∂_G ℋ(G)`.
    fn h_stress(&self, g: &Tensor3) -> Tensor3;
    fn exponent(&self) -> f64;
}

/// `ℋ(G) = (c_H / p) |G|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerHyperstress {
    pub c_h: f64,
    pub p: f64,
}

impl Default for PowerHyperstress {
    fn default() -> Self {
        PowerHyperstress { c_h: 1e-3, p: 6.0 }
    }
}

impl PowerHyperstress {
    pub fn new(c_h: f64, p: f64) -> Result<Self> {
        if !(c_h > 0.0 && p >= 2.0 && c_h.is_finite() && p.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "hyperstress needs c_H > 0 and p ≥ 2 (c_H = {c_h}, p = {p})"
            )));
        }
        Ok(PowerHyperstress { c_h, p })
    }

    /// Scalar form used by the one-dimensional discretization, where `G` has
    /// a single entry.
    pub fn pot_scalar(&self, g: f64) -> f64 {
        self.c_h / self.p * g.abs().powf(self.p)
    }

    pub fn stress_scalar(&self, g: f64) -> f64 {
        self.c_h * g.abs().powf(self.p - 2.0) * g
    }
}

impl Hyperstress for PowerHyperstress {
    fn h_pot(&self, g: &Tensor3) -> f64 {
        self.c_h / self.p * g.norm().powf(self.p)
    }

    fn h_stress(&self, g: &Tensor3) -> Tensor3 {
        let n = g.norm();
        if n == 0.0 {
            return Tensor3::zeros(g.dim());
        }
        g.scale(self.c_h * n.powf(self.p - 2.0))
    }

    fn exponent(&self) -> f64 {
        self.p
    }
}

/// Viscous dissipation potential `ζ(F, Ḟ, c)`, quadratic in `Ḟ`.
pub trait ViscousPotential: Send + Sync + std::fmt::Debug {
    fn zeta(&self, f: &Mat, fdot: &Mat, c: f64) -> f64;
    /// Viscous stress `∂_Ḟ ζ`.
    fn dzeta_dfdot(&self, f: &Mat, fdot: &Mat, c: f64) -> Mat;
}

/// Right Cauchy–Green rate `Ċ = FᵀḞ + ḞᵀF`.
pub fn cauchy_green_rate(f: &Mat, fdot: &Mat) -> Mat {
    let a = f.transpose() * fdot;
    &a + a.transpose()
}

/// `ζ = ½ Ċ : 𝔻̃ Ċ` with `𝔻̃ = ν 𝕀`, i.e. `ζ = (ν/2)|Ċ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsotropicViscosity {
    pub nu: f64,
}

impl Default for IsotropicViscosity {
    fn default() -> Self {
        IsotropicViscosity { nu: 0.1 }
    }
}

impl IsotropicViscosity {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParams(format!("viscosity must be positive, got {nu}")));
        }
        Ok(IsotropicViscosity { nu })
    }
}

impl ViscousPotential for IsotropicViscosity {
    fn zeta(&self, f: &Mat, fdot: &Mat, _c: f64) -> f64 {
        let cdot = cauchy_green_rate(f, fdot);
        0.5 * self.nu * ddot(&cdot, &cdot)
    }

    fn dzeta_dfdot(&self, f: &Mat, fdot: &Mat, _c: f64) -> Mat {
        f * cauchy_green_rate(f, fdot) * (2.0 * self.nu)
    }
}

/// Mobility given in the spatial frame; the Lagrangian tensor is obtained by
/// pulling it back.
pub trait Mobility: Send + Sync + std::fmt::Debug {
    /// Eulerian mobility `𝕄(F, ĉ)` at spatial concentration `ĉ`.
    fn eulerian(&self, f: &Mat, c_spatial: f64) -> Mat;

    fn exponent(&self) -> f64;

    /// Lagrangian mobility `ℳ(F, c)`.
    fn lagrangian(&self, f: &Mat, c: f64) -> Result<Mat> {
        pull_back_mobility(|f, c| self.eulerian(f, c), f, c)
    }
}

/// `ℳ(F,c) = (Cof F)ᵀ 𝕄(F, c/det F) Cof F / det F`.
pub fn pull_back_mobility<M>(m_eul: M, f: &Mat, c: f64) -> Result<Mat>
where
    M: Fn(&Mat, f64) -> Mat,
{
    let j = det(f);
    if !(j > 0.0) {
        return Err(Error::degenerate(j, "mobility pullback"));
    }
    let cof = cofactor(f);
    let spatial = m_eul(f, c / j);
    Ok(cof.transpose() * spatial * cof / j)
}

/// `𝕄(F, ĉ) = s ĉ^m I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerMobility {
    pub m: f64,
    pub scale: f64,
}

impl Default for PowerMobility {
    fn default() -> Self {
        PowerMobility { m: 1.0, scale: 1.0 }
    }
}

impl PowerMobility {
    pub fn new(m: f64, scale: f64) -> Result<Self> {
        if !(m > 0.0 && scale > 0.0 && m.is_finite() && scale.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "mobility needs m > 0 and a positive scale (m = {m}, scale = {scale})"
            )));
        }
        Ok(PowerMobility { m, scale })
    }

    /// One-dimensional Lagrangian mobility `s (c/F)^m / F` without allocation.
    pub fn lagrangian_scalar(&self, f: f64, c: f64) -> f64 {
        self.scale * (c / f).max(0.0).powf(self.m) / f
    }
}

impl Mobility for PowerMobility {
    fn eulerian(&self, f: &Mat, c_spatial: f64) -> Mat {
        identity(f.nrows()) * (self.scale * c_spatial.max(0.0).powf(self.m))
    }

    fn exponent(&self) -> f64 {
        self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{rotation_2d, skew_2d};

    #[test]
    fn pullback_at_identity_is_transparent() {
        for d in 1..=3 {
            let m = pull_back_mobility(|f, c| identity(f.nrows()) * c, &identity(d), 2.0).unwrap();
            assert_eq!(m, identity(d) * 2.0);
        }
    }

    #[test]
    fn pullback_one_dimensional_stretch() {
        // ĉ = 4/2 = 2, ℳ = 1 · 2 · 1 / 2 = 1
        let f = Mat::from_element(1, 1, 2.0);
        let m = pull_back_mobility(|f, c| identity(f.nrows()) * c, &f, 4.0).unwrap();
        assert!((m[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pullback_rejects_singular_deformation() {
        let f = Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 1.0]);
        let err = pull_back_mobility(|f, c| identity(f.nrows()) * c, &f, 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateDeformation { .. }));
    }

    #[test]
    fn power_mobility_scalar_matches_matrix_form() {
        let mob = PowerMobility::new(1.5, 2.0).unwrap();
        for (f, c) in [(0.7, 0.3), (1.0, 1.0), (1.9, 4.0)] {
            let full = mob.lagrangian(&Mat::from_element(1, 1, f), c).unwrap()[(0, 0)];
            assert!((full - mob.lagrangian_scalar(f, c)).abs() < 1e-14 * full.abs().max(1.0));
        }
    }

    #[test]
    fn unit_rate_dissipation() {
        // Ċ = 2, ζ = ½ ν 4 = 2ν
        let v = IsotropicViscosity::default();
        let z = v.zeta(&identity(1), &identity(1), 1.0);
        assert!((z - 2.0 * v.nu).abs() < 1e-15);
    }

    #[test]
    fn rigid_rotation_rate_dissipates_nothing() {
        let v = IsotropicViscosity::default();
        let z = v.zeta(&identity(2), &skew_2d(0.7), 1.0);
        assert!(z.abs() < 1e-30);
        let r = rotation_2d(0.4);
        let z = v.zeta(&r, &(skew_2d(1.3) * &r), 1.0);
        assert!(z.abs() < 1e-28);
    }

    #[test]
    fn viscous_stress_is_linear_in_rate() {
        let v = IsotropicViscosity::new(0.3).unwrap();
        let f = Mat::from_row_slice(2, 2, &[1.1, 0.2, -0.1, 0.9]);
        let a = Mat::from_row_slice(2, 2, &[0.3, -0.2, 0.5, 0.1]);
        let b = Mat::from_row_slice(2, 2, &[-0.4, 0.7, 0.2, 0.6]);
        let lhs = v.dzeta_dfdot(&f, &(&a * 2.0 + &b * -3.0), 1.0);
        let rhs = v.dzeta_dfdot(&f, &a, 1.0) * 2.0 + v.dzeta_dfdot(&f, &b, 1.0) * -3.0;
        assert!((lhs - rhs).amax() < 1e-14);
    }

    #[test]
    fn hyperstress_scalar_and_tensor_forms_agree() {
        let h = PowerHyperstress::default();
        let g = Tensor3::from_vec(1, vec![-0.7]);
        assert!((h.h_pot(&g) - h.pot_scalar(-0.7)).abs() < 1e-18);
        assert!((h.h_stress(&g).get(0, 0, 0) - h.stress_scalar(-0.7)).abs() < 1e-18);
        assert_eq!(h.h_stress(&Tensor3::zeros(2)), Tensor3::zeros(2));
    }
}
