//! Quadrature of the stored energy, viscous dissipation and loads, with
//! exact nodal gradients.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::laws::{FreeEnergy, Hyperstress, ViscousPotential};
use crate::loading::LoadSample;
use crate::operators::DiscreteOperators;
use crate::tensor::{compensated_sum, Mat, Tensor3};

fn scalar(v: f64) -> Mat {
    Mat::from_element(1, 1, v)
}

fn hyper_scalar(v: f64) -> Tensor3 {
    Tensor3::from_vec(1, vec![v])
}

/// Deformation gradients, failing on the first cell with `det ∇χ ≤ 0`.
pub fn admissible_gradients(ops: &DiscreteOperators, chi: &[f64]) -> Result<Vec<f64>> {
    let f = ops.grad(chi);
    match f.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        Some((j, v)) => Err(Error::degenerate(*v, format!("cell {j}"))),
        None => Ok(f),
    }
}

/// `∫ Φ(∇χ, c) dx` by the midpoint rule.
pub fn bulk_energy(ops: &DiscreteOperators, material: &dyn FreeEnergy, chi: &[f64], c: &[f64]) -> Result<f64> {
    let f = admissible_gradients(ops, chi)?;
    Ok(ops.h() * compensated_sum(f.iter().zip(c).map(|(&f, &c)| material.phi(&scalar(f), c))))
}

/// `∫ ℋ(D²χ) dx` with nodal trapezoid weights.
pub fn hyperstress_energy(ops: &DiscreteOperators, hyper: &dyn Hyperstress, chi: &[f64]) -> f64 {
    let s = ops.hess(chi);
    compensated_sum(
        s.iter()
            .zip(ops.hessian_weights())
            .map(|(&s, w)| w * hyper.h_pot(&hyper_scalar(s))),
    )
}

/// `E₀(χ, c) = ∫ Φ(∇χ, c) + ℋ(D²χ) dx`.
pub fn assemble_energy(
    grid: &Grid,
    ops: &DiscreteOperators,
    material: &dyn FreeEnergy,
    hyper: &dyn Hyperstress,
    chi: &[f64],
    c: &[f64],
) -> Result<f64> {
    debug_assert_eq!(chi.len(), grid.n_nodes());
    debug_assert_eq!(c.len(), grid.n_cells());
    Ok(bulk_energy(ops, material, chi, c)? + hyperstress_energy(ops, hyper, chi))
}

/// Nodal gradient of `E₀(·, c)` at `χ`, including pinned nodes.
pub fn energy_gradient(
    ops: &DiscreteOperators,
    material: &dyn FreeEnergy,
    hyper: &dyn Hyperstress,
    chi: &[f64],
    c: &[f64],
) -> Result<Vec<f64>> {
    let f = admissible_gradients(ops, chi)?;
    let mut g = vec![0.0; chi.len()];
    // ∂F_j/∂χ_{j+1} = 1/h, ∂F_j/∂χ_j = −1/h; the cell weight h cancels.
    for (j, (&f, &c)) in f.iter().zip(c).enumerate() {
        let sigma = material.dphi_df(&scalar(f), c)[(0, 0)];
        g[j] -= sigma;
        g[j + 1] += sigma;
    }
    let stresses: Vec<f64> = ops
        .hess(chi)
        .iter()
        .map(|&s| hyper.h_stress(&hyper_scalar(s)).as_slice()[0])
        .collect();
    ops.hess_transpose_add(&stresses, &mut g);
    Ok(g)
}

/// `R(χ_prev, χ̇, c) = ∫ ζ(∇χ_prev, ∇χ̇, c) dx`.
pub fn assemble_dissipation(
    ops: &DiscreteOperators,
    visc: &dyn ViscousPotential,
    chi_prev: &[f64],
    chidot: &[f64],
    c: &[f64],
) -> f64 {
    let f = ops.grad(chi_prev);
    let fdot = ops.grad(chidot);
    ops.h()
        * compensated_sum(
            f.iter()
                .zip(&fdot)
                .zip(c)
                .map(|((&f, &fd), &c)| visc.zeta(&scalar(f), &scalar(fd), c)),
        )
}

/// Nodal gradient of `χ̇ ↦ R(χ_prev, χ̇, c)`.
pub fn dissipation_gradient(
    ops: &DiscreteOperators,
    visc: &dyn ViscousPotential,
    chi_prev: &[f64],
    chidot: &[f64],
    c: &[f64],
) -> Vec<f64> {
    let f = ops.grad(chi_prev);
    let fdot = ops.grad(chidot);
    let mut g = vec![0.0; chi_prev.len()];
    for (j, ((&f, &fd), &c)) in f.iter().zip(&fdot).zip(c).enumerate() {
        let s = visc.dzeta_dfdot(&scalar(f), &scalar(fd), c)[(0, 0)];
        g[j] -= s;
        g[j + 1] += s;
    }
    g
}

/// `⟨ℓ_k, χ⟩`.
pub fn assemble_load(grid: &Grid, load: &LoadSample, chi: &[f64]) -> f64 {
    load.apply(grid, chi)
}
