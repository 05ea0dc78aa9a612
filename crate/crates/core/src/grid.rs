//! Uniform grid on the unit interval with mechanical boundary tags and Robin
//! permeabilities.
//!
//! Deformations live on the `n + 1` nodes `x_i = i h`; concentrations and
//! chemical potentials live on the `n` cell centers `(j + ½) h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of cells; the one-sided second-difference
/// stencil at the boundary reaches four nodes deep.
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryTag {
    /// Deformation pinned to the identity.
    DirichletMech,
    /// Traction boundary, natural for the minimization.
    NeumannMech,
}

/// Which endpoints carry the Dirichlet condition `χ = id`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirichletSides {
    #[default]
    Left,
    Right,
    Both,
}

impl DirichletSides {
    pub fn contains(self, side: Side) -> bool {
        matches!(
            (self, side),
            (DirichletSides::Both, _) | (DirichletSides::Left, Side::Left) | (DirichletSides::Right, Side::Right)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_cells: usize,
    h: f64,
    dirichlet: DirichletSides,
    kappa: [f64; 2],
}

impl Grid {
    pub fn new(n_cells: usize, dirichlet: DirichletSides, kappa_left: f64, kappa_right: f64) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidParams(format!(
                "grid needs at least {MIN_CELLS} cells, got {n_cells}"
            )));
        }
        for k in [kappa_left, kappa_right] {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "permeability must be finite and nonnegative, got {k}"
                )));
            }
        }
        Ok(Grid {
            n_cells,
            h: 1.0 / n_cells as f64,
            dirichlet,
            kappa: [kappa_left, kappa_right],
        })
    }

    /// Left end pinned, no species exchange.
    pub fn uniform(n_cells: usize) -> Result<Self> {
        Grid::new(n_cells, DirichletSides::Left, 0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        1
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.cell_center(j)).collect()
    }

    pub fn dirichlet(&self) -> DirichletSides {
        self.dirichlet
    }

    pub fn tag(&self, side: Side) -> BoundaryTag {
        if self.dirichlet.contains(side) {
            BoundaryTag::DirichletMech
        } else {
            BoundaryTag::NeumannMech
        }
    }

    pub fn boundary_node(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.n_cells,
        }
    }

    /// Cell adjacent to the boundary point, where Robin terms are evaluated.
    pub fn boundary_cell(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.n_cells - 1,
        }
    }

    pub fn is_pinned(&self, node: usize) -> bool {
        (node == 0 && self.dirichlet.contains(Side::Left))
            || (node == self.n_cells && self.dirichlet.contains(Side::Right))
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| !self.is_pinned(i)).collect()
    }

    pub fn kappa(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.kappa[0],
            Side::Right => self.kappa[1],
        }
    }

    /// `∫ κ dS`; in 1-D the boundary measure is counting measure.
    pub fn kappa_total(&self) -> f64 {
        self.kappa[0] + self.kappa[1]
    }

    pub fn exchange_enabled(&self) -> bool {
        self.kappa_total() > 0.0
    }

    /// Nodal values of the identity map.
    pub fn identity_map(&self) -> Vec<f64> {
        self.nodes()
    }

    /// `∫ u dx` by the midpoint rule for a cell field.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.h * crate::tensor::compensated_sum(u.iter().copied())
    }

    /// `∫ u v dx` by the midpoint rule.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.h * crate::tensor::compensated_sum(u.iter().zip(v).map(|(a, b)| a * b))
    }

    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// `L²` norm of a nodal field by the trapezoid rule.
    pub fn nodal_l2_norm(&self, u: &[f64]) -> f64 {
        let n = u.len() - 1;
        let sum = crate::tensor::compensated_sum(u.iter().enumerate().map(|(i, v)| {
            if i == 0 || i == n {
                0.5 * v * v
            } else {
                v * v
            }
        }));
        (self.h * sum).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tags_pin_the_left_end() {
        let g = Grid::uniform(8).unwrap();
        assert_eq!(g.tag(Side::Left), BoundaryTag::DirichletMech);
        assert_eq!(g.tag(Side::Right), BoundaryTag::NeumannMech);
        assert_eq!(g.free_nodes(), (1..=8).collect::<Vec<_>>());
        assert_eq!(g.h(), 0.125);
    }

    #[test]
    fn both_ends_pinned() {
        let g = Grid::new(6, DirichletSides::Both, 0.0, 1.0).unwrap();
        assert!(g.is_pinned(0) && g.is_pinned(6));
        assert_eq!(g.free_nodes().len(), 5);
        assert!(g.exchange_enabled());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Grid::uniform(3).is_err());
        assert!(Grid::new(8, DirichletSides::Left, -1.0, 0.0).is_err());
        assert!(Grid::new(8, DirichletSides::Left, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn quadrature_of_linear_fields() {
        let g = Grid::uniform(16).unwrap();
        let x = g.cell_centers();
        assert!((g.integrate(&x) - 0.5).abs() < 1e-15);
        // trapezoid on the nodes: ∫x² ≈ 1/3 + h²/6
        let nodes = g.nodes();
        let expect = 1.0 / 3.0 + g.h() * g.h() / 6.0;
        assert!((g.nodal_l2_norm(&nodes).powi(2) - expect).abs() < 1e-14);
    }
}
