//! Uniform partitions of [0, 1] and sampled functions on them.

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform partition of [0, 1] into `panels` equal subintervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    panels: usize,
    nodes: Vec<f64>,
}

impl Grid {
    /// Build the uniform grid with the given number of panels.
    pub fn uniform(panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::Config("grid needs at least one panel".into()));
        }
        let nodes = (0..=panels).map(|i| i as f64 / panels as f64).collect();
        Ok(Self { panels, nodes })
    }

    /// Validate an explicit node sequence: strictly increasing from 0 to 1,
    /// equally spaced to within 1e-15.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::Config(
                "nodes must run from 0 to 1 with at least one panel".into(),
            ));
        }
        let panels = nodes.len() - 1;
        let h = 1.0 / panels as f64;
        for (i, pair) in nodes.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::Config(format!("nodes not increasing at index {i}")));
            }
            if ((pair[1] - pair[0]) - h).abs() > 1e-15 {
                return Err(Error::Config(format!(
                    "nodes not equally spaced at index {i}"
                )));
            }
        }
        Ok(Self { panels, nodes })
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.panels as f64
    }

    /// Index of the panel containing `t`, clamped to [0, panels-1].
    pub fn panel_of(&self, t: f64) -> usize {
        let i = (t * self.panels as f64).floor() as isize;
        i.clamp(0, self.panels as isize - 1) as usize
    }
}

/// Samples of a real function at the nodes of a [`Grid`], interpreted
/// piecewise-linearly between nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes().len() {
            return Err(Error::Config(format!(
                "expected {} values, got {}",
                grid.nodes().len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite sample {bad}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: Grid) -> Self {
        let n = grid.nodes().len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Piecewise-linear interpolation; constant extension outside [0, 1].
    pub fn interpolate(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= 1.0 {
            return *self.values.last().unwrap();
        }
        let k = self.grid.panel_of(t);
        let a = self.grid.node(k);
        let h = self.grid.spacing();
        let lam = (t - a) / h;
        self.values[k] * (1.0 - lam) + self.values[k + 1] * lam
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// L2 norm of the piecewise-linear interpolant (exact).
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.spacing();
        let mut acc = 0.0;
        for pair in self.values.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            acc += h * (a * a + a * b + b * b) / 3.0;
        }
        acc.sqrt()
    }

    /// Max-node distance to another function on the same grid.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Composite Gauss-Legendre quadrature parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Starting panel count for refinement.
    pub panels: usize,
    /// Gauss-Legendre points per panel.
    pub points_per_panel: usize,
    /// Absolute change between doublings at which refinement stops.
    pub refinement_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panels: 256,
            points_per_panel: 8,
            refinement_tolerance: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 {
            return Err(Error::Config("quadrature needs at least one panel".into()));
        }
        if self.points_per_panel < 2 || self.points_per_panel > 32 {
            return Err(Error::Config(
                "points_per_panel must lie between 2 and 32".into(),
            ));
        }
        if !(self.refinement_tolerance > 0.0) {
            return Err(Error::Config(
                "refinement_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_invariants() {
        let g = Grid::uniform(256).unwrap();
        assert_eq!(g.nodes().len(), 257);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(256), 1.0);
        let h = g.spacing();
        for w in g.nodes().windows(2) {
            assert!((w[1] - w[0] - h).abs() <= 1e-15);
        }
    }

    #[test]
    fn from_nodes_rejects_uneven_spacing() {
        let mut nodes: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        nodes[2] += 1e-9;
        assert!(Grid::from_nodes(nodes).is_err());
    }

    #[test]
    fn grid_function_rejects_nan() {
        let g = Grid::uniform(4).unwrap();
        assert!(GridFunction::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let g = Grid::uniform(4).unwrap();
        let f = GridFunction::from_fn(g, |t| 2.0 * t).unwrap();
        assert_eq!(f.interpolate(0.25), 0.5);
        assert!((f.interpolate(0.375) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn l2_norm_of_linear_function() {
        let g = Grid::uniform(64).unwrap();
        let f = GridFunction::from_fn(g, |t| t).unwrap();
        // integral of t^2 over [0,1] is 1/3
        assert!((f.l2_norm() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
