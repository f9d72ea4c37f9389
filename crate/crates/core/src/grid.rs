//! Uniform grids on [0, 1] and sampled fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh x_i = i·h, i = 0..=n_cells, h = 1/n_cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n_cells: usize,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 cells, got {n_cells}"
            )));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(move |i| self.x(i))
    }

    /// Trapezoid weights: h/2 at the endpoints, h in the interior.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_cells {
            0.5 * self.h()
        } else {
            self.h()
        }
    }
}

/// Parity of a profile under the reflection x ↦ 1 − x.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// A function sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    /// Samples `f` and projects the samples onto the given parity exactly,
    /// so that u_i = ±u_{N−i} holds bit for bit.
    pub fn from_fn_with_parity(grid: Grid, parity: Parity, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, f).symmetrized(parity)
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidInput(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite field value {v}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn left(&self) -> f64 {
        self.values[0]
    }

    pub fn right(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Trapezoid L² inner product.
    pub fn dot(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| self.grid.weight(i) * a * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max(|u(0)|, |u(1)|), the sup norm over the boundary {0, 1}.
    pub fn boundary_sup_norm(&self) -> f64 {
        self.left().abs().max(self.right().abs())
    }

    /// Σ (u_{i+1} − u_i)² / h, the discrete ∫ u_x².
    pub fn gradient_energy(&self) -> f64 {
        let h = self.grid.h();
        self.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Field, factor: f64) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn distance(&self, other: &Field) -> f64 {
        self.sub(other).l2_norm()
    }

    /// The field divided by its L² norm, or `None` for the zero field.
    pub fn normalized(&self) -> Option<Field> {
        let n = self.l2_norm();
        (n > 0.0 && n.is_finite()).then(|| self.scaled(1.0 / n))
    }

    pub fn reflected(&self) -> Field {
        let mut values = self.values.clone();
        values.reverse();
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Even or odd part under x ↦ 1 − x; the result has exact parity.
    pub fn symmetrized(&self, parity: Parity) -> Field {
        let n = self.values.len();
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let mut values = vec![0.0; n];
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let v = 0.5 * (self.values[i] + sign * self.values[j]);
            values[i] = v;
            values[j] = sign * v;
        }
        if n % 2 == 1 {
            let m = n / 2;
            values[m] = if sign > 0.0 { self.values[m] } else { 0.0 };
        }
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Largest defect |u(x) ∓ u(1−x)| over the nodes.
    pub fn parity_defect(&self, parity: Parity) -> f64 {
        let sign = match parity {
            Parity::Even => -1.0,
            Parity::Odd => 1.0,
        };
        let n = self.values.len();
        (0..n)
            .map(|i| (self.values[i] + sign * self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_integrates_quadratics_to_second_order() {
        let coarse = Grid::new(50).unwrap();
        let fine = Grid::new(100).unwrap();
        let exact = 1.0 / 3.0;
        let e1 = (Field::from_fn(coarse, |x| x).l2_norm().powi(2) - exact).abs();
        let e2 = (Field::from_fn(fine, |x| x).l2_norm().powi(2) - exact).abs();
        assert!((e1 / e2 - 4.0).abs() < 1e-6, "ratio {}", e1 / e2);
    }

    #[test]
    fn symmetrized_parts_are_exact() {
        let grid = Grid::new(64).unwrap();
        let f = Field::from_fn(grid, |x| (3.0 * x).exp() + x.sin());
        assert_eq!(f.symmetrized(Parity::Odd).parity_defect(Parity::Odd), 0.0);
        assert_eq!(f.symmetrized(Parity::Even).parity_defect(Parity::Even), 0.0);
        let mut sum = f.symmetrized(Parity::Odd);
        sum.add_scaled(&f.symmetrized(Parity::Even), 1.0);
        assert!(sum.distance(&f) < 1e-13);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let grid = Grid::new(4).unwrap();
        assert!(Field::from_values(grid, vec![0.0; 4]).is_err());
        assert!(Field::from_values(grid, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Grid::new(1).is_err());
    }
}
