//! Closed-form Steklov eigenpairs of Φ_xx − Φ = 0 on (0, 1) with
//! −Φ_x(0) = σΦ(0), Φ_x(1) = σΦ(1).
//!
//! There are exactly two eigenvalues, σ₁ = (e−1)/(e+1) and σ₂ = 1/σ₁, with
//! eigenfunctions proportional to e^x + e^{1−x} (even about x = 1/2) and
//! e^x − e^{1−x} (odd about x = 1/2).

use std::f64::consts::E;

use serde::Serialize;

use crate::grid::{Field, Grid, Parity};

/// σ₁ = (e−1)/(e+1) ≈ 0.4621.
pub fn sigma1() -> f64 {
    (E - 1.0) / (E + 1.0)
}

/// σ₂ = (e+1)/(e−1) ≈ 2.1640.
pub fn sigma2() -> f64 {
    (E + 1.0) / (E - 1.0)
}

pub fn sigma(index: usize) -> f64 {
    match index {
        1 => sigma1(),
        2 => sigma2(),
        _ => panic!("Steklov index must be 1 or 2, got {index}"),
    }
}

/// (σ+1)² − e²(σ−1)², which vanishes exactly at σ₁ and σ₂.
pub fn characteristic(sigma: f64) -> f64 {
    (sigma + 1.0).powi(2) - E * E * (sigma - 1.0).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Φ₁(0) = Φ₁(1) = 1; Φ₂(1) = 1, Φ₂(0) = −1.
    #[default]
    SupNorm,
    /// Unit continuous L² norm, same signs as `SupNorm`.
    L2Norm,
}

/// The unnormalized closed form: e^x + e^{1−x} (index 1) or e^x − e^{1−x}
/// (index 2).
pub fn shape(index: usize, x: f64) -> f64 {
    match index {
        1 => x.exp() + (1.0 - x).exp(),
        2 => x.exp() - (1.0 - x).exp(),
        _ => panic!("Steklov index must be 1 or 2, got {index}"),
    }
}

pub fn parity(index: usize) -> Parity {
    if index == 1 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Amplitude A_i multiplying [`shape`] under the given normalization.
pub fn amplitude(index: usize, normalization: Normalization) -> f64 {
    match (index, normalization) {
        (1, Normalization::SupNorm) => 1.0 / (1.0 + E),
        (2, Normalization::SupNorm) => 1.0 / (E - 1.0),
        // ∫₀¹ (e^x ± e^{1−x})² dx = e² − 1 ± 2e
        (1, Normalization::L2Norm) => 1.0 / (E * E - 1.0 + 2.0 * E).sqrt(),
        (2, Normalization::L2Norm) => 1.0 / (E * E - 1.0 - 2.0 * E).sqrt(),
        _ => panic!("Steklov index must be 1 or 2, got {index}"),
    }
}

#[derive(Debug, Clone)]
pub struct SteklovPair {
    pub index: usize,
    pub sigma: f64,
    pub normalization: Normalization,
    pub profile: Field,
}

impl SteklovPair {
    pub fn eval(&self, x: f64) -> f64 {
        amplitude(self.index, self.normalization) * shape(self.index, x)
    }
}

pub fn steklov_pair(index: usize, grid: Grid, normalization: Normalization) -> SteklovPair {
    let a = amplitude(index, normalization);
    SteklovPair {
        index,
        sigma: sigma(index),
        normalization,
        profile: Field::from_fn_with_parity(grid, parity(index), |x| a * shape(index, x)),
    }
}

pub fn steklov_eigenpairs(grid: Grid, normalization: Normalization) -> [SteklovPair; 2] {
    [
        steklov_pair(1, grid, normalization),
        steklov_pair(2, grid, normalization),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub interior: f64,
    pub boundary: f64,
}

/// Discrete defects of a sampled profile in Φ_xx − Φ = 0 and in the two
/// Robin conditions with coefficient σ.
///
/// The interior uses centered second differences; the boundary conditions
/// use one-sided second-order first differences.
pub fn steklov_residual(profile: &Field, sigma: f64) -> Residual {
    let v = profile.values();
    let h = profile.grid().h();
    let n = v.len() - 1;
    let interior = (1..n)
        .map(|i| ((v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h) - v[i]).abs())
        .fold(0.0, f64::max);
    let dx0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    let dx1 = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    let boundary = (-dx0 - sigma * v[0]).abs().max((dx1 - sigma * v[n]).abs());
    Residual { interior, boundary }
}
