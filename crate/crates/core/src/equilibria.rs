//! Explicit branches of equilibria bifurcating from infinity.
//!
//! Branch 1 consists of u¹(x) = c(e^x + e^{1−x}) and branch 2 of
//! u²(x) = c(e^x − e^{1−x}). Substituting into the nonlinear boundary
//! conditions gives λ as an explicit function of the amplitude c:
//!
//! ```text
//! λ(c) = σ_i − g(k_i c) / (k_i c),   k₁ = 1 + e,   k₂ = e − 1,
//! ```
//!
//! where k_i c is the boundary value |u(0)| = |u(1)|. Branches are therefore
//! parameterized by c; λ(c) may fold for non-monotone g.

use std::f64::consts::E;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::BoundaryNonlinearity;
use crate::parallel::{self, Execution};
use crate::spectrum::{linearized_spectrum_at, morse_index, LinearizationPoint, RobinSpectrum};
use crate::steklov;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BranchId {
    One,
    Two,
}

impl BranchId {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(BranchId::One),
            2 => Ok(BranchId::Two),
            _ => Err(Error::InvalidInput(format!("branch must be 1 or 2, got {i}"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            BranchId::One => 1,
            BranchId::Two => 2,
        }
    }

    /// k₁ = 1 + e, k₂ = e − 1.
    pub fn scale_factor(self) -> f64 {
        match self {
            BranchId::One => 1.0 + E,
            BranchId::Two => E - 1.0,
        }
    }

    pub fn base_sigma(self) -> f64 {
        steklov::sigma(self.index())
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// λ on a branch, flagged when it is the c → 0 limit σ_i − g'(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchLambda {
    pub value: f64,
    pub is_limit: bool,
}

#[derive(Debug, Clone)]
pub struct EquilibriumBranch {
    pub id: BranchId,
    pub g: BoundaryNonlinearity,
}

impl EquilibriumBranch {
    pub fn new(id: BranchId, g: BoundaryNonlinearity) -> Self {
        Self { id, g }
    }

    pub fn scale_factor(&self) -> f64 {
        self.id.scale_factor()
    }

    pub fn base_sigma(&self) -> f64 {
        self.id.base_sigma()
    }

    /// σ_i − g'(0), where the branch meets u ≡ 0.
    pub fn pitchfork_lambda(&self) -> f64 {
        self.base_sigma() - self.g.deriv_at_zero()
    }

    pub fn lambda_of_amplitude(&self, c: f64) -> BranchLambda {
        if c == 0.0 {
            return BranchLambda {
                value: self.pitchfork_lambda(),
                is_limit: true,
            };
        }
        let s = self.scale_factor() * c;
        BranchLambda {
            value: self.base_sigma() - self.g.eval(s) / s,
            is_limit: false,
        }
    }

    /// All c in [c_lo, c_hi] with λ(c) = λ, by a sign-change scan over
    /// `steps` cells and bisection.
    pub fn amplitudes_at_lambda(&self, lambda: f64, c_lo: f64, c_hi: f64, steps: usize) -> Vec<f64> {
        let f = |c: f64| self.lambda_of_amplitude(c).value - lambda;
        // bisection tolerance 1e-12 in c; a failed bracket (non-finite g)
        // just drops that cell
        let mut roots = Vec::new();
        if !(c_hi > c_lo) || steps == 0 {
            return roots;
        }
        let dc = (c_hi - c_lo) / steps as f64;
        let mut a = c_lo;
        let mut fa = f(a);
        if fa == 0.0 {
            roots.push(a);
        }
        for k in 1..=steps {
            let b = if k == steps { c_hi } else { c_lo + k as f64 * dc };
            let fb = f(b);
            if fb == 0.0 {
                roots.push(b);
            } else if fa != 0.0 && fa.signum() != fb.signum() {
                if let Ok(r) = crate::numerics::bisect(f, a, b, 1e-12) {
                    roots.push(r);
                }
            }
            a = b;
            fa = fb;
        }
        roots
    }

    pub fn shape(&self, x: f64) -> f64 {
        steklov::shape(self.id.index(), x)
    }

    /// c(e^x ± e^{1−x}) on the grid, with the branch symmetry imposed exactly.
    pub fn profile(&self, c: f64, grid: Grid) -> Field {
        Field::from_fn_with_parity(grid, steklov::parity(self.id.index()), |x| c * self.shape(x))
    }

    /// (u(0), u(1)) for amplitude c.
    pub fn boundary_values(&self, c: f64) -> (f64, f64) {
        (c * self.shape(0.0), c * self.shape(1.0))
    }

    /// Defects of the closed-form profile in both nonlinear boundary
    /// conditions at parameter λ.
    pub fn bc_defects(&self, c: f64, lambda: f64) -> (f64, f64) {
        let (u0, u1) = self.boundary_values(c);
        let ux0 = c * match self.id {
            BranchId::One => 1.0 - E,
            BranchId::Two => 1.0 + E,
        };
        let ux1 = c * match self.id {
            BranchId::One => E - 1.0,
            BranchId::Two => E + 1.0,
        };
        (
            (-ux0 - lambda * u0 - self.g.eval(u0)).abs(),
            (ux1 - lambda * u1 - self.g.eval(u1)).abs(),
        )
    }

    pub fn linearization(&self, c: f64) -> LinearizationPoint {
        let (left, right) = self.boundary_values(c);
        LinearizationPoint::Boundary { left, right }
    }

    pub fn linearized_spectrum(&self, c: f64, n_max: usize, grid: Grid) -> Result<RobinSpectrum> {
        let lambda = self.lambda_of_amplitude(c).value;
        linearized_spectrum_at(self.linearization(c), lambda, &self.g, n_max, grid)
    }

    pub fn stability(&self, c: f64, grid: Grid) -> Stability {
        match self.linearized_spectrum(c, 3, grid).and_then(|s| morse_index(&s)) {
            Ok(0) => Stability::Stable,
            Ok(m) => Stability::Saddle(m),
            Err(_) => Stability::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Saddle(usize),
    Unknown,
}

impl Stability {
    pub fn morse_index(self) -> Option<usize> {
        match self {
            Stability::Stable => Some(0),
            Stability::Saddle(m) => Some(m),
            Stability::Unknown => None,
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stability::Stable => f.write_str("stable"),
            Stability::Saddle(m) => write!(f, "saddle({m})"),
            Stability::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub lambda: f64,
    pub amplitude: f64,
    pub branch: BranchId,
    pub stability: Stability,
    pub is_limit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramConfig {
    pub c_min: f64,
    pub c_max: f64,
    pub steps: usize,
    pub grid: Grid,
    pub execution: Execution,
}

/// `steps` log-spaced amplitudes in [c_min, c_max].
pub fn log_mesh(c_min: f64, c_max: f64, steps: usize) -> Vec<f64> {
    let (a, b) = (c_min.ln(), c_max.ln());
    (0..steps)
        .map(|i| (a + (b - a) * i as f64 / (steps - 1) as f64).exp())
        .collect()
}

/// Sweeps each branch over ±c on a log mesh, recording λ(c) and the
/// stability of the equilibrium where it is hyperbolic. Rows are ordered by
/// branch, then sign (+ first), then increasing |c|.
pub fn bifurcation_diagram(
    g: &BoundaryNonlinearity,
    branches: &[BranchId],
    config: &DiagramConfig,
) -> Result<Vec<BifurcationPoint>> {
    if config.steps < 2 {
        return Err(Error::InvalidInput("diagram needs at least 2 steps".into()));
    }
    if !(config.c_min > 0.0 && config.c_max > config.c_min) {
        return Err(Error::InvalidInput(format!(
            "amplitude range must satisfy 0 < c_min < c_max, got [{}, {}]",
            config.c_min, config.c_max
        )));
    }
    let mesh = log_mesh(config.c_min, config.c_max, config.steps);
    let mut work = Vec::with_capacity(2 * mesh.len() * branches.len());
    for &id in branches {
        for sign in [1.0, -1.0] {
            work.extend(mesh.iter().map(|&c| (id, sign * c)));
        }
    }
    let grid = config.grid;
    Ok(parallel::map(&work, config.execution, |&(id, c)| {
        let branch = EquilibriumBranch::new(id, g.clone());
        let lam = branch.lambda_of_amplitude(c);
        BifurcationPoint {
            lambda: lam.value,
            amplitude: c,
            branch: id,
            stability: branch.stability(c, grid),
            is_limit: lam.is_limit,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steklov::{sigma1, sigma2};

    fn arctan() -> BoundaryNonlinearity {
        BoundaryNonlinearity::builtin("arctan").unwrap()
    }

    fn grid() -> Grid {
        Grid::new(200).unwrap()
    }

    #[test]
    fn lambda_of_amplitude_examples() {
        let b1 = EquilibriumBranch::new(BranchId::One, arctan());
        let lim = b1.lambda_of_amplitude(0.0);
        assert!(lim.is_limit);
        assert!((lim.value - (sigma1() - 1.0)).abs() < 1e-15);
        assert!((lim.value + 0.537_882_842_739_990_2).abs() < 1e-14);
        // σ₁ − arctan(1+e)/(1+e), 30-digit reference
        let v = b1.lambda_of_amplitude(1.0);
        assert!(!v.is_limit);
        assert!((v.value - 0.110_322_573_904_280_33).abs() < 1e-14);
        assert!((b1.lambda_of_amplitude(1e12).value - sigma1()).abs() < 1e-11);
    }

    #[test]
    fn amplitude_at_lambda_zero() {
        let b1 = EquilibriumBranch::new(BranchId::One, arctan());
        let roots = b1.amplitudes_at_lambda(0.0, 1e-3, 10.0, 10_000);
        assert_eq!(roots.len(), 1);
        // root of arctan(s)/s = σ₁, s = (1+e)c, 30-digit reference
        assert!((roots[0] - 0.700_955_474_910_281_9).abs() < 1e-10);
    }

    #[test]
    fn no_amplitude_beyond_sigma1() {
        let b1 = EquilibriumBranch::new(BranchId::One, arctan());
        assert!(b1.amplitudes_at_lambda(sigma1() + 0.1, 1e-3, 100.0, 10_000).is_empty());
    }

    #[test]
    fn sqrt_sin_has_many_turning_points() {
        let g = BoundaryNonlinearity::builtin("sqrt_sin").unwrap();
        let b1 = EquilibriumBranch::new(BranchId::One, g.clone());
        let roots = b1.amplitudes_at_lambda(sigma1(), 1e-3, 20.0, 20_000);
        let oracle = crate::oracle::branch_amplitude_scan(
            &|u| g.eval(u),
            sigma1(),
            1.0 + E,
            sigma1(),
            1e-3,
            20.0,
            200_000,
        );
        assert!(roots.len() >= 3);
        assert_eq!(roots.len(), oracle.len());
        for (r, o) in roots.iter().zip(&oracle) {
            assert!((r - o).abs() < 1e-9);
            // zeros of sin(kc)
            let m = ((1.0 + E) * r / std::f64::consts::PI).round();
            assert!(((1.0 + E) * r - m * std::f64::consts::PI).abs() < 1e-8);
        }
    }

    #[test]
    fn profiles_and_symmetry() {
        let g = grid();
        let b1 = EquilibriumBranch::new(BranchId::One, arctan());
        let b2 = EquilibriumBranch::new(BranchId::Two, arctan());
        assert_eq!(b1.profile(0.0, g).sup_norm(), 0.0);
        assert_eq!(b2.profile(1.0, g).values()[100], 0.0);
        for c in [0.3, -2.0, 17.0] {
            assert!(b1.profile(c, g).parity_defect(crate::grid::Parity::Even) <= 1e-14 * c.abs());
            assert!(b2.profile(c, g).parity_defect(crate::grid::Parity::Odd) <= 1e-14 * c.abs());
        }
        // rescaled by the boundary sup norm, the profile is the Steklov eigenfunction
        for (b, idx) in [(&b1, 1), (&b2, 2)] {
            let u = b.profile(3.7, g);
            let rescaled = u.scaled(1.0 / u.boundary_sup_norm());
            let phi = crate::steklov::steklov_pair(idx, g, crate::steklov::Normalization::SupNorm);
            assert!(rescaled.sub(&phi.profile).sup_norm() <= 1e-14);
        }
    }

    #[test]
    fn stability_along_arctan_branches() {
        let b1 = EquilibriumBranch::new(BranchId::One, arctan());
        let b2 = EquilibriumBranch::new(BranchId::Two, arctan());
        for c in [0.05, 0.7, 3.0, 40.0] {
            assert_eq!(b1.stability(c, grid()), Stability::Stable, "c={c}");
            assert_eq!(b2.stability(c, grid()), Stability::Saddle(1), "c={c}");
        }
    }

    #[test]
    fn neg_arctan_branch_starts_above_sigma() {
        let g = BoundaryNonlinearity::builtin("neg_arctan").unwrap();
        let b1 = EquilibriumBranch::new(BranchId::One, g.clone());
        let b2 = EquilibriumBranch::new(BranchId::Two, g);
        assert!((b1.lambda_of_amplitude(0.0).value - (sigma1() + 1.0)).abs() < 1e-15);
        assert!((b2.lambda_of_amplitude(0.0).value - (sigma2() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn diagram_rejects_bad_ranges() {
        let cfg = DiagramConfig {
            c_min: 0.0,
            c_max: 1.0,
            steps: 10,
            grid: grid(),
            execution: Execution::Sequential,
        };
        assert!(bifurcation_diagram(&arctan(), &[BranchId::One], &cfg).is_err());
    }
}
