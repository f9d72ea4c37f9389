//! Robin eigenvalue problem
//!
//! ```text
//! φ_xx − φ = μφ on (0, 1),   −φ_x(0) = γφ(0),   φ_x(1) = γφ(1)
//! ```
//!
//! for a single Robin coefficient γ. The linearization at u* ≡ 0
//! (γ = λ + g'(0)), at the symmetric branch equilibria (γ = λ + g'(u*(0)))
//! and at infinity (γ = λ) are all instances of this problem.
//!
//! Writing s = √|1+μ|, eigenvalues above −1 are roots of
//! e^s(s − γ) = ±(s + γ), and eigenvalues below −1 are roots of
//! tan s = 2γs/(γ² − s²). Both are solved in forms multiplied through by
//! their denominators so that the functions being bracketed are smooth; the
//! brackets themselves are laid out between the singular points
//! s = (2k+1)π/2 and s = |γ| of the original identities and never touch
//! them. μ = −1 is an eigenvalue only for γ ∈ {0, 2}, with an affine
//! eigenfunction.
//!
//! Every solve is checked against Sturm oscillation: the k-th eigenfunction
//! must have exactly k − 1 interior zeros. A missed or spurious root shows up
//! as a broken zero count and is reported as a bracketing failure rather
//! than silently dropped.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Parity};
use crate::nonlinearity::BoundaryNonlinearity;
use crate::numerics::{bisect, gauss_legendre};

/// Half-width of the excluded neighbourhoods around s = (2k+1)π/2 and s = |γ|.
pub const SINGULAR_GAP: f64 = 1e-6;
/// |γ| or |γ − 2| below this is treated as the degenerate case μ = −1.
pub const DEGENERATE_TOL: f64 = 1e-9;
/// Eigenvalues closer than this to 0 make an equilibrium non-hyperbolic.
pub const HYPERBOLICITY_TOL: f64 = 1e-8;
/// Minimum number of grid cells per half-wave of an eigenfunction.
pub const NODES_PER_HALF_WAVE: f64 = 8.0;
pub const MIN_GRID_CELLS: usize = 32;

const ROOT_TOL: f64 = 1e-14;
const CELLS_PER_BRACKET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeShape {
    /// μ > −1: φ ∝ s·cosh(sx) − γ·sinh(sx), s = √(1+μ).
    Hyperbolic { s: f64 },
    /// μ = −1: φ ∝ 1 − γx.
    Affine,
    /// μ < −1: φ ∝ s·cos(sx) − γ·sin(sx), s = √(−1−μ).
    Oscillatory { s: f64 },
}

/// One eigenpair, with the eigenfunction kept in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenmode {
    pub index: usize,
    pub mu: f64,
    pub gamma: f64,
    pub shape: ModeShape,
    /// Factor making the closed form unit in continuous L².
    pub scale: f64,
}

impl Eigenmode {
    fn new(index: usize, gamma: f64, shape: ModeShape) -> Self {
        let mu = match shape {
            ModeShape::Hyperbolic { s } => s * s - 1.0,
            ModeShape::Affine => -1.0,
            ModeShape::Oscillatory { s } => -1.0 - s * s,
        };
        let mut mode = Self {
            index,
            mu,
            gamma,
            shape,
            scale: 1.0,
        };
        let panels = 8 + (2.0 * mode.wavenumber()).ceil() as usize;
        let norm2 = gauss_legendre(|x| mode.raw(x).powi(2), 0.0, 1.0, panels);
        mode.scale = 1.0 / norm2.sqrt();
        mode
    }

    pub fn wavenumber(&self) -> f64 {
        match self.shape {
            ModeShape::Hyperbolic { s } | ModeShape::Oscillatory { s } => s,
            ModeShape::Affine => 0.0,
        }
    }

    fn raw(&self, x: f64) -> f64 {
        let g = self.gamma;
        match self.shape {
            ModeShape::Hyperbolic { s } => s * (s * x).cosh() - g * (s * x).sinh(),
            ModeShape::Affine => 1.0 - g * x,
            ModeShape::Oscillatory { s } => s * (s * x).cos() - g * (s * x).sin(),
        }
    }

    fn raw_derivative(&self, x: f64) -> f64 {
        let g = self.gamma;
        match self.shape {
            ModeShape::Hyperbolic { s } => s * (s * (s * x).sinh() - g * (s * x).cosh()),
            ModeShape::Affine => -g,
            ModeShape::Oscillatory { s } => -s * (s * (s * x).sin() + g * (s * x).cos()),
        }
    }

    /// L²-normalized eigenfunction value.
    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.raw(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.scale * self.raw_derivative(x)
    }

    /// Even for odd indices, odd for even indices.
    pub fn parity(&self) -> Parity {
        if self.index % 2 == 1 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Samples the eigenfunction with its parity imposed exactly.
    pub fn sample(&self, grid: Grid) -> Field {
        Field::from_fn_with_parity(grid, self.parity(), |x| self.eval(x))
    }

    /// Defects in −φ'(0) = γφ(0) and φ'(1) = γφ(1).
    pub fn bc_residuals(&self) -> (f64, f64) {
        let g = self.gamma;
        (
            (-self.derivative(0.0) - g * self.eval(0.0)).abs(),
            (self.derivative(1.0) - g * self.eval(1.0)).abs(),
        )
    }
}

/// The n_max largest eigenvalues of the Robin problem with their
/// L²-orthonormal eigenfunctions, sorted by decreasing μ.
#[derive(Debug, Clone)]
pub struct RobinSpectrum {
    pub gamma: f64,
    pub grid: Grid,
    pub modes: Vec<Eigenmode>,
    pub eigenfunctions: Vec<Field>,
}

impl RobinSpectrum {
    pub fn n_max(&self) -> usize {
        self.modes.len()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.mu).collect()
    }

    /// μ_n, 1-based.
    pub fn mu(&self, n: usize) -> f64 {
        self.modes[n - 1].mu
    }

    /// Sampled φ_n, 1-based.
    pub fn phi(&self, n: usize) -> &Field {
        &self.eigenfunctions[n - 1]
    }

    pub fn mode(&self, n: usize) -> &Eigenmode {
        &self.modes[n - 1]
    }

    /// Trapezoid coefficients ⟨u, φ_n⟩ for n = 1..=count.
    pub fn project(&self, u: &Field, count: usize) -> Vec<f64> {
        self.eigenfunctions
            .iter()
            .take(count)
            .map(|phi| u.dot(phi))
            .collect()
    }

    /// Number of eigenvalues strictly above −1.
    pub fn count_above_minus_one(&self) -> usize {
        self.modes
            .iter()
            .filter(|m| matches!(m.shape, ModeShape::Hyperbolic { .. }))
            .count()
    }

    pub fn has_affine_mode(&self) -> bool {
        self.modes.iter().any(|m| m.shape == ModeShape::Affine)
    }
}

/// Diagnostics from a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    /// Smallest distance from any bracketing evaluation point to a
    /// singular point of the untransformed identities.
    pub min_singular_distance: f64,
    pub evaluations: usize,
}

pub fn is_degenerate(gamma: f64) -> bool {
    gamma.abs() <= DEGENERATE_TOL || (gamma - 2.0).abs() <= DEGENERATE_TOL
}

/// expm1(s)/s with the removable singularity filled in.
fn expm1_over(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        s.exp_m1() / s
    }
}

fn sinc(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        s.sin() / s
    }
}

/// e^s(s−γ) − (s+γ), rewritten with expm1.
pub(crate) fn hyperbolic_plus(gamma: f64, s: f64) -> f64 {
    s.exp_m1() * (s - gamma) - 2.0 * gamma
}

/// [e^s(s−γ) + (s+γ)] / s; the trivial root at s = 0 is divided out.
pub(crate) fn hyperbolic_minus(gamma: f64, s: f64) -> f64 {
    expm1_over(s) * (s - gamma) + 2.0
}

/// [(γ² − s²)·sin s − 2γs·cos s] / s, the tan identity multiplied through.
pub(crate) fn oscillatory(gamma: f64, s: f64) -> f64 {
    (gamma * gamma - s * s) * sinc(s) - 2.0 * gamma * s.cos()
}

struct Bracketer {
    singular: f64,
    min_distance: Cell<f64>,
    evaluations: Cell<usize>,
}

impl Bracketer {
    fn new(gamma: f64) -> Self {
        Self {
            singular: gamma.abs(),
            min_distance: Cell::new(f64::INFINITY),
            evaluations: Cell::new(0),
        }
    }

    fn stats(&self) -> SolveStats {
        SolveStats {
            min_singular_distance: self.min_distance.get(),
            evaluations: self.evaluations.get(),
        }
    }

    fn eval(&self, f: &dyn Fn(f64) -> f64, s: f64) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        let k = ((s / PI) - 0.5).round().max(0.0);
        let tan_pole = (2.0 * k + 1.0) * FRAC_PI_2;
        let d = (s - tan_pole).abs().min((s - self.singular).abs());
        self.min_distance.set(self.min_distance.get().min(d));
        f(s)
    }

    /// Roots of `f` on [lo, hi] by a uniform scan plus bisection.
    fn roots(&self, f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        if !(hi > lo) {
            return Ok(out);
        }
        let cells = CELLS_PER_BRACKET;
        let dx = (hi - lo) / cells as f64;
        let mut a = lo;
        let mut fa = self.eval(f, a);
        for k in 1..=cells {
            let b = if k == cells { hi } else { lo + k as f64 * dx };
            let fb = self.eval(f, b);
            if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
                out.push(bisect(|x| self.eval(f, x), a, b, ROOT_TOL * b.max(1.0))?);
            } else if fb == 0.0 && k < cells {
                out.push(b);
            }
            a = b;
            fa = fb;
        }
        Ok(out)
    }
}

/// Splits (lo, hi) at every singular point strictly inside it and shrinks
/// each piece away from the singular endpoints.
fn safe_pieces(lo: f64, hi: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
    let mut points: Vec<f64> = cuts.iter().copied().filter(|&c| c > lo && c < hi).collect();
    points.sort_by(f64::total_cmp);
    let mut edges = vec![lo];
    edges.extend(points);
    edges.push(hi);
    edges
        .windows(2)
        .map(|w| (w[0] + SINGULAR_GAP, w[1] - SINGULAR_GAP))
        .filter(|(a, b)| b > a)
        .collect()
}

fn count_interior_zeros(mode: &Eigenmode) -> usize {
    let samples = 4096.max(64 * (mode.wavenumber() as usize + 1));
    let mut count = 0;
    let mut prev = mode.raw(0.0);
    for i in 1..=samples {
        let v = mode.raw(i as f64 / samples as f64);
        if v != 0.0 {
            if prev != 0.0 && v.signum() != prev.signum() {
                count += 1;
            }
            prev = v;
        }
    }
    count
}

pub(crate) fn solve_with_stats(
    gamma: f64,
    n_max: usize,
    grid: Grid,
) -> Result<(RobinSpectrum, SolveStats)> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    if grid.n_cells() < MIN_GRID_CELLS {
        return Err(Error::InvalidInput(format!(
            "grid must have at least {MIN_GRID_CELLS} cells, got {}",
            grid.n_cells()
        )));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidInput(format!("Robin coefficient {gamma}")));
    }
    let br = Bracketer::new(gamma);
    let degenerate = is_degenerate(gamma);
    let abs_g = gamma.abs();
    // Hyperbolic roots satisfy s < |γ| + 1; see the module docs.
    let s_top = abs_g + 2.0;
    let keep = |s: f64| !(degenerate && s < 1e-4);

    let mut hyperbolic = Vec::new();
    for (a, b) in safe_pieces(0.0, s_top, &[abs_g]) {
        let plus = |s: f64| hyperbolic_plus(gamma, s);
        let minus = |s: f64| hyperbolic_minus(gamma, s);
        hyperbolic.extend(br.roots(&plus, a, b)?.into_iter().filter(|&s| keep(s)));
        hyperbolic.extend(br.roots(&minus, a, b)?.into_iter().filter(|&s| keep(s)));
    }
    hyperbolic.sort_by(|a, b| b.total_cmp(a));
    hyperbolic.dedup_by(|a, b| (*a - *b).abs() < 1e-10);

    let mut shapes: Vec<ModeShape> = hyperbolic
        .iter()
        .map(|&s| ModeShape::Hyperbolic { s })
        .collect();
    if degenerate {
        shapes.push(ModeShape::Affine);
    }

    let osc = |s: f64| oscillatory(gamma, s);
    let mut oscillatory_roots: Vec<f64> = Vec::new();
    let mut k = 0usize;
    // One extra branch beyond the count so a root sitting just past a pole
    // cannot be skipped.
    let mut extra = 1;
    loop {
        let lo = if k == 0 { 0.0 } else { (2 * k - 1) as f64 * FRAC_PI_2 };
        let hi = (2 * k + 1) as f64 * FRAC_PI_2;
        for (a, b) in safe_pieces(lo, hi, &[abs_g]) {
            oscillatory_roots.extend(br.roots(&osc, a, b)?.into_iter().filter(|&s| keep(s)));
        }
        k += 1;
        if shapes.len() + oscillatory_roots.len() >= n_max {
            if extra == 0 {
                break;
            }
            extra -= 1;
        }
        if k > 100_000 {
            return Err(Error::BracketFailure {
                lo,
                hi,
                reason: "too few oscillatory roots".into(),
            });
        }
    }
    oscillatory_roots.sort_by(f64::total_cmp);
    oscillatory_roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    shapes.extend(oscillatory_roots.into_iter().map(|s| ModeShape::Oscillatory { s }));
    shapes.truncate(n_max);
    if shapes.len() < n_max {
        return Err(Error::BracketFailure {
            lo: 0.0,
            hi: k as f64 * PI,
            reason: format!("found {} of {n_max} eigenvalues", shapes.len()),
        });
    }

    let modes: Vec<Eigenmode> = shapes
        .into_iter()
        .enumerate()
        .map(|(i, shape)| Eigenmode::new(i + 1, gamma, shape))
        .collect();

    for m in &modes {
        let s = m.wavenumber();
        if matches!(m.shape, ModeShape::Oscillatory { .. }) {
            let needed = (NODES_PER_HALF_WAVE * s / PI).ceil() as usize;
            if needed > grid.n_cells() {
                return Err(Error::GridTooCoarse {
                    s,
                    needed,
                    available: grid.n_cells(),
                });
            }
        }
        let zeros = count_interior_zeros(m);
        if zeros != m.index - 1 {
            let (lo, hi) = bracket_of(m);
            return Err(Error::BracketFailure {
                lo,
                hi,
                reason: format!(
                    "eigenfunction {} has {zeros} interior zeros, expected {}",
                    m.index,
                    m.index - 1
                ),
            });
        }
    }

    let eigenfunctions = modes.iter().map(|m| m.sample(grid)).collect();
    Ok((
        RobinSpectrum {
            gamma,
            grid,
            modes,
            eigenfunctions,
        },
        br.stats(),
    ))
}

/// The bracketing interval in s a mode's root was searched in.
fn bracket_of(m: &Eigenmode) -> (f64, f64) {
    let s = m.wavenumber();
    match m.shape {
        ModeShape::Oscillatory { .. } => {
            let k = ((s / PI) + 0.5).floor();
            (((2.0 * k - 1.0) * FRAC_PI_2).max(0.0), (2.0 * k + 1.0) * FRAC_PI_2)
        }
        _ => (0.0, m.gamma.abs() + 2.0),
    }
}

/// The n_max largest Robin eigenvalues for coefficient γ.
pub fn solve_spectrum(gamma: f64, n_max: usize, grid: Grid) -> Result<RobinSpectrum> {
    solve_with_stats(gamma, n_max, grid).map(|(s, _)| s)
}

/// Spectrum of the linearization at infinity, where g' → 0 and the Robin
/// coefficient is λ itself.
pub fn spectrum_at_infinity(lambda: f64, n_max: usize, grid: Grid) -> Result<RobinSpectrum> {
    solve_spectrum(lambda, n_max, grid)
}

/// Where to linearize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearizationPoint {
    /// u* ≡ 0.
    Zero,
    /// An equilibrium given by its boundary values u*(0), u*(1).
    Boundary { left: f64, right: f64 },
}

impl LinearizationPoint {
    pub fn of_field(u: &Field) -> Self {
        Self::Boundary {
            left: u.left(),
            right: u.right(),
        }
    }
}

/// Robin coefficient λ + g'(u*(0)) of the linearization, checking that the
/// two boundaries agree.
pub fn linearized_gamma(
    point: LinearizationPoint,
    lambda: f64,
    g: &BoundaryNonlinearity,
) -> Result<f64> {
    let (left, right) = match point {
        LinearizationPoint::Zero => (g.deriv_at_zero(), g.deriv_at_zero()),
        LinearizationPoint::Boundary { left, right } => (g.deriv(left), g.deriv(right)),
    };
    if (left - right).abs() > 1e-10 {
        return Err(Error::AsymmetricRobin { left, right });
    }
    Ok(lambda + left)
}

pub fn linearized_spectrum_at(
    point: LinearizationPoint,
    lambda: f64,
    g: &BoundaryNonlinearity,
    n_max: usize,
    grid: Grid,
) -> Result<RobinSpectrum> {
    solve_spectrum(linearized_gamma(point, lambda, g)?, n_max, grid)
}

/// Number of strictly positive eigenvalues. Only the leading eigenvalues
/// above −1 can be positive, so any spectrum with n_max ≥ 3 suffices.
pub fn morse_index(spec: &RobinSpectrum) -> Result<usize> {
    if let Some(m) = spec.modes.iter().find(|m| m.mu.abs() < HYPERBOLICITY_TOL) {
        return Err(Error::NonHyperbolic {
            mu: m.mu,
            tol: HYPERBOLICITY_TOL,
        });
    }
    Ok(spec.modes.iter().filter(|m| m.mu > 0.0).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steklov::{sigma1, sigma2};

    fn grid() -> Grid {
        Grid::new(200).unwrap()
    }

    #[test]
    fn gamma_zero_is_neumann_shifted() {
        let spec = solve_spectrum(0.0, 8, grid()).unwrap();
        assert_eq!(spec.modes[0].shape, ModeShape::Affine);
        assert_eq!(spec.mu(1), -1.0);
        for k in 2..=8 {
            let expected = -1.0 - ((k - 1) as f64 * PI).powi(2);
            assert!((spec.mu(k) - expected).abs() < 1e-8, "k={k}");
        }
        // constant eigenfunction, unit L² norm
        let phi = spec.phi(1);
        assert!(phi.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn steklov_values_give_zero_eigenvalue() {
        let s1 = solve_spectrum(sigma1(), 4, grid()).unwrap();
        assert!(s1.mu(1).abs() < 1e-8);
        let s2 = solve_spectrum(sigma2(), 4, grid()).unwrap();
        assert!(s2.mu(2).abs() < 1e-8);
        assert!(s2.mu(1) > 0.0);
    }

    #[test]
    fn gamma_two_has_affine_mode() {
        let spec = solve_spectrum(2.0, 5, grid()).unwrap();
        assert!(spec.mu(1) > 0.0);
        assert_eq!(spec.modes[1].shape, ModeShape::Affine);
        let m = spec.mode(2);
        for &x in &[0.0, 0.25, 0.7, 1.0] {
            let expected = (1.0 - 2.0 * x) * 3f64.sqrt();
            assert!((m.eval(x) - expected).abs() < 1e-12);
        }
        let (r0, r1) = m.bc_residuals();
        assert!(r0 <= 1e-8 && r1 <= 1e-8);
    }

    #[test]
    fn gamma_one_leading_eigenvalue() {
        let spec = solve_spectrum(1.0, 3, grid()).unwrap();
        // root of e^s(s−1) = s+1 from an independent scan: s = 1.543404638...
        assert!((spec.mu(1) - 1.382_097_877_890_838).abs() < 1e-10);
        assert!((spec.mu(1) - 1.38).abs() < 5e-3);
    }

    #[test]
    fn eigenvalues_strictly_decrease_and_bcs_hold() {
        for &g in &[-3.0, -0.5, 0.3, 1.0, 2.5, 4.0, 6.0] {
            let spec = solve_spectrum(g, 10, grid()).unwrap();
            for w in spec.modes.windows(2) {
                assert!(w[0].mu > w[1].mu, "γ={g}");
            }
            for m in &spec.modes {
                let (r0, r1) = m.bc_residuals();
                assert!(r0 <= 1e-8 && r1 <= 1e-8, "γ={g}, mode {}", m.index);
                assert!(m.eval(0.0) >= 0.0);
            }
            assert!(spec.count_above_minus_one() <= 2);
        }
    }

    #[test]
    fn orthonormal_in_continuous_l2() {
        let spec = solve_spectrum(2.7, 8, grid()).unwrap();
        for a in &spec.modes {
            for b in &spec.modes {
                let ip = gauss_legendre(|x| a.eval(x) * b.eval(x), 0.0, 1.0, 64);
                let expected = if a.index == b.index { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-8, "{} {}: {ip}", a.index, b.index);
            }
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let err = solve_spectrum(1.0, 20, Grid::new(32).unwrap()).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }), "{err}");
    }

    #[test]
    fn brackets_stay_clear_of_singularities() {
        for &g in &[-2.9, 0.0, 1.0, 1.5, 2.0, 4.712, 5.9] {
            let (_, stats) = solve_with_stats(g, 12, grid()).unwrap();
            assert!(stats.min_singular_distance >= SINGULAR_GAP * 0.999, "γ={g}: {stats:?}");
        }
    }

    #[test]
    fn morse_index_at_zero_for_arctan() {
        let g = BoundaryNonlinearity::builtin("arctan").unwrap();
        let idx = |lambda: f64| {
            morse_index(&linearized_spectrum_at(LinearizationPoint::Zero, lambda, &g, 4, grid()).unwrap())
                .unwrap()
        };
        assert_eq!(idx(-1.0), 0);
        assert_eq!(idx(0.0), 1);
        assert_eq!(idx(3.0), 2);
    }

    #[test]
    fn non_hyperbolic_is_an_error() {
        let g = BoundaryNonlinearity::builtin("arctan").unwrap();
        let spec =
            linearized_spectrum_at(LinearizationPoint::Zero, sigma1() - 1.0, &g, 4, grid()).unwrap();
        assert!(spec.mu(1).abs() < 1e-8);
        assert!(matches!(morse_index(&spec), Err(Error::NonHyperbolic { .. })));
    }

    #[test]
    fn asymmetric_linearization_is_rejected() {
        let g = BoundaryNonlinearity::builtin("arctan").unwrap();
        let err = linearized_spectrum_at(
            LinearizationPoint::Boundary { left: 0.0, right: 1.0 },
            0.0,
            &g,
            3,
            grid(),
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("asymmetric Robin coefficients unsupported"));
    }
}
