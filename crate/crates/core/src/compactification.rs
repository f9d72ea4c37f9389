//! Poincaré compactification of the phase space.
//!
//! A field u is sent to (U, z) = (u, 1)/√(1 + ‖u‖²) on the upper hemisphere
//! of L² × ℝ. Unbounded trajectories reach the equator z = 0, the sphere at
//! infinity, where the induced flow is the nonlocal linear flow
//!
//! ```text
//! U_t = AU − ⟨AU, U⟩U,   A = ∂_xx − 1 with Robin coefficient λ,
//! ```
//!
//! whose equilibria are the eigenfunctions ±φ_n of the spectrum at infinity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::BoundaryNonlinearity;
use crate::pde::{RobinOperator, Scheme, Stepper};
use crate::spectrum::RobinSpectrum;

/// Below this height the boundary nonlinearity z·g(U/z) is taken as zero.
pub const Z_CUTOFF: f64 = 1e-12;
/// Smallest admissible ⟨U, φ_N⟩ in a tangent chart.
pub const CHART_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HemispherePoint {
    pub u: Field,
    pub z: f64,
}

impl HemispherePoint {
    /// Normalizes (u, z) onto the unit sphere.
    pub fn new(u: Field, z: f64) -> Result<Self> {
        let mut p = Self { u, z };
        if !p.renormalize() {
            return Err(Error::InvalidInput("(U, z) = (0, 0) is not on the sphere".into()));
        }
        Ok(p)
    }

    pub fn north_pole(grid: Grid) -> Self {
        Self {
            u: Field::zeros(grid),
            z: 1.0,
        }
    }

    /// A point on the sphere at infinity.
    pub fn at_infinity(u: &Field) -> Result<Self> {
        Self::new(u.clone(), 0.0)
    }

    /// ‖U‖² + z² − 1.
    pub fn constraint_defect(&self) -> f64 {
        self.u.l2_norm().powi(2) + self.z * self.z - 1.0
    }

    pub fn is_at_infinity(&self) -> bool {
        self.z == 0.0
    }

    /// L² × ℝ distance to (±φ, 0) with the better sign.
    pub fn equator_distance(&self, phi: &Field) -> f64 {
        let plus = self.u.distance(phi);
        let minus = self.u.distance(&phi.scaled(-1.0));
        (plus.min(minus).powi(2) + self.z * self.z).sqrt()
    }

    fn renormalize(&mut self) -> bool {
        let r = (self.u.l2_norm().powi(2) + self.z * self.z).sqrt();
        if !(r > 0.0 && r.is_finite()) {
            return false;
        }
        if r != 1.0 {
            for v in self.u.values_mut() {
                *v /= r;
            }
            self.z /= r;
        }
        true
    }
}

/// (u, 1)/√(1 + ‖u‖²).
pub fn project(u: &Field) -> HemispherePoint {
    let r = (1.0 + u.l2_norm().powi(2)).sqrt();
    HemispherePoint {
        u: u.scaled(1.0 / r),
        z: 1.0 / r,
    }
}

/// U/z.
pub fn unproject(p: &HemispherePoint) -> Result<Field> {
    if p.z <= Z_CUTOFF {
        return Err(Error::PointAtInfinity { z: p.z });
    }
    Ok(p.u.scaled(1.0 / p.z))
}

/// z·g(U/z), zero near the equator.
pub fn g_z(g: &BoundaryNonlinearity, u: f64, z: f64) -> f64 {
    if z < Z_CUTOFF {
        0.0
    } else {
        z * g.eval(u / z)
    }
}

/// ⟨AU, U⟩ by the boundary-flux identity
///
/// ```text
/// ⟨AU, U⟩ = (U_x U)|₀¹ − ‖U‖²_{H¹}
/// ```
///
/// with the flux U_x = λU + g^z(U) at x = 1 and −U_x = λU + g^z(U) at x = 0.
/// On the grid this is exactly the trapezoid inner product of U with the
/// semi-discrete right-hand side.
pub fn flux_inner_product(u: &Field, z: f64, lambda: f64, g: Option<&BoundaryNonlinearity>) -> f64 {
    let (l, r) = (u.left(), u.right());
    let mut flux = lambda * (l * l + r * r);
    if let Some(g) = g {
        flux += l * g_z(g, l, z) + r * g_z(g, r, z);
    }
    flux - u.gradient_energy() - u.l2_norm().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HemisphereConfig {
    pub lambda: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    pub scheme: Scheme,
}

impl HemisphereConfig {
    pub fn new(lambda: f64, t_end: f64) -> Self {
        Self {
            lambda,
            dt: crate::pde::DEFAULT_DT,
            t_end,
            sample_interval: crate::pde::DEFAULT_SAMPLE_INTERVAL,
            scheme: Scheme::BackwardEuler,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HemisphereTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<HemispherePoint>,
    /// Largest |‖U‖² + z² − 1| before renormalization, over all steps.
    pub max_step_drift: f64,
    /// Largest |‖U‖² + z² − 1| after renormalization.
    pub max_constraint_defect: f64,
}

impl HemisphereTrajectory {
    pub fn final_point(&self) -> &HemispherePoint {
        self.points.last().expect("trajectory holds the initial point")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial point")
    }
}

/// Integrates the induced flow on the hemisphere (or, with `g = None` or
/// z = 0, on the sphere at infinity), renormalizing after every step.
pub fn hemisphere_simulate(
    p0: &HemispherePoint,
    g: Option<&BoundaryNonlinearity>,
    config: &HemisphereConfig,
) -> Result<HemisphereTrajectory> {
    hemisphere_simulate_until(p0, g, config, |_, _| false)
}

/// As [`hemisphere_simulate`], stopping early at the first sample for which
/// `stop(t, p)` holds.
pub fn hemisphere_simulate_until(
    p0: &HemispherePoint,
    g: Option<&BoundaryNonlinearity>,
    config: &HemisphereConfig,
    mut stop: impl FnMut(f64, &HemispherePoint) -> bool,
) -> Result<HemisphereTrajectory> {
    if (p0.constraint_defect()).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "initial point is off the sphere by {:.3e}",
            p0.constraint_defect()
        )));
    }
    if p0.z < 0.0 {
        return Err(Error::InvalidInput("z must be nonnegative".into()));
    }
    let grid = p0.u.grid();
    let lambda = config.lambda;
    let stepper = Stepper::new(grid, lambda, config.dt, config.scheme)?;
    let n_steps = (config.t_end / config.dt).round() as usize;
    let sample_every = ((config.sample_interval / config.dt).round() as usize).max(1);

    let mut p = p0.clone();
    let mut traj = HemisphereTrajectory {
        times: vec![0.0],
        points: vec![p.clone()],
        max_step_drift: 0.0,
        max_constraint_defect: p.constraint_defect().abs(),
    };
    if stop(0.0, &p) {
        return Ok(traj);
    }
    for k in 1..=n_steps {
        let t = k as f64 * config.dt;
        let rho = -flux_inner_product(&p.u, p.z, lambda, g);
        let (gl, gr) = match g {
            Some(g) => (g_z(g, p.u.left(), p.z), g_z(g, p.u.right(), p.z)),
            None => (0.0, 0.0),
        };
        // The nonlocal term is a scalar multiple of (U, z); applying it after
        // the linear solve keeps the direction of U evolving exactly as in the
        // linear scheme, and it cancels the norm change to first order.
        stepper.advance(p.u.values_mut(), gl, gr);
        let growth = 1.0 + config.dt * rho;
        for v in p.u.values_mut() {
            *v *= growth;
        }
        p.z *= growth;
        if !p.u.is_finite() || !p.z.is_finite() {
            return Err(Error::NumericalOverflow { time: t });
        }
        traj.max_step_drift = traj.max_step_drift.max(p.constraint_defect().abs());
        if !p.renormalize() {
            return Err(Error::NumericalOverflow { time: t });
        }
        traj.max_constraint_defect = traj.max_constraint_defect.max(p.constraint_defect().abs());
        if k % sample_every == 0 || k == n_steps {
            traj.times.push(t);
            traj.points.push(p.clone());
            if stop(t, &p) {
                break;
            }
        }
    }
    Ok(traj)
}

/// Flow on the sphere at infinity from a unit-norm U0.
pub fn infinity_flow_simulate(u0: &Field, config: &HemisphereConfig) -> Result<HemisphereTrajectory> {
    let norm = u0.l2_norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("‖U0‖ = {norm}, expected 1")));
    }
    let p0 = HemispherePoint {
        u: u0.clone(),
        z: 0.0,
    };
    hemisphere_simulate(&p0, None, config)
}

/// ‖AU − ⟨AU, U⟩U‖ for unit U, with U_xx from a second-order closure that
/// uses the linear Robin conditions at both ends.
pub fn infinity_equilibrium_residual(phi: &Field, lambda: f64) -> f64 {
    let au = second_order_operator(phi, lambda);
    let rayleigh = au.dot(phi);
    au.sub(&phi.scaled(rayleigh)).l2_norm()
}

/// U_xx − U with u'(0) = −λu(0), u'(1) = λu(1).
fn second_order_operator(u: &Field, lambda: f64) -> Field {
    let grid = u.grid();
    let h = grid.h();
    let v = u.values();
    let n = v.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h) - v[i];
    }
    let d0 = -lambda * v[0];
    out[0] = (8.0 * v[1] - v[2] - 7.0 * v[0] - 6.0 * h * d0) / (2.0 * h * h) - v[0];
    let d1 = lambda * v[n - 1];
    out[n - 1] = (8.0 * v[n - 2] - v[n - 3] - 7.0 * v[n - 1] + 6.0 * h * d1) / (2.0 * h * h) - v[n - 1];
    Field::from_values_unchecked(grid, out)
}

/// Discrete counterparts of the eigenpairs of the spectrum at infinity:
/// eigenpairs of the semi-discrete operator nearest to each μ_n.
pub fn discrete_eigenpairs(spectrum: &RobinSpectrum, count: usize) -> Result<Vec<(f64, Field)>> {
    let op = RobinOperator::new(spectrum.grid, spectrum.gamma);
    (1..=count.min(spectrum.n_max()))
        .map(|n| op.eigenpair_near(spectrum.mu(n), spectrum.phi(n)))
        .collect()
}

/// Affine coordinates in the chart tangent to (φ_N, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentChartPoint {
    pub chart: usize,
    pub xi: Field,
    pub zeta: f64,
}

/// (ξ, ζ) = (U, z)/⟨U, φ_N⟩ for φ_N a unit eigenfunction.
pub fn chart_change(p: &HemispherePoint, chart: usize, phi_n: &Field) -> Result<TangentChartPoint> {
    if chart != 1 && chart != 2 {
        return Err(Error::InvalidInput(format!("chart index must be 1 or 2, got {chart}")));
    }
    let a = p.u.dot(phi_n);
    if a <= CHART_TOL {
        return Err(Error::OutsideChart {
            chart,
            projection: a,
        });
    }
    Ok(TangentChartPoint {
        chart,
        xi: p.u.scaled(1.0 / a),
        zeta: p.z / a,
    })
}

/// ξ_n(t) = ξ_n(0)·exp((μ_n − μ_N)t), with ξ_N ≡ 1. `mus[n−1] = μ_n`.
pub fn xi_flow_closed_form(xi0: &[f64], chart: usize, mus: &[f64], t: f64) -> Result<Vec<f64>> {
    if chart == 0 || chart > xi0.len() || xi0.len() > mus.len() {
        return Err(Error::InvalidInput("chart or coefficient count out of range".into()));
    }
    let mu_n = mus[chart - 1];
    Ok(xi0
        .iter()
        .zip(mus)
        .enumerate()
        .map(|(k, (x, mu))| {
            if k + 1 == chart {
                1.0
            } else {
                x * ((mu - mu_n) * t).exp()
            }
        })
        .collect())
}

/// The flow at infinity in modal coordinates,
/// U_n' = μ_nU_n − (Σ_m μ_mU_m²)U_n, integrated by classical RK4 with step
/// `dt`. Returns the state at each multiple of `sample_interval`.
pub fn modal_sphere_flow(u0: &[f64], mus: &[f64], t_end: f64, dt: f64, sample_interval: f64) -> Vec<(f64, Vec<f64>)> {
    assert_eq!(u0.len(), mus.len());
    let rhs = |u: &[f64]| -> Vec<f64> {
        let rho: f64 = u.iter().zip(mus).map(|(x, m)| m * x * x).sum();
        u.iter().zip(mus).map(|(x, m)| (m - rho) * x).collect()
    };
    let axpy = |u: &[f64], k: &[f64], a: f64| -> Vec<f64> { u.iter().zip(k).map(|(x, y)| x + a * y).collect() };
    let n_steps = (t_end / dt).round() as usize;
    let every = ((sample_interval / dt).round() as usize).max(1);
    let mut u = u0.to_vec();
    let mut out = vec![(0.0, u.clone())];
    for k in 1..=n_steps {
        let k1 = rhs(&u);
        let k2 = rhs(&axpy(&u, &k1, dt / 2.0));
        let k3 = rhs(&axpy(&u, &k2, dt / 2.0));
        let k4 = rhs(&axpy(&u, &k3, dt));
        for i in 0..u.len() {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if k % every == 0 || k == n_steps {
            out.push((k as f64 * dt, u.clone()));
        }
    }
    out
}

/// Largest |ξ_n^{numeric}(t) − ξ_n^{closed}(t)| over the samples of a
/// modal sphere flow, in chart N.
pub fn xi_flow_discrepancy(samples: &[(f64, Vec<f64>)], chart: usize, mus: &[f64]) -> Result<f64> {
    let (_, u0) = samples
        .first()
        .ok_or_else(|| Error::InvalidInput("no samples".into()))?;
    let to_xi = |u: &[f64]| -> Result<Vec<f64>> {
        let a = u[chart - 1];
        if a <= CHART_TOL {
            return Err(Error::OutsideChart {
                chart,
                projection: a,
            });
        }
        Ok(u.iter().map(|x| x / a).collect())
    };
    let xi0 = to_xi(u0)?;
    let mut worst = 0.0f64;
    for (t, u) in samples {
        let xi = to_xi(u)?;
        let exact = xi_flow_closed_form(&xi0, chart, mus, *t)?;
        for (a, b) in xi.iter().zip(&exact) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
