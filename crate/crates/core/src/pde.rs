//! Time integration of
//!
//! ```text
//! u_t = u_xx − u,   −u_x(0) = λu(0) + g(u(0)),   u_x(1) = λu(1) + g(u(1))
//! ```
//!
//! by the method of lines. Second differences with ghost nodes
//! u_{−1} = u_1 + 2h(λu_0 + g(u_0)) (mirrored at x = 1) give a tridiagonal
//! operator; the linear part, including the linear Robin flux, is treated
//! implicitly and the boundary nonlinearity explicitly.
//!
//! With trapezoid weights W the semi-discrete system is the gradient flow
//! W u' = −∇E_h(u) of the discrete energy computed by [`energy`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::BoundaryNonlinearity;
use crate::spectrum::{spectrum_at_infinity, RobinSpectrum};
use crate::tridiag::Tridiagonal;

pub const DEFAULT_GRID: usize = 200;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_THRESHOLD: f64 = 1e4;
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.1;
pub const DEFAULT_MODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// First order, L-stable.
    #[default]
    BackwardEuler,
    /// Second order in the linear part.
    CrankNicolson,
}

/// The discrete linear operator u ↦ u_xx − u with linear Robin coefficient λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinOperator {
    pub grid: Grid,
    pub lambda: f64,
}

impl RobinOperator {
    pub fn new(grid: Grid, lambda: f64) -> Self {
        Self { grid, lambda }
    }

    /// (sub, diag, sup) of the operator matrix.
    pub fn bands(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.grid.n_nodes();
        let h = self.grid.h();
        let ih2 = 1.0 / (h * h);
        let mut sub = vec![ih2; n];
        let mut sup = vec![ih2; n];
        let mut diag = vec![-2.0 * ih2 - 1.0; n];
        sup[0] = 2.0 * ih2;
        sub[n - 1] = 2.0 * ih2;
        let robin = 2.0 * self.lambda / h;
        diag[0] += robin;
        diag[n - 1] += robin;
        sub[0] = 0.0;
        sup[n - 1] = 0.0;
        (sub, diag, sup)
    }

    /// L·u.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (sub, diag, sup) = self.bands();
        let n = u.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * u[i];
                if i > 0 {
                    v += sub[i] * u[i - 1];
                }
                if i + 1 < n {
                    v += sup[i] * u[i + 1];
                }
                v
            })
            .collect()
    }

    /// Eigenpair of the discrete operator nearest to `mu`, by shifted inverse
    /// iteration from `guess`. The eigenvector is unit in the trapezoid norm
    /// and has nonnegative overlap with `guess`.
    pub fn eigenpair_near(&self, mu: f64, guess: &Field) -> Result<(f64, Field)> {
        let (sub, diag, sup) = self.bands();
        let shifted = diag.iter().map(|d| d - mu).collect();
        let solver = Tridiagonal::new(sub, shifted, sup);
        let grid = self.grid;
        let mut x = guess
            .normalized()
            .ok_or_else(|| Error::InvalidInput("zero initial guess".into()))?;
        let mut rayleigh = mu;
        for _ in 0..6 {
            let mut y = x.values().to_vec();
            solver.solve_in_place(&mut y);
            let y = Field::from_values(grid, y)?;
            x = y
                .normalized()
                .ok_or_else(|| Error::InvalidInput("inverse iteration collapsed".into()))?;
            let lx = Field::from_values(grid, self.apply(x.values()))?;
            rayleigh = lx.dot(&x);
        }
        if x.dot(guess) < 0.0 {
            x = x.scaled(-1.0);
        }
        Ok((rayleigh, x))
    }

    /// Boundary forcing 2g/h at the two end nodes.
    pub fn forcing_scale(&self) -> f64 {
        2.0 / self.grid.h()
    }
}

/// A factorized implicit step for fixed (grid, λ, dt, scheme).
#[derive(Debug, Clone)]
pub struct Stepper {
    op: RobinOperator,
    dt: f64,
    scheme: Scheme,
    solver: Tridiagonal,
    explicit: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl Stepper {
    pub fn new(grid: Grid, lambda: f64, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let op = RobinOperator::new(grid, lambda);
        let theta = match scheme {
            Scheme::BackwardEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        };
        let (sub, diag, sup) = op.bands();
        let m_sub = sub.iter().map(|v| -theta * dt * v).collect();
        let m_diag = diag.iter().map(|v| 1.0 - theta * dt * v).collect();
        let m_sup = sup.iter().map(|v| -theta * dt * v).collect();
        let explicit = (scheme == Scheme::CrankNicolson).then_some((sub, diag, sup));
        Ok(Self {
            op,
            dt,
            scheme,
            solver: Tridiagonal::new(m_sub, m_diag, m_sup),
            explicit,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lambda(&self) -> f64 {
        self.op.lambda
    }

    pub fn grid(&self) -> Grid {
        self.op.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// One step of u' = Lu + b, where b carries the explicit boundary
    /// values (g_left, g_right).
    pub(crate) fn advance(&self, u: &mut [f64], g_left: f64, g_right: f64) {
        let dt = self.dt;
        let n = u.len();
        let lu = self.explicit.as_ref().map(|(sub, diag, sup)| {
            (0..n)
                .map(|i| {
                    let mut v = diag[i] * u[i];
                    if i > 0 {
                        v += sub[i] * u[i - 1];
                    }
                    if i + 1 < n {
                        v += sup[i] * u[i + 1];
                    }
                    v
                })
                .collect::<Vec<f64>>()
        });
        if let Some(lu) = lu {
            for (v, l) in u.iter_mut().zip(lu) {
                *v += 0.5 * dt * l;
            }
        }
        let f = self.op.forcing_scale() * dt;
        u[0] += f * g_left;
        u[n - 1] += f * g_right;
        self.solver.solve_in_place(u);
    }

    /// One step of the full problem.
    pub fn step(&self, u: &mut Field, g: &BoundaryNonlinearity) {
        let gl = g.eval(u.left());
        let gr = g.eval(u.right());
        self.advance(u.values_mut(), gl, gr);
    }
}

/// One backward-Euler step of the full problem.
pub fn step(u: &Field, dt: f64, lambda: f64, g: &BoundaryNonlinearity) -> Result<Field> {
    let stepper = Stepper::new(u.grid(), lambda, dt, Scheme::BackwardEuler)?;
    let mut next = u.clone();
    stepper.step(&mut next, g);
    if !next.is_finite() {
        return Err(Error::NumericalOverflow { time: dt });
    }
    Ok(next)
}

/// Discrete Lyapunov functional
///
/// ```text
/// E(u) = ½∫(u_x² + u²) − Σ_{x∈{0,1}} [λu(x)²/2 + ∫₀^{u(x)} g]
/// ```
///
/// with ∫u_x² from differences between neighbouring nodes and ∫u² by the
/// trapezoid rule.
pub fn energy(u: &Field, lambda: f64, g: &BoundaryNonlinearity) -> f64 {
    let bulk = 0.5 * (u.gradient_energy() + u.l2_norm().powi(2));
    let boundary = |v: f64| 0.5 * lambda * v * v + g.antiderivative(v);
    bulk - boundary(u.left()) - boundary(u.right())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// ‖u‖ reached the blow-up threshold; integration stopped.
    BlowupThreshold,
    /// ‖u_t‖ first fell below the steady tolerance.
    Steady,
    /// ‖u_t‖ fell below the convergence tolerance; integration stopped.
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
    /// ‖u‖ for threshold events, ‖u_t‖ otherwise.
    pub payload: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub lambda: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_modes: usize,
    pub blowup_threshold: f64,
    pub sample_interval: f64,
    pub scheme: Scheme,
    pub steady_tol: f64,
    /// Stop once ‖u_t‖ drops below this.
    pub converge_tol: Option<f64>,
}

impl SimulationConfig {
    pub fn new(lambda: f64, t_end: f64) -> Self {
        Self {
            lambda,
            dt: DEFAULT_DT,
            t_end,
            n_modes: DEFAULT_MODES,
            blowup_threshold: DEFAULT_THRESHOLD,
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
            scheme: Scheme::BackwardEuler,
            steady_tol: 1e-8,
            converge_tol: None,
        }
    }
}

/// Sampled history of a run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub config: SimulationConfig,
    pub times: Vec<f64>,
    pub l2_norms: Vec<f64>,
    pub energies: Vec<f64>,
    /// modal[k][n−1] = ⟨u(t_k), φ_n⟩ in the at-infinity basis.
    pub modal: Vec<Vec<f64>>,
    pub events: Vec<Event>,
    /// Largest per-step energy increase relative to 1 + |E|; ≤ 0 when the
    /// energy never increased.
    pub max_energy_increase: f64,
    pub final_state: Field,
    pub basis: RobinSpectrum,
    /// sup |g|, when g is bounded.
    pub g_bound: Option<f64>,
}

impl TrajectoryRecord {
    pub fn event(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }

    pub fn blew_up(&self) -> bool {
        self.event(EventKind::BlowupThreshold).is_some()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("record has at least the initial sample")
    }

    /// u_n(t) over the samples, 1-based n.
    pub fn mode_series(&self, n: usize) -> Vec<f64> {
        self.modal.iter().map(|row| row[n - 1]).collect()
    }

    /// |G_n| ≤ sup|g|·(|φ_n(0)| + |φ_n(1)|) for the modal forcing.
    pub fn forcing_bound(&self, n: usize) -> Option<f64> {
        let phi = self.basis.mode(n);
        self.g_bound
            .map(|b| b * (phi.eval(0.0).abs() + phi.eval(1.0).abs()))
    }
}

/// Integrates from `u0` until `t_end` or until ‖u‖ reaches the threshold.
pub fn simulate(u0: &Field, g: &BoundaryNonlinearity, config: &SimulationConfig) -> Result<TrajectoryRecord> {
    let grid = u0.grid();
    if config.n_modes == 0 {
        return Err(Error::InvalidInput("n_modes must be at least 1".into()));
    }
    if !(config.t_end >= 0.0 && config.sample_interval > 0.0) {
        return Err(Error::InvalidInput("t_end must be ≥ 0 and sample_interval > 0".into()));
    }
    let basis = spectrum_at_infinity(config.lambda, config.n_modes, grid)?;
    let stepper = Stepper::new(grid, config.lambda, config.dt, config.scheme)?;
    let lambda = config.lambda;

    let n_steps = (config.t_end / config.dt).round() as usize;
    let sample_every = ((config.sample_interval / config.dt).round() as usize).max(1);

    let mut u = u0.clone();
    let mut rec = TrajectoryRecord {
        config: config.clone(),
        times: Vec::new(),
        l2_norms: Vec::new(),
        energies: Vec::new(),
        modal: Vec::new(),
        events: Vec::new(),
        max_energy_increase: f64::NEG_INFINITY,
        final_state: u0.clone(),
        basis,
        g_bound: g.bound(),
    };
    let sample = |rec: &mut TrajectoryRecord, u: &Field, t: f64, e: f64| {
        rec.times.push(t);
        rec.l2_norms.push(u.l2_norm());
        rec.energies.push(e);
        let coeffs = rec.basis.project(u, config.n_modes);
        rec.modal.push(coeffs);
    };

    let mut e_prev = energy(&u, lambda, g);
    sample(&mut rec, &u, 0.0, e_prev);
    if u.l2_norm() >= config.blowup_threshold {
        rec.events.push(Event {
            kind: EventKind::BlowupThreshold,
            time: 0.0,
            payload: u.l2_norm(),
        });
        return Ok(rec);
    }

    let mut prev = u.clone();
    let mut steady_seen = false;
    for k in 1..=n_steps {
        let t = k as f64 * config.dt;
        prev.values_mut().copy_from_slice(u.values());
        stepper.step(&mut u, g);
        if !u.is_finite() {
            return Err(Error::NumericalOverflow { time: t });
        }
        let e = energy(&u, lambda, g);
        rec.max_energy_increase = rec
            .max_energy_increase
            .max((e - e_prev) / (1.0 + e_prev.abs()));
        e_prev = e;

        let norm = u.l2_norm();
        if norm >= config.blowup_threshold {
            sample(&mut rec, &u, t, e);
            rec.events.push(Event {
                kind: EventKind::BlowupThreshold,
                time: t,
                payload: norm,
            });
            break;
        }
        let rate = u.distance(&prev) / config.dt;
        if !steady_seen && rate < config.steady_tol {
            steady_seen = true;
            rec.events.push(Event {
                kind: EventKind::Steady,
                time: t,
                payload: rate,
            });
        }
        if let Some(tol) = config.converge_tol {
            if rate < tol {
                sample(&mut rec, &u, t, e);
                rec.events.push(Event {
                    kind: EventKind::Converged,
                    time: t,
                    payload: rate,
                });
                break;
            }
        }
        if k % sample_every == 0 || k == n_steps {
            sample(&mut rec, &u, t, e);
        }
    }
    rec.final_state = u;
    Ok(rec)
}

fn least_squares_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let den: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    num / den
}

/// Least-squares slope of ln|u_n(t)| over samples with t in `window`.
///
/// The mode must dominate its bounded forcing on the whole window:
/// μ_n > 0 and |u_n| > 10·sup|G_n|/μ_n, with no sign change.
pub fn fit_growth_rate(record: &TrajectoryRecord, n: usize, window: (f64, f64)) -> Result<f64> {
    if n == 0 || n > record.basis.n_max() {
        return Err(Error::InvalidInput(format!("mode {n} not recorded")));
    }
    let mu = record.basis.mu(n);
    if mu <= 0.0 {
        return Err(Error::NotInGrowthRegime(format!("μ_{n} = {mu:.4} ≤ 0")));
    }
    let floor = match record.forcing_bound(n) {
        Some(b) => 10.0 * b / mu,
        None => {
            return Err(Error::NotInGrowthRegime(
                "g is unbounded, forcing cannot be bounded".into(),
            ))
        }
    };
    let (ts, us): (Vec<f64>, Vec<f64>) = record
        .times
        .iter()
        .zip(record.mode_series(n))
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, u)| (*t, u))
        .unzip();
    if ts.len() < 2 {
        return Err(Error::NotInGrowthRegime(format!(
            "fewer than two samples in window [{}, {}]",
            window.0, window.1
        )));
    }
    if us.windows(2).any(|w| w[0].signum() != w[1].signum()) {
        return Err(Error::NotInGrowthRegime(format!("u_{n} changes sign in window")));
    }
    if let Some(u) = us.iter().find(|u| u.abs() <= floor) {
        return Err(Error::NotInGrowthRegime(format!(
            "|u_{n}| = {:.3e} does not dominate forcing bound {floor:.3e}",
            u.abs()
        )));
    }
    let logs: Vec<f64> = us.iter().map(|u| u.abs().ln()).collect();
    Ok(least_squares_slope(&ts, &logs))
}

/// Least-squares slope of ln‖u(t)‖ over samples with t in `window`.
pub fn fit_norm_growth_rate(record: &TrajectoryRecord, window: (f64, f64)) -> Result<f64> {
    let (ts, ls): (Vec<f64>, Vec<f64>) = record
        .times
        .iter()
        .zip(&record.l2_norms)
        .filter(|(t, n)| **t >= window.0 && **t <= window.1 && **n > 0.0)
        .map(|(t, n)| (*t, n.ln()))
        .unzip();
    if ts.len() < 2 {
        return Err(Error::NotInGrowthRegime("fewer than two samples in window".into()));
    }
    Ok(least_squares_slope(&ts, &ls))
}

/// Time window covering the last decade of growth before the threshold,
/// i.e. samples with ‖u‖ ≥ threshold/10.
pub fn last_decade_window(record: &TrajectoryRecord) -> Option<(f64, f64)> {
    let cut = record.config.blowup_threshold / 10.0;
    let start = record
        .times
        .iter()
        .zip(&record.l2_norms)
        .find(|(_, n)| **n >= cut)
        .map(|(t, _)| *t)?;
    Some((start, record.final_time()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BlowupClass {
    Bounded,
    Blowup {
        iota: i32,
        mode: usize,
        final_distance: f64,
    },
}

/// Distances ‖u/‖u‖ − ιφ_N‖ for N = 1, 2 with the better sign ι.
pub fn rescaled_distances(u: &Field, spectrum: &RobinSpectrum) -> [(i32, f64); 2] {
    let v = u.normalized().unwrap_or_else(|| u.clone());
    [1, 2].map(|n| {
        let phi = spectrum.phi(n);
        let iota = if v.dot(phi) >= 0.0 { 1 } else { -1 };
        let d = v.sub(&phi.scaled(iota as f64)).l2_norm();
        (iota, d)
    })
}

/// Classifies the end state of a run. Ties within 1e−3 go to N = 1.
pub fn detect_blowup(record: &TrajectoryRecord, spectrum: &RobinSpectrum, tol: f64) -> Result<BlowupClass> {
    if !record.blew_up() {
        return Ok(BlowupClass::Bounded);
    }
    let [(i1, d1), (i2, d2)] = rescaled_distances(&record.final_state, spectrum);
    let (iota, mode, d) = if d1 <= d2 || (d1 - d2).abs() <= 1e-3 {
        (i1, 1, d1)
    } else {
        (i2, 2, d2)
    };
    if d > tol {
        return Err(Error::UnclassifiedBlowup { d1, d2 });
    }
    Ok(BlowupClass::Blowup {
        iota,
        mode,
        final_distance: d,
    })
}

/// r_n(t_k) = u_n'(t_k) − μ_n·u_n(t_k) at interior samples, with u_n' from
/// the three-point (second-order, non-uniform) difference; approximates the
/// modal forcing G_n(t). Returns (t_k, r_n) pairs.
pub fn modal_residual(record: &TrajectoryRecord, n: usize) -> Vec<(f64, f64)> {
    let mu = record.basis.mu(n);
    let u = record.mode_series(n);
    let t = &record.times;
    (1..t.len().saturating_sub(1))
        .map(|k| {
            let h1 = t[k] - t[k - 1];
            let h2 = t[k + 1] - t[k];
            let du = -h2 / (h1 * (h1 + h2)) * u[k - 1]
                + (h2 - h1) / (h1 * h2) * u[k]
                + h1 / (h2 * (h1 + h2)) * u[k + 1];
            (t[k], du - mu * u[k])
        })
        .collect()
}

/// Initial data for a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// amp·φ_n in the at-infinity basis.
    Eigenmode { n: usize, amplitude: f64 },
    /// Closed-form branch equilibrium with amplitude c.
    Branch { branch: usize, c: f64 },
    Field(Field),
}

impl InitialCondition {
    pub fn build(&self, grid: Grid, lambda: f64, g: &BoundaryNonlinearity) -> Result<Field> {
        match self {
            InitialCondition::Zero => Ok(Field::zeros(grid)),
            InitialCondition::Eigenmode { n, amplitude } => {
                if *n == 0 {
                    return Err(Error::InvalidInput("eigenmode index is 1-based".into()));
                }
                let spec = spectrum_at_infinity(lambda, *n, grid)?;
                Ok(spec.phi(*n).scaled(*amplitude))
            }
            InitialCondition::Branch { branch, c } => {
                let id = crate::equilibria::BranchId::from_index(*branch)?;
                Ok(crate::equilibria::EquilibriumBranch::new(id, g.clone()).profile(*c, grid))
            }
            InitialCondition::Field(f) => {
                if f.grid() != grid {
                    return Err(Error::InvalidInput(format!(
                        "initial field has {} cells, grid has {}",
                        f.grid().n_cells(),
                        grid.n_cells()
                    )));
                }
                Ok(f.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{BranchId, EquilibriumBranch};

    fn arctan() -> BoundaryNonlinearity {
        BoundaryNonlinearity::builtin("arctan").unwrap()
    }

    fn grid() -> Grid {
        Grid::new(200).unwrap()
    }

    #[test]
    fn zero_is_fixed() {
        let u = Field::zeros(grid());
        for lambda in [-1.0, 0.0, 3.0] {
            assert_eq!(step(&u, 1e-3, lambda, &arctan()).unwrap(), u);
        }
    }

    #[test]
    fn energy_of_zero_and_of_stable_equilibrium() {
        let g = arctan();
        assert_eq!(energy(&Field::zeros(grid()), 0.7, &g), 0.0);
        let b1 = EquilibriumBranch::new(BranchId::One, g.clone());
        let u1 = b1.profile(0.700_955_474_910_281_9, grid());
        // −s·arctan(s) + ln(1+s²), s = u¹(0), from the continuous identity
        let s: f64 = 2.606_350_004_917_781;
        let exact = -s * s.atan() + (1.0 + s * s).ln();
        let e = energy(&u1, 0.0, &g);
        assert!(e < 0.0);
        assert!((e - exact).abs() < 1e-4, "{e} vs {exact}");
    }

    #[test]
    fn operator_is_symmetric_in_trapezoid_weights() {
        let grid = Grid::new(40).unwrap();
        let op = RobinOperator::new(grid, 1.7);
        let a = Field::from_fn(grid, |x| (3.0 * x).sin() + x);
        let b = Field::from_fn(grid, |x| (x * x - 0.3).exp());
        let la = Field::from_values(grid, op.apply(a.values())).unwrap();
        let lb = Field::from_values(grid, op.apply(b.values())).unwrap();
        assert!((la.dot(&b) - a.dot(&lb)).abs() < 1e-10);
    }

    #[test]
    fn growth_fit_rejects_decaying_mode() {
        let g = arctan();
        let spec = spectrum_at_infinity(-1.0, 1, grid()).unwrap();
        let u0 = spec.phi(1).scaled(0.5);
        let mut cfg = SimulationConfig::new(-1.0, 2.0);
        cfg.n_modes = 2;
        let rec = simulate(&u0, &g, &cfg).unwrap();
        assert!(matches!(fit_growth_rate(&rec, 1, (0.0, 2.0)), Err(Error::NotInGrowthRegime(_))));
        assert_eq!(detect_blowup(&rec, &rec.basis, 1e-2).unwrap(), BlowupClass::Bounded);
    }

    #[test]
    fn initial_condition_grid_mismatch() {
        let f = Field::zeros(Grid::new(50).unwrap());
        let err = InitialCondition::Field(f).build(grid(), 0.0, &arctan()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
