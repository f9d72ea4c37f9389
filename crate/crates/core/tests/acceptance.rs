//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::attractor::{build_attractor, shadowing_experiment, AttractorConfig, EdgeKind};
use steklov_core::compactification::{
    hemisphere_simulate, infinity_equilibrium_residual, infinity_flow_simulate, modal_sphere_flow, project,
    xi_flow_discrepancy, HemisphereConfig,
};
use steklov_core::equilibria::{BranchId, EquilibriumBranch};
use steklov_core::numerics::bisect;
use steklov_core::oracle::robin_eigenvalues_dense_scan;
use steklov_core::pde::{
    detect_blowup, fit_norm_growth_rate, last_decade_window, simulate, BlowupClass, Scheme, SimulationConfig,
    TrajectoryRecord,
};
use steklov_core::spectrum::{linearized_spectrum_at, solve_spectrum, spectrum_at_infinity, LinearizationPoint, ModeShape};
use steklov_core::steklov::{parity, sigma1, sigma2, steklov_pair, Normalization};
use steklov_core::{BoundaryNonlinearity, Field, Grid};

const N: usize = 200;
const DT: f64 = 1e-3;
// c with λ(c) = 0 on the first arctan branch, from a 50-digit root solve
const C_AT_ZERO: f64 = 0.700_955_474_910_281_9;
// μ₁ at infinity for λ = 1, from the spectrum solver at 1e-15
const MU1_AT_ONE: f64 = 1.382_097_877_890_838;

/// Collects the failed checks of one criterion and a short measurement log.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn le(&mut self, what: &str, value: f64, limit: f64) {
        if value.is_finite() && value <= limit {
            self.notes.push(format!("{what}={value:.3e}"));
        } else {
            self.failures.push(format!("{what}={value:.6e} exceeds {limit:e}"));
        }
    }

    fn lt(&mut self, what: &str, value: f64, limit: f64) {
        if value.is_finite() && value < limit {
            self.notes.push(format!("{what}={value:.3e}"));
        } else {
            self.failures.push(format!("{what}={value:.6e} not below {limit:e}"));
        }
    }

    fn ok(&mut self, what: &str, cond: bool) {
        if !cond {
            self.failures.push(format!("{what} does not hold"));
        }
    }

    fn timed<T>(&mut self, what: &str, limit: Duration, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        if elapsed < limit {
            self.notes.push(format!("{what} {elapsed:.2?}"));
        } else {
            self.failures.push(format!("{what} took {elapsed:.2?}, limit {limit:?}"));
        }
        out
    }
}

fn arctan() -> BoundaryNonlinearity {
    BoundaryNonlinearity::builtin("arctan").unwrap()
}

fn grid() -> Grid {
    Grid::new(N).unwrap()
}

fn run_pde(lambda: f64, u0: &Field, t_end: f64) -> TrajectoryRecord {
    let mut cfg = SimulationConfig::new(lambda, t_end);
    cfg.dt = DT;
    simulate(u0, &arctan(), &cfg).unwrap()
}

fn steklov_closed_forms(c: &mut Checks) {
    let e = std::f64::consts::E;
    let (s1, s2) = c.timed("runtime", Duration::from_millis(1), || (sigma1(), sigma2()));
    c.le("|σ₁−(e−1)/(e+1)|", (s1 - (e - 1.0) / (e + 1.0)).abs(), 1e-12);
    c.le("|σ₂−(e+1)/(e−1)|", (s2 - (e + 1.0) / (e - 1.0)).abs(), 1e-12);
    c.le("|σ₁σ₂−1|", (s1 * s2 - 1.0).abs(), 1e-14);
}

fn spectrum_oracle(c: &mut Checks) {
    let grid = grid();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let gamma: f64 = rng.gen_range(-3.0..6.0);
        let oracle = robin_eigenvalues_dense_scan(gamma, 40.0);
        let spec = solve_spectrum(gamma, oracle.len(), grid).unwrap();
        c.ok(&format!("γ={gamma}: oracle count"), spec.n_max() == oracle.len());
        let solved = spec.modes.iter().filter(|m| m.shape != ModeShape::Affine).map(|m| m.mu);
        for (a, b) in solved.zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    c.le("max |μ−oracle| over 20 γ", worst, 1e-6);

    let spec = solve_spectrum(0.0, 8, grid).unwrap();
    let neumann = (1..=8)
        .map(|k| (spec.mu(k) - (-1.0 - ((k - 1) as f64 * std::f64::consts::PI).powi(2))).abs())
        .fold(0.0, f64::max);
    c.le("γ=0 Neumann error", neumann, 1e-8);

    for (name, sigma) in [("σ₁", sigma1()), ("σ₂", sigma2())] {
        let spec = solve_spectrum(sigma, 3, grid).unwrap();
        let closest = spec.eigenvalues().iter().map(|m| m.abs()).fold(f64::INFINITY, f64::min);
        c.le(&format!("dist(0, spectrum({name}))"), closest, 1e-8);
    }

    let spec = solve_spectrum(2.0, 4, grid).unwrap();
    match spec.modes.iter().find(|m| m.shape == ModeShape::Affine) {
        Some(m) => {
            c.le("|μ_affine+1|", (m.mu + 1.0).abs(), 1e-8);
            let (r0, r1) = m.bc_residuals();
            // φ'' = 0 holds identically for an affine function
            c.le("affine BC residual", r0.max(r1), 1e-8);
        }
        None => c.ok("−1 ∈ spectrum(2)", false),
    }
    let elapsed = start.elapsed();
    c.ok(&format!("runtime {elapsed:.2?} < 1 s"), elapsed < Duration::from_secs(1));
    c.notes.push(format!("runtime {elapsed:.2?}"));
}

fn zero_crossing(g: &BoundaryNonlinearity, mode: usize, guess: f64) -> f64 {
    let mu = |lambda: f64| {
        linearized_spectrum_at(LinearizationPoint::Zero, lambda, g, 3, grid()).unwrap().mu(mode)
    };
    bisect(mu, guess - 0.3, guess + 0.3, 1e-13).unwrap()
}

fn pitchforks(c: &mut Checks) {
    for (name, shift) in [("arctan", -1.0), ("neg_arctan", 1.0)] {
        let g = BoundaryNonlinearity::builtin(name).unwrap();
        for (id, mode) in [(BranchId::One, 1), (BranchId::Two, 2)] {
            let b = EquilibriumBranch::new(id, g.clone());
            let limit = b.lambda_of_amplitude(1e-7).value;
            let expected = id.base_sigma() + shift;
            c.le(&format!("{name} λ{}(0)−(σ{}{shift:+})", id.index(), id.index()), (limit - expected).abs(), 1e-8);
            if name == "arctan" {
                let crossing = zero_crossing(&g, mode, expected);
                c.le(&format!("arctan μ{mode}=0 crossing gap"), (crossing - limit).abs(), 1e-8);
            }
        }
    }
}

fn branch_convergence(c: &mut Checks) {
    let g = arctan();
    for id in [BranchId::One, BranchId::Two] {
        let b = EquilibriumBranch::new(id, g.clone());
        let phi = steklov_pair(id.index(), grid(), Normalization::SupNorm).profile;
        let mut excess = f64::NEG_INFINITY;
        let mut shape = 0.0f64;
        for cc in [1.0, 10.0, 100.0, 1000.0] {
            let gap = (b.lambda_of_amplitude(cc).value - id.base_sigma()).abs();
            excess = excess.max(gap - std::f64::consts::FRAC_PI_2 / (id.scale_factor() * cc));
            let u = b.profile(cc, grid());
            shape = shape.max(u.scaled(1.0 / u.right().abs()).distance(&phi));
            c.ok(&format!("branch {} symmetry", id.index()), u.parity_defect(parity(id.index())) == 0.0);
        }
        c.le(&format!("branch {} max(|λ−σ|−(π/2)/(kc))", id.index()), excess, 0.0);
        c.le(&format!("branch {} ‖u/|u(1)|−Φ‖", id.index()), shape, 1e-14);
    }
}

fn regime_dynamics(c: &mut Checks, bounded_runs: &mut Vec<(String, TrajectoryRecord)>) {
    let limit = Duration::from_secs(30);
    let grid = grid();
    let g = arctan();

    let phi1 = steklov_pair(1, grid, Normalization::SupNorm).profile;
    let rec = c.timed("λ=−1 run", limit, || run_pde(-1.0, &phi1.scaled(0.5), 50.0));
    c.lt("λ=−1 ‖u(50)‖", rec.final_state.l2_norm(), 1e-4);
    bounded_runs.push(("λ=−1 from 0.5Φ₁".into(), rec));

    let spec0 = spectrum_at_infinity(0.0, 6, grid).unwrap();
    let rec = c.timed("λ=0 run", limit, || run_pde(0.0, &spec0.phi(1).scaled(0.01), 60.0));
    let u1 = EquilibriumBranch::new(BranchId::One, g.clone()).profile(C_AT_ZERO, grid);
    c.le("λ=0 ‖u−u¹‖", rec.final_state.distance(&u1), 1e-3);
    bounded_runs.push(("λ=0 from 0.01φ₁".into(), rec));

    let spec1 = spectrum_at_infinity(1.0, 6, grid).unwrap();
    c.le("μ₁(1) vs frozen value", (spec1.mu(1) - MU1_AT_ONE).abs(), 1e-10);
    let rec = c.timed("λ=1 run", limit, || run_pde(1.0, &spec1.phi(1).scaled(0.01), 60.0));
    c.ok("λ=1 blow-up event", rec.blew_up());
    let slope = last_decade_window(&rec).map(|w| fit_norm_growth_rate(&rec, w));
    match slope {
        None => c.failures.push("λ=1 has no last-decade window".into()),
        Some(Ok(s)) => c.le("λ=1 relative slope error", (s / MU1_AT_ONE - 1.0).abs(), 0.05),
        Some(Err(e)) => c.failures.push(format!("λ=1 slope fit: {e}")),
    }
    match detect_blowup(&rec, &spec1, 1e-2) {
        Ok(BlowupClass::Blowup { mode: 1, final_distance, .. }) => c.lt("λ=1 rescaled distance to φ₁", final_distance, 1e-2),
        other => c.failures.push(format!("λ=1 classification {other:?}")),
    }

    let spec3 = spectrum_at_infinity(3.0, 6, grid).unwrap();
    let rec = c.timed("λ=3 symmetric run", limit, || run_pde(3.0, &spec3.phi(2).scaled(0.01), 60.0));
    c.ok("λ=3 symmetric blow-up", rec.blew_up());
    let first = rec.mode_series(1).iter().map(|v| v.abs()).fold(0.0, f64::max);
    c.le("λ=3 symmetric max |φ₁-mode|", first, 1e-10);
    match detect_blowup(&rec, &spec3, 1e-2) {
        Ok(BlowupClass::Blowup { mode: 2, final_distance, .. }) => c.lt("λ=3 rescaled distance to φ₂", final_distance, 1e-2),
        other => c.failures.push(format!("λ=3 classification {other:?}")),
    }

    let mut switches = Vec::new();
    for eps in [0.1, 0.01, 0.001] {
        let report = c.timed(&format!("λ=3 mixed ε={eps}"), limit, || {
            shadowing_experiment(3.0, eps, &g, grid, DT, 20.0)
        });
        match report {
            Ok(r) => match r.t_switch {
                Some(ts) if r.t_near2 < ts => {
                    c.notes.push(format!("ε={eps}: t_near2={:.3}, t_switch={ts:.3}", r.t_near2));
                    switches.push(ts);
                }
                other => c.failures.push(format!("ε={eps}: t_near2={} t_switch={other:?}", r.t_near2)),
            },
            Err(e) => c.failures.push(format!("ε={eps}: {e}")),
        }
    }
    c.ok("t_switch increases as ε decreases", switches.len() == 3 && switches.windows(2).all(|w| w[1] > w[0]));
}

fn energy_monotonicity(c: &mut Checks, mut runs: Vec<(String, TrajectoryRecord)>) {
    let spec = spectrum_at_infinity(0.0, 6, grid()).unwrap();
    for (lambda, u0, label) in [
        (0.0, spec.phi(2).scaled(2.0), "λ=0 from 2φ₂"),
        (-1.0, spec.phi(1).scaled(3.0), "λ=−1 from 3φ₁"),
        (0.5, Field::from_fn(grid(), |x| (7.0 * x).sin()), "λ=0.5 from sin 7x"),
    ] {
        for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
            let mut cfg = SimulationConfig::new(lambda, 20.0);
            cfg.dt = DT;
            cfg.scheme = scheme;
            runs.push((format!("{label} {scheme:?}"), simulate(&u0, &arctan(), &cfg).unwrap()));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for (label, rec) in &runs {
        c.ok(&format!("{label} stays bounded"), !rec.blew_up());
        worst = worst.max(rec.max_energy_increase);
    }
    c.le(&format!("max relative energy increase over {} runs", runs.len()), worst, 1e-8);
}

fn compactification(c: &mut Checks) {
    let g = arctan();
    let grid = grid();

    let spec1 = spectrum_at_infinity(1.0, 2, grid).unwrap();
    let rec = run_pde(1.0, &spec1.phi(1).scaled(0.01), 2.0);
    let mut cfg = HemisphereConfig::new(1.0, 100.0);
    cfg.dt = DT;
    let traj = hemisphere_simulate(&project(&rec.final_state), Some(&g), &cfg).unwrap();
    let mut drift = traj.max_constraint_defect;

    for n in 1..=2 {
        let r: Vec<f64> = [100, 200, 400]
            .iter()
            .map(|&cells| {
                let spec = spectrum_at_infinity(3.0, 2, Grid::new(cells).unwrap()).unwrap();
                infinity_equilibrium_residual(&spec.phi(n).normalized().unwrap(), 3.0)
            })
            .collect();
        let h2 = grid.h().powi(2);
        c.le(&format!("φ{n} residual/h² at N=200"), r[1] / h2, 4.0);
        c.ok(
            &format!("φ{n} second-order decay {:.2}, {:.2}", r[0] / r[1], r[1] / r[2]),
            r[0] / r[1] > 3.5 && r[1] / r[2] > 3.5,
        );
        c.notes.push(format!("φ{n} decay ratios {:.2}/{:.2}", r[0] / r[1], r[1] / r[2]));
    }

    let spec3 = spectrum_at_infinity(3.0, 6, grid).unwrap();
    let mut u = spec3.phi(2).clone();
    u.add_scaled(spec3.phi(1), 0.01);
    let mut cfg = HemisphereConfig::new(3.0, 50.0);
    cfg.dt = DT;
    let traj = infinity_flow_simulate(&u.normalized().unwrap(), &cfg).unwrap();
    drift = drift.max(traj.max_constraint_defect);
    c.lt("λ=3 heteroclinic distance to φ₁", traj.final_point().u.distance(spec3.phi(1)), 1e-3);
    c.le("constraint drift after renormalization", drift, 1e-8);

    let mus = spec3.eigenvalues();
    let mut worst = 0.0f64;
    for (chart, mut u0) in [
        (2, vec![1e-9, 1.0, 0.01, 0.005, 0.002, 0.001]),
        (1, vec![1.0, 0.02, 0.01, 0.0, 0.0, 0.001]),
    ] {
        let norm = u0.iter().map(|x| x * x).sum::<f64>().sqrt();
        u0.iter_mut().for_each(|x| *x /= norm);
        let samples = modal_sphere_flow(&u0, &mus, 5.0, DT, 0.1);
        worst = worst.max(xi_flow_discrepancy(&samples, chart, &mus).unwrap());
    }
    c.le("ξ-flow vs closed form on [0,5]", worst, 1e-6);
}

fn attractor_graphs(c: &mut Checks) {
    let g = arctan();
    let cfg = AttractorConfig::new(grid());
    for (lambda, nodes, edges) in [(-1.0, 1, 0), (0.0, 3, 2), (1.0, 3, 2), (3.0, 5, 8)] {
        let graph = build_attractor(lambda, &g, false, &cfg).unwrap();
        c.ok(
            &format!("λ={lambda} counts ({},{}) = ({nodes},{edges})", graph.nodes.len(), graph.edges.len()),
            (graph.nodes.len(), graph.edges.len()) == (nodes, edges),
        );
    }
    let r4 = build_attractor(1.5, &g, true, &cfg).unwrap();
    c.ok("R4 has 5 nodes", r4.nodes.len() == 5);
    c.ok("R4 has 2 bounded edges", r4.edges_of_kind(EdgeKind::Bounded).count() == 2);
    let blowups: Vec<_> = r4.edges_of_kind(EdgeKind::Blowup).collect();
    c.ok("R4 blow-up edges verified", !blowups.is_empty() && blowups.iter().all(|e| e.is_verified()));
    c.notes.push(format!("R4 edges {}", r4.edges.len()));

    for lambda in [0.0, 1.0, 3.0] {
        let graph = build_attractor(lambda, &g, true, &cfg).unwrap();
        let worst = graph
            .edges
            .iter()
            .map(|e| e.final_distance().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        c.lt(&format!("λ={lambda} worst edge distance"), worst, 1e-2);
    }
}

fn report(index: usize, name: &str, f: impl FnOnce(&mut Checks)) -> bool {
    let mut checks = Checks::default();
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| f(&mut checks)));
    if let Err(panic) = outcome {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        checks.failures.push(format!("panicked: {msg}"));
    }
    let passed = checks.failures.is_empty();
    let detail = if passed { checks.notes.join("; ") } else { checks.failures.join("; ") };
    println!(
        "{} criterion {index}: {name} [{:.2?}] {detail}",
        if passed { "PASS" } else { "FAIL" },
        start.elapsed()
    );
    passed
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut bounded_runs = Vec::new();
    let results = [
        report(1, "Steklov closed forms", steklov_closed_forms),
        report(2, "spectrum oracle equivalence", spectrum_oracle),
        report(3, "pitchfork locations", pitchforks),
        report(4, "branch-to-Steklov convergence", branch_convergence),
        report(5, "regime dynamics", |c| regime_dynamics(c, &mut bounded_runs)),
        report(6, "energy monotonicity", |c| energy_monotonicity(c, std::mem::take(&mut bounded_runs))),
        report(7, "compactification", compactification),
        report(8, "attractor graphs", |c| {
            attractor_graphs(c);
            let total = start.elapsed();
            c.ok(&format!("suite runtime {total:.1?} < 10 min"), total < Duration::from_secs(600));
            c.notes.push(format!("suite runtime {total:.1?}"));
        }),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
