use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use steklov_core::attractor::{build_attractor, branch_amplitude, AttractorConfig};
use steklov_core::compactification::{hemisphere_simulate, infinity_flow_simulate, project, HemispherePoint, HemisphereConfig};
use steklov_core::equilibria::{bifurcation_diagram, BranchId, DiagramConfig, EquilibriumBranch};
use steklov_core::io::{format_real, format_row, read_field_csv};
use steklov_core::pde::{detect_blowup, simulate, InitialCondition, Scheme as CoreScheme, SimulationConfig, DEFAULT_MODES};
use steklov_core::spectrum::{linearized_spectrum_at, solve_spectrum, spectrum_at_infinity, LinearizationPoint};
use steklov_core::steklov::{sigma1, sigma2, steklov_eigenpairs, Normalization};
use steklov_core::{selftest, BoundaryNonlinearity, Execution, Field, Grid};

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Steklov-type boundary problems: spectra, equilibria, dynamics and the attractor")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Global {
    /// Number of grid cells (at least 32)
    #[arg(long, global = true, default_value_t = 200, value_parser = clap::value_parser!(u32).range(32..))]
    grid: u32,
    /// Time step
    #[arg(long, global = true, default_value_t = 1e-3, value_parser = positive_real)]
    dt: f64,
    /// Seed for randomized checks
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum At {
    Zero,
    Infinity,
    Branch1,
    Branch2,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Norm {
    Sup,
    L2,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Scheme {
    Be,
    Cn,
}

impl From<Scheme> for CoreScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Be => CoreScheme::BackwardEuler,
            Scheme::Cn => CoreScheme::CrankNicolson,
        }
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Steklov eigenvalues and eigenfunctions
    Steklov {
        #[arg(long, value_enum, default_value_t = Norm::Sup)]
        normalization: Norm,
    },
    /// Robin spectrum of a linearization
    Spectrum {
        /// Robin coefficient γ
        #[arg(long, value_parser = finite_real, conflicts_with_all = ["lambda", "at"], required_unless_present = "lambda")]
        gamma: Option<f64>,
        #[arg(long, value_parser = finite_real, allow_negative_numbers = true, requires = "at")]
        lambda: Option<f64>,
        /// Where to linearize
        #[arg(long, value_enum)]
        at: Option<At>,
        #[arg(long, default_value = "arctan")]
        g: String,
        #[arg(long, default_value_t = 6)]
        n_eigs: usize,
        /// Write sampled eigenfunctions instead of eigenvalues
        #[arg(long)]
        emit_eigenfunctions: bool,
    },
    /// Equilibrium branch λ(c) with stability
    Branch {
        #[arg(long)]
        g: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        branch: u8,
        #[arg(long, default_value_t = 1e-3, value_parser = positive_real)]
        c_min: f64,
        #[arg(long, default_value_t = 1e3, value_parser = positive_real)]
        c_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Time integration of the full problem
    Simulate {
        #[arg(long, value_parser = finite_real, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        g: String,
        /// zero | eigmode:n:amp | branch:i:c | file:path
        #[arg(long)]
        ic: String,
        #[arg(long, value_parser = nonnegative_real)]
        t_end: f64,
        /// Blow-up threshold on the L² norm
        #[arg(long, default_value_t = 1e4, value_parser = positive_real)]
        threshold: f64,
        #[arg(long, default_value_t = 0.1, value_parser = positive_real)]
        sample_interval: f64,
        #[arg(long, value_enum, default_value_t = Scheme::Be)]
        scheme: Scheme,
        /// Modes reported (default: 6, fewer on grids too coarse to resolve them)
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        modes: Option<u16>,
    },
    /// Trajectory on the Poincaré hemisphere
    Compactify {
        #[arg(long, value_parser = finite_real, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        g: String,
        #[arg(long)]
        ic: String,
        #[arg(long, value_parser = nonnegative_real)]
        t_end: f64,
        /// Start on the sphere at infinity in the direction of the initial data
        #[arg(long)]
        at_infinity: bool,
        #[arg(long, default_value_t = 0.1, value_parser = positive_real)]
        sample_interval: f64,
        /// Modes reported (default: 6, fewer on grids too coarse to resolve them)
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        modes: Option<u16>,
    },
    /// Attractor graph of the regime containing λ
    Attractor {
        #[arg(long, value_parser = finite_real, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        g: String,
        /// Simulate every edge
        #[arg(long)]
        verify: bool,
    },
    /// Oracle and closed-form checks
    Selftest,
}

fn finite_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a finite real"))
    }
}

fn positive_real(s: &str) -> std::result::Result<f64, String> {
    let v = finite_real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} must be positive"))
    }
}

fn nonnegative_real(s: &str) -> std::result::Result<f64, String> {
    let v = finite_real(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} must be nonnegative"))
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("STEKLOV_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("STEKLOV_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("STEKLOV_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

/// `#` line with the full resolved configuration.
fn metadata(cli: &Cli) -> String {
    let mut config = serde_json::to_value(&cli.command).expect("config serializes");
    let global = serde_json::to_value(&cli.global).expect("config serializes");
    if let (Some(c), Some(g)) = (config.as_object_mut(), global.as_object()) {
        for (k, v) in g {
            c.insert(k.clone(), v.clone());
        }
        c.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    }
    format!("# {config}")
}

fn nonlinearity(name: &str) -> Result<BoundaryNonlinearity> {
    Ok(BoundaryNonlinearity::builtin(name)?)
}

/// Requested mode count, or as many of the default six as the grid resolves
/// (mode n has wavenumber at most nπ and needs 8 nodes per half-wave).
fn mode_count(requested: Option<u16>, grid: Grid) -> usize {
    requested.map_or((grid.n_cells() / 8).clamp(1, DEFAULT_MODES), usize::from)
}

fn initial_condition(spec: &str, grid: Grid) -> Result<InitialCondition> {
    let parts: Vec<&str> = spec.splitn(3, ':').collect();
    Ok(match parts.as_slice() {
        ["zero"] => InitialCondition::Zero,
        ["eigmode", n, amp] => InitialCondition::Eigenmode {
            n: n.parse().with_context(|| format!("bad mode index in {spec:?}"))?,
            amplitude: finite_real(amp).map_err(anyhow::Error::msg)?,
        },
        ["branch", i, c] => InitialCondition::Branch {
            branch: i.parse().with_context(|| format!("bad branch index in {spec:?}"))?,
            c: finite_real(c).map_err(anyhow::Error::msg)?,
        },
        ["file", rest @ ..] if !rest.is_empty() => {
            let path = rest.join(":");
            let file = File::open(&path).with_context(|| format!("opening field file {path}"))?;
            InitialCondition::Field(read_field_csv(file, grid)?)
        }
        _ => bail!("unrecognized initial condition {spec:?}; expected zero, eigmode:n:amp, branch:i:c or file:path"),
    })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    configure_threads()?;
    let grid = Grid::new(cli.global.grid as usize)?;
    let dt = cli.global.dt;
    let csv = cli.global.format == Format::Csv;
    let mut text = String::new();
    let mut line = |s: String| {
        text.push_str(&s);
        text.push('\n');
    };
    let mut code = ExitCode::SUCCESS;

    match &cli.command {
        Command::Steklov { normalization } => {
            let norm = match normalization {
                Norm::Sup => Normalization::SupNorm,
                Norm::L2 => Normalization::L2Norm,
            };
            let [p1, p2] = steklov_eigenpairs(grid, norm);
            if csv {
                line(metadata(cli));
                line(format!("# sigma1={:.10}, sigma2={:.10}", sigma1(), sigma2()));
                line("x,phi1,phi2".into());
                for (i, x) in grid.nodes().enumerate() {
                    line(format_row(&[x, p1.profile.values()[i], p2.profile.values()[i]]));
                }
            } else {
                line(serde_json::to_string_pretty(&json!({
                    "config": config_json(cli),
                    "sigma1": sigma1(),
                    "sigma2": sigma2(),
                    "x": grid.nodes().collect::<Vec<_>>(),
                    "phi1": p1.profile.values(),
                    "phi2": p2.profile.values(),
                }))?);
            }
        }
        Command::Spectrum {
            gamma,
            lambda,
            at,
            g,
            n_eigs,
            emit_eigenfunctions,
        } => {
            let spec = match (gamma, lambda, at) {
                (Some(gamma), _, _) => solve_spectrum(*gamma, *n_eigs, grid)?,
                (None, Some(lambda), Some(at)) => {
                    let g = nonlinearity(g)?;
                    match at {
                        At::Infinity => spectrum_at_infinity(*lambda, *n_eigs, grid)?,
                        At::Zero => linearized_spectrum_at(LinearizationPoint::Zero, *lambda, &g, *n_eigs, grid)?,
                        At::Branch1 | At::Branch2 => {
                            let id = if *at == At::Branch1 { BranchId::One } else { BranchId::Two };
                            let branch = EquilibriumBranch::new(id, g);
                            let c = branch_amplitude(&branch, *lambda)
                                .with_context(|| format!("no equilibrium on branch {} at λ = {lambda}", id.index()))?;
                            branch.linearized_spectrum(c, *n_eigs, grid)?
                        }
                    }
                }
                _ => bail!("give either --gamma or both --lambda and --at"),
            };
            if csv {
                line(metadata(cli));
                line(format!("# gamma={}", format_real(spec.gamma)));
                if *emit_eigenfunctions {
                    let cols: Vec<String> = (1..=spec.n_max()).map(|n| format!("phi{n}")).collect();
                    line(format!("x,{}", cols.join(",")));
                    for (i, x) in grid.nodes().enumerate() {
                        let mut row = vec![x];
                        row.extend(spec.eigenfunctions.iter().map(|f| f.values()[i]));
                        line(format_row(&row));
                    }
                } else {
                    line("index,mu".into());
                    for (k, mu) in spec.eigenvalues().iter().enumerate() {
                        line(format!("{},{}", k + 1, format_real(*mu)));
                    }
                }
            } else {
                let mut obj = json!({
                    "config": config_json(cli),
                    "gamma": spec.gamma,
                    "mu": spec.eigenvalues(),
                });
                if *emit_eigenfunctions {
                    obj["x"] = json!(grid.nodes().collect::<Vec<_>>());
                    obj["phi"] = json!(spec.eigenfunctions.iter().map(Field::values).collect::<Vec<_>>());
                }
                line(serde_json::to_string_pretty(&obj)?);
            }
        }
        Command::Branch {
            g,
            branch,
            c_min,
            c_max,
            steps,
        } => {
            let g = nonlinearity(g)?;
            let id = BranchId::from_index(*branch as usize)?;
            let points = bifurcation_diagram(
                &g,
                &[id],
                &DiagramConfig {
                    c_min: *c_min,
                    c_max: *c_max,
                    steps: *steps,
                    grid,
                    execution: Execution::default(),
                },
            )?;
            if csv {
                line(metadata(cli));
                line("lambda,branch,amplitude,stability,morse_index".into());
                for p in &points {
                    let m = p.stability.morse_index().map(|m| m.to_string()).unwrap_or_default();
                    line(format!(
                        "{},{},{},{},{}",
                        format_real(p.lambda),
                        p.branch.index(),
                        format_real(p.amplitude),
                        p.stability,
                        m
                    ));
                }
            } else {
                let rows: Vec<_> = points
                    .iter()
                    .map(|p| {
                        json!({
                            "lambda": p.lambda,
                            "branch": p.branch.index(),
                            "amplitude": p.amplitude,
                            "stability": p.stability.to_string(),
                            "morse_index": p.stability.morse_index(),
                        })
                    })
                    .collect();
                line(serde_json::to_string_pretty(&json!({"config": config_json(cli), "points": rows}))?);
            }
        }
        Command::Simulate {
            lambda,
            g,
            ic,
            t_end,
            threshold,
            sample_interval,
            scheme,
            modes,
        } => {
            let g = nonlinearity(g)?;
            let u0 = initial_condition(ic, grid)?.build(grid, *lambda, &g)?;
            let mut cfg = SimulationConfig::new(*lambda, *t_end);
            cfg.dt = dt;
            cfg.blowup_threshold = *threshold;
            cfg.sample_interval = *sample_interval;
            cfg.scheme = (*scheme).into();
            cfg.n_modes = mode_count(*modes, grid);
            let rec = simulate(&u0, &g, &cfg)?;
            let outcome = match detect_blowup(&rec, &rec.basis, 1e-2) {
                Ok(class) => serde_json::to_value(class)?,
                Err(e) => json!({"outcome": "unclassified", "message": e.to_string()}),
            };
            let summary = json!({"events": rec.events, "outcome": outcome, "final_time": rec.final_time()});
            if csv {
                line(metadata(cli));
                let modes: Vec<String> = (1..=cfg.n_modes).map(|n| format!("u{n}")).collect();
                line(format!("t,l2_norm,energy,{}", modes.join(",")));
                for k in 0..rec.times.len() {
                    let mut row = vec![rec.times[k], rec.l2_norms[k], rec.energies[k]];
                    row.extend(&rec.modal[k]);
                    line(format_row(&row));
                }
                line(format!("# summary={summary}"));
            } else {
                line(serde_json::to_string_pretty(&json!({
                    "config": config_json(cli),
                    "t": rec.times,
                    "l2_norm": rec.l2_norms,
                    "energy": rec.energies,
                    "modal": rec.modal,
                    "summary": summary,
                }))?);
            }
        }
        Command::Compactify {
            lambda,
            g,
            ic,
            t_end,
            at_infinity,
            sample_interval,
            modes,
        } => {
            let g = nonlinearity(g)?;
            let u0 = initial_condition(ic, grid)?.build(grid, *lambda, &g)?;
            let n_modes = mode_count(*modes, grid);
            let spec = spectrum_at_infinity(*lambda, n_modes.max(2), grid)?;
            let mut cfg = HemisphereConfig::new(*lambda, *t_end);
            cfg.dt = dt;
            cfg.sample_interval = *sample_interval;
            let traj = if *at_infinity {
                let u0 = u0.normalized().context("initial data is zero; it has no direction at infinity")?;
                infinity_flow_simulate(&u0, &cfg)?
            } else {
                hemisphere_simulate(&project(&u0), Some(&g), &cfg)?
            };
            let row = |p: &HemispherePoint| -> Vec<f64> {
                let mut r = vec![p.z];
                r.extend(spec.project(&p.u, n_modes));
                r.push(p.equator_distance(spec.phi(1)));
                r.push(p.equator_distance(spec.phi(2)));
                r
            };
            if csv {
                line(metadata(cli));
                let modes: Vec<String> = (1..=n_modes).map(|n| format!("U{n}")).collect();
                line(format!("t,z,{},dist_phi1,dist_phi2", modes.join(",")));
                for (t, p) in traj.times.iter().zip(&traj.points) {
                    let mut r = vec![*t];
                    r.extend(row(p));
                    line(format_row(&r));
                }
            } else {
                let rows: Vec<_> = traj.times.iter().zip(&traj.points).map(|(t, p)| (t, row(p))).collect();
                line(serde_json::to_string_pretty(&json!({
                    "config": config_json(cli),
                    "columns": std::iter::once("z".to_string())
                        .chain((1..=n_modes).map(|n| format!("U{n}")))
                        .chain(["dist_phi1".to_string(), "dist_phi2".to_string()])
                        .collect::<Vec<_>>(),
                    "rows": rows,
                    "max_constraint_defect": traj.max_constraint_defect,
                }))?);
            }
        }
        Command::Attractor { lambda, g, verify } => {
            let g = nonlinearity(g)?;
            let mut cfg = AttractorConfig::new(grid);
            cfg.dt = dt;
            let graph = build_attractor(*lambda, &g, *verify, &cfg)?;
            if *verify && !graph.all_verified() {
                eprintln!("warning: some edges did not reach their targets within {}", cfg.tolerance);
            }
            line(serde_json::to_string_pretty(&graph)?);
        }
        Command::Selftest => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.global.seed.unwrap_or(0));
            let gammas: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..6.0)).collect();
            let rows = selftest::run(grid.n_cells(), &gammas);
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
            if csv {
                line(metadata(cli));
                for r in &rows {
                    line(format!(
                        "{}  {:width$}  measured={}  tolerance={}",
                        if r.passed { "PASS" } else { "FAIL" },
                        r.name,
                        format_real(r.measured),
                        format_real(r.tolerance),
                    ));
                }
                let failed = rows.iter().filter(|r| !r.passed).count();
                line(format!("{} passed, {} failed", rows.len() - failed, failed));
            } else {
                line(serde_json::to_string_pretty(&json!({"config": config_json(cli), "checks": rows}))?);
            }
            if rows.iter().any(|r| !r.passed) {
                code = ExitCode::from(1);
            }
        }
    }

    match &cli.global.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(code)
}

fn config_json(cli: &Cli) -> serde_json::Value {
    let meta = metadata(cli);
    serde_json::from_str(meta.trim_start_matches("# ")).expect("metadata is JSON")
}
