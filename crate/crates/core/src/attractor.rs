//! Regime classification and the compactified attractor as a graph of
//! equilibria (bounded and at infinity) joined by heteroclinic edges.

use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::compactification::{hemisphere_simulate_until, infinity_flow_simulate, project, HemisphereConfig};
use crate::equilibria::{log_mesh, BranchId, EquilibriumBranch};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::BoundaryNonlinearity;
use crate::numerics::bisect;
use crate::parallel::{self, Execution};
use crate::pde::{simulate, SimulationConfig};
use crate::spectrum::{linearized_spectrum_at, morse_index, spectrum_at_infinity, LinearizationPoint, RobinSpectrum};
use crate::steklov::{sigma1, sigma2};

/// Distance from a bifurcation value below which λ counts as non-hyperbolic.
pub const REGIME_TOL: f64 = 1e-10;
pub const DEFAULT_EPSILON: f64 = 1e-2;
pub const VERIFY_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    R1,
    R2,
    R3,
    R4,
    R5,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// σ*₁ < σ₁ < σ*₂ < σ₂ with σ*ᵢ = σᵢ − g'(0).
pub fn bifurcation_values(g: &BoundaryNonlinearity) -> [f64; 4] {
    let d = g.deriv_at_zero();
    [sigma1() - d, sigma1(), sigma2() - d, sigma2()]
}

pub fn classify_regime(lambda: f64, g: &BoundaryNonlinearity) -> Result<Regime> {
    let values = bifurcation_values(g);
    if !values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(format!(
            "regime table needs 0 < g'(0) < σ₂ − σ₁, got g'(0) = {}",
            g.deriv_at_zero()
        )));
    }
    if let Some(&critical) = values.iter().find(|v| (lambda - **v).abs() <= REGIME_TOL) {
        return Err(Error::NonHyperbolicParameter { lambda, critical });
    }
    let above = values.iter().filter(|v| lambda > **v).count();
    Ok([Regime::R1, Regime::R2, Regime::R3, Regime::R4, Regime::R5][above])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Bounded,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Bounded,
    Blowup,
    AtInfinity,
}

/// Where a node lives: a bounded equilibrium (with its amplitude on a
/// branch, or 0) or ±φ_N at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeProfile {
    Zero,
    Branch { branch: BranchId, c: f64 },
    Infinity { mode: usize, sign: i32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    pub label: String,
    pub morse_index: Option<usize>,
    #[serde(skip)]
    pub profile: NodeProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evidence {
    Asserted,
    Simulated {
        final_distance: f64,
        sim_time: f64,
        verified: bool,
    },
}

impl Serialize for Evidence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Evidence::Asserted => s.serialize_str("asserted"),
            Evidence::Simulated {
                final_distance,
                sim_time,
                verified,
            } => {
                let mut m = s.serialize_map(Some(3))?;
                m.serialize_entry("final_distance", final_distance)?;
                m.serialize_entry("sim_time", sim_time)?;
                m.serialize_entry("verified", verified)?;
                m.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub kind: EdgeKind,
    pub evidence: Evidence,
}

impl Edge {
    pub fn is_verified(&self) -> bool {
        matches!(self.evidence, Evidence::Simulated { verified: true, .. })
    }

    pub fn final_distance(&self) -> Option<f64> {
        match self.evidence {
            Evidence::Simulated { final_distance, .. } => Some(final_distance),
            Evidence::Asserted => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorGraph {
    pub lambda: f64,
    pub regime: Regime,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl AttractorGraph {
    pub fn node(&self, label: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn all_verified(&self) -> bool {
        self.edges.iter().all(Edge::is_verified)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorConfig {
    pub grid: Grid,
    pub dt: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    /// Time limit of each bounded or blow-up verification run.
    pub t_end: f64,
    /// Time limit of each run on the sphere at infinity.
    pub t_end_infinity: f64,
    pub execution: Execution,
}

impl AttractorConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            dt: crate::pde::DEFAULT_DT,
            epsilon: DEFAULT_EPSILON,
            tolerance: VERIFY_TOL,
            t_end: 200.0,
            t_end_infinity: 50.0,
            execution: Execution::default(),
        }
    }
}

/// The amplitude c > 0 with λ(c) = λ on a branch, if any.
pub fn branch_amplitude(branch: &EquilibriumBranch, lambda: f64) -> Option<f64> {
    let f = |c: f64| branch.lambda_of_amplitude(c).value - lambda;
    let mesh = log_mesh(1e-8, 1e8, 640);
    mesh.windows(2)
        .find(|w| f(w[0]).signum() != f(w[1]).signum())
        .and_then(|w| bisect(f, w[0], w[1], 1e-14).ok())
}

fn sign_label(sign: i32) -> &'static str {
    if sign > 0 {
        "+"
    } else {
        "-"
    }
}

struct Builder<'a> {
    lambda: f64,
    g: &'a BoundaryNonlinearity,
    grid: Grid,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn add(&mut self, profile: NodeProfile) -> Result<usize> {
        let id = self.nodes.len();
        let (kind, label, morse_index) = match profile {
            NodeProfile::Zero => {
                let spec = linearized_spectrum_at(LinearizationPoint::Zero, self.lambda, self.g, 3, self.grid)?;
                (NodeKind::Bounded, "0".to_string(), Some(morse_index(&spec)?))
            }
            NodeProfile::Branch { branch, c } => {
                let b = EquilibriumBranch::new(branch, self.g.clone());
                let sign = if c > 0.0 { 1 } else { -1 };
                let spec = b.linearized_spectrum(c, 3, self.grid)?;
                (
                    NodeKind::Bounded,
                    format!("{}u{}", sign_label(sign), branch.index()),
                    Some(morse_index(&spec)?),
                )
            }
            NodeProfile::Infinity { mode, sign } => (NodeKind::Infinity, format!("{}phi{mode}", sign_label(sign)), None),
        };
        self.nodes.push(Node {
            id,
            kind,
            label,
            morse_index,
            profile,
        });
        Ok(id)
    }
}

/// A planned edge with everything needed to verify it.
#[derive(Debug, Clone)]
struct EdgePlan {
    source: usize,
    target: usize,
    kind: EdgeKind,
    /// Which side of the source's unstable direction to start on.
    side: i32,
    /// Unstable direction of the source (for bounded sources).
    direction: usize,
}

/// Builds the graph of the regime containing λ. With `verify`, every edge is
/// simulated from its source perturbed by ε along an unstable eigenfunction
/// and carries the final distance to its target.
pub fn build_attractor(lambda: f64, g: &BoundaryNonlinearity, verify: bool, config: &AttractorConfig) -> Result<AttractorGraph> {
    let regime = classify_regime(lambda, g)?;
    let mut b = Builder {
        lambda,
        g,
        grid: config.grid,
        nodes: Vec::new(),
    };
    let zero = b.add(NodeProfile::Zero)?;
    let mut plans = Vec::new();
    let bounded_pair = |b: &mut Builder, id: BranchId| -> Result<[usize; 2]> {
        let branch = EquilibriumBranch::new(id, g.clone());
        let c = branch_amplitude(&branch, lambda).ok_or_else(|| {
            Error::InvalidInput(format!("no equilibrium on branch {} at λ = {lambda}", id.index()))
        })?;
        Ok([
            b.add(NodeProfile::Branch { branch: id, c })?,
            b.add(NodeProfile::Branch { branch: id, c: -c })?,
        ])
    };
    let infinity_pair = |b: &mut Builder, mode: usize| -> Result<[usize; 2]> {
        Ok([
            b.add(NodeProfile::Infinity { mode, sign: 1 })?,
            b.add(NodeProfile::Infinity { mode, sign: -1 })?,
        ])
    };
    let from_zero = |plans: &mut Vec<EdgePlan>, targets: [usize; 2], kind, direction| {
        for (target, side) in targets.into_iter().zip([1, -1]) {
            plans.push(EdgePlan {
                source: zero,
                target,
                kind,
                side,
                direction,
            });
        }
    };
    match regime {
        Regime::R1 => {}
        Regime::R2 => {
            let u1 = bounded_pair(&mut b, BranchId::One)?;
            from_zero(&mut plans, u1, EdgeKind::Bounded, 1);
        }
        Regime::R3 => {
            let phi1 = infinity_pair(&mut b, 1)?;
            from_zero(&mut plans, phi1, EdgeKind::Blowup, 1);
        }
        Regime::R4 => {
            let u2 = bounded_pair(&mut b, BranchId::Two)?;
            let phi1 = infinity_pair(&mut b, 1)?;
            from_zero(&mut plans, u2, EdgeKind::Bounded, 2);
            from_zero(&mut plans, phi1, EdgeKind::Blowup, 1);
            // both sides of each saddle's unstable manifold, towards both
            // signs; verification keeps the pairings that occur
            for source in u2 {
                for (target, side) in phi1.into_iter().zip([1, -1]) {
                    plans.push(EdgePlan {
                        source,
                        target,
                        kind: EdgeKind::Blowup,
                        side,
                        direction: 1,
                    });
                }
            }
        }
        Regime::R5 => {
            let phi1 = infinity_pair(&mut b, 1)?;
            let phi2 = infinity_pair(&mut b, 2)?;
            from_zero(&mut plans, phi1, EdgeKind::Blowup, 1);
            from_zero(&mut plans, phi2, EdgeKind::Blowup, 2);
            for source in phi2 {
                for (target, side) in phi1.into_iter().zip([1, -1]) {
                    plans.push(EdgePlan {
                        source,
                        target,
                        kind: EdgeKind::AtInfinity,
                        side,
                        direction: 1,
                    });
                }
            }
        }
    }
    let nodes = b.nodes;

    let edges = if !verify {
        plans
            .iter()
            .map(|p| Edge {
                source: p.source,
                target: p.target,
                kind: p.kind,
                evidence: Evidence::Asserted,
            })
            .collect()
    } else {
        let ctx = VerifyContext::new(lambda, g, &nodes, config)?;
        let results = parallel::map(&plans, config.execution, |p| ctx.run(p));
        let mut edges: Vec<Edge> = Vec::new();
        for (plan, result) in plans.iter().zip(results) {
            let outcome = result?;
            // a saddle side is a candidate for both signs; keep the
            // pairing the simulation actually realizes
            let target = if regime == Regime::R4 && plan.source != zero {
                outcome.reached.unwrap_or(plan.target)
            } else {
                plan.target
            };
            if edges.iter().any(|e| e.source == plan.source && e.target == target) {
                continue;
            }
            let final_distance = if target == plan.target {
                outcome.distance
            } else {
                outcome.distance_other
            };
            edges.push(Edge {
                source: plan.source,
                target,
                kind: plan.kind,
                evidence: Evidence::Simulated {
                    final_distance,
                    sim_time: outcome.time,
                    verified: final_distance < config.tolerance,
                },
            });
        }
        edges
    };
    Ok(AttractorGraph {
        lambda,
        regime,
        nodes,
        edges,
    })
}

struct Outcome {
    /// Distance to the planned target.
    distance: f64,
    /// Distance to the opposite-sign partner of the target.
    distance_other: f64,
    time: f64,
    /// For blow-up runs, the node of the observed direction.
    reached: Option<usize>,
}

struct VerifyContext<'a> {
    lambda: f64,
    g: &'a BoundaryNonlinearity,
    nodes: &'a [Node],
    config: &'a AttractorConfig,
    infinity: RobinSpectrum,
    zero_lin: RobinSpectrum,
}

impl<'a> VerifyContext<'a> {
    fn new(lambda: f64, g: &'a BoundaryNonlinearity, nodes: &'a [Node], config: &'a AttractorConfig) -> Result<Self> {
        Ok(Self {
            lambda,
            g,
            nodes,
            config,
            infinity: spectrum_at_infinity(lambda, 6, config.grid)?,
            zero_lin: linearized_spectrum_at(LinearizationPoint::Zero, lambda, g, 3, config.grid)?,
        })
    }

    fn bounded_field(&self, profile: NodeProfile) -> Field {
        match profile {
            NodeProfile::Zero => Field::zeros(self.config.grid),
            NodeProfile::Branch { branch, c } => EquilibriumBranch::new(branch, self.g.clone()).profile(c, self.config.grid),
            NodeProfile::Infinity { .. } => unreachable!("not a bounded node"),
        }
    }

    fn infinity_field(&self, profile: NodeProfile) -> Field {
        match profile {
            NodeProfile::Infinity { mode, sign } => self.infinity.phi(mode).scaled(sign as f64),
            _ => unreachable!("not an infinity node"),
        }
    }

    fn find_infinity(&self, mode: usize, sign: i32) -> Option<usize> {
        self.nodes
            .iter()
            .find(|n| n.profile == NodeProfile::Infinity { mode, sign })
            .map(|n| n.id)
    }

    fn run(&self, plan: &EdgePlan) -> Result<Outcome> {
        let source = self.nodes[plan.source].profile;
        let target = self.nodes[plan.target].profile;
        let eps = self.config.epsilon;
        match plan.kind {
            EdgeKind::AtInfinity => {
                let start = self.infinity_field(source);
                let goal = self.infinity_field(target);
                let mut u0 = start.clone();
                u0.add_scaled(self.infinity.phi(plan.direction), eps * plan.side as f64);
                let mut cfg = HemisphereConfig::new(self.lambda, self.config.t_end_infinity);
                cfg.dt = self.config.dt;
                let traj = infinity_flow_simulate(&u0.normalized().expect("nonzero"), &cfg)?;
                let end = &traj.final_point().u;
                Ok(Outcome {
                    distance: end.distance(&goal),
                    distance_other: end.distance(&goal.scaled(-1.0)),
                    time: traj.final_time(),
                    reached: None,
                })
            }
            EdgeKind::Bounded | EdgeKind::Blowup => {
                let base = self.bounded_field(source);
                let direction = match source {
                    NodeProfile::Zero => self.zero_lin.phi(plan.direction).clone(),
                    NodeProfile::Branch { branch, c } => EquilibriumBranch::new(branch, self.g.clone())
                        .linearized_spectrum(c, 3, self.config.grid)?
                        .phi(plan.direction)
                        .clone(),
                    NodeProfile::Infinity { .. } => unreachable!("edges leave bounded nodes"),
                };
                // orient the perturbation towards the planned target
                let reference = match target {
                    NodeProfile::Infinity { .. } => self.infinity_field(target),
                    _ => self.bounded_field(target),
                };
                let orient = if source == NodeProfile::Zero {
                    if direction.dot(&reference) >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    plan.side as f64
                };
                let mut u0 = base.clone();
                u0.add_scaled(&direction, eps * orient);
                let mut cfg = SimulationConfig::new(self.lambda, self.config.t_end);
                cfg.dt = self.config.dt;
                cfg.n_modes = 2;
                if plan.kind == EdgeKind::Bounded {
                    cfg.converge_tol = Some(1e-9);
                }
                let rec = simulate(&u0, self.g, &cfg)?;
                let end = &rec.final_state;
                let time = rec.final_time();
                if plan.kind == EdgeKind::Bounded {
                    let goal = self.bounded_field(target);
                    return Ok(Outcome {
                        distance: end.distance(&goal),
                        distance_other: end.distance(&goal.scaled(-1.0)),
                        time,
                        reached: None,
                    });
                }
                let dir = end.normalized().unwrap_or_else(|| end.clone());
                let d_plus = dir.distance(&reference);
                let d_minus = dir.distance(&reference.scaled(-1.0));
                let reached = match target {
                    NodeProfile::Infinity { mode, sign } if rec.blew_up() => {
                        let s = if d_plus <= d_minus { sign } else { -sign };
                        self.find_infinity(mode, s)
                    }
                    _ => None,
                };
                Ok(Outcome {
                    distance: if rec.blew_up() { d_plus } else { f64::INFINITY },
                    distance_other: if rec.blew_up() { d_minus } else { f64::INFINITY },
                    time,
                    reached,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShadowingReport {
    pub lambda: f64,
    pub epsilon: f64,
    /// First time the rescaled state is within 0.1 of ±φ₂.
    pub t_near2: f64,
    /// First later time it is within 0.1 of ±φ₁, if within the horizon.
    pub t_switch: Option<f64>,
    pub t_end: f64,
    pub final_distance_phi1: f64,
    pub final_distance_phi2: f64,
}

/// Threshold on the rescaled distance for "near" in [`shadowing_experiment`].
pub const SHADOW_RADIUS: f64 = 0.1;

fn rescaled_distance(u: &Field, phi: &Field) -> f64 {
    match u.normalized() {
        Some(v) => v.distance(phi).min(v.distance(&phi.scaled(-1.0))),
        None => f64::INFINITY,
    }
}

/// Runs u₀ = 0.01(εφ₁ + φ₂) on the hemisphere, where growth has no
/// threshold, and records when the direction passes near φ₂ and then φ₁.
pub fn shadowing_experiment(
    lambda: f64,
    epsilon: f64,
    g: &BoundaryNonlinearity,
    grid: Grid,
    dt: f64,
    t_end: f64,
) -> Result<ShadowingReport> {
    if classify_regime(lambda, g)? != Regime::R5 {
        return Err(Error::InvalidInput(format!("λ = {lambda} is not above σ₂")));
    }
    let spec = spectrum_at_infinity(lambda, 2, grid)?;
    let (phi1, phi2) = (spec.phi(1), spec.phi(2));
    let mut u0 = phi2.scaled(0.01);
    u0.add_scaled(phi1, 0.01 * epsilon);
    let mut cfg = HemisphereConfig::new(lambda, t_end);
    cfg.dt = dt;
    cfg.sample_interval = dt.max(0.01);
    let mut t_near2 = None;
    let mut t_switch = None;
    let traj = hemisphere_simulate_until(&project(&u0), Some(g), &cfg, |t, p| {
        if t_near2.is_none() && rescaled_distance(&p.u, phi2) < SHADOW_RADIUS {
            t_near2 = Some(t);
        } else if t_near2.is_some() && t_switch.is_none() && rescaled_distance(&p.u, phi1) < SHADOW_RADIUS {
            t_switch = Some(t);
        }
        t_switch.is_some()
    })?;
    let t_near2 = t_near2.ok_or_else(|| {
        Error::TransientNotObserved(format!("direction never came within {SHADOW_RADIUS} of φ₂ by t = {t_end}"))
    })?;
    let end = &traj.final_point().u;
    Ok(ShadowingReport {
        lambda,
        epsilon,
        t_near2,
        t_switch,
        t_end,
        final_distance_phi1: rescaled_distance(end, phi1),
        final_distance_phi2: rescaled_distance(end, phi2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arctan() -> BoundaryNonlinearity {
        BoundaryNonlinearity::builtin("arctan").unwrap()
    }

    #[test]
    fn regimes() {
        let g = arctan();
        assert_eq!(classify_regime(-1.0, &g).unwrap(), Regime::R1);
        assert_eq!(classify_regime(0.0, &g).unwrap(), Regime::R2);
        assert_eq!(classify_regime(1.0, &g).unwrap(), Regime::R3);
        assert_eq!(classify_regime(1.5, &g).unwrap(), Regime::R4);
        assert_eq!(classify_regime(3.0, &g).unwrap(), Regime::R5);
        assert!(matches!(
            classify_regime(sigma1(), &g),
            Err(Error::NonHyperbolicParameter { .. })
        ));
        let v = bifurcation_values(&g);
        assert!((v[0] - -0.537_882_842_739_990).abs() < 1e-12);
        assert!((v[2] - 1.163_953_413_738_65).abs() < 1e-12);
    }

    #[test]
    fn unverified_counts() {
        let g = arctan();
        let cfg = AttractorConfig::new(Grid::new(200).unwrap());
        for (lambda, nodes, edges) in [(-1.0, 1, 0), (0.0, 3, 2), (1.0, 3, 2), (1.5, 5, 8), (3.0, 5, 8)] {
            let graph = build_attractor(lambda, &g, false, &cfg).unwrap();
            assert_eq!((graph.nodes.len(), graph.edges.len()), (nodes, edges), "λ={lambda}");
            assert!(graph.edges.iter().all(|e| e.evidence == Evidence::Asserted));
        }
    }

    #[test]
    fn asserted_evidence_serializes_as_string() {
        let e = Edge {
            source: 0,
            target: 1,
            kind: EdgeKind::AtInfinity,
            evidence: Evidence::Asserted,
        };
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["evidence"], "asserted");
        assert_eq!(json["kind"], "at_infinity");
    }
}
