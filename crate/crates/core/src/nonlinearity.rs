//! Boundary nonlinearities g and checks of the standing hypotheses
//! (Lipschitz, odd, monotone, bounded, g(0) = 0, g'(0) = 1).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::adaptive_simpson;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Caller-declared structural properties of g.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Flags {
    pub odd: bool,
    pub monotone: bool,
    pub bounded: bool,
    pub lipschitz: bool,
}

/// The boundary nonlinearity g with its derivative and declared properties.
#[derive(Clone)]
pub struct BoundaryNonlinearity {
    name: String,
    eval: ScalarFn,
    deriv: ScalarFn,
    antideriv: Option<ScalarFn>,
    bound: Option<f64>,
    flags: Flags,
    deriv_at_zero: f64,
}

impl fmt::Debug for BoundaryNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryNonlinearity")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .field("flags", &self.flags)
            .field("deriv_at_zero", &self.deriv_at_zero)
            .finish()
    }
}

/// Names accepted by [`BoundaryNonlinearity::builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["arctan", "neg_arctan", "sqrt_sin", "sq_sin_inv"];

// The odd builtins are evaluated on |u| and the sign copied back, so that
// g(−u) = −g(u) holds exactly in floating point.
fn odd(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 {
    move |u: f64| {
        let v = f(u.abs());
        if u < 0.0 {
            -v
        } else {
            v
        }
    }
}

fn even(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 {
    move |u: f64| f(u.abs())
}

impl BoundaryNonlinearity {
    /// A user-supplied nonlinearity. The flags are trusted as declared;
    /// use [`validate_hypotheses`] to check them.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bound: Option<f64>,
        flags: Flags,
    ) -> Self {
        let deriv_at_zero = deriv(0.0);
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            antideriv: None,
            bound,
            flags,
            deriv_at_zero,
        }
    }

    /// Attaches a closed-form antiderivative G(u) = ∫₀^u g.
    pub fn with_antiderivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.antideriv = Some(Arc::new(f));
        self
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let g = match name {
            "arctan" => Self::custom(
                name,
                odd(f64::atan),
                even(|u| 1.0 / (1.0 + u * u)),
                Some(std::f64::consts::FRAC_PI_2),
                Flags {
                    odd: true,
                    monotone: true,
                    bounded: true,
                    lipschitz: true,
                },
            )
            .with_antiderivative(even(|u| u * u.atan() - 0.5 * u.ln_1p_sq())),
            "neg_arctan" => Self::custom(
                name,
                odd(|u| -u.atan()),
                even(|u| -1.0 / (1.0 + u * u)),
                Some(std::f64::consts::FRAC_PI_2),
                Flags {
                    odd: true,
                    monotone: true,
                    bounded: true,
                    lipschitz: true,
                },
            )
            .with_antiderivative(even(|u| -(u * u.atan() - 0.5 * u.ln_1p_sq()))),
            "sqrt_sin" => Self::custom(
                name,
                odd(|u| u.sqrt() * u.sin()),
                even(|u| {
                    if u == 0.0 {
                        0.0
                    } else {
                        u.sin() / (2.0 * u.sqrt()) + u.sqrt() * u.cos()
                    }
                }),
                None,
                Flags {
                    odd: true,
                    ..Flags::default()
                },
            ),
            // Continuous extension g(0) = 0 and g'(0) = 0 (limit of the
            // difference quotient u·sin(1/u)).
            "sq_sin_inv" => Self::custom(
                name,
                odd(|u| if u == 0.0 { 0.0 } else { u * u * (1.0 / u).sin() }),
                even(|u| {
                    if u == 0.0 {
                        0.0
                    } else {
                        2.0 * u * (1.0 / u).sin() - (1.0 / u).cos()
                    }
                }),
                None,
                Flags {
                    odd: true,
                    ..Flags::default()
                },
            ),
            other => return Err(Error::UnknownNonlinearity(other.to_string())),
        };
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    #[inline]
    pub fn deriv(&self, u: f64) -> f64 {
        (self.deriv)(u)
    }

    /// sup |g|, or `None` when g is unbounded.
    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn deriv_at_zero(&self) -> f64 {
        self.deriv_at_zero
    }

    /// G(u) = ∫₀^u g(s) ds, closed form when available, otherwise adaptive
    /// Simpson quadrature.
    pub fn antiderivative(&self, u: f64) -> f64 {
        match &self.antideriv {
            Some(f) => f(u),
            None => {
                let g = |s: f64| self.eval(s);
                adaptive_simpson(&g, 0.0, u, 1e-12 * (1.0 + u.abs()))
            }
        }
    }
}

trait Ln1pSq {
    fn ln_1p_sq(self) -> f64;
}

impl Ln1pSq for f64 {
    /// ln(1 + u²) without cancellation for small u.
    fn ln_1p_sq(self) -> f64 {
        (self * self).ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    Odd,
    Monotone,
    Bounded,
    VanishesAtZero,
    UnitSlopeAtZero,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::Odd => "odd",
            Hypothesis::Monotone => "monotone",
            Hypothesis::Bounded => "bounded",
            Hypothesis::VanishesAtZero => "g(0)=0",
            Hypothesis::UnitSlopeAtZero => "g'(0)=1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    /// Whether the nonlinearity declares the property (always true for the
    /// two point conditions at zero, which are not flags).
    pub declared: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub name: String,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn passed(&self, h: Hypothesis) -> bool {
        self.checks.iter().any(|c| c.hypothesis == h && c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks each standing hypothesis over a sample set. A failed hypothesis is
/// reported, never raised.
pub fn validate_hypotheses(g: &BoundaryNonlinearity, samples: &[f64]) -> HypothesisReport {
    const TOL: f64 = 1e-14;
    let flags = g.flags();
    let values: Vec<f64> = samples.iter().map(|&u| g.eval(u)).collect();

    let odd_defect = samples
        .iter()
        .zip(&values)
        .map(|(&u, &gu)| (gu + g.eval(-u)).abs())
        .fold(0.0, f64::max);

    let mut sorted: Vec<(f64, f64)> = samples.iter().copied().zip(values.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nondecreasing = sorted.windows(2).all(|w| w[1].1 >= w[0].1 - TOL);
    let nonincreasing = sorted.windows(2).all(|w| w[1].1 <= w[0].1 + TOL);

    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (bounded_ok, bounded_detail) = match g.bound() {
        Some(b) => (
            sup <= b + TOL,
            format!("max |g| over samples {sup:.6e}, declared bound {b:.6e}"),
        ),
        None => (false, format!("no finite bound declared; max |g| over samples {sup:.6e}")),
    };

    let g0 = g.eval(0.0);
    let dg0 = g.deriv_at_zero();

    let checks = vec![
        HypothesisCheck {
            hypothesis: Hypothesis::Odd,
            declared: flags.odd,
            passed: odd_defect <= TOL,
            detail: format!("max |g(u)+g(-u)| = {odd_defect:.3e}"),
        },
        HypothesisCheck {
            hypothesis: Hypothesis::Monotone,
            declared: flags.monotone,
            passed: nondecreasing || nonincreasing,
            detail: if nondecreasing {
                "nondecreasing".into()
            } else if nonincreasing {
                "nonincreasing".into()
            } else {
                "changes direction".into()
            },
        },
        HypothesisCheck {
            hypothesis: Hypothesis::Bounded,
            declared: flags.bounded,
            passed: bounded_ok,
            detail: bounded_detail,
        },
        HypothesisCheck {
            hypothesis: Hypothesis::VanishesAtZero,
            declared: true,
            passed: g0.abs() <= TOL,
            detail: format!("g(0) = {g0:e}"),
        },
        HypothesisCheck {
            hypothesis: Hypothesis::UnitSlopeAtZero,
            declared: true,
            passed: (dg0 - 1.0).abs() <= 1e-12,
            detail: format!("g'(0) = {dg0}"),
        },
    ];
    HypothesisReport {
        name: g.name().to_string(),
        checks,
    }
}

/// `count` points evenly spaced on [−half_width, half_width].
pub fn symmetric_samples(half_width: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<f64> {
        symmetric_samples(10.0, 201)
    }

    #[test]
    fn arctan_point_values() {
        let g = BoundaryNonlinearity::builtin("arctan").unwrap();
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.deriv(0.0), 1.0);
        assert_eq!(g.bound(), Some(std::f64::consts::FRAC_PI_2));
    }

    #[test]
    fn unknown_name_is_rejected() {
        let err = BoundaryNonlinearity::builtin("tanh").unwrap_err();
        assert_eq!(err.to_string(), "unknown nonlinearity: tanh");
    }

    #[test]
    fn arctan_passes_everything() {
        let g = BoundaryNonlinearity::builtin("arctan").unwrap();
        let report = validate_hypotheses(&g, &samples());
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn sqrt_sin_is_unbounded() {
        let g = BoundaryNonlinearity::builtin("sqrt_sin").unwrap();
        let report = validate_hypotheses(&g, &samples());
        assert!(!report.passed(Hypothesis::Bounded));
        assert!(report.passed(Hypothesis::Odd));
        assert!(!report.passed(Hypothesis::Monotone));
    }

    #[test]
    fn neg_arctan_fails_only_unit_slope() {
        let g = BoundaryNonlinearity::builtin("neg_arctan").unwrap();
        let report = validate_hypotheses(&g, &samples());
        let failed: Vec<_> = report.failures().map(|c| c.hypothesis).collect();
        assert_eq!(failed, vec![Hypothesis::UnitSlopeAtZero]);
        assert_eq!(g.deriv_at_zero(), -1.0);
    }

    #[test]
    fn sq_sin_inv_extension_at_zero() {
        let g = BoundaryNonlinearity::builtin("sq_sin_inv").unwrap();
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.deriv_at_zero(), 0.0);
        assert!((g.eval(1e-3)).abs() <= 1e-6);
    }

    #[test]
    fn builtins_are_exactly_odd() {
        for name in BUILTIN_NAMES {
            let g = BoundaryNonlinearity::builtin(name).unwrap();
            for u in samples() {
                assert!((g.eval(u) + g.eval(-u)).abs() <= 1e-14, "{name} at {u}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for name in BUILTIN_NAMES {
            let g = BoundaryNonlinearity::builtin(name).unwrap();
            for k in 0..100 {
                // 100 points on [-9.9, 9.9], avoiding u = 0.
                let u = -9.9 + 19.8 * (k as f64 + 0.5) / 100.0;
                let h = 1e-6 * (1.0 + u.abs());
                let fd = (g.eval(u + h) - g.eval(u - h)) / (2.0 * h);
                let d = g.deriv(u);
                assert!(
                    (fd - d).abs() <= 1e-6 * d.abs().max(1.0),
                    "{name} at {u}: fd {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let g = BoundaryNonlinearity::builtin("arctan").unwrap();
        let q = adaptive_simpson(&|s: f64| s.atan(), 0.0, -2.5, 1e-13);
        assert!((g.antiderivative(-2.5) - q).abs() < 1e-11);
        let s = BoundaryNonlinearity::builtin("sqrt_sin").unwrap();
        assert!(s.antiderivative(3.0) > 0.0);
        assert!((s.antiderivative(3.0) - s.antiderivative(-3.0)).abs() < 1e-10);
    }
}
