//! Brute-force reference computations used to cross-check the solvers.
//!
//! Nothing here shares code with the production paths: the spectrum oracle
//! scans the original tan/rational and squared identities on a dense mesh
//! rather than the smooth forms the solver brackets.

use std::f64::consts::FRAC_PI_2;

/// Scan step in s.
pub const SCAN_STEP: f64 = 1e-4;
/// Width of the excluded neighbourhood around each asymptote.
pub const ASYMPTOTE_WINDOW: f64 = 1e-3;

fn refine(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    0.5 * (a + b)
}

fn scan(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, excluded: &dyn Fn(f64) -> bool) -> Vec<f64> {
    let steps = ((hi - lo) / SCAN_STEP).ceil() as usize;
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let s = lo + i as f64 * SCAN_STEP;
        if excluded(s) {
            prev = None;
            continue;
        }
        let v = f(s);
        if let Some((ps, pv)) = prev {
            if pv != 0.0 && v != 0.0 && (pv > 0.0) != (v > 0.0) {
                roots.push(refine(f, ps, s));
            }
        }
        prev = Some((s, v));
    }
    roots
}

/// Robin eigenvalues μ with √|1+μ| in (0, s_max), by dense sign-change scan
/// of e^{2s} = ((s+γ)/(s−γ))² (μ > −1) and tan s = 2γs/(γ²−s²) (μ < −1).
/// Sorted by decreasing μ. The degenerate eigenvalue μ = −1 is not reported.
pub fn robin_eigenvalues_dense_scan(gamma: f64, s_max: f64) -> Vec<f64> {
    let ag = gamma.abs();
    let near_gamma = |s: f64| (s - ag).abs() < 0.5 * ASYMPTOTE_WINDOW;
    let near_pole = |s: f64| {
        let k = (s / std::f64::consts::PI - 0.5).round();
        (s - (2.0 * k + 1.0) * FRAC_PI_2).abs() < 0.5 * ASYMPTOTE_WINDOW
    };

    let squared = |s: f64| (2.0 * s).exp() - ((s + gamma) / (s - gamma)).powi(2);
    let tangent = |s: f64| s.tan() - 2.0 * gamma * s / (gamma * gamma - s * s);

    let upper = scan(&squared, SCAN_STEP, s_max.min(ag + 3.0), &near_gamma);
    let lower = scan(&tangent, SCAN_STEP, s_max, &|s| near_gamma(s) || near_pole(s));

    let mut mus: Vec<f64> = upper.iter().map(|s| s * s - 1.0).collect();
    mus.extend(lower.iter().map(|s| -1.0 - s * s));
    mus.sort_by(|a, b| b.total_cmp(a));
    mus
}

/// Smallest c > 0 in (lo, hi] solving σ − g(kc)/(kc) = λ, by dense scan.
pub fn branch_amplitude_scan(
    g: &dyn Fn(f64) -> f64,
    sigma: f64,
    k: f64,
    lambda: f64,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Vec<f64> {
    let f = |c: f64| sigma - g(k * c) / (k * c) - lambda;
    let mut roots = Vec::new();
    let dc = (hi - lo) / steps as f64;
    let mut prev = f(lo);
    for i in 1..=steps {
        let c = lo + i as f64 * dc;
        let v = f(c);
        if prev != 0.0 && v != 0.0 && (prev > 0.0) != (v > 0.0) {
            roots.push(refine(&f, c - dc, c));
        }
        prev = v;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_case_from_scan() {
        let mus = robin_eigenvalues_dense_scan(0.0, 10.0);
        // γ = 0: tan s = 0, s = kπ
        assert_eq!(mus.len(), 3);
        for (k, mu) in mus.iter().enumerate() {
            let s = (k + 1) as f64 * std::f64::consts::PI;
            assert!((mu + 1.0 + s * s).abs() < 1e-8);
        }
    }
}
