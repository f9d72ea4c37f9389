//! Scalar root finding and quadrature used across the crate.

use crate::error::{Error, Result};

/// Bisection on a bracket with f(lo)·f(hi) ≤ 0, refined until the bracket
/// is narrower than `tol` (absolute).
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::BracketFailure {
            lo,
            hi,
            reason: format!("no sign change (f(lo) = {flo:e}, f(hi) = {fhi:e})"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All roots of `f` on [lo, hi] found by a uniform sign-change scan with
/// `steps` cells followed by bisection.
pub fn scan_roots(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    if !(hi > lo) || steps == 0 {
        return Ok(roots);
    }
    let dx = (hi - lo) / steps as f64;
    let mut a = lo;
    let mut fa = f(a);
    for k in 1..=steps {
        let b = if k == steps { hi } else { lo + k as f64 * dx };
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fb != 0.0 && fa.signum() != fb.signum() {
            roots.push(bisect(&f, a, b, tol)?);
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(hi);
    }
    Ok(roots)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre rule on [a, b] with `panels` panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * w;
            GL5_NODES
                .iter()
                .zip(GL5_WEIGHTS)
                .map(|(t, wt)| wt * f(mid + 0.5 * w * t))
                .sum::<f64>()
                * 0.5
                * w
        })
        .sum()
}

/// Adaptive Simpson quadrature on [a, b].
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}
