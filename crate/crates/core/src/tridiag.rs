//! Tridiagonal solves by twisted elimination.
//!
//! Elimination runs from both ends towards the middle row and the two sweeps
//! meet there. For a matrix that is symmetric under the reversal i ↦ n−1−i
//! the two sweeps perform mirror-image floating point operations, so an odd
//! (even) right-hand side produces an exactly odd (even) solution when n is
//! odd. The plain Thomas algorithm only preserves the symmetry to rounding.

/// A tridiagonal matrix with its twisted factorization.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    sup: Vec<f64>,
    // top sweep: x_i = top_rhs_i − top_c_i·x_{i+1}, i < mid
    top_c: Vec<f64>,
    top_den: Vec<f64>,
    // bottom sweep: x_i = bot_rhs_i − bot_a_i·x_{i−1}, i > mid
    bot_a: Vec<f64>,
    bot_den: Vec<f64>,
    mid: usize,
    mid_den: f64,
}

impl Tridiagonal {
    /// `sub[i]` multiplies x_{i−1} in row i (sub[0] unused), `sup[i]`
    /// multiplies x_{i+1} (sup[n−1] unused).
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Self {
        let n = diag.len();
        assert!(n >= 3 && sub.len() == n && sup.len() == n);
        let mid = n / 2;
        let mut top_c = vec![0.0; n];
        let mut top_den = vec![0.0; n];
        for i in 0..mid {
            let den = if i == 0 {
                diag[0]
            } else {
                diag[i] - sub[i] * top_c[i - 1]
            };
            top_den[i] = den;
            top_c[i] = sup[i] / den;
        }
        let mut bot_a = vec![0.0; n];
        let mut bot_den = vec![0.0; n];
        for i in (mid + 1..n).rev() {
            let den = if i == n - 1 {
                diag[n - 1]
            } else {
                diag[i] - sup[i] * bot_a[i + 1]
            };
            bot_den[i] = den;
            bot_a[i] = sub[i] / den;
        }
        let mid_den = diag[mid] - sub[mid] * top_c[mid - 1] - sup[mid] * bot_a[mid + 1];
        Self {
            sub,
            sup,
            top_c,
            top_den,
            bot_a,
            bot_den,
            mid,
            mid_den,
        }
    }

    pub fn len(&self) -> usize {
        self.top_c.len()
    }

    /// Solves in place: `rhs` is overwritten with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        let mid = self.mid;
        for i in 0..mid {
            let prev = if i == 0 { 0.0 } else { self.sub[i] * rhs[i - 1] };
            rhs[i] = (rhs[i] - prev) / self.top_den[i];
        }
        for i in (mid + 1..n).rev() {
            let next = if i == n - 1 { 0.0 } else { self.sup[i] * rhs[i + 1] };
            rhs[i] = (rhs[i] - next) / self.bot_den[i];
        }
        let xm = (rhs[mid] - self.sub[mid] * rhs[mid - 1] - self.sup[mid] * rhs[mid + 1]) / self.mid_den;
        rhs[mid] = xm;
        for i in (0..mid).rev() {
            rhs[i] -= self.top_c[i] * rhs[i + 1];
        }
        for i in mid + 1..n {
            rhs[i] -= self.bot_a[i] * rhs[i - 1];
        }
    }
}
