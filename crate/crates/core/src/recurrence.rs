//! Finite orthogonal-polynomial families given by a three-term recurrence.
//!
//! A family of length `N` satisfies
//! `x P_n = A_n P_{n+1} - B_n P_n + C_n P_{n-1}` with `C_0 = A_{N-1} = 0`,
//! where `B_n = A_n + C_n` unless an explicit diagonal is supplied. The
//! relation at `n = N-1` only holds on the grid `λ(0..N)`.

use serde::Serialize;
use thiserror::Error;

use crate::dd::Dd;
use crate::specialfn::LogReal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecurrenceError {
    #[error("a family needs at least one polynomial")]
    Empty,
    #[error("{what} has length {got}, expected {expected}")]
    Length {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("boundary coefficient {0} must vanish")]
    Boundary(&'static str),
    #[error("Favard positivity fails at n = {index}: A_n C_(n+1) = {value}")]
    Favard { index: usize, value: f64 },
    #[error("grid points {0} and {1} coincide")]
    GridNotDistinct(usize, usize),
    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("grid vector at k = {0} underflows at n = 0")]
    Underflow(usize),
}

/// A finite orthogonal-polynomial family: recurrence, grid, weight and norms.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceFamily {
    label: String,
    a: Vec<f64>,
    c: Vec<f64>,
    b: Vec<f64>,
    grid: Vec<f64>,
    weight: Vec<LogReal>,
    norm: Vec<LogReal>,
    /// Low-order parts of `A`, `C`, `B` and the grid; zero unless the family
    /// was built from double-double coefficients.
    lo: [Vec<f64>; 4],
}

impl RecurrenceFamily {
    /// A family with the default diagonal `B_n = A_n + C_n`.
    pub fn new(
        label: impl Into<String>,
        a: Vec<f64>,
        c: Vec<f64>,
        grid: Vec<f64>,
        weight: Vec<LogReal>,
        norm: Vec<LogReal>,
    ) -> Result<Self, RecurrenceError> {
        let b = a.iter().zip(&c).map(|(a, c)| a + c).collect();
        Self::with_diagonal(label, a, c, b, grid, weight, norm)
    }

    /// A family with an explicit diagonal `B_n`.
    pub fn with_diagonal(
        label: impl Into<String>,
        a: Vec<f64>,
        c: Vec<f64>,
        b: Vec<f64>,
        grid: Vec<f64>,
        weight: Vec<LogReal>,
        norm: Vec<LogReal>,
    ) -> Result<Self, RecurrenceError> {
        let n = a.len();
        if n == 0 {
            return Err(RecurrenceError::Empty);
        }
        for (what, got) in [
            ("C", c.len()),
            ("B", b.len()),
            ("grid", grid.len()),
            ("weight", weight.len()),
            ("norm", norm.len()),
        ] {
            if got != n {
                return Err(RecurrenceError::Length {
                    what,
                    got,
                    expected: n,
                });
            }
        }
        for (what, v) in [("A", &a), ("C", &c), ("B", &b), ("grid", &grid)] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(RecurrenceError::NonFinite(what));
            }
        }
        if c[0] != 0.0 {
            return Err(RecurrenceError::Boundary("C_0"));
        }
        if a[n - 1] != 0.0 {
            return Err(RecurrenceError::Boundary("A_(N-1)"));
        }
        for i in 0..n - 1 {
            let value = a[i] * c[i + 1];
            if !(value > 0.0) {
                return Err(RecurrenceError::Favard { index: i, value });
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| grid[i].total_cmp(&grid[j]));
        for w in order.windows(2) {
            if grid[w[0]] == grid[w[1]] {
                return Err(RecurrenceError::GridNotDistinct(w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        Ok(RecurrenceFamily {
            label: label.into(),
            a,
            c,
            b,
            grid,
            weight,
            norm,
            lo: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        })
    }

    /// A family with the default diagonal whose coefficients and grid are
    /// known to double-double accuracy. The low parts only enter the grid
    /// null vectors ([`SymmetrizedFamily::r_at_grid`]), where `λ + B_n` can
    /// cancel by many orders of magnitude.
    pub fn new_dd(
        label: impl Into<String>,
        a: Vec<Dd>,
        c: Vec<Dd>,
        grid: Vec<Dd>,
        weight: Vec<LogReal>,
        norm: Vec<LogReal>,
    ) -> Result<Self, RecurrenceError> {
        let b: Vec<Dd> = a.iter().zip(&c).map(|(a, c)| *a + *c).collect();
        let hi = |v: &[Dd]| v.iter().map(|x| x.hi).collect::<Vec<_>>();
        let lo = |v: &[Dd]| v.iter().map(|x| x.lo).collect::<Vec<_>>();
        let mut fam = Self::with_diagonal(label, hi(&a), hi(&c), hi(&b), hi(&grid), weight, norm)?;
        if c.len() == a.len() && grid.len() == a.len() {
            fam.lo = [lo(&a), lo(&c), lo(&b), lo(&grid)];
        }
        Ok(fam)
    }

    pub(crate) fn a_dd(&self, n: usize) -> Dd {
        Dd::new(self.a[n], self.lo[0][n])
    }

    pub(crate) fn c_dd(&self, n: usize) -> Dd {
        Dd::new(self.c[n], self.lo[1][n])
    }

    pub(crate) fn b_dd(&self, n: usize) -> Dd {
        Dd::new(self.b[n], self.lo[2][n])
    }

    pub(crate) fn grid_dd(&self, k: usize) -> Dd {
        Dd::new(self.grid[k], self.lo[3][k])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn coeff_a(&self) -> &[f64] {
        &self.a
    }

    pub fn coeff_c(&self) -> &[f64] {
        &self.c
    }

    /// The diagonal `B_n`.
    pub fn coeff_b(&self) -> &[f64] {
        &self.b
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weight(&self) -> &[LogReal] {
        &self.weight
    }

    pub fn norm(&self) -> &[LogReal] {
        &self.norm
    }

    fn check_index(&self, index: usize) -> Result<(), RecurrenceError> {
        if index < self.len() {
            Ok(())
        } else {
            Err(RecurrenceError::Index {
                index,
                len: self.len(),
            })
        }
    }

    /// `P_0(x), ..., P_{N-1}(x)` by forward recurrence.
    pub fn eval_p_all(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        let mut p = Vec::with_capacity(n);
        p.push(1.0);
        for m in 0..n - 1 {
            let prev = if m > 0 { p[m - 1] } else { 0.0 };
            p.push(((x + self.b[m]) * p[m] - self.c[m] * prev) / self.a[m]);
        }
        p
    }

    /// `P_n(x)` by forward recurrence from `P_0 = 1`.
    pub fn eval_p(&self, n: usize, x: f64) -> Result<f64, RecurrenceError> {
        self.check_index(n)?;
        Ok(self.eval_p_all(x)[n])
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest_grid_index(&self, x: f64) -> usize {
        let mut best = 0;
        for (k, g) in self.grid.iter().enumerate() {
            if (g - x).abs() < (self.grid[best] - x).abs() {
                best = k;
            }
        }
        best
    }
}

/// Maximum deviation from orthonormality of the family on its grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub max_deviation: f64,
    pub worst: (usize, usize),
}

/// The family renormalized to the symmetric recurrence
/// `x R_n = ε s_n R_{n+1} - B_n R_n + ε s_{n-1} R_{n-1}`, `s_n = sqrt(A_n C_{n+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedFamily {
    base: RecurrenceFamily,
    epsilon: i8,
    s: Vec<f64>,
    prefactor: Vec<LogReal>,
}

impl SymmetrizedFamily {
    /// `epsilon` is reduced to its sign; zero counts as `+1`.
    pub fn new(base: RecurrenceFamily, epsilon: i8) -> Self {
        let epsilon = if epsilon < 0 { -1 } else { 1 };
        let n = base.len();
        let s: Vec<f64> = (0..n.saturating_sub(1))
            .map(|i| (base.a[i] * base.c[i + 1]).sqrt())
            .collect();
        let mut prefactor = Vec::with_capacity(n);
        let mut acc = LogReal::ONE;
        prefactor.push(acc);
        for i in 0..n.saturating_sub(1) {
            acc = acc * LogReal::from_f64(f64::from(epsilon) * base.a[i] / s[i]);
            prefactor.push(acc);
        }
        SymmetrizedFamily {
            base,
            epsilon,
            s,
            prefactor,
        }
    }

    pub fn base(&self) -> &RecurrenceFamily {
        &self.base
    }

    pub fn epsilon(&self) -> i8 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// Off-diagonal `s_n = sqrt(A_n C_{n+1})`, `n = 0..N-1`.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// `ε^n ∏_{k<n} A_k / sqrt(A_k C_{k+1})`, so that `R_n = prefactor(n) P_n`.
    pub fn prefactor(&self) -> &[LogReal] {
        &self.prefactor
    }

    /// `R_0(x), ..., R_{N-1}(x)` by forward recurrence.
    pub fn eval_r_all(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        let e = f64::from(self.epsilon);
        let b = self.base.coeff_b();
        let mut r = Vec::with_capacity(n);
        r.push(1.0);
        for m in 0..n - 1 {
            let prev = if m > 0 { e * self.s[m - 1] * r[m - 1] } else { 0.0 };
            r.push(((x + b[m]) * r[m] - prev) / (e * self.s[m]));
        }
        r
    }

    /// `R_n(x)` by forward recurrence.
    pub fn eval_r(&self, n: usize, x: f64) -> Result<f64, RecurrenceError> {
        self.base.check_index(n)?;
        Ok(self.eval_r_all(x)[n])
    }

    /// Left side minus right side of the symmetric recurrence at row `n`.
    pub fn recurrence_residual(&self, r: &[f64], n: usize, x: f64) -> f64 {
        let e = f64::from(self.epsilon);
        let up = if n + 1 < self.len() { e * self.s[n] * r[n + 1] } else { 0.0 };
        let down = if n > 0 { e * self.s[n - 1] * r[n - 1] } else { 0.0 };
        x * r[n] - (up - self.base.b[n] * r[n] + down)
    }

    /// `R_n(λ(k))` for all `n`, normalized to `R_0 = 1`.
    ///
    /// Uses a two-sided (twisted) factorization of the recurrence matrix at
    /// the grid point, so every component keeps its relative accuracy even
    /// when the vector spans many decades. Forward recurrence does not.
    pub fn r_at_grid(&self, k: usize) -> Result<Vec<f64>, RecurrenceError> {
        self.base.check_index(k)?;
        let n = self.len();
        let e = f64::from(self.epsilon);
        let lambda = self.base.grid_dd(k);
        let m: Vec<Dd> = (0..n).map(|i| -(lambda + self.base.b_dd(i))).collect();
        let off_sq: Vec<Dd> = (0..n.saturating_sub(1))
            .map(|i| self.base.a_dd(i) * self.base.c_dd(i + 1))
            .collect();
        let off: Vec<f64> = self.s.iter().map(|s| e * s).collect();
        let v = twisted_null_vector_dd(&m, &off_sq, &off);
        let v0 = v[0];
        if v0 == 0.0 || !v0.is_finite() {
            return Err(RecurrenceError::Underflow(k));
        }
        let out: Vec<f64> = v.iter().map(|x| x / v0).collect();
        debug_assert_eq!(out.len(), n);
        Ok(out)
    }

    /// `P_n(λ(k))` for all `n`, from [`Self::r_at_grid`].
    pub fn p_at_grid(&self, k: usize) -> Result<Vec<f64>, RecurrenceError> {
        let r = self.r_at_grid(k)?;
        Ok(r
            .iter()
            .zip(&self.prefactor)
            .map(|(r, p)| (LogReal::from_f64(*r) / *p).to_f64())
            .collect())
    }

    /// Entries `sqrt(Ω(k)/N_n) P_n(λ(k))` of the orthonormal grid matrix.
    pub fn orthonormal_row(&self, k: usize) -> Result<Vec<f64>, RecurrenceError> {
        let r = self.r_at_grid(k)?;
        let w = self.base.weight[k];
        Ok(r.iter()
            .zip(&self.prefactor)
            .zip(&self.base.norm)
            .map(|((r, p), h)| {
                let scale = (w / *h).abs().sqrt().unwrap_or(LogReal::ZERO);
                let sign = f64::from((w / *h).sign());
                sign * (LogReal::from_f64(*r) / *p * scale).to_f64()
            })
            .collect())
    }

    /// `max |Σ_k Ω(k) P_n P_m - δ_{nm} N_n| / sqrt(N_n N_m)` over all pairs.
    pub fn check_orthogonality(&self) -> Result<OrthogonalityReport, RecurrenceError> {
        let n = self.len();
        let rows = (0..n)
            .map(|k| self.orthonormal_row(k))
            .collect::<Result<Vec<_>, _>>()?;
        let mut report = OrthogonalityReport {
            max_deviation: 0.0,
            worst: (0, 0),
        };
        for i in 0..n {
            for j in i..n {
                let dot: f64 = rows.iter().map(|row| row[i] * row[j]).sum();
                let dev = (dot - if i == j { 1.0 } else { 0.0 }).abs();
                if dev > report.max_deviation || dev.is_nan() {
                    report = OrthogonalityReport {
                        max_deviation: dev,
                        worst: (i, j),
                    };
                }
            }
        }
        Ok(report)
    }
}

/// Null vector of the symmetric tridiagonal matrix `M` (diagonal `m`,
/// off-diagonal `off`) assumed singular, by twisted factorization.
///
/// Returns the vector scaled to `1` at the twist index.
pub fn twisted_null_vector(m: &[f64], off: &[f64]) -> Vec<f64> {
    let m: Vec<Dd> = m.iter().map(|x| Dd::from(*x)).collect();
    let off_sq: Vec<Dd> = off.iter().map(|x| Dd::from(*x) * Dd::from(*x)).collect();
    twisted_null_vector_dd(&m, &off_sq, off)
}

/// The twisted factorization with the diagonal and the squared
/// off-diagonal in double-double; the pivots are carried the same way.
fn twisted_null_vector_dd(m: &[Dd], off_sq: &[Dd], off: &[f64]) -> Vec<f64> {
    let n = m.len();
    if n == 1 {
        return vec![1.0];
    }
    let guard = |d: Dd, scale: f64| {
        if d.hi == 0.0 {
            Dd::from(f64::EPSILON * scale.max(f64::MIN_POSITIVE))
        } else {
            d
        }
    };
    let mut dp = vec![Dd::ZERO; n];
    let mut dm = vec![Dd::ZERO; n];
    dp[0] = m[0];
    for i in 1..n {
        let prev = guard(dp[i - 1], m[i - 1].hi.abs() + off[i - 1].abs());
        dp[i] = m[i] - off_sq[i - 1] / prev;
    }
    dm[n - 1] = m[n - 1];
    for i in (0..n - 1).rev() {
        let next = guard(dm[i + 1], m[i + 1].hi.abs() + off[i].abs());
        dm[i] = m[i] - off_sq[i] / next;
    }
    let mut r = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let g = (dp[i] + dm[i] - m[i]).abs().to_f64();
        if g < best {
            best = g;
            r = i;
        }
    }
    let mut v = vec![0.0; n];
    v[r] = 1.0;
    for i in (0..r).rev() {
        let d = guard(dp[i], m[i].hi.abs() + off[i].abs());
        v[i] = -off[i] * v[i + 1] / d.to_f64();
    }
    for i in r + 1..n {
        let d = guard(dm[i], m[i].hi.abs() + off[i - 1].abs());
        v[i] = -off[i - 1] * v[i - 1] / d.to_f64();
    }
    v
}
