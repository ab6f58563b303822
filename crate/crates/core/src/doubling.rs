//! The doubling construction.
//!
//! From a symmetrized family `R_n` and couplings `t±_n` one builds
//!
//! ```text
//! Q_{2n}(x)   = t+_n R_n(π_x) + t-_{n-1} R_{n-1}(π_x)
//! Q_{2n+1}(x) = (x - μ+) R_n(π_x)
//! π_x         = τ2 (x - μ+)(x - μ-) + τ0
//! ```
//!
//! and `Q(x)` is an eigenvector of the chain with couplings
//! `t+_0, t-_0, t+_1, ...` whenever `π_x` is a grid point, provided
//! `ε s_n = τ2 t-_n t+_{n+1}` and `B_n + τ0 = -τ2 ((t+_n)² + (t-_n)²)`.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::dd::Dd;
use crate::recurrence::{RecurrenceError, SymmetrizedFamily};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DoublingError {
    #[error("{what} has length {got}, expected {expected}")]
    Length {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("tau2 must be nonzero")]
    ZeroTau2,
    #[error("coupling {which}_{index} must be nonzero")]
    ZeroCoupling { which: &'static str, index: usize },
    #[error("truncation mode requires t-_(N-1) = 0, got {0}")]
    Truncation(f64),
    #[error("eigenvalue radicand is negative at k = {k}: {value}")]
    NegativeRadicand { k: usize, value: f64 },
    #[error("index {index} out of range for a chain of {size} sites")]
    Index { index: usize, size: usize },
    #[error("Q_2N is only defined on the spectrum; x = {0} is not an eigenvalue")]
    OffSpectrum(f64),
    #[error("sample x = {0} hits the removable singularity π_x = τ0")]
    Singular(f64),
    #[error("mode {0:?} does not exist for this chain")]
    NoSuchMode(Mode),
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
}

/// The data `(ε, τ0, τ2, t±_n)` of a doubling.
///
/// In truncation mode `t-_{N-1} = 0` and the chain has `2N` sites instead of
/// `2N + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingSolution {
    pub epsilon: i8,
    pub tau0: f64,
    pub tau2: f64,
    pub t_plus: Vec<f64>,
    pub t_minus: Vec<f64>,
    pub truncated: bool,
    /// Low parts of `τ0, τ2, t+, t-` when the data is known beyond f64.
    #[serde(skip)]
    low: Option<LowParts>,
}

#[derive(Debug, Clone, PartialEq)]
struct LowParts {
    tau0: f64,
    tau2: f64,
    t_plus: Vec<f64>,
    t_minus: Vec<f64>,
}

impl DoublingSolution {
    pub fn new(
        epsilon: i8,
        tau0: f64,
        tau2: f64,
        t_plus: Vec<f64>,
        t_minus: Vec<f64>,
        truncated: bool,
    ) -> Result<Self, DoublingError> {
        if t_minus.len() != t_plus.len() {
            return Err(DoublingError::Length {
                what: "t_minus",
                got: t_minus.len(),
                expected: t_plus.len(),
            });
        }
        if tau2 == 0.0 {
            return Err(DoublingError::ZeroTau2);
        }
        let n = t_plus.len();
        for (i, t) in t_plus.iter().enumerate() {
            if *t == 0.0 {
                return Err(DoublingError::ZeroCoupling { which: "t+", index: i });
            }
        }
        for (i, t) in t_minus.iter().enumerate() {
            let last = i + 1 == n;
            if last && truncated {
                if *t != 0.0 {
                    return Err(DoublingError::Truncation(*t));
                }
            } else if *t == 0.0 {
                return Err(DoublingError::ZeroCoupling { which: "t-", index: i });
            }
        }
        Ok(DoublingSolution {
            epsilon: if epsilon < 0 { -1 } else { 1 },
            tau0,
            tau2,
            t_plus,
            t_minus,
            truncated,
            low: None,
        })
    }

    /// Builds the solution from double-double data. The f64 fields hold the
    /// rounded values; the constraint check uses the full precision.
    pub fn from_dd(
        epsilon: i8,
        tau0: Dd,
        tau2: Dd,
        t_plus: &[Dd],
        t_minus: &[Dd],
        truncated: bool,
    ) -> Result<Self, DoublingError> {
        let hi = |v: &[Dd]| v.iter().map(|t| t.hi).collect::<Vec<_>>();
        let lo = |v: &[Dd]| v.iter().map(|t| t.lo).collect::<Vec<_>>();
        let mut sol = Self::new(epsilon, tau0.hi, tau2.hi, hi(t_plus), hi(t_minus), truncated)?;
        sol.low = Some(LowParts {
            tau0: tau0.lo,
            tau2: tau2.lo,
            t_plus: lo(t_plus),
            t_minus: lo(t_minus),
        });
        Ok(sol)
    }

    /// Multiplies chain coupling `index` (`t+_0, t-_0, t+_1, ...`) by `factor`.
    fn scale_coupling(&mut self, index: usize, factor: f64) {
        let (i, plus) = (index / 2, index % 2 == 0);
        let t = if plus { &mut self.t_plus[i] } else { &mut self.t_minus[i] };
        *t *= factor;
        if let Some(l) = self.low.as_mut() {
            let t = if plus { &mut l.t_plus[i] } else { &mut l.t_minus[i] };
            *t *= factor;
        }
    }

    fn tau0_dd(&self) -> Dd {
        Dd::new(self.tau0, self.low.as_ref().map_or(0.0, |l| l.tau0))
    }

    fn tau2_dd(&self) -> Dd {
        Dd::new(self.tau2, self.low.as_ref().map_or(0.0, |l| l.tau2))
    }

    fn tp_dd(&self, n: usize) -> Dd {
        let lo = self.low.as_ref().and_then(|l| l.t_plus.get(n).copied());
        Dd::new(self.tp(n), lo.unwrap_or(0.0))
    }

    fn tm_dd(&self, n: isize) -> Dd {
        let lo = if n < 0 {
            None
        } else {
            self.low.as_ref().and_then(|l| l.t_minus.get(n as usize).copied())
        };
        Dd::new(self.tm(n), lo.unwrap_or(0.0))
    }

    pub fn len(&self) -> usize {
        self.t_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_plus.is_empty()
    }

    /// `t+_n` with `t+_N = 0`.
    pub fn tp(&self, n: usize) -> f64 {
        self.t_plus.get(n).copied().unwrap_or(0.0)
    }

    /// `t-_n` with `t-_{-1} = 0`.
    pub fn tm(&self, n: isize) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.t_minus.get(n as usize).copied().unwrap_or(0.0)
        }
    }
}

/// Residuals of the two constraint families, normalized per row by
/// `max(1, |A_n| + |C_n|)`. Evaluated in double-double so that exact data
/// leaves only the rounding of the stored values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub off_diagonal: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub max_residual: f64,
    pub worst_index: usize,
    pub pass: bool,
}

pub fn check_constraints(
    family: &SymmetrizedFamily,
    sol: &DoublingSolution,
    tol: f64,
) -> Result<ConstraintReport, DoublingError> {
    let n = family.len();
    if sol.len() != n {
        return Err(DoublingError::Length {
            what: "couplings",
            got: sol.len(),
            expected: n,
        });
    }
    let base = family.base();
    let e = Dd::from(f64::from(family.epsilon()));
    let (tau0, tau2) = (sol.tau0_dd(), sol.tau2_dd());
    let mut off_diagonal = Vec::with_capacity(n);
    let mut diagonal = Vec::with_capacity(n);
    let mut max_residual: f64 = 0.0;
    let mut worst_index = 0;
    for i in 0..n {
        let (a, c) = (base.a_dd(i), base.c_dd(i));
        let scale = 1f64.max(a.hi.abs() + c.hi.abs());
        let s = if i + 1 < n {
            (a * base.c_dd(i + 1)).sqrt()
        } else {
            Dd::ZERO
        };
        let (tp, tm) = (sol.tp_dd(i), sol.tm_dd(i as isize));
        let r1 = (e * s - tau2 * tm * sol.tp_dd(i + 1)).to_f64().abs() / scale;
        let r2 = (base.b_dd(i) + tau0 + tau2 * (tp * tp + tm * tm)).to_f64().abs() / scale;
        off_diagonal.push(r1);
        diagonal.push(r2);
        let r = r1.max(r2);
        if r > max_residual || r.is_nan() {
            max_residual = r;
            worst_index = i;
        }
    }
    Ok(ConstraintReport {
        off_diagonal,
        diagonal,
        max_residual,
        worst_index,
        pass: max_residual <= tol,
    })
}

/// Label of an eigenpair: the mode at `x = μ+`, or the two roots attached to
/// grid point `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mode {
    Zero,
    Minus(usize),
    Plus(usize),
}

/// A family, its doubling data and the optional chemical potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct QSequence {
    family: SymmetrizedFamily,
    solution: DoublingSolution,
    mu_plus: f64,
    mu_minus: f64,
}

impl QSequence {
    pub fn new(
        family: SymmetrizedFamily,
        solution: DoublingSolution,
        mu_plus: f64,
        mu_minus: f64,
    ) -> Result<Self, DoublingError> {
        if solution.len() != family.len() {
            return Err(DoublingError::Length {
                what: "couplings",
                got: solution.len(),
                expected: family.len(),
            });
        }
        Ok(QSequence {
            family,
            solution,
            mu_plus,
            mu_minus,
        })
    }

    pub fn family(&self) -> &SymmetrizedFamily {
        &self.family
    }

    pub fn solution(&self) -> &DoublingSolution {
        &self.solution
    }

    pub fn mu(&self) -> (f64, f64) {
        (self.mu_plus, self.mu_minus)
    }

    /// Family length `N`.
    pub fn n(&self) -> usize {
        self.family.len()
    }

    /// Number of chain sites: `2N + 1`, or `2N` in truncation mode.
    pub fn size(&self) -> usize {
        2 * self.n() + usize::from(!self.solution.truncated)
    }

    pub fn truncated(&self) -> bool {
        self.solution.truncated
    }

    /// Scales chain coupling `index` by `1 + rel`. Even indices address
    /// `t+_{index/2}`, odd ones `t-_{index/2}`. Only the couplings change, so
    /// the constraints stop holding.
    pub fn perturb_coupling(&mut self, index: usize, rel: f64) -> Result<(), DoublingError> {
        let size = self.size();
        if index + 1 >= size {
            return Err(DoublingError::Index { index, size });
        }
        self.solution.scale_coupling(index, 1.0 + rel);
        Ok(())
    }

    pub fn pi(&self, x: f64) -> f64 {
        self.solution.tau2 * (x - self.mu_plus) * (x - self.mu_minus) + self.solution.tau0
    }

    /// `Q_n(x)` from the definition.
    ///
    /// When `π_x` sits on a grid point the values `R_n(π_x)` come from the
    /// stable grid evaluation, since forward recurrence there loses the
    /// recessive solution; elsewhere they come from forward recurrence.
    /// `Q_{2N}` uses the last recurrence row and so exists only on the
    /// spectrum; at `x = μ+` it is fixed by the last row of the chain.
    pub fn eval_q(&self, n: usize, x: f64) -> Result<f64, DoublingError> {
        let size = self.size();
        if n >= size {
            return Err(DoublingError::Index { index: n, size });
        }
        let sol = &self.solution;
        let half = n / 2;
        let nn = self.n();
        let on_mu = (x - self.mu_plus).abs() <= 1e-12 * 1f64.max(self.mu_plus.abs());
        if n == 2 * nn && on_mu {
            return Ok(self.zero_mode()[2 * nn]);
        }
        let pi = self.pi(x);
        let base = self.family.base();
        let k = base.nearest_grid_index(pi);
        let scale = base.grid().iter().fold(sol.tau0.abs().max(1.0), |m, v| m.max(v.abs()));
        let r = if (pi - base.grid()[k]).abs() <= 1e-9 * scale {
            self.family.r_at_grid(k)?
        } else if n == 2 * nn {
            return Err(DoublingError::OffSpectrum(x));
        } else {
            self.family.eval_r_all(pi)
        };
        if n % 2 == 1 {
            return Ok((x - self.mu_plus) * r[half]);
        }
        let prev = if half > 0 { r[half - 1] } else { 0.0 };
        let cur = r.get(half).copied().unwrap_or(0.0);
        Ok(sol.tp(half) * cur + sol.tm(half as isize - 1) * prev)
    }

    /// `s_k = (λ(k) - τ0)/τ2`.
    pub fn s_k(&self, k: usize) -> f64 {
        (self.family.base().grid()[k] - self.solution.tau0) / self.solution.tau2
    }

    /// The eigenvalue attached to a mode.
    pub fn eigenvalue(&self, mode: Mode) -> Result<f64, DoublingError> {
        let (mp, mm) = (self.mu_plus, self.mu_minus);
        let (k, sign) = match mode {
            Mode::Zero => {
                if self.solution.truncated {
                    return Err(DoublingError::NoSuchMode(mode));
                }
                return Ok(mp);
            }
            Mode::Plus(k) => (k, 1.0),
            Mode::Minus(k) => (k, -1.0),
        };
        if k >= self.n() {
            return Err(DoublingError::NoSuchMode(mode));
        }
        let s = self.s_k(k);
        let disc = (mp - mm) * (mp - mm) + 4.0 * s;
        if !(disc >= 0.0) {
            return Err(DoublingError::NegativeRadicand { k, value: disc });
        }
        let x = 0.5 * (mp + mm + sign * disc.sqrt());
        Ok(if x == 0.0 { 0.0 } else { x })
    }

    /// All modes with their eigenvalues, sorted ascending.
    pub fn spectrum(&self) -> Result<Vec<(Mode, f64)>, DoublingError> {
        let mut out = Vec::with_capacity(self.size());
        if !self.solution.truncated {
            out.push((Mode::Zero, self.eigenvalue(Mode::Zero)?));
        }
        for k in 0..self.n() {
            out.push((Mode::Minus(k), self.eigenvalue(Mode::Minus(k))?));
            out.push((Mode::Plus(k), self.eigenvalue(Mode::Plus(k))?));
        }
        out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
        Ok(out)
    }

    /// The eigenvalues, sorted ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, DoublingError> {
        Ok(self.spectrum()?.into_iter().map(|(_, x)| x).collect())
    }

    /// The mode whose eigenvalue is within `1e-9` of `x`.
    pub fn mode_of(&self, x: f64) -> Result<Mode, DoublingError> {
        self.spectrum()?
            .into_iter()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .filter(|(_, v)| (v - x).abs() <= 1e-9)
            .map(|(m, _)| m)
            .ok_or(DoublingError::OffSpectrum(x))
    }

    /// The components of `Q` at `x = μ+`: odd entries vanish and the even
    /// ones follow from `t+_n Q_{2n} + t-_n Q_{2n+2} = 0`, `Q_0 = t+_0`.
    pub fn zero_mode(&self) -> Vec<f64> {
        let sol = &self.solution;
        let nn = self.n();
        let mut q = vec![0.0; 2 * nn + 1];
        q[0] = sol.tp(0);
        for i in 0..nn {
            q[2 * i + 2] = -sol.tp(i) * q[2 * i] / sol.tm(i as isize);
        }
        q
    }

    /// Unnormalized eigenvector `Q(x)` for a mode; `Q_1 = x - μ+` fixes the
    /// scale.
    pub fn eigenvector(&self, mode: Mode) -> Result<Vec<f64>, DoublingError> {
        let x = self.eigenvalue(mode)?;
        let k = match mode {
            Mode::Zero => return Ok(self.zero_mode()),
            Mode::Plus(k) | Mode::Minus(k) => k,
        };
        let r = self.family.r_at_grid(k)?;
        let sol = &self.solution;
        let nn = self.n();
        let mut q = Vec::with_capacity(self.size());
        for i in 0..nn {
            let prev = if i > 0 { r[i - 1] } else { 0.0 };
            q.push(sol.tp(i) * r[i] + sol.tm(i as isize - 1) * prev);
            q.push((x - self.mu_plus) * r[i]);
        }
        if !sol.truncated {
            q.push(sol.tm(nn as isize - 1) * r[nn - 1]);
        }
        Ok(q)
    }

    /// The eigenvector for the eigenvalue `x`.
    pub fn eigenvector_at(&self, x: f64) -> Result<Vec<f64>, DoublingError> {
        self.eigenvector(self.mode_of(x)?)
    }

    /// `V_n(y) = t+_n R_n(y) + t-_{n-1} R_{n-1}(y)` for `n = 0..=N`.
    pub fn v_all(&self, y: f64) -> Vec<f64> {
        let r = self.family.eval_r_all(y);
        let sol = &self.solution;
        (0..=self.n())
            .map(|i| {
                let cur = r.get(i).copied().unwrap_or(0.0);
                let prev = if i > 0 { r[i - 1] } else { 0.0 };
                sol.tp(i) * cur + sol.tm(i as isize - 1) * prev
            })
            .collect()
    }

    /// Chain couplings in site order: `t+_0, t-_0, t+_1, ...`.
    pub fn couplings(&self) -> Vec<f64> {
        let sol = &self.solution;
        (0..self.size() - 1)
            .map(|i| {
                if i % 2 == 0 {
                    sol.tp(i / 2)
                } else {
                    sol.tm((i / 2) as isize)
                }
            })
            .collect()
    }

    /// `Q_0(x), ..., Q_{2N-1}(x)` from the chain's own three-term recurrence,
    /// `x Q_m = c_m Q_{m+1} + μ_m Q_m + c_{m-1} Q_{m-1}`, `Q_0 = t+_0`.
    /// This does not use the family at all.
    pub fn q_by_chain(&self, x: f64) -> Vec<f64> {
        let c = self.couplings();
        let m = 2 * self.n();
        let mut q = Vec::with_capacity(m);
        q.push(self.solution.tp(0));
        for i in 0..m - 1 {
            let mu = if i % 2 == 0 { self.mu_plus } else { self.mu_minus };
            let prev = if i > 0 { c[i - 1] * q[i - 1] } else { 0.0 };
            q.push(((x - mu) * q[i] - prev) / c[i]);
        }
        q
    }

    /// Checks the Christoffel form of the doubling at the sample points,
    /// with `Q` computed independently by [`Self::q_by_chain`]:
    ///
    /// * even entries: `Q_{2n}(x) = V_n(π_x)`, `n = 0..N-1`;
    /// * odd entries: `Q_{2n+1}(x) = τ2 t-_n (x-μ+)/(π_x-τ0) (V_{n+1}(π_x) - V_{n+1}(τ0)/V_n(τ0) V_n(π_x))`;
    /// * ratio: `t+_n/t-_n = -V_{n+1}(τ0)/V_n(τ0)`.
    ///
    /// The last two use the recurrence row `n+1`, so they run over
    /// `n = 0..N-2`. Quotients are cleared before comparing, and every
    /// residual is taken relative to the sum of the magnitudes of the terms
    /// once each `V` is expanded into its two `R` terms. `V(τ0)` is often a
    /// small difference of large terms; dividing by it would measure that
    /// cancellation rather than the identity.
    pub fn christoffel_check(&self, samples: &[f64]) -> Result<ChristoffelReport, DoublingError> {
        let sol = &self.solution;
        let nn = self.n();
        let tau0 = sol.tau0;
        let pi_scale = 1f64.max(tau0.abs());
        // V_n(y) as its two terms t+_n R_n(y) and t-_{n-1} R_{n-1}(y)
        let split = |r: &[f64], i: usize| -> [f64; 2] {
            let cur = r.get(i).copied().unwrap_or(0.0);
            let prev = if i > 0 { r[i - 1] } else { 0.0 };
            [sol.tp(i) * cur, sol.tm(i as isize - 1) * prev]
        };
        let rel = |terms: &[f64]| {
            let sum: f64 = terms.iter().sum();
            let mag: f64 = terms.iter().map(|t| t.abs()).sum();
            if mag == 0.0 {
                0.0
            } else {
                sum.abs() / mag
            }
        };
        let r0 = self.family.eval_r_all(tau0);
        let mut report = ChristoffelReport::default();
        for i in 0..nn.saturating_sub(1) {
            // t+_n V_n(τ0) + t-_n V_{n+1}(τ0) = 0
            let a = split(&r0, i);
            let b = split(&r0, i + 1);
            let tp = sol.tp(i);
            let tm = sol.tm(i as isize);
            report.ratio = report.ratio.max(rel(&[tp * a[0], tp * a[1], tm * b[0], tm * b[1]]));
        }
        for &x in samples {
            let pi = self.pi(x);
            if (pi - tau0).abs() <= 1e-12 * pi_scale {
                return Err(DoublingError::Singular(x));
            }
            let r = self.family.eval_r_all(pi);
            let q = self.q_by_chain(x);
            for i in 0..nn {
                let v = split(&r, i);
                report.even = report.even.max(rel(&[q[2 * i], -v[0], -v[1]]));
            }
            let xm = x - self.mu_plus;
            for i in 0..nn.saturating_sub(1) {
                // (π-τ0) V_n(τ0) Q_{2n+1} = τ2 t-_n (x-μ+) (V_{n+1}(π) V_n(τ0) - V_{n+1}(τ0) V_n(π))
                let a = split(&r0, i);
                let b = split(&r0, i + 1);
                let c = split(&r, i);
                let d = split(&r, i + 1);
                let pre = sol.tau2 * sol.tm(i as isize) * xm;
                let mut terms = vec![(pi - tau0) * a[0] * q[2 * i + 1], (pi - tau0) * a[1] * q[2 * i + 1]];
                for j in 0..2 {
                    for k in 0..2 {
                        terms.push(-pre * d[j] * a[k]);
                        terms.push(pre * b[j] * c[k]);
                    }
                }
                report.odd = report.odd.max(rel(&terms));
            }
            report.samples += 1;
        }
        Ok(report)
    }
}

/// Maximum relative residuals of the three Christoffel identities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ChristoffelReport {
    pub even: f64,
    pub odd: f64,
    pub ratio: f64,
    pub samples: usize,
}

impl ChristoffelReport {
    pub fn max(&self) -> f64 {
        self.even.max(self.odd).max(self.ratio)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::krawtchouk::krawtchouk_family;
    use crate::models::{chebyshev_model, krawtchouk_model, ChebyshevSshParams, KrawtchoukSshParams};
    use crate::tridiag::TridiagonalHamiltonian;

    fn ssh(n: usize, delta: f64) -> QSequence {
        chebyshev_model(ChebyshevSshParams::new(n, delta)).unwrap().sequence().clone()
    }

    fn krawtchouk_solution(n: usize, p: f64, tau0: f64) -> DoublingSolution {
        let tp = (0..n).map(|i| (p * (n - i) as f64).sqrt()).collect();
        let tm = (0..n).map(|i| ((1.0 - p) * (i + 1) as f64).sqrt()).collect();
        DoublingSolution::new(-1, tau0, -1.0, tp, tm, false).unwrap()
    }

    #[test]
    fn low_order_q() {
        let seq = ssh(4, 0.3);
        for x in [-1.3, 0.2, 0.9] {
            assert_eq!(seq.eval_q(0, x).unwrap(), seq.solution().tp(0));
            assert!((seq.eval_q(1, x).unwrap() - x).abs() < 1e-15);
        }
        assert!(matches!(seq.eval_q(9, 0.1), Err(DoublingError::Index { .. })));
    }

    #[test]
    fn three_site_chain() {
        // H = [[0, 1/2, 0], [1/2, 0, 1/2], [0, 1/2, 0]]: characteristic
        // polynomial x³ - x/2, and the eigenvector at 1/√2 is (1, √2, 1)/2
        let seq = ssh(1, 0.0);
        let x = seq.eigenvalues().unwrap();
        let r = 0.5f64.sqrt();
        for (a, b) in x.iter().zip([-r, 0.0, r]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((seq.eval_q(2, r).unwrap() - 0.5).abs() < 1e-15);
        let v = seq.eigenvector_at(r).unwrap();
        for (a, b) in v.iter().zip([0.5, r, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(seq.eval_q(2, 0.3), Err(DoublingError::OffSpectrum(_))));
    }

    #[test]
    fn chebyshev_constraints_at_rounding_level() {
        let seq = ssh(12, 0.4);
        let rep = check_constraints(seq.family(), seq.solution(), 1e-14).unwrap();
        assert!(rep.pass, "{}", rep.max_residual);
    }

    #[test]
    fn krawtchouk_constraints() {
        let fam = SymmetrizedFamily::new(krawtchouk_family(5, 0.3).unwrap(), -1);
        let rep = check_constraints(&fam, &krawtchouk_solution(6, 0.3, 1.0), 1e-14).unwrap();
        assert!(rep.pass, "{}", rep.max_residual);
    }

    #[test]
    fn shifted_tau0_is_reported() {
        let fam = SymmetrizedFamily::new(krawtchouk_family(5, 0.3).unwrap(), -1);
        let base = fam.base();
        let rep = check_constraints(&fam, &krawtchouk_solution(6, 0.3, 1.01), 1e-12).unwrap();
        assert!(!rep.pass);
        let i = rep.worst_index;
        let scale = 1f64.max(base.coeff_a()[i].abs() + base.coeff_c()[i].abs());
        assert!((rep.diagonal[i] * scale - 0.01).abs() < 1e-12);
        assert!(rep.off_diagonal.iter().all(|r| *r < 1e-14));
    }

    #[test]
    fn length_mismatch() {
        let fam = SymmetrizedFamily::new(krawtchouk_family(5, 0.3).unwrap(), -1);
        let err = check_constraints(&fam, &krawtchouk_solution(4, 0.3, 1.0), 1e-12).unwrap_err();
        assert!(matches!(err, DoublingError::Length { .. }));
    }

    #[test]
    fn solution_rejects_zero_couplings() {
        let e = DoublingSolution::new(1, 0.0, 1.0, vec![1.0, 0.0], vec![1.0, 1.0], false);
        assert_eq!(e.unwrap_err(), DoublingError::ZeroCoupling { which: "t+", index: 1 });
        let e = DoublingSolution::new(1, 0.0, 1.0, vec![1.0, 1.0], vec![1.0, 0.0], false);
        assert_eq!(e.unwrap_err(), DoublingError::ZeroCoupling { which: "t-", index: 1 });
        let e = DoublingSolution::new(1, 0.0, 1.0, vec![1.0, 1.0], vec![1.0, 0.5], true);
        assert_eq!(e.unwrap_err(), DoublingError::Truncation(0.5));
        let e = DoublingSolution::new(1, 0.0, 0.0, vec![1.0], vec![1.0], false);
        assert_eq!(e.unwrap_err(), DoublingError::ZeroTau2);
    }

    #[test]
    fn mirror_modes_share_even_components() {
        let seq = krawtchouk_model(KrawtchoukSshParams { n: 6, p: 0.35 })
            .unwrap()
            .sequence()
            .clone();
        for k in 0..6 {
            let p = seq.eigenvector(Mode::Plus(k)).unwrap();
            let m = seq.eigenvector(Mode::Minus(k)).unwrap();
            for i in 0..p.len() {
                let want = if i % 2 == 0 { p[i] } else { -p[i] };
                assert!((m[i] - want).abs() <= 1e-13 * p[i].abs().max(1e-300));
            }
        }
        let z = seq.eigenvector(Mode::Zero).unwrap();
        assert!(z.iter().skip(1).step_by(2).all(|v| *v == 0.0));
    }

    #[test]
    fn eigen_relation_for_ssh() {
        let seq = ssh(4, 0.5);
        let h = TridiagonalHamiltonian::from_sequence(&seq).unwrap();
        for (mode, x) in seq.spectrum().unwrap() {
            let q = seq.eigenvector(mode).unwrap();
            let q_inf = q.iter().fold(0f64, |m, v| m.max(v.abs()));
            assert!(h.residual(x, &q).unwrap() <= 1e-12 * h.inf_norm() * q_inf);
        }
    }

    #[test]
    fn spectrum_is_symmetric() {
        let seq = ssh(7, -0.6);
        let x = seq.eigenvalues().unwrap();
        for (a, b) in x.iter().zip(x.iter().rev()) {
            assert_eq!(*a, -*b);
        }
        assert!(x.contains(&0.0));
    }

    #[test]
    fn chebyshev_ratio_identity() {
        let delta = 0.4;
        let seq = ssh(5, delta);
        let v = seq.v_all(seq.solution().tau0);
        assert_eq!(v[0], seq.solution().tp(0));
        for n in 0..4 {
            let want = (1.0 + delta) / (1.0 - delta);
            assert!((seq.solution().tp(n) / seq.solution().tm(n as isize) - want).abs() < 1e-14);
            assert!((-v[n + 1] / v[n] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_christoffel() {
        let seq = ssh(5, 0.4);
        let samples: Vec<f64> = (0..20).map(|i| -1.9 + 0.19 * i as f64 + 0.011).collect();
        let rep = seq.christoffel_check(&samples).unwrap();
        assert_eq!(rep.samples, 20);
        assert!(rep.max() <= 1e-10, "{rep:?}");
    }

    #[test]
    fn christoffel_rejects_singular_sample() {
        let seq = ssh(3, 0.2);
        // π_x = τ0 at x = μ+ = 0
        assert!(matches!(seq.christoffel_check(&[0.0]), Err(DoublingError::Singular(_))));
    }

    #[test]
    fn chain_recurrence_matches_definition() {
        let seq = ssh(6, -0.3);
        let x = 0.731;
        let q = seq.q_by_chain(x);
        for (n, v) in q.iter().enumerate() {
            assert!((seq.eval_q(n, x).unwrap() - v).abs() < 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn perturbation_targets_one_coupling() {
        let mut seq = ssh(3, 0.2);
        let before = seq.couplings();
        seq.perturb_coupling(3, 1e-3).unwrap();
        let after = seq.couplings();
        for (i, (a, b)) in before.iter().zip(&after).enumerate() {
            if i == 3 {
                assert!((b / a - 1.001).abs() < 1e-15);
            } else {
                assert_eq!(a, b);
            }
        }
        assert!(matches!(seq.perturb_coupling(6, 1e-3), Err(DoublingError::Index { .. })));
    }
}
