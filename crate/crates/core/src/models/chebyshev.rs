//! The homogeneous SSH chain, optionally with a sublattice chemical potential.

use std::f64::consts::PI;

use serde::Serialize;

use super::ModelError;
use crate::doubling::{DoublingSolution, Mode, QSequence};
use crate::recurrence::{RecurrenceFamily, SymmetrizedFamily};
use crate::specialfn::LogReal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevSshParams {
    pub n: usize,
    pub delta: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl ChebyshevSshParams {
    pub fn new(n: usize, delta: f64) -> Self {
        ChebyshevSshParams {
            n,
            delta,
            mu_plus: 0.0,
            mu_minus: 0.0,
        }
    }

    pub fn with_mu(self, mu_plus: f64, mu_minus: f64) -> Self {
        ChebyshevSshParams {
            mu_plus,
            mu_minus,
            ..self
        }
    }
}

fn theta(n: usize, k: usize) -> f64 {
    (k + 1) as f64 * PI / (n + 1) as f64
}

fn u_weights(n: usize) -> Vec<LogReal> {
    (0..n)
        .map(|k| LogReal::from_f64(2.0 / (n + 1) as f64 * theta(n, k).sin().powi(2)))
        .collect()
}

/// `U_n(x)`: `A_n = C_n = 1/2`, `B_n = 0`, grid `cos(kπ/(N+1))`, `k = 1..=N`.
pub fn chebyshev_u_family(n: usize) -> Result<RecurrenceFamily, ModelError> {
    let half = |on: bool| if on { 0.5 } else { 0.0 };
    Ok(RecurrenceFamily::with_diagonal(
        "chebyshev-u",
        (0..n).map(|i| half(i + 1 < n)).collect(),
        (0..n).map(|i| half(i > 0)).collect(),
        vec![0.0; n],
        (0..n).map(|k| theta(n, k).cos()).collect(),
        u_weights(n),
        vec![LogReal::ONE; n],
    )?)
}

/// `U_n((x+2)/2)`: `A_n = C_n = 1` in the bulk with diagonal `B_n = 2`.
///
/// The diagonal is stored explicitly: the boundary rows have `C_0 = 0` and
/// `A_{N-1} = 0` but keep `B = 2`.
pub fn shifted_chebyshev_family(n: usize) -> Result<RecurrenceFamily, ModelError> {
    let one = |on: bool| if on { 1.0 } else { 0.0 };
    Ok(RecurrenceFamily::with_diagonal(
        "chebyshev-shifted",
        (0..n).map(|i| one(i + 1 < n)).collect(),
        (0..n).map(|i| one(i > 0)).collect(),
        vec![2.0; n],
        (0..n).map(|k| 2.0 * theta(n, k).cos() - 2.0).collect(),
        u_weights(n),
        vec![LogReal::ONE; n],
    )?)
}

/// `U_n(cos θ) = sin((n+1)θ)/sin θ`.
pub fn chebyshev_u_trig(n: usize, theta: f64) -> f64 {
    ((n + 1) as f64 * theta).sin() / theta.sin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevModel {
    params: ChebyshevSshParams,
    seq: QSequence,
}

pub fn chebyshev_model(params: ChebyshevSshParams) -> Result<ChebyshevModel, ModelError> {
    let d = params.delta;
    if !(d.abs() < 1.0) {
        return Err(ModelError::Domain("delta must satisfy |delta| < 1".into()));
    }
    if params.n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    if !params.mu_plus.is_finite() || !params.mu_minus.is_finite() {
        return Err(ModelError::Domain("mu+ and mu- must be finite".into()));
    }
    let n = params.n;
    let family = SymmetrizedFamily::new(shifted_chebyshev_family(n)?, 1);
    let tau2 = 4.0 / (1.0 - d * d);
    let tau0 = -2.0 - 2.0 * (1.0 + d * d) / (1.0 - d * d);
    let sol = DoublingSolution::new(
        1,
        tau0,
        tau2,
        vec![(1.0 + d) / 2.0; n],
        vec![(1.0 - d) / 2.0; n],
        false,
    )?;
    let seq = QSequence::new(family, sol, params.mu_plus, params.mu_minus)?;
    Ok(ChebyshevModel { params, seq })
}

impl ChebyshevModel {
    pub fn params(&self) -> &ChebyshevSshParams {
        &self.params
    }

    pub fn sequence(&self) -> &QSequence {
        &self.seq
    }

    pub(crate) fn sequence_mut(&mut self) -> &mut QSequence {
        &mut self.seq
    }

    pub fn has_mu(&self) -> bool {
        self.params.mu_plus != 0.0 || self.params.mu_minus != 0.0
    }

    /// `(1-δ²)/2 cos θ_k + (1+δ²)/2`, the square of the `μ = 0` eigenvalue.
    fn s(&self, k: usize) -> f64 {
        let d = self.params.delta;
        (1.0 - d * d) / 2.0 * theta(self.params.n, k).cos() + (1.0 + d * d) / 2.0
    }

    /// The trigonometric spectrum: `μ+` and
    /// `(μ+ + μ- ± sqrt((μ+ - μ-)² + 2(1+δ²) + 2(1-δ²) cos θ_k))/2`.
    pub fn closed_form_spectrum(&self) -> Vec<f64> {
        let (mp, mm) = (self.params.mu_plus, self.params.mu_minus);
        let mut out = vec![mp];
        for k in 0..self.params.n {
            let root = ((mp - mm).powi(2) + 4.0 * self.s(k)).sqrt();
            out.push(0.5 * (mp + mm - root));
            out.push(0.5 * (mp + mm + root));
        }
        super::sorted(out)
    }

    /// Even components `Q_{2n}`, `n = 0..=N`, from `U_n(cos θ)`.
    pub fn closed_form_even(&self, mode: Mode) -> Result<Vec<f64>, ModelError> {
        let n = self.params.n;
        let d = self.params.delta;
        let (tp, tm) = ((1.0 + d) / 2.0, (1.0 - d) / 2.0);
        match mode {
            Mode::Zero => {
                let r = -(1.0 + d) / (1.0 - d);
                Ok((0..=n).map(|i| tp * r.powi(i as i32)).collect())
            }
            Mode::Plus(k) | Mode::Minus(k) => {
                if k >= n {
                    return Err(ModelError::Index(k));
                }
                let th = theta(n, k);
                Ok((0..=n)
                    .map(|i| {
                        let cur = if i < n { tp * chebyshev_u_trig(i, th) } else { 0.0 };
                        let prev = if i > 0 { tm * chebyshev_u_trig(i - 1, th) } else { 0.0 };
                        cur + prev
                    })
                    .collect())
            }
        }
    }

    /// `Q(x)ᵀQ(x)`: `(s_k + (x-μ+)²)(N+1)/(2 sin² θ_k)` on the grid modes, a
    /// geometric sum for the mode at `μ+`.
    pub fn norm_sq(&self, mode: Mode) -> Result<f64, ModelError> {
        let n = self.params.n;
        let d = self.params.delta;
        match mode {
            Mode::Zero => {
                let tp = (1.0 + d) / 2.0;
                let r2 = ((1.0 + d) / (1.0 - d)).powi(2);
                let sum = if d == 0.0 {
                    (n + 1) as f64
                } else {
                    (r2.powi(n as i32 + 1) - 1.0) / (r2 - 1.0)
                };
                Ok(tp * tp * sum)
            }
            Mode::Plus(k) | Mode::Minus(k) => {
                if k >= n {
                    return Err(ModelError::Index(k));
                }
                let x = self.seq.eigenvalue(mode)?;
                let odd = (x - self.params.mu_plus).powi(2);
                let th = theta(n, k);
                Ok((self.s(k) + odd) * (n + 1) as f64 / (2.0 * th.sin().powi(2)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_family_is_u_of_shifted_argument() {
        let fam = SymmetrizedFamily::new(shifted_chebyshev_family(7).unwrap(), 1);
        for &x in &[-3.1, -1.0, 0.4] {
            let r = fam.eval_r_all(x);
            let u = chebyshev_u_family(8).unwrap();
            let want = u.eval_p_all((x + 2.0) / 2.0);
            for n in 0..7 {
                assert!((r[n] - want[n]).abs() < 1e-12 * want[n].abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_fully_dimerized() {
        assert!(matches!(
            chebyshev_model(ChebyshevSshParams::new(3, 1.0)),
            Err(ModelError::Domain(_))
        ));
    }

    #[test]
    fn trig_closed_form_matches_doubling() {
        let m = chebyshev_model(ChebyshevSshParams::new(6, 0.35)).unwrap();
        let seq = m.sequence();
        for (mode, _) in seq.spectrum().unwrap() {
            let q = seq.eigenvector(mode).unwrap();
            let even = m.closed_form_even(mode).unwrap();
            for (i, e) in even.iter().enumerate() {
                assert!((q[2 * i] - e).abs() < 1e-12, "{mode:?} {i}");
            }
            let nsq: f64 = q.iter().map(|v| v * v).sum();
            assert!((nsq / m.norm_sq(mode).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
