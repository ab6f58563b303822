//! The chain built from Krawtchouk polynomials, spectrum `0, ±sqrt(k+1)`.

use serde::Serialize;

use super::ModelError;
use crate::doubling::{DoublingSolution, Mode, QSequence};
use crate::recurrence::{RecurrenceFamily, SymmetrizedFamily};
use crate::specialfn::{hypergeometric, HypergeometricSpec, LogReal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrawtchoukSshParams {
    pub n: usize,
    pub p: f64,
}

/// `ln binom(m, k)`.
pub fn ln_binomial(m: usize, k: usize) -> f64 {
    let k = k.min(m - k.min(m));
    (0..k).map(|i| ((m - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `K_n(x; p, M)`, `n, x = 0..=M`: `A_n = p(M-n)`, `C_n = n(1-p)`, grid
/// `λ(x) = -x`, weight `binom(M,x) p^x (1-p)^{M-x}`.
pub fn krawtchouk_family(m: usize, p: f64) -> Result<RecurrenceFamily, ModelError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ModelError::Domain("p must satisfy 0 < p < 1".into()));
    }
    let size = m + 1;
    let a = (0..size).map(|n| p * (m - n) as f64).collect();
    let c = (0..size).map(|n| n as f64 * (1.0 - p)).collect();
    let grid = (0..size).map(|x| -(x as f64)).collect();
    let weight = (0..size)
        .map(|x| {
            let ln = ln_binomial(m, x) + x as f64 * p.ln() + (m - x) as f64 * (1.0 - p).ln();
            LogReal::new(1, ln)
        })
        .collect();
    let norm = (0..size)
        .map(|n| LogReal::new(1, n as f64 * ((1.0 - p) / p).ln() - ln_binomial(m, n)))
        .collect();
    Ok(RecurrenceFamily::new(
        format!("krawtchouk(M={m}, p={p})"),
        a,
        c,
        grid,
        weight,
        norm,
    )?)
}

/// `K_n(x; p, M) = 2F1(-n, -x; -M; 1/p)` summed directly.
pub fn krawtchouk_hypergeometric(n: usize, x: usize, p: f64, m: usize) -> Result<f64, ModelError> {
    let spec = HypergeometricSpec::ordinary(n, &[-(x as f64)], &[-(m as f64)], 1.0 / p);
    Ok(hypergeometric(&spec)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrawtchoukModel {
    params: KrawtchoukSshParams,
    seq: QSequence,
    /// `K_n(x; p, N)`, one size larger than the doubled family.
    big: SymmetrizedFamily,
}

pub fn krawtchouk_model(params: KrawtchoukSshParams) -> Result<KrawtchoukModel, ModelError> {
    let KrawtchoukSshParams { n, p } = params;
    if !(p > 0.0 && p < 1.0) {
        return Err(ModelError::Domain("p must satisfy 0 < p < 1".into()));
    }
    if n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    let family = SymmetrizedFamily::new(krawtchouk_family(n - 1, p)?, -1);
    let t_plus = (0..n).map(|i| (p * (n - i) as f64).sqrt()).collect();
    let t_minus = (0..n).map(|i| ((1.0 - p) * (i + 1) as f64).sqrt()).collect();
    let sol = DoublingSolution::new(-1, 1.0, -1.0, t_plus, t_minus, false)?;
    let seq = QSequence::new(family, sol, 0.0, 0.0)?;
    let big = SymmetrizedFamily::new(krawtchouk_family(n, p)?, 1);
    Ok(KrawtchoukModel { params, seq, big })
}

impl KrawtchoukModel {
    pub fn params(&self) -> &KrawtchoukSshParams {
        &self.params
    }

    pub fn sequence(&self) -> &QSequence {
        &self.seq
    }

    pub(crate) fn sequence_mut(&mut self) -> &mut QSequence {
        &mut self.seq
    }

    pub fn closed_form_spectrum(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for k in 0..self.params.n {
            let x = ((k + 1) as f64).sqrt();
            out.push(-x);
            out.push(x);
        }
        super::sorted(out)
    }

    /// `(-1)^n sqrt(N p^{n+1} (1-p)^{-n} binom(N,n)) K_n(k+1; p, N)`, and
    /// `K_n(0) = 1` for the zero mode.
    pub fn closed_form_even(&self, mode: Mode) -> Result<Vec<f64>, ModelError> {
        let KrawtchoukSshParams { n, p } = self.params;
        let col = match mode {
            Mode::Zero => 0,
            Mode::Plus(k) | Mode::Minus(k) if k < n => k + 1,
            Mode::Plus(k) | Mode::Minus(k) => return Err(ModelError::Index(k)),
        };
        let k_vals = self.big.p_at_grid(col)?;
        Ok((0..=n)
            .map(|i| {
                let ln = 0.5
                    * ((n as f64).ln()
                        + (i + 1) as f64 * p.ln()
                        - i as f64 * (1.0 - p).ln()
                        + ln_binomial(n, i));
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * (LogReal::new(1, ln) * k_vals[i]).to_f64()
            })
            .collect())
    }

    /// `2(k+1)(1-p)^{k-N+1} / (p^k binom(N-1,k))`, and `pN/(1-p)^N` at zero.
    pub fn norm_sq(&self, mode: Mode) -> Result<f64, ModelError> {
        let KrawtchoukSshParams { n, p } = self.params;
        let nf = n as f64;
        let ln = match mode {
            Mode::Zero => p.ln() + nf.ln() - nf * (1.0 - p).ln(),
            Mode::Plus(k) | Mode::Minus(k) if k < n => {
                let kf = k as f64;
                (2.0 * (kf + 1.0)).ln() + (kf - nf + 1.0) * (1.0 - p).ln()
                    - kf * p.ln()
                    - ln_binomial(n - 1, k)
            }
            Mode::Plus(k) | Mode::Minus(k) => return Err(ModelError::Index(k)),
        };
        Ok(LogReal::new(1, ln).to_f64())
    }

    /// Largest relative residual of
    /// `(1-p) n K_{n-1}(k; p, N-1) - p(N-n) K_n(k; p, N-1) = -pN K_n(k+1; p, N)`
    /// over `n = 0..=N`, `k = 0..N`.
    pub fn contiguity_residual(&self) -> Result<f64, ModelError> {
        let KrawtchoukSshParams { n, p } = self.params;
        let nf = n as f64;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let small = self.seq.family().p_at_grid(k)?;
            let big = self.big.p_at_grid(k + 1)?;
            for i in 0..=n {
                let prev = if i > 0 { (1.0 - p) * i as f64 * small[i - 1] } else { 0.0 };
                let cur = if i < n { p * (nf - i as f64) * small[i] } else { 0.0 };
                let rhs = -p * nf * big[i];
                let scale = prev.abs() + cur.abs() + rhs.abs();
                worst = worst.max(((prev - cur) - rhs).abs() / scale);
            }
        }
        Ok(worst)
    }

    /// Largest `|K_n(x) - K_x(n)|` relative to the summed term magnitudes,
    /// over `n, x = 0..=N`, with both sides summed as hypergeometric series.
    pub fn self_duality_residual(&self) -> Result<f64, ModelError> {
        let KrawtchoukSshParams { n, p } = self.params;
        let mut worst: f64 = 0.0;
        for i in 0..=n {
            for x in 0..=n {
                let a = HypergeometricSpec::ordinary(i, &[-(x as f64)], &[-(n as f64)], 1.0 / p);
                let b = HypergeometricSpec::ordinary(x, &[-(i as f64)], &[-(n as f64)], 1.0 / p);
                let ta = a.terms()?;
                let scale: f64 = ta.iter().map(|t| t.abs()).sum();
                let diff = ta.iter().sum::<f64>() - b.terms()?.iter().sum::<f64>();
                worst = worst.max(diff.abs() / scale);
            }
        }
        Ok(worst)
    }

    /// Orthogonality of the doubled family and of the size-`N+1` family.
    pub fn family_orthogonality(&self) -> Result<f64, ModelError> {
        let a = self.seq.family().check_orthogonality()?.max_deviation;
        let b = self.big.check_orthogonality()?.max_deviation;
        Ok(a.max(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_matches_hypergeometric() {
        for &p in &[0.2, 0.5, 0.85] {
            let f = krawtchouk_family(8, p).unwrap();
            for x in 0..=8 {
                let fw = f.eval_p_all(-(x as f64));
                for n in 0..=8 {
                    let hg = krawtchouk_hypergeometric(n, x, p, 8).unwrap();
                    assert!((fw[n] - hg).abs() <= 1e-10 * hg.abs().max(1.0), "{p} {n} {x}");
                }
            }
        }
    }

    #[test]
    fn examples() {
        let f = krawtchouk_family(3, 0.5).unwrap();
        assert_eq!(f.eval_p(1, 0.0).unwrap(), 1.0);
        let m = krawtchouk_model(KrawtchoukSshParams { n: 5, p: 0.3 }).unwrap();
        let u0 = (5.0f64 / 2.0).sqrt();
        let delta = 2.0 * 0.3 - 1.0;
        assert!((m.sequence().solution().tp(0) - u0 * (1.0 + delta as f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_one() {
        let f = krawtchouk_family(12, 0.3).unwrap();
        let s: f64 = f.weight().iter().map(|w| w.to_f64()).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}
