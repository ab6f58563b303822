//! Chains built from q-Racah polynomials.
//!
//! Model I is a `2N+1` site chain with a zero mode; model II is a `2N` site
//! chain obtained in truncation mode. Parameter sets are written
//! `ρ = (α, β, γ, δ)`; the family size is fixed by whichever parameter equals
//! `q^{-M}`.

use serde::Serialize;

use super::ModelError;
use crate::dd::Dd;
use crate::doubling::{DoublingSolution, Mode, QSequence};
use crate::recurrence::{RecurrenceFamily, SymmetrizedFamily};
use crate::specialfn::{hypergeometric, q_exponent, q_pochhammer, q_pochhammer_inf_ratio};
use crate::specialfn::{HypergeometricSpec, LogReal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QRacahTuple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl QRacahTuple {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        QRacahTuple {
            alpha,
            beta,
            gamma,
            delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum QRacahVariant {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QRacahSshParams {
    pub variant: QRacahVariant,
    pub n: usize,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

fn ab_factor(rho: &QRacahTuple, q: f64, k: usize) -> f64 {
    1.0 - rho.alpha * rho.beta * q.powi(k as i32)
}

fn qpow(q: f64, e: i32) -> Dd {
    Dd::from(q).powi(e)
}

/// `p q^k`, treating `p` as the exact power `q^e` when it is one.
fn times_qpow(p: Dd, q: f64, k: i32) -> Dd {
    match q_exponent(p.to_f64(), q) {
        Some(e) => qpow(q, e + k),
        None => p * qpow(q, k),
    }
}

fn one_minus(p: Dd, q: f64, k: i32) -> Dd {
    Dd::ONE - times_qpow(p, q, k)
}

struct DdTuple {
    a: Dd,
    b: Dd,
    g: Dd,
    d: Dd,
}

impl DdTuple {
    fn new(rho: &QRacahTuple, q: f64) -> Self {
        let exact = |x: f64| times_qpow(Dd::from(x), q, 0);
        DdTuple {
            a: exact(rho.alpha),
            b: exact(rho.beta),
            g: exact(rho.gamma),
            d: exact(rho.delta),
        }
    }
}

fn a_dd(n: usize, t: &DdTuple, q: f64) -> Dd {
    let n = n as i32;
    let ab = t.a * t.b;
    let num = one_minus(t.a, q, n + 1)
        * one_minus(ab, q, n + 1)
        * one_minus(t.b * t.d, q, n + 1)
        * one_minus(t.g, q, n + 1);
    num / (one_minus(ab, q, 2 * n + 1) * one_minus(ab, q, 2 * n + 2))
}

fn c_dd(n: usize, t: &DdTuple, q: f64) -> Dd {
    if n == 0 {
        return Dd::ZERO;
    }
    let n = n as i32;
    let ab = t.a * t.b;
    let num = Dd::from(q)
        * one_minus(Dd::ONE, q, n)
        * one_minus(t.b, q, n)
        * (t.g - times_qpow(ab, q, n))
        * (t.d - times_qpow(t.a, q, n));
    num / (one_minus(ab, q, 2 * n) * one_minus(ab, q, 2 * n + 1))
}

fn grid_dd(x: usize, t: &DdTuple, q: f64) -> Dd {
    let x = x as i32;
    -(one_minus(Dd::ONE, q, -x) * one_minus(t.g * t.d, q, x + 1))
}

/// `A_n(ρ)`.
pub fn qracah_a(n: usize, rho: &QRacahTuple, q: f64) -> f64 {
    a_dd(n, &DdTuple::new(rho, q), q).to_f64()
}

/// `C_n(ρ)`, zero at `n = 0`.
pub fn qracah_c(n: usize, rho: &QRacahTuple, q: f64) -> f64 {
    c_dd(n, &DdTuple::new(rho, q), q).to_f64()
}

/// Grid `λ(x) = -(1 - q^{-x})(1 - γδ q^{x+1})`.
pub fn qracah_grid(x: usize, rho: &QRacahTuple, q: f64) -> f64 {
    grid_dd(x, &DdTuple::new(rho, q), q).to_f64()
}

/// The weight `w(x; ρ)`, normalized to `w(0) = 1`.
pub fn qracah_weight(x: usize, rho: &QRacahTuple, q: f64) -> Result<LogReal, ModelError> {
    let QRacahTuple {
        alpha: a,
        beta: b,
        gamma: g,
        delta: d,
    } = *rho;
    let num = q_pochhammer(a * q, q, x)?
        * q_pochhammer(b * d * q, q, x)?
        * q_pochhammer(g * q, q, x)?
        * q_pochhammer(g * d * q, q, x)?
        * LogReal::from_f64(1.0 - g * d * q.powi(2 * x as i32 + 1));
    let den = q_pochhammer(q, q, x)?
        * q_pochhammer(g * d * q / a, q, x)?
        * q_pochhammer(g * q / b, q, x)?
        * q_pochhammer(d * q, q, x)?
        * LogReal::from_f64(a * b * q).powi(x as i32)
        * LogReal::from_f64(1.0 - g * d * q);
    if den.is_zero() {
        return Err(ModelError::Inadmissible(format!("weight w({x}) has a vanishing denominator")));
    }
    Ok(num / den)
}

/// `∏ (a_i; q)_∞ / ∏ (b_j; q)_∞`, pairing each `a_i` with a `b_j` such that
/// `a_i / b_j` is an integer power of `q` and reducing the pair to a finite
/// product. With one parameter equal to `q^{-M}` every pair reduces, which
/// avoids the `0/0` of the unpaired products.
fn paired_inf_ratio(num: &[f64], den: &[f64], q: f64) -> Result<LogReal, ModelError> {
    let mut used = vec![false; den.len()];
    let mut acc = LogReal::ONE;
    let mut rest_num = Vec::new();
    for &a in num {
        let hit = den.iter().enumerate().find_map(|(j, &b)| {
            (!used[j]).then(|| q_exponent(a / b, q).map(|e| (j, e))).flatten()
        });
        match hit {
            Some((j, e)) => {
                used[j] = true;
                let b = den[j];
                if e <= 0 {
                    acc *= q_pochhammer(a, q, (-e) as usize)?;
                } else {
                    let d = q_pochhammer(b, q, e as usize)?;
                    if d.is_zero() {
                        return Err(ModelError::Inadmissible("norm prefactor is singular".into()));
                    }
                    acc /= d;
                }
            }
            None => rest_num.push(a),
        }
    }
    let rest_den: Vec<f64> = den.iter().zip(&used).filter(|(_, u)| !**u).map(|(b, _)| *b).collect();
    if rest_num.is_empty() && rest_den.is_empty() {
        return Ok(acc);
    }
    Ok(acc * q_pochhammer_inf_ratio(&rest_num, &rest_den, q, 1e-18)?)
}

/// The squared norm `h(n; ρ)` matching [`qracah_weight`].
pub fn qracah_norm(n: usize, rho: &QRacahTuple, q: f64) -> Result<LogReal, ModelError> {
    let QRacahTuple {
        alpha: a,
        beta: b,
        gamma: g,
        delta: d,
    } = *rho;
    let pre = paired_inf_ratio(
        &[g / (a * b), d / a, 1.0 / b, g * d * q * q],
        &[1.0 / (a * b * q), g * d * q / a, g * q / b, d * q],
        q,
    )?;
    let num = q_pochhammer(q, q, n)?
        * q_pochhammer(a * b * q / g, q, n)?
        * q_pochhammer(a * q / d, q, n)?
        * q_pochhammer(b * q, q, n)?;
    let den = q_pochhammer(a * q, q, n)?
        * q_pochhammer(a * b * q, q, n)?
        * q_pochhammer(b * d * q, q, n)?
        * q_pochhammer(g * q, q, n)?;
    if den.is_zero() {
        return Err(ModelError::Inadmissible(format!("norm h({n}) has a vanishing denominator")));
    }
    let tail = LogReal::from_f64(ab_factor(rho, q, 1) / ab_factor(rho, q, 2 * n + 1))
        * LogReal::from_f64(g * d * q).powi(n as i32);
    Ok(pre * num / den * tail)
}

/// `P_n(λ(x); ρ)` summed as a terminating `4φ3`.
pub fn qracah_hypergeometric(n: usize, x: usize, rho: &QRacahTuple, q: f64) -> Result<f64, ModelError> {
    let QRacahTuple {
        alpha: a,
        beta: b,
        gamma: g,
        delta: d,
    } = *rho;
    let spec = HypergeometricSpec::basic(
        n,
        &[a * b * q.powi(n as i32 + 1), q.powi(-(x as i32)), g * d * q.powi(x as i32 + 1)],
        &[a * q, b * d * q, g * q],
        q,
        q,
    );
    Ok(hypergeometric(&spec)?)
}

/// The family `P_n(λ(x); ρ)`, `n, x = 0..size`.
pub fn qracah_family(rho: QRacahTuple, q: f64, size: usize) -> Result<RecurrenceFamily, ModelError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(ModelError::Domain("q must satisfy 0 < q < 1".into()));
    }
    if size == 0 {
        return Err(ModelError::Domain("family size must be at least 1".into()));
    }
    let t = DdTuple::new(&rho, q);
    let mut a: Vec<Dd> = (0..size).map(|n| a_dd(n, &t, q)).collect();
    a[size - 1] = Dd::ZERO;
    let c = (0..size).map(|n| c_dd(n, &t, q)).collect();
    let grid = (0..size).map(|x| grid_dd(x, &t, q)).collect();
    let weight = (0..size)
        .map(|x| qracah_weight(x, &rho, q))
        .collect::<Result<Vec<_>, _>>()?;
    let norm = (0..size)
        .map(|n| qracah_norm(n, &rho, q))
        .collect::<Result<Vec<_>, _>>()?;
    for (what, v) in [("weight", &weight), ("norm", &norm)] {
        if v.iter().any(|w| w.is_zero() || !w.ln_abs().is_finite()) {
            return Err(ModelError::Inadmissible(format!("{what} is zero or non-finite")));
        }
    }
    let label = format!(
        "q-racah(alpha={}, beta={}, gamma={}, delta={}, q={q})",
        rho.alpha, rho.beta, rho.gamma, rho.delta
    );
    Ok(RecurrenceFamily::new_dd(label, a, c, grid, weight, norm)?)
}

/// The parameter tuples used by a model: `ρ`, its dual, `ρ̄` and its dual,
/// with the family sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QRacahTuples {
    pub rho: QRacahTuple,
    pub rho_dual: QRacahTuple,
    pub rho_bar: QRacahTuple,
    pub rho_bar_dual: QRacahTuple,
    pub size: usize,
    pub bar_size: usize,
}

impl QRacahSshParams {
    pub fn tuples(&self) -> QRacahTuples {
        let (a, b, d, q) = (self.alpha, self.beta, self.delta, self.q);
        let n = self.n as i32;
        match self.variant {
            QRacahVariant::I => QRacahTuples {
                rho: QRacahTuple::new(a, q * b, q.powi(-n), d / q),
                rho_dual: QRacahTuple::new(q.powi(-n), d / q, a, q * b),
                rho_bar: QRacahTuple::new(a, b, q.powi(-n - 1), d),
                rho_bar_dual: QRacahTuple::new(q.powi(-n - 1), d, a, b),
                size: self.n,
                bar_size: self.n + 1,
            },
            QRacahVariant::II => QRacahTuples {
                rho: QRacahTuple::new(a, q * b, q.powi(-n), d),
                rho_dual: QRacahTuple::new(q.powi(-n), d, a, q * b),
                rho_bar: QRacahTuple::new(a, b, q.powi(-n), d),
                rho_bar_dual: QRacahTuple::new(q.powi(-n), d, a, b),
                size: self.n,
                bar_size: self.n,
            },
        }
    }

    /// `(ε, τ0, τ2)`.
    pub fn taus(&self) -> (i8, f64, f64) {
        let (e, t0, t2) = self.taus_dd();
        (e, t0.to_f64(), t2.to_f64())
    }

    /// `(ε, τ0, τ2)` in double-double.
    pub fn taus_dd(&self) -> (i8, Dd, Dd) {
        let (b, d, q) = (Dd::from(self.beta), Dd::from(self.delta), self.q);
        let qn = qpow(q, -(self.n as i32));
        match self.variant {
            QRacahVariant::I => (-1, -((Dd::ONE - d) * (Dd::ONE - qn)), -Dd::ONE),
            QRacahVariant::II => (
                1,
                -((Dd::ONE - qn / b) * (Dd::ONE - Dd::from(q) * b * d)),
                -(qn / b),
            ),
        }
    }

    /// The radicands `(t+_n)²` and `(t-_n)²`, with the sign of `t-` for
    /// model II folded in separately.
    pub fn coupling_radicands(&self) -> (Vec<f64>, Vec<f64>) {
        let (plus, minus) = self.coupling_radicands_dd();
        let f = |v: Vec<Dd>| v.into_iter().map(Dd::to_f64).collect();
        (f(plus), f(minus))
    }

    pub fn coupling_radicands_dd(&self) -> (Vec<Dd>, Vec<Dd>) {
        let (a, b, d) = (Dd::from(self.alpha), Dd::from(self.beta), Dd::from(self.delta));
        let q = self.q;
        let nn = self.n as i32;
        let one = Dd::ONE;
        let p = |e: i32| qpow(q, e);
        let ab = |e: i32| one - a * b * p(e);
        let mut plus = Vec::with_capacity(self.n);
        let mut minus = Vec::with_capacity(self.n);
        for i in 0..nn {
            match self.variant {
                QRacahVariant::I => {
                    plus.push(
                        (one - p(i - nn)) * ab(i + 1) * (one - b * p(i + 1)) * (d - a * p(i + 1))
                            / (ab(2 * i + 1) * ab(2 * i + 2)),
                    );
                    minus.push(
                        (one - b * d * p(i + 1)) * (one - p(i + 1)) * ab(i + nn + 2) * (one - a * p(i + 1))
                            / (p(nn) * ab(2 * i + 2) * ab(2 * i + 3)),
                    );
                }
                QRacahVariant::II => {
                    plus.push(
                        (one - b * p(i + 1)) * ab(i + 1) * ab(i + nn + 1) * (one - b * d * p(i + 1))
                            / (ab(2 * i + 1) * ab(2 * i + 2)),
                    );
                    let last = i == nn - 1;
                    minus.push(if last {
                        Dd::ZERO
                    } else {
                        p(nn - 1) * (one - p(i - nn + 1)) * (one - a * p(i + 1)) * (one - p(i + 1))
                            * (d - a * p(i + 1))
                            / (ab(2 * i + 2) * ab(2 * i + 3))
                    });
                }
            }
        }
        (plus, minus)
    }

    /// `K` (model I) or `K2` (model II), which equals `(t+_0)²`.
    pub fn k_const(&self) -> f64 {
        let (a, b, d, q) = (self.alpha, self.beta, self.delta, self.q);
        let n = self.n as i32;
        let ab2 = 1.0 - a * b * q * q;
        match self.variant {
            QRacahVariant::I => (1.0 - b * q) * (d - a * q) * (1.0 - q.powi(-n)) / ab2,
            QRacahVariant::II => {
                (1.0 - b * q) * (1.0 - a * b * q.powi(n + 1)) * (1.0 - b * d * q) / ab2
            }
        }
    }

    /// `s_k = x_k²` in closed form.
    pub fn closed_form_s(&self, k: usize) -> f64 {
        let (b, d, q) = (self.beta, self.delta, self.q);
        let (n, k) = (self.n as i32, k as i32);
        match self.variant {
            QRacahVariant::I => (1.0 - q.powi(k - n)) * (d - q.powi(-k)),
            QRacahVariant::II => (1.0 - d * b * q.powi(k + 1)) * (1.0 - b * q.powi(n - k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QRacahModel {
    params: QRacahSshParams,
    tuples: QRacahTuples,
    seq: QSequence,
    dual: SymmetrizedFamily,
    bar: SymmetrizedFamily,
    bar_dual: SymmetrizedFamily,
}

fn check_admissible(params: &QRacahSshParams) -> Result<(), ModelError> {
    let QRacahSshParams {
        n,
        q,
        alpha,
        beta,
        delta,
        ..
    } = *params;
    if !(q > 0.0 && q < 1.0) {
        return Err(ModelError::Domain("q must satisfy 0 < q < 1".into()));
    }
    if n == 0 {
        return Err(ModelError::Domain("N must be at least 1".into()));
    }
    if !(alpha.is_finite() && beta.is_finite() && delta.is_finite()) || alpha == 0.0 || beta == 0.0 {
        return Err(ModelError::Domain("alpha, beta, delta must be finite, alpha and beta nonzero".into()));
    }
    let (plus, minus) = params.coupling_radicands();
    for (i, v) in plus.iter().enumerate() {
        if !(*v > 0.0) {
            return Err(ModelError::Inadmissible(format!("(t+_{i})^2 = {v} is not positive")));
        }
    }
    let n_minus = match params.variant {
        QRacahVariant::I => n,
        QRacahVariant::II => n - 1,
    };
    for (i, v) in minus.iter().enumerate().take(n_minus) {
        if !(*v > 0.0) {
            return Err(ModelError::Inadmissible(format!("(t-_{i})^2 = {v} is not positive")));
        }
    }
    for k in 0..n {
        let s = params.closed_form_s(k);
        if !(s > 0.0) {
            return Err(ModelError::Inadmissible(format!("x_{k}^2 = {s} is not positive")));
        }
    }
    let k = params.k_const();
    if !(k > 0.0) {
        return Err(ModelError::Inadmissible(format!("K = {k} is not positive")));
    }
    Ok(())
}

/// Builds a q-Racah chain after checking admissibility: positive coupling
/// radicands, positive `x_k²` and `K`, and all four families Favard-positive
/// with finite nonzero weights and norms.
pub fn qracah_model(params: QRacahSshParams) -> Result<QRacahModel, ModelError> {
    check_admissible(&params)?;
    let tuples = params.tuples();
    let q = params.q;
    let fam = |rho, size| -> Result<RecurrenceFamily, ModelError> {
        qracah_family(rho, q, size).map_err(|e| match e {
            ModelError::Recurrence(r) => ModelError::Inadmissible(r.to_string()),
            other => other,
        })
    };
    let (eps, tau0, tau2) = params.taus_dd();
    let family = SymmetrizedFamily::new(fam(tuples.rho, tuples.size)?, eps);
    let dual = SymmetrizedFamily::new(fam(tuples.rho_dual, tuples.size)?, 1);
    let bar = SymmetrizedFamily::new(fam(tuples.rho_bar, tuples.bar_size)?, eps);
    let bar_dual = SymmetrizedFamily::new(fam(tuples.rho_bar_dual, tuples.bar_size)?, 1);
    for n in 0..tuples.bar_size {
        let w = qracah_weight(n, &tuples.rho_bar_dual, q)?;
        if !(w.sign() > 0) {
            return Err(ModelError::Inadmissible(format!("K w({n}; rho_bar^d) is not positive")));
        }
    }
    let (plus, minus) = params.coupling_radicands_dd();
    let t_plus: Vec<Dd> = plus.iter().map(|v| v.sqrt()).collect();
    let t_minus: Vec<Dd> = match params.variant {
        QRacahVariant::I => minus.iter().map(|v| v.sqrt()).collect(),
        QRacahVariant::II => {
            let qb = Dd::from(q) * Dd::from(params.beta);
            minus.iter().map(|v| Dd::ZERO - qb * v.sqrt()).collect()
        }
    };
    let truncated = params.variant == QRacahVariant::II;
    let sol = DoublingSolution::from_dd(eps, tau0, tau2, &t_plus, &t_minus, truncated)?;
    let seq = QSequence::new(family, sol, 0.0, 0.0)?;
    Ok(QRacahModel {
        params,
        tuples,
        seq,
        dual,
        bar,
        bar_dual,
    })
}

impl QRacahModel {
    pub fn params(&self) -> &QRacahSshParams {
        &self.params
    }

    pub fn tuples(&self) -> &QRacahTuples {
        &self.tuples
    }

    pub fn sequence(&self) -> &QSequence {
        &self.seq
    }

    pub(crate) fn sequence_mut(&mut self) -> &mut QSequence {
        &mut self.seq
    }

    pub fn dual_family(&self) -> &SymmetrizedFamily {
        &self.dual
    }

    pub fn bar_family(&self) -> &SymmetrizedFamily {
        &self.bar
    }

    pub fn closed_form_spectrum(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.seq.size());
        if self.params.variant == QRacahVariant::I {
            out.push(0.0);
        }
        for k in 0..self.params.n {
            let x = self.params.closed_form_s(k).sqrt();
            out.push(-x);
            out.push(x);
        }
        super::sorted(out)
    }

    /// Number of negative `A_k(ρ̄)`, `k < n`.
    pub fn nu(&self, n: usize) -> usize {
        self.bar.base().coeff_a()[..n].iter().filter(|a| **a < 0.0).count()
    }

    /// `ε^n (-1)^{ν_n} sqrt(K w(n; ρ̄^d)) P_n(λ; ρ̄)` for the even components,
    /// with `λ = λ_k`, or `λ_N` for the zero mode.
    pub fn closed_form_even(&self, mode: Mode) -> Result<Vec<f64>, ModelError> {
        let nn = self.params.n;
        let col = match mode {
            Mode::Zero if self.params.variant == QRacahVariant::I => nn,
            Mode::Plus(k) | Mode::Minus(k) if k < nn => k,
            Mode::Zero => return Err(ModelError::Index(nn)),
            Mode::Plus(k) | Mode::Minus(k) => return Err(ModelError::Index(k)),
        };
        let p = self.bar.p_at_grid(col)?;
        let kc = self.params.k_const();
        let eps = f64::from(self.seq.solution().epsilon);
        (0..self.tuples.bar_size)
            .map(|i| {
                let w = qracah_weight(i, &self.tuples.rho_bar_dual, self.params.q)?;
                let amp = (w * kc).sqrt().ok_or_else(|| {
                    ModelError::Inadmissible(format!("K w({i}; rho_bar^d) is negative"))
                })?;
                let sign = eps.powi(i as i32) * if self.nu(i) % 2 == 0 { 1.0 } else { -1.0 };
                Ok(sign * (amp * p[i]).to_f64())
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|mut v| {
                if self.params.variant == QRacahVariant::I {
                    v.truncate(nn + 1);
                }
                v
            })
    }

    /// `2 x_k² h(k; ρ^d)`, and `K h(N; ρ̄^d)` for the zero mode.
    pub fn norm_sq(&self, mode: Mode) -> Result<f64, ModelError> {
        let q = self.params.q;
        match mode {
            Mode::Zero if self.params.variant == QRacahVariant::I => {
                let h = qracah_norm(self.params.n, &self.tuples.rho_bar_dual, q)?;
                Ok((h * self.params.k_const()).to_f64())
            }
            Mode::Plus(k) | Mode::Minus(k) if k < self.params.n => {
                let h = qracah_norm(k, &self.tuples.rho_dual, q)?;
                Ok((h * (2.0 * self.params.closed_form_s(k))).to_f64())
            }
            Mode::Zero => Err(ModelError::Index(self.params.n)),
            Mode::Plus(k) | Mode::Minus(k) => Err(ModelError::Index(k)),
        }
    }

    /// Largest residual of the contiguity relation expressing `P_n(ρ̄)`
    /// through `P_n(ρ)` and `P_{n-1}(ρ)` on the common grid, relative to the
    /// sum of the term magnitudes.
    pub fn contiguity_residual(&self) -> Result<f64, ModelError> {
        let QRacahSshParams {
            n: nn,
            q,
            alpha: a,
            beta: b,
            delta: d,
            ..
        } = self.params;
        let nf = nn as i32;
        let ab = |e: i32| 1.0 - a * b * q.powi(e);
        let mut worst: f64 = 0.0;
        for x in 0..nn {
            let small = self.seq.family().p_at_grid(x)?;
            let big = self.bar.p_at_grid(x)?;
            for i in 0..self.tuples.bar_size {
                let ii = i as i32;
                let qi = q.powi(ii);
                let (ca, cb) = match self.params.variant {
                    QRacahVariant::I => (
                        (1.0 - q.powi(ii - nf)) * ab(ii + 1) / ((1.0 - q.powi(-nf)) * ab(2 * ii + 1)),
                        (1.0 - qi) * ab(nf + ii + 1) / ((1.0 - q.powi(nf)) * ab(2 * ii + 1)),
                    ),
                    QRacahVariant::II => {
                        let den = (1.0 - b * d * q) * ab(2 * ii + 1);
                        (
                            ab(ii + 1) * (1.0 - b * d * q.powi(ii + 1)) / den,
                            -q * b * (1.0 - qi) * (d - a * qi) / den,
                        )
                    }
                };
                let cur = if i < nn { ca * small[i] } else { 0.0 };
                let prev = if i > 0 { cb * small[i - 1] } else { 0.0 };
                let scale = big[i].abs() + cur.abs() + prev.abs();
                worst = worst.max((big[i] - cur - prev).abs() / scale);
            }
        }
        Ok(worst)
    }

    /// Largest `|P_n(λ_x; ρ) - P_x(λ_n; ρ^d)|` over the grid, in units of the
    /// orthonormal matrix: each difference is scaled by `sqrt(w(x)/h(n))`.
    pub fn duality_residual(&self) -> Result<f64, ModelError> {
        let size = self.tuples.size;
        let fam = self.seq.family();
        let base = fam.base();
        let mut worst: f64 = 0.0;
        let dual_rows = (0..size)
            .map(|n| self.dual.p_at_grid(n))
            .collect::<Result<Vec<_>, _>>()?;
        for x in 0..size {
            let p = fam.p_at_grid(x)?;
            for n in 0..size {
                let scale = (base.weight()[x] / base.norm()[n]).abs().sqrt().unwrap_or(LogReal::ZERO);
                let diff = LogReal::from_f64(p[n] - dual_rows[n][x]) * scale;
                worst = worst.max(diff.to_f64().abs());
            }
        }
        Ok(worst)
    }

    /// Largest relative mismatch between `w(n; ρ^d)` and `∏_{k<n} A_k/C_{k+1}`
    /// of the `ρ` family.
    pub fn weight_identity_residual(&self) -> Result<f64, ModelError> {
        let base = self.seq.family().base();
        let (a, c) = (base.coeff_a(), base.coeff_c());
        let mut acc = LogReal::ONE;
        let mut worst: f64 = 0.0;
        for n in 0..self.tuples.size {
            if n > 0 {
                acc = acc * LogReal::from_f64(a[n - 1]) / LogReal::from_f64(c[n]);
            }
            let w = qracah_weight(n, &self.tuples.rho_dual, self.params.q)?;
            worst = worst.max(w.rel_diff(acc));
        }
        Ok(worst)
    }

    /// Orthogonality of all four families on their grids.
    pub fn family_orthogonality(&self) -> Result<f64, ModelError> {
        let mut worst: f64 = 0.0;
        for f in [self.seq.family(), &self.dual, &self.bar, &self.bar_dual] {
            worst = worst.max(f.check_orthogonality()?.max_deviation);
        }
        Ok(worst)
    }
}
