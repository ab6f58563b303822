//! Pochhammer symbols, q-Pochhammer products and terminating (q-)hypergeometric sums.
//!
//! Long products are carried as [`LogReal`] so that weights and norms of the
//! q-families can be formed at sizes where plain `f64` would overflow.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, DivAssign, Mul, MulAssign, Neg};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("q must lie in (0, 1), got {0}")]
    QOutOfRange(f64),
    #[error("denominator factor vanishes at term {term}")]
    VanishingDenominator { term: usize },
    #[error("infinite product with argument {0} does not converge")]
    Divergence(f64),
    #[error("first numerator parameter {0} does not encode a terminating series")]
    NotTerminating(f64),
}

/// A real number stored as a sign and the natural log of its magnitude.
///
/// `sign == 0` is exact zero. Products and quotients never leave log space, so
/// values like `1e-400` or `1e+400` are representable; [`LogReal::to_f64`]
/// saturates to `0` or `±inf` only at the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogReal {
    sign: i8,
    ln_abs: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal {
        sign: 1,
        ln_abs: 0.0,
    };

    /// Builds a value from its parts. Any `sign` other than ±1 gives zero.
    pub fn new(sign: i8, ln_abs: f64) -> Self {
        match sign.cmp(&0) {
            Ordering::Greater => LogReal { sign: 1, ln_abs },
            Ordering::Less => LogReal { sign: -1, ln_abs },
            Ordering::Equal => Self::ZERO,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogReal::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_abs.exp()
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn ln_abs(self) -> f64 {
        self.ln_abs
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        LogReal::new(self.sign.abs(), self.ln_abs)
    }

    /// `1/x`; the reciprocal of zero has infinite magnitude and sign `+1`.
    pub fn recip(self) -> Self {
        if self.sign == 0 {
            LogReal::new(1, f64::INFINITY)
        } else {
            LogReal::new(self.sign, -self.ln_abs)
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return if n > 0 { Self::ZERO } else { Self::ZERO.recip() };
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        LogReal::new(sign, self.ln_abs * f64::from(n))
    }

    /// Square root of a non-negative value.
    pub fn sqrt(self) -> Option<Self> {
        match self.sign {
            0 => Some(Self::ZERO),
            1 => Some(LogReal::new(1, 0.5 * self.ln_abs)),
            _ => None,
        }
    }

    /// `|self/other - 1|`, evaluated in log space. Sign mismatch gives `inf`,
    /// two zeros give `0`.
    pub fn rel_diff(self, other: LogReal) -> f64 {
        match (self.sign, other.sign) {
            (0, 0) => 0.0,
            (a, b) if a != b => f64::INFINITY,
            _ => (self.ln_abs - other.ln_abs).exp_m1().abs(),
        }
    }
}

impl Default for LogReal {
    fn default() -> Self {
        Self::ONE
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "" }, self.ln_abs),
        }
    }
}

impl From<f64> for LogReal {
    fn from(x: f64) -> Self {
        LogReal::from_f64(x)
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        LogReal::new(self.sign * rhs.sign, self.ln_abs + rhs.ln_abs)
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 {
            return Self::ZERO;
        }
        self * rhs.recip()
    }
}

impl Mul<f64> for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: f64) -> LogReal {
        self * LogReal::from_f64(rhs)
    }
}

impl Div<f64> for LogReal {
    type Output = LogReal;
    fn div(self, rhs: f64) -> LogReal {
        self / LogReal::from_f64(rhs)
    }
}

impl MulAssign for LogReal {
    fn mul_assign(&mut self, rhs: LogReal) {
        *self = *self * rhs;
    }
}

impl DivAssign for LogReal {
    fn div_assign(&mut self, rhs: LogReal) {
        *self = *self / rhs;
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal::new(-self.sign, self.ln_abs)
    }
}

impl std::iter::Product for LogReal {
    fn product<I: Iterator<Item = LogReal>>(iter: I) -> Self {
        iter.fold(LogReal::ONE, |acc, x| acc * x)
    }
}

/// Rising factorial `b (b+1) ... (b+k-1)`.
pub fn pochhammer(b: f64, k: usize) -> f64 {
    (0..k).map(|j| b + j as f64).product()
}

fn check_q(q: f64) -> Result<(), SpecialFnError> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(SpecialFnError::QOutOfRange(q))
    }
}

/// Returns `e` when `a` is `q^e` for an integer `e`, up to rounding.
///
/// Parameters such as `q^{-N}` are then handled by exponent so that factors
/// like `1 - q^{-N} q^N` come out as an exact zero.
pub fn q_exponent(a: f64, q: f64) -> Option<i32> {
    if !(a > 0.0) || !a.is_finite() {
        return None;
    }
    let e = a.ln() / q.ln();
    let r = e.round();
    if r.abs() > 4096.0 {
        return None;
    }
    let ri = r as i32;
    ((a - q.powi(ri)).abs() <= 1e-11 * a).then_some(ri)
}

/// The factor `1 - a q^k`, exact when `a` is an integer power of `q`.
pub fn q_factor(a: f64, q: f64, k: usize) -> f64 {
    match q_exponent(a, q) {
        Some(e) => 1.0 - q.powi(e + k as i32),
        None => 1.0 - a * q.powi(k as i32),
    }
}

/// `(b; q)_k = (1-b)(1-bq)...(1-bq^{k-1})`.
pub fn q_pochhammer(b: f64, q: f64, k: usize) -> Result<LogReal, SpecialFnError> {
    check_q(q)?;
    Ok((0..k).map(|j| LogReal::from_f64(q_factor(b, q, j))).product())
}

fn q_product_inf(a: f64, q: f64, tol: f64) -> Result<LogReal, SpecialFnError> {
    if !a.is_finite() {
        return Err(SpecialFnError::Divergence(a));
    }
    let mut acc = LogReal::ONE;
    let mut m = 0usize;
    loop {
        let t = a * q.powi(m as i32);
        if t.abs() < tol {
            return Ok(acc);
        }
        if m > 200_000 {
            return Err(SpecialFnError::Divergence(a));
        }
        acc *= LogReal::from_f64(q_factor(a, q, m));
        if acc.is_zero() {
            return Ok(acc);
        }
        m += 1;
    }
}

/// `∏ (a_i; q)_∞ / ∏ (b_j; q)_∞`, each product truncated once `|a q^m| < tol`.
pub fn q_pochhammer_inf_ratio(
    numerators: &[f64],
    denominators: &[f64],
    q: f64,
    tol: f64,
) -> Result<LogReal, SpecialFnError> {
    check_q(q)?;
    let mut acc = LogReal::ONE;
    for &b in denominators {
        let d = q_product_inf(b, q, tol)?;
        if d.is_zero() {
            return Err(SpecialFnError::VanishingDenominator { term: 0 });
        }
        acc /= d;
    }
    for &a in numerators {
        acc *= q_product_inf(a, q, tol)?;
    }
    Ok(acc)
}

/// A terminating `_{r+1}F_r` or `_{r+1}φ_r` series.
///
/// The first numerator parameter is `-n` (ordinary case) or `q^{-n}` (basic
/// case) and fixes the number of terms to `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypergeometricSpec {
    pub numerator_params: Vec<f64>,
    pub denominator_params: Vec<f64>,
    pub argument: f64,
    pub q: Option<f64>,
}

impl HypergeometricSpec {
    /// `F(-n, a...; b...; z)`.
    pub fn ordinary(n: usize, upper: &[f64], lower: &[f64], z: f64) -> Self {
        let mut numerator_params = vec![-(n as f64)];
        numerator_params.extend_from_slice(upper);
        HypergeometricSpec {
            numerator_params,
            denominator_params: lower.to_vec(),
            argument: z,
            q: None,
        }
    }

    /// `φ(q^{-n}, a...; b...; q, z)`.
    pub fn basic(n: usize, upper: &[f64], lower: &[f64], q: f64, z: f64) -> Self {
        let mut numerator_params = vec![q.powi(-(n as i32))];
        numerator_params.extend_from_slice(upper);
        HypergeometricSpec {
            numerator_params,
            denominator_params: lower.to_vec(),
            argument: z,
            q: Some(q),
        }
    }

    /// The terminating degree `n` read off the first numerator parameter.
    pub fn degree(&self) -> Result<usize, SpecialFnError> {
        let first = *self
            .numerator_params
            .first()
            .ok_or(SpecialFnError::NotTerminating(f64::NAN))?;
        let n = match self.q {
            None => {
                let n = -first;
                (n >= 0.0 && n.fract() == 0.0).then_some(n as usize)
            }
            Some(q) => {
                check_q(q)?;
                q_exponent(first, q).filter(|&e| e <= 0).map(|e| (-e) as usize)
            }
        };
        n.ok_or(SpecialFnError::NotTerminating(first))
    }

    /// Successive terms of the series, stopping early if a numerator factor
    /// vanishes before the nominal degree.
    pub fn terms(&self) -> Result<Vec<f64>, SpecialFnError> {
        let n = self.degree()?;
        let z = self.argument;
        let mut terms = Vec::with_capacity(n + 1);
        let mut t = 1.0;
        terms.push(t);
        for k in 0..n {
            let (num, den, last) = match self.q {
                None => {
                    let kf = k as f64;
                    let num: f64 = self.numerator_params.iter().map(|a| a + kf).product();
                    let den: f64 = self.denominator_params.iter().map(|b| b + kf).product();
                    (num, den, kf + 1.0)
                }
                Some(q) => {
                    let num: f64 = self
                        .numerator_params
                        .iter()
                        .map(|&a| q_factor(a, q, k))
                        .product();
                    let den: f64 = self
                        .denominator_params
                        .iter()
                        .map(|&b| q_factor(b, q, k))
                        .product();
                    (num, den, 1.0 - q.powi(k as i32 + 1))
                }
            };
            if num == 0.0 {
                break;
            }
            if den == 0.0 {
                return Err(SpecialFnError::VanishingDenominator { term: k + 1 });
            }
            t *= num / den * z / last;
            terms.push(t);
        }
        Ok(terms)
    }
}

/// Sum of a terminating hypergeometric series, accumulated term by term.
pub fn hypergeometric(spec: &HypergeometricSpec) -> Result<f64, SpecialFnError> {
    Ok(spec.terms()?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(2.0, 3), 24.0);
        assert_eq!(pochhammer(-1.5, 0), 1.0);
        assert_eq!(pochhammer(-2.0, 4), 0.0);
    }

    #[test]
    fn q_pochhammer_examples() {
        assert_eq!(q_pochhammer(7.3, 0.5, 0).unwrap(), LogReal::ONE);
        assert!(q_pochhammer(1.0, 0.5, 2).unwrap().is_zero());
        assert!(close(q_pochhammer(0.5, 0.5, 2).unwrap().to_f64(), 0.375, 1e-15));
        assert_eq!(
            q_pochhammer(0.5, 1.5, 2),
            Err(SpecialFnError::QOutOfRange(1.5))
        );
    }

    #[test]
    fn exact_zero_for_negative_q_powers() {
        let q: f64 = 0.8;
        let a = q.powi(-7);
        assert_eq!(q_factor(a, q, 7), 0.0);
        assert!(q_pochhammer(a, q, 8).unwrap().is_zero());
        assert!(!q_pochhammer(a, q, 7).unwrap().is_zero());
    }

    #[test]
    fn infinite_ratio_examples() {
        let one = q_pochhammer_inf_ratio(&[0.0], &[0.0], 0.5, 1e-16).unwrap();
        assert_eq!(one.to_f64(), 1.0);
        let euler = q_pochhammer_inf_ratio(&[0.5], &[], 0.5, 1e-16).unwrap();
        assert!(close(euler.to_f64(), 0.288_788_095_086_602_4, 1e-14));
        assert!(matches!(
            q_pochhammer_inf_ratio(&[], &[1.0], 0.5, 1e-16),
            Err(SpecialFnError::VanishingDenominator { .. })
        ));
    }

    #[test]
    fn hypergeometric_examples() {
        let s = HypergeometricSpec::ordinary(0, &[2.5], &[1.5], 0.3);
        assert_eq!(hypergeometric(&s).unwrap(), 1.0);
        // U_2(x) = 3 F(-2, 4; 3/2; (1-x)/2)
        let x = 0.5;
        let s = HypergeometricSpec::ordinary(2, &[4.0], &[1.5], (1.0 - x) / 2.0);
        assert!((3.0 * hypergeometric(&s).unwrap()).abs() < 1e-15);
        let s = HypergeometricSpec::basic(0, &[0.3, 0.2, 0.1], &[0.4, 0.5, 0.6], 0.5, 0.5);
        assert_eq!(hypergeometric(&s).unwrap(), 1.0);
    }

    #[test]
    fn degree_detection() {
        assert_eq!(HypergeometricSpec::ordinary(5, &[], &[], 1.0).degree(), Ok(5));
        assert_eq!(HypergeometricSpec::basic(9, &[], &[], 0.8, 0.8).degree(), Ok(9));
        let bad = HypergeometricSpec {
            numerator_params: vec![-1.5],
            denominator_params: vec![],
            argument: 1.0,
            q: None,
        };
        assert_eq!(bad.degree(), Err(SpecialFnError::NotTerminating(-1.5)));
    }

    #[test]
    fn early_termination_skips_later_poles() {
        // q^{-x} with x = 2 < n = 4 ends the sum before the (q^{-3}; q) pole
        let q: f64 = 0.5;
        let s = HypergeometricSpec::basic(4, &[q.powi(-2)], &[q.powi(-3)], q, q);
        assert_eq!(s.terms().unwrap().len(), 3);
        let s = HypergeometricSpec::basic(4, &[0.3], &[q.powi(-2)], q, q);
        assert_eq!(
            hypergeometric(&s),
            Err(SpecialFnError::VanishingDenominator { term: 3 })
        );
    }

    #[test]
    fn logreal_arithmetic() {
        let a = LogReal::from_f64(-3.0);
        let b = LogReal::from_f64(0.5);
        assert!(close((a * b).to_f64(), -1.5, 1e-15));
        assert!(close((a / b).to_f64(), -6.0, 1e-15));
        assert!(close(a.powi(3).to_f64(), -27.0, 1e-15));
        assert_eq!(a.sqrt(), None);
        assert!(close(b.sqrt().unwrap().to_f64(), 0.5f64.sqrt(), 1e-15));
        assert!((LogReal::ZERO * a).is_zero());
        let huge = LogReal::new(1, 1000.0);
        assert!(close((huge / huge).to_f64(), 1.0, 1e-15));
        assert_eq!(LogReal::new(0, 3.0), LogReal::ZERO);
    }

    proptest! {
        #[test]
        fn pochhammer_step(b in -10.0f64..10.0, k in 1usize..20) {
            let lhs = pochhammer(b, k);
            let rhs = pochhammer(b, k - 1) * (b + k as f64 - 1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn q_pochhammer_matches_naive(b in -3.0f64..3.0, q in 0.05f64..0.95, k in 0usize..=30) {
            let naive: f64 = (0..k).map(|j| 1.0 - b * q.powi(j as i32)).product();
            let got = q_pochhammer(b, q, k).unwrap().to_f64();
            prop_assert!((got - naive).abs() <= 1e-14 * naive.abs().max(1e-300) + 1e-300);
        }

        #[test]
        fn series_order_independent(
            n in 0usize..12,
            a in 0.1f64..3.0,
            b in 0.1f64..3.0,
            z in -1.0f64..1.0,
            q in 0.1f64..0.9,
            basic in any::<bool>(),
        ) {
            let spec = if basic {
                HypergeometricSpec::basic(n, &[a * q], &[b * q], q, z)
            } else {
                HypergeometricSpec::ordinary(n, &[a], &[b], z)
            };
            let terms = spec.terms().unwrap();
            let fwd: f64 = terms.iter().sum();
            let rev: f64 = terms.iter().rev().sum();
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            prop_assert!((fwd - rev).abs() <= 1e-13 * scale);
        }

        #[test]
        fn logreal_roundtrip(x in -1e6f64..1e6) {
            let y = LogReal::from_f64(x).to_f64();
            prop_assert!((x - y).abs() <= 1e-14 * x.abs());
        }
    }
}
