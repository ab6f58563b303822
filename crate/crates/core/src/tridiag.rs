//! The single-particle chain Hamiltonian and an independent eigensolver.
//!
//! Eigenvalues come from bisection on Sturm counts, eigenvectors from inverse
//! iteration with reorthogonalization inside clusters. Nothing here knows
//! about orthogonal polynomials, which is the point: it is the oracle the
//! closed forms are checked against.

use serde::Serialize;
use thiserror::Error;

use crate::doubling::QSequence;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TridiagError {
    #[error("matrix must have at least one row")]
    Empty,
    #[error("off-diagonal has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("coupling {index} vanishes")]
    ZeroCoupling { index: usize },
    #[error("vector has length {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("residual of the zero vector is undefined")]
    ZeroVector,
    #[error("bisection for eigenvalue {index} did not converge in [{lo}, {hi}]")]
    NonConvergence { index: usize, lo: f64, hi: f64 },
}

/// Symmetric tridiagonal matrix; only one off-diagonal is stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TridiagonalHamiltonian {
    diagonal: Vec<f64>,
    offdiagonal: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Analytic,
    NumericOracle,
}

/// Eigenvalues with eigenvectors as columns (`eigenvectors[j]` belongs to
/// `eigenvalues[j]`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residual_bound: f64,
    pub source: Source,
}

impl TridiagonalHamiltonian {
    pub fn new(diagonal: Vec<f64>, offdiagonal: Vec<f64>) -> Result<Self, TridiagError> {
        if diagonal.is_empty() {
            return Err(TridiagError::Empty);
        }
        if offdiagonal.len() + 1 != diagonal.len() {
            return Err(TridiagError::Length {
                got: offdiagonal.len(),
                expected: diagonal.len() - 1,
            });
        }
        Ok(TridiagonalHamiltonian {
            diagonal,
            offdiagonal,
        })
    }

    /// The chain of a doubled sequence: couplings `t+_0, t-_0, t+_1, ...`
    /// and diagonal `μ+, μ-, μ+, ...`. In truncation mode the last site is
    /// dropped.
    pub fn from_sequence(seq: &QSequence) -> Result<Self, TridiagError> {
        let size = seq.size();
        let sol = seq.solution();
        let (mp, mm) = seq.mu();
        let diagonal = (0..size).map(|i| if i % 2 == 0 { mp } else { mm }).collect();
        let offdiagonal: Vec<f64> = (0..size - 1)
            .map(|i| {
                if i % 2 == 0 {
                    sol.tp(i / 2)
                } else {
                    sol.tm((i / 2) as isize)
                }
            })
            .collect();
        if let Some(index) = offdiagonal.iter().position(|t| *t == 0.0) {
            return Err(TridiagError::ZeroCoupling { index });
        }
        Self::new(diagonal, offdiagonal)
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn offdiagonal(&self) -> &[f64] {
        &self.offdiagonal
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let n = self.size();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiagonal[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiagonal[i].abs() } else { 0.0 };
                self.diagonal[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, TridiagError> {
        let n = self.size();
        if v.len() != n {
            return Err(TridiagError::Dimension {
                got: v.len(),
                expected: n,
            });
        }
        Ok((0..n)
            .map(|i| {
                let mut s = self.diagonal[i] * v[i];
                if i > 0 {
                    s += self.offdiagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiagonal[i] * v[i + 1];
                }
                s
            })
            .collect())
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of the
    /// `LDLᵀ` factorization of `H - x`).
    pub fn sturm_count(&self, x: f64) -> usize {
        let guard = f64::MIN_POSITIVE.sqrt() * self.inf_norm().max(1.0);
        let mut count = 0;
        let mut d = self.diagonal[0] - x;
        for i in 0..self.size() {
            if i > 0 {
                let e = self.offdiagonal[i - 1];
                d = self.diagonal[i] - x - e * e / d;
            }
            if d == 0.0 {
                d = -guard;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiagonal[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiagonal[i].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        (lo - pad, hi + pad)
    }

    /// All eigenvalues ascending, each bisected to an interval of width `tol`
    /// (or until the midpoint no longer separates the endpoints).
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>, TridiagError> {
        if self.size() == 1 {
            let d = self.diagonal[0];
            return Ok(vec![if d == 0.0 { 0.0 } else { d }]);
        }
        let (lo, hi) = self.gershgorin();
        (0..self.size())
            .map(|j| {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..2000 {
                    let mid = 0.5 * (a + b);
                    if b - a <= tol || mid <= a || mid >= b {
                        let x = 0.5 * (a + b);
                        return Ok(if x == 0.0 { 0.0 } else { x });
                    }
                    if self.sturm_count(mid) > j {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                Err(TridiagError::NonConvergence { index: j, lo: a, hi: b })
            })
            .collect()
    }

    /// Default bisection tolerance, a few ulps of `‖H‖∞`.
    pub fn default_tol(&self) -> f64 {
        4.0 * f64::EPSILON * self.inf_norm().max(f64::MIN_POSITIVE)
    }

    /// Full eigensystem: bisection plus inverse iteration.
    pub fn eig_oracle(&self, tol: f64) -> Result<EigenSystem, TridiagError> {
        let values = self.eigenvalues(tol)?;
        let norm = self.inf_norm().max(f64::MIN_POSITIVE);
        let n = self.size();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut cluster_start = 0;
        for (j, &lambda) in values.iter().enumerate() {
            if j > 0 && values[j] - values[j - 1] >= 1e-8 * norm {
                cluster_start = j;
            }
            let mut v: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.1 * (((i * 7 + j * 13) % 17) as f64 / 17.0))
                .collect();
            // perturb the shift so that an exact eigenvalue does not make the
            // system singular
            let shift = lambda + f64::EPSILON * norm;
            for _ in 0..3 {
                v = self.shifted_solve(shift, &v, norm);
                for u in &vectors[cluster_start..j] {
                    let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
                }
                normalize(&mut v);
            }
            let imax = v
                .iter()
                .enumerate()
                .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
            if v[imax] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            vectors.push(v);
        }
        let mut residual_bound: f64 = 0.0;
        for (x, v) in values.iter().zip(&vectors) {
            residual_bound = residual_bound.max(self.residual(*x, v)?);
        }
        Ok(EigenSystem {
            eigenvalues: values,
            eigenvectors: vectors,
            residual_bound,
            source: Source::NumericOracle,
        })
    }

    /// Solves `(H - σ) y = b` by Gaussian elimination with partial pivoting;
    /// vanishing pivots are replaced by `ε‖H‖`.
    fn shifted_solve(&self, sigma: f64, rhs: &[f64], norm: f64) -> Vec<f64> {
        let n = self.size();
        let tiny = f64::EPSILON * norm;
        let mut d: Vec<f64> = self.diagonal.iter().map(|x| x - sigma).collect();
        let mut du: Vec<f64> = self.offdiagonal.clone();
        let mut dl: Vec<f64> = self.offdiagonal.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
                b.swap(i, i + 1);
                b[i + 1] -= fact * b[i];
            }
            dl[i] = 0.0;
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        b[n - 1] /= d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
        b
    }

    /// `‖Hv - xv‖∞ / (‖H‖∞ ‖v‖∞)`.
    pub fn residual(&self, x: f64, v: &[f64]) -> Result<f64, TridiagError> {
        let hv = self.matvec(v)?;
        let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if vmax == 0.0 {
            return Err(TridiagError::ZeroVector);
        }
        let r = hv
            .iter()
            .zip(v)
            .fold(0.0f64, |m, (h, v)| m.max((h - x * v).abs()));
        Ok(r / (self.inf_norm().max(f64::MIN_POSITIVE) * vmax))
    }
}

fn normalize(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if scale == 0.0 {
        return;
    }
    v.iter_mut().for_each(|x| *x /= scale);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(d: Vec<f64>, e: Vec<f64>) -> TridiagonalHamiltonian {
        TridiagonalHamiltonian::new(d, e).unwrap()
    }

    #[test]
    fn small_examples() {
        let one = h(vec![0.0], vec![]);
        assert_eq!(one.eigenvalues(1e-14).unwrap(), vec![0.0]);
        let two = h(vec![0.0, 0.0], vec![0.7]);
        let ev = two.eigenvalues(1e-15).unwrap();
        assert!((ev[0] + 0.7).abs() < 1e-14 && (ev[1] - 0.7).abs() < 1e-14);
        let three = h(vec![0.0; 3], vec![0.5, 0.5]);
        let ev = three.eigenvalues(1e-15).unwrap();
        let r = 0.5f64.sqrt();
        for (a, b) in ev.iter().zip([-r, 0.0, r]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_errors() {
        assert_eq!(
            TridiagonalHamiltonian::new(vec![], vec![]),
            Err(TridiagError::Empty)
        );
        assert!(TridiagonalHamiltonian::new(vec![0.0; 3], vec![1.0]).is_err());
        let m = h(vec![0.0; 3], vec![0.5, 0.5]);
        assert_eq!(m.residual(0.0, &[0.0; 3]), Err(TridiagError::ZeroVector));
        assert!(matches!(
            m.residual(0.0, &[1.0]),
            Err(TridiagError::Dimension { .. })
        ));
    }

    #[test]
    fn oracle_vectors_are_orthonormal_eigenvectors() {
        let m = h(
            vec![0.3, -0.2, 0.3, -0.2, 0.3, -0.2, 0.3],
            vec![0.9, 0.1, 0.9, 0.1, 0.9, 0.1],
        );
        let sys = m.eig_oracle(m.default_tol() * 1e-3).unwrap();
        assert!(sys.residual_bound < 1e-13, "{}", sys.residual_bound);
        for i in 0..7 {
            for j in 0..7 {
                let d: f64 = sys.eigenvectors[i]
                    .iter()
                    .zip(&sys.eigenvectors[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_cluster_is_orthogonalized() {
        // two decoupled identical blocks
        let m = h(vec![0.0; 4], vec![1.0, 1e-300, 1.0]);
        let sys = m.eig_oracle(1e-15).unwrap();
        let d: f64 = sys.eigenvectors[0]
            .iter()
            .zip(&sys.eigenvectors[1])
            .map(|(a, b)| a * b)
            .sum();
        assert!(d.abs() < 1e-12);
        assert!(sys.residual_bound < 1e-13);
    }

    proptest! {
        #[test]
        fn sturm_count_matches_bisection(
            d in prop::collection::vec(-2.0f64..2.0, 2..12),
            shift in -5.0f64..5.0,
        ) {
            let n = d.len();
            let e: Vec<f64> = (0..n - 1).map(|i| 0.3 + 0.1 * i as f64).collect();
            let m = h(d, e);
            let ev = m.eigenvalues(1e-13).unwrap();
            let below = ev.iter().filter(|x| **x < shift).count();
            let near = ev.iter().any(|x| (x - shift).abs() < 1e-9);
            prop_assume!(!near);
            prop_assert_eq!(m.sturm_count(shift), below);
        }

        #[test]
        fn zero_diagonal_spectrum_is_symmetric(e in prop::collection::vec(0.1f64..3.0, 1..20)) {
            let n = e.len() + 1;
            let m = h(vec![0.0; n], e);
            let tol = m.default_tol();
            let ev = m.eigenvalues(tol).unwrap();
            for i in 0..n {
                prop_assert!((ev[i] + ev[n - 1 - i]).abs() <= 2.0 * tol + 1e-15);
            }
        }
    }
}
