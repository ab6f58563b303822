//! Cross-checks of the analytic solutions against each other and against
//! the numerical eigensolver.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::doubling::{check_constraints, DoublingError, Mode};
use crate::models::{Model, ModelError, ModelParams};
use crate::tridiag::{TridiagError, TridiagonalHamiltonian};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Doubling(#[from] DoublingError),
    #[error(transparent)]
    Tridiag(#[from] TridiagError),
    #[error("tolerance {0} is looser than 1e-6; only tightening is allowed")]
    LooseTolerance(f64),
}

/// Thresholds for each check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub constraint_tol: f64,
    pub spectrum_tol: f64,
    pub residual_tol: f64,
    pub orthogonality_tol: f64,
    pub norm_tol: f64,
    pub closed_form_tol: f64,
    pub christoffel_tol: f64,
    pub christoffel_samples: usize,
    /// Christoffel checks use forward recurrence and are skipped above this
    /// family length.
    pub christoffel_max_n: usize,
    pub seed: u64,
    /// Multiplies the identity tolerances reported by the models.
    pub identity_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            constraint_tol: 1e-12,
            spectrum_tol: 1e-10,
            residual_tol: 1e-11,
            orthogonality_tol: 1e-9,
            norm_tol: 1e-8,
            closed_form_tol: 1e-10,
            christoffel_tol: 1e-10,
            christoffel_samples: 50,
            christoffel_max_n: 20,
            seed: 0x55_4d_0b_1e,
            identity_scale: 1.0,
        }
    }
}

impl VerifyOptions {
    /// Caps every threshold at `tol`. Values above `1e-6` are refused.
    pub fn tightened(mut self, tol: f64) -> Result<Self, VerifyError> {
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(VerifyError::LooseTolerance(tol));
        }
        for t in [
            &mut self.constraint_tol,
            &mut self.spectrum_tol,
            &mut self.residual_tol,
            &mut self.orthogonality_tol,
            &mut self.norm_tol,
            &mut self.closed_form_tol,
            &mut self.christoffel_tol,
        ] {
            *t = t.min(tol);
        }
        self.identity_scale = self.identity_scale.min(tol / 1e-10);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub model: String,
    pub parameters: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Deterministic sample points for the Christoffel checks, uniform on
/// `[-X, X]` with `X` slightly beyond the spectrum.
pub fn christoffel_samples(model: &Model, count: usize, seed: u64) -> Vec<f64> {
    let seq = model.sequence();
    let (mp, mm) = seq.mu();
    let spec = model.closed_form_spectrum();
    let x = 1.1 * inf_norm(&spec).max(1.0);
    let scale = 1f64.max(seq.solution().tau0.abs());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let s: f64 = rng.gen_range(-x..x);
        let near_mu = (s - mp).abs() < 1e-6 * x || (s - mm).abs() < 1e-6 * x;
        if !near_mu && (seq.pi(s) - seq.solution().tau0).abs() > 1e-9 * scale {
            out.push(s);
        }
    }
    out
}

/// Runs every check on one model.
pub fn verify_model(model: &Model, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let seq = model.sequence();
    let mut checks = Vec::new();

    let constraints = check_constraints(seq.family(), seq.solution(), opts.constraint_tol)?;
    checks.push(CheckResult::new("constraints", constraints.max_residual, opts.constraint_tol));

    let h = TridiagonalHamiltonian::from_sequence(seq)?;
    let h_norm = h.inf_norm();
    let spectrum = seq.spectrum()?;
    let analytic: Vec<f64> = spectrum.iter().map(|(_, x)| *x).collect();
    let oracle = h.eigenvalues(h.default_tol())?;
    let scale = model.spectrum_scale();
    let diff = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
    };
    checks.push(CheckResult::new("spectrum-vs-oracle", diff(&analytic, &oracle), opts.spectrum_tol));
    checks.push(CheckResult::new(
        "spectrum-closed-form",
        diff(&analytic, &model.closed_form_spectrum()),
        opts.spectrum_tol,
    ));

    let mut residual: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    let mut closed_dev: f64 = 0.0;
    let mut unit = Vec::with_capacity(spectrum.len());
    for &(mode, x) in &spectrum {
        let q = seq.eigenvector(mode)?;
        let q_inf = inf_norm(&q);
        residual = residual.max(h.residual(x, &q)? / (h_norm.max(f64::MIN_POSITIVE) * q_inf));
        let nsq: f64 = q.iter().map(|v| v * v).sum();
        norm_dev = norm_dev.max((nsq / model.norm_sq(mode)? - 1.0).abs());
        let even = model.closed_form_even(mode)?;
        let ed = even
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (i, e)| m.max((q[2 * i] - e).abs()));
        closed_dev = closed_dev.max(ed / q_inf);
        let norm = nsq.sqrt();
        unit.push(q.into_iter().map(|v| v / norm).collect::<Vec<_>>());
    }
    checks.push(CheckResult::new("residual", residual, opts.residual_tol));
    let mut ortho: f64 = 0.0;
    for i in 0..unit.len() {
        for j in i..unit.len() {
            let dot: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
            ortho = ortho.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    checks.push(CheckResult::new("orthogonality", ortho, opts.orthogonality_tol));
    checks.push(CheckResult::new("norms", norm_dev, opts.norm_tol));
    checks.push(CheckResult::new("closed-form-eigvecs", closed_dev, opts.closed_form_tol));

    if seq.n() <= opts.christoffel_max_n {
        let samples = christoffel_samples(model, opts.christoffel_samples, opts.seed);
        let c = seq.christoffel_check(&samples)?;
        checks.push(CheckResult::new("christoffel", c.max(), opts.christoffel_tol));
    }

    for id in model.identity_checks()? {
        checks.push(CheckResult::new(id.name, id.residual, id.tolerance * opts.identity_scale));
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        model: model.name().to_string(),
        parameters: model.parameters(),
        checks,
        pass,
    })
}

/// Outcome of one grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SweepEntry {
    Verified(VerificationReport),
    Skipped {
        model: String,
        parameters: BTreeMap<String, f64>,
        reason: String,
    },
}

impl SweepEntry {
    /// Skipped entries count as passing.
    pub fn pass(&self) -> bool {
        match self {
            SweepEntry::Verified(r) => r.pass,
            SweepEntry::Skipped { .. } => true,
        }
    }
}

/// Builds and verifies every parameter set. Sets that fail to build are
/// recorded as skipped with the construction error as the reason; other
/// errors abort the sweep. Entries come back in grid order.
pub fn sweep(params: &[ModelParams], opts: &VerifyOptions) -> Result<Vec<SweepEntry>, VerifyError> {
    params
        .par_iter()
        .map(|p| match Model::build(*p) {
            Ok(m) => verify_model(&m, opts).map(SweepEntry::Verified),
            Err(e) => Ok(SweepEntry::Skipped {
                model: p.name().to_string(),
                parameters: p.parameters(),
                reason: e.to_string(),
            }),
        })
        .collect()
}

/// The mode labels of a model in ascending eigenvalue order.
pub fn modes(model: &Model) -> Result<Vec<Mode>, VerifyError> {
    Ok(model.sequence().spectrum()?.into_iter().map(|(m, _)| m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ChebyshevSshParams, KrawtchoukSshParams};

    fn ssh(n: usize, delta: f64) -> Model {
        Model::build(ModelParams::Ssh(ChebyshevSshParams::new(n, delta))).unwrap()
    }

    #[test]
    fn tightening_only() {
        let o = VerifyOptions::default().tightened(1e-11).unwrap();
        assert_eq!(o.constraint_tol, 1e-12);
        assert_eq!(o.residual_tol, 1e-11);
        assert_eq!(o.spectrum_tol, 1e-11);
        assert_eq!(o.norm_tol, 1e-11);
        assert!(matches!(
            VerifyOptions::default().tightened(1e-5),
            Err(VerifyError::LooseTolerance(_))
        ));
        assert!(VerifyOptions::default().tightened(0.0).is_err());
    }

    #[test]
    fn samples_are_reproducible() {
        let m = ssh(6, 0.3);
        let a = christoffel_samples(&m, 50, 7);
        assert_eq!(a, christoffel_samples(&m, 50, 7));
        assert_ne!(a, christoffel_samples(&m, 50, 8));
        assert_eq!(a.len(), 50);
    }

    #[test]
    fn check_order() {
        let r = verify_model(&ssh(4, 0.5), &VerifyOptions::default()).unwrap();
        let names: Vec<_> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "constraints",
                "spectrum-vs-oracle",
                "spectrum-closed-form",
                "residual",
                "orthogonality",
                "norms",
                "closed-form-eigvecs",
                "christoffel",
                "family-orthogonality"
            ]
        );
        assert!(r.pass);
        assert_eq!(r.parameters["N"], 4.0);
    }

    #[test]
    fn christoffel_skipped_for_long_chains() {
        let opts = VerifyOptions {
            christoffel_max_n: 3,
            ..VerifyOptions::default()
        };
        let r = verify_model(&ssh(4, 0.5), &opts).unwrap();
        assert!(r.check("christoffel").is_none());
    }

    #[test]
    fn sweep_records_skips() {
        let grid = [
            ModelParams::Ssh(ChebyshevSshParams::new(3, 0.2)),
            ModelParams::Ssh(ChebyshevSshParams::new(3, 1.0)),
            ModelParams::Krawtchouk(KrawtchoukSshParams { n: 3, p: 1.5 }),
        ];
        let out = sweep(&grid, &VerifyOptions::default()).unwrap();
        assert!(matches!(&out[0], SweepEntry::Verified(r) if r.pass));
        match &out[1] {
            SweepEntry::Skipped { model, reason, .. } => {
                assert_eq!(model, "ssh");
                assert_eq!(reason, "delta must satisfy |delta| < 1");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&out[2], SweepEntry::Skipped { .. }));
        assert!(out.iter().all(SweepEntry::pass));
    }
}
