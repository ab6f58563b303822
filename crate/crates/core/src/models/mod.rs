//! The exactly solvable chains.

pub mod chebyshev;
pub mod krawtchouk;
pub mod qracah;
pub mod scan;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::doubling::{DoublingError, Mode, QSequence};
use crate::recurrence::RecurrenceError;
use crate::specialfn::SpecialFnError;

pub use chebyshev::{chebyshev_model, ChebyshevModel, ChebyshevSshParams};
pub use krawtchouk::{krawtchouk_model, KrawtchoukModel, KrawtchoukSshParams};
pub use qracah::{qracah_model, QRacahModel, QRacahSshParams, QRacahVariant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0}")]
    Domain(String),
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("mode index {0} out of range")]
    Index(usize),
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
    #[error(transparent)]
    Doubling(#[from] DoublingError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

pub(crate) fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.into_iter().map(|x| if x == 0.0 { 0.0 } else { x }).collect()
}

/// Parameters of any of the shipped chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Ssh(ChebyshevSshParams),
    Krawtchouk(KrawtchoukSshParams),
    QRacah(QRacahSshParams),
}

impl ModelParams {
    /// `ssh`, `ssh-mu`, `krawtchouk`, `qracah1` or `qracah2`.
    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::Ssh(p) if p.mu_plus != 0.0 || p.mu_minus != 0.0 => "ssh-mu",
            ModelParams::Ssh(_) => "ssh",
            ModelParams::Krawtchouk(_) => "krawtchouk",
            ModelParams::QRacah(p) => match p.variant {
                QRacahVariant::I => "qracah1",
                QRacahVariant::II => "qracah2",
            },
        }
    }

    /// The defining parameters by name.
    pub fn parameters(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            out.insert(k.to_string(), v);
        };
        match self {
            ModelParams::Ssh(p) => {
                put("N", p.n as f64);
                put("delta", p.delta);
                put("mu_plus", p.mu_plus);
                put("mu_minus", p.mu_minus);
            }
            ModelParams::Krawtchouk(p) => {
                put("N", p.n as f64);
                put("p", p.p);
            }
            ModelParams::QRacah(p) => {
                put("N", p.n as f64);
                put("q", p.q);
                put("alpha", p.alpha);
                put("beta", p.beta);
                put("delta", p.delta);
            }
        }
        out
    }
}

/// One of the shipped chains, built and ready to diagonalize.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Chebyshev(ChebyshevModel),
    Krawtchouk(KrawtchoukModel),
    QRacah(QRacahModel),
}

/// A model-specific identity and its largest residual.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl Model {
    pub fn build(params: ModelParams) -> Result<Model, ModelError> {
        Ok(match params {
            ModelParams::Ssh(p) => Model::Chebyshev(chebyshev_model(p)?),
            ModelParams::Krawtchouk(p) => Model::Krawtchouk(krawtchouk_model(p)?),
            ModelParams::QRacah(p) => Model::QRacah(qracah_model(p)?),
        })
    }

    pub fn params(&self) -> ModelParams {
        match self {
            Model::Chebyshev(m) => ModelParams::Ssh(*m.params()),
            Model::Krawtchouk(m) => ModelParams::Krawtchouk(*m.params()),
            Model::QRacah(m) => ModelParams::QRacah(*m.params()),
        }
    }

    /// `ssh`, `ssh-mu`, `krawtchouk`, `qracah1` or `qracah2`.
    pub fn name(&self) -> &'static str {
        self.params().name()
    }

    /// The defining parameters by name.
    pub fn parameters(&self) -> BTreeMap<String, f64> {
        self.params().parameters()
    }

    pub fn sequence(&self) -> &QSequence {
        match self {
            Model::Chebyshev(m) => m.sequence(),
            Model::Krawtchouk(m) => m.sequence(),
            Model::QRacah(m) => m.sequence(),
        }
    }

    fn sequence_mut(&mut self) -> &mut QSequence {
        match self {
            Model::Chebyshev(m) => m.sequence_mut(),
            Model::Krawtchouk(m) => m.sequence_mut(),
            Model::QRacah(m) => m.sequence_mut(),
        }
    }

    /// Multiplies chain coupling `index` (in chain order `t+_0, t-_0, ...`)
    /// by `1 + rel`, leaving everything else as is.
    pub fn perturb_coupling(&mut self, index: usize, rel: f64) -> Result<(), ModelError> {
        Ok(self.sequence_mut().perturb_coupling(index, rel)?)
    }

    /// The spectrum from the closed-form expressions, sorted ascending.
    pub fn closed_form_spectrum(&self) -> Vec<f64> {
        match self {
            Model::Chebyshev(m) => m.closed_form_spectrum(),
            Model::Krawtchouk(m) => m.closed_form_spectrum(),
            Model::QRacah(m) => m.closed_form_spectrum(),
        }
    }

    /// Closed-form even components `Q_{2n}` of the eigenvector of a mode.
    pub fn closed_form_even(&self, mode: Mode) -> Result<Vec<f64>, ModelError> {
        match self {
            Model::Chebyshev(m) => m.closed_form_even(mode),
            Model::Krawtchouk(m) => m.closed_form_even(mode),
            Model::QRacah(m) => m.closed_form_even(mode),
        }
    }

    /// Closed-form squared norm `Q(x)ᵀQ(x)` of a mode.
    pub fn norm_sq(&self, mode: Mode) -> Result<f64, ModelError> {
        match self {
            Model::Chebyshev(m) => m.norm_sq(mode),
            Model::Krawtchouk(m) => m.norm_sq(mode),
            Model::QRacah(m) => m.norm_sq(mode),
        }
    }

    /// Scale for spectrum comparisons: `1` for the Chebyshev and Krawtchouk
    /// chains (absolute), the largest `|x|` for q-Racah chains.
    pub fn spectrum_scale(&self) -> f64 {
        match self {
            Model::QRacah(m) => m
                .closed_form_spectrum()
                .iter()
                .fold(f64::MIN_POSITIVE, |a, x| a.max(x.abs())),
            _ => 1.0,
        }
    }

    /// Family orthogonality plus the identities special to each model.
    pub fn identity_checks(&self) -> Result<Vec<IdentityCheck>, ModelError> {
        let check = |name, residual, tolerance| IdentityCheck {
            name,
            residual,
            tolerance,
        };
        Ok(match self {
            Model::Chebyshev(m) => vec![check(
                "family-orthogonality",
                m.sequence().family().check_orthogonality()?.max_deviation,
                1e-10,
            )],
            Model::Krawtchouk(m) => {
                let mut v = vec![
                    check("family-orthogonality", m.family_orthogonality()?, 1e-10),
                    check("contiguity", m.contiguity_residual()?, 1e-10),
                ];
                if m.params().n <= 20 {
                    v.push(check("self-duality", m.self_duality_residual()?, 1e-12));
                }
                v
            }
            Model::QRacah(m) => vec![
                check("family-orthogonality", m.family_orthogonality()?, 1e-10),
                check("contiguity", m.contiguity_residual()?, 1e-10),
                check("duality", m.duality_residual()?, 1e-10),
                check("weight-identity", m.weight_identity_residual()?, 1e-10),
            ],
        })
    }
}
