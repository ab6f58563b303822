use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssh_doubling::models::scan::known_good;
use ssh_doubling::models::{ChebyshevSshParams, KrawtchoukSshParams, QRacahVariant};
use ssh_doubling::ModelParams;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "ssh-doubling", version, about = "Exactly solvable inhomogeneous SSH chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sorted closed-form spectrum.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Also run the numerical eigensolver and report the deviation.
        #[arg(long)]
        oracle: bool,
    },
    /// Eigenvectors with closed-form norms and eigen-relation residuals.
    Eigvecs {
        #[command(flatten)]
        common: Common,
        /// `all`, `zero`, an index into the sorted spectrum, `plus:k` or `minus:k`.
        #[arg(long, default_value = "all")]
        which: String,
    },
    /// Coupling profile `t+_n, t-_n` and diagonal entries.
    Couplings {
        #[command(flatten)]
        common: Common,
    },
    /// Run every check on one model, or on a whole grid with `--scan default`.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scan: Option<String>,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Spectrum { common, .. }
            | Command::Eigvecs { common, .. }
            | Command::Couplings { common }
            | Command::Verify { common, .. } => common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Ssh,
    SshMu,
    Krawtchouk,
    Qracah1,
    Qracah2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_plus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_minus: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub qr_delta: Option<f64>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Tightens every verification threshold to at most this value.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key=value` file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Multiply one chain coupling by `1 + rel` before running (`index:rel`).
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub perturb_coupling: Option<String>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("config: cannot parse {key}={v}")))
}

impl Common {
    /// Fills unset flags from the `--config` file, if any.
    pub fn merged(&self) -> Result<Common, CliError> {
        let mut out = self.clone();
        let Some(path) = &self.config else {
            return Ok(out);
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let mut seen = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", lineno + 1))
            })?;
            seen.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        for (k, v) in &seen {
            let v = v.as_str();
            match k.as_str() {
                "model" => {
                    if out.model.is_none() {
                        let m = ModelKind::from_str(v, true)
                            .map_err(|_| CliError::Usage(format!("config: unknown model {v}")))?;
                        out.model = Some(m);
                    }
                }
                "format" => {
                    if out.format.is_none() {
                        let f = Format::from_str(v, true)
                            .map_err(|_| CliError::Usage(format!("config: unknown format {v}")))?;
                        out.format = Some(f);
                    }
                }
                "N" => fill(&mut out.n, k, v)?,
                "delta" => fill(&mut out.delta, k, v)?,
                "mu-plus" => fill(&mut out.mu_plus, k, v)?,
                "mu-minus" => fill(&mut out.mu_minus, k, v)?,
                "p" => fill(&mut out.p, k, v)?,
                "q" => fill(&mut out.q, k, v)?,
                "alpha" => fill(&mut out.alpha, k, v)?,
                "beta" => fill(&mut out.beta, k, v)?,
                "qr-delta" => fill(&mut out.qr_delta, k, v)?,
                "tol" => fill(&mut out.tol, k, v)?,
                "out" => {
                    if out.out.is_none() {
                        out.out = Some(PathBuf::from(v));
                    }
                }
                other => return Err(CliError::Usage(format!("config: unknown key {other}"))),
            }
        }
        Ok(out)
    }

    pub fn model_kind(&self) -> ModelKind {
        self.model.unwrap_or(ModelKind::Ssh)
    }

    /// Model parameters with defaults for anything unset: `N = 10`,
    /// `δ = 0`, `p = 0.5`, and for q-Racah `q = 0.5` with a known admissible
    /// `(α, β, δ)`.
    pub fn params(&self) -> ModelParams {
        let n = self.n.unwrap_or(10);
        match self.model_kind() {
            ModelKind::Ssh | ModelKind::SshMu => ModelParams::Ssh(
                ChebyshevSshParams::new(n, self.delta.unwrap_or(0.0))
                    .with_mu(self.mu_plus.unwrap_or(0.0), self.mu_minus.unwrap_or(0.0)),
            ),
            ModelKind::Krawtchouk => ModelParams::Krawtchouk(KrawtchoukSshParams {
                n,
                p: self.p.unwrap_or(0.5),
            }),
            ModelKind::Qracah1 | ModelKind::Qracah2 => {
                let variant = if self.model_kind() == ModelKind::Qracah1 {
                    QRacahVariant::I
                } else {
                    QRacahVariant::II
                };
                let q = self.q.unwrap_or(0.5);
                let mut p = known_good(variant, n, q);
                p.alpha = self.alpha.unwrap_or(p.alpha);
                p.beta = self.beta.unwrap_or(p.beta);
                p.delta = self.qr_delta.unwrap_or(p.delta);
                ModelParams::QRacah(p)
            }
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self.model_kind() {
            ModelKind::Ssh => "ssh",
            ModelKind::SshMu => "ssh-mu",
            ModelKind::Krawtchouk => "krawtchouk",
            ModelKind::Qracah1 => "qracah1",
            ModelKind::Qracah2 => "qracah2",
        }
    }

    pub fn perturbation(&self) -> Result<Option<(usize, f64)>, CliError> {
        let Some(s) = &self.perturb_coupling else {
            return Ok(None);
        };
        let bad = || CliError::Usage(format!("--perturb-coupling expects index:rel, got {s}"));
        let (i, r) = s.split_once(':').ok_or_else(bad)?;
        Ok(Some((i.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?)))
    }
}

fn fill<T: std::str::FromStr>(slot: &mut Option<T>, key: &str, v: &str) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(parse_value(key, v)?);
    }
    Ok(())
}
