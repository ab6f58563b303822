//! Command-line front end: spectra, eigenvectors, coupling profiles and
//! verification reports as JSON or CSV.

mod args;
mod output;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use ssh_doubling::models::scan::default_grid;
use ssh_doubling::verify::{sweep, SweepEntry};
use ssh_doubling::{verify_model, Mode, Model, TridiagonalHamiltonian, VerifyOptions};
use thiserror::Error;

use args::{Cli, Command, Common, Format};
use output::{Document, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] ssh_doubling::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
            _ => 2,
        }
    }
}

fn lib<E: Into<ssh_doubling::Error>>(e: E) -> CliError {
    CliError::Lib(e.into())
}

struct Rendered {
    text: String,
    pass: bool,
}

#[derive(Serialize)]
struct SpectrumPayload {
    eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
}

#[derive(Serialize)]
struct EigvecEntry {
    eigenvalue: f64,
    mode: Mode,
    components: Vec<f64>,
    norm_sq: f64,
    residual: f64,
}

#[derive(Serialize)]
struct EigvecPayload {
    vectors: Vec<EigvecEntry>,
}

#[derive(Serialize)]
struct CouplingRow {
    n: usize,
    t_plus: f64,
    t_minus: f64,
    /// Diagonal entries on sites `2n` and `2n+1`.
    mu: [f64; 2],
}

#[derive(Serialize)]
struct CouplingPayload {
    rows: Vec<CouplingRow>,
    truncated: bool,
}

#[derive(Serialize)]
struct ScanSummary {
    verified: usize,
    skipped: usize,
    failed: usize,
}

#[derive(Serialize)]
struct ScanPayload {
    summary: ScanSummary,
    entries: Vec<SweepEntry>,
}

fn build(common: &Common) -> Result<Model, CliError> {
    let mut model = Model::build(common.params()).map_err(lib)?;
    if let Some((index, rel)) = common.perturbation()? {
        model.perturb_coupling(index, rel).map_err(lib)?;
    }
    Ok(model)
}

fn options(common: &Common) -> Result<VerifyOptions, CliError> {
    let opts = VerifyOptions::default();
    match common.tol {
        Some(t) => opts.tightened(t).map_err(lib),
        None => Ok(opts),
    }
}

fn select(model: &Model, which: &str) -> Result<Vec<(Mode, f64)>, CliError> {
    let spectrum = model.sequence().spectrum().map_err(lib)?;
    let bad = || CliError::Usage(format!("--which {which}: no such eigenvector"));
    let pick = |mode: Mode| {
        spectrum
            .iter()
            .find(|(m, _)| *m == mode)
            .copied()
            .map(|e| vec![e])
            .ok_or_else(bad)
    };
    match which {
        "all" => Ok(spectrum.clone()),
        "zero" => pick(Mode::Zero),
        _ => {
            if let Some(k) = which.strip_prefix("plus:") {
                pick(Mode::Plus(k.parse().map_err(|_| bad())?))
            } else if let Some(k) = which.strip_prefix("minus:") {
                pick(Mode::Minus(k.parse().map_err(|_| bad())?))
            } else {
                let i: usize = which.parse().map_err(|_| bad())?;
                spectrum.get(i).map(|e| vec![*e]).ok_or_else(bad)
            }
        }
    }
}

fn spectrum(common: &Common, oracle: bool) -> Result<Rendered, CliError> {
    let model = build(common)?;
    let eigenvalues = model.sequence().eigenvalues().map_err(lib)?;
    let (oracle, max_deviation) = if oracle {
        let h = TridiagonalHamiltonian::from_sequence(model.sequence()).map_err(lib)?;
        let o = h.eigenvalues(h.default_tol()).map_err(lib)?;
        let dev = eigenvalues
            .iter()
            .zip(&o)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        (Some(o), Some(dev))
    } else {
        (None, None)
    };
    let text = match common.format.unwrap_or_default() {
        Format::Json => {
            let payload = SpectrumPayload {
                eigenvalues,
                oracle,
                max_deviation,
            };
            Document::new("spectrum", &model, payload).to_json()?
        }
        Format::Csv => {
            let mut t = Table::new(["index", "eigenvalue"]);
            if let Some(o) = &oracle {
                t.push_header("oracle");
                for (i, (x, y)) in eigenvalues.iter().zip(o).enumerate() {
                    t.row([i.to_string(), output::float(*x), output::float(*y)]);
                }
            } else {
                for (i, x) in eigenvalues.iter().enumerate() {
                    t.row([i.to_string(), output::float(*x)]);
                }
            }
            t.finish()?
        }
    };
    Ok(Rendered { text, pass: true })
}

fn eigvecs(common: &Common, which: &str) -> Result<Rendered, CliError> {
    let model = build(common)?;
    let seq = model.sequence();
    let h = TridiagonalHamiltonian::from_sequence(seq).map_err(lib)?;
    let mut vectors = Vec::new();
    for (mode, x) in select(&model, which)? {
        let q = seq.eigenvector(mode).map_err(lib)?;
        let q_inf = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let residual = h.residual(x, &q).map_err(lib)? / (h.inf_norm() * q_inf);
        vectors.push(EigvecEntry {
            eigenvalue: x,
            mode,
            norm_sq: model.norm_sq(mode).map_err(lib)?,
            components: q,
            residual,
        });
    }
    let text = match common.format.unwrap_or_default() {
        Format::Json => Document::new("eigvecs", &model, EigvecPayload { vectors }).to_json()?,
        Format::Csv => {
            let mut t = Table::new(["site"]);
            for i in 0..vectors.len() {
                t.push_header(&format!("λ_{i}"));
            }
            for site in 0..seq.size() {
                let mut row = vec![site.to_string()];
                row.extend(vectors.iter().map(|v| output::float(v.components[site])));
                t.row(row);
            }
            t.finish()?
        }
    };
    Ok(Rendered { text, pass: true })
}

fn couplings(common: &Common) -> Result<Rendered, CliError> {
    let model = build(common)?;
    let seq = model.sequence();
    let sol = seq.solution();
    let (mp, mm) = seq.mu();
    let rows: Vec<CouplingRow> = (0..seq.n())
        .map(|n| CouplingRow {
            n,
            t_plus: sol.tp(n),
            t_minus: sol.tm(n as isize),
            mu: [mp, mm],
        })
        .collect();
    let truncated = seq.truncated();
    let text = match common.format.unwrap_or_default() {
        Format::Json => Document::new("couplings", &model, CouplingPayload { rows, truncated }).to_json()?,
        Format::Csv => {
            let mut t = Table::new(["n", "t_plus", "t_minus", "mu_even", "mu_odd"]);
            for r in &rows {
                t.row([
                    r.n.to_string(),
                    output::float(r.t_plus),
                    output::float(r.t_minus),
                    output::float(r.mu[0]),
                    output::float(r.mu[1]),
                ]);
            }
            t.finish()?
        }
    };
    Ok(Rendered { text, pass: true })
}

fn verify(common: &Common, scan: Option<&str>) -> Result<Rendered, CliError> {
    let opts = options(common)?;
    let format = common.format.unwrap_or_default();
    let Some(scan) = scan else {
        let model = build(common)?;
        let report = verify_model(&model, &opts).map_err(lib)?;
        let pass = report.pass;
        let text = match format {
            Format::Json => Document::new("verify", &model, &report).to_json()?,
            Format::Csv => {
                let mut t = Table::new(["check", "value", "tolerance", "pass"]);
                for c in &report.checks {
                    t.row([
                        c.name.clone(),
                        output::float(c.value),
                        output::float(c.tolerance),
                        c.pass.to_string(),
                    ]);
                }
                t.finish()?
            }
        };
        return Ok(Rendered { text, pass });
    };
    if scan != "default" {
        return Err(CliError::Usage(format!("--scan {scan}: only `default` is available")));
    }
    if common.perturb_coupling.is_some() {
        return Err(CliError::Usage("--perturb-coupling cannot be combined with --scan".into()));
    }
    let name = common.model_name();
    let grid = default_grid(name).ok_or_else(|| CliError::Usage(format!("no default grid for {name}")))?;
    let entries = sweep(&grid, &opts).map_err(lib)?;
    let verified = entries.iter().filter(|e| matches!(e, SweepEntry::Verified(_))).count();
    let failed = entries.iter().filter(|e| !e.pass()).count();
    let summary = ScanSummary {
        verified,
        skipped: entries.len() - verified,
        failed,
    };
    let text = match format {
        Format::Json => {
            let payload = ScanPayload { summary, entries };
            Document::scan(name, payload).to_json()?
        }
        Format::Csv => {
            let mut t = Table::new(["entry", "status", "parameters", "check", "value", "tolerance", "pass"]);
            for (i, e) in entries.iter().enumerate() {
                match e {
                    SweepEntry::Verified(r) => {
                        let params = output::param_string(&r.parameters);
                        for c in &r.checks {
                            t.row([
                                i.to_string(),
                                "verified".into(),
                                params.clone(),
                                c.name.clone(),
                                output::float(c.value),
                                output::float(c.tolerance),
                                c.pass.to_string(),
                            ]);
                        }
                    }
                    SweepEntry::Skipped { parameters, reason, .. } => t.row([
                        i.to_string(),
                        "skipped".into(),
                        output::param_string(parameters),
                        reason.clone(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]),
                }
            }
            t.finish()?
        }
    };
    Ok(Rendered { text, pass: failed == 0 })
}

fn run(cli: &Cli) -> Result<Rendered, CliError> {
    let common = cli.command.common().merged()?;
    match &cli.command {
        Command::Spectrum { oracle, .. } => spectrum(&common, *oracle),
        Command::Eigvecs { which, .. } => eigvecs(&common, which),
        Command::Couplings { .. } => couplings(&common),
        Command::Verify { scan, .. } => verify(&common, scan.as_deref()),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match cli.command.common().merged()?.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|r| emit(&cli, &r.text).map(|_| r.pass));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
