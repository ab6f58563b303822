//! Shipped parameter grids.
//!
//! The q-Racah scan walks a fixed lattice of `(α, β, δ)` values for each `q`
//! and `N` and keeps the sets for which [`qracah_model`] succeeds. The other
//! chains have small fixed grids.

use std::collections::BTreeMap;

use super::qracah::{qracah_model, QRacahSshParams, QRacahVariant};
use super::chebyshev::ChebyshevSshParams;
use super::krawtchouk::KrawtchoukSshParams;
use super::{ModelError, ModelParams};

pub const SCAN_VALUES: [f64; 8] = [-2.5, -1.5, -0.75, -0.25, 0.25, 0.75, 1.5, 2.5];
pub const SCAN_Q: [f64; 2] = [0.5, 0.8];
pub const SCAN_N: [usize; 9] = [1, 2, 3, 5, 8, 10, 15, 20, 30];

pub const SSH_DELTAS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];
pub const SSH_N: [usize; 3] = [2, 10, 50];
pub const SSH_MU: [(f64, f64); 3] = [(0.3, -0.2), (1.0, 1.0), (2.0, 0.0)];
pub const KRAWTCHOUK_P: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const KRAWTCHOUK_N: [usize; 3] = [3, 10, 30];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanResult {
    pub admissible: Vec<QRacahSshParams>,
    /// Rejected candidates, keyed by the first failing condition with the
    /// numbers stripped.
    pub rejected: BTreeMap<String, usize>,
}

impl ScanResult {
    pub fn total_rejected(&self) -> usize {
        self.rejected.values().sum()
    }
}

fn reason_key(e: &ModelError) -> String {
    let s = e.to_string();
    let cut = s.find(|c: char| c.is_ascii_digit() || c == '=').unwrap_or(s.len());
    s[..cut].trim_end_matches(['(', '_', ' ']).to_string()
}

/// Every lattice point `(α, β, δ) ∈ values³` for each `q` and `N`.
pub fn scan(variant: QRacahVariant, ns: &[usize], qs: &[f64], values: &[f64]) -> ScanResult {
    let mut out = ScanResult::default();
    for &n in ns {
        for &q in qs {
            for &alpha in values {
                for &beta in values {
                    for &delta in values {
                        let p = QRacahSshParams {
                            variant,
                            n,
                            q,
                            alpha,
                            beta,
                            delta,
                        };
                        match qracah_model(p) {
                            Ok(_) => out.admissible.push(p),
                            Err(e) => *out.rejected.entry(reason_key(&e)).or_default() += 1,
                        }
                    }
                }
            }
        }
    }
    out
}

/// The grid behind `--scan default` for a model name. q-Racah grids list
/// every lattice point, admissible or not.
pub fn default_grid(model: &str) -> Option<Vec<ModelParams>> {
    let ssh = |mu: (f64, f64)| {
        SSH_N.iter().flat_map(move |&n| {
            SSH_DELTAS
                .iter()
                .map(move |&d| ModelParams::Ssh(ChebyshevSshParams::new(n, d).with_mu(mu.0, mu.1)))
        })
    };
    let qracah = |variant| {
        let mut out = Vec::new();
        for &n in &SCAN_N {
            for &q in &SCAN_Q {
                for &alpha in &SCAN_VALUES {
                    for &beta in &SCAN_VALUES {
                        for &delta in &SCAN_VALUES {
                            out.push(ModelParams::QRacah(QRacahSshParams {
                                variant,
                                n,
                                q,
                                alpha,
                                beta,
                                delta,
                            }));
                        }
                    }
                }
            }
        }
        out
    };
    Some(match model {
        "ssh" => ssh((0.0, 0.0)).collect(),
        "ssh-mu" => SSH_MU.iter().flat_map(|&mu| ssh(mu)).collect(),
        "krawtchouk" => KRAWTCHOUK_N
            .iter()
            .flat_map(|&n| {
                KRAWTCHOUK_P
                    .iter()
                    .map(move |&p| ModelParams::Krawtchouk(KrawtchoukSshParams { n, p }))
            })
            .collect(),
        "qracah1" => qracah(QRacahVariant::I),
        "qracah2" => qracah(QRacahVariant::II),
        _ => return None,
    })
}

pub fn default_scan(variant: QRacahVariant) -> ScanResult {
    scan(variant, &SCAN_N, &SCAN_Q, &SCAN_VALUES)
}

/// A fixed admissible set for each variant, valid for every `N` in
/// [`SCAN_N`] and both values of `q` in [`SCAN_Q`].
pub fn known_good(variant: QRacahVariant, n: usize, q: f64) -> QRacahSshParams {
    let (alpha, beta, delta) = match variant {
        QRacahVariant::I => (0.25, 0.25, -0.75),
        QRacahVariant::II => (0.25, 0.25, -0.75),
    };
    QRacahSshParams {
        variant,
        n,
        q,
        alpha,
        beta,
        delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(default_grid("ssh").unwrap().len(), 15);
        assert_eq!(default_grid("ssh-mu").unwrap().len(), 45);
        assert_eq!(default_grid("krawtchouk").unwrap().len(), 27);
        assert_eq!(default_grid("qracah1").unwrap().len(), 9 * 2 * 512);
        assert!(default_grid("hahn").is_none());
    }

    #[test]
    fn grid_names_match() {
        for name in ["ssh", "ssh-mu", "krawtchouk", "qracah1", "qracah2"] {
            assert!(default_grid(name).unwrap().iter().all(|p| p.name() == name));
        }
    }

    #[test]
    fn known_good_is_admissible() {
        for v in [QRacahVariant::I, QRacahVariant::II] {
            for n in [1, 4, 7, 30] {
                for q in SCAN_Q {
                    qracah_model(known_good(v, n, q)).unwrap();
                }
            }
        }
    }
}
