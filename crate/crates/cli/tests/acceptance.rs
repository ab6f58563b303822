//! The acceptance criteria, one line of output each. Runs without the test
//! harness and exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use ssh_doubling::models::scan::{default_scan, SCAN_N};
use ssh_doubling::models::*;
use ssh_doubling::verify::{sweep, SweepEntry};
use ssh_doubling::{TridiagonalHamiltonian, VerificationReport, VerifyOptions};

const BIN: &str = env!("CARGO_BIN_EXE_ssh-doubling");
const DELTAS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];
const SSH_N: [usize; 4] = [1, 10, 100, 200];
const MUS: [(f64, f64); 3] = [(0.3, -0.2), (1.0, 1.0), (2.0, 0.0)];
const PS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ssh(n: usize, delta: f64, mu: (f64, f64)) -> Model {
    Model::build(ModelParams::Ssh(ChebyshevSshParams::new(n, delta).with_mu(mu.0, mu.1))).unwrap()
}

/// Largest |closed form - oracle| over the sorted spectra.
fn closed_form_vs_oracle(m: &Model) -> f64 {
    let h = TridiagonalHamiltonian::from_sequence(m.sequence()).unwrap();
    let oracle = h.eigenvalues(h.default_tol()).unwrap();
    let closed = m.closed_form_spectrum();
    assert_eq!(closed.len(), oracle.len());
    closed.iter().zip(&oracle).fold(0.0, |a, (x, y)| a.max((x - y).abs()))
}

fn worst(reports: &[VerificationReport], name: &str) -> f64 {
    reports
        .iter()
        .filter_map(|r| r.check(name))
        .fold(0.0, |a, c| a.max(c.value))
}

fn verified(entries: Vec<SweepEntry>) -> Vec<VerificationReport> {
    entries
        .into_iter()
        .map(|e| match e {
            SweepEntry::Verified(r) => r,
            SweepEntry::Skipped { reason, .. } => panic!("admissible set skipped: {reason}"),
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut dev: f64 = 0.0;
    for n in SSH_N {
        for d in DELTAS {
            dev = dev.max(closed_form_vs_oracle(&ssh(n, d, (0.0, 0.0))));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(dev <= 1e-10 && secs < 5.0, format!("max deviation {dev:.3e}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let mut dev: f64 = 0.0;
    for mu in MUS {
        for n in SSH_N {
            for d in DELTAS {
                dev = dev.max(closed_form_vs_oracle(&ssh(n, d, mu)));
            }
        }
    }
    outcome(dev <= 1e-10, format!("max deviation {dev:.3e}"))
}

fn criterion_3(reports: &[VerificationReport]) -> Outcome {
    let mut spec: f64 = 0.0;
    for n in 1..=50 {
        for p in PS {
            let m = Model::build(ModelParams::Krawtchouk(KrawtchoukSshParams { n, p })).unwrap();
            let mut want = vec![0.0];
            for k in 0..n {
                let x = ((k + 1) as f64).sqrt();
                want.extend([x, -x]);
            }
            want.sort_by(f64::total_cmp);
            let h = TridiagonalHamiltonian::from_sequence(m.sequence()).unwrap();
            let oracle = h.eigenvalues(h.default_tol()).unwrap();
            let analytic = m.sequence().eigenvalues().unwrap();
            for i in 0..want.len() {
                spec = spec.max((oracle[i] - want[i]).abs()).max((analytic[i] - want[i]).abs());
            }
        }
    }
    let residual = worst(reports, "residual");
    let norms = worst(reports, "norms");
    let contiguity = worst(reports, "contiguity");
    let pass = spec <= 1e-10 && residual <= 1e-11 && norms <= 1e-8 && contiguity <= 1e-10;
    outcome(
        pass,
        format!(
            "{} chains: spectrum {spec:.3e}, residual {residual:.3e}, norms {norms:.3e}, contiguity {contiguity:.3e}",
            reports.len()
        ),
    )
}

fn criterion_4(reports: &[VerificationReport], rejected: usize) -> Outcome {
    let constraints = worst(reports, "constraints");
    let spectrum = worst(reports, "spectrum-vs-oracle");
    let duality = worst(reports, "duality");
    let weight = worst(reports, "weight-identity");
    let contiguity = worst(reports, "contiguity");
    let norms = worst(reports, "norms");
    let pass = constraints <= 1e-12
        && spectrum <= 1e-8
        && duality <= 1e-10
        && weight <= 1e-10
        && contiguity <= 1e-10
        && norms <= 1e-8;
    outcome(
        pass,
        format!(
            "{} admissible ({rejected} rejected): constraints {constraints:.3e}, spectrum {spectrum:.3e}, \
             duality {duality:.3e}, weight {weight:.3e}, contiguity {contiguity:.3e}, norms {norms:.3e}",
            reports.len()
        ),
    )
}

fn criterion_5(all: &[&VerificationReport]) -> Outcome {
    let small: Vec<_> = all.iter().filter(|r| r.parameters["N"] <= 20.0).collect();
    let missing = small.iter().filter(|r| r.check("christoffel").is_none()).count();
    let value = small
        .iter()
        .filter_map(|r| r.check("christoffel"))
        .fold(0.0f64, |a, c| a.max(c.value));
    outcome(
        missing == 0 && value <= 1e-10,
        format!("{} chains with N <= 20, 50 samples each: {value:.3e}", small.len()),
    )
}

fn criterion_6(all: &[&VerificationReport]) -> Outcome {
    let small: Vec<_> = all.iter().filter(|r| r.parameters["N"] <= 30.0).collect();
    let value = small
        .iter()
        .filter_map(|r| r.check("orthogonality"))
        .fold(0.0f64, |a, c| a.max(c.value));
    outcome(value <= 1e-9, format!("{} chains with N <= 30: {value:.3e}", small.len()))
}

fn model_flags(model: &str, n: usize) -> Vec<String> {
    let mut v = vec!["--model".to_string(), model.to_string(), "--N".into(), n.to_string()];
    match model {
        "ssh" => v.extend(["--delta".into(), "0.3".into()]),
        "ssh-mu" => v.extend(["--delta", "0.3", "--mu-plus", "0.3", "--mu-minus", "-0.2"].map(String::from)),
        "krawtchouk" => v.extend(["--p".into(), "0.3".into()]),
        _ => {}
    }
    v
}

fn run(args: &[String]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (out.status.code(), out.stdout)
}

fn criterion_7() -> Outcome {
    let mut runs = 0;
    let mut missed = Vec::new();
    for model in ["ssh", "ssh-mu", "krawtchouk", "qracah1", "qracah2"] {
        for n in [2, 5] {
            let sites = if model == "qracah2" { 2 * n } else { 2 * n + 1 };
            for index in 0..sites - 1 {
                for rel in ["1e-4", "-1e-4"] {
                    let mut args = vec!["verify".to_string()];
                    args.extend(model_flags(model, n));
                    args.extend(["--perturb-coupling".to_string(), format!("{index}:{rel}")]);
                    runs += 1;
                    if run(&args).0 == Some(0) {
                        missed.push(format!("{model} N={n} coupling {index} by {rel}"));
                    }
                }
            }
        }
    }
    outcome(
        missed.is_empty(),
        format!("{} of {runs} perturbed runs exited 0 {missed:?}", missed.len()),
    )
}

fn criterion_8() -> Outcome {
    let mut commands: Vec<Vec<String>> = Vec::new();
    for model in ["ssh", "ssh-mu", "krawtchouk", "qracah1", "qracah2"] {
        for cmd in ["spectrum", "eigvecs", "couplings", "verify"] {
            for format in ["json", "csv"] {
                let mut args = vec![cmd.to_string()];
                args.extend(model_flags(model, 6));
                args.extend(["--format".to_string(), format.to_string()]);
                if cmd == "spectrum" {
                    args.push("--oracle".into());
                }
                commands.push(args);
            }
        }
    }
    commands.push(["verify", "--model", "qracah2", "--scan", "default"].map(String::from).to_vec());
    let mut differing = Vec::new();
    for args in &commands {
        let a = run(args);
        let b = run(args);
        if a != b || a.1.is_empty() {
            differing.push(args.join(" "));
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} commands run twice, {} differed {differing:?}", commands.len(), differing.len()),
    )
}

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let mut shipped = Vec::new();
    for mu in std::iter::once((0.0, 0.0)).chain(MUS) {
        for n in [1, 2, 5, 10, 20, 30] {
            for d in DELTAS {
                shipped.push(ModelParams::Ssh(ChebyshevSshParams::new(n, d).with_mu(mu.0, mu.1)));
            }
        }
    }
    let krawtchouk: Vec<_> = (1..=50)
        .flat_map(|n| PS.map(|p| ModelParams::Krawtchouk(KrawtchoukSshParams { n, p })))
        .collect();
    let mut qracah = Vec::new();
    let mut rejected = 0;
    for variant in [QRacahVariant::I, QRacahVariant::II] {
        let s = default_scan(variant);
        rejected += s.total_rejected();
        qracah.extend(s.admissible.into_iter().map(ModelParams::QRacah));
    }
    assert!(SCAN_N.iter().all(|n| *n <= 30));

    let chain_reports = verified(sweep(&shipped, &opts).unwrap());
    let krawtchouk_reports = verified(sweep(&krawtchouk, &opts).unwrap());
    let qracah_reports = verified(sweep(&qracah, &opts).unwrap());
    let all: Vec<&VerificationReport> = chain_reports
        .iter()
        .chain(&krawtchouk_reports)
        .chain(&qracah_reports)
        .collect();

    let results = [
        ("homogeneous SSH spectrum", criterion_1()),
        ("chemical-potential spectrum", criterion_2()),
        ("Krawtchouk chain", criterion_3(&krawtchouk_reports)),
        ("q-Racah scan", criterion_4(&qracah_reports, rejected)),
        ("Christoffel identities", criterion_5(&all)),
        ("orthogonality", criterion_6(&all)),
        ("fault sensitivity", criterion_7()),
        ("determinism", criterion_8()),
    ];
    let mut ok = true;
    for (i, (name, r)) in results.iter().enumerate() {
        println!(
            "acceptance {}: {} [{}] {}",
            i + 1,
            if r.pass { "PASS" } else { "FAIL" },
            name,
            r.detail
        );
        ok &= r.pass;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
