//! Exactly solvable inhomogeneous SSH chains.
//!
//! A chain with alternating couplings `t+_0, t-_0, t+_1, t-_1, ...` is solved
//! by *doubling* a finite orthogonal-polynomial family: the eigenvectors are
//! built from the polynomials evaluated at `π_x = τ2 x² + τ0`, and the spectrum
//! is read off the family's grid. The crate ships the homogeneous chain
//! (Chebyshev), a Krawtchouk chain and two q-Racah chains, and checks each of
//! them against an independent Sturm-bisection eigensolver.
//!
//! ```
//! use ssh_doubling::models::{krawtchouk_model, KrawtchoukSshParams};
//!
//! let m = krawtchouk_model(KrawtchoukSshParams { n: 3, p: 0.4 }).unwrap();
//! let x = m.sequence().eigenvalues().unwrap();
//! assert_eq!(x.len(), 7);
//! assert!((x[6] - 3f64.sqrt()).abs() < 1e-12);
//! ```

pub mod dd;
pub mod doubling;
pub mod models;
pub mod recurrence;
pub mod specialfn;
pub mod tridiag;
pub mod verify;

use thiserror::Error;

pub use doubling::{DoublingError, DoublingSolution, Mode, QSequence};
pub use models::{Model, ModelError, ModelParams};
pub use recurrence::{RecurrenceError, RecurrenceFamily, SymmetrizedFamily};
pub use specialfn::{LogReal, SpecialFnError};
pub use tridiag::{TridiagError, TridiagonalHamiltonian};
pub use verify::{verify_model, VerificationReport, VerifyError, VerifyOptions};

/// Any error raised by the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
    #[error(transparent)]
    Doubling(#[from] DoublingError),
    #[error(transparent)]
    Tridiag(#[from] TridiagError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/doubling.md")]
    mod doubling {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/qracah.md")]
    mod qracah {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
