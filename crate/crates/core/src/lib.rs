//! Finite truncations of λ-Toeplitz operators on the Hardy space H².
//!
//! A λ-Toeplitz operator `T` satisfies `⟨T e_{m+1}, e_{n+1}⟩ = λ ⟨T e_m, e_n⟩`
//! on the monomial basis, so its matrix is determined by its first row and
//! column: `T(n, m) = λ^{min(n,m)} a_{n-m}` for a Fourier symbol
//! `φ ~ Σ a_n e^{inθ}`.
//!
//! The crate is organised bottom-up:
//!
//! - [`symbol`]: finitely supported Fourier symbols and their transforms.
//! - [`operator`]: entry formula, dense truncations, naive and FFT-based
//!   application, the shift recurrence and its solver.
//! - [`factorization`]: diagonal unitaries, Toeplitz and weighted
//!   composition matrices, integral kernels and identity checks.
//! - [`spectral`]: singular values, norms, ranks and the decay/trace bounds.
//! - [`io`]: JSON and CSV formats shared with the command-line front end.
//!
//! Data-parallel loops go through [`Execution`]; with the `rayon` feature
//! disabled every strategy runs sequentially.

pub mod error;
pub mod exec;
pub mod factorization;
pub mod io;
pub mod operator;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use exec::Execution;
pub use factorization::{KernelGrid, VerificationResult, WeightedCompositionSpec};
pub use operator::{LambdaToeplitzSpec, MemoryBudget, Provenance, TruncatedOperator};
pub use spectral::SpectralReport;
pub use symbol::FourierSymbol;

/// Complex scalars, including the parameter λ.
pub type Complex = num_complex::Complex64;
