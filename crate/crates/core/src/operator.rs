//! The λ-Toeplitz operator `T_{λ,φ}` and its finite sections.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::symbol::{FourierSymbol, UNIMODULAR_TOL};
use crate::Complex;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// The abstract operator `T_{λ,φ}` with `|λ| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaToeplitzSpec {
    lambda: Complex,
    symbol: FourierSymbol,
}

impl LambdaToeplitzSpec {
    pub fn new(lambda: Complex, symbol: FourierSymbol) -> Result<Self> {
        let modulus = lambda.norm();
        if modulus.is_nan() || modulus > 1.0 + UNIMODULAR_TOL {
            return Err(Error::LambdaOutsideDisc { modulus });
        }
        Ok(Self { lambda, symbol })
    }

    pub fn lambda(&self) -> Complex {
        self.lambda
    }

    pub fn symbol(&self) -> &FourierSymbol {
        &self.symbol
    }

    pub fn is_unimodular(&self) -> bool {
        (self.lambda.norm() - 1.0).abs() <= UNIMODULAR_TOL
    }

    /// `⟨T e_m, e_n⟩ = λ^{min(n,m)} a_{n-m}`, with `0^0 = 1`.
    pub fn entry(&self, n: usize, m: usize) -> Complex {
        power(self.lambda, n.min(m)) * self.symbol.coefficient(n as i64 - m as i64)
    }

    /// The pair `(λ̄, φ*)` whose truncations are the conjugate transposes of ours.
    pub fn adjoint(&self) -> Self {
        Self {
            lambda: self.lambda.conj(),
            symbol: self.symbol.adjoint(),
        }
    }

    /// Dense `N×N` section under the default memory budget.
    pub fn truncate(&self, size: usize) -> Result<TruncatedOperator> {
        self.truncate_with(size, MemoryBudget::from_env(), Execution::default())
    }

    pub fn truncate_with(
        &self,
        size: usize,
        budget: MemoryBudget,
        exec: Execution,
    ) -> Result<TruncatedOperator> {
        budget.check(size)?;
        let powers = powers(self.lambda, size);
        let diagonals = dense_diagonals(&self.symbol, size);
        let mut data = vec![ZERO; size * size];
        // Column-major: chunk `m` is column m.
        exec.for_each_chunk(&mut data, size, |m, column| {
            for (n, slot) in column.iter_mut().enumerate() {
                let d = diagonals[n + size - 1 - m];
                *slot = if d == ZERO {
                    ZERO
                } else {
                    powers[n.min(m)] * d
                };
            }
        });
        Ok(TruncatedOperator {
            entries: DMatrix::from_vec(size, size, data),
            provenance: Provenance::LambdaToeplitz {
                lambda: self.lambda,
                support: self.symbol.support(),
            },
        })
    }

    /// `T x` for the `N`-section without materialising the matrix.
    ///
    /// Splits `T = W_{φ₊,λz} + W*_{φ̄₋,λ̄z}`; the first summand is a causal
    /// convolution of `φ₊` with `(λ^m x_m)`, the second a correlation of
    /// `φ₋` with `x` followed by scaling row `n` by `λ^n`. Both run through
    /// FFT-based linear convolution.
    pub fn apply_fast(&self, x: &[Complex]) -> Vec<Complex> {
        self.apply_fast_with(x, Execution::default())
    }

    pub fn apply_fast_with(&self, x: &[Complex], exec: Execution) -> Vec<Complex> {
        let size = x.len();
        if size == 0 {
            return Vec::new();
        }
        let powers = powers(self.lambda, size);
        let limit = size as i64;

        let analytic: Vec<(usize, Complex)> = self
            .symbol
            .iter()
            .filter(|&(n, _)| (0..limit).contains(&n))
            .map(|(n, v)| (n as usize, v))
            .collect();
        let coanalytic: Vec<(usize, Complex)> = self
            .symbol
            .iter()
            .filter(|&(n, _)| (-limit + 1..0).contains(&n))
            .map(|(n, v)| ((-n) as usize, v))
            .collect();

        let lower = || {
            if analytic.is_empty() {
                return vec![ZERO; size];
            }
            let scaled: Vec<Complex> = x.iter().zip(&powers).map(|(v, p)| v * p).collect();
            let mut out = convolve(&sparse_to_dense(&analytic), &scaled);
            out.truncate(size);
            out
        };
        let upper = || {
            if coanalytic.is_empty() {
                return vec![ZERO; size];
            }
            let reversed: Vec<Complex> = x.iter().rev().copied().collect();
            let full = convolve(&sparse_to_dense(&coanalytic), &reversed);
            (0..size).map(|n| powers[n] * full[size - 1 - n]).collect()
        };
        let (lo, up) = exec.join(lower, upper);
        lo.into_iter().zip(up).map(|(a, b)| a + b).collect()
    }
}

/// `base^k` by repeated multiplication, matching the accumulation used for
/// whole bands.
pub(crate) fn power(base: Complex, k: usize) -> Complex {
    (0..k).fold(ONE, |acc, _| acc * base)
}

/// `[1, λ, λ², …, λ^{len-1}]` accumulated term by term.
pub(crate) fn powers(base: Complex, len: usize) -> Vec<Complex> {
    let mut out = Vec::with_capacity(len);
    let mut p = ONE;
    for _ in 0..len {
        out.push(p);
        p *= base;
    }
    out
}

/// Coefficients `a_d` for `d = -(N-1)..=N-1`, stored at offset `d + N - 1`.
pub(crate) fn dense_diagonals(symbol: &FourierSymbol, size: usize) -> Vec<Complex> {
    let span = 2 * size.max(1) - 1;
    let offset = size as i64 - 1;
    let mut out = vec![ZERO; span];
    for (n, v) in symbol.iter() {
        let idx = n + offset;
        if (0..span as i64).contains(&idx) {
            out[idx as usize] = v;
        }
    }
    out
}

fn sparse_to_dense(entries: &[(usize, Complex)]) -> Vec<Complex> {
    let len = entries.iter().map(|&(n, _)| n + 1).max().unwrap_or(0);
    let mut out = vec![ZERO; len];
    for &(n, v) in entries {
        out[n] = v;
    }
    out
}

/// Linear convolution via zero-padded power-of-two FFTs.
fn convolve(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let len = a.len() + b.len() - 1;
    let fft_len = len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(fft_len);
    let inverse = planner.plan_fft_inverse(fft_len);

    let mut fa = a.to_vec();
    fa.resize(fft_len, ZERO);
    let mut fb = b.to_vec();
    fb.resize(fft_len, ZERO);
    forward.process(&mut fa);
    forward.process(&mut fb);
    let scale = 1.0 / fft_len as f64;
    for (u, v) in fa.iter_mut().zip(&fb) {
        *u = *u * v * scale;
    }
    inverse.process(&mut fa);
    fa.truncate(len);
    fa
}

/// Cap on dense truncation storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub megabytes: u64,
}

impl MemoryBudget {
    /// 1024 MB, i.e. dense sections up to `N = 8192`.
    pub const DEFAULT_MB: u64 = 1024;
    pub const ENV_VAR: &'static str = "LT_MEM_BUDGET_MB";

    pub fn new(megabytes: u64) -> Self {
        Self { megabytes }
    }

    /// Reads `LT_MEM_BUDGET_MB`, falling back to the default when unset or
    /// unparsable.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Self::new)
            .unwrap_or_default()
    }

    pub fn bytes_for(size: usize) -> u64 {
        (size as u64).saturating_mul(size as u64).saturating_mul(16)
    }

    pub fn check(&self, size: usize) -> Result<()> {
        if size == 0 {
            return Err(Error::EmptyTruncation);
        }
        let bytes = Self::bytes_for(size);
        if bytes > self.megabytes.saturating_mul(1 << 20) {
            return Err(Error::MemoryBudget {
                size,
                needed_mb: bytes.div_ceil(1 << 20),
                budget_mb: self.megabytes,
            });
        }
        Ok(())
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::new(Self::DEFAULT_MB)
    }
}

/// Where a dense matrix came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    LambdaToeplitz {
        lambda: Complex,
        support: Option<(i64, i64)>,
    },
    Toeplitz {
        support: Option<(i64, i64)>,
    },
    DiagonalUnitary {
        lambda: Complex,
        unitary: bool,
    },
    WeightedComposition {
        multiplier: Complex,
        support: Option<(i64, i64)>,
    },
    Recurrence {
        lambda: Complex,
    },
    Derived(String),
}

fn fmt_support(f: &mut fmt::Formatter<'_>, support: &Option<(i64, i64)>) -> fmt::Result {
    match support {
        Some((lo, hi)) => write!(f, "support [{lo}, {hi}]"),
        None => write!(f, "zero symbol"),
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::LambdaToeplitz { lambda, support } => {
                write!(f, "lambda-Toeplitz, lambda = {lambda}, ")?;
                fmt_support(f, support)
            }
            Provenance::Toeplitz { support } => {
                write!(f, "Toeplitz, ")?;
                fmt_support(f, support)
            }
            Provenance::DiagonalUnitary { lambda, unitary } => {
                let kind = if *unitary { "unitary" } else { "non-unitary" };
                write!(f, "diagonal U_lambda ({kind}), lambda = {lambda}")
            }
            Provenance::WeightedComposition {
                multiplier,
                support,
            } => {
                write!(
                    f,
                    "weighted composition, tau(z) = ({multiplier}) z, weight "
                )?;
                fmt_support(f, support)
            }
            Provenance::Recurrence { lambda } => {
                write!(f, "solution of S*AS = lambda A + B, lambda = {lambda}")
            }
            Provenance::Derived(what) => f.write_str(what),
        }
    }
}

/// An `N×N` matrix section, `entries[(n, m)] = ⟨T e_m, e_n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    entries: DMatrix<Complex>,
    provenance: Provenance,
}

impl TruncatedOperator {
    /// Wraps a square matrix.
    pub fn from_matrix(entries: DMatrix<Complex>, provenance: Provenance) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::EmptyTruncation);
        }
        Ok(Self {
            entries,
            provenance,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex> {
        self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn get(&self, n: usize, m: usize) -> Complex {
        self.entries[(n, m)]
    }

    /// Reference `O(N²)` matrix-vector product.
    pub fn apply_naive(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        if x.len() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                actual: x.len(),
            });
        }
        let y = &self.entries * DVector::from_column_slice(x);
        Ok(y.as_slice().to_vec())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            provenance: Provenance::Derived(format!("adjoint of {}", self.provenance)),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &TruncatedOperator) -> Result<Self> {
        self.check_same_size(rhs)?;
        Ok(Self {
            entries: &self.entries * &rhs.entries,
            provenance: Provenance::Derived(format!(
                "({}) * ({})",
                self.provenance, rhs.provenance
            )),
        })
    }

    pub fn sum(&self, rhs: &TruncatedOperator) -> Result<Self> {
        self.check_same_size(rhs)?;
        Ok(Self {
            entries: &self.entries + &rhs.entries,
            provenance: Provenance::Derived(format!(
                "({}) + ({})",
                self.provenance, rhs.provenance
            )),
        })
    }

    /// `max_{n,m} |self(n,m) - other(n,m)|`.
    pub fn max_abs_diff(&self, other: &TruncatedOperator) -> Result<f64> {
        self.check_same_size(other)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Leading principal `size×size` block.
    pub fn leading_block(&self, size: usize) -> Result<Self> {
        if size == 0 || size > self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                actual: size,
            });
        }
        Ok(Self {
            entries: self.entries.view((0, 0), (size, size)).into_owned(),
            provenance: self.provenance.clone(),
        })
    }

    /// Trailing block `D_m`: rows and columns `m..N`.
    pub fn tail_block(&self, start: usize) -> DMatrix<Complex> {
        let len = self.size().saturating_sub(start);
        self.entries.view((start, start), (len, len)).into_owned()
    }

    fn check_same_size(&self, other: &TruncatedOperator) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                actual: other.size(),
            });
        }
        Ok(())
    }
}

/// `max_{n,m < N-1} |T(n+1,m+1) - λ T(n,m)|`; zero exactly when `S*TS = λT`
/// holds on the section.
pub fn recurrence_residual(op: &TruncatedOperator, lambda: Complex) -> f64 {
    let a = op.entries();
    let size = op.size();
    let mut worst = 0.0f64;
    for m in 0..size.saturating_sub(1) {
        for n in 0..size - 1 {
            worst = worst.max((a[(n + 1, m + 1)] - lambda * a[(n, m)]).norm());
        }
    }
    worst
}

/// Solves `S*AS = λA + B` on an `N×N` section given the first row and
/// column of `A`: `A(n+1, m+1) = λ A(n, m) + B(n, m)`.
///
/// The result is unique; only the leading `(N-1)×(N-1)` block of `rhs` is
/// read.
pub fn solve_recurrence(
    lambda: Complex,
    rhs: &DMatrix<Complex>,
    first_row: &[Complex],
    first_col: &[Complex],
) -> Result<TruncatedOperator> {
    let size = first_row.len();
    if size == 0 {
        return Err(Error::EmptyTruncation);
    }
    for actual in [first_col.len(), rhs.nrows(), rhs.ncols()] {
        if actual != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                actual,
            });
        }
    }
    if first_row[0] != first_col[0] {
        return Err(Error::CornerMismatch {
            row: first_row[0],
            col: first_col[0],
        });
    }
    let mut a = DMatrix::from_element(size, size, ZERO);
    for m in 0..size {
        a[(0, m)] = first_row[m];
    }
    for n in 0..size {
        a[(n, 0)] = first_col[n];
    }
    for m in 1..size {
        for n in 1..size {
            a[(n, m)] = lambda * a[(n - 1, m - 1)] + rhs[(n - 1, m - 1)];
        }
    }
    TruncatedOperator::from_matrix(a, Provenance::Recurrence { lambda })
}
