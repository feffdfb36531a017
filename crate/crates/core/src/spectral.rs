//! Singular values, norms and numerical ranks of truncations, and the
//! quantitative checks built on them: the Hilbert–Schmidt identity, the
//! `σ_{2m+1} <= |λ|^m ‖T‖` decay bound, the trace-norm majorant, the
//! weighted-composition spectrum and the finite-rank dichotomy.
//!
//! Bounds that involve `‖T‖` use `σ_1` of the same truncation as a proxy.
//! Since `σ_1 <= ‖T‖`, a pass certifies the bound on the section and a
//! negative margin would be a genuine counterexample.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::factorization::{build_weighted_comp, VerificationResult, WeightedCompositionSpec};
use crate::operator::{LambdaToeplitzSpec, TruncatedOperator};
use crate::symbol::{FourierSymbol, UNIMODULAR_TOL};
use crate::Complex;

/// Relative threshold for counting a singular value towards the rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Slack on the trace-norm majorant.
pub const TRACE_BOUND_SLACK: f64 = 1e-9;

const SVD_EPS: f64 = f64::EPSILON;
const SVD_MAX_ITER: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    #[serde(rename = "N")]
    pub size: usize,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    pub operator_norm: f64,
    pub frobenius_norm: f64,
    pub trace_norm: f64,
    pub numerical_rank: usize,
    /// `|λ|^m σ_1 - σ_{2m+1}` for every `m` with `2m + 1 <= N`.
    pub decay_margins: Vec<f64>,
}

impl SpectralReport {
    /// `σ_k` with 1-based `k`, zero beyond the section.
    pub fn sigma(&self, k: usize) -> f64 {
        k.checked_sub(1)
            .and_then(|i| self.singular_values.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn min_decay_margin(&self) -> f64 {
        self.decay_margins
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Singular values of a square complex matrix, sorted nonincreasing.
pub fn singular_values(matrix: &DMatrix<Complex>) -> Result<Vec<f64>> {
    let size = matrix.nrows();
    if size == 1 {
        return Ok(vec![matrix[(0, 0)].norm()]);
    }
    let svd = matrix
        .clone()
        .try_svd_unordered(false, false, SVD_EPS, SVD_MAX_ITER)
        .ok_or(Error::Svd(size))?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Svd(size));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Largest singular value.
pub fn operator_norm(matrix: &DMatrix<Complex>) -> Result<f64> {
    Ok(singular_values(matrix)?.first().copied().unwrap_or(0.0))
}

/// Counts `σ_k > rank_tol · σ_1`.
pub fn numerical_rank(values: &[f64], rank_tol: f64) -> usize {
    let top = values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > rank_tol * top).count()
}

fn check_rank_tol(rank_tol: f64) -> Result<()> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidTolerance(rank_tol));
    }
    Ok(())
}

/// Full singular-value analysis of one truncation.
pub fn analyze(op: &TruncatedOperator, lambda: Complex, rank_tol: f64) -> Result<SpectralReport> {
    check_rank_tol(rank_tol)?;
    let singular_values = singular_values(op.entries())?;
    let operator_norm = singular_values[0];
    let modulus = lambda.norm();
    let mut decay_margins = Vec::with_capacity(op.size().div_ceil(2));
    let mut bound = operator_norm;
    for m in 0..op.size().div_ceil(2) {
        decay_margins.push(bound - singular_values[2 * m]);
        bound *= modulus;
    }
    Ok(SpectralReport {
        size: op.size(),
        operator_norm,
        frobenius_norm: op.frobenius_norm(),
        trace_norm: singular_values.iter().sum(),
        numerical_rank: numerical_rank(&singular_values, rank_tol),
        decay_margins,
        singular_values,
    })
}

fn require_open_disc(lambda: Complex) -> Result<f64> {
    let modulus = lambda.norm();
    if modulus.is_nan() || modulus >= 1.0 {
        return Err(Error::NotInOpenDisc { modulus });
    }
    Ok(modulus)
}

/// `(Σ|a_n|²)^{1/2} (1 - |λ|²)^{-1/2}`: the Hilbert–Schmidt norm of
/// `T_{λ,φ}` for `|λ| < 1`, and hence an upper bound on its operator norm.
pub fn hs_norm_closed_form(spec: &LambdaToeplitzSpec) -> Result<f64> {
    let modulus = require_open_disc(spec.lambda())?;
    Ok(spec.symbol().l2_norm() / (1.0 - modulus * modulus).sqrt())
}

/// Operator norms of the sections `N ∈ sizes` for `|λ| = 1`.
pub fn norm_convergence_study(
    spec: &LambdaToeplitzSpec,
    sizes: &[usize],
) -> Result<Vec<(usize, f64)>> {
    norm_convergence_study_with(spec, sizes, Execution::default())
}

pub fn norm_convergence_study_with(
    spec: &LambdaToeplitzSpec,
    sizes: &[usize],
    exec: Execution,
) -> Result<Vec<(usize, f64)>> {
    if !spec.is_unimodular() {
        return Err(Error::NotUnimodular {
            modulus: spec.lambda().norm(),
        });
    }
    exec.map(sizes, |&n| {
        Ok((n, operator_norm(spec.truncate(n)?.entries())?))
    })
    .into_iter()
    .collect()
}

/// Operator norms of `T_{-1, sawtooth(K = N)}` at each `N`; the symbol
/// `φ_{-1,+}` is unbounded, so these keep growing.
pub fn sawtooth_norm_study(sizes: &[usize]) -> Result<Vec<(usize, f64)>> {
    sawtooth_norm_study_with(Complex::new(-1.0, 0.0), sizes, Execution::default())
}

pub fn sawtooth_norm_study_with(
    lambda: Complex,
    sizes: &[usize],
    exec: Execution,
) -> Result<Vec<(usize, f64)>> {
    exec.map(sizes, |&n| {
        let spec = LambdaToeplitzSpec::new(lambda, FourierSymbol::sawtooth(n))?;
        Ok((n, operator_norm(spec.truncate(n)?.entries())?))
    })
    .into_iter()
    .collect()
}

/// `trace_norm <= σ_1 (1 + 2/(1 - |λ|))`, the majorant obtained by pairing
/// `σ_{2m+1}, σ_{2m+2} <= |λ|^m σ_1`.
pub fn trace_norm_bound_check(
    report: &SpectralReport,
    lambda: Complex,
) -> Result<VerificationResult> {
    let modulus = require_open_disc(lambda)?;
    let majorant = report.operator_norm * (1.0 + 2.0 / (1.0 - modulus));
    let excess = (report.trace_norm - majorant).max(0.0);
    Ok(VerificationResult {
        identity: "trace-bound".to_owned(),
        size: report.size,
        residual: excess,
        tolerance: TRACE_BOUND_SLACK,
        pass: excess <= TRACE_BOUND_SLACK,
        variant: None,
    })
}

/// Eigenvalues of the lower-triangular section of `W_{ψ,cz}` compared with
/// the predicted spectrum `{c^k ψ(0)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WcoSpectrumCheck {
    /// Read off the diagonal of the section.
    pub eigenvalues: Vec<Complex>,
    pub predicted: Vec<Complex>,
    /// `Some` only when `0 < |c| < 1` and `ψ(0) ≠ 0`, where the predicted
    /// points must be pairwise distinct.
    pub pairwise_distinct: Option<bool>,
    pub result: VerificationResult,
}

pub fn wco_spectrum_check(
    w: &WeightedCompositionSpec,
    size: usize,
    tolerance: f64,
) -> Result<WcoSpectrumCheck> {
    let section = build_weighted_comp(w, size)?;
    let eigenvalues: Vec<Complex> = (0..size).map(|k| section.get(k, k)).collect();
    let psi0 = w.weight().coefficient(0);
    let c = w.multiplier();
    let predicted: Vec<Complex> = (0..size).map(|k| c.powi(k as i32) * psi0).collect();
    let residual = eigenvalues
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let modulus = c.norm();
    let pairwise_distinct = (modulus > 0.0
        && modulus < 1.0 - UNIMODULAR_TOL
        && psi0 != Complex::new(0.0, 0.0))
    .then(|| {
        eigenvalues
            .iter()
            .enumerate()
            .all(|(i, a)| eigenvalues[i + 1..].iter().all(|b| a != b))
    });

    let mut result = VerificationResult::new("wco-spectrum", size, residual, tolerance, None);
    result.pass &= pairwise_distinct.unwrap_or(true);
    Ok(WcoSpectrumCheck {
        eigenvalues,
        predicted,
        pairwise_distinct,
        result,
    })
}

/// Numerical rank of each section.
pub fn finite_rank_study(
    spec: &LambdaToeplitzSpec,
    sizes: &[usize],
    rank_tol: f64,
) -> Result<Vec<(usize, usize)>> {
    finite_rank_study_with(spec, sizes, rank_tol, Execution::default())
}

pub fn finite_rank_study_with(
    spec: &LambdaToeplitzSpec,
    sizes: &[usize],
    rank_tol: f64,
    exec: Execution,
) -> Result<Vec<(usize, usize)>> {
    check_rank_tol(rank_tol)?;
    exec.map(sizes, |&n| {
        let values = singular_values(spec.truncate(n)?.entries())?;
        Ok((n, numerical_rank(&values, rank_tol)))
    })
    .into_iter()
    .collect()
}

/// Exact rank of the `N`-section when it is triangular up to a shift:
/// `N - n₀` for a nonzero analytic symbol with lowest index `n₀` (and the
/// mirrored count for a coanalytic one), provided `0 < |λ| < 1`. `Some(0)`
/// for the zero symbol; `None` when the structure gives no exact count.
pub fn triangular_rank(spec: &LambdaToeplitzSpec, size: usize) -> Option<usize> {
    let symbol = spec.symbol();
    let (lo, hi) = match symbol.support() {
        None => return Some(0),
        Some(s) => s,
    };
    let modulus = spec.lambda().norm();
    if !(modulus > 0.0 && modulus < 1.0) {
        return None;
    }
    let offset = if lo >= 0 {
        lo as usize
    } else if hi < 0 {
        hi.unsigned_abs() as usize
    } else {
        return None;
    };
    Some(size.saturating_sub(offset))
}

/// `σ_1` of the trailing block `D_m` (rows and columns `m..N`).
pub fn tail_block_norm(op: &TruncatedOperator, start: usize) -> Result<f64> {
    if start >= op.size() {
        return Ok(0.0);
    }
    operator_norm(&op.tail_block(start))
}
