//! Auxiliary operators (diagonal unitaries, Toeplitz and weighted
//! composition matrices, integral kernels) and entrywise residual checks of
//! the identities that relate them to `T_{λ,φ}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::operator::{powers, LambdaToeplitzSpec, Provenance, TruncatedOperator};
use crate::symbol::{FourierSymbol, UNIMODULAR_TOL};
use crate::Complex;

const ZERO: Complex = Complex::new(0.0, 0.0);

/// Default pass threshold for identity residuals.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub identity: String,
    #[serde(rename = "N")]
    pub size: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub variant: Option<String>,
}

impl VerificationResult {
    pub fn new(
        identity: impl Into<String>,
        size: usize,
        residual: f64,
        tolerance: f64,
        variant: Option<&str>,
    ) -> Self {
        Self {
            identity: identity.into(),
            size,
            residual,
            tolerance,
            pass: residual < tolerance,
            variant: variant.map(str::to_owned),
        }
    }
}

/// `W_{ψ,τ} f = ψ · (f ∘ τ)` with a linear multiplier `τ(z) = cz`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCompositionSpec {
    weight: FourierSymbol,
    multiplier: Complex,
}

impl WeightedCompositionSpec {
    pub fn new(weight: FourierSymbol, multiplier: Complex) -> Result<Self> {
        if let Some((lo, _)) = weight.support() {
            if lo < 0 {
                return Err(Error::NotAnalytic(lo));
            }
        }
        let modulus = multiplier.norm();
        if modulus.is_nan() || modulus > 1.0 + UNIMODULAR_TOL {
            return Err(Error::DilationOutsideDisc { modulus });
        }
        Ok(Self { weight, multiplier })
    }

    /// The unweighted composition operator `C_{cz}`.
    pub fn composition(multiplier: Complex) -> Result<Self> {
        Self::new(
            FourierSymbol::monomial(0, Complex::new(1.0, 0.0)),
            multiplier,
        )
    }

    pub fn weight(&self) -> &FourierSymbol {
        &self.weight
    }

    pub fn multiplier(&self) -> Complex {
        self.multiplier
    }
}

/// `diag(1, λ, λ², …)`, the unitary `U_λ` when `|λ| = 1`.
pub fn build_diag_unitary(lambda: Complex, size: usize) -> Result<TruncatedOperator> {
    let diag = powers(lambda, size);
    TruncatedOperator::from_matrix(
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        Provenance::DiagonalUnitary {
            lambda,
            unitary: (lambda.norm() - 1.0).abs() <= UNIMODULAR_TOL,
        },
    )
}

/// Classical Toeplitz section `ψ_{n-m}`.
pub fn build_toeplitz(symbol: &FourierSymbol, size: usize) -> Result<TruncatedOperator> {
    TruncatedOperator::from_matrix(
        DMatrix::from_fn(size, size, |n, m| symbol.coefficient(n as i64 - m as i64)),
        Provenance::Toeplitz {
            support: symbol.support(),
        },
    )
}

/// Lower-triangular section of `W_{ψ,cz}`: column `m` holds `ψ · (cz)^m`,
/// so `entry(n, m) = c^m ψ_{n-m}`.
pub fn build_weighted_comp(w: &WeightedCompositionSpec, size: usize) -> Result<TruncatedOperator> {
    let p = powers(w.multiplier, size);
    TruncatedOperator::from_matrix(
        DMatrix::from_fn(size, size, |n, m| {
            if n < m {
                ZERO
            } else {
                p[m] * w.weight.coefficient((n - m) as i64)
            }
        }),
        Provenance::WeightedComposition {
            multiplier: w.multiplier,
            support: w.weight.support(),
        },
    )
}

fn require_unimodular(lambda: Complex) -> Result<()> {
    let modulus = lambda.norm();
    if (modulus - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular { modulus });
    }
    Ok(())
}

fn require_open_disc(lambda: Complex) -> Result<()> {
    let modulus = lambda.norm();
    if modulus.is_nan() || modulus >= 1.0 {
        return Err(Error::NotInOpenDisc { modulus });
    }
    Ok(())
}

/// `T_{λ,φ} = U_λ T_{φ_{λ̄,+}}` for `|λ| = 1`.
pub fn verify_unitary_factorization(
    spec: &LambdaToeplitzSpec,
    size: usize,
    tolerance: f64,
) -> Result<VerificationResult> {
    require_unimodular(spec.lambda())?;
    let lhs = spec.truncate(size)?;
    let rhs = build_diag_unitary(spec.lambda(), size)?.compose(&build_toeplitz(
        &spec.symbol().twist_plus(spec.lambda()),
        size,
    )?)?;
    Ok(VerificationResult::new(
        "unitary",
        size,
        lhs.max_abs_diff(&rhs)?,
        tolerance,
        None,
    ))
}

/// The truncation of `W_{φ₊,λz} + W*_{φ̄₋,λ̄z}`.
pub fn wco_sum(spec: &LambdaToeplitzSpec, size: usize) -> Result<TruncatedOperator> {
    let lambda = spec.lambda();
    let plus = WeightedCompositionSpec::new(spec.symbol().analytic_part(), lambda)?;
    let minus = WeightedCompositionSpec::new(
        spec.symbol().coanalytic_part().conjugate_flip()?,
        lambda.conj(),
    )?;
    build_weighted_comp(&plus, size)?.sum(&build_weighted_comp(&minus, size)?.adjoint())
}

/// `T_{λ,φ} = W_{φ₊,λz} + W*_{φ̄₋,λ̄z}`, exact entrywise on every section.
pub fn verify_wco_sum(
    spec: &LambdaToeplitzSpec,
    size: usize,
    tolerance: f64,
) -> Result<VerificationResult> {
    let lhs = spec.truncate(size)?;
    let rhs = wco_sum(spec, size)?;
    Ok(VerificationResult::new(
        "wco-sum",
        size,
        lhs.max_abs_diff(&rhs)?,
        tolerance,
        None,
    ))
}

fn require_unit_interval(lambda: Complex) -> Result<f64> {
    if lambda.im != 0.0 || !(lambda.re > 0.0 && lambda.re < 1.0) {
        return Err(Error::NotInUnitInterval {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok(lambda.re)
}

/// `φ̃ = φ₊ + conj(φ̄₋(λ e^{iθ}))` read literally: coanalytic coefficients
/// `λ^j a_{-j}` for real `λ`.
pub fn literal_tilde_symbol(spec: &LambdaToeplitzSpec) -> Result<FourierSymbol> {
    let lambda = require_unit_interval(spec.lambda())?;
    let dilated = spec
        .symbol()
        .coanalytic_part()
        .conjugate_flip()?
        .dilate(Complex::new(lambda, 0.0))?;
    FourierSymbol::from_coefficients(
        spec.symbol()
            .analytic_part()
            .iter()
            .chain(dilated.conjugate().reflect().iter()),
    )
}

/// The symbol forced by matching entries of `T_{φ̃} C_{λz}` against
/// `T_{λ,φ}`: coanalytic coefficients `λ^{-j} a_{-j}`.
pub fn corrected_tilde_symbol(spec: &LambdaToeplitzSpec) -> Result<FourierSymbol> {
    let lambda = require_unit_interval(spec.lambda())?;
    let inverse = 1.0 / lambda;
    let coanalytic = spec.symbol().coanalytic_part();
    let minus = coanalytic.iter().map(|(n, v)| {
        let j = (-n) as i32;
        (n, v * inverse.powi(j))
    });
    FourierSymbol::from_coefficients(spec.symbol().analytic_part().iter().chain(minus))
}

/// Both readings of `T_{λ,φ} = T_{φ̃} C_{λz}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzCompDiagnostic {
    pub literal: VerificationResult,
    pub corrected: VerificationResult,
}

/// Residuals of `T_{λ,φ} = T_{φ̃} C_{λz}` for `0 < λ < 1` under the literal
/// and the entry-matched `φ̃`. A diagnostic: the literal reading fails for
/// symbols with a coanalytic part.
pub fn verify_toeplitz_comp_factorization(
    spec: &LambdaToeplitzSpec,
    size: usize,
    tolerance: f64,
) -> Result<ToeplitzCompDiagnostic> {
    let literal_symbol = literal_tilde_symbol(spec)?;
    let corrected_symbol = corrected_tilde_symbol(spec)?;
    let lhs = spec.truncate(size)?;
    let comp = build_weighted_comp(&WeightedCompositionSpec::composition(spec.lambda())?, size)?;
    let residual = |symbol: &FourierSymbol| -> Result<f64> {
        lhs.max_abs_diff(&build_toeplitz(symbol, size)?.compose(&comp)?)
    };
    Ok(ToeplitzCompDiagnostic {
        literal: VerificationResult::new(
            "toeplitz-comp",
            size,
            residual(&literal_symbol)?,
            tolerance,
            Some("literal"),
        ),
        corrected: VerificationResult::new(
            "toeplitz-comp",
            size,
            residual(&corrected_symbol)?,
            tolerance,
            Some("entry-matched"),
        ),
    })
}

/// Samples `k(φ_j, θ_k)` of an integral kernel on the uniform torus grid
/// `θ = 2π·index/M`. Row index is the output variable, column index the
/// integration variable.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    values: DMatrix<Complex>,
}

impl KernelGrid {
    pub fn grid_size(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<Complex> {
        &self.values
    }

    pub fn value(&self, j: usize, k: usize) -> Complex {
        self.values[(j, k)]
    }

    /// Trapezoid rule for `(1/2π)∫ k(φ_j, θ) f(θ) dθ`, given `f(θ_k)`.
    pub fn apply_quadrature(&self, samples: &[Complex]) -> Result<Vec<Complex>> {
        let m = self.grid_size();
        if samples.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: samples.len(),
            });
        }
        let y = &self.values * nalgebra::DVector::from_column_slice(samples);
        let scale = 1.0 / m as f64;
        Ok(y.iter().map(|v| v * scale).collect())
    }

    /// Trapezoid estimate of the `L²(T×T)` norm, with normalised measure
    /// `dφ dθ / 4π²`.
    pub fn l2_norm(&self) -> f64 {
        let m = self.grid_size() as f64;
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / (m * m)).sqrt()
    }
}

fn grid_angles(m: usize) -> Vec<f64> {
    (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect()
}

fn unit(theta: f64) -> Complex {
    Complex::from_polar(1.0, theta)
}

/// `conj(K_α(e^{iθ})) = (1 - α e^{-iθ})^{-1}` for the Szegő kernel
/// `K_α(z) = (1 - ᾱz)^{-1}`.
pub fn conj_reproducing_kernel(alpha: Complex, theta: f64) -> Complex {
    (Complex::new(1.0, 0.0) - alpha * unit(-theta)).inv()
}

fn fill_grid<F>(m: usize, exec: Execution, f: F) -> Result<KernelGrid>
where
    F: Fn(usize, usize) -> Complex + Sync + Send,
{
    if m == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut data = vec![ZERO; m * m];
    exec.for_each_chunk(&mut data, m, |k, column| {
        for (j, slot) in column.iter_mut().enumerate() {
            *slot = f(j, k);
        }
    });
    Ok(KernelGrid {
        values: DMatrix::from_vec(m, m, data),
    })
}

/// Kernel of `T_{λ,φ}` as an integral operator on `H²`:
/// `(φ₊(e^{iφ}) + φ₋(e^{iθ})) · conj(K_{λe^{iφ}}(e^{iθ}))`.
pub fn build_kernel_grid(spec: &LambdaToeplitzSpec, m: usize) -> Result<KernelGrid> {
    build_kernel_grid_with(spec, m, Execution::default())
}

pub fn build_kernel_grid_with(
    spec: &LambdaToeplitzSpec,
    m: usize,
    exec: Execution,
) -> Result<KernelGrid> {
    require_open_disc(spec.lambda())?;
    let angles = grid_angles(m);
    let plus = spec.symbol().analytic_part().evaluate_grid(m);
    let minus = spec.symbol().coanalytic_part().evaluate_grid(m);
    let lambda = spec.lambda();
    fill_grid(m, exec, |j, k| {
        (plus[j] + minus[k]) * conj_reproducing_kernel(lambda * unit(angles[j]), angles[k])
    })
}

/// Kernel of `W_{ψ,cz}`: `ψ(e^{iφ}) (1 - e^{-iθ} c e^{iφ})^{-1}`.
pub fn build_wco_kernel_grid(w: &WeightedCompositionSpec, m: usize) -> Result<KernelGrid> {
    build_wco_kernel_grid_with(w, m, Execution::default())
}

pub fn build_wco_kernel_grid_with(
    w: &WeightedCompositionSpec,
    m: usize,
    exec: Execution,
) -> Result<KernelGrid> {
    require_open_disc(w.multiplier())?;
    let angles = grid_angles(m);
    let tau: Vec<Complex> = angles.iter().map(|&t| w.multiplier() * unit(t)).collect();
    sampled_kernel(w.weight(), &tau, exec)
}

/// Kernel of `W_{ψ,τ}` for an arbitrary self-map `τ` given by its boundary
/// samples `τ(e^{iθ_j})`; requires `max |τ| < 1`.
pub fn build_sampled_wco_kernel_grid(
    weight: &FourierSymbol,
    tau_samples: &[Complex],
) -> Result<KernelGrid> {
    if let Some((lo, _)) = weight.support() {
        if lo < 0 {
            return Err(Error::NotAnalytic(lo));
        }
    }
    let reach = tau_samples.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if reach.is_nan() || reach >= 1.0 {
        return Err(Error::SingularKernel(reach));
    }
    sampled_kernel(weight, tau_samples, Execution::default())
}

fn sampled_kernel(weight: &FourierSymbol, tau: &[Complex], exec: Execution) -> Result<KernelGrid> {
    let m = tau.len();
    let angles = grid_angles(m);
    let psi = weight.evaluate_grid(m);
    fill_grid(m, exec, |j, k| {
        psi[j] * conj_reproducing_kernel(tau[j], angles[k])
    })
}

/// Quadrature Hilbert–Schmidt norm of `W_{ψ,cz}` from its kernel grid.
/// For linear `τ` this tends to `‖ψ‖₂ / (1 - |c|²)^{1/2}`.
pub fn kernel_hs_norm(w: &WeightedCompositionSpec, m: usize) -> Result<f64> {
    Ok(build_wco_kernel_grid(w, m)?.l2_norm())
}
