//! Finitely supported Fourier symbols `φ ~ Σ a_n e^{inθ}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::Complex;

/// A trigonometric polynomial stored as a sparse map `n -> a_n`.
///
/// Indices that are not stored are zero. Zero-valued coefficients are never
/// stored, so two symbols with the same nonzero coefficients compare equal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourierSymbol {
    coefficients: BTreeMap<i64, Complex>,
}

impl FourierSymbol {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a symbol from `(index, value)` pairs. Indices must be distinct.
    pub fn from_coefficients<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex)>,
    {
        let mut coefficients = BTreeMap::new();
        for (n, value) in entries {
            if coefficients.insert(n, value).is_some() {
                return Err(Error::DuplicateIndex(n));
            }
        }
        coefficients.retain(|_, v| *v != Complex::new(0.0, 0.0));
        Ok(Self { coefficients })
    }

    /// Builds a symbol from pairs known to be distinct, dropping zeros.
    fn collect<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex)>,
    {
        Self {
            coefficients: entries
                .into_iter()
                .filter(|(_, v)| *v != Complex::new(0.0, 0.0))
                .collect(),
        }
    }

    /// Single-term symbol `value · e^{inθ}`.
    pub fn monomial(n: i64, value: Complex) -> Self {
        Self::collect([(n, value)])
    }

    /// Recovers the coefficients `|n| <= bandlimit` of a function sampled at
    /// `θ_k = 2πk/M`, via `a_n = (1/M) Σ_k f(θ_k) e^{-inθ_k}`.
    ///
    /// Exact for trigonometric polynomials of degree `<= bandlimit`.
    pub fn from_samples(samples: &[Complex], bandlimit: usize) -> Result<Self> {
        let m = samples.len();
        if m < 2 * bandlimit + 1 {
            return Err(Error::Aliasing {
                samples: m,
                bandlimit,
            });
        }
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let scale = 1.0 / m as f64;
        let k = bandlimit as i64;
        Ok(Self::collect((-k..=k).map(|n| {
            let bin = n.rem_euclid(m as i64) as usize;
            (n, buf[bin] * scale)
        })))
    }

    /// The 2π-periodic extension of `θ` on `[0, 2π)`, truncated to `|n| <= bandlimit`:
    /// `a_0 = π`, `a_n = i/n`.
    pub fn sawtooth(bandlimit: usize) -> Self {
        let k = bandlimit as i64;
        let mut entries = vec![(0, Complex::new(PI, 0.0))];
        for n in 1..=k {
            let c = Complex::new(0.0, 1.0 / n as f64);
            entries.push((n, c));
            entries.push((-n, c.conj()));
        }
        Self::collect(entries)
    }

    pub fn coefficient(&self, n: i64) -> Complex {
        self.coefficients.get(&n).copied().unwrap_or_default()
    }

    /// Stored `(n, a_n)` pairs in ascending index order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (i64, Complex)> + '_ {
        self.coefficients.iter().map(|(&n, &v)| (n, v))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Smallest and largest stored index.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.coefficients.keys().next()?;
        let hi = *self.coefficients.keys().next_back()?;
        Some((lo, hi))
    }

    /// `max |n|` over the support, zero for the zero symbol.
    pub fn degree(&self) -> usize {
        self.support()
            .map(|(lo, hi)| lo.unsigned_abs().max(hi.unsigned_abs()) as usize)
            .unwrap_or(0)
    }

    pub fn is_analytic(&self) -> bool {
        self.support().is_none_or(|(lo, _)| lo >= 0)
    }

    pub fn is_coanalytic(&self) -> bool {
        self.support().is_none_or(|(_, hi)| hi < 0)
    }

    /// `φ₊ = Pφ`: the coefficients with `n >= 0`.
    pub fn analytic_part(&self) -> Self {
        Self {
            coefficients: self
                .coefficients
                .range(0..)
                .map(|(&n, &v)| (n, v))
                .collect(),
        }
    }

    /// `φ₋ = (I - P)φ`: the coefficients with `n < 0`.
    pub fn coanalytic_part(&self) -> Self {
        Self {
            coefficients: self
                .coefficients
                .range(..0)
                .map(|(&n, &v)| (n, v))
                .collect(),
        }
    }

    /// Maps a coanalytic `φ₋` to the analytic `φ̄₋(z) = Σ_{n>=1} conj(a_{-n}) z^n`.
    pub fn conjugate_flip(&self) -> Result<Self> {
        if let Some((_, hi)) = self.support() {
            if hi >= 0 {
                return Err(Error::NotCoanalytic(hi));
            }
        }
        Ok(Self {
            coefficients: self.iter().map(|(n, v)| (-n, v.conj())).collect(),
        })
    }

    /// Index negation `a_n -> a_{-n}`.
    pub fn reflect(&self) -> Self {
        Self {
            coefficients: self.iter().map(|(n, v)| (-n, v)).collect(),
        }
    }

    /// Coefficientwise complex conjugation.
    pub fn conjugate(&self) -> Self {
        Self {
            coefficients: self.iter().map(|(n, v)| (n, v.conj())).collect(),
        }
    }

    /// `φ*` with `a*_n = conj(a_{-n})`; the symbol of the adjoint truncation.
    pub fn adjoint(&self) -> Self {
        self.reflect().conjugate()
    }

    /// `φ_{λ̄,+}`: multiplies `a_n` by `λ̄^n` for `n >= 0`.
    pub fn twist_plus(&self, lambda: Complex) -> Self {
        let factor = lambda.conj();
        let powered = scale_by_powers(self.coefficients.range(0..), factor);
        Self::collect(
            self.coefficients
                .range(..0)
                .map(|(&n, &v)| (n, v))
                .chain(powered),
        )
    }

    /// `φ_{λ̄,-}`: multiplies `a_n` by `λ̄^n` for `n < 0`. Only defined for
    /// `|λ| = 1`, where `λ̄^n = λ^{|n|}`.
    pub fn twist_minus(&self, lambda: Complex) -> Result<Self> {
        let modulus = lambda.norm();
        if (modulus - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::NotUnimodular { modulus });
        }
        // λ̄^{-j} = λ^j on the unit circle.
        let negative: Vec<_> = self
            .coefficients
            .range(..0)
            .rev()
            .map(|(&n, &v)| (-n, v))
            .collect();
        let powered =
            scale_by_powers(negative.iter().map(|(n, v)| (n, v)), lambda).map(|(n, v)| (-n, v));
        Ok(Self::collect(
            self.coefficients
                .range(0..)
                .map(|(&n, &v)| (n, v))
                .chain(powered),
        ))
    }

    /// `ψ(z) -> ψ(cz)` for analytic `ψ`: `a_n -> c^n a_n`.
    pub fn dilate(&self, c: Complex) -> Result<Self> {
        if let Some((lo, _)) = self.support() {
            if lo < 0 {
                return Err(Error::NotAnalytic(lo));
            }
        }
        let modulus = c.norm();
        if modulus > 1.0 + UNIMODULAR_TOL {
            return Err(Error::DilationOutsideDisc { modulus });
        }
        Ok(Self::collect(scale_by_powers(self.coefficients.iter(), c)))
    }

    /// `(Σ |a_n|²)^{1/2}`, exact over the stored support.
    pub fn l2_norm(&self) -> f64 {
        self.coefficients
            .values()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `φ(e^{iθ})` at a single angle.
    pub fn evaluate(&self, theta: f64) -> Complex {
        self.iter()
            .map(|(n, v)| v * Complex::from_polar(1.0, n as f64 * theta))
            .sum()
    }

    /// `φ(e^{iθ_k})` on the uniform grid `θ_k = 2πk/M`.
    ///
    /// Coefficients are folded modulo `M` before one inverse FFT, which is
    /// exact on the grid for any `M`.
    pub fn evaluate_grid(&self, grid_size: usize) -> Vec<Complex> {
        if grid_size == 0 {
            return Vec::new();
        }
        let mut buf = vec![Complex::new(0.0, 0.0); grid_size];
        for (n, v) in self.iter() {
            buf[n.rem_euclid(grid_size as i64) as usize] += v;
        }
        FftPlanner::new()
            .plan_fft_inverse(grid_size)
            .process(&mut buf);
        buf
    }

    /// Grid maximum of `|φ|`; a lower bound on `‖φ‖_∞` that converges for
    /// trigonometric polynomials as the grid is refined.
    pub fn sup_norm_estimate(&self, grid_size: usize) -> f64 {
        self.evaluate_grid(grid_size)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Slack used when deciding whether `|λ| = 1`.
pub(crate) const UNIMODULAR_TOL: f64 = 1e-12;

/// Multiplies each `(n, a_n)` (ascending, `n >= 0`) by `base^n`, accumulating
/// the power along the way.
fn scale_by_powers<'a, I>(entries: I, base: Complex) -> impl Iterator<Item = (i64, Complex)> + 'a
where
    I: IntoIterator<Item = (&'a i64, &'a Complex)> + 'a,
{
    let mut power = Complex::new(1.0, 0.0);
    let mut exponent = 0i64;
    entries.into_iter().map(move |(&n, &v)| {
        debug_assert!(n >= exponent);
        while exponent < n {
            power *= base;
            exponent += 1;
        }
        (n, v * power)
    })
}
