//! Subcommand bodies. Each returns the human table plus both machine
//! renderings; `main` picks one for `--out`.

use std::fmt::Write as _;
use std::path::Path;

use lambda_toeplitz::factorization::{
    kernel_hs_norm, verify_toeplitz_comp_factorization, verify_unitary_factorization,
    verify_wco_sum,
};
use lambda_toeplitz::io::{
    format_float, matrix_to_csv, parse_matrix_csv, parse_vector_csv, read_symbol,
    singular_values_to_csv, to_json_string, vector_to_csv,
};
use lambda_toeplitz::operator::solve_recurrence as solve;
use lambda_toeplitz::spectral::{
    analyze, finite_rank_study_with, hs_norm_closed_form, norm_convergence_study_with,
    sawtooth_norm_study_with, triangular_rank, wco_spectrum_check,
};
use lambda_toeplitz::{
    Complex, Execution, FourierSymbol, LambdaToeplitzSpec, TruncatedOperator, VerificationResult,
    WeightedCompositionSpec,
};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::{Common, Identity, Method};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lambda_toeplitz::Error),
    #[error("{0}")]
    Input(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Output {
    pub table: String,
    pub csv: String,
    pub json: String,
    /// Some verification residual exceeded its tolerance.
    pub failed: bool,
}

impl Output {
    fn new(table: String, csv: String, json: Value, failed: bool) -> Self {
        Self {
            table,
            csv,
            json: to_json_string(&json).expect("JSON values serialise"),
            failed,
        }
    }
}

/// Growth ratio the sawtooth demo must exceed.
const SAWTOOTH_GROWTH: f64 = 1.5;

fn lambda(common: &Common, default: Complex) -> Complex {
    match (common.lambda_re, common.lambda_im) {
        (None, None) => default,
        (re, im) => Complex::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
    }
}

fn symbol(common: &Common) -> Result<FourierSymbol> {
    let path = common
        .symbol
        .as_deref()
        .ok_or_else(|| CliError::Input("--symbol is required".into()))?;
    match read_symbol(path) {
        Err(lambda_toeplitz::Error::Io(source)) => Err(CliError::Read {
            path: path.display().to_string(),
            source,
        }),
        other => Ok(other?),
    }
}

fn spec(common: &Common) -> Result<LambdaToeplitzSpec> {
    let lambda = lambda(common, Complex::new(0.0, 0.0));
    Ok(LambdaToeplitzSpec::new(lambda, symbol(common)?)?)
}

fn check_sizes(sizes: &[usize]) -> Result<&[usize]> {
    if sizes.is_empty() {
        return Err(CliError::Input("--sizes is required".into()));
    }
    if sizes.contains(&0) {
        return Err(CliError::Input("sizes must be positive".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Input("sizes must be strictly ascending".into()));
    }
    Ok(sizes)
}

fn sizes(common: &Common) -> Result<&[usize]> {
    check_sizes(&common.sizes)
}

fn single_size(common: &Common) -> Result<usize> {
    match sizes(common)? {
        [n] => Ok(*n),
        _ => Err(CliError::Input(
            "this command takes exactly one size".into(),
        )),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn complex_json(z: Complex) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn matrix_json(op: &TruncatedOperator) -> Value {
    let a = op.entries();
    let part = |f: fn(&Complex) -> f64| -> Vec<Vec<f64>> {
        (0..op.size())
            .map(|n| (0..op.size()).map(|m| f(&a[(n, m)])).collect())
            .collect()
    };
    json!({
        "N": op.size(),
        "provenance": op.provenance().to_string(),
        "re": part(|z| z.re),
        "im": part(|z| z.im),
    })
}

fn fmt_complex(z: Complex) -> String {
    format!("{:+.12e} {:+.12e}i", z.re, z.im)
}

fn matrix_table(op: &TruncatedOperator) -> String {
    let mut out = format!("N = {}: {}\n", op.size(), op.provenance());
    writeln!(out, "frobenius_norm  {:.12e}", op.frobenius_norm()).unwrap();
    if op.size() <= 8 {
        for n in 0..op.size() {
            let row: Vec<_> = (0..op.size()).map(|m| fmt_complex(op.get(n, m))).collect();
            writeln!(out, "  {}", row.join("  ")).unwrap();
        }
    }
    out
}

fn results_table(results: &[VerificationResult]) -> String {
    let mut out = format!(
        "{:<14} {:<14} {:>6} {:>22} {:>10} {}\n",
        "identity", "variant", "N", "residual", "tolerance", "pass"
    );
    for r in results {
        writeln!(
            out,
            "{:<14} {:<14} {:>6} {:>22.12e} {:>10.1e} {}",
            r.identity,
            r.variant.as_deref().unwrap_or("-"),
            r.size,
            r.residual,
            r.tolerance,
            r.pass
        )
        .unwrap();
    }
    out
}

fn results_csv(results: &[VerificationResult]) -> String {
    let mut out = String::from("identity,variant,N,residual,tolerance,pass\n");
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.identity,
            r.variant.as_deref().unwrap_or(""),
            r.size,
            format_float(r.residual),
            format_float(r.tolerance),
            r.pass
        )
        .unwrap();
    }
    out
}

fn norms_table_csv(norms: &[(usize, f64)]) -> (String, String) {
    let mut table = format!("{:>6} {:>22}\n", "N", "operator_norm");
    let mut csv = String::from("N,operator_norm\n");
    for &(n, norm) in norms {
        writeln!(table, "{n:>6} {norm:>22.12e}").unwrap();
        writeln!(csv, "{n},{}", format_float(norm)).unwrap();
    }
    (table, csv)
}

fn norms_json(norms: &[(usize, f64)]) -> Vec<Value> {
    norms
        .iter()
        .map(|&(n, norm)| json!({ "N": n, "operator_norm": norm }))
        .collect()
}

pub fn build(common: &Common) -> Result<Output> {
    let n = single_size(common)?;
    let op = spec(common)?.truncate(n)?;
    Ok(Output::new(
        matrix_table(&op),
        matrix_to_csv(op.entries()),
        matrix_json(&op),
        false,
    ))
}

pub fn apply(common: &Common, vector: Option<&Path>, method: Method) -> Result<Output> {
    let spec = spec(common)?;
    let x = match vector {
        Some(path) => {
            let x = parse_vector_csv(&read_text(path)?)?;
            if !common.sizes.is_empty() {
                let n = single_size(common)?;
                if n != x.len() {
                    return Err(lambda_toeplitz::Error::DimensionMismatch {
                        expected: n,
                        actual: x.len(),
                    }
                    .into());
                }
            }
            if x.is_empty() {
                return Err(lambda_toeplitz::Error::EmptyTruncation.into());
            }
            x
        }
        None => vec![Complex::new(1.0, 0.0); single_size(common)?],
    };
    let (y, name) = match method {
        Method::Fast => (spec.apply_fast(&x), "fast"),
        Method::Naive => (spec.truncate(x.len())?.apply_naive(&x)?, "naive"),
    };
    let norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut table = format!("N = {}, method = {name}, |Tx| = {norm:.12e}\n", x.len());
    for (k, v) in y.iter().enumerate().take(8) {
        writeln!(table, "{k:>6}  {}", fmt_complex(*v)).unwrap();
    }
    let json = json!({
        "N": x.len(),
        "method": name,
        "re": y.iter().map(|v| v.re).collect::<Vec<_>>(),
        "im": y.iter().map(|v| v.im).collect::<Vec<_>>(),
    });
    Ok(Output::new(table, vector_to_csv(&y), json, false))
}

pub fn svd(common: &Common, rank_tol: f64) -> Result<Output> {
    let spec = spec(common)?;
    let sizes = sizes(common)?;
    let reports = Execution::default()
        .map(sizes, |&n| {
            analyze(&spec.truncate(n)?, spec.lambda(), rank_tol)
        })
        .into_iter()
        .collect::<lambda_toeplitz::Result<Vec<_>>>()?;

    let mut table = format!(
        "{:>6} {:>22} {:>22} {:>22} {:>6} {:>22}\n",
        "N", "sigma_1", "frobenius_norm", "trace_norm", "rank", "min_decay_margin"
    );
    for r in &reports {
        writeln!(
            table,
            "{:>6} {:>22.12e} {:>22.12e} {:>22.12e} {:>6} {:>22.12e}",
            r.size,
            r.operator_norm,
            r.frobenius_norm,
            r.trace_norm,
            r.numerical_rank,
            r.min_decay_margin()
        )
        .unwrap();
    }
    let csv = match reports.as_slice() {
        [only] => singular_values_to_csv(&only.singular_values),
        _ => {
            let mut csv = String::from("N,k,sigma_k\n");
            for r in &reports {
                for (k, s) in r.singular_values.iter().enumerate() {
                    writeln!(csv, "{},{},{}", r.size, k + 1, format_float(*s)).unwrap();
                }
            }
            csv
        }
    };
    let json = serde_json::to_value(&reports).expect("reports serialise");
    Ok(Output::new(table, csv, json, false))
}

pub fn hsnorm(common: &Common, tol: f64, grid: usize) -> Result<Output> {
    check_tol(tol)?;
    let spec = spec(common)?;
    let sizes = sizes(common)?;
    let closed = hs_norm_closed_form(&spec)?;
    let frobenius = Execution::default()
        .map(sizes, |&n| Ok((n, spec.truncate(n)?.frobenius_norm())))
        .into_iter()
        .collect::<lambda_toeplitz::Result<Vec<_>>>()?;
    let quadrature = if spec.symbol().is_analytic() {
        let w = WeightedCompositionSpec::new(spec.symbol().clone(), spec.lambda())?;
        Some(kernel_hs_norm(&w, grid)?)
    } else {
        None
    };

    let verification: Vec<_> = frobenius
        .iter()
        .map(|&(n, f)| {
            let excess = ((f - closed) / closed.max(f64::MIN_POSITIVE)).max(0.0);
            VerificationResult::new("hs-bound", n, excess, tol, None)
        })
        .collect();
    let failed = verification.iter().any(|r| !r.pass);

    let mut table = format!("closed_form  {closed:.12e}\n");
    if let Some(q) = quadrature {
        writeln!(table, "kernel_quadrature (M = {grid})  {q:.12e}").unwrap();
    }
    writeln!(
        table,
        "{:>6} {:>22} {:>22}",
        "N", "frobenius_norm", "closed_form - frobenius"
    )
    .unwrap();
    let mut csv = String::from("N,frobenius_norm,closed_form,gap\n");
    for &(n, f) in &frobenius {
        writeln!(table, "{n:>6} {f:>22.12e} {:>22.12e}", closed - f).unwrap();
        writeln!(
            csv,
            "{n},{},{},{}",
            format_float(f),
            format_float(closed),
            format_float(closed - f)
        )
        .unwrap();
    }
    let json = json!({
        "closed_form": closed,
        "grid": grid,
        "kernel_quadrature": quadrature,
        "sections": frobenius
            .iter()
            .map(|&(n, f)| json!({ "N": n, "frobenius_norm": f, "gap": closed - f }))
            .collect::<Vec<_>>(),
        "verification": verification,
    });
    Ok(Output::new(table, csv, json, failed))
}

pub fn verify(common: &Common, identity: Identity, tol: f64) -> Result<Output> {
    check_tol(tol)?;
    let spec = spec(common)?;
    let sizes = sizes(common)?;
    let mut results = Vec::new();
    let mut failed = false;
    for &n in sizes {
        match identity {
            Identity::Unitary => results.push(verify_unitary_factorization(&spec, n, tol)?),
            Identity::WcoSum => results.push(verify_wco_sum(&spec, n, tol)?),
            Identity::ToeplitzComp => {
                // The literal reading is a known-failing diagnostic; only the
                // entry-matched variant decides the exit status.
                let d = verify_toeplitz_comp_factorization(&spec, n, tol)?;
                failed |= !d.corrected.pass;
                results.push(d.literal);
                results.push(d.corrected);
            }
        }
    }
    if identity != Identity::ToeplitzComp {
        failed = results.iter().any(|r| !r.pass);
    }
    let json = serde_json::to_value(&results).expect("results serialise");
    Ok(Output::new(
        results_table(&results),
        results_csv(&results),
        json,
        failed,
    ))
}

pub fn rank(common: &Common, rank_tol: f64) -> Result<Output> {
    let spec = spec(common)?;
    let sizes = sizes(common)?;
    let ranks = finite_rank_study_with(&spec, sizes, rank_tol, Execution::default())?;
    let rows: Vec<_> = ranks
        .iter()
        .map(|&(n, r)| (n, r, triangular_rank(&spec, n)))
        .collect();
    let failed = rows
        .iter()
        .any(|&(_, r, exact)| exact.is_some_and(|e| e != r));

    let mut table = format!(
        "rank_tol = {rank_tol:e}\n{:>6} {:>14} {:>10}\n",
        "N", "numerical_rank", "exact_rank"
    );
    let mut csv = String::from("N,numerical_rank,exact_rank\n");
    for &(n, r, exact) in &rows {
        let e = exact.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            table,
            "{n:>6} {r:>14} {:>10}",
            if e.is_empty() { "-" } else { &e }
        )
        .unwrap();
        writeln!(csv, "{n},{r},{e}").unwrap();
    }
    let json = json!({
        "rank_tol": rank_tol,
        "pass": !failed,
        "ranks": rows
            .iter()
            .map(|&(n, r, exact)| json!({ "N": n, "numerical_rank": r, "exact_rank": exact }))
            .collect::<Vec<_>>(),
    });
    Ok(Output::new(table, csv, json, failed))
}

pub fn spectrum(common: &Common, tol: f64) -> Result<Output> {
    check_tol(tol)?;
    let spec = spec(common)?;
    let sizes = sizes(common)?;
    let w = WeightedCompositionSpec::new(spec.symbol().clone(), spec.lambda())?;
    let checks = sizes
        .iter()
        .map(|&n| wco_spectrum_check(&w, n, tol))
        .collect::<lambda_toeplitz::Result<Vec<_>>>()?;
    let failed = checks.iter().any(|c| !c.result.pass);

    let results: Vec<_> = checks.iter().map(|c| c.result.clone()).collect();
    let mut table = results_table(&results);
    let mut csv = String::from("N,k,re,im,predicted_re,predicted_im\n");
    for c in &checks {
        let distinct = match c.pairwise_distinct {
            Some(true) => "pairwise distinct",
            Some(false) => "NOT pairwise distinct",
            None => "distinctness not required",
        };
        writeln!(table, "N = {}: {distinct}", c.result.size).unwrap();
        for (k, (e, p)) in c.eigenvalues.iter().zip(&c.predicted).enumerate() {
            writeln!(
                csv,
                "{},{k},{},{},{},{}",
                c.result.size,
                format_float(e.re),
                format_float(e.im),
                format_float(p.re),
                format_float(p.im)
            )
            .unwrap();
        }
    }
    let json = Value::Array(
        checks
            .iter()
            .map(|c| {
                json!({
                    "N": c.result.size,
                    "eigenvalues": c.eigenvalues.iter().copied().map(complex_json).collect::<Vec<_>>(),
                    "predicted": c.predicted.iter().copied().map(complex_json).collect::<Vec<_>>(),
                    "pairwise_distinct": c.pairwise_distinct,
                    "result": c.result,
                })
            })
            .collect(),
    );
    Ok(Output::new(table, csv, json, failed))
}

pub fn norms(common: &Common) -> Result<Output> {
    let spec = spec(common)?;
    let sizes = sizes(common)?;
    let norms = norm_convergence_study_with(&spec, sizes, Execution::default())?;
    let twisted = spec.symbol().twist_plus(spec.lambda());
    let grid = (16 * twisted.degree() + 1).max(4096);
    let sup = twisted.sup_norm_estimate(grid);

    let (mut table, csv) = norms_table_csv(&norms);
    writeln!(table, "sup-norm estimate of the twisted symbol: {sup:.12e}").unwrap();
    let json = json!({ "sup_norm_estimate": sup, "norms": norms_json(&norms) });
    Ok(Output::new(table, csv, json, false))
}

pub fn solve_recurrence(common: &Common, rhs: Option<&Path>, tol: f64) -> Result<Output> {
    check_tol(tol)?;
    let spec = spec(common)?;
    let n = single_size(common)?;
    let b = match rhs {
        Some(path) => parse_matrix_csv(&read_text(path)?, n)?,
        None => DMatrix::from_element(n, n, Complex::new(0.0, 0.0)),
    };
    let first_row: Vec<_> = (0..n).map(|m| spec.entry(0, m)).collect();
    let first_col: Vec<_> = (0..n).map(|k| spec.entry(k, 0)).collect();
    let op = solve(spec.lambda(), &b, &first_row, &first_col)?;

    let mut table = matrix_table(&op);
    let mut json = matrix_json(&op);
    let mut failed = false;
    // With B = 0 the solution must be the section itself.
    if rhs.is_none() {
        let r = VerificationResult::new(
            "recurrence",
            n,
            op.max_abs_diff(&spec.truncate(n)?)?,
            tol,
            None,
        );
        failed = !r.pass;
        table.push_str(&results_table(std::slice::from_ref(&r)));
        json["verification"] = serde_json::to_value(&r).expect("result serialises");
    }
    Ok(Output::new(
        table,
        matrix_to_csv(op.entries()),
        json,
        failed,
    ))
}

pub fn sawtooth_demo(common: &Common) -> Result<Output> {
    let lambda = lambda(common, Complex::new(-1.0, 0.0));
    let sizes = if common.sizes.is_empty() {
        &[64, 1024][..]
    } else {
        sizes(common)?
    };
    if sizes.len() < 2 {
        return Err(CliError::Input(
            "sawtooth-demo needs at least two sizes".into(),
        ));
    }
    let norms = sawtooth_norm_study_with(lambda, sizes, Execution::default())?;
    let growth = norms[norms.len() - 1].1 / norms[0].1;
    let pass = growth > SAWTOOTH_GROWTH;

    let (mut table, csv) = norms_table_csv(&norms);
    writeln!(
        table,
        "growth {growth:.6} (threshold {SAWTOOTH_GROWTH}): {}",
        if pass { "pass" } else { "FAIL" }
    )
    .unwrap();
    let json = json!({
        "lambda": complex_json(lambda),
        "norms": norms_json(&norms),
        "growth": growth,
        "threshold": SAWTOOTH_GROWTH,
        "pass": pass,
    });
    Ok(Output::new(table, csv, json, !pass))
}
