//! Gram matrices from the one-clean-qubit engine and classical baselines.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{EncodeCache, FeatureMapSpec};
use crate::dqc1::{
    exact_offdiagonal, noisy_offdiagonal, sample_from_kernel, ControlPrep, NoiseModel,
    RegisterPrep, ShotPlan,
};
use crate::error::{Error, Result};
use crate::tensor::{adjoint, matmul, Complex, ComplexMatrix};
use crate::util::{format_sig12, mix_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    ExactQuantum,
    SampledQuantum,
    NoisyQuantum,
    ClassicalRbf,
    RandomFourier,
}

impl KernelMethod {
    pub fn is_deterministic(self) -> bool {
        matches!(
            self,
            KernelMethod::ExactQuantum | KernelMethod::NoisyQuantum | KernelMethod::ClassicalRbf
        )
    }
}

/// Parameters a Gram matrix was computed with; absent fields did not apply.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GramParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub register: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_x: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_y: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_features: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub psd_clipped: bool,
}

/// Kernel values between two sample sets, row-major `rows × cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    pub method: KernelMethod,
    pub params: GramParams,
}

impl GramMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        method: KernelMethod,
        params: GramParams,
    ) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::dims(
                "GramMatrix::new",
                format!("{rows}x{cols} needs {} values, got {}", rows * cols, values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("Gram values must be finite"));
        }
        Ok(GramMatrix {
            rows,
            cols,
            values,
            method,
            params,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Largest `|G[i,j] − G[j,i]|`; `None` for rectangular matrices.
    pub fn asymmetry(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        Some(worst)
    }

    /// Sub-matrix on the given row and column indices.
    pub fn select(&self, row_idx: &[usize], col_idx: &[usize]) -> GramMatrix {
        let values = row_idx
            .iter()
            .flat_map(|&i| col_idx.iter().map(move |&j| self.get(i, j)))
            .collect();
        GramMatrix {
            rows: row_idx.len(),
            cols: col_idx.len(),
            values,
            method: self.method,
            params: self.params.clone(),
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> GramMatrix {
        GramMatrix {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// CSV: a header of column sample indices, then one row of values per line.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 16);
        let header: Vec<String> = (0..self.cols).map(|j| j.to_string()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|&v| format_sig12(v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV layout; method and parameters are not stored there.
    pub fn from_csv_str(text: &str, method: KernelMethod, params: GramParams) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: "<gram csv>".into(),
            line: line as u64,
            msg,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::invalid("empty Gram CSV"))?;
        let cols = header.split(',').count();
        let mut values = Vec::new();
        let mut rows = 0;
        for (k, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(parse_err(k + 2, format!("expected {cols} values, got {}", fields.len())));
            }
            for f in fields {
                values.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| parse_err(k + 2, format!("bad value {f:?}: {e}")))?,
                );
            }
            rows += 1;
        }
        GramMatrix::new(rows, cols, values, method, params)
    }

    /// Binary: `rows` and `cols` as u64 little-endian, then row-major f64 LE.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.values.len());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], method: KernelMethod, params: GramParams) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(Error::invalid("binary Gram shorter than its 16-byte header"));
        }
        let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
        let (rows, cols) = (word(0) as usize, word(1) as usize);
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .and_then(|n| n.checked_add(16))
            .ok_or_else(|| Error::invalid("binary Gram dimensions overflow"))?;
        if bytes.len() != expected {
            return Err(Error::invalid(format!(
                "binary Gram {rows}x{cols} needs {expected} bytes, got {}",
                bytes.len()
            )));
        }
        let values = bytes[16..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        GramMatrix::new(rows, cols, values, method, params)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_csv_string().as_bytes())
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_bytes())
    }

    pub fn load_binary(path: &Path, method: KernelMethod, params: GramParams) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, method, params)
    }

    pub fn load_csv(path: &Path, method: KernelMethod, params: GramParams) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, method, params).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: path.into(),
                line,
                msg,
            },
            other => other,
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Which engine path fills a quantum Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GramMode {
    Exact,
    Sampled {
        plan: ShotPlan,
        control: ControlPrep,
        seed: u64,
    },
    Noisy {
        noise: NoiseModel,
    },
}

/// `Tr(ρₙ A B†)` from two compiled feature maps.
///
/// Mixed and pure registers reduce to inner products of the flattened
/// matrices and of their first rows; other preparations go through the
/// general trace.
pub fn kernel_from_encodings(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    prep: &RegisterPrep,
) -> Result<Complex> {
    match prep {
        RegisterPrep::MaximallyMixed => {
            let s: Complex = a
                .entries()
                .iter()
                .zip(b.entries())
                .map(|(x, y)| x * y.conj())
                .sum();
            Ok(s / a.rows() as f64)
        }
        RegisterPrep::AllZerosPure => {
            let n = a.cols();
            Ok(a.entries()[..n]
                .iter()
                .zip(&b.entries()[..n])
                .map(|(x, y)| x * y.conj())
                .sum())
        }
        RegisterPrep::Custom(_) => exact_offdiagonal(&matmul(a, &adjoint(b))?, prep),
    }
}

fn validate_samples(xs: &[[f64; 2]], name: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::invalid(format!("{name}: empty sample list")));
    }
    if xs.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::invalid(format!("{name}: non-finite sample")));
    }
    Ok(())
}

/// Fills a `rows × cols` matrix in parallel. For self-Grams only `j ≥ i` is
/// evaluated and mirrored. Output does not depend on thread count.
fn fill<F>(rows: usize, cols: usize, symmetric: bool, entry: F) -> Result<Vec<f64>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let computed: Vec<Vec<f64>> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let start = if symmetric { i } else { 0 };
            (start..cols).map(|j| entry(i, j)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; rows * cols];
    for (i, row) in computed.into_iter().enumerate() {
        let start = if symmetric { i } else { 0 };
        for (off, v) in row.into_iter().enumerate() {
            let j = start + off;
            values[i * cols + j] = v;
            if symmetric {
                values[j * cols + i] = v;
            }
        }
    }
    Ok(values)
}

/// Gram matrix of `|K(xᵢ, x′ⱼ)|` over phase-scaled samples.
///
/// When `xs_a` and `xs_b` hold the same points the matrix is assembled as a
/// self-Gram: upper triangle only, mirrored. Sampled entries use the seed
/// `mix(seed, i, j)` and are clipped to `|K̂| ≤ 1`.
pub fn quantum_gram(
    xs_a: &[[f64; 2]],
    xs_b: &[[f64; 2]],
    r: usize,
    prep: &RegisterPrep,
    mode: GramMode,
) -> Result<GramMatrix> {
    validate_samples(xs_a, "xs_a")?;
    validate_samples(xs_b, "xs_b")?;
    if let RegisterPrep::Custom(rho) = prep {
        if rho.rows() != 4 {
            return Err(Error::dims("quantum_gram", "custom register prep must be 4x4"));
        }
    }
    let symmetric = xs_a == xs_b;
    let cache_a = EncodeCache::new(xs_a, r)?;
    let cache_b = if symmetric { None } else { Some(EncodeCache::new(xs_b, r)?) };
    let cache_b = cache_b.as_ref().unwrap_or(&cache_a);

    let mut params = GramParams {
        r: Some(r),
        register: Some(prep.label().to_string()),
        ..GramParams::default()
    };
    let (method, values) = match mode {
        GramMode::Exact => {
            let v = fill(xs_a.len(), xs_b.len(), symmetric, |i, j| {
                Ok(kernel_from_encodings(cache_a.get(i), cache_b.get(j), prep)?.norm())
            })?;
            (KernelMethod::ExactQuantum, v)
        }
        GramMode::Sampled { plan, control, seed } => {
            params.beta = Some(control.beta());
            params.shots_x = Some(plan.shots_x);
            params.shots_y = Some(plan.shots_y);
            if plan.epsilon > 0.0 {
                params.epsilon = Some(plan.epsilon);
                params.delta = Some(plan.delta);
            }
            params.seed = Some(seed);
            let v = fill(xs_a.len(), xs_b.len(), symmetric, |i, j| {
                let k = kernel_from_encodings(cache_a.get(i), cache_b.get(j), prep)?;
                let est = sample_from_kernel(k, control, &plan, mix_seed(seed, i as u64, j as u64))?;
                Ok(est.norm().min(1.0))
            })?;
            (KernelMethod::SampledQuantum, v)
        }
        GramMode::Noisy { noise } => {
            params.noise_p = Some(noise.strength());
            let v = fill(xs_a.len(), xs_b.len(), symmetric, |i, j| {
                Ok(noisy_offdiagonal(&cache_a.spec(i), &cache_b.spec(j), prep, noise)?.norm())
            })?;
            (KernelMethod::NoisyQuantum, v)
        }
    };
    GramMatrix::new(xs_a.len(), xs_b.len(), values, method, params)
}

/// Complex kernel `Tr(ρₙ 𝒰ʳ(x) 𝒰ʳ†(x′))` for a single pair.
pub fn quantum_kernel(x: [f64; 2], x_prime: [f64; 2], r: usize, prep: &RegisterPrep) -> Result<Complex> {
    let a = FeatureMapSpec::new(&x, r)?;
    let b = FeatureMapSpec::new(&x_prime, r)?;
    exact_offdiagonal(&crate::circuit::kernel_unitary(&a, &b)?, prep)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(−γ‖x − x′‖²)`.
pub fn rbf_kernel(x: &[f64], x_prime: &[f64], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if x.len() != x_prime.len() {
        return Err(Error::dims("rbf_kernel", format!("{} vs {}", x.len(), x_prime.len())));
    }
    Ok((-gamma * sq_dist(x, x_prime)).exp())
}

/// Frequencies `ω ~ N(0, 2γ·I)`, the spectral measure of the RBF kernel.
fn rff_frequencies(dim: usize, gamma: f64, num_features: usize, seed: u64) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, (2.0 * gamma).sqrt()).expect("positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_features)
        .map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect())
        .collect()
}

/// Monte-Carlo estimate `(1/M) Σ cos(ωₘ·(x − x′))` of the RBF kernel.
pub fn rff_estimate(
    x: &[f64],
    x_prime: &[f64],
    gamma: f64,
    num_features: usize,
    seed: u64,
) -> Result<f64> {
    check_gamma(gamma)?;
    if num_features == 0 {
        return Err(Error::invalid("num_features must be at least 1"));
    }
    if x.len() != x_prime.len() {
        return Err(Error::dims("rff_estimate", format!("{} vs {}", x.len(), x_prime.len())));
    }
    let diff: Vec<f64> = x.iter().zip(x_prime).map(|(a, b)| a - b).collect();
    let omegas = rff_frequencies(x.len(), gamma, num_features, seed);
    let sum: f64 = omegas
        .iter()
        .map(|w| w.iter().zip(&diff).map(|(a, b)| a * b).sum::<f64>().cos())
        .sum();
    Ok(sum / num_features as f64)
}

/// Exact RBF Gram matrix.
pub fn rbf_gram(xs_a: &[[f64; 2]], xs_b: &[[f64; 2]], gamma: f64) -> Result<GramMatrix> {
    check_gamma(gamma)?;
    validate_samples(xs_a, "xs_a")?;
    validate_samples(xs_b, "xs_b")?;
    let symmetric = xs_a == xs_b;
    let values = fill(xs_a.len(), xs_b.len(), symmetric, |i, j| {
        Ok((-gamma * sq_dist(&xs_a[i], &xs_b[j])).exp())
    })?;
    GramMatrix::new(
        xs_a.len(),
        xs_b.len(),
        values,
        KernelMethod::ClassicalRbf,
        GramParams {
            gamma: Some(gamma),
            ..GramParams::default()
        },
    )
}

/// RFF Gram matrix; every entry shares one frequency draw, so the result is
/// the explicit feature inner product `z(x)·z(x′)`.
pub fn rff_gram(
    xs_a: &[[f64; 2]],
    xs_b: &[[f64; 2]],
    gamma: f64,
    num_features: usize,
    seed: u64,
) -> Result<GramMatrix> {
    check_gamma(gamma)?;
    validate_samples(xs_a, "xs_a")?;
    validate_samples(xs_b, "xs_b")?;
    if num_features == 0 {
        return Err(Error::invalid("num_features must be at least 1"));
    }
    let omegas = rff_frequencies(2, gamma, num_features, seed);
    let symmetric = xs_a == xs_b;
    let m = num_features as f64;
    let values = fill(xs_a.len(), xs_b.len(), symmetric, |i, j| {
        let d = [xs_a[i][0] - xs_b[j][0], xs_a[i][1] - xs_b[j][1]];
        Ok(omegas.iter().map(|w| (w[0] * d[0] + w[1] * d[1]).cos()).sum::<f64>() / m)
    })?;
    GramMatrix::new(
        xs_a.len(),
        xs_b.len(),
        values,
        KernelMethod::RandomFourier,
        GramParams {
            gamma: Some(gamma),
            num_features: Some(num_features),
            seed: Some(seed),
            ..GramParams::default()
        },
    )
}

/// Nearest positive semi-definite matrix in Frobenius norm: negative
/// eigenvalues are floored at zero and the result re-symmetrized.
pub fn psd_clip(g: &GramMatrix) -> Result<GramMatrix> {
    if !g.is_square() {
        return Err(Error::dims(
            "psd_clip",
            format!("non-square {}x{}", g.rows, g.cols),
        ));
    }
    let n = g.rows;
    let m = DMatrix::from_row_slice(n, n, &g.values);
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let floored = eig.eigenvalues.map(|l| l.max(0.0));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    let rebuilt = (&rebuilt + rebuilt.transpose()) * 0.5;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(rebuilt[(i, j)]);
        }
    }
    let mut params = g.params.clone();
    params.psd_clipped = true;
    GramMatrix::new(n, n, values, g.method, params)
}

/// Smallest eigenvalue of a symmetric Gram matrix.
pub fn min_eigenvalue(g: &GramMatrix) -> Result<f64> {
    if !g.is_square() {
        return Err(Error::dims("min_eigenvalue", "non-square Gram"));
    }
    let m = DMatrix::from_row_slice(g.rows, g.rows, &g.values);
    Ok(m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
}
