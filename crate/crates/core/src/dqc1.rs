//! One-clean-qubit circuit simulation.
//!
//! The register starts in `ρₙ`, the control qubit in `|0⟩` (or the partially
//! polarized `(𝟙 + βσ_z)/2`). After a Hadamard on the control and the
//! controlled `Uₙ`, the control-qubit coherence carries `Tr(ρₙUₙ)`.
//!
//! In the standard basis the reduced control state is
//! `½[[1, Tr(ρₙUₙ†)], [Tr(ρₙUₙ), 1]]`, so `⟨σ_x⟩ = Re Tr(ρₙUₙ)` and
//! `⟨σ_y⟩ = Im Tr(ρₙUₙ)`; the kernel lives in the lower-left coherence.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{hadamard_layer, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::tensor::{adjoint, matmul, trace, Complex, ComplexMatrix};

const PREP_TOL: f64 = 1e-10;

/// Initial state of the n-qubit register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rho", rename_all = "snake_case")]
pub enum RegisterPrep {
    MaximallyMixed,
    AllZerosPure,
    Custom(ComplexMatrix),
}

impl RegisterPrep {
    /// Validates a user-supplied density matrix.
    pub fn custom(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::invalid("density matrix must be square"));
        }
        if !rho.is_hermitian(PREP_TOL) {
            return Err(Error::invalid("density matrix must be Hermitian"));
        }
        let tr = trace(&rho)?;
        if (tr - Complex::new(1.0, 0.0)).norm() > PREP_TOL {
            return Err(Error::invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let n = rho.rows();
        let m = DMatrix::from_row_slice(n, n, rho.entries());
        let min_eig = m
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PREP_TOL {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(RegisterPrep::Custom(rho))
    }

    /// Explicit `N×N` density matrix.
    pub fn density(&self, n_dim: usize) -> Result<ComplexMatrix> {
        match self {
            RegisterPrep::MaximallyMixed => {
                Ok(ComplexMatrix::identity(n_dim).scale(Complex::new(1.0 / n_dim as f64, 0.0)))
            }
            RegisterPrep::AllZerosPure => {
                let mut d = vec![0.0; n_dim];
                d[0] = 1.0;
                Ok(ComplexMatrix::from_real_diagonal(&d))
            }
            RegisterPrep::Custom(rho) => {
                if rho.rows() != n_dim {
                    return Err(Error::dims(
                        "RegisterPrep::density",
                        format!("prep is {}x{}, register needs {n_dim}", rho.rows(), rho.cols()),
                    ));
                }
                Ok(rho.clone())
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RegisterPrep::MaximallyMixed => "mixed",
            RegisterPrep::AllZerosPure => "pure",
            RegisterPrep::Custom(_) => "custom",
        }
    }
}

/// Polarization `β` of the control qubit, `(𝟙 + βσ_z)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPrep {
    beta: f64,
}

impl ControlPrep {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(ControlPrep { beta })
    }

    pub fn pure() -> Self {
        ControlPrep { beta: 1.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub epsilon: f64,
    pub delta: f64,
    pub shots_x: u64,
    pub shots_y: u64,
}

impl ShotPlan {
    /// Shot counts derived from the Hoeffding bound for `(ε, δ, β)`.
    pub fn from_accuracy(epsilon: f64, delta: f64, beta: f64) -> Result<Self> {
        let shots = shots_needed(epsilon, delta, beta)?;
        Ok(ShotPlan {
            epsilon,
            delta,
            shots_x: shots,
            shots_y: shots,
        })
    }

    /// Explicit shot counts; `ε` and `δ` are left at zero.
    pub fn fixed(shots_x: u64, shots_y: u64) -> Result<Self> {
        if shots_x == 0 || shots_y == 0 {
            return Err(Error::invalid("shot counts must be at least 1"));
        }
        Ok(ShotPlan {
            epsilon: 0.0,
            delta: 0.0,
            shots_x,
            shots_y,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    /// `ρ → (1−p)ρ + p·𝟙/2^{n+1}` after every feature-map block.
    GlobalDepolarizing { p: f64 },
}

impl NoiseModel {
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("depolarizing strength must lie in [0, 1], got {p}")));
        }
        Ok(NoiseModel::GlobalDepolarizing { p })
    }

    pub fn strength(&self) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::GlobalDepolarizing { p } => *p,
        }
    }
}

fn check_prep(u_n: &ComplexMatrix, prep: &RegisterPrep) -> Result<()> {
    if !u_n.is_square() {
        return Err(Error::dims(
            "exact_offdiagonal",
            format!("non-square unitary {}x{}", u_n.rows(), u_n.cols()),
        ));
    }
    if let RegisterPrep::Custom(rho) = prep {
        if rho.rows() != u_n.rows() {
            return Err(Error::dims(
                "exact_offdiagonal",
                format!("prep dimension {} vs unitary dimension {}", rho.rows(), u_n.rows()),
            ));
        }
    }
    Ok(())
}

/// `Tr(ρₙ Uₙ)`.
pub fn exact_offdiagonal(u_n: &ComplexMatrix, prep: &RegisterPrep) -> Result<Complex> {
    check_prep(u_n, prep)?;
    let n = u_n.rows();
    match prep {
        RegisterPrep::MaximallyMixed => Ok(trace(u_n)? / n as f64),
        RegisterPrep::AllZerosPure => Ok(u_n.get(0, 0)),
        RegisterPrep::Custom(rho) => trace(&matmul(rho, u_n)?),
    }
}

/// Shots per quadrature: `⌈2·ln(2/δ) / (ε²β²)⌉`.
pub fn shots_needed(epsilon: f64, delta: f64, beta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    ControlPrep::new(beta)?;
    let n = 2.0 * (2.0 / delta).ln() / (epsilon * epsilon * beta * beta);
    Ok(n.ceil() as u64)
}

/// Outcome probabilities `P(+1)` for σ_x and σ_y on the control qubit.
pub fn readout_probabilities(k: Complex, control: ControlPrep) -> (f64, f64) {
    let b = control.beta();
    let px = (0.5 * (1.0 + b * k.re)).clamp(0.0, 1.0);
    let py = (0.5 * (1.0 + b * k.im)).clamp(0.0, 1.0);
    (px, py)
}

/// Finite-shot estimate of `Tr(ρₙUₙ)` from σ_x and σ_y measurements.
///
/// Each quadrature's ±1 outcomes are summarized by a binomial draw of the
/// `+1` count, which has the same law as the individual Bernoulli shots.
pub fn sample_offdiagonal(
    u_n: &ComplexMatrix,
    prep: &RegisterPrep,
    control: ControlPrep,
    plan: &ShotPlan,
    seed: u64,
) -> Result<Complex> {
    let k = exact_offdiagonal(u_n, prep)?;
    sample_from_kernel(k, control, plan, seed)
}

/// Shot sampling given the exact coherence, shared with Gram assembly.
pub fn sample_from_kernel(
    k: Complex,
    control: ControlPrep,
    plan: &ShotPlan,
    seed: u64,
) -> Result<Complex> {
    if plan.shots_x == 0 || plan.shots_y == 0 {
        return Err(Error::invalid("shot counts must be at least 1"));
    }
    let (px, py) = readout_probabilities(k, control);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = |shots: u64, p: f64, rng: &mut ChaCha8Rng| -> f64 {
        let plus = Binomial::new(shots, p).expect("p clamped to [0,1]").sample(rng);
        (2.0 * plus as f64 - shots as f64) / shots as f64
    };
    let mx = mean(plan.shots_x, px, &mut rng);
    let my = mean(plan.shots_y, py, &mut rng);
    let b = control.beta();
    Ok(Complex::new(mx / b, my / b))
}

/// Conjugates the full (control ⊗ register) state by `|0⟩⟨0|⊗𝟙 + |1⟩⟨1|⊗b`.
///
/// Works block-wise on the 2×2 grid of `N×N` blocks; the `|0⟩⟨0|` block is
/// left untouched.
fn apply_controlled(rho: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = b.rows();
    let dim = 2 * n;
    let block = |r0: usize, c0: usize| -> ComplexMatrix {
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.extend_from_slice(&rho.entries()[(r0 + i) * dim + c0..(r0 + i) * dim + c0 + n]);
        }
        ComplexMatrix::from_raw(n, n, out)
    };
    let b_dag = adjoint(b);
    let a01 = matmul(&block(0, n), &b_dag).expect("square");
    let a10 = matmul(b, &block(n, 0)).expect("square");
    let a11 = matmul(&matmul(b, &block(n, n)).expect("square"), &b_dag).expect("square");

    let mut out = rho.entries().to_vec();
    for i in 0..n {
        for j in 0..n {
            out[i * dim + n + j] = a01.get(i, j);
            out[(n + i) * dim + j] = a10.get(i, j);
            out[(n + i) * dim + n + j] = a11.get(i, j);
        }
    }
    ComplexMatrix::from_raw(dim, dim, out)
}

fn depolarize(rho: &ComplexMatrix, p: f64) -> ComplexMatrix {
    if p == 0.0 {
        return rho.clone();
    }
    let dim = rho.rows();
    let mut out: Vec<Complex> = rho.entries().iter().map(|z| z * (1.0 - p)).collect();
    for i in 0..dim {
        out[i * dim + i] += Complex::new(p / dim as f64, 0.0);
    }
    ComplexMatrix::from_raw(dim, dim, out)
}

/// Full density-matrix simulation of the (n+1)-qubit circuit under noise.
///
/// `Uₙ = 𝒰ʳ(x)𝒰ʳ†(x′)` is applied as its `2r` feature-map blocks (the `r`
/// adjoint blocks of `x′` first), each controlled on the clean qubit and each
/// followed by the noise channel. Control-qubit Hadamards are noiseless.
/// Returns the control coherence `2·⟨1|ρ_f|0⟩`, which equals `Tr(ρₙUₙ)` in
/// the noiseless limit.
pub fn noisy_offdiagonal(
    x: &FeatureMapSpec,
    x_prime: &FeatureMapSpec,
    prep: &RegisterPrep,
    noise: NoiseModel,
) -> Result<Complex> {
    if x.depth_r() != x_prime.depth_r() || x.n_qubits() != x_prime.n_qubits() {
        return Err(Error::dims(
            "noisy_offdiagonal",
            "feature maps differ in depth or qubit count",
        ));
    }
    let p = noise.strength();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("depolarizing strength {p} outside [0, 1]")));
    }
    let n = x.dim();
    let rho_n = prep.density(n)?;

    let blocks_x = feature_blocks(x);
    let blocks_xp: Vec<ComplexMatrix> = feature_blocks(x_prime).iter().rev().map(adjoint).collect();

    // |0⟩⟨0| ⊗ ρₙ, then a Hadamard on the control.
    let mut rho = ComplexMatrix::zeros(2 * n, 2 * n).entries().to_vec();
    for i in 0..n {
        for j in 0..n {
            rho[i * 2 * n + j] = rho_n.get(i, j);
        }
    }
    let rho = ComplexMatrix::from_raw(2 * n, 2 * n, rho);
    let h_ctrl = crate::tensor::kron(
        &hadamard_layer(1).expect("one qubit"),
        &ComplexMatrix::identity(n),
    );
    let mut rho = matmul(&matmul(&h_ctrl, &rho)?, &h_ctrl)?;

    for b in blocks_xp.iter().chain(blocks_x.iter().rev()) {
        rho = apply_controlled(&rho, b);
        rho = depolarize(&rho, p);
    }

    let coherence: Complex = (0..n).map(|k| rho.get(n + k, k)).sum();
    Ok(coherence * 2.0)
}

/// The `r` single blocks `U_φ(x)·H⊗ⁿ` of `𝒰ʳ(x)`, in application order.
fn feature_blocks(spec: &FeatureMapSpec) -> Vec<ComplexMatrix> {
    let one = FeatureMapSpec::new(&spec.x(), 1).expect("validated spec");
    vec![crate::circuit::encode(&one); spec.depth_r()]
}

/// Average gate fidelity from the normalized self-kernel `K̃(x,x)`:
/// `(N²|k̃|² + N) / (N² + N)`.
pub fn average_fidelity(k_tilde_normalized: Complex, n_dim: usize) -> Result<f64> {
    if n_dim < 2 {
        return Err(Error::invalid(format!("register dimension must be at least 2, got {n_dim}")));
    }
    let mag = k_tilde_normalized.norm();
    if !(mag <= 1.0 + 1e-9) {
        return Err(Error::invalid(format!("|K̃| = {mag} exceeds 1")));
    }
    let n = n_dim as f64;
    Ok((n * n * mag * mag + n) / (n * n + n))
}

/// Closed-form fidelity of the depolarized circuit at strength `p`, depth `r`.
pub fn predicted_fidelity(p: f64, depth_r: usize, n_dim: usize) -> f64 {
    let n = n_dim as f64;
    (n * n * (1.0 - p).powi(4 * depth_r as i32) + n) / (n * n + n)
}
