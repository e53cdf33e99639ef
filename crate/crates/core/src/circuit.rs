//! Feature-map circuits.
//!
//! A data point `x ∈ ℝ²` is encoded by `r` repetitions of a Hadamard layer
//! followed by a diagonal two-qubit phase layer
//! `exp(i[φ₁ Z₁ + φ₂ Z₂ + φ₁₂ Z₁Z₂])` with `φᵢ = xᵢ` and
//! `φ₁₂ = (π − x₁)(π − x₂)`. Basis states are ordered `|b₁b₂⟩ → 2·b₁ + b₂`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{adjoint, is_unitary, kron, matmul, Complex, ComplexMatrix, DEFAULT_MAX_QUBITS};

/// Qubit count of the two-dimensional phase encoding.
pub const ENCODING_QUBITS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    x: [f64; 2],
    depth_r: usize,
    n_qubits: usize,
}

impl FeatureMapSpec {
    pub fn new(x: &[f64], depth_r: usize) -> Result<Self> {
        Self::with_qubits(x, depth_r, ENCODING_QUBITS)
    }

    pub fn with_qubits(x: &[f64], depth_r: usize, n_qubits: usize) -> Result<Self> {
        if depth_r == 0 {
            return Err(Error::invalid("circuit depth r must be at least 1"));
        }
        if x.len() != 2 {
            return Err(Error::invalid(format!(
                "the phase encoding takes 2-dimensional points, got {}",
                x.len()
            )));
        }
        if n_qubits != ENCODING_QUBITS {
            return Err(Error::invalid(format!(
                "the phase encoding acts on {ENCODING_QUBITS} qubits, got {n_qubits}"
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature values must be finite"));
        }
        Ok(FeatureMapSpec {
            x: [x[0], x[1]],
            depth_r,
            n_qubits,
        })
    }

    pub fn x(&self) -> [f64; 2] {
        self.x
    }

    pub fn depth_r(&self) -> usize {
        self.depth_r
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Register dimension `N = 2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn phases(&self) -> PhaseEncoding {
        PhaseEncoding::from_point(self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEncoding {
    pub phi_1: f64,
    pub phi_2: f64,
    pub phi_12: f64,
}

impl PhaseEncoding {
    pub fn from_point(x: [f64; 2]) -> Self {
        PhaseEncoding {
            phi_1: x[0],
            phi_2: x[1],
            phi_12: (PI - x[0]) * (PI - x[1]),
        }
    }

    /// Diagonal of the phase layer, indexed by basis state `2·b₁ + b₂`.
    pub fn diagonal(&self) -> [Complex; 4] {
        let mut d = [Complex::new(0.0, 0.0); 4];
        for (idx, slot) in d.iter_mut().enumerate() {
            let z1 = if idx & 0b10 == 0 { 1.0 } else { -1.0 };
            let z2 = if idx & 0b01 == 0 { 1.0 } else { -1.0 };
            let angle = self.phi_1 * z1 + self.phi_2 * z2 + self.phi_12 * z1 * z2;
            *slot = Complex::from_polar(1.0, angle);
        }
        d
    }
}

pub fn hadamard_layer(n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits == 0 || n_qubits > DEFAULT_MAX_QUBITS {
        return Err(Error::invalid(format!(
            "hadamard layer supports 1..={DEFAULT_MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let s = FRAC_1_SQRT_2;
    let h = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]])?;
    let mut out = h.clone();
    for _ in 1..n_qubits {
        out = kron(&out, &h);
    }
    Ok(out)
}

pub fn u_phi(enc: &PhaseEncoding) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&enc.diagonal())
}

/// Compiles `[U_φ(x) · H⊗ⁿ]^r`.
pub fn encode(spec: &FeatureMapSpec) -> ComplexMatrix {
    let h = hadamard_layer(spec.n_qubits).expect("spec validated qubit count");
    let diag = spec.phases().diagonal();
    let n = spec.dim();
    // The phase layer is diagonal, so U_φ·H is H with row i scaled by d_i.
    let block: Vec<Complex> = (0..n)
        .flat_map(|i| {
            let d = diag[i];
            h.entries()[i * n..(i + 1) * n].iter().map(move |v| d * v)
        })
        .collect();
    let block = ComplexMatrix::from_raw(n, n, block);
    let mut out = block.clone();
    for _ in 1..spec.depth_r {
        out = matmul(&block, &out).expect("square blocks");
    }
    out
}

fn check_compatible(x: &FeatureMapSpec, x_prime: &FeatureMapSpec) -> Result<()> {
    if x.depth_r != x_prime.depth_r || x.n_qubits != x_prime.n_qubits {
        return Err(Error::dims(
            "kernel_unitary",
            format!(
                "depth/qubits ({}, {}) vs ({}, {})",
                x.depth_r, x.n_qubits, x_prime.depth_r, x_prime.n_qubits
            ),
        ));
    }
    Ok(())
}

/// `U_n = 𝒰ʳ(x) · 𝒰ʳ(x′)†`.
pub fn kernel_unitary(x: &FeatureMapSpec, x_prime: &FeatureMapSpec) -> Result<ComplexMatrix> {
    check_compatible(x, x_prime)?;
    matmul(&encode(x), &adjoint(&encode(x_prime)))
}

/// Block-diagonal `|0⟩⟨0| ⊗ 𝟙 + |1⟩⟨1| ⊗ U`.
pub fn controlled(u_n: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !u_n.is_square() {
        return Err(Error::dims(
            "controlled",
            format!("non-square {}x{}", u_n.rows(), u_n.cols()),
        ));
    }
    if !is_unitary(u_n, 1e-10) {
        return Err(Error::invalid("controlled() requires a unitary operand"));
    }
    let n = u_n.rows();
    let mut out = ComplexMatrix::zeros(2 * n, 2 * n).entries().to_vec();
    for i in 0..n {
        out[i * 2 * n + i] = Complex::new(1.0, 0.0);
        for j in 0..n {
            out[(n + i) * 2 * n + n + j] = u_n.get(i, j);
        }
    }
    Ok(ComplexMatrix::from_raw(2 * n, 2 * n, out))
}

/// Lazily compiled feature-map unitaries for a fixed sample list.
///
/// Each slot is built at most once, even under concurrent access, so a Gram
/// row computation reuses `𝒰ʳ(x)` instead of recompiling it per pair.
pub struct EncodeCache<'a> {
    points: &'a [[f64; 2]],
    depth_r: usize,
    slots: Vec<OnceLock<ComplexMatrix>>,
}

impl<'a> EncodeCache<'a> {
    pub fn new(points: &'a [[f64; 2]], depth_r: usize) -> Result<Self> {
        if depth_r == 0 {
            return Err(Error::invalid("circuit depth r must be at least 1"));
        }
        if let Some(p) = points.iter().find(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {p:?}")));
        }
        Ok(EncodeCache {
            points,
            depth_r,
            slots: (0..points.len()).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spec(&self, i: usize) -> FeatureMapSpec {
        FeatureMapSpec {
            x: self.points[i],
            depth_r: self.depth_r,
            n_qubits: ENCODING_QUBITS,
        }
    }

    pub fn get(&self, i: usize) -> &ComplexMatrix {
        self.slots[i].get_or_init(|| encode(&self.spec(i)))
    }
}
