//! Dense complex matrices.
//!
//! Just enough linear algebra to simulate a handful of qubits: products,
//! Kronecker products, adjoints, traces and a unitarity check. Storage is
//! row-major and every value is immutable once built.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar field for amplitudes and traces.
pub type Complex = Complex64;

/// Largest register the simulator will materialize densely (2^10 × 2^10 blocks).
pub const DEFAULT_MAX_QUBITS: usize = 10;

/// Builds a complex scalar, rejecting NaN and infinite components.
pub fn complex(re: f64, im: f64) -> Result<Complex> {
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::invalid(format!(
            "complex components must be finite, got ({re}, {im})"
        )));
    }
    Ok(Complex::new(re, im))
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(
                "ComplexMatrix::new",
                format!("{rows}x{cols} needs {} entries, got {}", rows * cols, data.len()),
            ));
        }
        if let Some(z) = data.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!("non-finite matrix entry {z}")));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Internal constructor for entries already known to be well formed.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        ComplexMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![Complex::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// Real diagonal convenience used heavily in tests and examples.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex> = diag.iter().map(|&v| Complex::new(v, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| Complex::new(v, 0.0)))
            .collect();
        Self::new(r, c, data)
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

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.cols + col]
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(
                "add",
                format!(
                    "{}x{} + {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.approx_eq(&adjoint(self), tol)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::dims(
            "matmul",
            format!("{}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let (n, m, p) = (a.rows, a.cols, b.cols);
    let mut out = vec![Complex::new(0.0, 0.0); n * p];
    for i in 0..n {
        let row = &mut out[i * p..(i + 1) * p];
        for k in 0..m {
            let aik = a.data[i * m + k];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let brow = &b.data[k * p..(k + 1) * p];
            for (o, bkj) in row.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(ComplexMatrix::from_raw(n, p, out))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = vec![Complex::new(0.0, 0.0); rows * cols];
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let s = a.get(ar, ac);
            for br in 0..b.rows {
                let dst = (ar * b.rows + br) * cols + ac * b.cols;
                let src = &b.data[br * b.cols..(br + 1) * b.cols];
                for (o, v) in out[dst..dst + b.cols].iter_mut().zip(src) {
                    *o = s * v;
                }
            }
        }
    }
    ComplexMatrix::from_raw(rows, cols, out)
}

/// Conjugate transpose.
pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    let mut out = Vec::with_capacity(a.data.len());
    for c in 0..a.cols {
        for r in 0..a.rows {
            out.push(a.get(r, c).conj());
        }
    }
    ComplexMatrix::from_raw(a.cols, a.rows, out)
}

pub fn trace(a: &ComplexMatrix) -> Result<Complex> {
    if !a.is_square() {
        return Err(Error::dims(
            "trace",
            format!("non-square {}x{}", a.rows, a.cols),
        ));
    }
    Ok((0..a.rows).map(|i| a.get(i, i)).sum())
}

/// `true` iff every entry of `a†a − I` has modulus at most `tol`.
/// Non-square input is never unitary.
pub fn is_unitary(a: &ComplexMatrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows;
    let prod = matmul(&adjoint(a), a).expect("square dims agree");
    (0..n).all(|i| {
        (0..n).all(|j| {
            let expected = if i == j { 1.0 } else { 0.0 };
            (prod.get(i, j) - Complex::new(expected, 0.0)).norm() <= tol
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n).prop_map(move |v| {
            ComplexMatrix::new(n, n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    /// Random unitary from phases and Hadamards; enough to exercise closure.
    fn arb_unitary4() -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(0.0f64..std::f64::consts::TAU, 8).prop_map(|ph| {
            let h2 = kron(&hadamard(), &hadamard());
            let d1 = ComplexMatrix::from_diagonal(
                &ph[..4].iter().map(|&t| Complex::from_polar(1.0, t)).collect::<Vec<_>>(),
            );
            let d2 = ComplexMatrix::from_diagonal(
                &ph[4..].iter().map(|&t| Complex::from_polar(1.0, t)).collect::<Vec<_>>(),
            );
            let m = matmul(&d1, &h2).unwrap();
            matmul(&d2, &matmul(&h2, &m).unwrap()).unwrap()
        })
    }

    #[test]
    fn constructor_rejects_non_finite_and_bad_length() {
        assert!(complex(f64::NAN, 0.0).is_err());
        assert!(complex(0.0, f64::INFINITY).is_err());
        assert!(ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn matmul_examples() {
        let i4 = ComplexMatrix::identity(4);
        assert_eq!(matmul(&i4, &i4).unwrap(), i4);

        let h = hadamard();
        assert!(matmul(&h, &h).unwrap().approx_eq(&ComplexMatrix::identity(2), 1e-15));

        let z = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 1.0, -1.0]);
        assert_eq!(matmul(&z, &z).unwrap(), i4);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        let err = matmul(&a, &a).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { op: "matmul", .. }));
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert_eq!(
            kron(&z, &i2),
            ComplexMatrix::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0])
        );
    }

    #[test]
    fn kron_block_layout_is_a_ij_times_b() {
        let a = ComplexMatrix::new(1, 2, vec![c(2.0, 0.0), c(0.0, 1.0)]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[1.0], &[3.0]]).unwrap();
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (2, 2));
        assert_eq!(k[(0, 0)], c(2.0, 0.0));
        assert_eq!(k[(1, 0)], c(6.0, 0.0));
        assert_eq!(k[(0, 1)], c(0.0, 1.0));
        assert_eq!(k[(1, 1)], c(0.0, 3.0));
    }

    #[test]
    fn adjoint_examples() {
        let i4 = ComplexMatrix::identity(4);
        assert_eq!(adjoint(&i4), i4);
        let d = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]);
        assert_eq!(
            adjoint(&d),
            ComplexMatrix::from_diagonal(&[c(0.0, -1.0), c(0.0, 1.0)])
        );
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&ComplexMatrix::identity(8)).unwrap(), c(8.0, 0.0));
        let z = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 1.0, -1.0]);
        assert_eq!(trace(&z).unwrap(), c(2.0, 0.0));
        assert!(trace(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn unitarity_examples() {
        assert!(is_unitary(&ComplexMatrix::identity(4), 1e-12));
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        assert!(!is_unitary(&d, 2.99));
        assert!(!is_unitary(&ComplexMatrix::zeros(2, 3), 1.0));
    }

    proptest! {
        #[test]
        fn kron_dimension_law(r1 in 1usize..4, c1 in 1usize..4, r2 in 1usize..4, c2 in 1usize..4) {
            let k = kron(&ComplexMatrix::zeros(r1, c1), &ComplexMatrix::zeros(r2, c2));
            prop_assert_eq!((k.rows(), k.cols()), (r1 * r2, c1 * c2));
        }

        #[test]
        fn kron_is_associative(a in arb_matrix(2), b in arb_matrix(2), m in arb_matrix(2)) {
            let left = kron(&a, &kron(&b, &m));
            let right = kron(&kron(&a, &b), &m);
            prop_assert!(left.approx_eq(&right, 1e-12));
        }

        #[test]
        fn adjoint_is_an_exact_involution(a in arb_matrix(3)) {
            prop_assert_eq!(adjoint(&adjoint(&a)), a);
        }

        #[test]
        fn trace_is_cyclic(a in arb_matrix(4), b in arb_matrix(4)) {
            let ab = trace(&matmul(&a, &b).unwrap()).unwrap();
            let ba = trace(&matmul(&b, &a).unwrap()).unwrap();
            prop_assert!((ab - ba).norm() <= 1e-10);
        }

        #[test]
        fn product_of_unitaries_is_unitary(u in arb_unitary4(), v in arb_unitary4()) {
            prop_assert!(is_unitary(&u, 1e-10));
            prop_assert!(is_unitary(&matmul(&u, &v).unwrap(), 1e-10));
        }
    }
}
