//! Dense complex-valued matrices: the substrate for density matrices,
//! gate unitaries, and Kraus operators.
//!
//! Everything here is immutable from the outside; operations return fresh
//! values. Matrices are row-major `f64` complex, and the largest instances
//! in this crate are 8x8 (three qubits), so no sparse storage is used.

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Default absolute tolerance for approximate matrix equality.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Dense complex matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major data; length must equal `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "data length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from real entries (imaginary parts zero).
    pub fn from_real(rows: usize, cols: usize, reals: &[f64]) -> Self {
        Self::new(
            rows,
            cols,
            reals.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
    }

    /// Density matrix |i><i| in an `n`-dimensional space.
    pub fn basis_density(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut m = Self::zeros(dim, dim);
        m.data[index * dim + index] = Complex64::new(1.0, 0.0);
        m
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

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col]
    }

    /// Row-major entry slice.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Standard matrix product.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    /// Kronecker product; the left operand is the more significant factor.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = ComplexMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cols + (j * other.cols + l)] =
                            a * other.data[k * other.cols + l];
                    }
                }
            }
        }
        out
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).map(|i| self.data[i * self.cols + i]).sum())
    }

    /// Reduced density matrix over the kept qubits (ascending order), for a
    /// `2^n x 2^n` matrix. Qubit 0 is the most significant index bit, so the
    /// embedding convention matches `kron`.
    pub fn partial_trace(&self, keep: &[usize], n_qubits: usize) -> Result<ComplexMatrix> {
        let dim = 1usize << n_qubits;
        if self.rows != dim || self.cols != dim {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        for &q in keep {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits,
                });
            }
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let traced: Vec<usize> = (0..n_qubits).filter(|q| !kept.contains(q)).collect();
        let k_dim = 1usize << kept.len();
        let t_dim = 1usize << traced.len();

        // Compose a full-width basis index from kept-part `a` and traced-part `t`.
        let compose = |a: usize, t: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in kept.iter().enumerate() {
                let bit = (a >> (kept.len() - 1 - pos)) & 1;
                idx |= bit << (n_qubits - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                let bit = (t >> (traced.len() - 1 - pos)) & 1;
                idx |= bit << (n_qubits - 1 - q);
            }
            idx
        };

        let mut out = ComplexMatrix::zeros(k_dim, k_dim);
        for a in 0..k_dim {
            for b in 0..k_dim {
                let mut sum = Complex64::new(0.0, 0.0);
                for t in 0..t_dim {
                    sum += self.data[compose(a, t) * dim + compose(b, t)];
                }
                out.data[a * k_dim + b] = sum;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise approximate equality with an explicit absolute tolerance.
    /// Exact comparison is never meaningful for accumulated float arithmetic,
    /// so this is the only equality the quantum modules use.
    pub fn approx_eq(&self, other: &ComplexMatrix, epsilon: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols)
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= epsilon)
    }

    pub fn is_hermitian(&self, epsilon: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..=i {
                if (self.data[i * self.cols + j] - self.data[j * self.cols + i].conj()).norm()
                    > epsilon
                {
                    return false;
                }
            }
        }
        true
    }
}

/// Fixed 2x2 operators used throughout the noise and circuit modules.
pub mod ops {
    use super::{Complex64, ComplexMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    /// RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
    pub fn ry(theta: f64) -> ComplexMatrix {
        let (s, co) = (theta / 2.0).sin_cos();
        ComplexMatrix::new(2, 2, vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }

    /// RZ(theta) = diag(e^{-i t/2}, e^{i t/2})
    pub fn rz(theta: f64) -> ComplexMatrix {
        ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::from_polar(1.0, -theta / 2.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, theta / 2.0),
            ],
        )
    }

    /// Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi); RZ(phi) acts first.
    pub fn rot(phi: f64, theta: f64, omega: f64) -> ComplexMatrix {
        rz(omega)
            .matmul(&ry(theta))
            .and_then(|m| m.matmul(&rz(phi)))
            .expect("2x2 products are always conformable")
    }
}

#[cfg(test)]
mod tests {
    use super::ops::*;
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn matmul_identity_leaves_any_matrix_unchanged() {
        let m = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(1.0, 2.0),
                Complex64::new(-0.5, 0.3),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let prod = ComplexMatrix::identity(2).matmul(&m).unwrap();
        assert!(prod.approx_eq(&m, EPS));
    }

    #[test]
    fn pauli_involution() {
        let x = pauli_x();
        assert!(x.matmul(&x).unwrap().approx_eq(&ComplexMatrix::identity(2), EPS));
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        // Hand multiplication: X Z = [[0,-1],[1,0]]
        let expected = ComplexMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let prod = pauli_x().matmul(&pauli_z()).unwrap();
        assert!(prod.approx_eq(&expected, EPS));
    }

    #[test]
    fn matmul_dimension_mismatch_is_an_error() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 2);
        assert!(matches!(a.matmul(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dagger_of_identity_and_hermitian_y() {
        assert!(ComplexMatrix::identity(2)
            .dagger()
            .approx_eq(&ComplexMatrix::identity(2), EPS));
        let y = pauli_y();
        assert!(y.dagger().approx_eq(&y, EPS));
    }

    #[test]
    fn dagger_of_amplitude_damping_e1() {
        // E1 (p = 0.5) = [[0, sqrt(0.5)], [0, 0]]; transpose-conjugate by hand.
        let s = 0.5_f64.sqrt();
        let e1 = ComplexMatrix::from_real(2, 2, &[0.0, s, 0.0, 0.0]);
        let expected = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, s, 0.0]);
        assert!(e1.dagger().approx_eq(&expected, EPS));
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert!(i2.kron(&i2).approx_eq(&ComplexMatrix::identity(4), EPS));
    }

    #[test]
    fn kron_x_on_first_qubit_flips_00_to_10() {
        // Brute-force 4x4 arithmetic: (X (x) I) |00><00| (X (x) I)^T = |10><10|
        let op = pauli_x().kron(&identity2());
        let rho00 = ComplexMatrix::basis_density(4, 0);
        let out = op.matmul(&rho00).unwrap().matmul(&op.dagger()).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::basis_density(4, 2), EPS));
    }

    #[test]
    fn kron_zz_diagonal() {
        let zz = pauli_z().kron(&pauli_z());
        let diag: Vec<f64> = (0..4).map(|i| zz.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn trace_cases() {
        assert_eq!(ComplexMatrix::identity(8).trace().unwrap().re, 8.0);
        assert_eq!(ComplexMatrix::basis_density(2, 0).trace().unwrap().re, 1.0);
        assert_eq!(pauli_x().trace().unwrap().norm(), 0.0);
        assert!(ComplexMatrix::zeros(2, 3).trace().is_err());
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = ComplexMatrix::basis_density(4, 0); // |00><00|
        let reduced = rho.partial_trace(&[0], 2).unwrap();
        assert!(reduced.approx_eq(&ComplexMatrix::basis_density(2, 0), EPS));
    }

    #[test]
    fn partial_trace_bell_state_is_maximally_mixed() {
        // Phi+ = (|00> + |11>)/sqrt(2); hand-computed 4x4 reduction.
        let mut data = vec![Complex64::new(0.0, 0.0); 16];
        data[0] = Complex64::new(0.5, 0.0);
        data[3] = Complex64::new(0.5, 0.0);
        data[12] = Complex64::new(0.5, 0.0);
        data[15] = Complex64::new(0.5, 0.0);
        let bell = ComplexMatrix::new(4, 4, data);
        let reduced = bell.partial_trace(&[0], 2).unwrap();
        let expected = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(reduced.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn partial_trace_keep_all_is_identity_map() {
        let rho = ComplexMatrix::basis_density(8, 5);
        let out = rho.partial_trace(&[0, 1, 2], 3).unwrap();
        assert!(out.approx_eq(&rho, EPS));
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = ComplexMatrix::identity(4);
        assert!(rho.partial_trace(&[2], 2).is_err());
    }

    #[test]
    fn rot_zero_angles_is_identity() {
        assert!(rot(0.0, 0.0, 0.0).approx_eq(&ComplexMatrix::identity(2), EPS));
    }
}
