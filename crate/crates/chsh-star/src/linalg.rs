//! Dense complex matrices at small dimension, with just enough linear
//! algebra for states, channels and measurements: products, adjoints,
//! Kronecker products and a Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "entry count {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self { rows, cols, data })
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
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Convenience constructor from real entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
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

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute deviation from `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Kronecker product; dimensions multiply.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (r, c) = (other.rows, other.cols);
        ComplexMatrix::from_fn(self.rows * r, self.cols * c, |i, j| {
            self[(i / r, j / c)] * other[(i % r, j % c)]
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// ‖U†U − I‖_F, the unitarity deviation.
    pub fn unitarity_deviation(&self) -> f64 {
        assert!(self.is_square());
        self.dagger()
            .mul(self)
            .sub(&ComplexMatrix::identity(self.rows))
            .frobenius_norm()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Outer product |u⟩⟨v|.
pub fn outer(u: &[Complex64], v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// returned in ascending order. Stops when the off-diagonal norm drops
/// below 1e-13 (or after a sweep cap, which small dimensions never hit).
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize away roundoff so the rotations see an exactly Hermitian input
    for i in 0..n {
        for j in 0..n {
            let h = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = h;
            a[(j, i)] = h.conj();
        }
    }
    const STOP: f64 = 1e-13;
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < STOP {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                // small-magnitude root of t^2 - 2*tau*t - 1 = 0
                let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotation acting on the (p,q) plane: columns then rows
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * s * phase.conj();
                    a[(k, q)] = -akp * s * phase + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * s * phase;
                    a[(q, k)] = -apk * s * phase.conj() + aqk * c;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}
