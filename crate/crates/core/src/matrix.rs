//! Dense complex matrices in row-major order.
//!
//! Composite indices of a bipartite space `ℂⁿ ⊗ ℂᵐ` are laid out as
//! `(i, k) ↦ i·m + k`; every tensor-product routine in the crate follows
//! that convention. Transposes are taken in the standard basis.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// Which tensor factor an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&x| Complex::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Matrix unit `e_ij` in `M_n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    /// Column vector from its entries.
    pub fn column(entries: Vec<Complex>) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries,
        }
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

    pub fn col(&self, j: usize) -> Matrix {
        Matrix::column((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    /// Builds a matrix whose columns are the given column vectors.
    pub fn from_columns(columns: &[Matrix]) -> Matrix {
        let rows = columns[0].rows;
        Matrix::from_fn(rows, columns.len(), |i, j| columns[j].data[i])
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex) -> Matrix {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Matrix {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Matrix) -> f64 {
        (self - other).frobenius_norm()
    }

    /// `⟨v, self·v⟩` for a column vector `v`.
    pub fn quadratic_form(&self, v: &Matrix) -> Complex {
        let av = self * v;
        v.data.iter().zip(&av.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `v·v*` for a column vector `v`.
    pub fn outer(v: &Matrix) -> Matrix {
        Matrix::from_fn(v.rows, v.rows, |i, j| v.data[i] * v.data[j].conj())
    }

    pub fn inner(a: &Matrix, b: &Matrix) -> Complex {
        a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
    }

    /// Hermitian part `(x + x*)/2`.
    pub fn hermitian_part(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Frobenius norm of `x − x*`.
    pub fn anti_hermitian_norm(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
        &(a * b) - &(b * a)
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        kron(self, other)
    }

    fn require_square(&self, what: &str) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::dim(format!(
                "{what}: expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }
}

/// Kronecker product: `out[(i,k),(j,l)] = a[i,j]·b[k,l]`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![ZERO; rows * cols];
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows {
                let row = i * b.rows + k;
                for l in 0..b.cols {
                    data[row * cols + j * b.cols + l] = aij * b[(k, l)];
                }
            }
        }
    }
    Matrix { rows, cols, data }
}

fn check_bipartite(x: &Matrix, dims: (usize, usize), what: &str) -> Result<()> {
    let size = x.require_square(what)?;
    if dims.0 == 0 || dims.1 == 0 || size != dims.0 * dims.1 {
        return Err(Error::dim(format!(
            "{what}: matrix of size {size} does not match dims {}x{}",
            dims.0, dims.1
        )));
    }
    Ok(())
}

/// Transpose of one tensor factor in the standard basis.
pub fn partial_transpose(x: &Matrix, dims: (usize, usize), side: Side) -> Result<Matrix> {
    check_bipartite(x, dims, "partial_transpose")?;
    let (n, m) = dims;
    let mut out = Matrix::zeros(n * m, n * m);
    for i in 0..n {
        for k in 0..m {
            for j in 0..n {
                for l in 0..m {
                    let (r, c) = match side {
                        Side::Second => (i * m + l, j * m + k),
                        Side::First => (j * m + k, i * m + l),
                    };
                    out[(i * m + k, j * m + l)] = x[(r, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Trace over one tensor factor.
pub fn partial_trace(x: &Matrix, dims: (usize, usize), side: Side) -> Result<Matrix> {
    check_bipartite(x, dims, "partial_trace")?;
    let (n, m) = dims;
    Ok(match side {
        Side::First => {
            Matrix::from_fn(m, m, |k, l| (0..n).map(|i| x[(i * m + k, i * m + l)]).sum())
        }
        Side::Second => {
            Matrix::from_fn(n, n, |i, j| (0..m).map(|k| x[(i * m + k, j * m + k)]).sum())
        }
    })
}

/// The `m×m` block `x[(i,·),(j,·)]` of a bipartite matrix.
pub fn block(x: &Matrix, m: usize, i: usize, j: usize) -> Matrix {
    Matrix::from_fn(m, m, |k, l| x[(i * m + k, j * m + l)])
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = i * rhs.cols;
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[orow + j] += a * rhs.data[brow + j];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl AddAssign<&Matrix> for Matrix {
    fn add_assign(&mut self, rhs: &Matrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.map(|z| -z)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let data = repr
            .entries
            .iter()
            .map(|&[re, im]| Complex::new(re, im))
            .collect();
        Matrix::new(repr.rows, repr.cols, data).map_err(serde::de::Error::custom)
    }
}
