//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, plus the
//! PSD and support-projection verdicts built on it.

use crate::error::{Error, Result};
use crate::matrix::{Complex, Matrix, ZERO};
use crate::tolerance::Tolerances;

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Unitary; column `k` pairs with `values[k]`.
    pub vectors: Matrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min_vector(&self) -> Matrix {
        self.vectors.col(self.values.len() - 1)
    }

    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let v = &self.vectors;
        Matrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

/// Eigenvalues (descending) and eigenvectors of a Hermitian matrix.
///
/// The input is symmetrized first; an anti-Hermitian part larger than
/// `tol.convergence·‖x‖_F` is rejected.
pub fn hermitian_eigen(x: &Matrix, tol: &Tolerances) -> Result<Eigen> {
    hermitian_eigen_from(x, None, tol)
}

/// As [`hermitian_eigen`], but sweeps start in the given unitary `basis`
/// (typically the eigenvectors of a nearby matrix), which saves sweeps when
/// the matrix is already nearly diagonal there.
pub fn hermitian_eigen_from(x: &Matrix, basis: Option<&Matrix>, tol: &Tolerances) -> Result<Eigen> {
    if !x.is_square() {
        return Err(Error::dim(format!(
            "hermitian_eigen: {}x{} matrix is not square",
            x.rows(),
            x.cols()
        )));
    }
    let norm = x.frobenius_norm();
    if x.anti_hermitian_norm() > tol.convergence * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::domain("hermitian_eigen: matrix is not Hermitian"));
    }
    let n = x.rows();
    let (mut a, mut v): (Vec<Complex>, Vec<Complex>) = match basis {
        Some(u) if u.rows() == n && u.cols() == n => {
            let rotated = &(&u.adjoint() * x) * u;
            (
                rotated.hermitian_part().entries().to_vec(),
                u.entries().to_vec(),
            )
        }
        _ => (
            x.hermitian_part().entries().to_vec(),
            Matrix::identity(n).entries().to_vec(),
        ),
    };
    let target = tol.eig_offdiag * norm;
    // entries below this cannot keep the off-diagonal norm above `target`
    let skip = target / n as f64;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p * n + q].norm() > skip {
                    rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > target {
        return Err(Error::Numerical(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| v[i * n + order[k]]);
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(a: &[Complex], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p,q]` with the unitary `U = diag(1, e^{-iφ})·R(θ)` acting on
/// the `(p, q)` plane, where `a[p,q] = r·e^{iφ}`. Updates `a ← U*aU`, `v ← vU`.
/// Both matrices are row-major `n×n`.
fn rotate(a: &mut [Complex], v: &mut [Complex], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let phase = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [−s·e^{-iφ}, c·e^{-iφ}]]
    let uqp = -phase.conj() * s;
    let uqq = phase.conj() * c;

    for k in 0..n {
        let row = k * n;
        let akp = a[row + p];
        let akq = a[row + q];
        a[row + p] = akp * c + akq * uqp;
        a[row + q] = akp * s + akq * uqq;
    }
    let (uqp_c, uqq_c) = (uqp.conj(), uqq.conj());
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c + uqp_c * aqk;
        a[q * n + k] = apk * s + uqq_c * aqk;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = Complex::new(app - t * r, 0.0);
    a[q * n + q] = Complex::new(aqq + t * r, 0.0);

    for k in 0..n {
        let row = k * n;
        let vkp = v[row + p];
        let vkq = v[row + q];
        v[row + p] = vkp * c + vkq * uqp;
        v[row + q] = vkp * s + vkq * uqq;
    }
}

#[derive(Clone, Debug)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
    /// Unit eigenvector of the minimal eigenvalue, present when `psd` is false.
    pub witness: Option<Matrix>,
}

/// PSD test with slack `tol.psd_slack·max(1, ‖x‖_F)`.
pub fn is_psd(x: &Matrix, tol: &Tolerances) -> Result<PsdVerdict> {
    let eig = hermitian_eigen(x, tol)?;
    let min = eig.min();
    let psd = min >= -tol.psd_threshold(x.frobenius_norm());
    Ok(PsdVerdict {
        psd,
        min_eigenvalue: min,
        witness: (!psd).then(|| eig.min_vector()),
    })
}

/// Orthogonal projection onto the span of eigenvectors whose eigenvalue
/// exceeds the PSD threshold.
pub fn support_projection(x: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    Ok(support_basis(x, tol)?.projection())
}

/// Isometry whose columns span the support of a PSD matrix.
pub struct SupportBasis {
    pub basis: Matrix,
    pub rank: usize,
    dim: usize,
}

impl SupportBasis {
    pub fn projection(&self) -> Matrix {
        if self.rank == 0 {
            return Matrix::zeros(self.dim, self.dim);
        }
        &self.basis * &self.basis.adjoint()
    }
}

pub fn support_basis(x: &Matrix, tol: &Tolerances) -> Result<SupportBasis> {
    let eig = hermitian_eigen(x, tol)?;
    let threshold = tol.psd_threshold(x.frobenius_norm());
    if eig.min() < -threshold {
        return Err(Error::Domain {
            message: format!(
                "support_projection: matrix is not PSD (min eigenvalue {:e})",
                eig.min()
            ),
            witness: Some(eig.min_vector()),
        });
    }
    let cols: Vec<Matrix> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > threshold)
        .map(|(k, _)| eig.vectors.col(k))
        .collect();
    let rank = cols.len();
    let basis = if rank == 0 {
        Matrix::zeros(x.rows(), 1)
    } else {
        Matrix::from_columns(&cols)
    };
    Ok(SupportBasis {
        basis,
        rank,
        dim: x.rows(),
    })
}
