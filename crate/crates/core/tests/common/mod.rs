//! Reference computations written with plain index loops, independent of the
//! library's own Choi, partial-transpose and eigenvalue code.

#![allow(dead_code)]

use entanglecone_core::{Complex, Matrix};

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows());
    let mut out = Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = c(0.0, 0.0);
            for k in 0..a.cols() {
                s += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

pub fn dagger(a: &Matrix) -> Matrix {
    Matrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)].conj())
}

pub fn transpose(a: &Matrix) -> Matrix {
    Matrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)])
}

pub fn trace(a: &Matrix) -> Complex {
    (0..a.rows()).map(|i| a[(i, i)]).sum()
}

pub fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let mut m: f64 = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn tensor(a: &Matrix, b: &Matrix) -> Matrix {
    let (p, q) = (b.rows(), b.cols());
    Matrix::from_fn(a.rows() * p, a.cols() * q, |r, s| {
        a[(r / p, s / q)] * b[(r % p, s % q)]
    })
}

pub fn unit(n: usize, i: usize, j: usize) -> Matrix {
    Matrix::from_fn(n, n, |r, s| {
        if r == i && s == j {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `Σ_k K x K*`.
pub fn kraus_apply(kraus: &[Matrix], x: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(kraus[0].rows(), kraus[0].rows());
    for k in kraus {
        let y = mul(&mul(k, x), &dagger(k));
        for i in 0..y.rows() {
            for j in 0..y.cols() {
                out[(i, j)] += y[(i, j)];
            }
        }
    }
    out
}

/// `Σ_r Tr(ω_r x)·b_r`.
pub fn holevo_apply(terms: &[(Matrix, Matrix)], x: &Matrix) -> Matrix {
    let m = terms[0].1.rows();
    let mut out = Matrix::zeros(m, m);
    for (omega, b) in terms {
        let w = trace(&mul(omega, x));
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += w * b[(i, j)];
            }
        }
    }
    out
}

/// `Σ e_ij ⊗ φ(e_ij)`, assembled entry by entry.
pub fn choi_of(n: usize, m: usize, phi: impl Fn(&Matrix) -> Matrix) -> Matrix {
    let mut out = Matrix::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            let img = phi(&unit(n, i, j));
            for k in 0..m {
                for l in 0..m {
                    out[(i * m + k, j * m + l)] = img[(k, l)];
                }
            }
        }
    }
    out
}

/// `(ι⊗t)(x)` on `C^n ⊗ C^m`.
pub fn pt_second(x: &Matrix, n: usize, m: usize) -> Matrix {
    Matrix::from_fn(n * m, n * m, |r, s| {
        let (i, k) = (r / m, r % m);
        let (j, l) = (s / m, s % m);
        x[(i * m + l, j * m + k)]
    })
}

/// `(ι⊗φ)(h)` for `h` on `C^n ⊗ C^m`, with `φ: M_m → M_p` given by its Choi
/// matrix `choi[(a,k),(b,l)] = φ(e_ab)[k,l]`.
pub fn apply_second(h: &Matrix, n: usize, m: usize, choi: &Matrix, p: usize) -> Matrix {
    let mut out = Matrix::zeros(n * p, n * p);
    for i in 0..n {
        for j in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let hab = h[(i * m + a, j * m + b)];
                    if hab == c(0.0, 0.0) {
                        continue;
                    }
                    for k in 0..p {
                        for l in 0..p {
                            out[(i * p + k, j * p + l)] += hab * choi[(a * p + k, b * p + l)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Eigenvalues of a 2×2 Hermitian matrix, descending.
pub fn eig2(x: &Matrix) -> Vec<f64> {
    let a = x[(0, 0)].re;
    let d = x[(1, 1)].re;
    let b = x[(0, 1)].norm();
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    vec![mean + r, mean - r]
}

/// Eigenvalues of a 3×3 Hermitian matrix from the trigonometric solution of
/// its characteristic cubic, descending.
pub fn eig3(x: &Matrix) -> Vec<f64> {
    let a = |i: usize, j: usize| x[(i, j)];
    let (a11, a22, a33) = (a(0, 0).re, a(1, 1).re, a(2, 2).re);
    let p1 = a(0, 1).norm_sqr() + a(0, 2).norm_sqr() + a(1, 2).norm_sqr();
    let q = (a11 + a22 + a33) / 3.0;
    let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return vec![q, q, q];
    }
    // det((x − qI)/p) / 2, with the complex entries of a Hermitian matrix
    let b = |i: usize, j: usize| {
        let v = a(i, j);
        if i == j {
            c((v.re - q) / p, 0.0)
        } else {
            v / p
        }
    };
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det.re / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut v = vec![e1, e2, e3];
    v.sort_by(|x, y| y.total_cmp(x));
    v
}
