//! Seeded random streams and random-matrix samplers.
//!
//! Each stream is a SplitMix64 generator keyed by `(seed, index)`, so a
//! restart's randomness depends only on its own index and never on the
//! order in which restarts are scheduled.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::matrix::{Complex, Matrix};

const STREAM_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

pub struct Stream {
    rng: SplitMix64,
}

impl Stream {
    pub fn new(seed: u64, index: u64) -> Self {
        let key = seed ^ index.wrapping_add(1).wrapping_mul(STREAM_STRIDE);
        Self {
            rng: SplitMix64::seed_from_u64(key),
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn complex_normal(&mut self) -> Complex {
        Complex::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn random_matrix(s: &mut Stream, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| s.complex_normal())
}

pub fn random_unit_vector(s: &mut Stream, n: usize) -> Matrix {
    let v = random_matrix(s, n, 1);
    let norm = v.frobenius_norm();
    v.scale_re(1.0 / norm)
}

pub fn random_hermitian(s: &mut Stream, n: usize) -> Matrix {
    random_matrix(s, n, n).hermitian_part()
}

/// Real symmetric matrix with normal entries.
pub fn random_real_symmetric(s: &mut Stream, n: usize) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| Complex::new(s.normal(), 0.0));
    g.hermitian_part()
}

/// Random PSD matrix `AA*/Tr(AA*)` of rank at most `rank`.
pub fn random_density(s: &mut Stream, n: usize, rank: usize) -> Matrix {
    let a = random_matrix(s, n, rank);
    let h = &a * &a.adjoint();
    let tr = h.trace().re;
    h.scale_re(1.0 / tr)
}

/// Haar-ish unitary from Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary(s: &mut Stream, n: usize) -> Matrix {
    let g = random_matrix(s, n, n);
    let mut cols: Vec<Matrix> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.col(j);
        for q in &cols {
            let c = Matrix::inner(q, &v);
            v = &v - &q.scale(c);
        }
        let norm = v.frobenius_norm();
        cols.push(v.scale_re(1.0 / norm));
    }
    Matrix::from_columns(&cols)
}
