//! Linear maps `M_n → M_m` held through their Choi matrices, and the
//! bipartite functionals dual to them.
//!
//! Conventions: `C_φ[(i,k),(j,l)] = φ(e_ij)[k,l]`, and the functional
//! `φ̃(a⊗b) = Tr(φ(a)·bᵀ)` has density matrix `C_φᵀ`.

use serde::{Deserialize, Serialize};

use crate::eigen::is_psd;
use crate::error::{Error, Result};
use crate::matrix::{kron, partial_transpose, Complex, Matrix, Side, ONE, ZERO};
use crate::tolerance::Tolerances;

/// One `x ↦ Tr(omega·x)·b` term of an entanglement-breaking map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolevoTerm {
    pub omega: Matrix,
    pub b: Matrix,
}

/// `x ↦ Σ_k Tr(omega_k·x)·b_k` with PSD `omega_k` and nonzero PSD `b_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolevoForm {
    terms: Vec<HolevoTerm>,
}

impl HolevoForm {
    pub fn new(terms: Vec<HolevoTerm>, tol: &Tolerances) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::domain("Holevo form needs at least one term"))?;
        let (n, m) = (first.omega.rows(), first.b.rows());
        for (idx, t) in terms.iter().enumerate() {
            if !t.omega.is_square() || !t.b.is_square() || t.omega.rows() != n || t.b.rows() != m {
                return Err(Error::dim(format!(
                    "Holevo term {idx} has inconsistent shape"
                )));
            }
            for (what, x) in [("omega", &t.omega), ("b", &t.b)] {
                let v = is_psd(x, tol)?;
                if !v.psd {
                    return Err(Error::Domain {
                        message: format!("Holevo term {idx}: {what} is not PSD"),
                        witness: v.witness,
                    });
                }
            }
            if t.b.frobenius_norm() <= tol.psd_slack {
                return Err(Error::domain(format!("Holevo term {idx}: b is zero")));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[HolevoTerm] {
        &self.terms
    }

    pub fn dim_in(&self) -> usize {
        self.terms[0].omega.rows()
    }

    pub fn dim_out(&self) -> usize {
        self.terms[0].b.rows()
    }

    /// Direct evaluation `Σ Tr(omega_k·x)·b_k`.
    pub fn evaluate(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim_out(), self.dim_out());
        for t in &self.terms {
            let w = (&t.omega * x).trace();
            out += &t.b.scale(w);
        }
        out
    }
}

impl<'de> Deserialize<'de> for HolevoForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            terms: Vec<HolevoTerm>,
        }
        let raw = Raw::deserialize(d)?;
        HolevoForm::new(raw.terms, &Tolerances::default()).map_err(serde::de::Error::custom)
    }
}

/// Where a map's Choi matrix came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Choi,
    Kraus(Vec<Matrix>),
    Holevo(HolevoForm),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMap {
    dim_in: usize,
    dim_out: usize,
    choi: Matrix,
    provenance: Provenance,
}

impl MatrixMap {
    /// Wraps a Choi matrix; it must be Hermitian (the map preserves Hermiticity).
    pub fn from_choi(
        dim_in: usize,
        dim_out: usize,
        choi: Matrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        let size = dim_in * dim_out;
        if size == 0 || choi.rows() != size || choi.cols() != size {
            return Err(Error::dim(format!(
                "Choi matrix {}x{} does not match {dim_in}->{dim_out}",
                choi.rows(),
                choi.cols()
            )));
        }
        if choi.anti_hermitian_norm() > tol.convergence * choi.frobenius_norm().max(1.0) {
            return Err(Error::domain("Choi matrix is not Hermitian"));
        }
        Ok(Self {
            dim_in,
            dim_out,
            choi,
            provenance: Provenance::Choi,
        })
    }

    fn from_choi_unchecked(dim_in: usize, dim_out: usize, choi: Matrix) -> Self {
        Self {
            dim_in,
            dim_out,
            choi,
            provenance: Provenance::Choi,
        }
    }

    /// `C = Σ_ij e_ij ⊗ action(e_ij)`.
    pub fn from_action(
        dim_in: usize,
        dim_out: usize,
        mut action: impl FnMut(&Matrix) -> Result<Matrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let size = dim_in * dim_out;
        let mut choi = Matrix::zeros(size, size);
        for i in 0..dim_in {
            for j in 0..dim_in {
                let out = action(&Matrix::unit(dim_in, i, j))?;
                if out.rows() != dim_out || out.cols() != dim_out {
                    return Err(Error::dim(format!(
                        "action on e_{i}{j} returned {}x{}, expected {dim_out}x{dim_out}",
                        out.rows(),
                        out.cols()
                    )));
                }
                for k in 0..dim_out {
                    for l in 0..dim_out {
                        choi[(i * dim_out + k, j * dim_out + l)] = out[(k, l)];
                    }
                }
            }
        }
        Self::from_choi(dim_in, dim_out, choi, tol)
    }

    /// `x ↦ Σ V_k x V_k*`, Choi matrix `Σ (I⊗V_k) P (I⊗V_k*)`.
    pub fn from_kraus(kraus: Vec<Matrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::domain("Kraus list must be nonempty"))?;
        let (m, n) = (first.rows(), first.cols());
        if kraus.iter().any(|v| v.rows() != m || v.cols() != n) {
            return Err(Error::dim("Kraus operators must share one shape"));
        }
        let p = maximally_entangled_p(n);
        let mut choi = Matrix::zeros(n * m, n * m);
        for v in &kraus {
            let lift = kron(&Matrix::identity(n), v);
            choi += &(&(&lift * &p) * &lift.adjoint());
        }
        Ok(Self {
            dim_in: n,
            dim_out: m,
            choi,
            provenance: Provenance::Kraus(kraus),
        })
    }

    /// Choi matrix `Σ_k omega_kᵀ ⊗ b_k`.
    pub fn from_holevo(form: HolevoForm) -> Self {
        let (n, m) = (form.dim_in(), form.dim_out());
        let mut choi = Matrix::zeros(n * m, n * m);
        for t in form.terms() {
            choi += &kron(&t.omega.transpose(), &t.b);
        }
        Self {
            dim_in: n,
            dim_out: m,
            choi,
            provenance: Provenance::Holevo(form),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_choi_unchecked(n, n, maximally_entangled_p(n))
    }

    pub fn transpose_map(n: usize) -> Self {
        Self::from_choi_unchecked(n, n, swap(n))
    }

    pub fn zero(dim_in: usize, dim_out: usize) -> Self {
        let size = dim_in * dim_out;
        Self::from_choi_unchecked(dim_in, dim_out, Matrix::zeros(size, size))
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &Matrix {
        &self.choi
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn holevo(&self) -> Option<&HolevoForm> {
        match &self.provenance {
            Provenance::Holevo(h) => Some(h),
            _ => None,
        }
    }

    /// `φ(a) = Tr_First((aᵀ⊗I)·C_φ)`, i.e. `φ(a)[k,l] = Σ_ij a_ij C[(i,k),(j,l)]`.
    pub fn apply(&self, a: &Matrix) -> Result<Matrix> {
        let (n, m) = (self.dim_in, self.dim_out);
        if a.rows() != n || a.cols() != n {
            return Err(Error::dim(format!(
                "map on M_{n} applied to a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let mut out = Matrix::zeros(m, m);
        for i in 0..n {
            for j in 0..n {
                let aij = a[(i, j)];
                if aij == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(k, l)] += aij * self.choi[(i * m + k, j * m + l)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Adjoint for the trace pairing: `Tr(φ(a)b) = Tr(a·φ*(b))`.
    pub fn adjoint(&self) -> MatrixMap {
        let (n, m) = (self.dim_in, self.dim_out);
        // D[(k,a),(l,b)] = φ*(e_kl)[a,b] = C[(b,l),(a,k)]
        let choi = Matrix::from_fn(m * n, m * n, |r, c| {
            let (k, a) = (r / n, r % n);
            let (l, b) = (c / n, c % n);
            self.choi[(b * m + l, a * m + k)]
        });
        Self::from_choi_unchecked(m, n, choi)
    }

    /// `φᵗ = t∘φ∘t`, whose Choi matrix is `C_φᵀ`.
    pub fn transpose_conjugate(&self) -> MatrixMap {
        Self::from_choi_unchecked(self.dim_in, self.dim_out, self.choi.transpose())
    }

    /// `t∘φ`: Choi matrix is the second-factor partial transpose of `C_φ`.
    pub fn then_transpose(&self) -> MatrixMap {
        let choi = partial_transpose(&self.choi, (self.dim_in, self.dim_out), Side::Second)
            .expect("Choi matrix shape is an invariant");
        Self::from_choi_unchecked(self.dim_in, self.dim_out, choi)
    }

    /// `φ∘t`: Choi matrix is the first-factor partial transpose of `C_φ`.
    pub fn after_transpose(&self) -> MatrixMap {
        let choi = partial_transpose(&self.choi, (self.dim_in, self.dim_out), Side::First)
            .expect("Choi matrix shape is an invariant");
        Self::from_choi_unchecked(self.dim_in, self.dim_out, choi)
    }

    /// `x ↦ outer·φ(inner·x·inner*)·outer*`.
    pub fn conjugated(&self, outer: &Matrix, inner: &Matrix) -> Result<MatrixMap> {
        if inner.rows() != self.dim_in || inner.cols() != self.dim_in {
            return Err(Error::dim("inner conjugation must be dim_in x dim_in"));
        }
        if outer.cols() != self.dim_out {
            return Err(Error::dim("outer conjugation must have dim_out columns"));
        }
        let tol = Tolerances::default();
        let inner_adj = inner.adjoint();
        let outer_adj = outer.adjoint();
        MatrixMap::from_action(
            self.dim_in,
            outer.rows(),
            |x| {
                let y = self.apply(&(&(inner * x) * &inner_adj))?;
                Ok(&(outer * &y) * &outer_adj)
            },
            &tol,
        )
    }

    pub fn scaled(&self, s: f64) -> MatrixMap {
        Self::from_choi_unchecked(self.dim_in, self.dim_out, self.choi.scale_re(s))
    }

    /// `(ι⊗φ)(x)` for `x` on `ℂᵏ⊗ℂⁿ`: φ applied to every `n×n` block.
    pub fn apply_second(&self, x: &Matrix, first_dim: usize) -> Result<Matrix> {
        let (n, m) = (self.dim_in, self.dim_out);
        if x.rows() != first_dim * n || x.cols() != first_dim * n {
            return Err(Error::dim(format!(
                "(ι⊗φ) with φ on M_{n} applied to a {}x{} matrix with first factor {first_dim}",
                x.rows(),
                x.cols()
            )));
        }
        let mut out = Matrix::zeros(first_dim * m, first_dim * m);
        for i in 0..first_dim {
            for j in 0..first_dim {
                let img = self.apply(&crate::matrix::block(x, n, i, j))?;
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = img[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Density matrix `C_φᵀ` of the dual functional `φ̃`.
    pub fn to_state(&self, tol: &Tolerances) -> Result<BipartiteState> {
        BipartiteState::new((self.dim_in, self.dim_out), self.choi.transpose(), tol)
    }

    /// Inverse of [`MatrixMap::to_state`]: Choi matrix is `densityᵀ`.
    pub fn from_state(state: &BipartiteState) -> MatrixMap {
        let (n, m) = state.dims();
        Self::from_choi_unchecked(n, m, state.density().transpose())
    }

    /// `φ̃(a⊗b) = Tr(φ(a)·bᵀ)`.
    pub fn pairing(&self, a: &Matrix, b: &Matrix) -> Result<Complex> {
        if b.rows() != self.dim_out || b.cols() != self.dim_out {
            return Err(Error::dim("pairing: b must be dim_out x dim_out"));
        }
        let fa = self.apply(a)?;
        Ok((&fa * &b.transpose()).trace())
    }
}

/// Density matrix of a positive functional on `M_n ⊗ M_m`; the trace is the
/// total mass and need not be one.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    dims: (usize, usize),
    density: Matrix,
}

impl BipartiteState {
    pub fn new(dims: (usize, usize), density: Matrix, tol: &Tolerances) -> Result<Self> {
        let size = dims.0 * dims.1;
        if size == 0 || density.rows() != size || density.cols() != size {
            return Err(Error::dim(format!(
                "density {}x{} does not match dims {}x{}",
                density.rows(),
                density.cols(),
                dims.0,
                dims.1
            )));
        }
        let v = is_psd(&density, tol)?;
        if !v.psd {
            return Err(Error::Domain {
                message: format!("density is not PSD (min eigenvalue {:e})", v.min_eigenvalue),
                witness: v.witness,
            });
        }
        Ok(Self { dims, density })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn density(&self) -> &Matrix {
        &self.density
    }

    pub fn mass(&self) -> f64 {
        self.density.trace().re
    }

    pub fn normalized(&self) -> BipartiteState {
        let mass = self.mass();
        if mass <= 0.0 {
            return self.clone();
        }
        Self {
            dims: self.dims,
            density: self.density.scale_re(1.0 / mass),
        }
    }

    /// `ρ(x) = Tr(h·x)`.
    pub fn expectation(&self, x: &Matrix) -> Complex {
        (&self.density * x).trace()
    }
}

/// `P = Σ_ij e_ij ⊗ e_ij`; `P/n` is the maximally entangled pure state.
pub fn maximally_entangled_p(n: usize) -> Matrix {
    Matrix::from_fn(n * n, n * n, |r, c| {
        if r % (n + 1) == 0 && c % (n + 1) == 0 {
            ONE
        } else {
            ZERO
        }
    })
}

/// Flip operator `Σ_ij e_ij ⊗ e_ji`, the Choi matrix of the transpose.
pub fn swap(n: usize) -> Matrix {
    Matrix::from_fn(n * n, n * n, |r, c| {
        if r / n == c % n && c / n == r % n {
            ONE
        } else {
            ZERO
        }
    })
}
