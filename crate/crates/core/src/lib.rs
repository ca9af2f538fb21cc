//! Positive maps on matrix algebras and the bipartite states dual to them.
//!
//! A linear map `φ: M_n → M_m` is stored through its Choi matrix
//! `C_φ = Σ e_ij ⊗ φ(e_ij)`; the dual functional `φ̃(a⊗b) = Tr(φ(a)bᵀ)` has
//! density matrix `C_φᵀ`. On top of that correspondence the crate classifies
//! maps (CP, copositive, positive, entanglement breaking), analyzes states
//! (PPT, witness battery), searches for PPT entangled states detected by a
//! nondecomposable map, and splits separable ensembles into orthogonal
//! irreducible blocks.

pub mod choi;
pub mod cli;
pub mod definite;
pub mod eigen;
pub mod error;
pub mod io;
pub mod matrix;
pub mod parallel;
pub mod positivity;
pub mod rng;
pub mod search;
pub mod separability;
pub mod tolerance;
mod union_find;

pub use choi::{BipartiteState, HolevoForm, HolevoTerm, MatrixMap, Provenance};
pub use eigen::{hermitian_eigen, is_psd, support_projection, Eigen, PsdVerdict};
pub use error::{Error, Result};
pub use matrix::{kron, partial_trace, partial_transpose, Complex, Matrix, Side};
pub use tolerance::Tolerances;
