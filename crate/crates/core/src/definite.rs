//! Definite sets `{a = a* : φ(a²) = φ(a)²}` and the block structure they
//! impose on separable states.

use serde::{Deserialize, Serialize};

use crate::choi::{HolevoForm, HolevoTerm, MatrixMap};
use crate::eigen::{hermitian_eigen, is_psd, support_projection};
use crate::error::{Error, Result};
use crate::matrix::{kron, Complex, Matrix, ONE};
use crate::rng::{random_hermitian, Stream};
use crate::separability::{detect_entanglement, ppt_check, Detection};
use crate::tolerance::Tolerances;
use crate::union_find::DisjointSet;

/// `Tr(p·q)` above this declares two support projections overlapping.
pub const OVERLAP_THRESHOLD: f64 = 1e-8;

/// Relative eigenvalue gap that separates clusters during simultaneous
/// diagonalization.
const CLUSTER_GAP: f64 = 1e-8;

/// `φ(a²) = φ(a)²` within `tol.convergence·max(1, ‖φ(a)‖²)`.
pub fn is_definite_element(f: &MatrixMap, a: &Matrix, tol: &Tolerances) -> Result<bool> {
    if !a.is_square() || a.anti_hermitian_norm() > tol.convergence * a.frobenius_norm().max(1.0) {
        return Err(Error::domain("definite set elements must be Hermitian"));
    }
    let fa = f.apply(a)?;
    let fa2 = f.apply(&(a * a))?;
    let gap = fa2.dist(&(&fa * &fa));
    Ok(gap <= tol.convergence * fa.frobenius_norm().powi(2).max(1.0))
}

fn is_projection(p: &Matrix, eps: f64) -> bool {
    p.is_square() && (p * p).dist(p) <= eps && p.dist(&p.adjoint()) <= eps
}

/// Checks `φ(x) = φ(exe) + φ(fxf) = φ(e)φ(x)φ(e) + φ(f)φ(x)φ(f)` with
/// `f = 1 − e` on `samples` random Hermitian `x`, and that `φ(e)`, `φ(f)` are
/// orthogonal projections. `e` must be a projection in the definite set.
pub fn split_by_projection(
    f: &MatrixMap,
    e: &Matrix,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<bool> {
    const EPS: f64 = 1e-9;
    if e.rows() != f.dim_in() || !is_projection(e, EPS) {
        return Err(Error::domain(
            "split_by_projection: e must be a projection on the input space",
        ));
    }
    if !is_definite_element(f, e, tol)? {
        return Err(Error::domain(
            "split_by_projection: e is not in the definite set",
        ));
    }
    let fc = &Matrix::identity(e.rows()) - e;
    let pe = f.apply(e)?;
    let pf = f.apply(&fc)?;
    if !is_projection(&pe, EPS) || !is_projection(&pf, EPS) || (&pe * &pf).frobenius_norm() > EPS {
        return Ok(false);
    }
    let mut stream = Stream::new(seed, 0x5_9117);
    for _ in 0..samples {
        let x = random_hermitian(&mut stream, e.rows());
        let fx = f.apply(&x)?;
        let scale = fx.frobenius_norm().max(1.0);
        let corners = &f.apply(&(&(e * &x) * e))? + &f.apply(&(&(&fc * &x) * &fc))?;
        let images = &(&(&pe * &fx) * &pe) + &(&(&pf * &fx) * &pf);
        if fx.dist(&corners) > EPS * scale || fx.dist(&images) > EPS * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTerm {
    pub weight: f64,
    pub a: Matrix,
    pub b: Matrix,
}

/// Convex combination `Σ λ_i a_i ⊗ b_i` of product states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparableEnsemble {
    terms: Vec<EnsembleTerm>,
}

impl SeparableEnsemble {
    pub fn new(terms: Vec<EnsembleTerm>, tol: &Tolerances) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::domain("ensemble needs at least one term"))?;
        let (n, m) = (first.a.rows(), first.b.rows());
        let mut total = 0.0;
        for (idx, t) in terms.iter().enumerate() {
            if t.weight.is_nan() || t.weight <= 0.0 {
                return Err(Error::domain(format!(
                    "term {idx}: weight must be positive"
                )));
            }
            total += t.weight;
            for (what, x, d) in [("a", &t.a, n), ("b", &t.b, m)] {
                if !x.is_square() || x.rows() != d {
                    return Err(Error::dim(format!(
                        "term {idx}: {what} has inconsistent shape"
                    )));
                }
                if (x.trace() - ONE).norm() > 1e-9 {
                    return Err(Error::domain(format!(
                        "term {idx}: {what} must have unit trace"
                    )));
                }
                let v = is_psd(x, tol)?;
                if !v.psd {
                    return Err(Error::Domain {
                        message: format!("term {idx}: {what} is not PSD"),
                        witness: v.witness,
                    });
                }
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[EnsembleTerm] {
        &self.terms
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.terms[0].a.rows(), self.terms[0].b.rows())
    }

    pub fn density(&self) -> Matrix {
        let (n, m) = self.dims();
        let mut h = Matrix::zeros(n * m, n * m);
        for t in &self.terms {
            h += &kron(&t.a, &t.b).scale_re(t.weight);
        }
        h
    }

    /// Entanglement-breaking map `x ↦ Σ λ_i Tr(a_i x)·b_iᵀ` whose dual
    /// functional has density [`SeparableEnsemble::density`].
    pub fn holevo_form(&self, tol: &Tolerances) -> Result<HolevoForm> {
        HolevoForm::new(
            self.terms
                .iter()
                .map(|t| HolevoTerm {
                    omega: t.a.clone(),
                    b: t.b.transpose().scale_re(t.weight),
                })
                .collect(),
            tol,
        )
    }

    /// The Holevo map compressed to be unital on the support of `φ(1)`:
    /// `x ↦ S·φ(x)·S` with `S = φ(1)^{-1/2}` (pseudo-inverse).
    pub fn unital_map(&self, tol: &Tolerances) -> Result<MatrixMap> {
        let phi = MatrixMap::from_holevo(self.holevo_form(tol)?);
        let one = phi.apply(&Matrix::identity(phi.dim_in()))?;
        let eig = hermitian_eigen(&one, tol)?;
        let threshold = tol.psd_threshold(one.frobenius_norm());
        let m = one.rows();
        let v = &eig.vectors;
        let s = Matrix::from_fn(m, m, |i, j| {
            (0..m)
                .filter(|&k| eig.values[k] > threshold)
                .map(|k| v[(i, k)] * eig.values[k].sqrt().recip() * v[(j, k)].conj())
                .sum()
        });
        MatrixMap::from_action(phi.dim_in(), m, |x| Ok(&(&s * &phi.apply(x)?) * &s), tol)
    }
}

impl<'de> Deserialize<'de> for SeparableEnsemble {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            terms: Vec<EnsembleTerm>,
        }
        let raw = Raw::deserialize(d)?;
        SeparableEnsemble::new(raw.terms, &Tolerances::default()).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockComponent {
    /// Indices into the ensemble's terms.
    pub indices: Vec<usize>,
    pub e: Matrix,
    pub f: Matrix,
    pub weight: f64,
    /// Normalized component state `Σ_{i∈C} λ_i a_i⊗b_i / λ_C`.
    pub state: Matrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockDecomposition {
    pub dims: (usize, usize),
    pub components: Vec<BlockComponent>,
    /// `max ‖e_C·e_C'‖_F` and `max ‖f_C·f_C'‖_F` over distinct components.
    pub max_cross_overlap: f64,
    /// `max ‖e_C·a − a‖_F` (and likewise for `f_C`, `b`) over members.
    pub max_support_leak: f64,
    /// `‖Σ_C λ_C·state_C − h‖_F`.
    pub reconstruction_error: f64,
}

/// Splits a separable ensemble into orthogonal irreducible blocks.
///
/// Terms `i`, `j` are linked when their `a`-supports or their `b`-supports
/// overlap; each connected component `C` yields the projections
/// `e_C = supp Σ_{i∈C} a_i` and `f_C = supp Σ_{i∈C} b_i`.
pub fn decompose_separable(
    ens: &SeparableEnsemble,
    tol: &Tolerances,
) -> Result<BlockDecomposition> {
    let terms = ens.terms();
    let k = terms.len();
    let sa: Vec<Matrix> = terms
        .iter()
        .map(|t| support_projection(&t.a, tol))
        .collect::<Result<_>>()?;
    let sb: Vec<Matrix> = terms
        .iter()
        .map(|t| support_projection(&t.b, tol))
        .collect::<Result<_>>()?;

    let mut sets = DisjointSet::new(k);
    for i in 0..k {
        for j in (i + 1)..k {
            let oa = (&sa[i] * &sa[j]).trace().re;
            let ob = (&sb[i] * &sb[j]).trace().re;
            if oa > OVERLAP_THRESHOLD || ob > OVERLAP_THRESHOLD {
                sets.union(i, j);
            }
        }
    }

    let (n, m) = ens.dims();
    let mut components = Vec::new();
    for indices in sets.groups() {
        let mut sum_a = Matrix::zeros(n, n);
        let mut sum_b = Matrix::zeros(m, m);
        let mut state = Matrix::zeros(n * m, n * m);
        let mut weight = 0.0;
        for &i in &indices {
            let t = &terms[i];
            sum_a += &t.a;
            sum_b += &t.b;
            state += &kron(&t.a, &t.b).scale_re(t.weight);
            weight += t.weight;
        }
        components.push(BlockComponent {
            e: support_projection(&sum_a, tol)?,
            f: support_projection(&sum_b, tol)?,
            state: state.scale_re(1.0 / weight),
            weight,
            indices,
        });
    }

    let mut max_cross: f64 = 0.0;
    for (ci, c) in components.iter().enumerate() {
        for d in &components[ci + 1..] {
            max_cross = max_cross
                .max((&c.e * &d.e).frobenius_norm())
                .max((&c.f * &d.f).frobenius_norm());
        }
    }
    let mut max_leak: f64 = 0.0;
    let mut rebuilt = Matrix::zeros(n * m, n * m);
    for c in &components {
        for &i in &c.indices {
            max_leak = max_leak
                .max((&c.e * &terms[i].a).dist(&terms[i].a))
                .max((&c.f * &terms[i].b).dist(&terms[i].b));
        }
        rebuilt += &c.state.scale_re(c.weight);
    }
    Ok(BlockDecomposition {
        dims: (n, m),
        components,
        max_cross_overlap: max_cross,
        max_support_leak: max_leak,
        reconstruction_error: rebuilt.dist(&ens.density()),
    })
}

/// Orthonormal Hermitian basis of `M_n`: `e_ii`, `(e_ij+e_ji)/√2`, `i(e_ij−e_ji)/√2`.
pub fn hermitian_basis(n: usize) -> Vec<Matrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(Matrix::unit(n, i, i));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = Matrix::zeros(n, n);
            s[(i, j)] = Complex::new(h, 0.0);
            s[(j, i)] = Complex::new(h, 0.0);
            out.push(s);
            let mut a = Matrix::zeros(n, n);
            a[(i, j)] = Complex::new(0.0, -h);
            a[(j, i)] = Complex::new(0.0, h);
            out.push(a);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum AbelianRange {
    Holevo(HolevoForm),
    NotAbelian {
        /// Indices into [`hermitian_basis`] whose images fail to commute.
        pair: (usize, usize),
        commutator_norm: f64,
    },
}

/// If `φ(M_n)` is commutative, writes `φ(x) = Σ_r ω_r(x)·p_r` with the
/// common spectral projections `p_r` and `ω_r(x) = Tr(p_r φ(x))/Tr(p_r)`.
pub fn abelian_range_decompose(f: &MatrixMap, seed: u64, tol: &Tolerances) -> Result<AbelianRange> {
    let basis = hermitian_basis(f.dim_in());
    let images: Vec<Matrix> = basis.iter().map(|h| f.apply(h)).collect::<Result<_>>()?;
    let scale = images
        .iter()
        .map(Matrix::frobenius_norm)
        .fold(0.0, f64::max)
        .max(1.0);
    let comm_tol = tol.convergence * scale * scale;

    let mut worst: Option<((usize, usize), f64)> = None;
    for k in 0..images.len() {
        for l in (k + 1)..images.len() {
            let c = Matrix::commutator(&images[k], &images[l]).frobenius_norm();
            if c > comm_tol && worst.is_none_or(|(_, w)| c > w) {
                worst = Some(((k, l), c));
            }
        }
    }
    if let Some((pair, commutator_norm)) = worst {
        return Ok(AbelianRange::NotAbelian {
            pair,
            commutator_norm,
        });
    }

    let m = f.dim_out();
    let mut stream = Stream::new(seed, 0xAB_E11A);
    let blocks = refine(&Matrix::identity(m), &images, &mut stream, scale, tol)?;

    let adjoint = f.adjoint();
    let mut terms = Vec::new();
    for q in blocks {
        let p = &q * &q.adjoint();
        let rank = q.cols() as f64;
        let omega = adjoint.apply(&p)?.scale_re(1.0 / rank).hermitian_part();
        if omega.frobenius_norm() <= tol.psd_threshold(scale) {
            continue;
        }
        terms.push(HolevoTerm { omega, b: p });
    }
    if terms.is_empty() {
        return Err(Error::domain("abelian_range_decompose: the map is zero"));
    }
    let form = HolevoForm::new(terms, tol).map_err(|e| match e {
        Error::Domain { witness, .. } => Error::Domain {
            message: "abelian_range_decompose: map is not positive".into(),
            witness,
        },
        other => other,
    })?;

    let err = images
        .iter()
        .zip(&basis)
        .map(|(img, h)| form.evaluate(h).dist(img))
        .fold(0.0, f64::max);
    if err > 1e-9 * scale {
        return Err(Error::Numerical(format!(
            "simultaneous diagonalization does not reproduce the map (error {err:e})"
        )));
    }
    Ok(AbelianRange::Holevo(form))
}

/// Splits the subspace spanned by the isometry `q` into joint eigenspaces of
/// the commuting Hermitian `ops`.
fn refine(
    q: &Matrix,
    ops: &[Matrix],
    stream: &mut Stream,
    scale: f64,
    tol: &Tolerances,
) -> Result<Vec<Matrix>> {
    let d = q.cols();
    if d == 1 {
        return Ok(vec![q.clone()]);
    }
    let qa = q.adjoint();
    let compressed: Vec<Matrix> = ops.iter().map(|g| &(&qa * g) * q).collect();
    let scalar_tol = 1e3 * tol.convergence * scale;
    let is_scalar = |g: &Matrix| {
        let mean = g.trace() / d as f64;
        (g - &Matrix::identity(d).scale(mean)).frobenius_norm() <= scalar_tol
    };
    if compressed.iter().all(is_scalar) {
        return Ok(vec![q.clone()]);
    }

    const ATTEMPTS: usize = 4;
    for _ in 0..ATTEMPTS {
        let mut combo = Matrix::zeros(d, d);
        for g in &compressed {
            combo += &g.scale_re(stream.normal());
        }
        let combo = combo.hermitian_part();
        let eig = hermitian_eigen(&combo, tol)?;
        let spread = eig.max() - eig.min();
        if spread <= scalar_tol {
            continue;
        }
        let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
        for k in 1..d {
            if eig.values[k - 1] - eig.values[k] > CLUSTER_GAP * spread {
                clusters.push(Vec::new());
            }
            clusters.last_mut().expect("nonempty").push(k);
        }
        if clusters.len() == 1 {
            continue;
        }
        let mut out = Vec::new();
        for cluster in clusters {
            let cols: Vec<Matrix> = cluster.iter().map(|&k| eig.vectors.col(k)).collect();
            let sub = q * &Matrix::from_columns(&cols);
            out.extend(refine(&sub, ops, stream, scale, tol)?);
        }
        return Ok(out);
    }
    Err(Error::Numerical(
        "simultaneous diagonalization failed to split a non-scalar block".into(),
    ))
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ConditionalExpectationVerdict {
    Separable {
        holevo: HolevoForm,
        /// Max `‖φ(h) − Σ ω_r(h)p_r‖_F` over a Hermitian basis.
        reproduction_error: f64,
    },
    Entangled {
        pair: (usize, usize),
        commutator_norm: f64,
        /// Smallest eigenvalue of `(ι⊗t)(C_φᵀ)` for the unnormalized state.
        ppt_min_eigenvalue: f64,
        detection: Option<Detection>,
        /// The state fails the PPT test or is caught by the witness battery.
        crosscheck_passed: bool,
    },
}

/// Separability of `φ̃` for a conditional expectation `φ`, decided by
/// whether the range of `φ` is commutative.
pub fn conditional_expectation_verdict(
    f: &MatrixMap,
    seed: u64,
    tol: &Tolerances,
) -> Result<ConditionalExpectationVerdict> {
    const EPS: f64 = 1e-9;
    let n = f.dim_in();
    if f.dim_out() != n {
        return Err(Error::domain(
            "conditional expectation must map M_n into itself",
        ));
    }
    if f.apply(&Matrix::identity(n))?.dist(&Matrix::identity(n)) > EPS {
        return Err(Error::domain("conditional expectation must be unital"));
    }
    let basis = hermitian_basis(n);
    for h in &basis {
        let once = f.apply(h)?;
        if f.apply(&once)?.dist(&once) > EPS * once.frobenius_norm().max(1.0) {
            return Err(Error::domain("conditional expectation must be idempotent"));
        }
    }
    match abelian_range_decompose(f, seed, tol)? {
        AbelianRange::Holevo(holevo) => {
            let reproduction_error = basis
                .iter()
                .map(|h| Ok(holevo.evaluate(h).dist(&f.apply(h)?)))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(ConditionalExpectationVerdict::Separable {
                holevo,
                reproduction_error,
            })
        }
        AbelianRange::NotAbelian {
            pair,
            commutator_norm,
        } => {
            let state = f.to_state(tol)?;
            let ppt = ppt_check(&state, seed, tol)?;
            let lib = crate::positivity::WitnessLibrary::standard(
                n,
                seed,
                crate::parallel::Parallelism::serial(),
                tol,
            )?;
            let detection = detect_entanglement(&state, &lib, tol)?.detection;
            Ok(ConditionalExpectationVerdict::Entangled {
                pair,
                commutator_norm,
                ppt_min_eigenvalue: ppt.min_eigenvalue,
                crosscheck_passed: !ppt.ppt || detection.is_some(),
                detection,
            })
        }
    }
}

/// `x ↦ Σ_r p_r x p_r` for a family of orthogonal projections summing to 1.
pub fn pinching(projections: &[Matrix], tol: &Tolerances) -> Result<MatrixMap> {
    let n = projections
        .first()
        .ok_or_else(|| Error::domain("pinching needs at least one projection"))?
        .rows();
    MatrixMap::from_action(
        n,
        n,
        |x| {
            let mut out = Matrix::zeros(n, n);
            for p in projections {
                out += &(&(p * x) * p);
            }
            Ok(out)
        },
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_density, random_unitary};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(n: usize, i: usize, j: usize) -> Matrix {
        Matrix::unit(n, i, j)
    }

    fn diag_expectation(n: usize) -> MatrixMap {
        let ps: Vec<Matrix> = (0..n).map(|i| e(n, i, i)).collect();
        pinching(&ps, &tol()).unwrap()
    }

    fn term(weight: f64, a: Matrix, b: Matrix) -> EnsembleTerm {
        EnsembleTerm { weight, a, b }
    }

    #[test]
    fn definite_elements() {
        let f = diag_expectation(2);
        assert!(is_definite_element(&f, &Matrix::identity(2), &tol()).unwrap());
        assert!(!is_definite_element(&f, &(&e(2, 0, 1) + &e(2, 1, 0)), &tol()).unwrap());
        assert!(is_definite_element(&f, &e(2, 0, 0), &tol()).unwrap());
        assert!(is_definite_element(&f, &e(2, 0, 1), &tol()).is_err());
    }

    #[test]
    fn split_examples() {
        assert!(split_by_projection(&diag_expectation(2), &e(2, 0, 0), 20, 0, &tol()).unwrap());
        // negative control: e11 is definite for ι but ι does not split off-diagonals
        assert!(!split_by_projection(&MatrixMap::identity(2), &e(2, 0, 0), 20, 0, &tol()).unwrap());

        let holevo = HolevoForm::new(
            vec![
                HolevoTerm {
                    omega: e(3, 0, 0),
                    b: e(2, 0, 0),
                },
                HolevoTerm {
                    omega: Matrix::diag(&[0.0, 0.5, 0.5]),
                    b: e(2, 1, 1),
                },
            ],
            &tol(),
        )
        .unwrap();
        let f = MatrixMap::from_holevo(holevo);
        assert!(split_by_projection(&f, &e(3, 0, 0), 20, 0, &tol()).unwrap());

        // not a definite element
        let g = diag_expectation(2);
        let half = Matrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(split_by_projection(&g, &half, 5, 0, &tol()).is_err());
        assert!(split_by_projection(&g, &Matrix::diag(&[0.5, 0.0]), 5, 0, &tol()).is_err());
    }

    #[test]
    fn decompose_examples() {
        let ens = SeparableEnsemble::new(
            vec![
                term(0.5, e(2, 0, 0), e(2, 0, 0)),
                term(0.5, e(2, 1, 1), e(2, 1, 1)),
            ],
            &tol(),
        )
        .unwrap();
        let d = decompose_separable(&ens, &tol()).unwrap();
        assert_eq!(d.components.len(), 2);
        assert!(d.components[0].e.dist(&e(2, 0, 0)) < 1e-12);
        assert!(d.components[1].e.dist(&e(2, 1, 1)) < 1e-12);

        let mut s = Stream::new(51, 0);
        let a = random_density(&mut s, 3, 2);
        let b = random_density(&mut s, 2, 1);
        let ens = SeparableEnsemble::new(vec![term(1.0, a.clone(), b.clone())], &tol()).unwrap();
        let d = decompose_separable(&ens, &tol()).unwrap();
        assert_eq!(d.components.len(), 1);
        assert!(
            d.components[0]
                .e
                .dist(&support_projection(&a, &tol()).unwrap())
                < 1e-12
        );
        assert!(
            d.components[0]
                .f
                .dist(&support_projection(&b, &tol()).unwrap())
                < 1e-12
        );

        let third = 1.0 / 3.0;
        let ens = SeparableEnsemble::new(
            vec![
                term(
                    third,
                    Matrix::diag(&[1.0, 0.0]),
                    Matrix::diag(&[1.0, 0.0, 0.0]),
                ),
                term(
                    third,
                    Matrix::diag(&[0.5, 0.5]),
                    Matrix::diag(&[0.0, 1.0, 0.0]),
                ),
                term(
                    third,
                    Matrix::diag(&[0.0, 1.0]),
                    Matrix::diag(&[0.0, 0.0, 1.0]),
                ),
            ],
            &tol(),
        )
        .unwrap();
        let d = decompose_separable(&ens, &tol()).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].indices, vec![0, 1, 2]);
        assert!(d.reconstruction_error < 1e-12);
    }

    #[test]
    fn ensemble_validation() {
        assert!(SeparableEnsemble::new(vec![term(0.5, e(2, 0, 0), e(2, 0, 0))], &tol()).is_err());
        assert!(
            SeparableEnsemble::new(vec![term(1.0, Matrix::identity(2), e(2, 0, 0))], &tol())
                .is_err()
        );
        assert!(SeparableEnsemble::new(
            vec![term(1.0, Matrix::diag(&[2.0, -1.0]), e(2, 0, 0))],
            &tol()
        )
        .is_err());
        assert!(SeparableEnsemble::new(vec![], &tol()).is_err());
    }

    #[test]
    fn block_projections_are_definite_for_unital_map() {
        let mut s = Stream::new(52, 0);
        let u = random_unitary(&mut s, 4);
        let v = random_unitary(&mut s, 3);
        let ca = |cols: &[usize]| {
            Matrix::from_columns(&cols.iter().map(|&c| u.col(c)).collect::<Vec<_>>())
        };
        let cb = |cols: &[usize]| {
            Matrix::from_columns(&cols.iter().map(|&c| v.col(c)).collect::<Vec<_>>())
        };
        let blocks = [(ca(&[0, 1]), cb(&[0])), (ca(&[2, 3]), cb(&[1, 2]))];
        let mut terms = Vec::new();
        for (qa, qb) in &blocks {
            for _ in 0..2 {
                let a = &(qa * &random_density(&mut s, qa.cols(), qa.cols())) * &qa.adjoint();
                let b = &(qb * &random_density(&mut s, qb.cols(), qb.cols())) * &qb.adjoint();
                terms.push(term(0.25, a, b));
            }
        }
        let ens = SeparableEnsemble::new(terms, &tol()).unwrap();
        let d = decompose_separable(&ens, &tol()).unwrap();
        assert_eq!(d.components.len(), 2);
        let phi = ens.unital_map(&tol()).unwrap();
        for c in &d.components {
            assert!(is_definite_element(&phi, &c.e, &tol()).unwrap());
            assert!(split_by_projection(&phi, &c.e, 10, 1, &tol()).unwrap());
        }
    }

    #[test]
    fn abelian_examples() {
        match abelian_range_decompose(&diag_expectation(2), 0, &tol()).unwrap() {
            AbelianRange::Holevo(h) => {
                assert_eq!(h.terms().len(), 2);
                let mut got: Vec<(Matrix, Matrix)> = h
                    .terms()
                    .iter()
                    .map(|t| (t.omega.clone(), t.b.clone()))
                    .collect();
                got.sort_by(|x, y| y.0[(0, 0)].re.total_cmp(&x.0[(0, 0)].re));
                for (r, (omega, b)) in got.iter().enumerate() {
                    assert!(omega.dist(&e(2, r, r)) < 1e-12);
                    assert!(b.dist(&e(2, r, r)) < 1e-12);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            abelian_range_decompose(&MatrixMap::identity(2), 0, &tol()).unwrap(),
            AbelianRange::NotAbelian { .. }
        ));

        // range spanned by {I, diag(1,-1)} through generic functionals
        let mut s = Stream::new(53, 0);
        let r1 = random_density(&mut s, 3, 3);
        let r2 = random_density(&mut s, 3, 3);
        let f = MatrixMap::from_action(
            3,
            2,
            |x| Ok(&e(2, 0, 0).scale((&r1 * x).trace()) + &e(2, 1, 1).scale((&r2 * x).trace())),
            &tol(),
        )
        .unwrap();
        match abelian_range_decompose(&f, 0, &tol()).unwrap() {
            AbelianRange::Holevo(h) => {
                assert_eq!(h.terms().len(), 2);
                let x = crate::rng::random_matrix(&mut s, 3, 3);
                assert!(h.evaluate(&x).dist(&f.apply(&x).unwrap()) < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn abelian_with_degenerate_blocks() {
        // x ↦ x11·e11 + (x22+x33)/2·(e22+e33): eigenspace of dimension 2
        let p1 = e(3, 0, 0);
        let p2 = &e(3, 1, 1) + &e(3, 2, 2);
        let f = MatrixMap::from_action(
            3,
            3,
            |x| Ok(&p1.scale(x[(0, 0)]) + &p2.scale((x[(1, 1)] + x[(2, 2)]) * 0.5)),
            &tol(),
        )
        .unwrap();
        match abelian_range_decompose(&f, 3, &tol()).unwrap() {
            AbelianRange::Holevo(h) => assert_eq!(h.terms().len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn conditional_expectation_examples() {
        match conditional_expectation_verdict(&diag_expectation(2), 0, &tol()).unwrap() {
            ConditionalExpectationVerdict::Separable {
                holevo,
                reproduction_error,
            } => {
                assert_eq!(holevo.terms().len(), 2);
                assert!(reproduction_error < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        match conditional_expectation_verdict(&MatrixMap::identity(2), 0, &tol()).unwrap() {
            ConditionalExpectationVerdict::Entangled {
                ppt_min_eigenvalue,
                crosscheck_passed,
                ..
            } => {
                assert!((ppt_min_eigenvalue + 1.0).abs() < 1e-9);
                assert!(crosscheck_passed);
            }
            other => panic!("unexpected {other:?}"),
        }
        let p1 = e(3, 0, 0);
        let p2 = &e(3, 1, 1) + &e(3, 2, 2);
        // expectation onto {a·I + b·e11}
        let f = MatrixMap::from_action(
            3,
            3,
            |x| {
                let avg = (x[(1, 1)] + x[(2, 2)]) * 0.5;
                Ok(&p1.scale(x[(0, 0)]) + &p2.scale(avg))
            },
            &tol(),
        )
        .unwrap();
        assert!(matches!(
            conditional_expectation_verdict(&f, 0, &tol()).unwrap(),
            ConditionalExpectationVerdict::Separable { .. }
        ));
        // non-idempotent input
        assert!(conditional_expectation_verdict(
            &MatrixMap::transpose_map(2).scaled(0.5),
            0,
            &tol()
        )
        .is_err());
    }
}
