//! Where a map sits among the cones: completely positive, copositive,
//! positive (block-positive Choi matrix), entanglement breaking.

use serde::Serialize;

use crate::choi::{HolevoForm, MatrixMap, Provenance};
use crate::definite::{abelian_range_decompose, AbelianRange};
use crate::eigen::{hermitian_eigen, is_psd, PsdVerdict};
use crate::error::{Error, Result};
use crate::matrix::{Complex, Matrix, ZERO};
use crate::parallel::Parallelism;
use crate::rng::{random_matrix, random_unit_vector, Stream};
use crate::separability::detect_entanglement;
use crate::tolerance::Tolerances;

/// Restart/iteration budget for the product-vector minimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub convergence: f64,
}

impl Default for BlockBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            iterations: 500,
            convergence: 1e-10,
        }
    }
}

/// `C_φ ⪰ 0`.
pub fn is_cp(f: &MatrixMap, tol: &Tolerances) -> Result<PsdVerdict> {
    is_psd(f.choi(), tol)
}

/// `t∘φ` completely positive. The partially transposed Choi matrix is
/// compared against the Choi matrix rebuilt from the action of `t∘φ`.
pub fn is_copositive(f: &MatrixMap, tol: &Tolerances) -> Result<PsdVerdict> {
    let via_pt = f.then_transpose();
    let via_action = MatrixMap::from_action(
        f.dim_in(),
        f.dim_out(),
        |x| Ok(f.apply(x)?.transpose()),
        tol,
    )?;
    let scale = f.choi().frobenius_norm().max(1.0);
    if via_pt.choi().max_abs_diff(via_action.choi()) > 1e-12 * scale {
        return Err(Error::Numerical(
            "copositivity: partial transpose and t∘φ disagree".into(),
        ));
    }
    let a = is_psd(via_pt.choi(), tol)?;
    let b = is_psd(via_action.choi(), tol)?;
    if a.psd != b.psd {
        return Err(Error::Numerical(
            "copositivity: verdicts of the two routes disagree".into(),
        ));
    }
    Ok(a)
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockMin {
    /// Smallest `⟨x⊗y, C x⊗y⟩` found; an upper bound on the true minimum.
    pub value: f64,
    pub x: Matrix,
    pub y: Matrix,
    pub converged: bool,
    pub restart: usize,
}

/// `⟨x⊗y, C·x⊗y⟩` for unit `x ∈ ℂⁿ`, `y ∈ ℂᵐ`.
pub fn product_expectation(c: &Matrix, x: &Matrix, y: &Matrix) -> f64 {
    c.quadratic_form(&crate::matrix::kron(x, y)).re
}

/// `(x*⊗I)·C·(x⊗I)`.
fn compress_first(c: &Matrix, dims: (usize, usize), x: &Matrix) -> Matrix {
    let (n, m) = dims;
    Matrix::from_fn(m, m, |k, l| {
        let mut s = ZERO;
        for i in 0..n {
            let xi = x[(i, 0)].conj();
            if xi == ZERO {
                continue;
            }
            for j in 0..n {
                s += xi * c[(i * m + k, j * m + l)] * x[(j, 0)];
            }
        }
        s
    })
}

/// `(I⊗y*)·C·(I⊗y)`.
fn compress_second(c: &Matrix, dims: (usize, usize), y: &Matrix) -> Matrix {
    let (n, m) = dims;
    Matrix::from_fn(n, n, |i, j| {
        let mut s = ZERO;
        for k in 0..m {
            let yk = y[(k, 0)].conj();
            if yk == ZERO {
                continue;
            }
            for l in 0..m {
                s += yk * c[(i * m + k, j * m + l)] * y[(l, 0)];
            }
        }
        s
    })
}

fn min_eigvec(x: &Matrix, tol: &Tolerances) -> Result<(f64, Matrix)> {
    let eig = hermitian_eigen(x, tol)?;
    Ok((eig.min(), eig.min_vector()))
}

fn alternate(
    c: &Matrix,
    dims: (usize, usize),
    budget: &BlockBudget,
    seed: u64,
    restart: usize,
    tol: &Tolerances,
) -> Result<BlockMin> {
    let mut stream = Stream::new(seed, restart as u64);
    let mut x = random_unit_vector(&mut stream, dims.0);
    let (mut value, mut y) = min_eigvec(&compress_first(c, dims, &x), tol)?;
    let mut converged = false;
    for _ in 0..budget.iterations {
        let (vx, nx) = min_eigvec(&compress_second(c, dims, &y), tol)?;
        x = nx;
        let (vy, ny) = min_eigvec(&compress_first(c, dims, &x), tol)?;
        y = ny;
        let next = vx.min(vy);
        let gain = value - next;
        value = next;
        if gain <= budget.convergence * value.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let value = product_expectation(c, &x, &y);
    Ok(BlockMin {
        value,
        x,
        y,
        converged,
        restart,
    })
}

/// Minimizes `⟨x⊗y, C x⊗y⟩` over unit product vectors by alternating
/// smallest-eigenvector updates from `budget.restarts` seeded starts.
///
/// A negative result certifies that the map with Choi matrix `C` is not
/// positive; a nonnegative one is only evidence of positivity.
pub fn block_positivity_minimize(
    c: &Matrix,
    dims: (usize, usize),
    budget: &BlockBudget,
    seed: u64,
    par: Parallelism,
    tol: &Tolerances,
) -> Result<BlockMin> {
    if !c.is_square() || c.rows() != dims.0 * dims.1 {
        return Err(Error::dim(
            "block_positivity_minimize: C does not match dims",
        ));
    }
    if c.anti_hermitian_norm() > tol.convergence * c.frobenius_norm().max(1.0) {
        return Err(Error::domain(
            "block_positivity_minimize: C is not Hermitian",
        ));
    }
    if budget.restarts == 0 {
        return Err(Error::domain("block_positivity_minimize: zero restarts"));
    }
    let runs = par.map_indices(budget.restarts, |r| {
        alternate(c, dims, budget, seed, r, tol)
    });
    let mut best: Option<BlockMin> = None;
    for run in runs {
        let run = run?;
        let better = match &best {
            None => true,
            Some(b) => run
                .value
                .total_cmp(&b.value)
                .then(run.restart.cmp(&b.restart))
                .is_lt(),
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum PositiveVerdict {
    CertifiedNonpositive { x: Matrix, y: Matrix, value: f64 },
    ProbablyPositive,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum EbVerdict {
    CertifiedSeparableChoi {
        source: String,
        holevo: HolevoForm,
    },
    CertifiedEntangledChoi {
        witness: String,
        eigenvalue: f64,
        vector: Matrix,
    },
    Inconclusive,
    NotApplicable {
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeVerdict {
    pub holds: bool,
    pub min_eigenvalue: f64,
    pub witness: Option<Matrix>,
}

impl From<PsdVerdict> for ConeVerdict {
    fn from(v: PsdVerdict) -> Self {
        Self {
            holds: v.psd,
            min_eigenvalue: v.min_eigenvalue,
            witness: v.witness,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MapClassReport {
    pub dim_in: usize,
    pub dim_out: usize,
    pub cp: ConeVerdict,
    pub copositive: ConeVerdict,
    pub block_min: f64,
    pub block_min_converged: bool,
    pub positive_verdict: PositiveVerdict,
    pub eb_verdict: EbVerdict,
}

/// Fills every field of [`MapClassReport`] for `f`.
pub fn classify_map(
    f: &MatrixMap,
    budget: &BlockBudget,
    seed: u64,
    par: Parallelism,
    tol: &Tolerances,
) -> Result<MapClassReport> {
    let dims = (f.dim_in(), f.dim_out());
    let cp = is_cp(f, tol)?;
    let copositive = is_copositive(f, tol)?;
    let bm = block_positivity_minimize(f.choi(), dims, budget, seed, par, tol)?;
    let threshold = tol.psd_threshold(f.choi().frobenius_norm());
    let positive_verdict = if bm.value < -threshold {
        PositiveVerdict::CertifiedNonpositive {
            x: bm.x.clone(),
            y: bm.y.clone(),
            value: bm.value,
        }
    } else {
        PositiveVerdict::ProbablyPositive
    };
    let eb_verdict = if !cp.psd {
        EbVerdict::NotApplicable {
            reason: "C_φᵀ is not positive semidefinite, so φ̃ is not a positive functional".into(),
        }
    } else {
        entanglement_breaking_verdict(f, seed, par, tol)?
    };
    Ok(MapClassReport {
        dim_in: dims.0,
        dim_out: dims.1,
        cp: cp.into(),
        copositive: copositive.into(),
        block_min: bm.value,
        block_min_converged: bm.converged,
        positive_verdict,
        eb_verdict,
    })
}

fn entanglement_breaking_verdict(
    f: &MatrixMap,
    seed: u64,
    par: Parallelism,
    tol: &Tolerances,
) -> Result<EbVerdict> {
    if let Provenance::Holevo(h) = f.provenance() {
        return Ok(EbVerdict::CertifiedSeparableChoi {
            source: "holevo-provenance".into(),
            holevo: h.clone(),
        });
    }
    if let AbelianRange::Holevo(h) = abelian_range_decompose(f, seed, tol)? {
        return Ok(EbVerdict::CertifiedSeparableChoi {
            source: "abelian-range".into(),
            holevo: h,
        });
    }
    let state = f.to_state(tol)?;
    let lib = WitnessLibrary::standard(f.dim_out(), seed, par, tol)?;
    Ok(match detect_entanglement(&state, &lib, tol)?.detection {
        Some(d) => EbVerdict::CertifiedEntangledChoi {
            witness: d.witness,
            eigenvalue: d.eigenvalue,
            vector: d.vector,
        },
        None => EbVerdict::Inconclusive,
    })
}

/// The nondecomposable Choi map on `M_3`:
/// `Φ(x) = diag(x₁₁+x₃₃, x₂₂+x₁₁, x₃₃+x₂₂) − (x − diag(x))`.
///
/// Validated on construction: block-positive, not CP, not copositive.
pub fn builtin_choi_map() -> Result<MatrixMap> {
    let tol = Tolerances::default();
    let f = MatrixMap::from_action(3, 3, |x| Ok(choi_action(x)), &tol)?;
    let bm = block_positivity_minimize(
        f.choi(),
        (3, 3),
        &BlockBudget::default(),
        0,
        Parallelism::serial(),
        &tol,
    )?;
    if bm.value < -tol.psd_threshold(f.choi().frobenius_norm()) {
        return Err(Error::Construction(format!(
            "Choi map failed block positivity ({:e})",
            bm.value
        )));
    }
    if is_cp(&f, &tol)?.psd || is_copositive(&f, &tol)?.psd {
        return Err(Error::Construction(
            "Choi map must be neither CP nor copositive".into(),
        ));
    }
    Ok(f)
}

fn choi_action(x: &Matrix) -> Matrix {
    let d = [
        x[(0, 0)] + x[(2, 2)],
        x[(1, 1)] + x[(0, 0)],
        x[(2, 2)] + x[(1, 1)],
    ];
    Matrix::from_fn(3, 3, |i, j| if i == j { d[i] } else { -x[(i, j)] })
}

/// Resolves a registry name: `identity{n}`, `transpose{n}`, `choi3`.
pub fn builtin_map(name: &str) -> Result<MatrixMap> {
    if name == "choi3" {
        return builtin_choi_map();
    }
    let parse = |prefix: &str| -> Option<usize> {
        name.strip_prefix(prefix)?
            .parse()
            .ok()
            .filter(|&n| (1..=16).contains(&n))
    };
    if let Some(n) = parse("identity") {
        return Ok(MatrixMap::identity(n));
    }
    if let Some(n) = parse("transpose") {
        return Ok(MatrixMap::transpose_map(n));
    }
    Err(Error::domain(format!("unknown builtin map '{name}'")))
}

#[derive(Clone, Debug)]
pub struct NamedMap {
    pub name: String,
    pub map: MatrixMap,
}

/// Positive maps used as entanglement witnesses via `ι⊗ψ`.
#[derive(Clone, Debug)]
pub struct WitnessLibrary {
    entries: Vec<NamedMap>,
}

const TWISTS: usize = 2;

impl WitnessLibrary {
    /// Screens every candidate for block positivity and rejects the library
    /// if one fails.
    pub fn new(
        entries: Vec<NamedMap>,
        seed: u64,
        par: Parallelism,
        tol: &Tolerances,
    ) -> Result<Self> {
        for e in &entries {
            let bm = block_positivity_minimize(
                e.map.choi(),
                (e.map.dim_in(), e.map.dim_out()),
                &BlockBudget::default(),
                seed,
                par,
                tol,
            )?;
            if bm.value < -tol.psd_threshold(e.map.choi().frobenius_norm()) {
                return Err(Error::Construction(format!(
                    "witness '{}' is not block-positive (min {:e})",
                    e.name, bm.value
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Identity and transpose on `M_d`; for `d = 3` also the Choi map, its
    /// compositions with the transpose and seeded twists `a·Φ(b·x·b*)·a*`;
    /// for `d > 3` the Choi map on the leading 3×3 corner.
    pub fn standard(d: usize, seed: u64, par: Parallelism, tol: &Tolerances) -> Result<Self> {
        let mut entries = vec![
            NamedMap {
                name: format!("identity{d}"),
                map: MatrixMap::identity(d),
            },
            NamedMap {
                name: format!("transpose{d}"),
                map: MatrixMap::transpose_map(d),
            },
        ];
        if d == 3 {
            let choi = builtin_choi_map()?;
            let mut stream = Stream::new(seed, u64::MAX);
            let twists: Vec<NamedMap> = (0..TWISTS)
                .map(|k| {
                    let a = random_matrix(&mut stream, 3, 3);
                    let b = random_matrix(&mut stream, 3, 3);
                    choi.conjugated(&a, &b).map(|map| NamedMap {
                        name: format!("choi3.twist{k}"),
                        map,
                    })
                })
                .collect::<Result<_>>()?;
            entries.push(NamedMap {
                name: "choi3.then_transpose".into(),
                map: choi.then_transpose(),
            });
            entries.push(NamedMap {
                name: "choi3.after_transpose".into(),
                map: choi.after_transpose(),
            });
            entries.push(NamedMap {
                name: "choi3".into(),
                map: choi,
            });
            entries.extend(twists);
        } else if d > 3 {
            let choi = builtin_choi_map()?;
            let corner = Matrix::from_fn(
                3,
                d,
                |i, j| if i == j { Complex::new(1.0, 0.0) } else { ZERO },
            );
            let inner = MatrixMap::from_action(
                d,
                3,
                |x| choi.apply(&(&(&corner * x) * &corner.adjoint())),
                tol,
            )?;
            entries.push(NamedMap {
                name: "choi3.corner".into(),
                map: inner,
            });
        }
        Self::new(entries, seed, par, tol)
    }

    pub fn entries(&self) -> &[NamedMap] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&NamedMap> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::{maximally_entangled_p, HolevoTerm};
    use crate::matrix::{partial_transpose, Side};
    use crate::rng::random_density;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn quick() -> BlockBudget {
        BlockBudget {
            restarts: 8,
            iterations: 200,
            convergence: 1e-10,
        }
    }

    #[test]
    fn cp_examples() {
        let mut s = Stream::new(31, 0);
        let f = MatrixMap::from_kraus(vec![
            random_matrix(&mut s, 3, 3),
            random_matrix(&mut s, 3, 3),
        ])
        .unwrap();
        assert!(is_cp(&f, &tol()).unwrap().psd);

        let v = is_cp(&MatrixMap::transpose_map(2), &tol()).unwrap();
        assert!(!v.psd);
        let w = v.witness.unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let anti = Matrix::from_real(4, 1, &[0.0, h, -h, 0.0]).unwrap();
        assert!((Matrix::inner(&anti, &w).norm() - 1.0).abs() < 1e-12);

        assert!(!is_cp(&builtin_choi_map().unwrap(), &tol()).unwrap().psd);
    }

    #[test]
    fn copositive_examples() {
        assert!(
            is_copositive(&MatrixMap::transpose_map(2), &tol())
                .unwrap()
                .psd
        );
        assert!(!is_copositive(&MatrixMap::identity(2), &tol()).unwrap().psd);
        assert!(
            !is_copositive(&builtin_choi_map().unwrap(), &tol())
                .unwrap()
                .psd
        );
    }

    #[test]
    fn cp_iff_transpose_composition_copositive() {
        let mut s = Stream::new(32, 0);
        for _ in 0..10 {
            let c = crate::rng::random_hermitian(&mut s, 4);
            let f = MatrixMap::from_choi(2, 2, c, &tol()).unwrap();
            let g = f.then_transpose();
            assert_eq!(
                is_cp(&f, &tol()).unwrap().psd,
                is_copositive(&g, &tol()).unwrap().psd
            );
        }
    }

    #[test]
    fn block_min_closed_forms() {
        let p = maximally_entangled_p(2);
        let bm = block_positivity_minimize(&p, (2, 2), &quick(), 0, Parallelism::serial(), &tol())
            .unwrap();
        assert!(bm.value.abs() < 1e-9);
        let bm =
            block_positivity_minimize(&(-&p), (2, 2), &quick(), 0, Parallelism::serial(), &tol())
                .unwrap();
        assert!((bm.value + 1.0).abs() < 1e-9);
        // optimum at x̄ = y
        let overlap = Matrix::inner(&bm.x.map(|z| z.conj()), &bm.y).norm();
        assert!((overlap - 1.0).abs() < 1e-6);
        let swap = crate::choi::swap(2);
        let bm =
            block_positivity_minimize(&swap, (2, 2), &quick(), 0, Parallelism::serial(), &tol())
                .unwrap();
        assert!(bm.value.abs() < 1e-9);
    }

    #[test]
    fn block_min_monotone_in_restarts() {
        let mut s = Stream::new(33, 0);
        let c = crate::rng::random_hermitian(&mut s, 6);
        let mut last = f64::INFINITY;
        for restarts in [1, 2, 4, 8, 16] {
            let b = BlockBudget {
                restarts,
                ..quick()
            };
            let v = block_positivity_minimize(&c, (2, 3), &b, 9, Parallelism::serial(), &tol())
                .unwrap()
                .value;
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn choi_map_values() {
        let f = builtin_choi_map().unwrap();
        assert_eq!(
            f.apply(&Matrix::identity(3)).unwrap(),
            Matrix::identity(3).scale_re(2.0)
        );
        assert_eq!(
            f.apply(&Matrix::unit(3, 0, 0)).unwrap(),
            Matrix::diag(&[1.0, 1.0, 0.0])
        );
        let c = f.choi();
        assert_eq!((c.rows(), c.cols()), (9, 9));
        assert!(hermitian_eigen(c, &tol()).unwrap().min() < -0.5);
        let pt = partial_transpose(c, (3, 3), Side::Second).unwrap();
        assert!(hermitian_eigen(&pt, &tol()).unwrap().min() < -0.5);
    }

    #[test]
    fn classify_examples() {
        let terms = vec![
            HolevoTerm {
                omega: Matrix::unit(2, 0, 0),
                b: Matrix::unit(2, 0, 0),
            },
            HolevoTerm {
                omega: Matrix::unit(2, 1, 1),
                b: Matrix::unit(2, 1, 1),
            },
        ];
        let h = MatrixMap::from_holevo(HolevoForm::new(terms, &tol()).unwrap());
        let r = classify_map(&h, &quick(), 0, Parallelism::serial(), &tol()).unwrap();
        assert!(r.cp.holds && r.copositive.holds);
        assert!(matches!(
            r.eb_verdict,
            EbVerdict::CertifiedSeparableChoi { .. }
        ));

        let r = classify_map(
            &MatrixMap::identity(2),
            &quick(),
            0,
            Parallelism::serial(),
            &tol(),
        )
        .unwrap();
        assert!(r.cp.holds && !r.copositive.holds);
        match r.eb_verdict {
            EbVerdict::CertifiedEntangledChoi {
                witness,
                eigenvalue,
                ..
            } => {
                assert_eq!(witness, "transpose2");
                assert!((eigenvalue + 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }

        let r = classify_map(
            &builtin_choi_map().unwrap(),
            &BlockBudget::default(),
            0,
            Parallelism::serial(),
            &tol(),
        )
        .unwrap();
        assert!(!r.cp.holds && !r.copositive.holds);
        assert!(r.block_min >= -1e-9);
        assert!(matches!(
            r.positive_verdict,
            PositiveVerdict::ProbablyPositive
        ));
        assert!(matches!(r.eb_verdict, EbVerdict::NotApplicable { .. }));
    }

    #[test]
    fn nonpositive_map_is_certified() {
        // x ↦ −x is not positive
        let f = MatrixMap::identity(2).scaled(-1.0);
        let r = classify_map(&f, &quick(), 0, Parallelism::serial(), &tol()).unwrap();
        match r.positive_verdict {
            PositiveVerdict::CertifiedNonpositive { x, y, value } => {
                assert!(value < -1e-9);
                assert!((product_expectation(f.choi(), &x, &y) - value).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn library_entries_are_block_positive() {
        let lib = WitnessLibrary::standard(3, 5, Parallelism::serial(), &tol()).unwrap();
        assert!(lib.get("choi3").is_some());
        assert!(lib.get("choi3.twist1").is_some());
        assert_eq!(lib.entries().len(), 7);
        let lib4 = WitnessLibrary::standard(4, 5, Parallelism::serial(), &tol()).unwrap();
        assert!(lib4.get("choi3.corner").is_some());
        let bad = vec![NamedMap {
            name: "minus".into(),
            map: MatrixMap::identity(2).scaled(-1.0),
        }];
        assert!(matches!(
            WitnessLibrary::new(bad, 0, Parallelism::serial(), &tol()),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn builtin_registry() {
        assert_eq!(builtin_map("identity3").unwrap(), MatrixMap::identity(3));
        assert_eq!(
            builtin_map("transpose2").unwrap(),
            MatrixMap::transpose_map(2)
        );
        assert!(builtin_map("choi3").is_ok());
        assert!(builtin_map("choi4").is_err());
        assert!(builtin_map("identity0").is_err());
    }

    #[test]
    fn holevo_maps_are_cp_and_copositive() {
        let mut s = Stream::new(34, 0);
        for _ in 0..20 {
            let terms = (0..3)
                .map(|_| HolevoTerm {
                    omega: random_density(&mut s, 2, 1),
                    b: random_density(&mut s, 3, 2),
                })
                .collect();
            let f = MatrixMap::from_holevo(HolevoForm::new(terms, &tol()).unwrap());
            assert!(is_cp(&f, &tol()).unwrap().psd);
            assert!(is_copositive(&f, &tol()).unwrap().psd);
        }
    }
}
