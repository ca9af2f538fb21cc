//! State-side analyses: the PPT test, the positive-map witness battery and
//! the PPT ⇔ (CP ∧ copositive) cross-check.

use serde::Serialize;

use crate::choi::{BipartiteState, HolevoForm, MatrixMap};
use crate::eigen::{hermitian_eigen, is_psd};
use crate::error::{Error, Result};
use crate::matrix::{partial_transpose, Matrix, Side};
use crate::positivity::{is_copositive, is_cp, WitnessLibrary};
use crate::rng::{random_matrix, Stream};
use crate::tolerance::Tolerances;

/// Random copositive maps `t∘(CP)` probed when a state is PPT.
const COPOSITIVE_PROBES: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct PptReport {
    pub ppt: bool,
    /// Smallest eigenvalue of `(ι⊗t)(h)`.
    pub min_eigenvalue: f64,
    pub witness: Option<Matrix>,
    /// `(t⊗ι)(h)` gave the same verdict.
    pub first_side_agrees: bool,
    /// Every random copositive probe kept `(ι⊗ψ)(h)` PSD (vacuous when not PPT).
    pub copositive_probes_pass: bool,
}

/// Peres test: `(ι⊗t)(h) ⪰ 0`, cross-checked against `(t⊗ι)(h)` and a set of
/// random copositive maps.
pub fn ppt_check(s: &BipartiteState, seed: u64, tol: &Tolerances) -> Result<PptReport> {
    let dims = s.dims();
    let h = s.density();
    let second = is_psd(&partial_transpose(h, dims, Side::Second)?, tol)?;
    let first = is_psd(&partial_transpose(h, dims, Side::First)?, tol)?;

    let mut probes_pass = true;
    if second.psd {
        let mut stream = Stream::new(seed, 0xC0_505);
        let m = dims.1;
        for _ in 0..COPOSITIVE_PROBES {
            let kraus = vec![
                random_matrix(&mut stream, m, m),
                random_matrix(&mut stream, m, m),
            ];
            let psi = MatrixMap::from_kraus(kraus)?.then_transpose();
            let out = psi.apply_second(h, dims.0)?;
            if !is_psd(&out, tol)?.psd {
                probes_pass = false;
                break;
            }
        }
    }

    Ok(PptReport {
        ppt: second.psd,
        min_eigenvalue: second.min_eigenvalue,
        witness: second.witness,
        first_side_agrees: first.psd == second.psd,
        copositive_probes_pass: probes_pass,
    })
}

/// A negative eigenvalue of `(ι⊗ψ)(h)` for a named witness `ψ`.
#[derive(Clone, Debug, Serialize)]
pub struct Detection {
    pub witness: String,
    pub eigenvalue: f64,
    /// Unit vector `v` with `⟨v, (ι⊗ψ)(h) v⟩ = eigenvalue`.
    pub vector: Matrix,
}

impl Detection {
    /// Recomputes `⟨v, (ι⊗ψ)(h) v⟩` from scratch.
    pub fn recheck(&self, s: &BipartiteState, witness: &MatrixMap) -> Result<f64> {
        let out = witness.apply_second(s.density(), s.dims().0)?;
        Ok(out.quadratic_form(&self.vector).re)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BatteryOutcome {
    pub detection: Option<Detection>,
    /// Library entries whose input dimension did not match the second factor.
    pub skipped: Vec<String>,
}

/// Runs every library witness and keeps the most negative detection
/// (ties resolved by library order).
pub fn detect_entanglement(
    s: &BipartiteState,
    lib: &WitnessLibrary,
    tol: &Tolerances,
) -> Result<BatteryOutcome> {
    let (n, m) = s.dims();
    let mut detection: Option<Detection> = None;
    let mut skipped = Vec::new();
    for entry in lib.entries() {
        if entry.map.dim_in() != m {
            log::warn!(
                "witness '{}' acts on M_{} but the second factor is M_{m}; skipped",
                entry.name,
                entry.map.dim_in()
            );
            skipped.push(entry.name.clone());
            continue;
        }
        let out = entry.map.apply_second(s.density(), n)?;
        let eig = hermitian_eigen(&out, tol)?;
        if eig.min() < -tol.psd_threshold(out.frobenius_norm()) {
            let better = detection.as_ref().is_none_or(|d| eig.min() < d.eigenvalue);
            if better {
                detection = Some(Detection {
                    witness: entry.name.clone(),
                    eigenvalue: eig.min(),
                    vector: eig.min_vector(),
                });
            }
        }
    }
    Ok(BatteryOutcome { detection, skipped })
}

/// Explicit evidence of separability carried alongside a state.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeparabilityCertificate {
    /// The state is `C_φᵀ` for this entanglement-breaking map.
    Holevo { holevo: HolevoForm },
    /// The state is this convex combination of product states.
    Ensemble {
        ensemble: crate::definite::SeparableEnsemble,
    },
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Entanglement {
    CertifiedEntangled(Detection),
    CertifiedSeparable {
        certificate: SeparabilityCertificate,
    },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateReport {
    pub dims: (usize, usize),
    pub mass: f64,
    pub ppt: PptReport,
    pub entanglement: Entanglement,
    /// The Peres forms agree with each other and with CP ∧ copositive of the dual map.
    pub peres_crosscheck: bool,
    pub skipped_witnesses: Vec<String>,
}

/// Full state analysis: PPT, witness battery and the Peres cross-check.
/// A certificate that does not reproduce the density is ignored.
pub fn witness_battery(
    s: &BipartiteState,
    lib: &WitnessLibrary,
    certificate: Option<SeparabilityCertificate>,
    seed: u64,
    tol: &Tolerances,
) -> Result<StateReport> {
    let ppt = ppt_check(s, seed, tol)?;
    let battery = detect_entanglement(s, lib, tol)?;
    let peres = peres_equivalence(s, tol)?;
    let certificate = certificate.filter(|c| certificate_matches(c, s, tol));
    let entanglement = match (battery.detection, certificate) {
        (Some(d), _) => Entanglement::CertifiedEntangled(d),
        (None, Some(c)) => Entanglement::CertifiedSeparable { certificate: c },
        (None, None) => Entanglement::Inconclusive,
    };
    Ok(StateReport {
        dims: s.dims(),
        mass: s.mass(),
        peres_crosscheck: peres && ppt.first_side_agrees && ppt.copositive_probes_pass,
        ppt,
        entanglement,
        skipped_witnesses: battery.skipped,
    })
}

fn certificate_matches(c: &SeparabilityCertificate, s: &BipartiteState, tol: &Tolerances) -> bool {
    let rebuilt = match c {
        SeparabilityCertificate::Holevo { holevo } => {
            MatrixMap::from_holevo(holevo.clone()).choi().transpose()
        }
        SeparabilityCertificate::Ensemble { ensemble } => ensemble.density(),
    };
    if (rebuilt.rows(), rebuilt.cols()) != (s.density().rows(), s.density().cols()) {
        log::warn!("separability certificate has the wrong shape; ignored");
        return false;
    }
    let ok = rebuilt.dist(s.density()) <= 1e3 * tol.psd_threshold(s.density().frobenius_norm());
    if !ok {
        log::warn!("separability certificate does not reproduce the density; ignored");
    }
    ok
}

/// `Tr(h·C_φ)`.
pub fn witness_pairing(s: &BipartiteState, f: &MatrixMap) -> Result<f64> {
    if s.dims() != (f.dim_in(), f.dim_out()) {
        return Err(Error::dim(format!(
            "witness_pairing: state dims {:?} vs map {}->{}",
            s.dims(),
            f.dim_in(),
            f.dim_out()
        )));
    }
    Ok((s.density() * f.choi()).trace().re)
}

/// Agreement of `ppt_check(s)` with `is_cp ∧ is_copositive` of the dual
/// map. Always true for a correct implementation.
pub fn peres_equivalence(s: &BipartiteState, tol: &Tolerances) -> Result<bool> {
    let ppt = is_psd(
        &partial_transpose(s.density(), s.dims(), Side::Second)?,
        tol,
    )?
    .psd;
    let f = MatrixMap::from_state(s);
    let both = is_cp(&f, tol)?.psd && is_copositive(&f, tol)?.psd;
    Ok(ppt == both)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::{maximally_entangled_p, HolevoTerm};
    use crate::matrix::kron;
    use crate::parallel::Parallelism;
    use crate::rng::random_density;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn state(dims: (usize, usize), h: Matrix) -> BipartiteState {
        BipartiteState::new(dims, h, &tol()).unwrap()
    }

    fn bell() -> BipartiteState {
        state((2, 2), maximally_entangled_p(2).scale_re(0.5))
    }

    fn random_holevo(s: &mut Stream, n: usize, m: usize, k: usize) -> HolevoForm {
        let terms = (0..k)
            .map(|_| {
                let (ra, rb) = (1 + s.below(n), 1 + s.below(m));
                HolevoTerm {
                    omega: random_density(s, n, ra),
                    b: random_density(s, m, rb).scale_re(1.0 / k as f64),
                }
            })
            .collect();
        HolevoForm::new(terms, &tol()).unwrap()
    }

    #[test]
    fn ppt_examples() {
        let r = ppt_check(&bell(), 0, &tol()).unwrap();
        assert!(!r.ppt);
        assert!((r.min_eigenvalue + 0.5).abs() < 1e-12);
        assert!(r.first_side_agrees);

        let e11 = Matrix::unit(2, 0, 0);
        assert!(
            ppt_check(&state((2, 2), kron(&e11, &e11)), 0, &tol())
                .unwrap()
                .ppt
        );
        let r = ppt_check(
            &state((2, 2), Matrix::identity(4).scale_re(0.25)),
            0,
            &tol(),
        )
        .unwrap();
        assert!(r.ppt && r.copositive_probes_pass && r.first_side_agrees);
    }

    #[test]
    fn battery_detects_bell_with_transpose() {
        let lib = WitnessLibrary::standard(2, 0, Parallelism::serial(), &tol()).unwrap();
        let s = bell();
        let r = witness_battery(&s, &lib, None, 0, &tol()).unwrap();
        match &r.entanglement {
            Entanglement::CertifiedEntangled(d) => {
                assert_eq!(d.witness, "transpose2");
                assert!((d.eigenvalue + 0.5).abs() < 1e-12);
                let w = lib.get("transpose2").unwrap();
                assert!((d.recheck(&s, &w.map).unwrap() - d.eigenvalue).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(r.peres_crosscheck);
    }

    #[test]
    fn battery_accepts_holevo_states() {
        let lib = WitnessLibrary::standard(3, 0, Parallelism::serial(), &tol()).unwrap();
        let mut s = Stream::new(41, 0);
        for _ in 0..10 {
            let form = random_holevo(&mut s, 2, 3, 3);
            let st = MatrixMap::from_holevo(form.clone())
                .to_state(&tol())
                .unwrap();
            let r = witness_battery(
                &st,
                &lib,
                Some(SeparabilityCertificate::Holevo { holevo: form }),
                0,
                &tol(),
            )
            .unwrap();
            assert!(r.ppt.ppt);
            assert!(matches!(
                r.entanglement,
                Entanglement::CertifiedSeparable { .. }
            ));
        }
    }

    #[test]
    fn battery_skips_mismatched_witnesses() {
        let lib = WitnessLibrary::standard(3, 0, Parallelism::serial(), &tol()).unwrap();
        let r = witness_battery(&bell(), &lib, None, 0, &tol()).unwrap();
        assert_eq!(r.skipped_witnesses.len(), lib.entries().len());
        assert!(matches!(r.entanglement, Entanglement::Inconclusive));
    }

    #[test]
    fn mismatched_certificate_is_ignored() {
        let lib = WitnessLibrary::standard(2, 0, Parallelism::serial(), &tol()).unwrap();
        let mut s = Stream::new(42, 0);
        let form = random_holevo(&mut s, 2, 2, 2);
        let st = state((2, 2), Matrix::identity(4).scale_re(0.25));
        let r = witness_battery(
            &st,
            &lib,
            Some(SeparabilityCertificate::Holevo { holevo: form }),
            0,
            &tol(),
        )
        .unwrap();
        assert!(matches!(r.entanglement, Entanglement::Inconclusive));
    }

    #[test]
    fn pairing_examples() {
        let mut s = Stream::new(43, 0);
        let pos = crate::positivity::builtin_choi_map().unwrap();
        for _ in 0..10 {
            let form = random_holevo(&mut s, 3, 3, 4);
            let st = MatrixMap::from_holevo(form).to_state(&tol()).unwrap();
            assert!(witness_pairing(&st, &pos).unwrap() >= -1e-9);
        }
        let v = witness_pairing(&bell(), &MatrixMap::transpose_map(2)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let e11 = Matrix::unit(2, 0, 0);
        let v = witness_pairing(&state((2, 2), kron(&e11, &e11)), &MatrixMap::identity(2)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(witness_pairing(&bell(), &MatrixMap::identity(3)).is_err());
    }

    #[test]
    fn pairing_equals_adjoint_form() {
        // Tr(h·C_φ) = Tr((ι⊗φ*)(h)·P)
        let mut s = Stream::new(44, 0);
        for _ in 0..10 {
            let f = MatrixMap::from_kraus(vec![
                random_matrix(&mut s, 3, 2),
                random_matrix(&mut s, 3, 2),
            ])
            .unwrap();
            let st = state((2, 3), random_density(&mut s, 6, 3));
            let lhs = witness_pairing(&st, &f).unwrap();
            let lifted = f.adjoint().apply_second(st.density(), 2).unwrap();
            let rhs = (&lifted * &maximally_entangled_p(2)).trace().re;
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn peres_examples() {
        assert!(peres_equivalence(&bell(), &tol()).unwrap());
        let mut s = Stream::new(45, 0);
        for _ in 0..20 {
            let form = random_holevo(&mut s, 2, 2, 2);
            let st = MatrixMap::from_holevo(form).to_state(&tol()).unwrap();
            assert!(peres_equivalence(&st, &tol()).unwrap());
            let rank = 1 + s.below(6);
            let st = state((2, 3), random_density(&mut s, 6, rank));
            assert!(peres_equivalence(&st, &tol()).unwrap());
        }
    }
}
