//! Search for PPT states detected by a positive map.
//!
//! Maximizes `violation(h) = −λ_min((ι⊗Φ)(h))` over
//! `{h ⪰ 0, (ι⊗t)(h) ⪰ 0, Tr h = 1}` by projected subgradient ascent. The
//! subgradient at `h` is `−(ι⊗Φ*)(vv*)` for a minimal eigenvector `v`;
//! feasibility is restored with Dykstra's alternating projections between the
//! PSD cone and the PT-PSD cone, followed by a small identity shift and
//! trace renormalization.

use serde::Serialize;

use crate::choi::{BipartiteState, MatrixMap};
use crate::eigen::{hermitian_eigen, hermitian_eigen_from};
use crate::error::{Error, Result};
use crate::matrix::{kron, partial_transpose, Matrix, Side};
use crate::parallel::Parallelism;
use crate::rng::{random_unit_vector, Stream};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchBudget {
    pub restarts: usize,
    /// Ascent steps per restart.
    pub iterations: usize,
    pub initial_step: f64,
    pub max_halvings: usize,
    pub dykstra_iterations: usize,
    pub dykstra_tol: f64,
    /// Consecutive non-improving steps that end a restart.
    pub plateau: usize,
    /// Weight of `I/(nm)` in the starting points.
    pub mixing: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 16,
            iterations: 500,
            initial_step: 0.1,
            max_halvings: 30,
            dykstra_iterations: 500,
            dykstra_tol: 1e-8,
            plateau: 50,
            mixing: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub witness: String,
    pub dims: (usize, usize),
    pub state: Matrix,
    /// `−λ_min((ι⊗Φ)(h))`.
    pub violation: f64,
    /// Unit eigenvector `v` of `(ι⊗Φ)(h)` with `⟨v, (ι⊗Φ)(h) v⟩ = −violation`.
    pub certificate: Matrix,
    pub state_min_eigenvalue: f64,
    pub ppt_min_eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub restart: usize,
    pub restarts: usize,
}

impl SearchResult {
    pub fn to_state(&self, tol: &Tolerances) -> Result<BipartiteState> {
        BipartiteState::new(self.dims, self.state.clone(), tol)
    }
}

struct Problem<'a> {
    witness: &'a MatrixMap,
    adjoint: MatrixMap,
    dims: (usize, usize),
    budget: SearchBudget,
    tol: Tolerances,
}

struct Iterate {
    h: Matrix,
    violation: f64,
    vector: Matrix,
}

/// Projection onto the PSD cone. `basis` carries the eigenvectors between
/// calls so that successive nearby inputs start from a nearly diagonal form.
fn clip_psd(x: &Matrix, basis: &mut Option<Matrix>, tol: &Tolerances) -> Result<Matrix> {
    let eig = hermitian_eigen_from(&x.hermitian_part(), basis.as_ref(), tol)?;
    let n = x.rows();
    let v = &eig.vectors;
    let mut out = Matrix::zeros(n, n);
    for (k, &l) in eig.values.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        for i in 0..n {
            let vil = v[(i, k)] * l;
            for j in 0..n {
                out[(i, j)] += vil * v[(j, k)].conj();
            }
        }
    }
    *basis = Some(eig.vectors);
    Ok(out)
}

impl Problem<'_> {
    fn evaluate(&self, h: Matrix) -> Result<Iterate> {
        let out = self.witness.apply_second(&h, self.dims.0)?;
        let eig = hermitian_eigen(&out.hermitian_part(), &self.tol)?;
        Ok(Iterate {
            violation: -eig.min(),
            vector: eig.min_vector(),
            h,
        })
    }

    fn project_pt(&self, x: &Matrix, basis: &mut Option<Matrix>) -> Result<Matrix> {
        let pt = partial_transpose(x, self.dims, Side::Second)?;
        partial_transpose(&clip_psd(&pt, basis, &self.tol)?, self.dims, Side::Second)
    }

    /// Dykstra projection of `y` onto `PSD ∩ PT⁻¹(PSD)`.
    fn dykstra(&self, y: &Matrix) -> Result<Matrix> {
        let size = y.rows();
        let mut x = y.clone();
        let mut p = Matrix::zeros(size, size);
        let mut q = Matrix::zeros(size, size);
        let (mut psd_basis, mut pt_basis) = (None, None);
        for _ in 0..self.budget.dykstra_iterations {
            let a = clip_psd(&(&x + &p), &mut psd_basis, &self.tol)?;
            p = &(&x + &p) - &a;
            let b = self.project_pt(&(&a + &q), &mut pt_basis)?;
            q = &(&a + &q) - &b;
            let moved = b.dist(&x);
            x = b;
            if moved < self.budget.dykstra_tol {
                break;
            }
        }
        Ok(x)
    }

    /// Projects, shifts by the largest remaining negative eigenvalue of `h` or
    /// its partial transpose, and renormalizes. `None` if the trace collapses.
    fn make_feasible(&self, y: &Matrix) -> Result<Option<Matrix>> {
        let x = self.dykstra(y)?.hermitian_part();
        let size = x.rows();
        let lmin = hermitian_eigen(&x, &self.tol)?.min();
        let pt = partial_transpose(&x, self.dims, Side::Second)?;
        let ptmin = hermitian_eigen(&pt, &self.tol)?.min();
        let shift = (-lmin).max(-ptmin).max(0.0);
        let x = &x + &Matrix::identity(size).scale_re(shift);
        let tr = x.trace().re;
        if tr.is_nan() || tr <= 1e-12 {
            return Ok(None);
        }
        Ok(Some(x.scale_re(1.0 / tr)))
    }

    fn start(&self, stream: &mut Stream) -> Result<Option<Matrix>> {
        let (n, m) = self.dims;
        let size = n * m;
        let mut mix = Matrix::zeros(size, size);
        let mut total = 0.0;
        for _ in 0..size {
            let w = stream.uniform();
            let v = kron(
                &random_unit_vector(stream, n),
                &random_unit_vector(stream, m),
            );
            mix += &Matrix::outer(&v).scale_re(w);
            total += w;
        }
        let eps = self.budget.mixing;
        let h = &mix.scale_re((1.0 - eps) / total)
            + &Matrix::identity(size).scale_re(eps / size as f64);
        self.make_feasible(&h)
    }

    fn ascend(&self, seed: u64, restart: usize) -> Result<Option<(Iterate, usize, bool)>> {
        const MAX_STARTS: usize = 8;
        let mut stream = Stream::new(seed, restart as u64);
        let mut h0 = None;
        for _ in 0..MAX_STARTS {
            if let Some(h) = self.start(&mut stream)? {
                h0 = Some(h);
                break;
            }
        }
        let Some(h0) = h0 else {
            return Ok(None);
        };
        let mut cur = self.evaluate(h0)?;
        let mut stalled = 0;
        let mut converged = false;
        let mut steps = 0;
        while steps < self.budget.iterations {
            steps += 1;
            let lift = self
                .adjoint
                .apply_second(&Matrix::outer(&cur.vector), self.dims.0)?;
            let grad = (-&lift).hermitian_part();
            let norm = grad.frobenius_norm();
            if norm == 0.0 {
                converged = true;
                break;
            }
            let dir = grad.scale_re(1.0 / norm);

            let mut step = self.budget.initial_step;
            let mut accepted = None;
            for _ in 0..=self.budget.max_halvings {
                let trial = &cur.h + &dir.scale_re(step);
                if let Some(h) = self.make_feasible(&trial)? {
                    let next = self.evaluate(h)?;
                    if next.violation > cur.violation {
                        accepted = Some(next);
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some(next) = accepted else {
                converged = true;
                break;
            };
            let gain = next.violation - cur.violation;
            cur = next;
            if gain <= self.tol.convergence * cur.violation.abs().max(1.0) {
                stalled += 1;
                if stalled >= self.budget.plateau {
                    converged = true;
                    break;
                }
            } else {
                stalled = 0;
            }
        }
        Ok(Some((cur, steps, converged)))
    }
}

/// Searches for a state `h` with PSD partial transpose whose image under
/// `ι⊗witness` has a negative eigenvalue. The state lives on
/// `ℂ^first_dim ⊗ ℂ^witness.dim_in()`.
///
/// Only a positive, nondecomposable witness can produce a positive
/// violation; for decomposable witnesses the search still runs and reports a
/// violation at or below the PSD slack.
pub fn search_ppt_entangled(
    witness: &MatrixMap,
    name: &str,
    first_dim: usize,
    budget: &SearchBudget,
    seed: u64,
    par: Parallelism,
    tol: &Tolerances,
) -> Result<SearchResult> {
    if budget.restarts == 0 || first_dim == 0 {
        return Err(Error::domain(
            "search needs at least one restart and a nonzero first factor",
        ));
    }
    let problem = Problem {
        witness,
        adjoint: witness.adjoint(),
        dims: (first_dim, witness.dim_in()),
        budget: *budget,
        tol: *tol,
    };
    let runs = par.map_indices(budget.restarts, |r| problem.ascend(seed, r));

    let mut best: Option<(usize, Iterate, usize, bool)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let Some((it, steps, conv)) = run? else {
            log::warn!("restart {r}: starting point collapsed");
            continue;
        };
        let better = best
            .as_ref()
            .is_none_or(|(_, b, _, _)| it.violation > b.violation);
        if better {
            best = Some((r, it, steps, conv));
        }
    }
    let (restart, it, iterations, converged) =
        best.ok_or_else(|| Error::Numerical("every search restart collapsed".into()))?;

    let state_min = hermitian_eigen(&it.h, tol)?.min();
    let ppt_min =
        hermitian_eigen(&partial_transpose(&it.h, problem.dims, Side::Second)?, tol)?.min();
    Ok(SearchResult {
        witness: name.to_string(),
        dims: problem.dims,
        state: it.h,
        violation: it.violation,
        certificate: it.vector,
        state_min_eigenvalue: state_min,
        ppt_min_eigenvalue: ppt_min,
        iterations,
        converged,
        seed,
        restart,
        restarts: budget.restarts,
    })
}
