//! Independent brute-force re-implementations used to cross-validate the
//! primary pipeline. These deliberately avoid sharing logic with the
//! primary implementations: everything here is built from raw subspace and
//! matrix primitives.

use crate::matrix::Matrix;
use crate::phinmod::{FilteredPhiNModule, ModuleError};
use crate::rat::Rat;
use crate::refine::{Refinement, SDecomposition};
use crate::subspace::Subspace;

/// Critical pairs decided purely by the four intersection-dimension
/// comparisons: `(s, t)` is critical iff
/// `N(F_{t-1}) meet F_s = N(F_{t-1}) meet F_{s-1}` and
/// `N(F_t) meet F_s` strictly contains `N(F_t) meet F_{s-1}`.
pub fn oracle_critical_indices(r: &Refinement) -> Vec<(usize, usize)> {
    let n = r.dim();
    let nmat = r.module().monodromy();
    let n_of = |i: usize| -> Subspace {
        let rows: Vec<Vec<Rat>> = (1..=i).map(|l| nmat.apply(r.flag().vector(l))).collect();
        Subspace::from_rows(n, &rows)
    };
    let mut pairs = Vec::new();
    for s in 1..n {
        for t in s + 1..=n {
            let a = n_of(t - 1).intersect(r.step(s)).unwrap();
            let b = n_of(t - 1).intersect(r.step(s - 1)).unwrap();
            let c = n_of(t).intersect(r.step(s)).unwrap();
            let d = n_of(t).intersect(r.step(s - 1)).unwrap();
            if a.dim() == b.dim() && c.dim() > d.dim() {
                pairs.push((s, t));
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("the two-dimensional piece carries no jump line")]
pub struct NoJumpLine;

/// Reads the invariant in one step: the `e_s`-coefficient of the unique
/// one-dimensional filtration step of `span(e_s, e_t)`, normalized to unit
/// `e_t`-coefficient. Requires the decomposition's sub piece to carry a
/// jump line (its Case 1).
pub fn oracle_l_invariant(r: &Refinement, dec: &SDecomposition) -> Result<Rat, NoJumpLine> {
    let q = &dec.quotient;
    let w = Subspace::from_rows(q.dim(), &[dec.e_bar_s.clone(), dec.e_bar_t.clone()]);
    let mut line: Option<Subspace> = None;
    for j in r.module().filtration().jumps() {
        let fil_q = q.project_subspace(&r.module().fil_at(j));
        let step = fil_q.intersect(&w).unwrap();
        if step.dim() == 1 {
            line = Some(step);
        }
    }
    let line = line.ok_or(NoJumpLine)?;
    let gens = Matrix::from_rows(q.dim(), &[dec.e_bar_s.clone(), dec.e_bar_t.clone()]).transpose();
    let coeffs = gens
        .solve(&line.basis_rows()[0])
        .expect("line lies in span(e_s, e_t)");
    if coeffs[1].is_zero() {
        return Err(NoJumpLine);
    }
    Ok(&coeffs[0] / &coeffs[1])
}

/// Exhaustive admissibility sweep: every one of the `2^n` eigenline
/// subsets is tested for N-stability from scratch and then for the
/// Hodge-Newton inequality, with equality on the whole module.
pub fn oracle_admissible(m: &FilteredPhiNModule) -> Result<bool, ModuleError> {
    let eigen = m
        .phi()
        .rational_eigenvalues()
        .map_err(ModuleError::IrrationalEigenvalues)?;
    if eigen.iter().any(|(_, mult)| *mult > 1) {
        return Err(ModuleError::RepeatedEigenvalues);
    }
    let n = m.dim();
    let lines: Vec<Vec<Rat>> = eigen
        .iter()
        .map(|(lambda, _)| {
            let shifted = m.phi() - &Matrix::identity(n).scale(lambda);
            Subspace::from_rows(n, &shifted.nullspace())
                .basis_rows()
                .remove(0)
        })
        .collect();

    if ambient_t_hodge(m) != ambient_t_newton(m) {
        return Ok(false);
    }
    for mask in 1u32..(1 << n) - 1 {
        let rows: Vec<Vec<Rat>> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| lines[i].clone())
            .collect();
        let w = Subspace::from_rows(n, &rows);
        let stable = w
            .basis_rows()
            .iter()
            .all(|b| w.contains(&m.monodromy().apply(b)));
        if !stable {
            continue;
        }
        if sub_t_hodge(m, &w) > sub_t_newton(m, &w) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn ambient_t_hodge(m: &FilteredPhiNModule) -> i64 {
    sub_t_hodge(m, &Subspace::full(m.dim()))
}

fn ambient_t_newton(m: &FilteredPhiNModule) -> i64 {
    sub_t_newton(m, &Subspace::full(m.dim()))
}

fn sub_t_hodge(m: &FilteredPhiNModule, w: &Subspace) -> i64 {
    let entries = m.filtration().entries();
    let mut total = 0i64;
    for (k, (jump, space)) in entries.iter().enumerate() {
        let dim = space.intersect(w).unwrap().dim() as i64;
        let next = entries
            .get(k + 1)
            .map_or(0, |(_, s)| s.intersect(w).unwrap().dim() as i64);
        total += jump * (dim - next);
    }
    total
}

fn sub_t_newton(m: &FilteredPhiNModule, w: &Subspace) -> i64 {
    let cols: Vec<Vec<Rat>> = w
        .basis_rows()
        .iter()
        .map(|b| {
            w.solve_in_span(&m.phi().apply(b))
                .expect("subspace is phi-stable")
        })
        .collect();
    let restricted = Matrix::from_rows(w.dim(), &cols).transpose();
    restricted
        .det()
        .valuation(m.p())
        .expect("restriction is invertible")
}
