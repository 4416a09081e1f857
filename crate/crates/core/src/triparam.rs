//! Conversion between refinement invariants and rank-one triangulation
//! parameters, and the maximal-monodromy construction that reads the
//! L-invariants off a Hodge-compatible triangular transform.
//!
//! The conversion fixes the convention `delta_i(p) = alpha_i * p^(-k_i)`
//! with weight `w_i = -k_i`; the inverse map reconstructs
//! `alpha_i = delta_i(p) * p^(k_i)` and the two maps are exact mutual
//! inverses.

use crate::matrix::Matrix;
use crate::phinmod::FilteredPhiNModule;
use crate::rat::Rat;
use crate::refine::{l_invariant_report, Refinement};
use crate::subspace::{Flag, Subspace};

/// A rank-one parameter: the value at `p` and the weight.
#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub struct Character {
    pub delta_p: Rat,
    pub weight: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TriParamError {
    #[error("character {0} has non-integer weight")]
    NonIntegerWeight(usize),
    #[error("monodromy rank must be n - 1")]
    WrongMonodromyRank,
    #[error("weights are not strictly increasing")]
    WeightsNotStrict,
    #[error("no rational phi-eigenvector outside N(D)")]
    NoRationalEigenvector,
    #[error("no unit-triangular transform is compatible with the filtration")]
    TransformUnsolvable,
    #[error("{0}")]
    Refine(crate::refine::RefineError),
}

/// `delta_i(p) = alpha_i p^(-k_i)`, `w_i = -k_i`.
pub fn characters_from_invariants(alphas: &[Rat], ks: &[i64], p: u64) -> Vec<Character> {
    alphas
        .iter()
        .zip(ks)
        .map(|(alpha, &k)| Character {
            delta_p: alpha * &Rat::pow_of(p, -k),
            weight: Rat::from_int(-k),
        })
        .collect()
}

pub fn refinement_to_parameters(r: &Refinement) -> Vec<Character> {
    characters_from_invariants(r.alphas(), r.ks(), r.module().p())
}

/// Exact inverse of [`characters_from_invariants`]: `k_i = -w_i` and
/// `alpha_i = delta_i(p) p^(k_i)`.
pub fn parameters_to_invariants(
    chars: &[Character],
    p: u64,
) -> Result<(Vec<Rat>, Vec<i64>), TriParamError> {
    let mut alphas = Vec::with_capacity(chars.len());
    let mut ks = Vec::with_capacity(chars.len());
    for (idx, c) in chars.iter().enumerate() {
        let w = c
            .weight
            .to_i64()
            .ok_or(TriParamError::NonIntegerWeight(idx + 1))?;
        let k = -w;
        ks.push(k);
        alphas.push(&c.delta_p * &Rat::pow_of(p, k));
    }
    Ok((alphas, ks))
}

/// Unit upper-triangular matrix `(l_{j,i})` whose columns shift the flag
/// vectors onto a basis compatible with the Hodge filtration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HodgeTransform {
    pub ell: Matrix,
    pub weights: Vec<i64>,
}

/// Result of the maximal-monodromy analysis.
#[derive(Clone, Debug)]
pub struct MaxMonodromy {
    pub refinement: Refinement,
    pub transform: HodgeTransform,
    /// Superdiagonal `(l_{1,2}, ..., l_{n-1,n})`.
    pub l_values: Vec<Rat>,
    /// The same invariants computed through strong criticality.
    pub l_invariants: Vec<Rat>,
}

/// For a module whose monodromy has rank `n - 1`: builds the unique stable
/// flag `F_i = span(N^{n-1} e_n, ..., N^{n-i} e_n)`, solves the
/// Hodge-compatible unit-triangular transform greedily from the top weight
/// down, and checks that its superdiagonal reproduces the L-invariants.
pub fn max_monodromy_refinement(m: &FilteredPhiNModule) -> Result<MaxMonodromy, TriParamError> {
    let n = m.dim();
    if m.monodromy().rank() + 1 != n {
        return Err(TriParamError::WrongMonodromyRank);
    }

    // The phi-eigenvector generating the single monodromy chain.
    let image = Subspace::from_rows(n, &(0..n).map(|j| m.monodromy().col(j)).collect::<Vec<_>>());
    let eigen = m
        .phi()
        .rational_eigenvalues()
        .map_err(|_| TriParamError::NoRationalEigenvector)?;
    let mut top: Option<Vec<Rat>> = None;
    'outer: for (lambda, _) in &eigen {
        for v in m.phi().eigenspace(lambda) {
            if !image.contains(&v) {
                top = Some(v);
                break 'outer;
            }
        }
    }
    let e_n = top.ok_or(TriParamError::NoRationalEigenvector)?;

    let mut vectors = Vec::with_capacity(n);
    for i in 1..=n {
        let mut v = e_n.clone();
        for _ in 0..n - i {
            v = m.monodromy().apply(&v);
        }
        vectors.push(v);
    }
    let flag = Flag::new(n, vectors)
        .map_err(crate::refine::RefineError::Flag)
        .map_err(TriParamError::Refine)?;
    let refinement = Refinement::new(m.clone(), flag).map_err(TriParamError::Refine)?;

    let ks = refinement.ks().to_vec();
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TriParamError::WeightsNotStrict);
    }

    // Greedy solve, from i = n down to 1: the member of Fil^{k_i} congruent
    // to e_i modulo the lower flag steps, with unit e_i-coefficient.
    let basis = Matrix::from_rows(n, refinement.flag().vectors()).transpose();
    let basis_inv = basis.inverse().expect("flag vectors are independent");
    let mut ell = Matrix::identity(n);
    for i in (1..=n).rev() {
        let fil = m.fil_at(ks[i - 1]);
        // Coordinates of the filtration basis over the flag vectors.
        let coords: Vec<Vec<Rat>> = fil
            .basis_rows()
            .iter()
            .map(|v| basis_inv.apply(v))
            .collect();
        if coords.is_empty() {
            return Err(TriParamError::TransformUnsolvable);
        }
        // Combination with coordinate pattern (*, ..., *, 1 at i, 0, ..., 0).
        let rows = coords.len();
        let system = Matrix::from_fn(n - i + 1, rows, |eq, c| coords[c][i - 1 + eq].clone());
        let mut rhs = vec![Rat::zero(); n - i + 1];
        rhs[0] = Rat::one();
        let sol = system
            .solve(&rhs)
            .ok_or(TriParamError::TransformUnsolvable)?;
        for j in 1..i {
            let mut entry = Rat::zero();
            for (c, coeff) in sol.iter().enumerate() {
                if !coeff.is_zero() {
                    entry += coeff * &coords[c][j - 1];
                }
            }
            ell.set(j - 1, i - 1, entry);
        }
    }

    // The compatible basis exists and is unique here; double-check it
    // really spans the filtration steps.
    for i in 1..=n {
        let f_i: Vec<Vec<Rat>> = (i..=n)
            .map(|c| {
                let col = ell.col(c - 1);
                basis.apply(&col)
            })
            .collect();
        if Subspace::from_rows(n, &f_i) != m.fil_at(ks[i - 1]) {
            return Err(TriParamError::TransformUnsolvable);
        }
    }

    let l_values: Vec<Rat> = (1..n).map(|s| ell.get(s - 1, s).clone()).collect();
    let report = l_invariant_report(&refinement);
    let mut l_invariants = Vec::with_capacity(n - 1);
    for s in 1..n {
        let l = report.l_value(s).unwrap_or_else(|| {
            panic!("index {} must be strongly critical under strict weights", s)
        });
        l_invariants.push(l.clone());
    }
    assert_eq!(
        l_values, l_invariants,
        "transform superdiagonal must equal the L-invariants"
    );

    Ok(MaxMonodromy {
        refinement,
        transform: HodgeTransform { ell, weights: ks },
        l_values,
        l_invariants,
    })
}
