//! Filtered (phi, N)-modules over the exact rationals: validation, Hodge and
//! Newton numbers, stable-subspace enumeration, admissibility, duals,
//! tensor products and induced sub/quotient structures.

use crate::matrix::{EigenvalueError, Matrix};
use crate::rat::Rat;
use crate::subspace::{SubQuotient, Subspace};
use std::fmt;

/// A descending exhaustive Z-indexed filtration, stored at its jumps.
///
/// Entry `(j, S)` means the filtration equals `S` on the index range
/// `(previous jump, j]`; below the first jump it equals the first space
/// (which must be the full space), above the last jump it is zero. Each
/// listed jump `j` is a Hodge weight with multiplicity
/// `dim S - dim (next space)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Filtration {
    entries: Vec<(i64, Subspace)>,
}

impl Filtration {
    pub fn new(entries: Vec<(i64, Subspace)>) -> Self {
        Filtration { entries }
    }

    /// Builds a filtration from candidate jumps and their spaces, dropping
    /// redundant entries (equal to the next space, or zero).
    pub fn compress(candidates: Vec<(i64, Subspace)>) -> Self {
        let mut entries = Vec::new();
        for (k, (jump, space)) in candidates.iter().enumerate() {
            if space.is_zero() {
                continue;
            }
            if k + 1 < candidates.len() && *space == candidates[k + 1].1 {
                continue;
            }
            entries.push((*jump, space.clone()));
        }
        Filtration { entries }
    }

    pub fn entries(&self) -> &[(i64, Subspace)] {
        &self.entries
    }

    pub fn jumps(&self) -> Vec<i64> {
        self.entries.iter().map(|(j, _)| *j).collect()
    }

    /// The space at index `i`.
    pub fn space_at(&self, i: i64, ambient: usize) -> Subspace {
        for (jump, space) in &self.entries {
            if i <= *jump {
                return space.clone();
            }
        }
        Subspace::zero(ambient)
    }

    /// Hodge weights with multiplicity, ascending.
    pub fn weights(&self) -> Vec<i64> {
        let mut out = Vec::new();
        for (k, (jump, space)) in self.entries.iter().enumerate() {
            let next_dim = self.entries.get(k + 1).map_or(0, |(_, s)| s.dim());
            for _ in 0..space.dim() - next_dim {
                out.push(*jump);
            }
        }
        out
    }

    pub fn t_hodge(&self) -> i64 {
        self.weights().iter().sum()
    }

    /// Weighted dimension drop of the filtration intersected with `w`.
    pub fn t_hodge_on(&self, w: &Subspace) -> i64 {
        let mut total = 0i64;
        for (k, (jump, space)) in self.entries.iter().enumerate() {
            let dim = space.intersect(w).unwrap().dim() as i64;
            let next_dim = self
                .entries
                .get(k + 1)
                .map_or(0, |(_, s)| s.intersect(w).unwrap().dim() as i64);
            total += jump * (dim - next_dim);
        }
        total
    }
}

/// A filtered (phi, N)-module: invertible Frobenius, nilpotent monodromy
/// with `N phi = p phi N`, and a descending exhaustive filtration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FilteredPhiNModule {
    p: u64,
    dim: usize,
    phi: Matrix,
    monodromy: Matrix,
    filtration: Filtration,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    PrimeNotPrime(u64),
    PhiShape,
    MonodromyShape,
    PhiSingular,
    MonodromyNotNilpotent,
    CommutationFails,
    FiltrationEmpty,
    FiltrationJumpsNotIncreasing,
    FiltrationAmbientMismatch(usize),
    FiltrationNotExhaustive,
    FiltrationNotStrictlyDecreasing(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PrimeNotPrime(p) => write!(f, "p = {} is not prime", p),
            Violation::PhiShape => write!(f, "phi is not an n-by-n matrix"),
            Violation::MonodromyShape => write!(f, "monodromy is not an n-by-n matrix"),
            Violation::PhiSingular => write!(f, "phi is not invertible"),
            Violation::MonodromyNotNilpotent => write!(f, "monodromy is not nilpotent"),
            Violation::CommutationFails => write!(f, "N phi != p phi N"),
            Violation::FiltrationEmpty => write!(f, "filtration has no steps"),
            Violation::FiltrationJumpsNotIncreasing => {
                write!(f, "filtration jumps are not strictly increasing")
            }
            Violation::FiltrationAmbientMismatch(k) => {
                write!(f, "filtration step {} lives in the wrong ambient space", k)
            }
            Violation::FiltrationNotExhaustive => {
                write!(f, "first filtration space is not the full space")
            }
            Violation::FiltrationNotStrictlyDecreasing(k) => write!(
                f,
                "filtration space {} does not strictly contain its successor",
                k
            ),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Hodge weights with multiplicity and their weighted sum.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HodgeData {
    pub weights: Vec<i64>,
    pub t_h: i64,
}

/// Frobenius slopes (p-adic valuations of eigenvalues) and the valuation of
/// `det(phi)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NewtonData {
    pub slopes: Vec<i64>,
    pub t_n: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModuleError {
    #[error("module is invalid: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("phi has repeated eigenvalues; full enumeration unsupported")]
    RepeatedEigenvalues,
    #[error("{0}")]
    IrrationalEigenvalues(EigenvalueError),
    #[error("modules have different primes")]
    PrimeMismatch,
    #[error("subspace is not stable under phi and N")]
    NotStable,
}

/// Outcome of the admissibility check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AdmissibilityVerdict {
    /// Certified: equality on the module, the inequality on every stable
    /// proper subspace (full enumeration available).
    Admissible,
    /// Certified failure, with at least one witness among the checks.
    NotAdmissible,
    /// Only user-supplied and filtration-derived candidates were checked;
    /// not a certificate.
    CheckedOnCandidates { all_passed: bool },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubspaceCheck {
    pub subspace: Subspace,
    pub t_h: i64,
    pub t_n: i64,
    pub ok: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdmissibilityReport {
    pub verdict: AdmissibilityVerdict,
    pub t_h: i64,
    pub t_n: i64,
    pub checks: Vec<SubspaceCheck>,
}

impl FilteredPhiNModule {
    pub fn new(p: u64, dim: usize, phi: Matrix, monodromy: Matrix, filtration: Filtration) -> Self {
        FilteredPhiNModule {
            p,
            dim,
            phi,
            monodromy,
            filtration,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    pub fn monodromy(&self) -> &Matrix {
        &self.monodromy
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn fil_at(&self, i: i64) -> Subspace {
        self.filtration.space_at(i, self.dim)
    }

    /// Lists every violated invariant; empty report means the module is
    /// well formed.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if !crate::poly::is_prime_u64(self.p) {
            violations.push(Violation::PrimeNotPrime(self.p));
        }
        let n = self.dim;
        if self.phi.rows() != n || self.phi.cols() != n {
            violations.push(Violation::PhiShape);
            return ValidationReport { violations };
        }
        if self.monodromy.rows() != n || self.monodromy.cols() != n {
            violations.push(Violation::MonodromyShape);
            return ValidationReport { violations };
        }
        if self.phi.det().is_zero() {
            violations.push(Violation::PhiSingular);
        }
        if !self.monodromy.pow(n as u32).is_zero() {
            violations.push(Violation::MonodromyNotNilpotent);
        }
        let left = &self.monodromy * &self.phi;
        let right = (&self.phi * &self.monodromy).scale(&Rat::from_u64(self.p));
        if left != right {
            violations.push(Violation::CommutationFails);
        }

        let entries = self.filtration.entries();
        if entries.is_empty() {
            if n > 0 {
                violations.push(Violation::FiltrationEmpty);
            }
            return ValidationReport { violations };
        }
        for (k, (_, space)) in entries.iter().enumerate() {
            if space.ambient_dim() != n {
                violations.push(Violation::FiltrationAmbientMismatch(k));
                return ValidationReport { violations };
            }
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            violations.push(Violation::FiltrationJumpsNotIncreasing);
        }
        if !entries[0].1.is_full() {
            violations.push(Violation::FiltrationNotExhaustive);
        }
        for k in 0..entries.len() {
            let next_dim = entries.get(k + 1).map(|(_, s)| s.dim());
            match next_dim {
                Some(nd) => {
                    let contains = entries[k].1.contains_subspace(&entries[k + 1].1);
                    if !contains || nd >= entries[k].1.dim() {
                        violations.push(Violation::FiltrationNotStrictlyDecreasing(k));
                    }
                }
                None => {
                    if entries[k].1.is_zero() {
                        violations.push(Violation::FiltrationNotStrictlyDecreasing(k));
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn hodge_data(&self) -> HodgeData {
        let weights = self.filtration.weights();
        let t_h = weights.iter().sum();
        HodgeData { weights, t_h }
    }

    /// Requires the eigenvalues of phi to be rational.
    pub fn newton_data(&self) -> Result<NewtonData, ModuleError> {
        let eigen = self
            .phi
            .rational_eigenvalues()
            .map_err(ModuleError::IrrationalEigenvalues)?;
        let mut slopes = Vec::new();
        for (lambda, mult) in eigen {
            let v = lambda.valuation(self.p).expect("phi is invertible");
            for _ in 0..mult {
                slopes.push(v);
            }
        }
        slopes.sort_unstable();
        Ok(NewtonData {
            slopes,
            t_n: self.t_newton(),
        })
    }

    /// `v_p(det phi)`, defined without splitting the spectrum.
    pub fn t_newton(&self) -> i64 {
        self.phi.det().valuation(self.p).expect("phi is invertible")
    }

    pub fn t_hodge(&self) -> i64 {
        self.filtration.t_hodge()
    }

    pub fn is_stable(&self, w: &Subspace) -> bool {
        w.basis_rows()
            .iter()
            .all(|b| w.contains(&self.phi.apply(b)) && w.contains(&self.monodromy.apply(b)))
    }

    /// The complete list of phi- and N-stable subspaces, available when phi
    /// has pairwise distinct rational eigenvalues: every stable subspace is
    /// then a span of eigenlines closed under N. Sorted by dimension, then
    /// lexicographically on the canonical basis.
    pub fn stable_subspaces(&self) -> Result<Vec<Subspace>, ModuleError> {
        let lines = self.eigenlines()?;
        let n = lines.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let rows: Vec<Vec<Rat>> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| lines[i].1.clone())
                .collect();
            let span = Subspace::from_rows(self.dim, &rows);
            let n_stable = span
                .basis_rows()
                .iter()
                .all(|b| span.contains(&self.monodromy.apply(b)));
            if n_stable {
                out.push(span);
            }
        }
        out.sort_by(|a, b| a.cmp_canonical(b));
        Ok(out)
    }

    /// Eigenvalue / eigenvector pairs when all eigenvalues are distinct and
    /// rational; the eigenvector is the canonical echelon generator.
    pub fn eigenlines(&self) -> Result<Vec<(Rat, Vec<Rat>)>, ModuleError> {
        let eigen = self
            .phi
            .rational_eigenvalues()
            .map_err(ModuleError::IrrationalEigenvalues)?;
        if eigen.iter().any(|(_, m)| *m > 1) {
            return Err(ModuleError::RepeatedEigenvalues);
        }
        let mut out = Vec::new();
        for (lambda, _) in eigen {
            let basis = self.phi.eigenspace(&lambda);
            let line = Subspace::from_rows(self.dim, &basis);
            debug_assert_eq!(line.dim(), 1);
            out.push((lambda, line.basis_rows().remove(0)));
        }
        Ok(out)
    }

    /// Admissibility: `t_H = t_N` on the whole module and `t_H <= t_N` on
    /// every phi,N-stable proper subspace with the induced filtration. With
    /// distinct eigenvalues the verdict is a certificate; otherwise only the
    /// supplied candidates and the stable filtration spaces are checked.
    pub fn is_admissible(&self, extra_candidates: &[Subspace]) -> AdmissibilityReport {
        let t_h = self.t_hodge();
        let t_n = self.t_newton();
        let mut checks = Vec::new();

        let (candidates, certifying) = match self.stable_subspaces() {
            Ok(all) => (all, true),
            Err(_) => {
                let mut cands: Vec<Subspace> = extra_candidates.to_vec();
                for (_, space) in self.filtration.entries() {
                    cands.push(space.clone());
                }
                cands.retain(|w| self.is_stable(w));
                cands.sort_by(|a, b| a.cmp_canonical(b));
                cands.dedup();
                (cands, false)
            }
        };

        let mut any_failed = t_h != t_n;
        for w in candidates {
            if w.is_zero() || w.is_full() {
                continue;
            }
            let sub_t_h = self.filtration.t_hodge_on(&w);
            let sub_t_n = self
                .restrict_phi(&w)
                .det()
                .valuation(self.p)
                .expect("phi restriction invertible");
            let ok = sub_t_h <= sub_t_n;
            any_failed |= !ok;
            checks.push(SubspaceCheck {
                subspace: w,
                t_h: sub_t_h,
                t_n: sub_t_n,
                ok,
            });
        }

        let verdict = if any_failed {
            AdmissibilityVerdict::NotAdmissible
        } else if certifying {
            AdmissibilityVerdict::Admissible
        } else {
            AdmissibilityVerdict::CheckedOnCandidates { all_passed: true }
        };
        AdmissibilityReport {
            verdict,
            t_h,
            t_n,
            checks,
        }
    }

    /// Matrix of phi restricted to a stable subspace, in its echelon basis.
    fn restrict_phi(&self, w: &Subspace) -> Matrix {
        let cols: Vec<Vec<Rat>> = w
            .basis_rows()
            .iter()
            .map(|b| {
                w.solve_in_span(&self.phi.apply(b))
                    .expect("subspace not phi-stable")
            })
            .collect();
        Matrix::from_rows(w.dim(), &cols).transpose()
    }

    /// The dual module: transpose-inverse Frobenius, minus-transpose
    /// monodromy, and `Fil^i(D*) = annihilator(Fil^(1-i) D)`.
    pub fn dual(&self) -> FilteredPhiNModule {
        let phi = self.phi.transpose().inverse().expect("phi is invertible");
        let monodromy = self.monodromy.transpose().neg();
        let mut candidates = Vec::new();
        let mut jumps: Vec<i64> = self.filtration.jumps().iter().map(|j| -j).collect();
        jumps.sort_unstable();
        for c in jumps {
            candidates.push((c, self.fil_at(1 - c).annihilator()));
        }
        FilteredPhiNModule::new(
            self.p,
            self.dim,
            phi,
            monodromy,
            Filtration::compress(candidates),
        )
    }

    /// Tensor product with Frobenius `phi1 (x) phi2`, monodromy
    /// `N1 (x) 1 + 1 (x) N2` and the convolution filtration.
    pub fn tensor(&self, other: &FilteredPhiNModule) -> Result<FilteredPhiNModule, ModuleError> {
        if self.p != other.p {
            return Err(ModuleError::PrimeMismatch);
        }
        let (n1, n2) = (self.dim, other.dim);
        let dim = n1 * n2;
        let phi = self.phi.kronecker(&other.phi);
        let monodromy = {
            let a = self.monodromy.kronecker(&Matrix::identity(n2));
            let b = Matrix::identity(n1).kronecker(&other.monodromy);
            &a + &b
        };
        if dim == 0 {
            return Ok(FilteredPhiNModule::new(
                self.p,
                0,
                phi,
                monodromy,
                Filtration::new(vec![]),
            ));
        }

        let jumps1 = self.filtration.jumps();
        let jumps2 = other.filtration.jumps();
        let min_sum = jumps1.iter().min().unwrap() + jumps2.iter().min().unwrap();
        let max_sum = jumps1.iter().max().unwrap() + jumps2.iter().max().unwrap();
        let mut candidates = Vec::new();
        for i in min_sum..=max_sum {
            let mut rows: Vec<Vec<Rat>> = Vec::new();
            for a in &jumps1 {
                let s1 = self.fil_at(*a);
                let s2 = other.fil_at(i - *a);
                for u in s1.basis_rows() {
                    for v in s2.basis_rows() {
                        rows.push(kron_vec(&u, &v, n2));
                    }
                }
            }
            candidates.push((i, Subspace::from_rows(dim, &rows)));
        }
        Ok(FilteredPhiNModule::new(
            self.p,
            dim,
            phi,
            monodromy,
            Filtration::compress(candidates),
        ))
    }

    /// Splits the module along a phi,N-stable subspace: the submodule with
    /// the intersected filtration and the quotient with the image
    /// filtration. Weight multisets of the two pieces partition the
    /// ambient one.
    pub fn sub_quotient(
        &self,
        w: &Subspace,
    ) -> Result<(FilteredPhiNModule, FilteredPhiNModule), ModuleError> {
        if !self.is_stable(w) {
            return Err(ModuleError::NotStable);
        }
        let d = w.dim();
        let phi_sub = self.restrict_phi(w);
        let mono_sub = {
            let cols: Vec<Vec<Rat>> = w
                .basis_rows()
                .iter()
                .map(|b| w.solve_in_span(&self.monodromy.apply(b)).unwrap())
                .collect();
            Matrix::from_rows(d, &cols).transpose()
        };
        let sub_fil = Filtration::compress(
            self.filtration
                .entries()
                .iter()
                .map(|(j, s)| {
                    let meet = s.intersect(w).unwrap();
                    let rows: Vec<Vec<Rat>> = meet
                        .basis_rows()
                        .iter()
                        .map(|v| w.solve_in_span(v).unwrap())
                        .collect();
                    (*j, Subspace::from_rows(d, &rows))
                })
                .collect(),
        );
        let sub = FilteredPhiNModule::new(self.p, d, phi_sub, mono_sub, sub_fil);

        let q = SubQuotient::new(Subspace::full(self.dim), w.clone());
        let phi_q = q.induced_map(&self.phi);
        let mono_q = q.induced_map(&self.monodromy);
        let quot_fil = Filtration::compress(
            self.filtration
                .entries()
                .iter()
                .map(|(j, s)| (*j, q.project_subspace(s)))
                .collect(),
        );
        let quot = FilteredPhiNModule::new(self.p, self.dim - d, phi_q, mono_q, quot_fil);
        Ok((sub, quot))
    }
}

/// Kronecker product of row vectors in the `(i, j)` basis ordering.
pub fn kron_vec(u: &[Rat], v: &[Rat], n2: usize) -> Vec<Rat> {
    debug_assert_eq!(v.len(), n2);
    let mut out = Vec::with_capacity(u.len() * n2);
    for a in u {
        for b in v {
            out.push(a * b);
        }
    }
    out
}
