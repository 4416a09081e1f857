//! First-order deformation data over dual numbers and the linear
//! constraints that strongly critical indices impose on a family: for each
//! strongly critical `s` with partner `t` the residual
//! `eps_t(p) - eps_s(p) + L * (eps_{t,2} - eps_{s,2})` must vanish exactly.

use crate::rat::{Dual, Rat};
use crate::refine::{CriticalVerdict, LInvariantReport, Refinement};
use crate::triparam::refinement_to_parameters;

/// First-order data of one rank-one parameter: the family value at `p` is
/// `delta_z(p) * (1 + Z * eps_p)` and the family weight is
/// `w_z + Z * eps_w`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FirstOrderCharacter {
    pub eps_p: Rat,
    pub eps_w: Rat,
    /// Optional value of `delta_z(p)` at the closed point, checked against
    /// the refinement parameters when present.
    pub base_delta_p: Option<Rat>,
    /// Optional weight at the closed point.
    pub base_weight: Option<Rat>,
}

impl FirstOrderCharacter {
    pub fn new(eps_p: Rat, eps_w: Rat) -> Self {
        FirstOrderCharacter {
            eps_p,
            eps_w,
            base_delta_p: None,
            base_weight: None,
        }
    }

    /// The family value at `p` as a dual number over the given base point.
    pub fn value_at_p(&self, base: &Rat) -> Dual {
        Dual::new(base.clone(), base * &self.eps_p)
    }

    /// The family weight as a dual number over the given base point.
    pub fn weight(&self, base: &Rat) -> Dual {
        Dual::new(base.clone(), self.eps_w.clone())
    }
}

/// A first-order family of rank-one parameters, indexed `1..n`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FirstOrderFamily {
    pub characters: Vec<FirstOrderCharacter>,
}

impl FirstOrderFamily {
    pub fn from_eps(eps_p: &[i64], eps_w: &[i64]) -> Self {
        assert_eq!(eps_p.len(), eps_w.len());
        FirstOrderFamily {
            characters: eps_p
                .iter()
                .zip(eps_w)
                .map(|(&a, &b)| FirstOrderCharacter::new(Rat::from_int(a), Rat::from_int(b)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn eps_p(&self, i: usize) -> &Rat {
        &self.characters[i - 1].eps_p
    }

    pub fn eps_w(&self, i: usize) -> &Rat {
        &self.characters[i - 1].eps_w
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeformError {
    #[error("index pair ({0}, {1}) out of range for n = {2}")]
    IndexOutOfRange(usize, usize, usize),
    #[error("family has {got} characters, refinement has dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("family base point disagrees with the refinement parameters at index {0}")]
    BasePointMismatch(usize),
}

/// `eps_t(p) - eps_s(p) + L * (eps_{t,2} - eps_{s,2})`, exact.
pub fn residual(
    l: &Rat,
    s: usize,
    t: usize,
    family: &FirstOrderFamily,
) -> Result<Rat, DeformError> {
    let n = family.len();
    if s == 0 || t == 0 || s >= t || t > n {
        return Err(DeformError::IndexOutOfRange(s, t, n));
    }
    let dp = family.eps_p(t) - family.eps_p(s);
    let dw = family.eps_w(t) - family.eps_w(s);
    Ok(&dp + &(l * &dw))
}

/// Outcome of one constraint row.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ConstraintStatus {
    Pass,
    Fail(Rat),
    /// Strong criticality was not decided for this index, so the
    /// constraint is neither passed nor failed.
    Unchecked,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstraintResult {
    pub s: usize,
    pub t: usize,
    pub l: Option<Rat>,
    pub status: ConstraintStatus,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DeformationReport {
    pub results: Vec<ConstraintResult>,
    /// True when every checked residual is exactly zero.
    pub all_zero: bool,
    /// True when no index was left unchecked.
    pub complete: bool,
}

impl DeformationReport {
    pub fn pass(&self) -> bool {
        self.all_zero && self.complete
    }
}

/// Evaluates every strong-criticality constraint of the refinement on the
/// family. Base-point values, when supplied, must match the refinement
/// parameters exactly.
pub fn check_deformation(
    r: &Refinement,
    report: &LInvariantReport,
    family: &FirstOrderFamily,
) -> Result<DeformationReport, DeformError> {
    let n = r.dim();
    if family.len() != n {
        return Err(DeformError::LengthMismatch {
            expected: n,
            got: family.len(),
        });
    }
    let params = refinement_to_parameters(r);
    for (idx, (c, p)) in family.characters.iter().zip(&params).enumerate() {
        if let Some(base) = &c.base_delta_p {
            if base != &p.delta_p {
                return Err(DeformError::BasePointMismatch(idx + 1));
            }
        }
        if let Some(base) = &c.base_weight {
            if base != &p.weight {
                return Err(DeformError::BasePointMismatch(idx + 1));
            }
        }
    }

    let mut results = Vec::new();
    let mut all_zero = true;
    let mut complete = true;
    for entry in &report.entries {
        match &entry.verdict {
            CriticalVerdict::StronglyCritical(l) => {
                let res = residual(l, entry.s, entry.t, family)?;
                let status = if res.is_zero() {
                    ConstraintStatus::Pass
                } else {
                    all_zero = false;
                    ConstraintStatus::Fail(res)
                };
                results.push(ConstraintResult {
                    s: entry.s,
                    t: entry.t,
                    l: Some(l.clone()),
                    status,
                });
            }
            CriticalVerdict::NotDetected => {
                complete = false;
                results.push(ConstraintResult {
                    s: entry.s,
                    t: entry.t,
                    l: None,
                    status: ConstraintStatus::Unchecked,
                });
            }
            CriticalVerdict::NotStronglyCritical => {}
        }
    }
    Ok(DeformationReport {
        results,
        all_zero,
        complete,
    })
}

/// The constraint matrix over the variables
/// `(eps_1(p)..eps_n(p), eps_{1,2}..eps_{n,2})`: one row per strongly
/// critical `s` with `+1` at `eps_t(p)`, `-1` at `eps_s(p)`, `+L` at
/// `eps_{t,2}` and `-L` at `eps_{s,2}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstraintSystem {
    pub n: usize,
    /// `(s, t, row)` with `row.len() == 2n`.
    pub rows: Vec<(usize, usize, Vec<Rat>)>,
}

impl ConstraintSystem {
    /// Applies one row to a family; equals the residual by linearity.
    pub fn row_apply(&self, idx: usize, family: &FirstOrderFamily) -> Rat {
        let (_, _, row) = &self.rows[idx];
        let mut acc = Rat::zero();
        for i in 1..=self.n {
            acc += &row[i - 1] * family.eps_p(i);
            acc += &row[self.n + i - 1] * family.eps_w(i);
        }
        acc
    }

    /// Dimension of the solution space.
    pub fn kernel_dim(&self) -> usize {
        if self.rows.is_empty() {
            return 2 * self.n;
        }
        let mat = crate::matrix::Matrix::from_rows(
            2 * self.n,
            &self
                .rows
                .iter()
                .map(|(_, _, row)| row.clone())
                .collect::<Vec<_>>(),
        );
        2 * self.n - mat.rank()
    }
}

pub fn constraint_system(r: &Refinement, report: &LInvariantReport) -> ConstraintSystem {
    let n = r.dim();
    let mut rows = Vec::new();
    for entry in &report.entries {
        if let CriticalVerdict::StronglyCritical(l) = &entry.verdict {
            let mut row = vec![Rat::zero(); 2 * n];
            row[entry.t - 1] = Rat::one();
            row[entry.s - 1] = Rat::from_int(-1);
            row[n + entry.t - 1] = l.clone();
            row[n + entry.s - 1] = -l.clone();
            rows.push((entry.s, entry.t, row));
        }
    }
    ConstraintSystem { n, rows }
}

/// Input of the two-dimensional reduction: first-order coefficients of
/// `d(alpha)/alpha`, `d(kappa)` and `d(delta)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ColmezInput {
    pub d_alpha_over_alpha: Rat,
    pub d_kappa: Rat,
    pub d_delta: Rat,
}

/// Translates the two-dimensional data into a first-order family via
/// `eps_1(p) = da/a`, `eps_2(p) = -dd - da/a`, `eps_{1,2} = 0`,
/// `eps_{2,2} = dk`, and returns the expression
/// `da/a - (1/2) L dk + (1/2) dd`, which equals minus one half of the
/// residual of the translated family.
pub fn colmez_translate(input: &ColmezInput, l: &Rat) -> (FirstOrderFamily, Rat) {
    let eps_1p = input.d_alpha_over_alpha.clone();
    let eps_2p = -&input.d_delta - &input.d_alpha_over_alpha;
    let family = FirstOrderFamily {
        characters: vec![
            FirstOrderCharacter::new(eps_1p, Rat::zero()),
            FirstOrderCharacter::new(eps_2p, input.d_kappa.clone()),
        ],
    };
    let half = Rat::new(1, 2);
    let expr =
        &input.d_alpha_over_alpha - &(&half * &(l * &input.d_kappa)) + &half * &input.d_delta;
    let res = residual(l, 1, 2, &family).expect("indices 1 < 2 <= 2");
    assert_eq!(
        expr,
        -&half * &res,
        "expression must equal -1/2 of the residual"
    );
    (family, expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::refine::{l_invariant_report, Refinement};

    fn chain_refinement() -> Refinement {
        Refinement::new(
            fixtures::rank3_max_monodromy(),
            fixtures::rank3_max_monodromy_flag(),
        )
        .unwrap()
    }

    #[test]
    fn residual_examples() {
        let zero = FirstOrderFamily::from_eps(&[0, 0, 0], &[0, 0, 0]);
        assert_eq!(
            residual(&Rat::from_int(7), 1, 2, &zero).unwrap(),
            Rat::zero()
        );

        let fam = FirstOrderFamily::from_eps(&[0, -7, -5], &[0, 1, 2]);
        assert_eq!(
            residual(&Rat::from_int(7), 1, 2, &fam).unwrap(),
            Rat::zero()
        );
        assert_eq!(
            residual(&Rat::from_int(-2), 2, 3, &fam).unwrap(),
            Rat::zero()
        );

        let bad = FirstOrderFamily::from_eps(&[0, -7, -3], &[0, 1, 2]);
        assert_eq!(
            residual(&Rat::from_int(-2), 2, 3, &bad).unwrap(),
            Rat::from_int(2)
        );
    }

    #[test]
    fn residual_index_errors() {
        let fam = FirstOrderFamily::from_eps(&[0, 0], &[0, 0]);
        assert!(residual(&Rat::one(), 2, 2, &fam).is_err());
        assert!(residual(&Rat::one(), 1, 3, &fam).is_err());
        assert!(residual(&Rat::one(), 0, 2, &fam).is_err());
    }

    #[test]
    fn check_deformation_on_chain() {
        let r = chain_refinement();
        let report = l_invariant_report(&r);
        let fam = FirstOrderFamily::from_eps(&[0, -7, -5], &[0, 1, 2]);
        let out = check_deformation(&r, &report, &fam).unwrap();
        assert!(out.pass());
        assert_eq!(out.results.len(), 2);

        let bad = FirstOrderFamily::from_eps(&[0, -7, -3], &[0, 1, 2]);
        let out = check_deformation(&r, &report, &bad).unwrap();
        assert!(!out.pass());
        assert_eq!(
            out.results[1].status,
            ConstraintStatus::Fail(Rat::from_int(2))
        );
    }

    #[test]
    fn check_deformation_base_point_validation() {
        let r = chain_refinement();
        let report = l_invariant_report(&r);
        let mut fam = FirstOrderFamily::from_eps(&[0, -7, -5], &[0, 1, 2]);
        fam.characters[0].base_delta_p = Some(Rat::one());
        fam.characters[0].base_weight = Some(Rat::zero());
        assert!(check_deformation(&r, &report, &fam).unwrap().pass());

        fam.characters[0].base_weight = Some(Rat::one());
        assert_eq!(
            check_deformation(&r, &report, &fam).unwrap_err(),
            DeformError::BasePointMismatch(1)
        );
    }

    #[test]
    fn rank2_single_constraint() {
        let r = Refinement::new(
            fixtures::semistable_rank2(Rat::from_int(3), 2),
            fixtures::semistable_rank2_flag(),
        )
        .unwrap();
        let report = l_invariant_report(&r);
        let fam = FirstOrderFamily::from_eps(&[0, -3], &[0, 1]);
        assert!(check_deformation(&r, &report, &fam).unwrap().pass());

        let sys = constraint_system(&r, &report);
        assert_eq!(sys.rows.len(), 1);
        let expected: Vec<Rat> = [-1, 1, -3, 3].iter().map(|&x| Rat::from_int(x)).collect();
        assert_eq!(sys.rows[0].2, expected);
        assert_eq!(sys.kernel_dim(), 3);
    }

    #[test]
    fn chain_constraint_system_kernel() {
        let r = chain_refinement();
        let report = l_invariant_report(&r);
        let sys = constraint_system(&r, &report);
        assert_eq!(sys.rows.len(), 2);
        assert_eq!(sys.kernel_dim(), 4);
    }

    #[test]
    fn empty_system_when_no_monodromy() {
        let m = crate::phinmod::FilteredPhiNModule::new(
            2,
            2,
            crate::matrix::Matrix::diagonal(&[Rat::one(), Rat::from_int(2)]),
            crate::matrix::Matrix::zero(2, 2),
            crate::phinmod::Filtration::new(vec![(0, crate::subspace::Subspace::full(2))]),
        );
        let r = Refinement::new(m, crate::subspace::Flag::standard(2)).unwrap();
        let report = l_invariant_report(&r);
        let sys = constraint_system(&r, &report);
        assert!(sys.rows.is_empty());
        assert_eq!(sys.kernel_dim(), 4);
        let fam = FirstOrderFamily::from_eps(&[4, -1], &[2, 9]);
        assert!(check_deformation(&r, &report, &fam).unwrap().pass());
    }

    #[test]
    fn colmez_examples() {
        let zero = ColmezInput {
            d_alpha_over_alpha: Rat::zero(),
            d_kappa: Rat::zero(),
            d_delta: Rat::zero(),
        };
        let (fam, expr) = colmez_translate(&zero, &Rat::from_int(3));
        assert_eq!(expr, Rat::zero());
        assert_eq!(
            residual(&Rat::from_int(3), 1, 2, &fam).unwrap(),
            Rat::zero()
        );

        let balanced = ColmezInput {
            d_alpha_over_alpha: Rat::from_int(3),
            d_kappa: Rat::from_int(2),
            d_delta: Rat::zero(),
        };
        let (fam, expr) = colmez_translate(&balanced, &Rat::from_int(3));
        assert_eq!(expr, Rat::zero());
        assert_eq!(fam.eps_p(1), &Rat::from_int(3));
        assert_eq!(fam.eps_p(2), &Rat::from_int(-3));
        assert_eq!(
            residual(&Rat::from_int(3), 1, 2, &fam).unwrap(),
            Rat::zero()
        );

        let off = ColmezInput {
            d_alpha_over_alpha: Rat::from_int(4),
            d_kappa: Rat::from_int(2),
            d_delta: Rat::zero(),
        };
        let (fam, expr) = colmez_translate(&off, &Rat::from_int(3));
        assert_eq!(expr, Rat::one());
        assert_eq!(
            residual(&Rat::from_int(3), 1, 2, &fam).unwrap(),
            Rat::from_int(-2)
        );
    }

    #[test]
    fn dual_number_bookkeeping_matches_eps() {
        // d(delta(p))/delta(p) recovered from the dual-number value.
        let c = FirstOrderCharacter::new(Rat::new(5, 3), Rat::from_int(2));
        let base = Rat::new(7, 2);
        let v = c.value_at_p(&base);
        let ratio =
            Dual::new(v.eps.clone(), Rat::zero()) * Dual::constant(v.unit.clone()).inv().unwrap();
        assert_eq!(ratio.unit, Rat::new(5, 3));
        let w = c.weight(&Rat::from_int(-1));
        assert_eq!(w.eps, Rat::from_int(2));
    }
}
