//! Serializable reports shared by the command line tool and the browser
//! demo. Field order is fixed by declaration, maps are sorted, and all
//! rationals are strings, so identical inputs produce byte-identical JSON.

use crate::deform::{ConstraintStatus, DeformationReport};
use crate::phinmod::{AdmissibilityReport, AdmissibilityVerdict, FilteredPhiNModule};
use crate::rat::Rat;
use crate::refine::{CriticalVerdict, GradedTarget, LInvariantReport, Refinement};
use crate::triparam::{Character, MaxMonodromy};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutput {
    pub valid: bool,
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hodge: Option<HodgeOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton: Option<NewtonOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<AdmissibilityOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HodgeOut {
    pub weights: Vec<i64>,
    pub t_h: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NewtonOut {
    /// Absent when the Frobenius spectrum is not rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<i64>>,
    pub t_n: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityOut {
    pub verdict: String,
    pub certified: bool,
    pub t_h: i64,
    pub t_n: i64,
    pub checks: Vec<SubspaceCheckOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubspaceCheckOut {
    pub dim: usize,
    pub generators: Vec<Vec<Rat>>,
    pub t_h: i64,
    pub t_n: i64,
    pub ok: bool,
}

pub fn check_output(
    module: &FilteredPhiNModule,
    candidates: &[crate::subspace::Subspace],
) -> CheckOutput {
    let report = module.validate();
    if !report.is_valid() {
        return CheckOutput {
            valid: false,
            violations: report.violations.iter().map(|v| v.to_string()).collect(),
            hodge: None,
            newton: None,
            admissibility: None,
        };
    }
    let hodge = module.hodge_data();
    let newton = match module.newton_data() {
        Ok(nd) => NewtonOut {
            slopes: Some(nd.slopes),
            t_n: nd.t_n,
        },
        Err(_) => NewtonOut {
            slopes: None,
            t_n: module.t_newton(),
        },
    };
    let adm = module.is_admissible(candidates);
    CheckOutput {
        valid: true,
        violations: vec![],
        hodge: Some(HodgeOut {
            weights: hodge.weights,
            t_h: hodge.t_h,
        }),
        newton: Some(newton),
        admissibility: Some(admissibility_out(&adm)),
    }
}

pub fn admissibility_out(rep: &AdmissibilityReport) -> AdmissibilityOut {
    let (verdict, certified) = match &rep.verdict {
        AdmissibilityVerdict::Admissible => ("admissible".to_string(), true),
        AdmissibilityVerdict::NotAdmissible => ("not-admissible".to_string(), true),
        AdmissibilityVerdict::CheckedOnCandidates { all_passed } => (
            if *all_passed {
                "candidates-passed".to_string()
            } else {
                "candidates-failed".to_string()
            },
            false,
        ),
    };
    AdmissibilityOut {
        verdict,
        certified,
        t_h: rep.t_h,
        t_n: rep.t_n,
        checks: rep
            .checks
            .iter()
            .map(|c| SubspaceCheckOut {
                dim: c.subspace.dim(),
                generators: c.subspace.basis_rows(),
                t_h: c.t_h,
                t_n: c.t_n,
                ok: c.ok,
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GradedRow {
    pub from: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff: Option<Rat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantRow {
    pub s: usize,
    pub t: usize,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<Rat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeOutput {
    pub refinement: String,
    pub alphas: Vec<Rat>,
    pub ks: Vec<i64>,
    pub graded_monodromy: Vec<GradedRow>,
    pub critical: Vec<(usize, usize)>,
    pub invariants: Vec<InvariantRow>,
    pub parameters: Vec<Character>,
}

pub fn analyze_output(name: &str, r: &Refinement, report: &LInvariantReport) -> AnalyzeOutput {
    let gm = crate::refine::graded_monodromy(r);
    AnalyzeOutput {
        refinement: name.to_string(),
        alphas: r.alphas().to_vec(),
        ks: r.ks().to_vec(),
        graded_monodromy: gm
            .targets()
            .iter()
            .enumerate()
            .map(|(idx, t)| match t {
                GradedTarget::Zero => GradedRow {
                    from: idx + 1,
                    to: None,
                    coeff: None,
                },
                GradedTarget::Target { to, coeff } => GradedRow {
                    from: idx + 1,
                    to: Some(*to),
                    coeff: Some(coeff.clone()),
                },
            })
            .collect(),
        critical: gm.critical_pairs(),
        invariants: report
            .entries
            .iter()
            .map(|e| {
                let (verdict, l) = match &e.verdict {
                    CriticalVerdict::StronglyCritical(l) => {
                        ("strongly-critical".to_string(), Some(l.clone()))
                    }
                    CriticalVerdict::NotStronglyCritical => {
                        ("not-strongly-critical".to_string(), None)
                    }
                    CriticalVerdict::NotDetected => ("not-detected".to_string(), None),
                };
                InvariantRow {
                    s: e.s,
                    t: e.t,
                    verdict,
                    l,
                }
            })
            .collect(),
        parameters: crate::triparam::refinement_to_parameters(r),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxMonodromyOutput {
    pub flag: Vec<Vec<Rat>>,
    pub weights: Vec<i64>,
    pub ell: Vec<Vec<Rat>>,
    pub l_values: Vec<Rat>,
    pub l_invariants: Vec<Rat>,
}

pub fn max_monodromy_output(out: &MaxMonodromy) -> MaxMonodromyOutput {
    MaxMonodromyOutput {
        flag: out.refinement.flag().vectors().to_vec(),
        weights: out.transform.weights.clone(),
        ell: out.transform.ell.row_vecs(),
        l_values: out.l_values.clone(),
        l_invariants: out.l_invariants.clone(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformRow {
    pub s: usize,
    pub t: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<Rat>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Rat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformOutput {
    pub rows: Vec<DeformRow>,
    pub all_zero: bool,
    pub complete: bool,
    pub pass: bool,
}

pub fn deform_output(rep: &DeformationReport) -> DeformOutput {
    DeformOutput {
        rows: rep
            .results
            .iter()
            .map(|r| {
                let (status, residual) = match &r.status {
                    ConstraintStatus::Pass => ("pass".to_string(), Some(Rat::zero())),
                    ConstraintStatus::Fail(v) => ("fail".to_string(), Some(v.clone())),
                    ConstraintStatus::Unchecked => ("unchecked".to_string(), None),
                };
                DeformRow {
                    s: r.s,
                    t: r.t,
                    l: r.l.clone(),
                    status,
                    residual,
                }
            })
            .collect(),
        all_zero: rep.all_zero,
        complete: rep.complete,
        pass: rep.pass(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}
