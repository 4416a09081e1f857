//! Acceptance suite. One test per release criterion, all exact (zero
//! tolerance); each prints a `criterion NN PASS` line on success.

use linvariant::deform::{check_deformation, colmez_translate, ColmezInput, ConstraintStatus};
use linvariant::fixtures;
use linvariant::gen::{
    random_banded_critical, random_max_monodromy, random_refined_module, GenOptions,
};
use linvariant::oracle::{oracle_admissible, oracle_critical_indices, oracle_l_invariant};
use linvariant::phinmod::AdmissibilityVerdict;
use linvariant::rat::Rat;
use linvariant::refine::{
    critical_indices, dual_refinement, enumerate_refinements, flip_dual_basis, graded_monodromy,
    is_s_perfect, l_invariant_report, s_decomposition, s_decomposition_styled, s_perfect_basis,
    strong_criticality, CriticalVerdict, DecompositionStyle, GradedTarget, Refinement,
};
use linvariant::triparam::{
    characters_from_invariants, max_monodromy_refinement, parameters_to_invariants,
    refinement_to_parameters,
};
use linvariant::{FilteredPhiNModule, Flag};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::process::Command;

fn rank2() -> Refinement {
    Refinement::new(
        fixtures::semistable_rank2(Rat::from_int(3), 2),
        fixtures::semistable_rank2_flag(),
    )
    .unwrap()
}

fn rank3_split() -> Refinement {
    Refinement::new(
        fixtures::rank3_split_monodromy(Rat::from_int(5)),
        fixtures::rank3_split_flag(),
    )
    .unwrap()
}

fn rank3_chain() -> Refinement {
    Refinement::new(
        fixtures::rank3_max_monodromy(),
        fixtures::rank3_max_monodromy_flag(),
    )
    .unwrap()
}

/// Oracle reading of the invariant: on the stored decomposition when its
/// jump line exists, otherwise on the canonical decomposition of the dual
/// refinement (where the invariant coincides).
fn oracle_l(r: &Refinement, s: usize, t: usize) -> Rat {
    let dec = s_decomposition(r, s).unwrap();
    match oracle_l_invariant(r, &dec) {
        Ok(l) => l,
        Err(_) => {
            let dual = dual_refinement(r);
            let ddec = s_decomposition(&dual, r.dim() + 1 - t).unwrap();
            oracle_l_invariant(&dual, &ddec).expect("dual route must carry the jump line")
        }
    }
}

#[test]
fn criterion_01_rank2_semistable_fixture() {
    let m = fixtures::semistable_rank2(Rat::from_int(3), 2);
    assert!(m.validate().is_valid());
    assert_eq!(
        m.is_admissible(&[]).verdict,
        AdmissibilityVerdict::Admissible
    );
    let flags = enumerate_refinements(&m).unwrap();
    assert_eq!(flags.len(), 1);
    let r = rank2();
    assert_eq!(critical_indices(&r), vec![(1, 2)]);
    assert_eq!(
        strong_criticality(&r, 1).unwrap().verdict,
        CriticalVerdict::StronglyCritical(Rat::from_int(3))
    );
    let chars = refinement_to_parameters(&r);
    let dp: Vec<Rat> = chars.iter().map(|c| c.delta_p.clone()).collect();
    let w: Vec<Rat> = chars.iter().map(|c| c.weight.clone()).collect();
    assert_eq!(dp, vec![Rat::one(), Rat::one()]);
    assert_eq!(w, vec![Rat::one(), Rat::zero()]);
    println!("criterion 01 PASS: rank-2 fixture (validation, admissibility, unique flag, critical set, L = 3, parameters)");
}

#[test]
fn criterion_02_rank3_split_fixture() {
    let r = rank3_split();
    let gm = graded_monodromy(&r);
    assert_eq!(gm.target(1), &GradedTarget::Zero);
    assert_eq!(
        gm.target(2),
        &GradedTarget::Target {
            to: 1,
            coeff: Rat::one()
        }
    );
    assert_eq!(gm.target(3), &GradedTarget::Zero);
    assert_eq!(critical_indices(&r), vec![(1, 2)]);
    assert_eq!(
        strong_criticality(&r, 1).unwrap().verdict,
        CriticalVerdict::StronglyCritical(Rat::from_int(5))
    );
    println!("criterion 02 PASS: rank-3 split fixture (graded monodromy map, critical set, L = 5)");
}

#[test]
fn criterion_03_maximal_monodromy_fixture() {
    let m = fixtures::rank3_max_monodromy();
    let adm = m.is_admissible(&[]);
    assert_eq!(adm.verdict, AdmissibilityVerdict::Admissible);
    assert_eq!((adm.t_h, adm.t_n), (3, 3));

    let out = max_monodromy_refinement(&m).unwrap();
    assert_eq!(out.transform.ell.get(0, 1), &Rat::from_int(7));
    assert_eq!(out.transform.ell.get(1, 2), &Rat::from_int(-2));
    assert_eq!(out.transform.ell.get(0, 2), &Rat::from_int(4));

    // Both routes to the invariants.
    assert_eq!(out.l_values, vec![Rat::from_int(7), Rat::from_int(-2)]);
    let r = rank3_chain();
    let report = l_invariant_report(&r);
    assert_eq!(report.l_value(1), Some(&Rat::from_int(7)));
    assert_eq!(report.l_value(2), Some(&Rat::from_int(-2)));
    println!("criterion 03 PASS: maximal-monodromy fixture (admissible, planted transform recovered, both L routes agree)");
}

#[test]
fn criterion_04_l_invariant_well_defined() {
    let mut rng = StdRng::seed_from_u64(40);
    let mut collected = 0usize;
    let mut materially_different = 0usize;
    let mut attempts = 0usize;
    while collected < 200 && attempts < 60_000 {
        attempts += 1;
        let n = rng.gen_range(3usize..=5);
        let (m, flag) = if attempts.is_multiple_of(2) {
            random_refined_module(&mut rng, &GenOptions::new(n, 2))
        } else {
            random_banded_critical(&mut rng, n, 2)
        };
        let r = Refinement::new(m, flag).unwrap();
        for (s, _) in critical_indices(&r) {
            let entry = strong_criticality(&r, s).unwrap();
            let CriticalVerdict::StronglyCritical(l) = entry.verdict else {
                continue;
            };
            let a = s_decomposition_styled(&r, s, DecompositionStyle::Canonical).unwrap();
            let b = s_decomposition_styled(&r, s, DecompositionStyle::Alternative).unwrap();
            if !(a.perfect && b.perfect) {
                continue;
            }
            assert_eq!(a.l_dec, b.l_dec, "two perfect decompositions disagree");
            assert_eq!(a.l_dec.clone().unwrap(), l);
            if a.middle != b.middle || a.e_bar_t != b.e_bar_t {
                materially_different += 1;
            }
            collected += 1;
            if collected == 200 {
                break;
            }
        }
    }
    assert_eq!(
        collected, 200,
        "only {} strongly-critical instances found in {} attempts",
        collected, attempts
    );
    assert!(
        materially_different >= 20,
        "want a real spread of distinct decompositions, got {}",
        materially_different
    );
    println!(
        "criterion 04 PASS: 200 strongly-critical instances, independent perfect decompositions agree ({} with materially different data)",
        materially_different
    );
}

#[test]
fn criterion_05_duality_suite() {
    let mut rng = StdRng::seed_from_u64(50);
    let mut checked = 0usize;
    let mut strongly_critical_pairs = 0usize;
    while checked < 200 {
        let banded = checked.is_multiple_of(2);
        let n = if banded {
            rng.gen_range(3usize..=5)
        } else {
            rng.gen_range(2usize..=5)
        };
        let (m, flag) = if banded {
            random_banded_critical(&mut rng, n, 2)
        } else if checked % 4 == 1 {
            random_refined_module(&mut rng, &GenOptions::new(n, 2).distinct())
        } else {
            random_refined_module(&mut rng, &GenOptions::new(n, 2))
        };
        let r = Refinement::new(m.clone(), flag).unwrap();
        let d = dual_refinement(&r);

        // Critical pairs map to (n+1-t, n+1-s).
        let crit = critical_indices(&r);
        let mut expected: Vec<(usize, usize)> =
            crit.iter().map(|(s, t)| (n + 1 - t, n + 1 - s)).collect();
        expected.sort_unstable();
        assert_eq!(critical_indices(&d), expected);

        // Matrix of the dual graded monodromy = minus transpose.
        let gm = graded_monodromy(&r).matrix(n);
        let gmd = graded_monodromy(&d).matrix(n);
        for i in 1..=n {
            for j in 1..=n {
                assert_eq!(gmd.get(n - i, n - j), &-gm.get(j - 1, i - 1).clone());
            }
        }

        // Strong criticality transfers with the same invariant, and the
        // sign-flipped dual of an s-perfect basis is (n+1-t)-perfect.
        for (s, t) in crit {
            let va = strong_criticality(&r, s).unwrap().verdict;
            let vd = strong_criticality(&d, n + 1 - t).unwrap().verdict;
            match (&va, &vd) {
                (CriticalVerdict::StronglyCritical(l1), CriticalVerdict::StronglyCritical(l2)) => {
                    assert_eq!(l1, l2, "dual invariant must agree");
                    if strongly_critical_pairs < 30 {
                        let basis = s_perfect_basis(&r, s).unwrap();
                        let flipped = flip_dual_basis(&basis, s);
                        assert!(
                            is_s_perfect(&d, n + 1 - t, &flipped).is_ok(),
                            "flipped dual basis must be s-perfect for the dual"
                        );
                    }
                    strongly_critical_pairs += 1;
                }
                (CriticalVerdict::NotStronglyCritical, CriticalVerdict::NotStronglyCritical) => {}
                (CriticalVerdict::NotDetected, CriticalVerdict::NotDetected) => {}
                other => panic!("verdicts do not dualize: {:?}", other),
            }
        }

        // Involutions, exactly.
        assert_eq!(m.dual().dual(), m);
        let dd = dual_refinement(&d);
        assert_eq!(dd.module(), r.module());
        assert_eq!(dd.flag(), r.flag());
        checked += 1;
    }
    assert!(
        strongly_critical_pairs >= 50,
        "duality suite exercised only {} strongly critical pairs",
        strongly_critical_pairs
    );
    println!(
        "criterion 05 PASS: duality suite on 200 random refinements ({} strongly critical pairs transferred)",
        strongly_critical_pairs
    );
}

#[test]
fn criterion_06_deformation_constraint() {
    // Library side: exact residuals.
    let r = rank3_chain();
    let report = l_invariant_report(&r);
    let ok = linvariant::deform::FirstOrderFamily::from_eps(&[0, -7, -5], &[0, 1, 2]);
    let out = check_deformation(&r, &report, &ok).unwrap();
    assert!(out.pass());
    assert!(out
        .results
        .iter()
        .all(|row| row.status == ConstraintStatus::Pass));

    let bad = linvariant::deform::FirstOrderFamily::from_eps(&[0, -7, -3], &[0, 1, 2]);
    let out = check_deformation(&r, &report, &bad).unwrap();
    assert!(!out.pass());
    assert_eq!(
        out.results[1].status,
        ConstraintStatus::Fail(Rat::from_int(2))
    );

    // CLI side: exit codes.
    let bin = env!("CARGO_BIN_EXE_linv");
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/rank3_chain.json"
    );
    let run = |family: &str| {
        Command::new(bin)
            .args([
                "deform-check",
                fixture,
                "--refinement",
                "F",
                "--family",
                family,
            ])
            .output()
            .expect("binary runs")
    };
    let good = run("ok");
    assert_eq!(good.status.code(), Some(0));
    let text = String::from_utf8_lossy(&good.stdout);
    assert!(text.contains("residual 0"));
    let perturbed = run("perturbed");
    assert_eq!(perturbed.status.code(), Some(1));
    let text = String::from_utf8_lossy(&perturbed.stdout);
    assert!(text.contains("s=2 t=3 L=-2: residual 2"));
    println!("criterion 06 PASS: deformation residuals exact (library) and exit codes 0/1 (cli)");
}

#[test]
fn criterion_07_two_dimensional_reduction() {
    let mut rng = StdRng::seed_from_u64(70);
    let rand_rat = |rng: &mut StdRng| Rat::new(rng.gen_range(-20i64..=20), rng.gen_range(1i64..=7));
    for _ in 0..500 {
        let input = ColmezInput {
            d_alpha_over_alpha: rand_rat(&mut rng),
            d_kappa: rand_rat(&mut rng),
            d_delta: rand_rat(&mut rng),
        };
        let l = rand_rat(&mut rng);
        let (family, expr) = colmez_translate(&input, &l);
        let res = linvariant::deform::residual(&l, 1, 2, &family).unwrap();
        assert_eq!(expr, -&Rat::new(1, 2) * &res);
        assert_eq!(expr.is_zero(), res.is_zero());
    }
    println!("criterion 07 PASS: 500 random two-dimensional reductions, expression = -1/2 residual exactly");
}

#[test]
fn criterion_08_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(80);

    // Critical indices and L readings on fixtures first.
    for (r, expected) in [
        (rank2(), vec![(1, 2)]),
        (rank3_split(), vec![(1, 2)]),
        (rank3_chain(), vec![(1, 2), (2, 3)]),
    ] {
        assert_eq!(oracle_critical_indices(&r), expected);
        assert_eq!(critical_indices(&r), expected);
        for entry in l_invariant_report(&r).entries {
            if let CriticalVerdict::StronglyCritical(l) = entry.verdict {
                assert_eq!(oracle_l(&r, entry.s, entry.t), l);
            }
        }
    }

    // 500 random refinements, n <= 5.
    let mut sc_checked = 0usize;
    for round in 0..500 {
        let n = rng.gen_range(2usize..=5);
        let (m, flag) = match round % 3 {
            0 if n >= 3 => random_banded_critical(&mut rng, n, 2),
            1 => random_refined_module(&mut rng, &GenOptions::new(n, 2).distinct()),
            _ => random_refined_module(&mut rng, &GenOptions::new(n, 2)),
        };
        let r = Refinement::new(m, flag).unwrap();
        assert_eq!(
            critical_indices(&r),
            oracle_critical_indices(&r),
            "critical index routes disagree"
        );
        for entry in l_invariant_report(&r).entries {
            if let CriticalVerdict::StronglyCritical(l) = entry.verdict {
                assert_eq!(
                    oracle_l(&r, entry.s, entry.t),
                    l,
                    "L routes disagree at s={}",
                    entry.s
                );
                sc_checked += 1;
            }
        }
    }
    assert!(
        sc_checked >= 100,
        "only {} strongly critical L values cross-checked",
        sc_checked
    );

    // 200 random distinct-eigenvalue modules, n <= 4.
    for _ in 0..200 {
        let n = rng.gen_range(2usize..=4);
        let (m, _) = random_refined_module(&mut rng, &GenOptions::new(n, 2).distinct());
        let primary = matches!(
            m.is_admissible(&[]).verdict,
            AdmissibilityVerdict::Admissible
        );
        assert_eq!(
            primary,
            oracle_admissible(&m).unwrap(),
            "admissibility routes disagree"
        );
    }
    println!(
        "criterion 08 PASS: oracle equivalence (500 refinements, {} L values, 200 admissibility sweeps, zero mismatches)",
        sc_checked
    );
}

#[test]
fn criterion_09_parameter_roundtrip() {
    let mut rng = StdRng::seed_from_u64(90);
    for _ in 0..1000 {
        let n = rng.gen_range(1usize..=6);
        let alphas: Vec<Rat> = (0..n)
            .map(|_| loop {
                let v = Rat::new(rng.gen_range(-40i64..=40), rng.gen_range(1i64..=12));
                if !v.is_zero() {
                    break v;
                }
            })
            .collect();
        let ks: Vec<i64> = (0..n).map(|_| rng.gen_range(-6i64..=6)).collect();
        let chars = characters_from_invariants(&alphas, &ks, 2);
        let (back_a, back_k) = parameters_to_invariants(&chars, 2).unwrap();
        assert_eq!(back_a, alphas);
        assert_eq!(back_k, ks);
    }
    println!("criterion 09 PASS: 1000 random parameter pairs survive the exact roundtrip");
}

#[test]
fn criterion_10_graded_monodromy_well_defined() {
    let mut rng = StdRng::seed_from_u64(10);
    let cases: Vec<(FilteredPhiNModule, Flag)> = vec![
        (
            fixtures::semistable_rank2(Rat::from_int(3), 2),
            fixtures::semistable_rank2_flag(),
        ),
        (
            fixtures::rank3_split_monodromy(Rat::from_int(5)),
            fixtures::rank3_split_flag(),
        ),
        (
            fixtures::rank3_max_monodromy(),
            fixtures::rank3_max_monodromy_flag(),
        ),
    ];
    for (module, flag) in cases {
        let n = module.dim();
        let base = graded_monodromy(&Refinement::new(module.clone(), flag.clone()).unwrap());
        for _ in 0..200 {
            let i = rng.gen_range(1..=n);
            let mut vectors = flag.vectors().to_vec();
            for l in 0..i - 1 {
                let c = Rat::new(rng.gen_range(-5i64..=5), rng.gen_range(1i64..=3));
                let prev = vectors[l].clone();
                for (x, w) in vectors[i - 1].iter_mut().zip(prev) {
                    *x += &c * &w;
                }
            }
            let r = Refinement::new(module.clone(), Flag::new(n, vectors).unwrap()).unwrap();
            assert_eq!(
                graded_monodromy(&r),
                base,
                "representative perturbation changed the graded data"
            );
        }
    }
    println!("criterion 10 PASS: graded monodromy unchanged under 200 representative perturbations per fixture");
}

#[test]
fn planted_max_monodromy_random_instances_agree() {
    // Supporting sweep for criteria 3 and 4: random planted transforms are
    // recovered exactly and the superdiagonal equals the refinement-route
    // invariants.
    let mut rng = StdRng::seed_from_u64(34);
    for _ in 0..60 {
        let n = rng.gen_range(2usize..=5);
        let (m, ell, weights) = random_max_monodromy(&mut rng, n, 2);
        let out = max_monodromy_refinement(&m).unwrap();
        assert_eq!(out.transform.ell, ell);
        assert_eq!(out.transform.weights, weights);
        assert_eq!(out.l_values, out.l_invariants);

        // The deformation constraints built from the two invariant routes
        // coincide row by row.
        let report = l_invariant_report(&out.refinement);
        let sys = linvariant::deform::constraint_system(&out.refinement, &report);
        assert_eq!(sys.rows.len(), n - 1);
        for (row_idx, (s, t, row)) in sys.rows.iter().enumerate() {
            assert_eq!((*s, *t), (row_idx + 1, row_idx + 2));
            let l = &out.l_values[row_idx];
            assert_eq!(&row[*t - 1], &Rat::one());
            assert_eq!(&row[*s - 1], &Rat::from_int(-1));
            assert_eq!(&row[n + *t - 1], l);
            assert_eq!(&row[n + *s - 1], &-l.clone());
        }
    }
    println!("supporting PASS: 60 planted maximal-monodromy instances recovered exactly, constraint rows agree on both routes");
}
