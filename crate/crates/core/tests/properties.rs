//! Property suites for the exact linear algebra layer and the module
//! invariants that admit independent recomputation.

use linvariant::deform::FirstOrderFamily;
use linvariant::fixtures;
use linvariant::matrix::Matrix;
use linvariant::phinmod::{FilteredPhiNModule, Filtration};
use linvariant::rat::{Dual, Rat};
use linvariant::refine::{graded_monodromy, Refinement};
use linvariant::subspace::{Flag, Subspace};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Rat::new(n, d))
}

fn rows_strategy(dim: usize) -> impl Strategy<Value = Vec<Vec<Rat>>> {
    prop::collection::vec(prop::collection::vec(rat_strategy(), dim), 0..=dim + 1)
}

proptest! {
    #[test]
    fn modular_dimension_identity(dim in 1usize..=4, a in rows_strategy(4), b in rows_strategy(4)) {
        let a: Vec<Vec<Rat>> = a.into_iter().map(|r| r[..dim].to_vec()).collect();
        let b: Vec<Vec<Rat>> = b.into_iter().map(|r| r[..dim].to_vec()).collect();
        let sa = Subspace::from_rows(dim, &a);
        let sb = Subspace::from_rows(dim, &b);
        let meet = sa.intersect(&sb).unwrap();
        let join = sa.sum(&sb).unwrap();
        prop_assert_eq!(meet.dim() + join.dim(), sa.dim() + sb.dim());
        prop_assert!(join.contains_subspace(&sa) && join.contains_subspace(&sb));
        prop_assert!(sa.contains_subspace(&meet) && sb.contains_subspace(&meet));
    }

    #[test]
    fn annihilator_involution(dim in 1usize..=4, a in rows_strategy(4)) {
        let a: Vec<Vec<Rat>> = a.into_iter().map(|r| r[..dim].to_vec()).collect();
        let s = Subspace::from_rows(dim, &a);
        let ann = s.annihilator();
        prop_assert_eq!(ann.dim(), dim - s.dim());
        prop_assert_eq!(ann.annihilator(), s);
    }

    #[test]
    fn canonicalize_idempotent_and_set_equality(dim in 1usize..=4, a in rows_strategy(4)) {
        let a: Vec<Vec<Rat>> = a.into_iter().map(|r| r[..dim].to_vec()).collect();
        let s = Subspace::from_rows(dim, &a);
        prop_assert_eq!(Subspace::from_rows(dim, &s.basis_rows()), s.clone());
        // Syntactic equality coincides with mutual membership.
        let mut doubled = a.clone();
        doubled.extend(a.iter().map(|r| r.iter().map(|x| x + x).collect::<Vec<_>>()));
        let s2 = Subspace::from_rows(dim, &doubled);
        let set_equal = s.basis_rows().iter().all(|v| s2.contains(v))
            && s2.basis_rows().iter().all(|v| s.contains(v));
        prop_assert!(set_equal);
        prop_assert_eq!(s2, s);
    }

    #[test]
    fn solve_in_span_is_exact(dim in 1usize..=4, a in rows_strategy(4), coeffs in prop::collection::vec(rat_strategy(), 5)) {
        let a: Vec<Vec<Rat>> = a.into_iter().map(|r| r[..dim].to_vec()).collect();
        let s = Subspace::from_rows(dim, &a);
        let mut v = vec![Rat::zero(); dim];
        for (c, row) in coeffs.iter().zip(s.basis_rows()) {
            for (acc, x) in v.iter_mut().zip(row) {
                *acc += c * &x;
            }
        }
        let sol = s.solve_in_span(&v).expect("member by construction");
        prop_assert_eq!(sol, coeffs[..s.dim()].to_vec());
    }
}

#[test]
fn dual_number_product_rule_exact() {
    let mut rng = StdRng::seed_from_u64(100);
    let rand_rat = |rng: &mut StdRng| Rat::new(rng.gen_range(-30i64..=30), rng.gen_range(1i64..=9));
    for _ in 0..1000 {
        let f = Dual::new(rand_rat(&mut rng), rand_rat(&mut rng));
        let g = Dual::new(rand_rat(&mut rng), rand_rat(&mut rng));
        let prod = f.clone() * g.clone();
        // (fg)' = f g' + g f'
        let expected = &(&f.unit * &g.eps) + &(&g.unit * &f.eps);
        assert_eq!(prod.eps, expected);
        assert_eq!(prod.unit, &f.unit * &g.unit);
        if !f.unit.is_zero() {
            let inv = f.clone().inv().unwrap();
            assert_eq!(f * inv, Dual::constant(Rat::one()));
        }
    }
}

#[test]
fn graded_monodromy_independent_of_representatives() {
    let mut rng = StdRng::seed_from_u64(2024);
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
        let reference = Refinement::new(module.clone(), flag.clone()).unwrap();
        let base = graded_monodromy(&reference);
        for _ in 0..200 {
            // Shift one flag vector by a random element of the previous step.
            let i = rng.gen_range(1..=n);
            let mut vectors = flag.vectors().to_vec();
            for l in 0..i - 1 {
                let c = Rat::new(rng.gen_range(-4i64..=4), rng.gen_range(1i64..=3));
                let prev = vectors[l].clone();
                for (x, w) in vectors[i - 1].iter_mut().zip(prev) {
                    *x += &c * &w;
                }
            }
            let perturbed = Flag::new(n, vectors).unwrap();
            let r = Refinement::new(module.clone(), perturbed).unwrap();
            assert_eq!(
                graded_monodromy(&r),
                base,
                "graded data must not depend on representatives"
            );
        }
    }
}

#[test]
fn dual_negates_totals_and_tensor_is_additive() {
    let a = fixtures::semistable_rank2(Rat::from_int(3), 2);
    let b = fixtures::rank3_max_monodromy();
    for m in [&a, &b] {
        let d = m.dual();
        assert_eq!(d.t_hodge(), -m.t_hodge());
        assert_eq!(d.t_newton(), -m.t_newton());
        let mut neg: Vec<i64> = m.hodge_data().weights.iter().map(|w| -w).collect();
        neg.sort_unstable();
        assert_eq!(d.hodge_data().weights, neg);
    }
    let t = a.tensor(&b).unwrap();
    assert_eq!(t.t_hodge(), 3 * a.t_hodge() + 2 * b.t_hodge());
    assert_eq!(t.t_newton(), 3 * a.t_newton() + 2 * b.t_newton());
}

#[test]
fn sub_quotient_weights_partition_over_all_stable_subspaces() {
    for m in [
        fixtures::semistable_rank2(Rat::from_int(3), 2),
        fixtures::rank3_max_monodromy(),
    ] {
        let ambient = m.hodge_data().weights;
        for w in m.stable_subspaces().unwrap() {
            if w.is_zero() || w.is_full() {
                continue;
            }
            let (sub, quot) = m.sub_quotient(&w).unwrap();
            assert!(sub.validate().is_valid());
            assert!(quot.validate().is_valid());
            let mut merged = sub.hodge_data().weights;
            merged.extend(quot.hodge_data().weights);
            merged.sort_unstable();
            assert_eq!(merged, ambient);
        }
    }
}

/// Every single-entry corruption of a fixture matrix is classified exactly
/// as an independent recomputation of the defining equations classifies it.
/// Corruptions that break an equation are rejected; the handful that land
/// on another valid module are accepted by both sides.
#[test]
fn validation_matches_independent_recheck_under_mutation() {
    let fixtures: Vec<FilteredPhiNModule> = vec![
        fixtures::unit_module(2),
        fixtures::semistable_rank2(Rat::from_int(3), 2),
        fixtures::rank3_split_monodromy(Rat::from_int(5)),
        fixtures::rank3_max_monodromy(),
    ];
    let mut rejected = 0usize;
    let mut total = 0usize;
    for m in &fixtures {
        assert!(m.validate().is_valid());
        let n = m.dim();
        for target in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    let mut phi = m.phi().clone();
                    let mut mono = m.monodromy().clone();
                    let victim = if target == 0 { &mut phi } else { &mut mono };
                    let bumped = victim.get(i, j) + &Rat::one();
                    victim.set(i, j, bumped);
                    let mutant =
                        FilteredPhiNModule::new(m.p(), n, phi, mono, m.filtration().clone());
                    let verdict = mutant.validate().is_valid();

                    // Independent recheck from the raw equations.
                    let comm = (mutant.monodromy() * mutant.phi())
                        == (mutant.phi() * mutant.monodromy()).scale(&Rat::from_u64(mutant.p()));
                    let nilpotent = mutant.monodromy().pow(n as u32).is_zero();
                    let invertible = !mutant.phi().det().is_zero();
                    assert_eq!(verdict, comm && nilpotent && invertible);
                    total += 1;
                    if !verdict {
                        rejected += 1;
                    }
                }
            }
        }
    }
    // The corruption sweep must actually exercise the rejection path.
    assert!(
        rejected * 2 > total,
        "expected most mutants rejected, got {}/{}",
        rejected,
        total
    );
}

/// The polygon comparison alone (sorted partial sums) is weaker than
/// admissibility: this module has identical polygons but a stable line
/// violating the subspace inequality.
#[test]
fn polygon_comparison_does_not_imply_admissibility() {
    let m = FilteredPhiNModule::new(
        2,
        2,
        Matrix::diagonal(&[Rat::one(), Rat::from_int(4)]),
        Matrix::zero(2, 2),
        Filtration::new(vec![
            (0, Subspace::full(2)),
            (2, Subspace::line(&[Rat::one(), Rat::zero()])),
        ]),
    );
    assert!(m.validate().is_valid());
    let hodge = m.hodge_data().weights;
    let newton = m.newton_data().unwrap().slopes;
    // Ascending partial sums agree, so the naive polygon test passes.
    let partial = |v: &[i64]| -> Vec<i64> {
        v.iter()
            .scan(0i64, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    };
    assert_eq!(partial(&hodge), partial(&newton));
    // Yet the stable line breaks the subspace criterion.
    assert_eq!(
        m.is_admissible(&[]).verdict,
        linvariant::phinmod::AdmissibilityVerdict::NotAdmissible
    );
    assert!(!linvariant::oracle::oracle_admissible(&m).unwrap());
}

#[test]
fn check_deformation_agrees_with_constraint_rows() {
    // Passing is definitionally the vanishing of every constraint row.
    let mut rng = StdRng::seed_from_u64(55);
    let r = Refinement::new(
        fixtures::rank3_max_monodromy(),
        fixtures::rank3_max_monodromy_flag(),
    )
    .unwrap();
    let report = linvariant::refine::l_invariant_report(&r);
    let sys = linvariant::deform::constraint_system(&r, &report);
    for _ in 0..300 {
        let family = FirstOrderFamily {
            characters: (0..3)
                .map(|_| {
                    linvariant::deform::FirstOrderCharacter::new(
                        Rat::new(rng.gen_range(-6i64..=6), rng.gen_range(1i64..=3)),
                        Rat::new(rng.gen_range(-6i64..=6), rng.gen_range(1i64..=3)),
                    )
                })
                .collect(),
        };
        let pass = linvariant::deform::check_deformation(&r, &report, &family)
            .unwrap()
            .pass();
        let rows_vanish = (0..sys.rows.len()).all(|i| sys.row_apply(i, &family).is_zero());
        assert_eq!(pass, rows_vanish);
    }
}

#[test]
fn residual_is_linear_in_the_family() {
    let mut rng = StdRng::seed_from_u64(77);
    let l = Rat::new(7, 3);
    for _ in 0..500 {
        let n = rng.gen_range(2usize..=5);
        let rand_fam = |rng: &mut StdRng| FirstOrderFamily {
            characters: (0..n)
                .map(|_| {
                    linvariant::deform::FirstOrderCharacter::new(
                        Rat::new(rng.gen_range(-9i64..=9), rng.gen_range(1i64..=4)),
                        Rat::new(rng.gen_range(-9i64..=9), rng.gen_range(1i64..=4)),
                    )
                })
                .collect(),
        };
        let f = rand_fam(&mut rng);
        let g = rand_fam(&mut rng);
        let a = Rat::new(rng.gen_range(-5i64..=5), 1);
        let b = Rat::new(rng.gen_range(-5i64..=5), 1);
        let combo = FirstOrderFamily {
            characters: f
                .characters
                .iter()
                .zip(&g.characters)
                .map(|(x, y)| {
                    linvariant::deform::FirstOrderCharacter::new(
                        &(&a * &x.eps_p) + &(&b * &y.eps_p),
                        &(&a * &x.eps_w) + &(&b * &y.eps_w),
                    )
                })
                .collect(),
        };
        let s = rng.gen_range(1..n);
        let t = rng.gen_range(s + 1..=n);
        let rf = linvariant::deform::residual(&l, s, t, &f).unwrap();
        let rg = linvariant::deform::residual(&l, s, t, &g).unwrap();
        let rc = linvariant::deform::residual(&l, s, t, &combo).unwrap();
        assert_eq!(rc, &(&a * &rf) + &(&b * &rg));
    }
}
