//! Seeded random instance generation for property suites and the demo.
//!
//! Modules are planted in an eigenbasis where every structure is explicit
//! (eigenvalue exponents, monodromy edges between adjacent exponents,
//! filtration through a unit-triangular transform with chosen weights) and
//! then conjugated into general position, so the expected invariants are
//! known by construction.

use crate::matrix::Matrix;
use crate::phinmod::{FilteredPhiNModule, Filtration};
use crate::rat::Rat;
use crate::subspace::{Flag, Subspace};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct GenOptions {
    pub n: usize,
    pub p: u64,
    /// Force pairwise distinct eigenvalues.
    pub distinct_eigenvalues: bool,
    /// Probability of each admissible monodromy edge.
    pub edge_density: f64,
}

impl GenOptions {
    pub fn new(n: usize, p: u64) -> Self {
        GenOptions {
            n,
            p,
            distinct_eigenvalues: false,
            edge_density: 0.7,
        }
    }

    pub fn distinct(mut self) -> Self {
        self.distinct_eigenvalues = true;
        self
    }
}

fn small_rat(rng: &mut impl Rng) -> Rat {
    let num = rng.gen_range(-4i64..=4);
    let den = *[1i64, 1, 1, 2, 3].get(rng.gen_range(0..5)).unwrap();
    Rat::new(num, den)
}

fn small_nonzero(rng: &mut impl Rng) -> Rat {
    loop {
        let v = small_rat(rng);
        if !v.is_zero() {
            return v;
        }
    }
}

fn unit_upper_triangular(rng: &mut impl Rng, n: usize, density: f64) -> Matrix {
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                m.set(i, j, small_rat(rng));
            }
        }
    }
    m
}

/// A random valid module together with a stable flag refining it. The
/// returned flag always defines a refinement; eigenvalue exponents,
/// monodromy edges and filtration weights are randomized.
pub fn random_refined_module(rng: &mut impl Rng, opts: &GenOptions) -> (FilteredPhiNModule, Flag) {
    let n = opts.n;
    let p = opts.p;

    // Eigenvalue exponents. Monodromy edges need adjacent exponents, so
    // they are drawn from a narrow band.
    let mut exps: Vec<i64> = Vec::with_capacity(n);
    if opts.distinct_eigenvalues {
        let mut pool: Vec<i64> = (-2..=(n as i64 + 2)).collect();
        for _ in 0..n {
            let k = rng.gen_range(0..pool.len());
            exps.push(pool.swap_remove(k));
        }
    } else {
        for _ in 0..n {
            exps.push(rng.gen_range(-1i64..=2));
        }
    }
    let alphas: Vec<Rat> = exps.iter().map(|&c| Rat::pow_of(p, c)).collect();

    // Monodromy in the eigenbasis: an entry (j, i), j < i, is allowed
    // exactly when alpha_i = p * alpha_j.
    let mut n_eig = Matrix::zero(n, n);
    for i in 0..n {
        for j in 0..i {
            if exps[i] == exps[j] + 1 && rng.gen_bool(opts.edge_density) {
                n_eig.set(j, i, small_nonzero(rng));
            }
        }
    }

    // Change of basis: upper unitriangular, so the standard flag images
    // stay a stable flag.
    let c = unit_upper_triangular(rng, n, 0.5);
    let c_inv = c.inverse().unwrap();
    let phi = &(&c * &Matrix::diagonal(&alphas)) * &c_inv;
    let monodromy = &(&c * &n_eig) * &c_inv;

    // Filtration planted through a second unit-triangular transform; the
    // weight attached to column i becomes the refinement weight k_i.
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(-3i64..=3)).collect();
    let g = &c * &unit_upper_triangular(rng, n, 0.6);
    let mut distinct: Vec<i64> = weights.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let entries: Vec<(i64, Subspace)> = distinct
        .iter()
        .map(|&v| {
            let rows: Vec<Vec<Rat>> = (0..n)
                .filter(|&i| weights[i] >= v)
                .map(|i| g.col(i))
                .collect();
            (v, Subspace::from_rows(n, &rows))
        })
        .collect();
    let module = FilteredPhiNModule::new(p, n, phi, monodromy, Filtration::new(entries));

    let flag =
        Flag::new(n, (0..n).map(|i| c.col(i)).collect()).expect("triangular basis is independent");
    debug_assert!(module.validate().is_valid());
    (module, flag)
}

/// A random module carrying a monodromy edge from the top graded line to
/// the bottom one across a band of repeated eigenvalues, so the critical
/// pair `(1, n)` has a nontrivial middle and the decomposition machinery
/// faces real choices. Weights are biased so the pair is often strongly
/// critical.
pub fn random_banded_critical(rng: &mut impl Rng, n: usize, p: u64) -> (FilteredPhiNModule, Flag) {
    assert!(n >= 3);
    let mut exps = vec![0i64; n];
    exps[n - 1] = 1;
    for e in exps.iter_mut().take(n - 1).skip(1) {
        *e = if rng.gen_bool(0.6) { 0 } else { 1 };
    }
    let alphas: Vec<Rat> = exps.iter().map(|&c| Rat::pow_of(p, c)).collect();

    let mut n_eig = Matrix::zero(n, n);
    n_eig.set(0, n - 1, Rat::one());
    for i in 1..n - 1 {
        for j in 1..i {
            if exps[i] == exps[j] + 1 && rng.gen_bool(0.5) {
                n_eig.set(j, i, small_nonzero(rng));
            }
        }
    }

    let c = unit_upper_triangular(rng, n, 0.5);
    let c_inv = c.inverse().unwrap();
    let phi = &(&c * &Matrix::diagonal(&alphas)) * &c_inv;
    let monodromy = &(&c * &n_eig) * &c_inv;

    let mut weights = vec![0i64; n];
    weights[0] = rng.gen_range(-3i64..=-1);
    weights[n - 1] = rng.gen_range(1i64..=3);
    for w in weights.iter_mut().take(n - 1).skip(1) {
        *w = rng.gen_range(-2i64..=2);
    }
    let g = &c * &unit_upper_triangular(rng, n, 0.6);
    let mut distinct: Vec<i64> = weights.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let entries: Vec<(i64, Subspace)> = distinct
        .iter()
        .map(|&v| {
            let rows: Vec<Vec<Rat>> = (0..n)
                .filter(|&i| weights[i] >= v)
                .map(|i| g.col(i))
                .collect();
            (v, Subspace::from_rows(n, &rows))
        })
        .collect();
    let module = FilteredPhiNModule::new(p, n, phi, monodromy, Filtration::new(entries));
    let flag =
        Flag::new(n, (0..n).map(|i| c.col(i)).collect()).expect("triangular basis is independent");
    debug_assert!(module.validate().is_valid());
    (module, flag)
}

/// A random maximal-monodromy module with a planted unit-triangular
/// Hodge transform; returns the module, the planted matrix and the
/// strictly increasing weights. The transform (hence the superdiagonal of
/// L-invariants) is invariant under the conjugation applied at the end.
pub fn random_max_monodromy(
    rng: &mut impl Rng,
    n: usize,
    p: u64,
) -> (FilteredPhiNModule, Matrix, Vec<i64>) {
    let base = rng.gen_range(-2i64..=1);
    let alphas: Vec<Rat> = (0..n as i64).map(|i| Rat::pow_of(p, base + i)).collect();
    let mut n_eig = Matrix::zero(n, n);
    for i in 1..n {
        n_eig.set(i - 1, i, Rat::one());
    }

    let mut ell = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            ell.set(
                j,
                i,
                if j + 1 == i {
                    small_nonzero(rng)
                } else {
                    small_rat(rng)
                },
            );
        }
    }
    let mut weights = Vec::with_capacity(n);
    let mut w = rng.gen_range(-3i64..=0);
    for _ in 0..n {
        weights.push(w);
        w += rng.gen_range(1i64..=2);
    }

    // Conjugate into general position; the transform is expressed over the
    // monodromy chain basis and does not change.
    let c = {
        let upper = unit_upper_triangular(rng, n, 0.5);
        let mut lower = Matrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                if rng.gen_bool(0.4) {
                    lower.set(i, j, small_rat(rng));
                }
            }
        }
        &lower * &upper
    };
    let c_inv = c.inverse().unwrap();
    let phi = &(&c * &Matrix::diagonal(&alphas)) * &c_inv;
    let monodromy = &(&c * &n_eig) * &c_inv;
    let g = &c * &ell;
    let entries: Vec<(i64, Subspace)> = weights
        .iter()
        .map(|&v| {
            let rows: Vec<Vec<Rat>> = (0..n)
                .filter(|&i| weights[i] >= v)
                .map(|i| g.col(i))
                .collect();
            (v, Subspace::from_rows(n, &rows))
        })
        .collect();
    let module = FilteredPhiNModule::new(p, n, phi, monodromy, Filtration::new(entries));
    debug_assert!(module.validate().is_valid());
    (module, ell, weights)
}
