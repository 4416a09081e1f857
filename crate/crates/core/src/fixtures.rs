//! Small example modules used across the test suites, the command line
//! examples and the browser demo.

use crate::matrix::Matrix;
use crate::phinmod::{FilteredPhiNModule, Filtration};
use crate::rat::Rat;
use crate::subspace::{Flag, Subspace};

fn r(n: i64) -> Rat {
    Rat::from_int(n)
}

/// The one-dimensional unit object: `phi = 1`, `N = 0`, single jump at 0.
pub fn unit_module(p: u64) -> FilteredPhiNModule {
    FilteredPhiNModule::new(
        p,
        1,
        Matrix::identity(1),
        Matrix::zero(1, 1),
        Filtration::new(vec![(0, Subspace::full(1))]),
    )
}

/// Rank-2 semistable, non-crystalline module on basis `(e, f)`:
/// `phi = diag(1/p, 1)`, `N(e) = 0`, `N(f) = e`, and the weight-0 line
/// spanned by `f + ell*e`.
pub fn semistable_rank2(ell: Rat, p: u64) -> FilteredPhiNModule {
    let phi = Matrix::diagonal(&[Rat::new(1, p as i64), Rat::one()]);
    let mut monodromy = Matrix::zero(2, 2);
    monodromy.set(0, 1, Rat::one());
    let line = Subspace::line(&[ell, Rat::one()]);
    let fil = Filtration::new(vec![(-1, Subspace::full(2)), (0, line)]);
    FilteredPhiNModule::new(p, 2, phi, monodromy, fil)
}

/// The unique stable flag `(e, f)` of [`semistable_rank2`].
pub fn semistable_rank2_flag() -> Flag {
    Flag::standard(2)
}

/// Rank-3 module at `p = 2` on basis `(f1, f2, f3)` with
/// `phi = diag(1/2, 1, 1)`, `N(f2) = -f1`, `N(f3) = f1`, and
/// `Fil^0 = span(f2 - l*f1, f3 + l*f1)`.
pub fn rank3_split_monodromy(l: Rat) -> FilteredPhiNModule {
    let phi = Matrix::diagonal(&[Rat::new(1, 2), Rat::one(), Rat::one()]);
    let mut monodromy = Matrix::zero(3, 3);
    monodromy.set(0, 1, r(-1));
    monodromy.set(0, 2, Rat::one());
    let plane = Subspace::from_rows(
        3,
        &[
            vec![-l.clone(), Rat::one(), Rat::zero()],
            vec![l, Rat::zero(), Rat::one()],
        ],
    );
    let fil = Filtration::new(vec![(-1, Subspace::full(3)), (0, plane)]);
    FilteredPhiNModule::new(2, 3, phi, monodromy, fil)
}

/// The stable flag `(f1, f3, f2)` of [`rank3_split_monodromy`].
pub fn rank3_split_flag() -> Flag {
    Flag::new(
        3,
        vec![
            vec![r(1), r(0), r(0)],
            vec![r(0), r(0), r(1)],
            vec![r(0), r(1), r(0)],
        ],
    )
    .unwrap()
}

/// Rank-3 module at `p = 2` with maximal monodromy: `phi = diag(1, 2, 4)`,
/// `N(e3) = e2`, `N(e2) = e1`, weights `(0, 1, 2)` planted through the
/// transform `f2 = e2 + 7 e1`, `f3 = e3 - 2 e2 + 4 e1`.
pub fn rank3_max_monodromy() -> FilteredPhiNModule {
    let phi = Matrix::diagonal(&[Rat::one(), r(2), r(4)]);
    let mut monodromy = Matrix::zero(3, 3);
    monodromy.set(0, 1, Rat::one());
    monodromy.set(1, 2, Rat::one());
    let f2 = vec![r(7), r(1), r(0)];
    let f3 = vec![r(4), r(-2), r(1)];
    let fil = Filtration::new(vec![
        (0, Subspace::full(3)),
        (1, Subspace::from_rows(3, &[f2, f3.clone()])),
        (2, Subspace::from_rows(3, &[f3])),
    ]);
    FilteredPhiNModule::new(2, 3, phi, monodromy, fil)
}

/// The unique stable flag `(e1, e2, e3)` of [`rank3_max_monodromy`].
pub fn rank3_max_monodromy_flag() -> Flag {
    Flag::standard(3)
}
