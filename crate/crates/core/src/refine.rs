//! Refinements of filtered (phi, N)-modules and the machinery built on
//! them: the graded monodromy operator, critical indices, perfect and
//! s-perfect bases, s-decompositions, strong criticality with its
//! L-invariant, dual refinements and stable-flag enumeration.

use crate::matrix::Matrix;
use crate::phinmod::{FilteredPhiNModule, ModuleError, ValidationReport};
use crate::rat::Rat;
use crate::subspace::{Flag, FlagError, SubQuotient, Subspace};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefineError {
    #[error("module is invalid: {0:?}")]
    InvalidModule(ValidationReport),
    #[error("{0}")]
    Flag(FlagError),
    #[error("phi is not semisimple with rational eigenvalues")]
    NotSemisimple,
    #[error("flag step {0} is not stable under phi and N")]
    NotStable(usize),
    #[error("index {0} is not critical")]
    NotCritical(usize),
    #[error("index {0} is not strongly critical")]
    NotStronglyCritical(usize),
    #[error("{0}")]
    Module(ModuleError),
}

/// A full flag of phi,N-stable subspaces with one-dimensional graded
/// pieces. Construction fixes the eigenvalue ordering `alpha_i` and the
/// Hodge weight ordering `k_i` carried by the graded pieces.
#[derive(Clone, Debug)]
pub struct Refinement {
    module: FilteredPhiNModule,
    flag: Flag,
    steps: Vec<Subspace>,
    alphas: Vec<Rat>,
    ks: Vec<i64>,
}

impl Refinement {
    /// Validates stability of every flag step and derives the orderings.
    pub fn new(module: FilteredPhiNModule, flag: Flag) -> Result<Self, RefineError> {
        let report = module.validate();
        if !report.is_valid() {
            return Err(RefineError::InvalidModule(report));
        }
        let n = module.dim();
        if flag.ambient_dim() != n {
            return Err(RefineError::Flag(FlagError::WrongShape {
                expected: n,
                got: flag.ambient_dim(),
            }));
        }
        match module.phi().is_semisimple() {
            Ok(true) => {}
            _ => return Err(RefineError::NotSemisimple),
        }

        let steps = flag.steps();
        for (i, step) in steps.iter().enumerate().skip(1) {
            let v = flag.vector(i);
            if !step.contains(&module.phi().apply(v))
                || !step.contains(&module.monodromy().apply(v))
            {
                return Err(RefineError::NotStable(i));
            }
        }

        // alpha_i: the eigenvalue of phi on F_i / F_{i-1}.
        let mut alphas = Vec::with_capacity(n);
        for i in 1..=n {
            let cols: Vec<Vec<Rat>> = flag.vectors()[..i].to_vec();
            let mat = Matrix::from_rows(n, &cols).transpose();
            let sol = mat
                .solve(&module.phi().apply(flag.vector(i)))
                .expect("flag step is phi-stable");
            alphas.push(sol[i - 1].clone());
        }
        {
            let mut got = alphas.clone();
            got.sort();
            let mut expected = Vec::new();
            for (lambda, mult) in module
                .phi()
                .rational_eigenvalues()
                .expect("semisimple checked")
            {
                for _ in 0..mult {
                    expected.push(lambda.clone());
                }
            }
            assert_eq!(
                got, expected,
                "graded eigenvalues do not form the spectrum of phi"
            );
        }

        // k_i: the unique induced filtration jump on F_i / F_{i-1}.
        let mut ks = Vec::with_capacity(n);
        let mut jumps = module.filtration().jumps();
        jumps.reverse();
        for i in 1..=n {
            let mut found = None;
            for &j in &jumps {
                let meet = module.fil_at(j).intersect(&steps[i]).unwrap();
                if meet.sum(&steps[i - 1]).unwrap().dim() == i {
                    found = Some(j);
                    break;
                }
            }
            ks.push(found.expect("filtration is exhaustive"));
        }
        {
            let mut got = ks.clone();
            got.sort_unstable();
            assert_eq!(
                got,
                module.filtration().weights(),
                "graded jumps do not form the weight multiset"
            );
        }

        Ok(Refinement {
            module,
            flag,
            steps,
            alphas,
            ks,
        })
    }

    pub fn module(&self) -> &FilteredPhiNModule {
        &self.module
    }

    pub fn flag(&self) -> &Flag {
        &self.flag
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    /// `F_i`; `step(0)` is zero.
    pub fn step(&self, i: usize) -> &Subspace {
        &self.steps[i]
    }

    pub fn alphas(&self) -> &[Rat] {
        &self.alphas
    }

    pub fn ks(&self) -> &[i64] {
        &self.ks
    }

    pub fn alpha(&self, i: usize) -> &Rat {
        &self.alphas[i - 1]
    }

    pub fn k(&self, i: usize) -> i64 {
        self.ks[i - 1]
    }
}

/// Value of the graded monodromy operator on one graded line.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GradedTarget {
    Zero,
    /// `N_F(gr_i) = coeff * gr_j` on the flag representatives, `j < i`.
    Target {
        to: usize,
        coeff: Rat,
    },
}

/// The operator induced by the monodromy on the graded pieces of the flag,
/// described line by line.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedMonodromy {
    targets: Vec<GradedTarget>,
}

impl GradedMonodromy {
    pub fn target(&self, i: usize) -> &GradedTarget {
        &self.targets[i - 1]
    }

    pub fn targets(&self) -> &[GradedTarget] {
        &self.targets
    }

    /// Critical pairs `(s, t)` with `N_F(gr_t) = gr_s`, sorted by `s`.
    pub fn critical_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .targets
            .iter()
            .enumerate()
            .filter_map(|(idx, t)| match t {
                GradedTarget::Zero => None,
                GradedTarget::Target { to, .. } => Some((*to, idx + 1)),
            })
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// `t_F(s)` when `s` is critical.
    pub fn t_of(&self, s: usize) -> Option<usize> {
        self.critical_pairs()
            .iter()
            .find(|(a, _)| *a == s)
            .map(|(_, t)| *t)
    }

    /// The n-by-n matrix with entry `(j, i)` the coefficient of `gr_j` in
    /// `N_F(gr_i)`.
    pub fn matrix(&self, n: usize) -> Matrix {
        let mut m = Matrix::zero(n, n);
        for (idx, t) in self.targets.iter().enumerate() {
            if let GradedTarget::Target { to, coeff } = t {
                m.set(to - 1, idx, coeff.clone());
            }
        }
        m
    }
}

impl fmt::Display for GradedMonodromy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .targets
            .iter()
            .enumerate()
            .map(|(idx, t)| match t {
                GradedTarget::Zero => format!("gr_{} -> 0", idx + 1),
                GradedTarget::Target { to, coeff } => {
                    format!("gr_{} -> {} gr_{}", idx + 1, coeff, to)
                }
            })
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// For each `i`: zero when `N(F_i) = N(F_{i-1})`; otherwise the minimal `j`
/// with `N(F_i)` inside `N(F_{i-1}) + F_j` together with the `v_j`
/// coefficient of the defect of `N(v_i)`. Only the coefficient class modulo
/// `F_{j-1}` is contractual; it is pinned by the flag representatives.
pub fn graded_monodromy(r: &Refinement) -> GradedMonodromy {
    let n = r.dim();
    let nmat = r.module().monodromy();
    let images: Vec<Vec<Rat>> = (1..=n).map(|i| nmat.apply(r.flag.vector(i))).collect();
    let n_step = |i: usize| Subspace::from_rows(n, &images[..i]);

    let mut targets = Vec::with_capacity(n);
    for i in 1..=n {
        let prev = n_step(i - 1);
        let cur = n_step(i);
        if cur == prev {
            targets.push(GradedTarget::Zero);
            continue;
        }
        let j = (1..=n)
            .find(|&j| prev.sum(r.step(j)).unwrap().contains_subspace(&cur))
            .expect("N(F_i) is contained in F_i");
        assert!(j < i, "graded monodromy must move strictly down the flag");
        // Solve N(v_i) = a + z with a in N(F_{i-1}) and z in F_j.
        let mut cols: Vec<Vec<Rat>> = images[..i - 1].to_vec();
        cols.extend(r.flag.vectors()[..j].iter().cloned());
        let mat = Matrix::from_rows(n, &cols).transpose();
        let sol = mat
            .solve(&images[i - 1])
            .expect("decomposition exists by choice of j");
        let coeff = sol[i - 1 + j - 1].clone();
        assert!(
            !coeff.is_zero(),
            "defect coefficient must be nonzero by minimality of j"
        );
        targets.push(GradedTarget::Target { to: j, coeff });
    }

    // Distinct sources map to distinct graded lines.
    let mut seen = vec![false; n + 1];
    for t in &targets {
        if let GradedTarget::Target { to, .. } = t {
            assert!(!seen[*to], "graded line hit twice");
            seen[*to] = true;
        }
    }
    GradedMonodromy { targets }
}

/// Pairs `(s, t_F(s))` read from the graded monodromy.
pub fn critical_indices(r: &Refinement) -> Vec<(usize, usize)> {
    graded_monodromy(r).critical_pairs()
}

/// Decomposition of the spectrum of a semisimple matrix, with projections
/// onto eigenspaces.
pub(crate) struct EigenSplit {
    pairs: Vec<(Rat, usize)>,
    owner: Vec<usize>,
    basis: Matrix,
    inv: Matrix,
}

impl EigenSplit {
    pub(crate) fn new(m: &Matrix) -> Option<EigenSplit> {
        let eigen = m.rational_eigenvalues().ok()?;
        let n = m.rows();
        let mut cols: Vec<Vec<Rat>> = Vec::new();
        let mut owner = Vec::new();
        let mut pairs = Vec::new();
        for (idx, (lambda, mult)) in eigen.into_iter().enumerate() {
            let space = m.eigenspace(&lambda);
            if space.len() != mult {
                return None; // not semisimple
            }
            for v in space {
                cols.push(v);
                owner.push(idx);
            }
            pairs.push((lambda, mult));
        }
        let basis = Matrix::from_rows(n, &cols).transpose();
        let inv = basis.inverse()?;
        Some(EigenSplit {
            pairs,
            owner,
            basis,
            inv,
        })
    }

    /// The component of `x` in the eigenspace of `lambda`.
    pub(crate) fn project(&self, x: &[Rat], lambda: &Rat) -> Vec<Rat> {
        let n = x.len();
        let coords = self.inv.apply(x);
        let mut out = vec![Rat::zero(); n];
        for (c, own) in self.owner.iter().enumerate() {
            if &self.pairs[*own].0 != lambda || coords[c].is_zero() {
                continue;
            }
            for (i, slot) in out.iter_mut().enumerate() {
                *slot += &coords[c] * self.basis.get(i, c);
            }
        }
        out
    }
}

fn normalize_leading(v: &[Rat]) -> Vec<Rat> {
    match v.iter().find(|x| !x.is_zero()) {
        None => v.to_vec(),
        Some(lead) => {
            let inv = lead.inv().unwrap();
            v.iter().map(|x| x * &inv).collect()
        }
    }
}

/// A basis `e_1..e_n` with `span(e_1..e_r) = F_r` and `phi(e_i) =
/// alpha_i e_i`, obtained by eigenprojection of the flag vectors and
/// normalized to leading coefficient one.
pub fn perfect_basis(r: &Refinement) -> Vec<Vec<Rat>> {
    let split = EigenSplit::new(r.module().phi()).expect("refinement requires semisimple phi");
    let n = r.dim();
    let mut basis = Vec::with_capacity(n);
    for i in 1..=n {
        let e = normalize_leading(&split.project(r.flag.vector(i), r.alpha(i)));
        assert!(
            r.step(i).contains(&e) && !r.step(i - 1).contains(&e),
            "eigenprojection left the flag step"
        );
        basis.push(e);
    }
    for i in 1..=n {
        debug_assert_eq!(&Subspace::from_rows(n, &basis[..i]), r.step(i));
    }
    basis
}

/// Filtration behaviour of one two-dimensional piece of an
/// s-decomposition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CaseKind {
    /// Two-dimensional down to the anchor weight, then the jump line
    /// `E(e_t + L e_s)`.
    One,
    /// The middle line is `E e_s`.
    Two,
    /// No intermediate line.
    Three,
}

/// A splitting `F_t/F_{s-1} = E e_s (+) L (+) E e_t` with its case data.
#[derive(Clone, Debug)]
pub struct SDecomposition {
    pub s: usize,
    pub t: usize,
    /// Coordinates on `F_t / F_{s-1}`.
    pub quotient: SubQuotient,
    /// Class of `e_s` in quotient coordinates.
    pub e_bar_s: Vec<Rat>,
    /// Class of `e_t` in quotient coordinates.
    pub e_bar_t: Vec<Rat>,
    /// Ambient representative of `e_t` with `phi(e_t) = alpha_t e_t`.
    pub e_t_ambient: Vec<Rat>,
    /// Ambient `e_s = N(e_t)`.
    pub e_s_ambient: Vec<Rat>,
    /// The middle summand, in quotient coordinates.
    pub middle: Subspace,
    pub case_sub: CaseKind,
    pub case_quot: CaseKind,
    pub k_prime_t: Option<i64>,
    pub k_prime_s: Option<i64>,
    pub l_dec: Option<Rat>,
    pub l_dec_prime: Option<Rat>,
    pub perfect: bool,
}

/// Deterministic construction choices for an s-decomposition. The two
/// strategies pick different hyperplane completions and, when the middle
/// allows it, different representatives of `e_t`; any perfect decomposition
/// yields the same invariant.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DecompositionStyle {
    Canonical,
    Alternative,
}

/// The canonical s-decomposition at a critical index.
pub fn s_decomposition(r: &Refinement, s: usize) -> Result<SDecomposition, RefineError> {
    s_decomposition_styled(r, s, DecompositionStyle::Canonical)
}

pub fn s_decomposition_styled(
    r: &Refinement,
    s: usize,
    style: DecompositionStyle,
) -> Result<SDecomposition, RefineError> {
    let gm = graded_monodromy(r);
    let t = gm.t_of(s).ok_or(RefineError::NotCritical(s))?;
    let n = r.dim();
    let nmat = r.module().monodromy();
    let split = EigenSplit::new(r.module().phi()).expect("semisimple");

    // A phi-eigenvector e_t of alpha_t in F_t \ F_{t-1} with
    // N(e_t) in F_s \ F_{s-1}.
    let images: Vec<Vec<Rat>> = (1..=t - 1).map(|l| nmat.apply(r.flag.vector(l))).collect();
    let mut cols = images.clone();
    cols.extend(r.flag.vectors()[..s].iter().cloned());
    let mat = Matrix::from_rows(n, &cols).transpose();
    let sol = mat
        .solve(&nmat.apply(r.flag.vector(t)))
        .expect("s is critical for the flag");
    let mut x = r.flag.vector(t).to_vec();
    for (l, b) in sol[..t - 1].iter().enumerate() {
        if b.is_zero() {
            continue;
        }
        for (xi, wi) in x.iter_mut().zip(r.flag.vector(l + 1)) {
            *xi -= b * wi;
        }
    }
    let e_t = normalize_leading(&split.project(&x, r.alpha(t)));
    assert!(r.step(t).contains(&e_t) && !r.step(t - 1).contains(&e_t));
    let e_s = nmat.apply(&e_t);
    assert!(
        r.step(s).contains(&e_s) && !r.step(s - 1).contains(&e_s),
        "N(e_t) must generate gr_s"
    );

    // Pass to Q = F_t / F_{s-1}.
    let q = SubQuotient::new(r.step(t).clone(), r.step(s - 1).clone());
    let phi_q = q.induced_map(r.module().phi());
    let n_q = q.induced_map(nmat);
    let mut e_bar_t = q.project(&e_t);
    let e_bar_s = q.project(&e_s);
    let l_tilde = q.project_subspace(r.step(t - 1));

    // Eigenspaces of phi on the middle band.
    let eigenspace_in = |lambda: &Rat| -> Subspace {
        let shifted = &phi_q - &Matrix::identity(q.dim()).scale(lambda);
        let ker = Subspace::from_rows(q.dim(), &shifted.nullspace());
        ker.intersect(&l_tilde).unwrap()
    };
    let alpha_s = r.alpha(s).clone();
    let alpha_t = r.alpha(t).clone();
    let band_s = eigenspace_in(&alpha_s);
    let band_t = eigenspace_in(&alpha_t);

    let image_rows: Vec<Vec<Rat>> = band_t.basis_rows().iter().map(|b| n_q.apply(b)).collect();
    let n_band_t = Subspace::from_rows(q.dim(), &image_rows);
    assert!(
        band_s.contains_subspace(&n_band_t),
        "N maps the alpha_t band into the alpha_s band"
    );
    assert!(
        !n_band_t.contains(&e_bar_s),
        "jump-line obstruction: e_s may not lie in N(L^alpha_t)"
    );

    // Codimension-one subspace of the alpha_s band containing N(band_t)
    // and avoiding e_s, completed greedily from echelon vectors.
    let mut hyperplane = n_band_t;
    let target_dim = band_s.dim().saturating_sub(1);
    let mut order = band_s.basis_rows();
    if style == DecompositionStyle::Alternative {
        order.reverse();
    }
    for u in order {
        if hyperplane.dim() == target_dim {
            break;
        }
        let cand = hyperplane.sum(&Subspace::line(&u)).unwrap();
        if cand.dim() == hyperplane.dim() && cand == hyperplane {
            continue;
        }
        if cand.dim() > hyperplane.dim() && !cand.contains(&e_bar_s) {
            hyperplane = cand;
        }
    }
    assert_eq!(hyperplane.dim(), target_dim, "hyperplane completion failed");

    let mut middle = hyperplane;
    for (lambda, _) in &split.pairs {
        if lambda == &alpha_s {
            continue;
        }
        middle = middle.sum(&eigenspace_in(lambda)).unwrap();
    }

    assert_eq!(
        middle.dim(),
        t - s - 1,
        "middle summand has the wrong dimension"
    );
    assert!(!middle.contains(&e_bar_s));
    assert_eq!(middle.sum(&Subspace::line(&e_bar_s)).unwrap(), l_tilde);
    for b in middle.basis_rows() {
        assert!(
            middle.contains(&phi_q.apply(&b)) && middle.contains(&n_q.apply(&b)),
            "middle summand must be stable"
        );
    }

    if style == DecompositionStyle::Alternative {
        // Shift e_t by a kernel vector of N inside the alpha_t band; the
        // decomposition data stays valid and the classes stay eigenvectors.
        let kernel = Subspace::from_rows(q.dim(), &n_q.nullspace());
        let shift_space = band_t.intersect(&kernel).unwrap();
        if let Some(l) = shift_space.basis_rows().first() {
            for (a, b) in e_bar_t.iter_mut().zip(l) {
                *a += b.clone();
            }
        }
    }

    Ok(classify_decomposition(
        r, s, t, q, e_bar_s, e_bar_t, e_t, e_s, middle,
    ))
}

/// Classifies a user-supplied decomposition `(e_s, middle, e_t)` of
/// `F_t/F_{s-1}` into its two case patterns and reads off the invariant
/// where the jump line exists. The decomposition axioms are re-verified,
/// so an object that is not actually an s-decomposition is refused
/// (panics with the violated condition).
#[allow(clippy::too_many_arguments)]
pub fn classify_decomposition(
    r: &Refinement,
    s: usize,
    t: usize,
    q: SubQuotient,
    e_bar_s: Vec<Rat>,
    e_bar_t: Vec<Rat>,
    e_t_ambient: Vec<Rat>,
    e_s_ambient: Vec<Rat>,
    middle: Subspace,
) -> SDecomposition {
    {
        let phi_q = q.induced_map(r.module().phi());
        let n_q = q.induced_map(r.module().monodromy());
        let scaled: Vec<Rat> = e_bar_t.iter().map(|x| x * r.alpha(t)).collect();
        assert_eq!(
            phi_q.apply(&e_bar_t),
            scaled,
            "e_t must be an alpha_t eigenvector"
        );
        assert_eq!(n_q.apply(&e_bar_t), e_bar_s, "N(e_t) must equal e_s");
        let f1 = q.project_subspace(r.step(s));
        assert_eq!(
            f1,
            Subspace::line(&e_bar_s),
            "e_s must span the first induced step"
        );
        let band = q.project_subspace(r.step(t - 1));
        assert_eq!(
            middle.sum(&Subspace::line(&e_bar_s)).unwrap(),
            band,
            "e_s and the middle must span the induced band"
        );
        for b in middle.basis_rows() {
            assert!(
                middle.contains(&phi_q.apply(&b)) && middle.contains(&n_q.apply(&b)),
                "middle summand must be phi,N-stable"
            );
        }
    }
    let jumps = r.module().filtration().jumps();
    let k_s = r.k(s);
    let k_t = r.k(t);

    // Filtration of Q at each jump.
    let fil_q: Vec<(i64, Subspace)> = jumps
        .iter()
        .map(|&j| (j, q.project_subspace(&r.module().fil_at(j))))
        .collect();

    // Piece 1: the sub E e_s + E e_t with the intersected filtration.
    let w_sub = Subspace::from_rows(q.dim(), &[e_bar_s.clone(), e_bar_t.clone()]);
    assert_eq!(w_sub.dim(), 2);
    let chain_sub: Vec<(i64, Subspace)> = fil_q
        .iter()
        .map(|(j, f)| (*j, f.intersect(&w_sub).unwrap()))
        .collect();
    let (case_sub, k_prime_t, l_dec) =
        classify_piece(&chain_sub, &e_bar_s, &e_bar_t, k_s, true, q.dim());

    // Piece 2: the quotient of Q by the middle, with the image filtration.
    let ql = SubQuotient::new(Subspace::full(q.dim()), middle.clone());
    let es_q = ql.project(&e_bar_s);
    let et_q = ql.project(&e_bar_t);
    let chain_quot: Vec<(i64, Subspace)> = fil_q
        .iter()
        .map(|(j, f)| (*j, ql.project_subspace(f)))
        .collect();
    let (case_quot, k_prime_s, l_dec_prime) =
        classify_piece(&chain_quot, &es_q, &et_q, k_t, false, ql.dim());

    let perfect = case_sub == CaseKind::One
        && case_quot == CaseKind::One
        && k_prime_s.unwrap() < k_prime_t.unwrap();
    if perfect {
        assert_eq!(
            l_dec, l_dec_prime,
            "the two jump-line readings must agree on a perfect decomposition"
        );
        assert!(k_s <= k_prime_s.unwrap() && k_prime_t.unwrap() <= k_t);
    }
    SDecomposition {
        s,
        t,
        quotient: q,
        e_bar_s,
        e_bar_t,
        e_t_ambient,
        e_s_ambient,
        middle,
        case_sub,
        case_quot,
        k_prime_t,
        k_prime_s,
        l_dec,
        l_dec_prime,
        perfect,
    }
}

/// Reads the case pattern off the chain of filtration steps of one
/// two-dimensional piece. `anchor` is `k_s` for the sub piece and `k_t`
/// for the quotient piece.
fn classify_piece(
    chain: &[(i64, Subspace)],
    e_s: &[Rat],
    e_t: &[Rat],
    anchor: i64,
    sub_piece: bool,
    ambient: usize,
) -> (CaseKind, Option<i64>, Option<Rat>) {
    let mut last_two: Option<i64> = None;
    let mut last_one: Option<i64> = None;
    let mut line: Option<Subspace> = None;
    let mut prev_dim = 2;
    for (j, space) in chain {
        let d = space.dim();
        assert!(d <= prev_dim, "filtration chain must be non-increasing");
        prev_dim = d;
        match d {
            2 => last_two = Some(*j),
            1 => {
                if let Some(existing) = &line {
                    assert_eq!(existing, space, "intermediate line must be constant");
                } else {
                    line = Some(space.clone());
                }
                last_one = Some(*j);
            }
            _ => {}
        }
    }
    let last_two = last_two.expect("piece filtration must start full");

    match line {
        None => {
            assert_eq!(
                last_two, anchor,
                "two-dimensional part must persist to the anchor weight"
            );
            (CaseKind::Three, None, None)
        }
        Some(line) => {
            let one_end = last_one.unwrap();
            if line == Subspace::line(e_s) {
                if sub_piece {
                    assert_eq!(one_end, anchor, "line part must end at k_s");
                    assert!(last_two < anchor);
                } else {
                    assert_eq!(last_two, anchor, "two-dimensional part must end at k_t");
                    assert!(one_end > anchor);
                }
                (
                    CaseKind::Two,
                    Some(if sub_piece { last_two } else { one_end }),
                    None,
                )
            } else {
                // Jump line with a nonzero e_t component.
                let cols = Matrix::from_rows(ambient, &[e_s.to_vec(), e_t.to_vec()]).transpose();
                let coeffs = cols
                    .solve(&line.basis_rows()[0])
                    .expect("line lies in the span of e_s, e_t");
                assert!(!coeffs[1].is_zero());
                let l = &coeffs[0] / &coeffs[1];
                if sub_piece {
                    assert_eq!(last_two, anchor, "two-dimensional part must end at k_s");
                    assert!(one_end > anchor);
                    (CaseKind::One, Some(one_end), Some(l))
                } else {
                    assert_eq!(one_end, anchor, "line part must end at k_t");
                    assert!(last_two < anchor);
                    (CaseKind::One, Some(last_two), Some(l))
                }
            }
        }
    }
}

/// Strong-criticality verdict at a critical index.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CriticalVerdict {
    StronglyCritical(Rat),
    NotStronglyCritical,
    /// The deterministic decompositions were imperfect and the defining
    /// existential condition could not be decided.
    NotDetected,
}

#[derive(Clone, Debug)]
pub struct LInvariantEntry {
    pub s: usize,
    pub t: usize,
    pub verdict: CriticalVerdict,
    pub decomposition: SDecomposition,
}

#[derive(Clone, Debug, Default)]
pub struct LInvariantReport {
    pub entries: Vec<LInvariantEntry>,
}

impl LInvariantReport {
    pub fn entry(&self, s: usize) -> Option<&LInvariantEntry> {
        self.entries.iter().find(|e| e.s == s)
    }

    pub fn l_value(&self, s: usize) -> Option<&Rat> {
        match self.entry(s).map(|e| &e.verdict) {
            Some(CriticalVerdict::StronglyCritical(l)) => Some(l),
            _ => None,
        }
    }
}

/// Decides strong criticality of `s`. For adjacent pairs (`t = s + 1`) the
/// canonical decomposition is essentially unique, so the verdict is exact
/// and agrees with `k_s < k_t`. A perfect decomposition always forces
/// `k_s < k_t`, so `k_s >= k_t` is a definite no for every gap. For wider
/// pairs with `k_s < k_t` the canonical decomposition is tried first and
/// the dual refinement's canonical decomposition second (the invariant
/// transfers unchanged); if both are imperfect the result is
/// `NotDetected`, never a wrong definite answer.
pub fn strong_criticality(r: &Refinement, s: usize) -> Result<LInvariantEntry, RefineError> {
    let dec = s_decomposition(r, s)?;
    let t = dec.t;
    if t == s + 1 {
        let verdict = if dec.perfect {
            CriticalVerdict::StronglyCritical(dec.l_dec.clone().unwrap())
        } else {
            CriticalVerdict::NotStronglyCritical
        };
        debug_assert_eq!(dec.perfect, r.k(s) < r.k(t));
        return Ok(LInvariantEntry {
            s,
            t,
            verdict,
            decomposition: dec,
        });
    }
    if r.k(s) >= r.k(t) {
        debug_assert!(!dec.perfect);
        return Ok(LInvariantEntry {
            s,
            t,
            verdict: CriticalVerdict::NotStronglyCritical,
            decomposition: dec,
        });
    }
    if dec.perfect {
        let l = dec.l_dec.clone().unwrap();
        return Ok(LInvariantEntry {
            s,
            t,
            verdict: CriticalVerdict::StronglyCritical(l),
            decomposition: dec,
        });
    }
    let n = r.dim();
    let dual = dual_refinement(r);
    let dual_dec = s_decomposition(&dual, n + 1 - t)?;
    if dual_dec.perfect {
        let l = dual_dec.l_dec.clone().unwrap();
        return Ok(LInvariantEntry {
            s,
            t,
            verdict: CriticalVerdict::StronglyCritical(l),
            decomposition: dec,
        });
    }
    Ok(LInvariantEntry {
        s,
        t,
        verdict: CriticalVerdict::NotDetected,
        decomposition: dec,
    })
}

/// Strong-criticality verdicts for every critical index.
pub fn l_invariant_report(r: &Refinement) -> LInvariantReport {
    let entries = critical_indices(r)
        .into_iter()
        .map(|(s, _)| strong_criticality(r, s).expect("s is critical"))
        .collect();
    LInvariantReport { entries }
}

/// Constructs an s-perfect basis at a strongly critical index: a perfect
/// basis whose induced decomposition is perfect, with `N(e_t) = e_s` and
/// vanishing `e_s`-coefficients of `N(e_i)` for `i > t`.
pub fn s_perfect_basis(r: &Refinement, s: usize) -> Result<Vec<Vec<Rat>>, RefineError> {
    let entry = strong_criticality(r, s)?;
    if !matches!(entry.verdict, CriticalVerdict::StronglyCritical(_)) {
        return Err(RefineError::NotStronglyCritical(s));
    }
    let t = entry.t;
    let n = r.dim();

    if !entry.decomposition.perfect {
        // Detected through duality: build the dual basis and flip back.
        let dual = dual_refinement(r);
        let dual_basis = s_perfect_basis(&dual, n + 1 - t)?;
        let mut star_cols: Vec<Vec<Rat>> = vec![Vec::new(); n];
        for j in 1..=n {
            let mut v = dual_basis[n - j].clone();
            if j == s {
                for x in v.iter_mut() {
                    *x = -x.clone();
                }
            }
            star_cols[j - 1] = v;
        }
        let star = Matrix::from_rows(n, &star_cols).transpose();
        let basis_mat = star
            .transpose()
            .inverse()
            .expect("dual basis is invertible");
        let basis: Vec<Vec<Rat>> = (0..n).map(|i| basis_mat.col(i)).collect();
        assert!(is_s_perfect(r, s, &basis).is_ok());
        return Ok(basis);
    }

    let dec = &entry.decomposition;
    let split = EigenSplit::new(r.module().phi()).expect("semisimple");
    let q = &dec.quotient;
    let phi_q = q.induced_map(r.module().phi());
    let q_split = EigenSplit::new(&phi_q).expect("induced map stays semisimple");
    let nmat = r.module().monodromy();

    let mut basis: Vec<Vec<Rat>> = Vec::with_capacity(n);
    // Perfect vectors below s.
    for i in 1..s {
        basis.push(normalize_leading(
            &split.project(r.flag.vector(i), r.alpha(i)),
        ));
    }
    basis.push(dec.e_s_ambient.clone());

    // Middle vectors: perfect basis of the induced refinement on the
    // middle summand, lifted to eigenvectors inside the flag steps.
    let mut prev = Subspace::zero(q.dim());
    for i in s + 1..t {
        let li = dec
            .middle
            .intersect(&q.project_subspace(r.step(i)))
            .unwrap();
        assert_eq!(li.dim(), i - s, "middle flag step has the wrong dimension");
        let u = li
            .basis_rows()
            .into_iter()
            .find(|row| !prev.contains(row))
            .expect("strictly increasing flag");
        let e_bar = q_split.project(&u, r.alpha(i));
        assert!(li.contains(&e_bar) && !prev.contains(&e_bar));
        // Lift inside F_i.
        let proj_cols: Vec<Vec<Rat>> = (1..=i).map(|m| q.project(r.flag.vector(m))).collect();
        let mat = Matrix::from_rows(q.dim(), &proj_cols).transpose();
        let sol = mat.solve(&e_bar).expect("class lies in the image of F_i");
        let mut y = vec![Rat::zero(); n];
        for (c, m) in sol.iter().zip(1..=i) {
            for (yi, vi) in y.iter_mut().zip(r.flag.vector(m)) {
                *yi += c * vi;
            }
        }
        let e_i = split.project(&y, r.alpha(i));
        assert_eq!(q.project(&e_i), e_bar);
        assert!(r.step(i).contains(&e_i) && !r.step(i - 1).contains(&e_i));
        basis.push(e_i);
        prev = li;
    }
    basis.push(dec.e_t_ambient.clone());

    // Above t: eigenprojections with the recursive correction killing the
    // e_s-coefficient of N(e_i).
    for i in t + 1..=n {
        let e_prime = split.project(r.flag.vector(i), r.alpha(i));
        let span = Matrix::from_rows(n, &basis).transpose();
        let mu = span
            .solve(&nmat.apply(&e_prime))
            .expect("N(e_i) lies in F_{i-1}");
        let mu_s = mu[s - 1].clone();
        let e_i = if mu_s.is_zero() {
            e_prime
        } else {
            assert_eq!(
                r.alpha(i),
                r.alpha(t),
                "corrigible only within the alpha_t eigenspace"
            );
            let mut v = e_prime;
            for (x, w) in v.iter_mut().zip(&basis[t - 1]) {
                *x -= &mu_s * w;
            }
            v
        };
        basis.push(e_i);
    }

    assert!(
        is_s_perfect(r, s, &basis).is_ok(),
        "construction must satisfy the s-perfect contract"
    );
    Ok(basis)
}

/// Verifies the s-perfect conditions for an explicit basis; `Err` carries
/// the first failed condition.
pub fn is_s_perfect(r: &Refinement, s: usize, basis: &[Vec<Rat>]) -> Result<(), String> {
    let n = r.dim();
    let gm = graded_monodromy(r);
    let t = gm.t_of(s).ok_or("s is not critical")?;
    if basis.len() != n {
        return Err("wrong basis length".into());
    }
    for i in 1..=n {
        if Subspace::from_rows(n, &basis[..i]) != *r.step(i) {
            return Err(format!("span(e_1..e_{}) differs from F_{}", i, i));
        }
        let img = r.module().phi().apply(&basis[i - 1]);
        let scaled: Vec<Rat> = basis[i - 1].iter().map(|x| x * r.alpha(i)).collect();
        if img != scaled {
            return Err(format!("e_{} is not an eigenvector of alpha_{}", i, i));
        }
    }
    let n_et = r.module().monodromy().apply(&basis[t - 1]);
    if n_et != basis[s - 1] {
        return Err("N(e_t) != e_s".into());
    }
    let span = Matrix::from_rows(n, basis).transpose();
    for i in t + 1..=n {
        let lam = span
            .solve(&r.module().monodromy().apply(&basis[i - 1]))
            .ok_or("N(e_i) outside the basis span")?;
        if !lam[s - 1].is_zero() {
            return Err(format!("lambda_{},{} != 0", i, s));
        }
    }
    for i in s + 1..t {
        let lam = span
            .solve(&r.module().monodromy().apply(&basis[i - 1]))
            .ok_or("N(e_i) outside the basis span")?;
        if !lam[s - 1].is_zero() {
            return Err(format!("lambda_{},{} != 0 inside the middle band", i, s));
        }
    }
    // The induced decomposition must be a perfect s-decomposition.
    let q = SubQuotient::new(r.step(t).clone(), r.step(s - 1).clone());
    let e_bar_s = q.project(&basis[s - 1]);
    let e_bar_t = q.project(&basis[t - 1]);
    let middle_rows: Vec<Vec<Rat>> = (s + 1..t).map(|i| q.project(&basis[i - 1])).collect();
    let middle = Subspace::from_rows(q.dim(), &middle_rows);
    let dec = classify_decomposition(
        r,
        s,
        t,
        q,
        e_bar_s,
        e_bar_t,
        basis[t - 1].clone(),
        basis[s - 1].clone(),
        middle,
    );
    if !dec.perfect {
        return Err("induced decomposition is not perfect".into());
    }
    Ok(())
}

/// The dual refinement: flag step `i` is the annihilator of `F_{n-i}`,
/// realized by the reversed dual basis of the flag vectors.
pub fn dual_refinement(r: &Refinement) -> Refinement {
    let n = r.dim();
    let dual_mod = r.module().dual();
    let e = Matrix::from_rows(n, r.flag.vectors()).transpose();
    let e_inv = e.inverse().expect("flag vectors are independent");
    let vectors: Vec<Vec<Rat>> = (0..n).map(|i| e_inv.row(n - 1 - i)).collect();
    let flag = Flag::new(n, vectors).expect("dual flag vectors are independent");
    let dual = Refinement::new(dual_mod, flag).expect("dual flag is stable");
    for i in 1..=n {
        debug_assert_eq!(dual.step(i), &r.step(n - i).annihilator());
        debug_assert_eq!(dual.alpha(i), &r.alpha(n + 1 - i).inv().unwrap());
        debug_assert_eq!(dual.k(i), -r.k(n + 1 - i));
    }
    dual
}

/// The reversed dual basis with the sign flipped at position `s`: sent
/// through [`is_s_perfect`] on the dual refinement at index `n + 1 - t`,
/// this certifies the duality of s-perfect bases.
pub fn flip_dual_basis(basis: &[Vec<Rat>], s: usize) -> Vec<Vec<Rat>> {
    let n = basis.len();
    let e = Matrix::from_rows(n, basis).transpose();
    let e_inv = e.inverse().expect("basis is invertible");
    (0..n)
        .map(|idx| {
            let primal = n - idx; // dual position idx+1 carries e*_{n+1-(idx+1)}
            let mut row = e_inv.row(primal - 1);
            if primal == s {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            row
        })
        .collect()
}

/// All full flags of phi,N-stable subspaces when the eigenvalues are
/// pairwise distinct: orderings of the eigenlines whose prefixes are
/// N-closed, in lexicographic order of the sorted-eigenvalue indices.
pub fn enumerate_refinements(m: &FilteredPhiNModule) -> Result<Vec<Flag>, ModuleError> {
    let lines = m.eigenlines()?;
    let n = lines.len();
    let mut flags = Vec::new();
    let mut perm: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    fn recurse(
        m: &FilteredPhiNModule,
        lines: &[(Rat, Vec<Rat>)],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        span: &Subspace,
        flags: &mut Vec<Flag>,
    ) {
        let n = lines.len();
        if perm.len() == n {
            let vectors: Vec<Vec<Rat>> = perm.iter().map(|&i| lines[i].1.clone()).collect();
            flags.push(Flag::new(n, vectors).expect("eigenlines are independent"));
            return;
        }
        for i in 0..n {
            if used[i] {
                continue;
            }
            let next = span.sum(&Subspace::line(&lines[i].1)).unwrap();
            if !next.contains(&m.monodromy().apply(&lines[i].1)) {
                continue;
            }
            used[i] = true;
            perm.push(i);
            recurse(m, lines, perm, used, &next, flags);
            perm.pop();
            used[i] = false;
        }
    }
    recurse(
        m,
        &lines,
        &mut perm,
        &mut used,
        &Subspace::zero(n),
        &mut flags,
    );
    Ok(flags)
}
