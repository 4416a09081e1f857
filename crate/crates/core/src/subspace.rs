//! Canonical subspaces, full flags and subquotient coordinates.
//!
//! A `Subspace` stores the unique reduced-echelon basis of its row space, so
//! two subspaces are equal as sets exactly when the stored bases coincide.

use crate::matrix::Matrix;
use crate::rat::Rat;
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubspaceError {
    #[error("ambient dimensions differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
}

impl Subspace {
    /// The row space of the given vectors in canonical reduced echelon form.
    /// An empty list yields the zero subspace.
    pub fn from_rows(ambient: usize, rows: &[Vec<Rat>]) -> Self {
        for r in rows {
            assert_eq!(r.len(), ambient, "row width differs from ambient dimension");
        }
        let mut m = Matrix::from_rows(ambient, rows);
        let pivots = m.rref_in_place();
        let basis = Matrix::from_rows(
            ambient,
            &(0..pivots.len()).map(|i| m.row(i)).collect::<Vec<_>>(),
        );
        Subspace { ambient, basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace::from_rows(ambient, &[])
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::identity(ambient),
        }
    }

    pub fn line(v: &[Rat]) -> Self {
        Subspace::from_rows(v.len(), &[v.to_vec()])
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// The canonical echelon basis rows.
    pub fn basis_rows(&self) -> Vec<Vec<Rat>> {
        self.basis.row_vecs()
    }

    pub fn basis_matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.solve_in_span(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis_rows().iter().all(|v| self.contains(v))
    }

    /// Coefficients of `v` over the canonical basis, or `None` when `v` is
    /// not a member.
    pub fn solve_in_span(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(v.len(), self.ambient, "dimension mismatch");
        // With an echelon basis the candidate coefficients can be read off
        // the pivot columns directly; a final comparison decides membership.
        let coeffs: Vec<Rat> = self.pivots().map(|c| v[c].clone()).collect();
        let mut rebuilt = vec![Rat::zero(); self.ambient];
        for (c, row) in coeffs.iter().zip(self.basis.row_vecs()) {
            for (acc, x) in rebuilt.iter_mut().zip(row) {
                *acc += c * &x;
            }
        }
        if rebuilt.as_slice() == v {
            Some(coeffs)
        } else {
            None
        }
    }

    /// Pivot column of each basis row; rows are already reduced echelon,
    /// so this is the position of the leading one.
    fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.basis.rows()).map(move |r| {
            (0..self.ambient)
                .find(|&c| !self.basis.get(r, c).is_zero())
                .expect("echelon basis has no zero rows")
        })
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, SubspaceError> {
        if self.ambient != other.ambient {
            return Err(SubspaceError::AmbientMismatch(self.ambient, other.ambient));
        }
        let mut rows = self.basis_rows();
        rows.extend(other.basis_rows());
        Ok(Subspace::from_rows(self.ambient, &rows))
    }

    /// Intersection computed through annihilator duality:
    /// `ann(A meet B) = ann(A) + ann(B)`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, SubspaceError> {
        if self.ambient != other.ambient {
            return Err(SubspaceError::AmbientMismatch(self.ambient, other.ambient));
        }
        Ok(self.annihilator().sum(&other.annihilator())?.annihilator())
    }

    /// The space of functionals vanishing on `self`, in dual coordinates
    /// for the standard pairing.
    pub fn annihilator(&self) -> Subspace {
        let rows = self.basis.nullspace();
        Subspace::from_rows(self.ambient, &rows)
    }

    /// Deterministic total order: by dimension, then lexicographically on
    /// the canonical basis entries.
    pub fn cmp_canonical(&self, other: &Subspace) -> Ordering {
        self.dim()
            .cmp(&other.dim())
            .then_with(|| self.basis.flat().cmp(other.basis.flat()))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis_rows()
            .iter()
            .map(|r| {
                let entries: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                format!("({})", entries.join(","))
            })
            .collect();
        write!(f, "span{{{}}} in dim {}", rows.join(", "), self.ambient)
    }
}

/// A full flag given by ordered vectors `v_1..v_n`; step `i` is
/// `span(v_1..v_i)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Flag {
    ambient: usize,
    vectors: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlagError {
    #[error("expected {expected} vectors of width {expected}, got {got}")]
    WrongShape { expected: usize, got: usize },
    #[error("flag vectors are linearly dependent")]
    Dependent,
}

impl Flag {
    pub fn new(ambient: usize, vectors: Vec<Vec<Rat>>) -> Result<Self, FlagError> {
        if vectors.len() != ambient || vectors.iter().any(|v| v.len() != ambient) {
            return Err(FlagError::WrongShape {
                expected: ambient,
                got: vectors.len(),
            });
        }
        if Matrix::from_rows(ambient, &vectors).rank() != ambient {
            return Err(FlagError::Dependent);
        }
        Ok(Flag { ambient, vectors })
    }

    pub fn standard(ambient: usize) -> Self {
        let vectors = (0..ambient)
            .map(|i| {
                let mut v = vec![Rat::zero(); ambient];
                v[i] = Rat::one();
                v
            })
            .collect();
        Flag { ambient, vectors }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vectors(&self) -> &[Vec<Rat>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Rat] {
        &self.vectors[i - 1]
    }

    /// `span(v_1..v_i)`; `step(0)` is the zero subspace.
    pub fn step(&self, i: usize) -> Subspace {
        Subspace::from_rows(self.ambient, &self.vectors[..i])
    }

    pub fn steps(&self) -> Vec<Subspace> {
        (0..=self.ambient).map(|i| self.step(i)).collect()
    }
}

/// Coordinates on `num / den` for `den` contained in `num`; representatives
/// are the echelon basis vectors of `num` independent modulo `den`.
#[derive(Clone, Debug)]
pub struct SubQuotient {
    num: Subspace,
    den: Subspace,
    reps: Vec<Vec<Rat>>,
}

impl SubQuotient {
    pub fn new(num: Subspace, den: Subspace) -> Self {
        assert!(
            num.contains_subspace(&den),
            "denominator not contained in numerator"
        );
        let mut reps = Vec::new();
        let mut span = den.clone();
        for row in num.basis_rows() {
            if span.contains(&row) {
                continue;
            }
            span = span.sum(&Subspace::line(&row)).unwrap();
            reps.push(row);
        }
        debug_assert_eq!(reps.len(), num.dim() - den.dim());
        SubQuotient { num, den, reps }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn num(&self) -> &Subspace {
        &self.num
    }

    pub fn den(&self) -> &Subspace {
        &self.den
    }

    /// Coordinates of the class of `x` (which must lie in `num`).
    pub fn project(&self, x: &[Rat]) -> Vec<Rat> {
        // Solve x = (den part) + sum c_i rep_i.
        let mut cols: Vec<Vec<Rat>> = self.den.basis_rows();
        cols.extend(self.reps.iter().cloned());
        let mat = Matrix::from_rows(self.num.ambient_dim(), &cols).transpose();
        let sol = mat.solve(x).expect("vector not in the numerator subspace");
        sol[self.den.dim()..].to_vec()
    }

    /// The canonical representative `sum c_i rep_i` of a class.
    pub fn lift(&self, coords: &[Rat]) -> Vec<Rat> {
        assert_eq!(coords.len(), self.dim());
        let mut out = vec![Rat::zero(); self.num.ambient_dim()];
        for (c, rep) in coords.iter().zip(&self.reps) {
            for (acc, x) in out.iter_mut().zip(rep) {
                *acc += c * x;
            }
        }
        out
    }

    /// The image in quotient coordinates of a subspace of the ambient space.
    pub fn project_subspace(&self, s: &Subspace) -> Subspace {
        let rows: Vec<Vec<Rat>> = s
            .intersect(&self.num)
            .unwrap()
            .basis_rows()
            .iter()
            .map(|v| self.project(v))
            .collect();
        Subspace::from_rows(self.dim(), &rows)
    }

    /// The matrix of a linear map on quotient coordinates. The map must
    /// stabilize both `num` and `den`.
    pub fn induced_map(&self, ambient_map: &Matrix) -> Matrix {
        let n = self.dim();
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let mut coords = vec![Rat::zero(); n];
            coords[i] = Rat::one();
            let image = ambient_map.apply(&self.lift(&coords));
            cols.push(self.project(&image));
        }
        Matrix::from_rows(n, &cols).transpose()
    }
}
