//! Dense matrices over `Rat` with the column-action convention: a linear map
//! sends basis vector `j` to the column-`j` combination of basis vectors, so
//! composition is the ordinary matrix product.

use crate::poly;
use crate::rat::Rat;
use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn diagonal(entries: &[Rat]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zero(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must share one width;
    /// `cols` disambiguates the empty case.
    pub fn from_rows(cols: usize, rows: &[Vec<Rat>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row.iter().cloned());
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Matrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Rat> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, c: &Rat) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&Rat::from_int(-1))
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for (j, vj) in v.iter().enumerate() {
                    if !vj.is_zero() {
                        acc += self.get(i, j) * vj;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, mut k: u32) -> Matrix {
        assert!(self.is_square());
        let mut acc = Matrix::identity(self.rows);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Kronecker product in the basis `e_i (x) f_j` ordered by `(i, j)`.
    pub fn kronecker(&self, other: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            let (i1, i2) = (i / other.rows, i % other.rows);
            let (j1, j2) = (j / other.cols, j % other.cols);
            self.get(i1, j1) * other.get(i2, j2)
        })
    }

    pub fn trace(&self) -> Rat {
        assert!(self.is_square());
        let mut t = Rat::zero();
        for i in 0..self.rows {
            t += self.get(i, i).clone();
        }
        t
    }

    /// In-place Gauss-Jordan to reduced row echelon form.
    /// Returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(pr, r);
            let inv = self.get(r, c).inv().unwrap();
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let factor = self.get(i, c).clone();
                for j in c..self.cols {
                    let v = self.get(i, j) - &(&factor * self.get(r, j));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> Rat {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Rat::zero();
            };
            if pr != c {
                m.swap_rows(pr, c);
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det *= pivot.clone();
            let inv = pivot.inv().unwrap();
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c) * &inv;
                for j in c..n {
                    let v = m.get(i, j) - &(&factor * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Rat::one()
            } else {
                Rat::zero()
            }
        });
        let pivots = aug.rref_in_place();
        if pivots.len() != n || pivots.iter().enumerate().any(|(k, &c)| c != k) {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| aug.get(i, j + n).clone()))
    }

    /// A basis (as rows) of `{ x : self * x = 0 }`.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &c) in pivots.iter().enumerate() {
                v[c] = Some(row);
            }
            v
        };
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut x = vec![Rat::zero(); self.cols];
            x[free] = Rat::one();
            for (&pc, row) in pivots.iter().zip(0..) {
                x[pc] = -r.get(row, free).clone();
            }
            basis.push(x);
        }
        basis
    }

    /// Solves `self * x = b` for a column vector, returning the particular
    /// solution with every free variable set to zero.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.rows, "dimension mismatch");
        let mut aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (row, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(row, self.cols).clone();
        }
        Some(x)
    }

    /// Coefficients `c_0..c_n` of `det(x*I - self) = sum c_k x^k`, monic,
    /// by the Faddeev-LeVerrier recursion.
    pub fn charpoly(&self) -> Vec<Rat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[n] = Rat::one();
        let mut m = Matrix::identity(n);
        for k in 1..=n {
            m = self * &m;
            let c = -(m.trace() / Rat::from_u64(k as u64));
            coeffs[n - k] = c.clone();
            for i in 0..n {
                let v = m.get(i, i) + &c;
                m.set(i, i, v);
            }
        }
        coeffs
    }

    /// The eigenvalues of the matrix with algebraic multiplicities, provided
    /// the characteristic polynomial splits over the rationals. Sorted by
    /// eigenvalue.
    pub fn rational_eigenvalues(&self) -> Result<Vec<(Rat, usize)>, EigenvalueError> {
        let roots = poly::rational_roots(&self.charpoly())
            .map_err(|_| EigenvalueError::FactorizationFailed)?;
        let total: usize = roots.iter().map(|(_, m)| m).sum();
        if total != self.rows {
            return Err(EigenvalueError::DoesNotSplit);
        }
        Ok(roots)
    }

    /// Whether the matrix is diagonalizable with all eigenvalues rational.
    pub fn is_semisimple(&self) -> Result<bool, EigenvalueError> {
        let eigen = self.rational_eigenvalues()?;
        for (lambda, mult) in &eigen {
            let shifted = self - &Matrix::identity(self.rows).scale(lambda);
            if shifted.rank() != self.rows - mult {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Eigenspace of `lambda` as a list of basis rows.
    pub fn eigenspace(&self, lambda: &Rat) -> Vec<Vec<Rat>> {
        let shifted = self - &Matrix::identity(self.rows).scale(lambda);
        shifted.nullspace()
    }

    /// Row-major flattening, used for deterministic tie-breaking.
    pub fn flat(&self) -> &[Rat] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EigenvalueError {
    #[error("characteristic polynomial does not split over the rationals")]
    DoesNotSplit,
    #[error("could not factor the characteristic polynomial")]
    FactorizationFailed,
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + &(a * rhs.get(k, j));
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rat::from_int(x)).collect())
            .collect();
        Matrix::from_rows(cols, &rows)
    }

    #[test]
    fn mul_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Matrix::identity(2));
        assert_eq!(a.det(), Rat::from_int(1));
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert!(a.inverse().is_none());
        assert_eq!(a.det(), Rat::zero());
        assert_eq!(a.rank(), 1);
    }

    #[test]
    fn nullspace_dimensions() {
        let a = m(&[&[1, 2, 3]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(a.apply(v).iter().all(Rat::is_zero));
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[1, 2], &[2, 4]]);
        let sol = a.solve(&[Rat::from_int(3), Rat::from_int(6)]).unwrap();
        assert_eq!(a.apply(&sol), vec![Rat::from_int(3), Rat::from_int(6)]);
        assert!(a.solve(&[Rat::from_int(3), Rat::from_int(7)]).is_none());
    }

    #[test]
    fn charpoly_of_companion() {
        // x^2 - x - 1
        let a = m(&[&[0, 1], &[1, 1]]);
        let cp = a.charpoly();
        assert_eq!(
            cp,
            vec![Rat::from_int(-1), Rat::from_int(-1), Rat::from_int(1)]
        );
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let a = Matrix::diagonal(&[Rat::new(1, 2), Rat::from_int(1), Rat::from_int(1)]);
        let eig = a.rational_eigenvalues().unwrap();
        assert_eq!(eig, vec![(Rat::new(1, 2), 1), (Rat::from_int(1), 2)]);
        assert!(a.is_semisimple().unwrap());
    }

    #[test]
    fn non_semisimple_detected() {
        let a = m(&[&[1, 1], &[0, 1]]);
        assert!(!a.is_semisimple().unwrap());
    }

    #[test]
    fn irrational_spectrum_detected() {
        // x^2 - 2
        let a = m(&[&[0, 2], &[1, 0]]);
        assert_eq!(a.rational_eigenvalues(), Err(EigenvalueError::DoesNotSplit));
    }

    #[test]
    fn kronecker_shape_and_values() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        let k = a.kronecker(&b);
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert_eq!(k.get(0, 1), &Rat::from_int(1));
        assert_eq!(k.get(0, 3), &Rat::from_int(2));
    }
}
