//! Dense matrices over a [`FiniteField`] and subspace enumeration.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::field::{Elem, FieldMorphism, FiniteField};

#[derive(Clone)]
pub struct Matrix {
    field: Arc<FiniteField>,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|r| self.row(r)))
            .finish()
    }
}

impl Matrix {
    pub fn zero(field: &Arc<FiniteField>, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Arc<FiniteField>, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: &Arc<FiniteField>, rows: &[Vec<Elem>]) -> Result<Self, Error> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch);
        }
        if rows.iter().flatten().any(|&x| x >= field.order()) {
            return Err(Error::InvalidInput("matrix entry outside the field".into()));
        }
        Ok(Matrix {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_columns(field: &Arc<FiniteField>, cols: &[Vec<Elem>]) -> Result<Self, Error> {
        Ok(Self::from_rows(field, cols)?.transpose())
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        (0..self.rows)
            .map(|r| self.field.dot(self.row(r), v))
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, Error> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch);
        }
        let f = &self.field;
        let mut out = Self::zero(f, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0;
                for k in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(r, k), other.get(k, c)));
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Elem) -> Matrix {
        let mut m = self.clone();
        for x in &mut m.data {
            *x = self.field.mul(c, *x);
        }
        m
    }

    /// Applies a field morphism entrywise, landing in its target field.
    pub fn map_entries(&self, sigma: &FieldMorphism) -> Matrix {
        Matrix {
            field: sigma.target().clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| sigma.apply(x)).collect(),
        }
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                m.set(r, j, f.mul(inv, m.get(r, j)));
            }
            for i in 0..self.rows {
                let factor = m.get(i, c);
                if i != r && factor != 0 {
                    for j in 0..self.cols {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Matrix, Error> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch);
        }
        let n = self.rows;
        let mut aug = Self::zero(&self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, 1);
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::NoInverse);
        }
        let mut inv = Self::zero(&self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, red.get(r, n + c));
            }
        }
        Ok(inv)
    }

    /// A basis of the right kernel `{v : Mv = 0}`, one free variable per vector.
    pub fn kernel(&self) -> Vec<Vec<Elem>> {
        let f = &self.field;
        let (red, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0; self.cols];
                v[fc] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(red.get(r, fc));
                }
                v
            })
            .collect()
    }

    /// One solution of `Mx = b` together with a kernel basis, or `None`.
    pub fn solve(&self, b: &[Elem]) -> Option<(Vec<Elem>, Vec<Vec<Elem>>)> {
        let n = self.cols;
        let mut aug = Self::zero(&self.field, self.rows, n + 1);
        for (r, &br) in b.iter().enumerate().take(self.rows) {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n, br);
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&n) {
            return None;
        }
        let mut x = vec![0; n];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = red.get(r, n);
        }
        Some((x, self.kernel()))
    }

    /// Every `rows x cols` matrix, in row-major lexicographic order of entries.
    pub fn enumerate_all(
        field: &Arc<FiniteField>,
        rows: usize,
        cols: usize,
    ) -> impl Iterator<Item = Matrix> + '_ {
        let total = (field.order() as u64).pow((rows * cols) as u32);
        (0..total).map(move |code| Matrix {
            field: field.clone(),
            rows,
            cols,
            data: field.decode(code, rows * cols),
        })
    }
}

/// Invertible `n x n` matrices over `field` in row-major lexicographic order.
pub fn enumerate_invertible(
    field: &Arc<FiniteField>,
    n: usize,
) -> impl Iterator<Item = Matrix> + '_ {
    Matrix::enumerate_all(field, n, n).filter(Matrix::is_invertible)
}

/// Row space basis in RREF with zero rows dropped.
pub fn row_space_basis(
    field: &Arc<FiniteField>,
    rows: &[Vec<Elem>],
    width: usize,
) -> Vec<Vec<Elem>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = Matrix {
        field: field.clone(),
        rows: rows.len(),
        cols: width,
        data: rows.concat(),
    };
    let (red, pivots) = m.rref();
    (0..pivots.len()).map(|r| red.row(r).to_vec()).collect()
}

pub fn rank_of(field: &Arc<FiniteField>, rows: &[Vec<Elem>], width: usize) -> usize {
    row_space_basis(field, rows, width).len()
}

/// Whether `x` lies in the span of `rows`, by one pass of elimination.
pub fn in_span(
    field: &FiniteField,
    rows: impl IntoIterator<Item = Vec<Elem>>,
    x: Vec<Elem>,
) -> bool {
    // Each stored vector has a 1 at its pivot and 0 at every earlier pivot,
    // so reducing in insertion order clears all pivots.
    let reduce = |basis: &[(usize, Vec<Elem>)], mut v: Vec<Elem>| {
        for (p, b) in basis {
            let c = v[*p];
            if c != 0 {
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = field.sub(*vi, field.mul(c, bi));
                }
            }
        }
        v
    };
    let mut basis: Vec<(usize, Vec<Elem>)> = Vec::new();
    for r in rows {
        let v = reduce(&basis, r);
        if let Some(p) = v.iter().position(|&c| c != 0) {
            let inv = field.inv(v[p]).expect("nonzero");
            basis.push((p, v.iter().map(|&c| field.mul(inv, c)).collect()));
        }
    }
    reduce(&basis, x).iter().all(|&c| c == 0)
}

/// Calls `visit` with every vector `sum c_i rows[i]`, coefficients in
/// lexicographic order.
pub fn for_each_combination(
    field: &FiniteField,
    rows: &[Vec<Elem>],
    width: usize,
    mut visit: impl FnMut(&[Elem]),
) {
    let q = field.order();
    let mut coeffs = vec![0 as Elem; rows.len()];
    let mut v = vec![0; width];
    loop {
        visit(&v);
        // Odometer increment, updating v incrementally.
        let mut i = rows.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            let old = coeffs[i];
            let new = (old + 1) % q;
            coeffs[i] = new;
            for (x, &r) in v.iter_mut().zip(&rows[i]) {
                *x = field.add(field.sub(*x, field.mul(old, r)), field.mul(new, r));
            }
            if new != 0 {
                break;
            }
        }
    }
}

/// All `d`-dimensional subspaces of `K^n`, each as its RREF basis.
pub fn enumerate_subspaces(field: &Arc<FiniteField>, n: usize, d: usize) -> Vec<Vec<Vec<Elem>>> {
    let mut out = Vec::new();
    if d > n {
        return out;
    }
    let q = field.order() as u64;
    let mut pivots: Vec<usize> = (0..d).collect();
    loop {
        // Free slots: row i, column c > pivots[i], c not a pivot.
        let slots: Vec<(usize, usize)> = (0..d)
            .flat_map(|i| {
                let pv = &pivots;
                (pv[i] + 1..n)
                    .filter(move |c| !pv.contains(c))
                    .map(move |c| (i, c))
            })
            .collect();
        for code in 0..q.pow(slots.len() as u32) {
            let vals = field.decode(code, slots.len());
            let mut basis = vec![vec![0; n]; d];
            for (i, &p) in pivots.iter().enumerate() {
                basis[i][p] = 1;
            }
            for (&(i, c), &v) in slots.iter().zip(&vals) {
                basis[i][c] = v;
            }
            out.push(basis);
        }
        // Next combination of pivot columns.
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - d + i {
                pivots[i] += 1;
                for j in i + 1..d {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}
