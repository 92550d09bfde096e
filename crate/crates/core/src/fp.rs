//! Exact dense linear algebra over prime fields F_p.
//!
//! Everything downstream (algebras, modules, sheaves, complexes) compiles
//! to operations on these matrices. Entries are stored reduced mod p in
//! row-major order. All routines are deterministic: kernels, images and
//! quotients come out of row reduction in a fixed column order, so two
//! runs over the same data produce identical bases.

use crate::error::{Error, Result};

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Multiplicative inverse mod p (p prime, a != 0).
pub fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2) mod p.
    let mut result = 1u64;
    let mut base = (a % p) as u64;
    let mut exp = p - 2;
    let m = p as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    result as u32
}

pub fn neg_mod(a: u32, p: u32) -> u32 {
    (p - a % p) % p
}

pub fn vec_add(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
}

pub fn vec_sub(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x + p - y % p) % p).collect()
}

pub fn vec_scale(p: u32, c: u32, a: &[u32]) -> Vec<u32> {
    a.iter().map(|x| x * c % p).collect()
}

pub fn vec_is_zero(a: &[u32]) -> bool {
    a.iter().all(|&x| x == 0)
}

/// Iterate over all vectors in F_p^dim in lexicographic order
/// (last coordinate fastest).
pub fn all_vectors(p: u32, dim: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    (0..total).map(move |mut k| {
        let mut v = vec![0u32; dim];
        for i in (0..dim).rev() {
            v[i] = (k % p as u128) as u32;
            k /= p as u128;
        }
        v
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn new(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length mismatch");
        let data = data.into_iter().map(|v| v % p).collect();
        Matrix { p, rows, cols, data }
    }

    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        Matrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Matrix::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u32, rows: Vec<Vec<u32>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        Matrix::new(p, r, c, data)
    }

    pub fn from_cols(p: u32, n_rows: usize, cols: Vec<Vec<u32>>) -> Self {
        let c = cols.len();
        let mut m = Matrix::zeros(p, n_rows, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n_rows);
            for i in 0..n_rows {
                m.set(i, j, col[i]);
            }
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vec(p: u32, v: &[u32]) -> Self {
        Matrix::new(p, v.len(), 1, v.to_vec())
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        assert_eq!(self.p, other.p);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a + b) % self.p)
            .collect();
        Matrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix {
        let data = self.data.iter().map(|&a| neg_mod(a, self.p)).collect();
        Matrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let c = c % self.p;
        let data = self.data.iter().map(|&a| a * c % self.p).collect();
        Matrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        assert_eq!(self.p, other.p);
        let mut m = Matrix::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = (m.get(i, j) + a * other.get(k, j)) % self.p;
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![0u32; self.rows];
        for i in 0..self.rows {
            let mut acc = 0u64;
            for j in 0..self.cols {
                acc += (self.get(i, j) as u64) * (v[j] as u64);
            }
            out[i] = (acc % self.p as u64) as u32;
        }
        out
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.p, other.p);
        let mut m = Matrix::zeros(self.p, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j));
            }
        }
        m
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.p, other.p);
        let mut data = self.data.clone();
        data.extend(other.data.iter().copied());
        Matrix {
            p: self.p,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Copy `block` into self with top-left corner at (i0, j0).
    pub fn put_block(&mut self, i0: usize, j0: usize, block: &Matrix) {
        assert_eq!(self.p, block.p);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(i0 + i, j0 + j, block.get(i, j));
            }
        }
    }

    pub fn block(&self, i0: usize, j0: usize, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(self.p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, self.get(i0 + i, j0 + j));
            }
        }
        m
    }

    /// Row-reduced echelon form. Returns (rref, pivot column indices).
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r >= m.rows {
                break;
            }
            // find pivot in column c at or below row r
            let mut piv = None;
            for i in r..m.rows {
                if m.get(i, c) != 0 {
                    piv = Some(i);
                    break;
                }
            }
            let Some(pi) = piv else { continue };
            // swap rows
            if pi != r {
                for j in 0..m.cols {
                    let a = m.get(r, j);
                    let b = m.get(pi, j);
                    m.set(r, j, b);
                    m.set(pi, j, a);
                }
            }
            // normalize pivot row
            let inv = inv_mod(m.get(r, c), m.p);
            for j in 0..m.cols {
                let v = m.get(r, j) * inv % m.p;
                m.set(r, j, v);
            }
            // eliminate elsewhere
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = (m.get(i, j) + (m.p - f) * m.get(r, j)) % m.p;
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space {x : self * x = 0}, as matrix columns.
    /// Deterministic: one basis vector per free column in column order.
    pub fn kernel(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut cols = Vec::new();
        for &fc in &free {
            let mut v = vec![0u32; self.cols];
            v[fc] = 1;
            for (row_idx, &pc) in pivots.iter().enumerate() {
                v[pc] = neg_mod(r.get(row_idx, fc), self.p);
            }
            cols.push(v);
        }
        Matrix::from_cols(self.p, self.cols, cols)
    }

    /// Basis of the column space, as matrix columns (the pivot columns
    /// of the original matrix).
    pub fn image_basis(&self) -> Matrix {
        let (_, pivots) = self.rref();
        let cols: Vec<Vec<u32>> = pivots.iter().map(|&c| self.column(c)).collect();
        Matrix::from_cols(self.p, self.rows, cols)
    }

    /// Solve self * X = B for X; None if inconsistent.
    pub fn solve_matrix(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, b.rows);
        assert_eq!(self.p, b.p);
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        // inconsistency: pivot in the B part
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(self.p, self.cols, b.cols);
        for (row_idx, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(row_idx, self.cols + j));
            }
        }
        Some(x)
    }

    /// Solve self * x = b for a single vector.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        self.solve_matrix(&Matrix::col_vec(self.p, b))
            .map(|m| m.column(0))
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let x = self.solve_matrix(&Matrix::identity(self.p, self.rows))?;
        if self.mul(&x) == Matrix::identity(self.p, self.rows) {
            Some(x)
        } else {
            None
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Express v in the span of this matrix's columns: solve self * c = v.
    pub fn coords_of(&self, v: &[u32]) -> Option<Vec<u32>> {
        self.solve(v)
    }

    /// Column-space membership for every column of `other`.
    pub fn contains_columns(&self, other: &Matrix) -> bool {
        self.solve_matrix(other).is_some()
    }

    /// Canonical form of the column span (rref of the transpose,
    /// transposed back). Equal spans give equal canonical forms.
    pub fn span_canonical(&self) -> Matrix {
        let (r, pivots) = self.transpose().rref();
        let k = pivots.len();
        r.block(0, 0, k, r.cols).transpose()
    }

    pub fn span_eq(&self, other: &Matrix) -> bool {
        self.span_canonical() == other.span_canonical()
    }
}

/// A quotient F_p^n / span(columns), with a projection onto coordinates
/// indexed by the non-pivot rows and a section picking representatives.
#[derive(Debug, Clone)]
pub struct Quotient {
    /// q x n projection; kernel is exactly the span.
    pub proj: Matrix,
    /// n x q section with proj * section = identity.
    pub section: Matrix,
    pub dim: usize,
}

pub fn quotient_by_span(p: u32, n: usize, span: &Matrix) -> Quotient {
    assert_eq!(span.rows(), n);
    // Echelonize the span as row vectors to find pivot coordinates.
    let (r, pivots) = span.transpose().rref();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let q = free.len();
    // Reduce each standard basis vector modulo the echelon rows, then
    // read off the free coordinates.
    let mut proj = Matrix::zeros(p, q, n);
    for e in 0..n {
        let mut v = vec![0u32; n];
        v[e] = 1;
        for (row_idx, &pc) in pivots.iter().enumerate() {
            let f = v[pc];
            if f != 0 {
                for j in 0..n {
                    v[j] = (v[j] + (p - f) * r.get(row_idx, j) % p) % p;
                }
            }
        }
        for (qi, &fc) in free.iter().enumerate() {
            proj.set(qi, e, v[fc]);
        }
    }
    let mut section = Matrix::zeros(p, n, q);
    for (qi, &fc) in free.iter().enumerate() {
        section.set(fc, qi, 1);
    }
    Quotient { proj, section, dim: q }
}

/// Lexicographically least solution of A x = b (coordinates compared as
/// integers 0..p-1, earlier coordinates dominate). None if inconsistent.
pub fn lex_min_solution(a: &Matrix, b: &[u32]) -> Option<Vec<u32>> {
    let p = a.p();
    let n = a.cols();
    a.solve(b)?;
    // Greedy: fix coordinates left to right, each to the least value
    // keeping the system consistent.
    let mut fixed: Vec<u32> = Vec::with_capacity(n);
    for i in 0..n {
        let mut chosen = None;
        for v in 0..p {
            // consistency of A x = b together with x_j = fixed_j (j <= i)
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for r in 0..a.rows() {
                rows.push(a.row(r).to_vec());
                rhs.push(b[r]);
            }
            for (j, &fv) in fixed.iter().enumerate() {
                let mut row = vec![0u32; n];
                row[j] = 1;
                rows.push(row);
                rhs.push(fv);
            }
            let mut row = vec![0u32; n];
            row[i] = 1;
            rows.push(row);
            rhs.push(v);
            let sys = Matrix::from_rows(p, rows);
            if sys.solve(&rhs).is_some() {
                chosen = Some(v);
                break;
            }
        }
        fixed.push(chosen.expect("consistent system must extend"));
    }
    Some(fixed)
}

/// Check primality and cap compliance for a characteristic.
pub fn check_prime(p: u32, max_p: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p > max_p {
        return Err(Error::SizeCap {
            what: "characteristic",
            limit: max_p as usize,
            actual: p as usize,
        });
    }
    Ok(())
}
