//! Dense bit-packed matrices over GF(2).
//!
//! Rows are stored as `u64` words; addition of rows is a word-wise XOR.
//! Elimination is deterministic: columns are processed left to right and
//! pivot ties are broken by the lowest row index, so ranks, right inverses
//! and bases are reproducible across runs.

use std::fmt;

/// A dense matrix over GF(2) with optional row/column labels.
///
/// Labels carry the vertex names a matrix was derived from; they take no
/// part in arithmetic.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

impl Gf2Matrix {
    /// All-zero matrix of the given shape.
    pub fn zero(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        Gf2Matrix {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
            row_labels: None,
            col_labels: None,
        }
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn build(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values, as written in tests.
    ///
    /// # Panics
    ///
    /// If the rows are ragged or an entry is not 0/1.
    pub fn from_rows(data: &[&[u8]]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        Self::build(rows, cols, |r, c| {
            assert!(data[r].len() == cols, "ragged rows");
            assert!(data[r][c] <= 1, "entries must be 0 or 1");
            data[r][c] == 1
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::build(n, n, |r, c| r == c)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Attaches row/column labels. Labels must be unique and match the shape.
    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        assert_eq!(row_labels.len(), self.rows, "row label count");
        assert_eq!(col_labels.len(), self.cols, "col label count");
        debug_assert!(unique(&row_labels), "duplicate row label");
        debug_assert!(unique(&col_labels), "duplicate col label");
        self.row_labels = Some(row_labels);
        self.col_labels = Some(col_labels);
        self
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.bits[r * self.words_per_row + c / 64];
        (w >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.words_per_row + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// XORs row `from` into row `to`.
    pub fn xor_row(&mut self, from: usize, to: usize) {
        debug_assert!(from != to);
        let (fi, ti) = (from * self.words_per_row, to * self.words_per_row);
        for w in 0..self.words_per_row {
            let v = self.bits[fi + w];
            self.bits[ti + w] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let wpr = self.words_per_row;
        for w in 0..wpr {
            self.bits.swap(a * wpr + w, b * wpr + w);
        }
    }

    pub fn transpose(&self) -> Gf2Matrix {
        Self::build(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Matrix product over GF(2).
    ///
    /// # Panics
    ///
    /// On a dimension mismatch.
    pub fn mul(&self, rhs: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Gf2Matrix::zero(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let (ki, oi) = (k * rhs.words_per_row, r * out.words_per_row);
                    for w in 0..out.words_per_row {
                        out.bits[oi + w] ^= rhs.bits[ki + w];
                    }
                }
            }
        }
        out
    }

    /// Row rank over GF(2). Empty-dimension matrices have rank 0.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let hit = (pivot_row..m.rows).find(|&r| m.get(r, col));
            if let Some(r) = hit {
                m.swap_rows(pivot_row, r);
                for other in 0..m.rows {
                    if other != pivot_row && m.get(other, col) {
                        m.xor_row(pivot_row, other);
                    }
                }
                pivot_row += 1;
            }
        }
        pivot_row
    }

    /// A right inverse `N` with `self * N = I`, or `None` when the rows are
    /// dependent (rank below the row count).
    ///
    /// The result is the canonical one obtained by Gauss-Jordan elimination
    /// with lowest-index pivots; free variables are set to zero. A matrix
    /// with zero rows is right-invertible by convention (its right inverse
    /// is the `cols x 0` matrix).
    pub fn right_inverse(&self) -> Option<Gf2Matrix> {
        let (r, c) = (self.rows, self.cols);
        // Augment with the identity: [self | I_r].
        let mut aug = Gf2Matrix::zero(r, c + r);
        for i in 0..r {
            for j in 0..c {
                if self.get(i, j) {
                    aug.set(i, j, true);
                }
            }
            aug.set(i, c + i, true);
        }
        let mut pivot_cols = Vec::new();
        for col in 0..c {
            let row = pivot_cols.len();
            if row == r {
                break;
            }
            if let Some(hit) = (row..r).find(|&i| aug.get(i, col)) {
                aug.swap_rows(row, hit);
                for other in 0..r {
                    if other != row && aug.get(other, col) {
                        aug.xor_row(row, other);
                    }
                }
                pivot_cols.push(col);
            }
        }
        if pivot_cols.len() < r {
            return None;
        }
        let mut inv = Gf2Matrix::zero(c, r);
        for (i, &p) in pivot_cols.iter().enumerate() {
            for j in 0..r {
                if aug.get(i, c + j) {
                    inv.set(p, j, true);
                }
            }
        }
        Some(inv)
    }

    /// Greedy column basis: the lexicographically earliest maximal set of
    /// independent columns (the pivot columns of row-echelon form).
    pub fn column_basis(&self) -> Vec<usize> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        for col in 0..m.cols {
            let row = pivots.len();
            if row == m.rows {
                break;
            }
            if let Some(hit) = (row..m.rows).find(|&r| m.get(r, col)) {
                m.swap_rows(row, hit);
                for other in 0..m.rows {
                    if other != row && m.get(other, col) {
                        m.xor_row(row, other);
                    }
                }
                pivots.push(col);
            }
        }
        pivots
    }

    /// Greedy row basis: accepts rows in index order, keeping each row that
    /// is independent of the rows accepted before it.
    pub fn row_basis(&self) -> Vec<usize> {
        // Echelon of accepted rows, reduced as we go.
        let mut echelon: Vec<(usize, Gf2Matrix)> = Vec::new(); // (pivot col, row as 1 x cols)
        let mut basis = Vec::new();
        for r in 0..self.rows {
            let mut row = Gf2Matrix::zero(1, self.cols);
            for c in 0..self.cols {
                if self.get(r, c) {
                    row.set(0, c, true);
                }
            }
            for (pc, erow) in &echelon {
                if row.get(0, *pc) {
                    for w in 0..row.words_per_row {
                        row.bits[w] ^= erow.bits[w];
                    }
                }
            }
            if let Some(pc) = (0..self.cols).find(|&c| row.get(0, c)) {
                echelon.push((pc, row));
                basis.push(r);
            }
        }
        basis
    }

    /// A basis of the right null space (vectors `v` with `self * v = 0`),
    /// one matrix column per basis vector.
    pub fn null_space_basis(&self) -> Vec<Vec<bool>> {
        let (r, c) = (self.rows, self.cols);
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        for col in 0..c {
            let row = pivot_cols.len();
            if row == r {
                break;
            }
            if let Some(hit) = (row..r).find(|&i| m.get(i, col)) {
                m.swap_rows(row, hit);
                for other in 0..r {
                    if other != row && m.get(other, col) {
                        m.xor_row(row, other);
                    }
                }
                pivot_cols.push(col);
            }
        }
        let mut basis = Vec::new();
        for free in 0..c {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![false; c];
            v[free] = true;
            for (i, &p) in pivot_cols.iter().enumerate() {
                if m.get(i, free) {
                    v[p] = true;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Copy with one column removed.
    pub fn without_column(&self, col: usize) -> Gf2Matrix {
        assert!(col < self.cols);
        Self::build(self.rows, self.cols - 1, |r, c| {
            self.get(r, if c < col { c } else { c + 1 })
        })
    }

    pub fn is_right_invertible(&self) -> bool {
        self.rank() == self.rows
    }
}

fn unique(labels: &[String]) -> bool {
    let mut seen = labels.to_vec();
    seen.sort();
    seen.windows(2).all(|w| w[0] != w[1])
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}
