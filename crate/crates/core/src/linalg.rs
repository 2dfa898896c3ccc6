//! Sparse storage and banded LU for superoperators.
//!
//! A Liouvillian on a composite space of dimension `d` has `d²` rows but only
//! a handful of nonzeros per row. Reordering the vectorized index by
//! `(n_row, n_col, s_row, s_col)` confines every entry to a band of width
//! about `4·(n_max+1)`, so a banded LU with partial pivoting solves the
//! steady-state system in `O(d² · band²)` instead of `O(d⁶)`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    /// Assembles an `n×n` matrix, summing duplicates and dropping entries
    /// that cancel exactly.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((i, j, mut v)) = iter.next() {
            while let Some(&(i2, j2, v2)) = iter.peek() {
                if i2 == i && j2 == j {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != ZERO {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(row, col, value)` for every stored entry, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => ZERO,
        }
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Row vector times matrix, `vᵀ A`.
    pub fn left_apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.n];
        for (i, j, a) in self.iter() {
            out[j] += v[i] * a;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * s).collect(),
        }
    }

    /// Sum of two matrices of equal size.
    pub fn add(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.n, other.n);
        let triplets = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.n, triplets)
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.n, self.n));
        for (i, j, v) in self.iter() {
            m[[i, j]] = v;
        }
        m
    }
}

/// LU factorization of a banded matrix with partial pivoting, in the layout of
/// LAPACK's `gbtrf`: row `i` stores columns `i−kl ..= i+ku+kl`, the extra
/// `kl` diagonals absorbing fill-in from row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<C64>,
    piv: Vec<usize>,
}

/// Pivot failure: the row where elimination stalled and the pivot modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot {
    pub row: usize,
    pub pivot: f64,
}

impl BandLu {
    /// Factors the `n×n` matrix with the given entries, which must satisfy
    /// `−kl ≤ j − i ≤ ku`. Duplicate entries are summed. A pivot smaller than
    /// `pivot_tol` in modulus is reported as singular.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
        pivot_tol: f64,
    ) -> Result<Self, SingularPivot> {
        let width = 2 * kl + ku + 1;
        let mut ab = vec![ZERO; n * width];
        for (i, j, v) in entries {
            assert!(j + kl >= i && j <= i + ku, "entry ({i},{j}) outside band kl={kl} ku={ku}");
            ab[i * width + (j + kl - i)] += v;
        }
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            ab,
            piv: vec![0; n],
        };
        lu.eliminate(pivot_tol)?;
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn eliminate(&mut self, pivot_tol: f64) -> Result<(), SingularPivot> {
        let n = self.n;
        for c in 0..n {
            let last_row = (c + self.kl).min(n - 1);
            let last_col = (c + self.kl + self.ku).min(n - 1);
            let mut p = c;
            let mut best = self.ab[self.at(c, c)].norm();
            for r in c + 1..=last_row {
                let v = self.ab[self.at(r, c)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= pivot_tol {
                return Err(SingularPivot { row: c, pivot: best });
            }
            self.piv[c] = p;
            if p != c {
                for j in c..=last_col {
                    let (x, y) = (self.at(c, j), self.at(p, j));
                    self.ab.swap(x, y);
                }
            }
            let inv = 1.0 / self.ab[self.at(c, c)];
            for r in c + 1..=last_row {
                let rc = self.at(r, c);
                let f = self.ab[rc] * inv;
                if f == ZERO {
                    continue;
                }
                self.ab[rc] = f;
                let base_r = self.at(r, c);
                let base_c = self.at(c, c);
                // Row r at column j sits at base_r + (j - c); likewise for row c.
                for off in 1..=(last_col - c) {
                    let u = self.ab[base_c + off];
                    if u != ZERO {
                        self.ab[base_r + off] -= f * u;
                    }
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for c in 0..n {
            let p = self.piv[c];
            if p != c {
                b.swap(c, p);
            }
            let bc = b[c];
            if bc == ZERO {
                continue;
            }
            for r in c + 1..=(c + self.kl).min(n - 1) {
                b[r] -= self.ab[self.at(r, c)] * bc;
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            let base = self.at(i, i);
            for off in 1..=((self.kl + self.ku).min(n - 1 - i)) {
                acc -= self.ab[base + off] * b[i + off];
            }
            b[i] = acc / self.ab[base];
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

/// Lower and upper bandwidth of a set of entries.
pub fn bandwidths(entries: impl IntoIterator<Item = (usize, usize)>) -> (usize, usize) {
    entries.into_iter().fold((0, 0), |(kl, ku), (i, j)| {
        if i > j {
            (kl.max(i - j), ku)
        } else {
            (kl, ku.max(j - i))
        }
    })
}

/// Solves a dense system by Gaussian elimination with partial pivoting.
/// Used for small systems and as a cross-check of the banded path.
pub fn dense_solve(a: &Array2<C64>, b: &[C64]) -> Option<Vec<C64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for c in 0..n {
        let (p, best) = (c..n)
            .map(|r| (r, m[[r, c]].norm()))
            .fold((c, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if best == 0.0 {
            return None;
        }
        if p != c {
            for j in 0..n {
                m.swap([c, j], [p, j]);
            }
            x.swap(c, p);
        }
        let inv = 1.0 / m[[c, c]];
        for r in c + 1..n {
            let f = m[[r, c]] * inv;
            if f == ZERO {
                continue;
            }
            for j in c..n {
                let u = m[[c, j]];
                m[[r, j]] -= f * u;
            }
            let xc = x[c];
            x[r] -= f * xc;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= m[[i, j]] * x[j];
        }
        x[i] = acc / m[[i, i]];
    }
    Some(x)
}
