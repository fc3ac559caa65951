//! Arithmetic in Z/p and exact linear algebra over it.
//!
//! Vectors are dense `Vec<u32>` with canonical representatives in `[0, p)`.
//! Matrices are stored as coordinate lists and reduced row by row.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero in F_{0}")]
    DivisionByZero(u32),
    #[error("entry ({row}, {col}) out of bounds for a {rows}x{cols} matrix")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("duplicate entry at ({0}, {1})")]
    DuplicateEntry(usize, usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("composite of differentials is nonzero on source vector {witness:?}")]
    ComplexViolation { witness: Vec<u32> },
}

/// The prime field F_p. Characteristics up to 2^16 keep products inside u64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, LinalgError> {
        if p < 2 || p > u16::MAX as u64 {
            return Err(LinalgError::NotPrime(p));
        }
        let mut d = 2;
        while d * d <= p {
            if p.is_multiple_of(d) {
                return Err(LinalgError::NotPrime(p));
            }
            d += 1;
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn reduce(&self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - b as u64) % self.p as u64) as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// `(-1)^e` as a field element.
    pub fn sign(&self, e: i64) -> u32 {
        if e.rem_euclid(2) == 0 {
            1
        } else {
            self.p - 1
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32, LinalgError> {
        field_inverse(a, self)
    }

    /// Binomial coefficient mod p via Lucas' theorem.
    pub fn binomial(&self, n: u64, k: u64) -> u32 {
        if k > n {
            return 0;
        }
        let p = self.p as u64;
        let (mut n, mut k) = (n, k);
        let mut acc = 1u32;
        while n > 0 || k > 0 {
            let (nd, kd) = (n % p, k % p);
            if kd > nd {
                return 0;
            }
            acc = self.mul(acc, small_binomial(nd, kd, self));
            n /= p;
            k /= p;
        }
        acc
    }
}

fn small_binomial(n: u64, k: u64, f: &PrimeField) -> u32 {
    let mut num = 1u32;
    let mut den = 1u32;
    for i in 0..k {
        num = f.mul(num, ((n - i) % f.p as u64) as u32);
        den = f.mul(den, ((i + 1) % f.p as u64) as u32);
    }
    f.mul(num, field_inverse(den, f).expect("digits below p are invertible"))
}

pub fn field_inverse(a: u32, f: &PrimeField) -> Result<u32, LinalgError> {
    let a = a % f.p;
    if a == 0 {
        return Err(LinalgError::DivisionByZero(f.p));
    }
    Ok(f.pow(a, f.p as u64 - 2))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, u32)>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: Vec::new() }
    }

    /// Validated construction: no duplicates, entries reduced, zeros dropped.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, u32)>,
        f: &PrimeField,
    ) -> Result<Self, LinalgError> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if r >= rows || c >= cols {
                return Err(LinalgError::OutOfBounds { row: r, col: c, rows, cols });
            }
            if !seen.insert((r, c)) {
                return Err(LinalgError::DuplicateEntry(r, c));
            }
            let v = v % f.p;
            if v != 0 {
                out.push((r, c, v));
            }
        }
        out.sort_unstable();
        Ok(SparseMatrix { rows, cols, entries: out })
    }

    /// Accumulating construction: repeated positions are summed.
    pub fn from_triplets_summed(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, u32)>,
        f: &PrimeField,
    ) -> Self {
        let mut map = std::collections::BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet out of bounds");
            let e = map.entry((r, c)).or_insert(0u32);
            *e = f.add(*e, v % f.p);
        }
        let entries = map.into_iter().filter(|&(_, v)| v != 0).map(|((r, c), v)| (r, c, v)).collect();
        SparseMatrix { rows, cols, entries }
    }

    /// Matrix whose columns are the given dense vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut entries = Vec::new();
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (r, &v) in col.iter().enumerate() {
                if v != 0 {
                    entries.push((r, c, v));
                }
            }
        }
        entries.sort_unstable();
        SparseMatrix { rows, cols: columns.len(), entries }
    }

    pub fn from_dense(rows: &[Vec<u32>], f: &PrimeField) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v % f.p != 0 {
                    entries.push((r, c, v % f.p));
                }
            }
        }
        SparseMatrix { rows: nr, cols: nc, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, u32)] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_unstable();
        SparseMatrix { rows: self.cols, cols: self.rows, entries }
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        let mut v = vec![0; self.rows];
        for &(r, cc, x) in &self.entries {
            if cc == c {
                v[r] = x;
            }
        }
        v
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        let mut m = vec![vec![0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            m[r][c] = v;
        }
        m
    }

    pub fn apply(&self, v: &[u32], f: &PrimeField) -> Vec<u32> {
        assert_eq!(v.len(), self.cols, "vector length");
        let mut out = vec![0; self.rows];
        for &(r, c, x) in &self.entries {
            if v[c] != 0 {
                out[r] = f.add(out[r], f.mul(x, v[c]));
            }
        }
        out
    }

    /// `self * other`.
    pub fn compose(&self, other: &SparseMatrix, f: &PrimeField) -> Result<SparseMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "cannot compose {}x{} after {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut by_row: Vec<Vec<(usize, u32)>> = vec![Vec::new(); other.rows];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let trip = self.entries.iter().flat_map(|&(r, k, a)| {
            by_row[k].iter().map(move |&(c, b)| (r, c, f.mul(a, b)))
        });
        Ok(SparseMatrix::from_triplets_summed(self.rows, other.cols, trip.collect::<Vec<_>>(), f))
    }

    fn sparse_rows(&self) -> Vec<Vec<(usize, u32)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for &(r, c, v) in &self.entries {
            rows[r].push((c, v));
        }
        for r in &mut rows {
            r.sort_unstable();
        }
        rows
    }
}

/// Reduced row echelon form: pivot rows (sparse, leading entry 1) keyed by pivot column.
#[derive(Debug, Clone)]
struct Rref {
    cols: usize,
    pivots: Vec<usize>,
    rows: Vec<Vec<(usize, u32)>>,
}

const DENSE_CUTOFF: usize = 64;

fn rref(m: &SparseMatrix, f: &PrimeField) -> Rref {
    if m.cols < DENSE_CUTOFF {
        rref_dense(m, f)
    } else {
        rref_sparse(m, f)
    }
}

fn rref_dense(m: &SparseMatrix, f: &PrimeField) -> Rref {
    let mut a = m.to_dense();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == a.len() {
            break;
        }
        // Prefer the sparsest candidate row.
        let cand = (r..a.len())
            .filter(|&i| a[i][c] != 0)
            .min_by_key(|&i| (a[i].iter().filter(|&&x| x != 0).count(), i));
        let Some(pr) = cand else { continue };
        a.swap(r, pr);
        let inv = field_inverse(a[r][c], f).unwrap();
        for x in a[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let factor = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    if y != 0 {
                        *x = f.sub(*x, f.mul(factor, y));
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rows = a[..r]
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, &v)| v != 0).map(|(c, &v)| (c, v)).collect())
        .collect();
    Rref { cols: m.cols, pivots, rows }
}

/// Row-incremental elimination. Rows are inserted sparsest first, each reduced
/// against the current pivot rows through a dense scratch buffer.
fn rref_sparse(m: &SparseMatrix, f: &PrimeField) -> Rref {
    let mut input = m.sparse_rows();
    input.sort_by_key(|r| r.len());
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; m.cols];
    let mut rows: Vec<Vec<(usize, u32)>> = Vec::new();
    let mut scratch = vec![0u32; m.cols];
    for row in input {
        if row.is_empty() {
            continue;
        }
        let mut pending: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
        let mut touched: Vec<usize> = Vec::new();
        for &(c, v) in &row {
            scratch[c] = v;
            pending.insert(c);
            touched.push(c);
        }
        // Reduce in increasing column order; new nonzeros only appear to the right.
        while let Some(c) = pending.pop_first() {
            let v = scratch[c];
            if v == 0 {
                continue;
            }
            if let Some(pi) = pivot_of_col[c] {
                for &(cc, pv) in &rows[pi] {
                    scratch[cc] = f.sub(scratch[cc], f.mul(v, pv));
                    if cc != c {
                        pending.insert(cc);
                    }
                    touched.push(cc);
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let mut reduced: Vec<(usize, u32)> = Vec::new();
        for &c in &touched {
            if scratch[c] != 0 {
                reduced.push((c, scratch[c]));
            }
            scratch[c] = 0;
        }
        let Some(&(lc, lv)) = reduced.first() else { continue };
        let inv = field_inverse(lv, f).unwrap();
        for e in reduced.iter_mut() {
            e.1 = f.mul(e.1, inv);
        }
        pivot_of_col[lc] = Some(rows.len());
        rows.push(reduced);
    }
    // Back substitution, rightmost pivots first.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(rows[i][0].0));
    for &i in &order {
        let lead = rows[i][0].0;
        for j in 0..rows.len() {
            if j == i {
                continue;
            }
            if let Ok(pos) = rows[j].binary_search_by_key(&lead, |e| e.0) {
                let factor = rows[j][pos].1;
                let merged = axpy_sparse(&rows[j], &rows[i], f.neg(factor), f);
                rows[j] = merged;
            }
        }
    }
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by_key(|&i| rows[i][0].0);
    let pivots = idx.iter().map(|&i| rows[i][0].0).collect();
    let rows = idx.into_iter().map(|i| rows[i].clone()).collect();
    Rref { cols: m.cols, pivots, rows }
}

fn axpy_sparse(a: &[(usize, u32)], b: &[(usize, u32)], s: u32, f: &PrimeField) -> Vec<(usize, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = f.mul(s, b[j].1);
            if v != 0 {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = f.add(a[i].1, f.mul(s, b[j].1));
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl Rref {
    fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn kernel(&self, f: &PrimeField) -> Vec<Vec<u32>> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                if let Ok(pos) = row.binary_search_by_key(&free, |e| e.0) {
                    v[p] = f.neg(row[pos].1);
                }
            }
            basis.push(v);
        }
        basis
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankKernelImage {
    pub rank: usize,
    pub kernel: Vec<Vec<u32>>,
    /// Independent columns of the matrix spanning its image.
    pub image: Vec<Vec<u32>>,
    pub pivot_columns: Vec<usize>,
}

pub fn rank_kernel_image(m: &SparseMatrix, f: &PrimeField) -> RankKernelImage {
    let r = rref(m, f);
    let image = r.pivots.iter().map(|&c| m.column(c)).collect();
    RankKernelImage { rank: r.rank(), kernel: r.kernel(f), image, pivot_columns: r.pivots.clone() }
}

pub fn rank(m: &SparseMatrix, f: &PrimeField) -> usize {
    rref(m, f).rank()
}

/// Some `x` with `m x = b`, free variables set to zero; `None` if inconsistent.
pub fn solve(m: &SparseMatrix, b: &[u32], f: &PrimeField) -> Option<Vec<u32>> {
    assert_eq!(b.len(), m.rows, "right-hand side length");
    let mut entries = m.entries.clone();
    for (r, &v) in b.iter().enumerate() {
        if v != 0 {
            entries.push((r, m.cols, v));
        }
    }
    let aug = SparseMatrix { rows: m.rows, cols: m.cols + 1, entries };
    let r = rref(&aug, f);
    if r.pivots.last() == Some(&m.cols) {
        return None;
    }
    let mut x = vec![0u32; m.cols];
    for (row, &p) in r.rows.iter().zip(&r.pivots) {
        if let Some(&(c, v)) = row.last() {
            if c == m.cols {
                x[p] = v;
            }
        }
    }
    Some(x)
}

/// Indices of a maximal independent subfamily, chosen greedily left to right.
pub fn independent_columns(ambient: usize, vectors: &[Vec<u32>], f: &PrimeField) -> Vec<usize> {
    let m = SparseMatrix::from_columns(ambient, vectors);
    rref(&m, f).pivots
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubquotientBasis {
    pub ambient: usize,
    pub kernel: Vec<Vec<u32>>,
    pub image: Vec<Vec<u32>>,
    /// Cycles whose classes form a basis of kernel / image.
    pub representatives: Vec<Vec<u32>>,
}

impl SubquotientBasis {
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// Coordinates of the class of `v` in the representative basis, or `None`
    /// when `v` is not a cycle.
    pub fn classify(&self, v: &[u32], f: &PrimeField) -> Option<Vec<u32>> {
        let mut cols = self.representatives.clone();
        cols.extend(self.image.iter().cloned());
        let m = SparseMatrix::from_columns(self.ambient, &cols);
        let x = solve(&m, v, f)?;
        Some(x[..self.representatives.len()].to_vec())
    }

    pub fn is_boundary(&self, v: &[u32], f: &PrimeField) -> bool {
        let m = SparseMatrix::from_columns(self.ambient, &self.image);
        solve(&m, v, f).is_some()
    }
}

/// Homology at the middle of `· --d_in--> V --d_out--> ·`.
pub fn cohomology_cell(
    d_in: &SparseMatrix,
    d_out: &SparseMatrix,
    f: &PrimeField,
) -> Result<SubquotientBasis, LinalgError> {
    if d_in.rows != d_out.cols {
        return Err(LinalgError::Shape(format!(
            "d_in has {} rows but d_out has {} columns",
            d_in.rows, d_out.cols
        )));
    }
    let comp = d_out.compose(d_in, f)?;
    if let Some(&(_, c, _)) = comp.entries.first() {
        let mut witness = vec![0; d_in.cols];
        witness[c] = 1;
        return Err(LinalgError::ComplexViolation { witness });
    }
    let ambient = d_out.cols;
    let kernel = rank_kernel_image(d_out, f).kernel;
    let image = rank_kernel_image(d_in, f).image;
    let mut cols = image.clone();
    cols.extend(kernel.iter().cloned());
    let piv = independent_columns(ambient, &cols, f);
    let representatives = piv.into_iter().filter(|&i| i >= image.len()).map(|i| cols[i].clone()).collect();
    Ok(SubquotientBasis { ambient, kernel, image, representatives })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn inverses() {
        assert_eq!(field_inverse(1, &f(2)), Ok(1));
        assert_eq!(field_inverse(2, &f(5)), Ok(3));
        assert_eq!(field_inverse(4, &f(7)), Ok(2));
        assert_eq!(field_inverse(0, &f(7)), Err(LinalgError::DivisionByZero(7)));
    }

    #[test]
    fn rejects_composites() {
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(9).is_err());
        assert!(PrimeField::new(13).is_ok());
    }

    #[test]
    fn lucas() {
        let f3 = f(3);
        assert_eq!(f3.binomial(4, 2), 0);
        assert_eq!(f3.binomial(5, 1), 2);
        assert_eq!(f(2).binomial(2, 1), 0);
        assert_eq!(f(7).binomial(10, 3), (120 % 7) as u32);
    }

    #[test]
    fn identity_and_zero() {
        let f2 = f(2);
        let id = SparseMatrix::from_entries(3, 3, vec![(0, 0, 1), (1, 1, 1), (2, 2, 1)], &f2).unwrap();
        let r = rank_kernel_image(&id, &f2);
        assert_eq!(r.rank, 3);
        assert!(r.kernel.is_empty());
        assert_eq!(r.image, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let z = SparseMatrix::zero(2, 4);
        let r = rank_kernel_image(&z, &f2);
        assert_eq!((r.rank, r.kernel.len()), (0, 4));
    }

    #[test]
    fn all_ones_two_by_two() {
        let f2 = f(2);
        let m = SparseMatrix::from_dense(&[vec![1, 1], vec![1, 1]], &f2);
        let r = rank_kernel_image(&m, &f2);
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel, vec![vec![1, 1]]);
    }

    #[test]
    fn duplicate_entries_rejected() {
        let e = SparseMatrix::from_entries(2, 2, vec![(0, 0, 1), (0, 0, 1)], &f(3));
        assert_eq!(e, Err(LinalgError::DuplicateEntry(0, 0)));
    }

    #[test]
    fn trivial_cells() {
        let f5 = f(5);
        let h = cohomology_cell(&SparseMatrix::zero(3, 0), &SparseMatrix::zero(0, 3), &f5).unwrap();
        assert_eq!(h.dim(), 3);
        let inj = SparseMatrix::from_dense(&[vec![1, 0], vec![0, 1], vec![1, 1]], &f5);
        let h = cohomology_cell(&SparseMatrix::zero(2, 0), &inj, &f5).unwrap();
        assert_eq!(h.dim(), 0);
    }

    #[test]
    fn complex_violation_has_witness() {
        let f2 = f(2);
        let a = SparseMatrix::from_dense(&[vec![1]], &f2);
        let err = cohomology_cell(&a, &a, &f2).unwrap_err();
        assert_eq!(err, LinalgError::ComplexViolation { witness: vec![1] });
    }

    #[test]
    fn solve_and_classify() {
        let f7 = f(7);
        let m = SparseMatrix::from_dense(&[vec![1, 2], vec![3, 4]], &f7);
        let x = solve(&m, &[5, 6], &f7).unwrap();
        assert_eq!(m.apply(&x, &f7), vec![5, 6]);
        let sing = SparseMatrix::from_dense(&[vec![1, 1], vec![1, 1]], &f7);
        assert!(solve(&sing, &[1, 0], &f7).is_none());
    }

    #[test]
    fn sparse_path_matches_dense() {
        let f3 = f(3);
        let mut rows = Vec::new();
        for i in 0..70 {
            rows.push((0..80).map(|j| ((i * 7 + j * 13 + i * j) % 5 % 3) as u32).collect::<Vec<_>>());
        }
        let m = SparseMatrix::from_dense(&rows, &f3);
        let s = rref_sparse(&m, &f3);
        let d = rref_dense(&m, &f3);
        assert_eq!(s.pivots, d.pivots);
        for v in s.kernel(&f3) {
            assert!(m.apply(&v, &f3).iter().all(|&x| x == 0));
        }
    }
}
