//! Compressed sparse row matrices, reverse Cuthill–McKee ordering and a
//! profile (skyline) Cholesky factorization.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Square or rectangular matrix in CSR form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, column, value)` contributions. Duplicates are summed in
/// insertion order, so symmetric insertion sequences give bitwise symmetric
/// matrices.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        TripletBuilder { rows, cols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries.push((i, j, v));
    }

    pub fn build(self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.rows, self.cols, self.entries)
    }
}

impl CsrMatrix {
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        // stable sort keeps insertion order among duplicates
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = alloc::vec![0; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) outside a {rows}×{cols} matrix");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { rows, cols, indptr, indices, values }
    }

    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Self {
        let mut t = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if data[i * cols + j] != 0.0 {
                    t.push((i, j, data[i * cols + j]));
                }
            }
        }
        Self::from_triplets(rows, cols, t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        idx.binary_search(&j).map_or(0.0, |p| val[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (idx, val) = self.row(i);
            idx.iter().zip(val).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            *yi = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.rows];
        self.mul_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.rows);
        (0..self.rows)
            .map(|i| {
                let (idx, val) = self.row(i);
                x[i] * idx.iter().zip(val).map(|(&j, &v)| v * y[j]).sum::<f64>()
            })
            .sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(i, j, v)| (j, i, v)).collect())
    }

    /// Exact (bitwise) symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max)
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut t: Vec<_> = self.triplets().collect();
        t.extend(other.triplets().map(|(i, j, v)| (i, j, s * v)));
        Self::from_triplets(self.rows, self.cols, t)
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut map = alloc::vec![usize::MAX; self.rows];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let t = self
            .triplets()
            .filter(|&(i, j, _)| map[i] != usize::MAX && map[j] != usize::MAX)
            .map(|(i, j, v)| (map[i], map[j], v))
            .collect();
        Self::from_triplets(keep.len(), keep.len(), t)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = alloc::vec![0.0; self.rows * self.cols];
        for (i, j, v) in self.triplets() {
            d[i * self.cols + j] = v;
        }
        d
    }
}

/// Nested dissection ordering of the symmetric sparsity pattern of `a`, with
/// separators taken from breadth-first level structures. Returns `perm` with
/// `perm[new] = old`.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let n = a.rows();
    let mut nd = Dissection { a, stamp: alloc::vec![0; n], level: alloc::vec![usize::MAX; n], clock: 0, order: Vec::with_capacity(n) };
    nd.order_set((0..n).collect());
    nd.order
}

const DISSECTION_LEAF: usize = 48;

struct Dissection<'a> {
    a: &'a CsrMatrix,
    stamp: Vec<u32>,
    level: Vec<usize>,
    clock: u32,
    order: Vec<usize>,
}

impl Dissection<'_> {
    fn enter(&mut self, set: &[usize]) -> u32 {
        self.clock += 1;
        for &v in set {
            self.stamp[v] = self.clock;
            self.level[v] = usize::MAX;
        }
        self.clock
    }

    /// Breadth-first search inside the current set; returns the visited nodes
    /// in order and fills `level`.
    fn bfs(&mut self, start: usize, tag: u32) -> Vec<usize> {
        let mut seen = Vec::new();
        let mut queue = VecDeque::new();
        self.level[start] = 0;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            seen.push(v);
            for &w in self.a.row(v).0 {
                if self.stamp[w] == tag && self.level[w] == usize::MAX {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn clear(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.level[v] = usize::MAX;
        }
    }

    fn order_set(&mut self, set: Vec<usize>) {
        if set.len() <= DISSECTION_LEAF {
            self.order.extend(set);
            return;
        }
        let tag = self.enter(&set);
        let first = self.bfs(set[0], tag);
        if first.len() < set.len() {
            // disconnected: order each component on its own
            let mut comps = alloc::vec![first];
            loop {
                let done: usize = comps.iter().map(Vec::len).sum();
                if done == set.len() {
                    break;
                }
                let next = set.iter().copied().find(|&v| self.level[v] == usize::MAX).unwrap_or(set[0]);
                comps.push(self.bfs(next, tag));
            }
            for c in comps {
                self.order_set(c);
            }
            return;
        }
        // pseudo-peripheral start
        let mut seen = first;
        let mut depth = self.level[*seen.last().unwrap_or(&set[0])];
        for _ in 0..4 {
            let far = seen.iter().copied().filter(|&v| self.level[v] == depth).min_by_key(|&v| (self.a.row(v).0.len(), v));
            let far = match far {
                Some(f) => f,
                None => break,
            };
            self.clear(&seen);
            seen = self.bfs(far, tag);
            let d = self.level[*seen.last().unwrap_or(&far)];
            if d <= depth {
                break;
            }
            depth = d;
        }
        if depth < 2 {
            self.clear(&seen);
            self.order.extend(set);
            return;
        }
        let mut count = alloc::vec![0usize; depth + 1];
        for &v in &seen {
            count[self.level[v]] += 1;
        }
        let half = seen.len() / 2;
        let mut acc = 0;
        let mut cut = 1;
        for (l, &c) in count.iter().enumerate() {
            acc += c;
            if acc > half {
                cut = l.clamp(1, depth - 1);
                break;
            }
        }
        let (mut left, mut right, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &v in &seen {
            let l = self.level[v];
            if l < cut {
                left.push(v);
            } else if l > cut {
                right.push(v);
            } else if self.a.row(v).0.iter().any(|&w| self.stamp[w] == tag && self.level[w] == cut + 1) {
                sep.push(v);
            } else {
                left.push(v);
            }
        }
        self.clear(&seen);
        self.order_set(left);
        self.order_set(right);
        self.order.extend(sep);
    }
}


/// Sparse Cholesky factor `P A Pᵀ = L Lᵀ` with `L` stored by columns,
/// computed row by row along the elimination tree.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    perm: Vec<usize>,
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    values: Vec<f64>,
}

const NONE: usize = usize::MAX;

impl SparseCholesky {
    /// Factors a symmetric positive definite matrix after nested dissection.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = nested_dissection(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n || perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut inv = alloc::vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // upper pattern of the permuted matrix, column k = row perm[k]
        let upper = |k: usize| a.row(perm[k]).0.iter().zip(a.row(perm[k]).1).map(|(&j, &v)| (inv[j], v)).filter(move |&(i, _)| i <= k);

        let mut parent = alloc::vec![NONE; n];
        let mut ancestor = alloc::vec![NONE; n];
        for k in 0..n {
            for (mut i, _) in upper(k) {
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        let mut mark = alloc::vec![NONE; n];
        let mut stack = alloc::vec![0; n];
        let mut path = Vec::new();
        // nonzero columns of row k of L, in topological order at stack[top..]
        let mut reach = |k: usize, mark: &mut [usize], stack: &mut [usize]| -> usize {
            let mut top = n;
            mark[k] = k;
            for (mut i, _) in upper(k) {
                path.clear();
                while mark[i] != k {
                    path.push(i);
                    mark[i] = k;
                    i = parent[i];
                }
                for &p in path.iter().rev() {
                    top -= 1;
                    stack[top] = p;
                }
            }
            top
        };

        let mut counts = alloc::vec![1usize; n];
        for k in 0..n {
            let top = reach(k, &mut mark, &mut stack);
            for &j in &stack[top..] {
                counts[j] += 1;
            }
        }
        let mut colptr = alloc::vec![0; n + 1];
        for j in 0..n {
            colptr[j + 1] = colptr[j] + counts[j];
        }
        let nnz = colptr[n];
        let mut rowind = alloc::vec![0; nnz];
        let mut values = alloc::vec![0.0; nnz];
        let mut next: Vec<usize> = colptr[..n].to_vec();
        let mut x = alloc::vec![0.0; n];
        mark.fill(NONE);
        for k in 0..n {
            let top = reach(k, &mut mark, &mut stack);
            for (i, v) in upper(k) {
                x[i] += v;
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / values[colptr[i]];
                x[i] = 0.0;
                for p in colptr[i] + 1..next[i] {
                    x[rowind[p]] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                rowind[p] = k;
                values[p] = lki;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: k });
            }
            let p = next[k];
            next[k] += 1;
            rowind[p] = k;
            values[p] = libm::sqrt(d);
        }
        Ok(SparseCholesky { perm, colptr, rowind, values })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored entries of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let (s, e) = (self.colptr[j], self.colptr[j + 1]);
            y[j] /= self.values[s];
            let yj = y[j];
            for p in s + 1..e {
                y[self.rowind[p]] -= self.values[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let (s, e) = (self.colptr[j], self.colptr[j + 1]);
            let mut v = y[j];
            for p in s + 1..e {
                v -= self.values[p] * y[self.rowind[p]];
            }
            y[j] = v / self.values[s];
        }
        let mut x = alloc::vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        t.build()
    }

    #[test]
    fn duplicates_summed() {
        let a = CsrMatrix::from_triplets(2, 2, alloc::vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, 2.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.nnz(), 3);
        assert!(a.is_symmetric());
        assert_eq!(a.mul(&[1.0, 1.0]), [6.0, 2.0]);
    }

    #[test]
    fn dissection_is_permutation() {
        for n in [1, 30, 500] {
            let mut p = nested_dissection(&laplace_1d(n));
            p.sort_unstable();
            assert_eq!(p, (0..n).collect::<Vec<_>>());
        }
        // two disconnected chains
        let a = laplace_1d(200);
        let mut t = TripletBuilder::new(200, 200);
        for (i, j, v) in a.triplets() {
            if !((i == 99 && j == 100) || (i == 100 && j == 99)) {
                t.push(i, j, v);
            }
        }
        let mut p = nested_dissection(&t.build());
        p.sort_unstable();
        assert_eq!(p, (0..200).collect::<Vec<_>>());
    }

    #[test]
    fn dissection_limits_fill() {
        // 5-point Laplacian on a 60 × 60 grid
        let w = 60;
        let mut t = TripletBuilder::new(w * w, w * w);
        for y in 0..w {
            for x in 0..w {
                let i = y * w + x;
                t.push(i, i, 4.0);
                if x + 1 < w {
                    t.push(i, i + 1, -1.0);
                    t.push(i + 1, i, -1.0);
                }
                if y + 1 < w {
                    t.push(i, i + w, -1.0);
                    t.push(i + w, i, -1.0);
                }
            }
        }
        let a = t.build();
        let f = SparseCholesky::factor(&a).unwrap();
        assert!(f.factor_nnz() < 40 * w * w, "fill {}", f.factor_nnz());
        let x: Vec<f64> = (0..w * w).map(|i| (i as f64).cos()).collect();
        let y = f.solve(&a.mul(&x));
        assert!(x.iter().zip(&y).all(|(u, v)| (u - v).abs() < 1e-10));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CsrMatrix::from_dense(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(SparseCholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    proptest! {
        #[test]
        fn cholesky_solves(n in 1usize..40, seed in any::<u64>()) {
            // random sparse SPD: graph Laplacian plus identity
            let mut s = seed;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1); (s >> 33) as usize };
            let mut t = TripletBuilder::new(n, n);
            for i in 0..n { t.push(i, i, 1.0); }
            for _ in 0..2 * n {
                let (i, j) = (next() % n, next() % n);
                if i != j {
                    let w = 1.0 + (next() % 7) as f64;
                    t.push(i, i, w); t.push(j, j, w); t.push(i, j, -w); t.push(j, i, -w);
                }
            }
            let a = t.build();
            prop_assert!(a.is_symmetric());
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.mul(&x);
            let y = SparseCholesky::factor(&a).unwrap().solve(&b);
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-9);
            }
        }
    }
}
