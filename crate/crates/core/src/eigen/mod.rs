//! Lowest eigenpairs of the symmetric pencil `A v = λ M v`.
//!
//! The iterative path is a block LOBPCG with soft locking, preconditioned by
//! an exact shift-invert solve `(A − σM)⁻¹` with `σ` kept below the spectrum
//! (positive definiteness is certified by the factorization itself). Small
//! problems are solved densely. [`dense_eigen_oracle`] is an independent
//! brute-force path for cross-validation.

mod dense;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use dense::{bisection_eigenvalues, jacobi_eigenvalues, symmetric_eigen, Dense};

use crate::sparse::{nested_dissection, CsrMatrix, SparseCholesky};
use crate::{invalid, Error, Result};

/// Largest dimension accepted by the dense oracle.
pub const ORACLE_LIMIT: usize = 2500;

/// Problems up to this size skip the iteration and are solved densely.
/// Largest dimension diagonalized by cyclic Jacobi in the oracle.
pub const JACOBI_LIMIT: usize = 256;

pub const DENSE_CUTOFF: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Preconditioner {
    /// `(A − σM)⁻¹` by sparse Cholesky.
    #[default]
    ShiftInvert,
    /// `diag(A − σM)⁻¹`.
    Jacobi,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverOptions {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub preconditioner: Preconditioner,
    /// Extra block columns beyond `k`.
    pub padding: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { k: 5, tol: 1e-8, max_iter: 500, seed: 0, preconditioner: Preconditioner::ShiftInvert, padding: 5 }
    }
}

/// Lowest eigenpairs with residuals and iteration statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Av − λMv‖_{diag(M)⁻¹} / ‖v‖_M`.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub dimension: usize,
    pub tol: f64,
}

impl SpectrumResult {
    /// Number of converged eigenvalues below `threshold − 10·tol`.
    pub fn below_count(&self, threshold: f64) -> usize {
        let cut = threshold - 10.0 * self.tol;
        self.eigenvalues
            .iter()
            .zip(&self.residuals)
            .filter(|(l, r)| **l < cut && **r <= self.tol * l.abs().max(1.0))
            .count()
    }

    /// Largest deviation of the eigenvector `M`-Gram matrix from the identity.
    pub fn gram_error(&self, m: &CsrMatrix) -> f64 {
        let mv: Vec<Vec<f64>> = self.eigenvectors.iter().map(|v| m.mul(v)).collect();
        let mut worst: f64 = 0.0;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, w) in mv.iter().enumerate() {
                let g = dot(u, w);
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn check_pencil(a: &CsrMatrix, m: &CsrMatrix) -> Result<()> {
    let n = a.rows();
    if a.cols() != n || m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.rows() });
    }
    if !a.is_symmetric() || !m.is_symmetric() {
        return Err(invalid("pencil", "matrices must be symmetric"));
    }
    Ok(())
}

/// All eigenvalues of the pencil by Cholesky reduction followed by cyclic
/// Jacobi (up to [`JACOBI_LIMIT`]) or Householder reduction and bisection.
pub fn dense_eigen_oracle(a: &CsrMatrix, m: &CsrMatrix) -> Result<Vec<f64>> {
    let n = a.rows();
    if n > ORACLE_LIMIT {
        return Err(Error::DimensionTooLarge { dim: n, limit: ORACLE_LIMIT });
    }
    check_pencil(a, m)?;
    dense_oracle(&Dense::from_rows(n, a.to_dense()), &Dense::from_rows(n, m.to_dense()))
}

/// Dense variant of [`dense_eigen_oracle`].
pub fn dense_oracle(a: &Dense, m: &Dense) -> Result<Vec<f64>> {
    if a.n > ORACLE_LIMIT {
        return Err(Error::DimensionTooLarge { dim: a.n, limit: ORACLE_LIMIT });
    }
    let l = m.cholesky()?;
    let c = a.congruence_inverse(&l);
    Ok(if a.n <= JACOBI_LIMIT { jacobi_eigenvalues(&c, 1e-14) } else { bisection_eigenvalues(&c) })
}

/// Lowest `k` eigenpairs of `A v = λ M v`.
pub fn lowest_eigenpairs(a: &CsrMatrix, m: &CsrMatrix, opts: &SolverOptions) -> Result<SpectrumResult> {
    check_pencil(a, m)?;
    let n = a.rows();
    if opts.k == 0 || opts.k > n {
        return Err(invalid("k", "must lie in 1..=dimension"));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    if m.diagonal().iter().any(|&d| !(d > 0.0)) {
        return Err(Error::NotPositiveDefinite { pivot: m.diagonal().iter().position(|&d| !(d > 0.0)).unwrap() });
    }
    if n <= DENSE_CUTOFF || n < 3 * (opts.k + opts.padding) {
        return dense_path(a, m, opts);
    }
    Lobpcg::new(a, m, opts).run()
}

fn residual_norm(a: &CsrMatrix, m: &CsrMatrix, mdiag: &[f64], v: &[f64], lambda: f64) -> f64 {
    let av = a.mul(v);
    let mv = m.mul(v);
    let r: f64 = (0..v.len()).map(|i| (av[i] - lambda * mv[i]).powi(2) / mdiag[i]).sum();
    libm::sqrt(r / dot(v, &mv))
}

fn dense_path(a: &CsrMatrix, m: &CsrMatrix, opts: &SolverOptions) -> Result<SpectrumResult> {
    let n = a.rows();
    let l = Dense::from_rows(n, m.to_dense()).cholesky()?;
    let c = Dense::from_rows(n, a.to_dense()).congruence_inverse(&l);
    let (vals, vecs) = symmetric_eigen(&c);
    let mdiag = m.diagonal();
    let mut out = SpectrumResult { eigenvalues: Vec::new(), eigenvectors: Vec::new(), residuals: Vec::new(), converged: true, iterations: 0, dimension: n, tol: opts.tol };
    for j in 0..opts.k {
        // v = L⁻ᵀ y
        let mut v: Vec<f64> = (0..n).map(|i| vecs.at(i, j)).collect();
        for i in (0..n).rev() {
            let mut s = v[i];
            for k in i + 1..n {
                s -= l.at(k, i) * v[k];
            }
            v[i] = s / l.at(i, i);
        }
        let r = residual_norm(a, m, &mdiag, &v, vals[j]);
        out.converged &= r <= opts.tol * vals[j].abs().max(1.0);
        out.eigenvalues.push(vals[j]);
        out.eigenvectors.push(v);
        out.residuals.push(r);
    }
    Ok(out)
}

const MAX_REFACTORS: usize = 40;

struct Lobpcg<'a> {
    a: &'a CsrMatrix,
    m: &'a CsrMatrix,
    opts: &'a SolverOptions,
    mdiag: Vec<f64>,
    perm: Option<Vec<usize>>,
    sigma: f64,
    factor: Option<SparseCholesky>,
    jacobi: Vec<f64>,
    refactors: usize,
    last_mu: f64,
}

/// M-orthonormal basis vectors together with `M·v`.
struct Basis {
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
}

impl<'a> Lobpcg<'a> {
    fn new(a: &'a CsrMatrix, m: &'a CsrMatrix, opts: &'a SolverOptions) -> Self {
        Lobpcg { a, m, opts, mdiag: m.diagonal(), perm: None, sigma: f64::NAN, factor: None, jacobi: Vec::new(), refactors: 0, last_mu: f64::INFINITY }
    }

    /// Tries to install the shift `σ`; fails if `A − σM` is not positive
    /// definite (for the Jacobi variant only the diagonal is checked).
    fn try_shift(&mut self, sigma: f64) -> bool {
        let shifted = self.a.add_scaled(self.m, -sigma);
        match self.opts.preconditioner {
            Preconditioner::ShiftInvert => {
                let perm = self.perm.get_or_insert_with(|| nested_dissection(&shifted)).clone();
                match SparseCholesky::factor_with(&shifted, perm) {
                    Ok(f) => {
                        self.factor = Some(f);
                        self.sigma = sigma;
                        true
                    }
                    Err(_) => false,
                }
            }
            Preconditioner::Jacobi => {
                let d = shifted.diagonal();
                if d.iter().all(|&x| x > 0.0) {
                    self.jacobi = d;
                    self.sigma = sigma;
                    true
                } else {
                    false
                }
            }
        }
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(f) if self.opts.preconditioner == Preconditioner::ShiftInvert => f.solve(r),
            _ => r.iter().zip(&self.jacobi).map(|(x, d)| x / d).collect(),
        }
    }

    /// Installs a shift below the lowest Ritz value `mu`.
    fn initial_shift(&mut self, mu: f64) {
        let mut delta = 0.5 * mu.abs().max(1.0);
        for _ in 0..60 {
            if self.try_shift(mu - delta) {
                return;
            }
            delta *= 4.0;
        }
        panic!("no positive definite shift found; the pencil is not bounded below");
    }

    /// Moves the shift towards the lowest Ritz value `mu` (an upper bound for
    /// λ₁) whenever `mu` has moved since the last attempt; a failed
    /// factorization just leaves the previous shift in place.
    fn maybe_refine_shift(&mut self, mu: f64) {
        if self.refactors >= MAX_REFACTORS {
            return;
        }
        let scale = mu.abs().max(1.0);
        let gap = mu - self.sigma;
        if gap <= 0.2 * scale || (self.last_mu - mu).abs() < 0.05 * gap {
            return;
        }
        self.last_mu = mu;
        let old = (self.sigma, self.factor.take(), core::mem::take(&mut self.jacobi));
        for target in [mu - 0.02 * scale, mu - 0.1 * scale, 0.5 * (old.0 + mu)] {
            if target <= old.0 {
                continue;
            }
            self.refactors += 1;
            if self.try_shift(target) {
                return;
            }
        }
        self.sigma = old.0;
        self.factor = old.1;
        self.jacobi = old.2;
    }

    /// Modified Gram–Schmidt in the `M` inner product against `basis`
    /// (repeated once when the first pass cancels more than half the norm),
    /// appending the survivors.
    fn orthonormalize_into(&self, basis: &mut Basis, candidates: Vec<Vec<f64>>) -> usize {
        let mut added = 0;
        for mut v in candidates {
            let mut mv = self.m.mul(&v);
            let n0 = libm::sqrt(dot(&v, &mv));
            if !(n0 > 0.0) || !n0.is_finite() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(mv.iter_mut()) {
                *x /= n0;
                *y /= n0;
            }
            let mut nv = 1.0;
            for _ in 0..2 {
                for (q, mq) in basis.v.iter().zip(&basis.mv) {
                    let c = dot(mq, &v);
                    axpy(&mut v, -c, q);
                    axpy(&mut mv, -c, mq);
                }
                let before = nv;
                nv = libm::sqrt(dot(&v, &mv).max(0.0));
                // a second pass is only needed after heavy cancellation
                if nv > 0.5 * before {
                    break;
                }
                mv = self.m.mul(&v);
                nv = libm::sqrt(dot(&v, &mv).max(0.0));
            }
            if nv < 1e-10 {
                continue;
            }
            for x in v.iter_mut() {
                *x /= nv;
            }
            let mv = mv.into_iter().map(|x| x / nv).collect();
            basis.v.push(v);
            basis.mv.push(mv);
            added += 1;
        }
        added
    }

    /// Rayleigh–Ritz on an `M`-orthonormal basis: returns Ritz values and the
    /// coefficient matrix (columns) of the lowest `b` Ritz vectors.
    fn ritz(&self, basis: &Basis) -> (Vec<f64>, Dense) {
        let s = basis.v.len();
        let av: Vec<Vec<f64>> = basis.v.iter().map(|v| self.a.mul(v)).collect();
        let mut g = Dense::zeros(s);
        for i in 0..s {
            for j in 0..=i {
                let x = 0.5 * (dot(&basis.v[i], &av[j]) + dot(&basis.v[j], &av[i]));
                g.set(i, j, x);
                g.set(j, i, x);
            }
        }
        symmetric_eigen(&g)
    }

    fn combine(vectors: &[Vec<f64>], coef: &Dense, col: usize, rows: core::ops::Range<usize>) -> Vec<f64> {
        let n = vectors[0].len();
        let mut out = alloc::vec![0.0; n];
        for (i, r) in rows.enumerate() {
            axpy(&mut out, coef.at(r, col), &vectors[i]);
        }
        out
    }

    fn run(mut self) -> Result<SpectrumResult> {
        let n = self.a.rows();
        let k = self.opts.k;
        let b = (k + self.opts.padding).min(n / 3).max(k);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let start: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut basis = Basis { v: Vec::new(), mv: Vec::new() };
        self.orthonormalize_into(&mut basis, start);
        let (vals, coef) = self.ritz(&basis);
        let mut x: Vec<Vec<f64>> = (0..basis.v.len()).map(|j| Self::combine(&basis.v, &coef, j, 0..basis.v.len())).collect();
        let mut lambda: Vec<f64> = vals[..x.len()].to_vec();
        self.initial_shift(lambda[0]);

        let mut p: Vec<Option<Vec<f64>>> = alloc::vec![None; x.len()];
        let mut residuals = alloc::vec![f64::INFINITY; x.len()];
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.opts.max_iter {
            let mut r_vecs = Vec::with_capacity(x.len());
            for (j, v) in x.iter().enumerate() {
                let av = self.a.mul(v);
                let mv = self.m.mul(v);
                let r: Vec<f64> = (0..n).map(|i| av[i] - lambda[j] * mv[i]).collect();
                let nm: f64 = r.iter().zip(&self.mdiag).map(|(x, d)| x * x / d).sum();
                residuals[j] = libm::sqrt(nm / dot(v, &mv));
                r_vecs.push(r);
            }
            let done = |j: usize| residuals[j] <= self.opts.tol * lambda[j].abs().max(1.0);
            if (0..k).all(done) {
                converged = true;
                break;
            }
            iterations += 1;
            self.maybe_refine_shift(lambda[0]);

            // soft locking: converged columns keep their vectors but get no
            // new search directions
            let active: Vec<usize> = (0..x.len()).filter(|&j| !done(j)).collect();
            let w: Vec<Vec<f64>> = active.iter().map(|&j| self.precondition(&r_vecs[j])).collect();
            let mut basis = Basis { v: Vec::new(), mv: Vec::new() };
            let nx = self.orthonormalize_into(&mut basis, x.clone());
            let nw = self.orthonormalize_into(&mut basis, w);
            let dirs: Vec<Vec<f64>> = active.iter().filter_map(|&j| p[j].clone()).collect();
            let np = self.orthonormalize_into(&mut basis, dirs);
            let (vals, coef) = self.ritz(&basis);
            let keep = x.len().min(basis.v.len());
            let mut new_x = Vec::with_capacity(keep);
            let mut new_p = Vec::with_capacity(keep);
            for j in 0..keep {
                new_x.push(Self::combine(&basis.v, &coef, j, 0..nx + nw + np));
                new_p.push(if nw + np > 0 { Some(Self::combine(&basis.v[nx..], &coef, j, nx..nx + nw + np)) } else { None });
            }
            x = new_x;
            p = new_p;
            lambda = vals[..keep].to_vec();
            residuals.truncate(keep);
        }

        let mut out = SpectrumResult {
            eigenvalues: lambda[..k].to_vec(),
            eigenvectors: x[..k].to_vec(),
            residuals: residuals[..k].to_vec(),
            converged,
            iterations,
            dimension: n,
            tol: self.opts.tol,
        };
        // residuals of the final iterate
        for j in 0..k {
            out.residuals[j] = residual_norm(self.a, self.m, &self.mdiag, &out.eigenvectors[j], out.eigenvalues[j]);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn opts(k: usize) -> SolverOptions {
        SolverOptions { k, ..SolverOptions::default() }
    }

    #[test]
    fn diagonal_pencils() {
        let a = CsrMatrix::diag(&[1.0, 2.0, 3.0]);
        let r = lowest_eigenpairs(&a, &CsrMatrix::identity(3), &opts(2)).unwrap();
        assert_eq!(r.eigenvalues.len(), 2);
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-14 && (r.eigenvalues[1] - 2.0).abs() < 1e-14);
        let r = lowest_eigenpairs(&CsrMatrix::diag(&[2.0, 2.0]), &CsrMatrix::diag(&[2.0, 1.0]), &opts(2)).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-14 && (r.eigenvalues[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn oracle_small_cases() {
        let v = dense_eigen_oracle(&CsrMatrix::diag(&[-3.0]), &CsrMatrix::diag(&[2.0])).unwrap();
        assert!((v[0] + 1.5).abs() < 1e-15);
        // det(A − λM) = 0 with A = [[2,1],[1,3]], M = [[2,1],[1,2]]
        let a = CsrMatrix::from_dense(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let m = CsrMatrix::from_dense(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let v = dense_eigen_oracle(&a, &m).unwrap();
        // 3λ² − 8λ + 5 = 0
        let disc = libm::sqrt(64.0 - 60.0);
        let roots = [(8.0 - disc) / 6.0, (8.0 + disc) / 6.0];
        assert!((v[0] - roots[0]).abs() < 1e-13 && (v[1] - roots[1]).abs() < 1e-13);
        assert!(matches!(
            dense_eigen_oracle(&CsrMatrix::identity(2501), &CsrMatrix::identity(2501)),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(matches!(
            dense_eigen_oracle(&CsrMatrix::identity(2), &CsrMatrix::diag(&[1.0, -1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let n = 50;
        let mut a = Dense::zeros(n);
        let mut g = Dense::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                a.set(i, j, v);
                a.set(j, i, v);
            }
            for j in 0..n {
                g.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let mut m = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| g.at(i, k) * g.at(j, k)).sum();
                m.set(i, j, s + if i == j { n as f64 } else { 0.0 });
            }
        }
        let vals = dense_oracle(&a, &m).unwrap();
        // trace(M⁻¹A) = trace(L⁻¹AL⁻ᵀ)
        let c = a.congruence_inverse(&m.cholesky().unwrap());
        let tr: f64 = (0..n).map(|i| c.at(i, i)).sum();
        let sum: f64 = vals.iter().sum();
        assert!((sum - tr).abs() <= 1e-9 * tr.abs().max(1.0));
    }

    fn laplace_2d(n: usize) -> (CsrMatrix, CsrMatrix) {
        let idx = |i: usize, j: usize| i * n + j;
        let mut a = TripletBuilder::new(n * n, n * n);
        let mut m = TripletBuilder::new(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(idx(i, j), idx(i, j), 4.0 - if i == n / 2 { 6.0 } else { 0.0 });
                m.push(idx(i, j), idx(i, j), 1.0 + 0.1 * ((i + j) % 3) as f64);
                for (di, dj) in [(1, 0), (0, 1)] {
                    if i + di < n && j + dj < n {
                        a.push(idx(i, j), idx(i + di, j + dj), -1.0);
                        a.push(idx(i + di, j + dj), idx(i, j), -1.0);
                    }
                }
            }
        }
        (a.build(), m.build())
    }

    #[test]
    fn lobpcg_matches_oracle() {
        let (a, m) = laplace_2d(22);
        let dense = dense_eigen_oracle(&a, &m).unwrap();
        for pre in [Preconditioner::ShiftInvert, Preconditioner::Jacobi] {
            let o = SolverOptions { k: 6, tol: 1e-9, seed: 4, preconditioner: pre, max_iter: 3000, ..SolverOptions::default() };
            let r = lowest_eigenpairs(&a, &m, &o).unwrap();
            assert!(r.converged, "{pre:?} did not converge");
            for (x, y) in r.eigenvalues.iter().zip(&dense) {
                assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0), "{pre:?}: {x} vs {y}");
            }
            assert!(r.gram_error(&m) < 1e-10);
            let again = lowest_eigenpairs(&a, &m, &o).unwrap();
            assert_eq!(again, r);
        }
    }

    #[test]
    fn below_count_margin() {
        let r = SpectrumResult {
            eigenvalues: alloc::vec![-1.0, -0.5, -1e-9],
            eigenvectors: Vec::new(),
            residuals: alloc::vec![0.0; 3],
            converged: true,
            iterations: 0,
            dimension: 3,
            tol: 1e-8,
        };
        assert_eq!(r.below_count(0.0), 2);
    }
}
