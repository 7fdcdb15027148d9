//! Dense symmetric eigensolvers: Householder tridiagonalization with implicit
//! QL for small Ritz problems, cyclic Jacobi for the brute-force oracle.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, data: alloc::vec![0.0; n * n] }
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Dense { n, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Result<Dense> {
        let n = self.n;
        let mut l = Dense::zeros(n);
        for j in 0..n {
            let mut s = self.at(j, j);
            for k in 0..j {
                s -= l.at(j, k) * l.at(j, k);
            }
            if !(s > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let d = libm::sqrt(s);
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s -= l.at(i, k) * l.at(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(l)
    }

    /// `L⁻¹ A L⁻ᵀ` for a lower triangular `L`, symmetrized.
    pub fn congruence_inverse(&self, l: &Dense) -> Dense {
        let n = self.n;
        // Y = L⁻¹ A by row operations
        let mut y = self.clone();
        for i in 0..n {
            for k in 0..i {
                let f = l.at(i, k);
                if f != 0.0 {
                    let (head, tail) = y.data.split_at_mut(i * n);
                    let rk = &head[k * n..(k + 1) * n];
                    for (a, b) in tail[..n].iter_mut().zip(rk) {
                        *a -= f * b;
                    }
                }
            }
            let d = l.at(i, i);
            for a in &mut y.data[i * n..(i + 1) * n] {
                *a /= d;
            }
        }
        // C = Y L⁻ᵀ, i.e. Cᵀ = L⁻¹ Yᵀ
        let mut c = Dense::zeros(n);
        for r in 0..n {
            for i in 0..n {
                let mut s = y.at(r, i);
                for k in 0..i {
                    s -= l.at(i, k) * c.at(r, k);
                }
                c.set(r, i, s / l.at(i, i));
            }
        }
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (c.at(i, j) + c.at(j, i));
                c.set(i, j, v);
                c.set(j, i, v);
            }
        }
        c
    }
}

/// Eigenvalues (ascending) and column eigenvectors of a symmetric matrix.
pub fn symmetric_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.n;
    let mut v = a.clone();
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n];
    if n == 0 {
        return (d, v);
    }
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    (d, v)
}

fn tred2(v: &mut Dense, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.at(j, j) * f;
                for k in j + 1..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v.at(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        let vii = v.at(i, i);
        v.set(n - 1, i, vii);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    let val = v.at(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

fn tql2(v: &mut Dense, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v.at(k, i + 1);
                        let vk = v.at(k, i);
                        v.set(k, i + 1, s * vk + c * vk1);
                        v.set(k, i, c * vk - s * vk1);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // selection sort keeps eigenvector columns aligned
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                let t = v.at(r, i);
                v.set(r, i, v.at(r, k));
                v.set(r, k, t);
            }
        }
    }
}

/// Eigenvalues (ascending) of a symmetric matrix by Householder reduction to
/// tridiagonal form followed by Sturm-sequence bisection.
pub fn bisection_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.n;
    let mut a = a.clone();
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut v: Vec<f64> = (k + 1..n).map(|i| a.at(i, k)).collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        // p = β A₂₂ v, w = p − (β/2)(pᵀv) v, A₂₂ −= v wᵀ + w vᵀ
        let mut p = alloc::vec![0.0; m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a.data[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            *pi = beta * row.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
        }
        let pv: f64 = p.iter().zip(&v).map(|(x, y)| x * y).sum();
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - 0.5 * beta * pv * vi).collect();
        for i in 0..m {
            let row = &mut a.data[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            let (vi, wi) = (v[i], w[i]);
            for ((x, vj), wj) in row.iter_mut().zip(&v).zip(&w) {
                *x -= vi * wj + wi * vj;
            }
        }
        a.set(k + 1, k, alpha);
        a.set(k, k + 1, alpha);
        for i in k + 2..n {
            a.set(i, k, 0.0);
            a.set(k, i, 0.0);
        }
    }
    for i in 0..n {
        d[i] = a.at(i, i);
        if i + 1 < n {
            e[i] = a.at(i + 1, i);
        }
    }
    tridiagonal_bisection(&d, &e)
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_bisection(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let span = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|j| {
            let (mut a, mut b) = (lo - span * 1e-15, hi + span * 1e-15);
            while b - a > 4.0 * f64::EPSILON * a.abs().max(b.abs()) + f64::MIN_POSITIVE {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(d, e, mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &Dense, tol: f64) -> Vec<f64> {
    let n = a.n;
    let mut a = a.clone();
    let total = libm::sqrt(a.data.iter().map(|x| x * x).sum::<f64>());
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.at(p, q) * a.at(p, q);
            }
        }
        if libm::sqrt(2.0 * off) <= tol * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                let (pp, qq) = (a.at(p, p) - t * apq, a.at(q, q) + t * apq);
                for r in 0..n {
                    let (arp, arq) = (a.at(r, p), a.at(r, q));
                    a.set(r, p, c * arp - s * arq);
                    a.set(r, q, s * arp + c * arq);
                }
                for r in 0..n {
                    let (apr, aqr) = (a.at(r, p), a.at(r, q));
                    a.set(p, r, apr);
                    a.set(q, r, aqr);
                }
                a.set(p, p, pp);
                a.set(q, q, qq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
    d.sort_by(f64::total_cmp);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bisection_matches_jacobi() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (40, 4), (90, 5)] {
            let a = random_symmetric(n, seed);
            let j = jacobi_eigenvalues(&a, 1e-15);
            let b = bisection_eigenvalues(&a);
            for (x, y) in j.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "n = {n}: {x} vs {y}");
            }
        }
        let mut d = Dense::zeros(4);
        for (i, v) in [3.0, 1.0, 1.0, -2.0].iter().enumerate() {
            d.set(i, i, *v);
        }
        for (x, y) in bisection_eigenvalues(&d).iter().zip([-2.0, 1.0, 1.0, 3.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    fn random_symmetric(n: usize, seed: u64) -> Dense {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Dense::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        a
    }

    #[test]
    fn ql_and_jacobi_agree() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (30, 4)] {
            let a = random_symmetric(n, seed);
            let (d, v) = symmetric_eigen(&a);
            let j = jacobi_eigenvalues(&a, 1e-15);
            for (x, y) in d.iter().zip(&j) {
                assert!((x - y).abs() < 1e-12);
            }
            // A v = λ v
            for c in 0..n {
                for r in 0..n {
                    let av: f64 = (0..n).map(|k| a.at(r, k) * v.at(k, c)).sum();
                    assert!((av - d[c] * v.at(r, c)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let mut a = Dense::zeros(4);
        for i in 0..4 {
            a.set(i, i, [2.0, 1.0, 2.0, 1.0][i]);
        }
        assert_eq!(symmetric_eigen(&a).0, [1.0, 1.0, 2.0, 2.0]);
        assert_eq!(jacobi_eigenvalues(&a, 1e-15), [1.0, 1.0, 2.0, 2.0]);
    }
}
