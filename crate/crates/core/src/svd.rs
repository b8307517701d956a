//! Truncated SVD: exact (dense) and randomized (range finder with power
//! iterations) variants.
//!
//! Both return singular triplets in descending order with a fixed sign
//! convention: the largest-magnitude entry of every left singular vector
//! is positive. Together with a seeded test matrix this makes results
//! reproducible run to run.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// m × r
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// n × r
    pub v: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct RandomizedParams {
    pub oversamples: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl Default for RandomizedParams {
    fn default() -> Self {
        Self {
            oversamples: 10,
            power_iterations: 4,
            seed: 0,
        }
    }
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Keeps the leading `r` triplets.
    pub fn truncate(mut self, r: usize) -> Self {
        let r = r.min(self.rank());
        self.u = self.u.columns(0, r).into_owned();
        self.v = self.v.columns(0, r).into_owned();
        self.singular_values.truncate(r);
        self
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// Number of singular values above the usual numerical-rank tolerance
    /// `max(m, n) · eps · σ_max`.
    pub fn numerical_rank(&self, m: usize, n: usize) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        let tol = m.max(n) as f64 * f64::EPSILON * smax;
        self.singular_values.iter().filter(|&&s| s > tol).count()
    }
}

fn ordered(u: DMatrix<f64>, s: &[f64], v: DMatrix<f64>, rank: usize) -> TruncatedSvd {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order.truncate(rank);
    let mut uo = DMatrix::zeros(u.nrows(), order.len());
    let mut vo = DMatrix::zeros(v.nrows(), order.len());
    let mut so = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        let mut uc = u.column(src).into_owned();
        let mut vc = v.column(src).into_owned();
        let lead = uc.iamax();
        if uc[lead] < 0.0 {
            uc.neg_mut();
            vc.neg_mut();
        }
        uo.set_column(dst, &uc);
        vo.set_column(dst, &vc);
        so.push(s[src]);
    }
    TruncatedSvd {
        u: uo,
        singular_values: so,
        v: vo,
    }
}

/// Exact SVD of a dense matrix, truncated to `rank`.
pub fn exact(a: &DMatrix<f64>, rank: usize) -> TruncatedSvd {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").transpose();
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    ordered(u, &s, v, rank.min(s.len()))
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Randomized truncated SVD of a sparse matrix.
pub fn randomized(a: &CsrMatrix, rank: usize, params: RandomizedParams) -> TruncatedSvd {
    let (m, n) = (a.nrows(), a.ncols());
    let samples = (rank + params.oversamples).min(m).min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega = DMatrix::from_fn(n, samples, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormal_basis(a.mul_dense(&omega));
    for _ in 0..params.power_iterations {
        let z = orthonormal_basis(a.tr_mul_dense(&q));
        q = orthonormal_basis(a.mul_dense(&z));
    }
    // B = Q^T A, computed as (A^T Q)^T
    let b = a.tr_mul_dense(&q).transpose();
    let small = b.svd(true, true);
    let u = &q * small.u.expect("u requested");
    let v = small.v_t.expect("v_t requested").transpose();
    let s: Vec<f64> = small.singular_values.iter().copied().collect();
    ordered(u, &s, v, rank.min(s.len()))
}
