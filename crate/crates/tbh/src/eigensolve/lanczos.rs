//! Thick-restart Lanczos with full reorthogonalization.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SolverError;

/// Matrix-free operator `y = A x`.
pub type Operator<'a> = dyn FnMut(&[f64], &mut [f64]) -> Result<(), SolverError> + 'a;

/// Which end of the operator spectrum is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    LargestMagnitude,
    /// Alternates between the smallest and the largest algebraic values.
    BothEnds,
}

/// When a Ritz value `theta` counts as converged: its residual estimate is at
/// most `tol * max(floor, |theta|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub tol: f64,
    pub floor: f64,
}

impl Tolerance {
    fn bound(&self, theta: f64) -> f64 {
        self.tol * self.floor.max(theta.abs())
    }
}

pub struct RitzPairs {
    pub values: Vec<f64>,
    /// Column-major `n x values.len()`.
    pub vectors: Vec<f64>,
}

pub struct Lanczos {
    n: usize,
    ncv: usize,
    /// `ncv + 1` columns of length `n`; column `len` is the next direction.
    basis: Vec<f64>,
    /// Projected operator `V^T A V` on the first `len` columns.
    t: Mat<f64>,
    len: usize,
    beta: f64,
    ops: usize,
    rng: ChaCha8Rng,
}

impl Lanczos {
    /// Subspace of `ncv` vectors, `ncv < n`, started from a seeded Gaussian
    /// vector.
    pub fn new(n: usize, ncv: usize, seed: u64) -> Self {
        assert!(ncv >= 2 && ncv < n, "subspace size {ncv} must lie in [2, {n})");
        let mut this = Self {
            n,
            ncv,
            basis: vec![0.0; (ncv + 1) * n],
            t: Mat::zeros(ncv, ncv),
            len: 0,
            beta: 0.0,
            ops: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut this.rng)).collect();
        normalize(&mut v);
        this.column_mut(0).copy_from_slice(&v);
        this
    }

    /// Operator applications so far.
    pub fn ops(&self) -> usize {
        self.ops
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.basis[j * self.n..(j + 1) * self.n]
    }

    fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.basis[j * self.n..(j + 1) * self.n]
    }

    fn block(&self, cols: usize) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.basis[..cols * self.n], self.n, cols)
    }

    /// Removes the span of the first `cols` columns from `w` (two passes) and
    /// returns the accumulated coefficients.
    fn orthogonalize(&self, w: &mut [f64], cols: usize) -> Vec<f64> {
        let v = self.block(cols);
        let mut total = vec![0.0; cols];
        for _ in 0..2 {
            let mut h = Mat::<f64>::zeros(cols, 1);
            let wm = MatRef::from_column_major_slice(w, self.n, 1);
            matmul(h.as_mut(), Accum::Replace, v.transpose(), wm, 1.0, Par::Seq);
            let wm = MatMut::from_column_major_slice_mut(w, self.n, 1);
            matmul(wm, Accum::Add, v, h.as_ref(), -1.0, Par::Seq);
            for (t, i) in total.iter_mut().zip(0..cols) {
                *t += h[(i, 0)];
            }
        }
        total
    }

    /// Fills the subspace up to `ncv` vectors.
    fn expand(
        &mut self,
        op: &mut Operator,
        max_ops: usize,
    ) -> Result<(), SolverError> {
        let mut w = vec![0.0; self.n];
        for j in self.len..self.ncv {
            if self.ops >= max_ops {
                return Err(SolverError::NotConverged {
                    converged: 0,
                    wanted: 0,
                    operations: self.ops,
                });
            }
            op(self.column(j), &mut w)?;
            self.ops += 1;
            let scale = norm(&w);
            let h = self.orthogonalize(&mut w, j + 1);
            for (i, &hi) in h.iter().enumerate() {
                self.t[(i, j)] = hi;
                self.t[(j, i)] = hi;
            }
            let mut beta = norm(&w);
            if !beta.is_finite() {
                return Err(SolverError::Breakdown("non-finite Lanczos vector".into()));
            }
            if beta <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                // invariant subspace; continue from a fresh direction
                for x in w.iter_mut() {
                    *x = StandardNormal.sample(&mut self.rng);
                }
                self.orthogonalize(&mut w, j + 1);
                beta = 0.0;
            }
            normalize(&mut w);
            self.column_mut(j + 1).copy_from_slice(&w);
            self.beta = beta;
            self.len = j + 1;
        }
        Ok(())
    }

    fn priority(which: Which, theta: &[f64]) -> Vec<usize> {
        let m = theta.len();
        match which {
            Which::LargestMagnitude => {
                let mut idx: Vec<usize> = (0..m).collect();
                idx.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()).then(a.cmp(&b)));
                idx
            }
            Which::BothEnds => {
                let (mut lo, mut hi) = (0, m);
                let mut idx = Vec::with_capacity(m);
                while lo < hi {
                    idx.push(lo);
                    lo += 1;
                    if lo < hi {
                        hi -= 1;
                        idx.push(hi);
                    }
                }
                idx
            }
        }
    }

    /// Runs until the `nev` most wanted Ritz pairs meet `tol`, or the
    /// operator budget is spent. Can be called again with a tighter
    /// tolerance to continue from the current subspace.
    pub fn solve(
        &mut self,
        op: &mut Operator,
        nev: usize,
        which: Which,
        tol: Tolerance,
        max_ops: usize,
    ) -> Result<RitzPairs, SolverError> {
        assert!(nev >= 1 && nev < self.ncv);
        let keep = (nev + (self.ncv - nev) / 2).min(self.ncv - 1);
        let mut best = 0;
        loop {
            if let Err(e) = self.expand(op, max_ops) {
                return Err(match e {
                    SolverError::NotConverged { operations, .. } => SolverError::NotConverged {
                        converged: best,
                        wanted: nev,
                        operations,
                    },
                    e => e,
                });
            }
            let eig = self
                .t
                .as_ref()
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| SolverError::Breakdown(format!("projected eigenproblem: {e:?}")))?;
            let theta: Vec<f64> = (0..self.ncv).map(|i| eig.S()[i]).collect();
            let y = eig.U();
            let order = Self::priority(which, &theta);
            let converged = order[..nev]
                .iter()
                .filter(|&&i| (self.beta * y[(self.ncv - 1, i)]).abs() <= tol.bound(theta[i]))
                .count();
            best = best.max(converged);
            log::trace!("lanczos: {} ops, {converged}/{nev} converged", self.ops);
            if converged == nev {
                let wanted = &order[..nev];
                return Ok(RitzPairs {
                    values: wanted.iter().map(|&i| theta[i]).collect(),
                    vectors: self.combine(y, wanted),
                });
            }
            if self.ops >= max_ops {
                return Err(SolverError::NotConverged {
                    converged: best,
                    wanted: nev,
                    operations: self.ops,
                });
            }
            self.restart(&theta, y, &order[..keep]);
        }
    }

    /// `V Y[:, cols]`, column-major.
    fn combine(&self, y: MatRef<'_, f64>, cols: &[usize]) -> Vec<f64> {
        let mut ysel = Mat::<f64>::zeros(self.ncv, cols.len());
        for (c, &i) in cols.iter().enumerate() {
            for r in 0..self.ncv {
                ysel[(r, c)] = y[(r, i)];
            }
        }
        let mut out = vec![0.0; self.n * cols.len()];
        let dst = MatMut::from_column_major_slice_mut(&mut out, self.n, cols.len());
        matmul(dst, Accum::Replace, self.block(self.ncv), ysel.as_ref(), 1.0, Par::Seq);
        for v in out.chunks_exact_mut(self.n) {
            normalize(v);
        }
        out
    }

    fn restart(&mut self, theta: &[f64], y: MatRef<'_, f64>, keep: &[usize]) {
        let kept = self.combine(y, keep);
        let p = keep.len();
        let residual = self.column(self.ncv).to_vec();
        self.basis[..p * self.n].copy_from_slice(&kept);
        self.column_mut(p).copy_from_slice(&residual);
        self.t = Mat::zeros(self.ncv, self.ncv);
        for (c, &i) in keep.iter().enumerate() {
            self.t[(c, c)] = theta[i];
        }
        self.len = p;
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let s = norm(x);
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}
