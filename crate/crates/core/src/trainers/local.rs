use std::cell::Cell;

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{cholesky_solve, dot, DenseMatrix};
use crate::metrics::{make_neighborhood, NeighborhoodSpec, SurrogateProvider};
use crate::nn::MlpModel;
use crate::seeds::derive_seed;
use crate::surrogate::LinearSurrogate;

const RANK_TOL: f64 = 1e-10;

/// A per-instance least-squares surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub surrogate: LinearSurrogate,
    /// The neighbourhood was rank-deficient and the fit fell back to gradient descent.
    pub degenerate: bool,
}

/// Unweighted least-squares fit of a linear surrogate to `f` over `neighborhood`.
///
/// Solved in coordinates centred on `x` through the normal equations; a rank-deficient
/// system falls back to gradient descent from zero for at most `max_steps` steps, which
/// yields the minimum-norm solution.
pub fn fit_local_surrogate(
    f: &MlpModel,
    x: &[f64],
    neighborhood: &DenseMatrix,
    max_steps: usize,
) -> Result<LocalFit> {
    let d = f.input_dim();
    ensure_len("local surrogate centre", d, x.len())?;
    ensure_len("neighbourhood width", d, neighborhood.cols())?;
    let n = neighborhood.rows();
    if n == 0 {
        return Err(Error::Invalid("empty neighbourhood".into()));
    }
    let y = f.forward_batch(neighborhood)?;

    let p = d + 1;
    let mut gram = DenseMatrix::zeros(p, p);
    let mut rhs = vec![0.0; p];
    let mut z = vec![0.0; p];
    z[d] = 1.0;
    for (row, &yi) in neighborhood.iter_rows().zip(&y) {
        for j in 0..d {
            z[j] = row[j] - x[j];
        }
        for a in 0..p {
            rhs[a] += z[a] * yi / n as f64;
            for b in a..p {
                let v = gram.get(a, b) + z[a] * z[b] / n as f64;
                gram.set(a, b, v);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram.set(a, b, gram.get(b, a));
        }
    }

    let (coef, degenerate) = match cholesky_solve(&gram, &rhs, RANK_TOL) {
        Some(c) => (c, false),
        None => (descend(&gram, &rhs, max_steps), true),
    };
    let phi = coef[..d].to_vec();
    let bias = coef[d] - dot(&phi, x);
    Ok(LocalFit {
        surrogate: LinearSurrogate::new(phi, bias)?,
        degenerate,
    })
}

fn descend(gram: &DenseMatrix, rhs: &[f64], max_steps: usize) -> Vec<f64> {
    let p = rhs.len();
    let trace: f64 = (0..p).map(|i| gram.get(i, i)).sum();
    let step = 1.0 / (2.0 * trace);
    let mut c = vec![0.0; p];
    for _ in 0..max_steps {
        let mut grad = gram.matvec(&c).expect("square system");
        for (g, r) in grad.iter_mut().zip(rhs) {
            *g = 2.0 * (*g - r);
        }
        if dot(&grad, &grad).sqrt() < 1e-12 {
            break;
        }
        for (ci, gi) in c.iter_mut().zip(&grad) {
            *ci -= step * gi;
        }
    }
    c
}

/// Provides a freshly fitted local surrogate per instance.
///
/// Instance `i` is fitted on its own neighbourhood drawn from `fit_spec` with seed
/// `derive_seed(fit_spec.seed, i)`.
#[derive(Debug)]
pub struct LocalSurrogates {
    pub fit_spec: NeighborhoodSpec,
    pub max_steps: usize,
    degenerate: Cell<usize>,
}

impl LocalSurrogates {
    pub fn new(fit_spec: NeighborhoodSpec, max_steps: usize) -> Self {
        Self {
            fit_spec,
            max_steps,
            degenerate: Cell::new(0),
        }
    }

    /// Number of fits so far that hit the rank-deficient fallback.
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.get()
    }
}

impl SurrogateProvider for LocalSurrogates {
    fn surrogate_for(&self, f: &MlpModel, x: &[f64], index: usize) -> Result<LinearSurrogate> {
        let spec = self
            .fit_spec
            .with_seed(derive_seed(self.fit_spec.seed, index as u64));
        let nb = make_neighborhood(x, &spec)?;
        let fit = fit_local_surrogate(f, x, &nb, self.max_steps)?;
        if fit.degenerate {
            self.degenerate.set(self.degenerate.get() + 1);
        }
        Ok(fit.surrogate)
    }
}
