//! Interpretable linear surrogate `g(x) = φ·x + b`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{all_finite, dot, DenseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSurrogate {
    pub phi: Vec<f64>,
    pub bias: f64,
}

impl LinearSurrogate {
    pub fn zeros(d: usize) -> Self {
        Self {
            phi: vec![0.0; d],
            bias: 0.0,
        }
    }

    pub fn new(phi: Vec<f64>, bias: f64) -> Result<Self> {
        if !all_finite(&phi) || !bias.is_finite() {
            return Err(Error::NonFinite("surrogate parameters"));
        }
        Ok(Self { phi, bias })
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        ensure_len("surrogate_predict", self.dim(), x.len())?;
        Ok(dot(&self.phi, x) + self.bias)
    }

    pub fn predict_batch(&self, batch: &DenseMatrix) -> Result<Vec<f64>> {
        ensure_len("surrogate_predict batch cols", self.dim(), batch.cols())?;
        Ok(batch
            .iter_rows()
            .map(|r| dot(&self.phi, r) + self.bias)
            .collect())
    }

    /// Parameters as `(φ₁ … φ_d, b)`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.phi.clone();
        p.push(self.bias);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        ensure_len("surrogate params", self.dim() + 1, params.len())?;
        let d = self.dim();
        self.phi.copy_from_slice(&params[..d]);
        self.bias = params[d];
        Ok(())
    }

    /// Gradient of the batch-mean Point Fidelity `mean((f − g)²)` with respect to
    /// `(φ, b)`, given per-example residuals `f(x) − g(x)`.
    pub fn grad_point_fidelity(&self, batch: &DenseMatrix, residuals: &[f64]) -> Result<Vec<f64>> {
        ensure_len(
            "surrogate_grad_phi residuals",
            batch.rows(),
            residuals.len(),
        )?;
        ensure_len("surrogate_grad_phi batch cols", self.dim(), batch.cols())?;
        let n = batch.rows().max(1) as f64;
        let mut g = vec![0.0; self.dim() + 1];
        let d = self.dim();
        for (row, &r) in batch.iter_rows().zip(residuals) {
            let s = -2.0 * r / n;
            for (gi, xi) in g[..d].iter_mut().zip(row) {
                *gi += s * xi;
            }
            g[d] += s;
        }
        Ok(g)
    }

    pub fn explain(&self, feature_names: &[String]) -> Result<FeatureImportance> {
        ensure_len("explain feature names", self.dim(), feature_names.len())?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        // stable sort keeps index order on ties
        order.sort_by(|&a, &b| self.phi[b].abs().total_cmp(&self.phi[a].abs()));
        let entries = order
            .into_iter()
            .enumerate()
            .map(|(rank, idx)| FeatureWeight {
                name: feature_names[idx].clone(),
                index: idx,
                coefficient: self.phi[idx],
                rank: rank + 1,
            })
            .collect();
        Ok(FeatureImportance {
            entries,
            bias: self.bias,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub name: String,
    pub index: usize,
    pub coefficient: f64,
    /// 1 = largest |coefficient|.
    pub rank: usize,
}

/// Coefficients ranked by magnitude, most important first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub entries: Vec<FeatureWeight>,
    pub bias: f64,
}

impl FeatureImportance {
    /// Tab-separated `rank name coefficient` lines, bias last.
    pub fn to_text(&self) -> String {
        let mut out = String::from("rank\tfeature\tcoefficient\n");
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}", e.rank, e.name, e.coefficient);
        }
        let _ = writeln!(out, "-\tbias\t{}", self.bias);
        out
    }
}

/// Flat export record of a fitted surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateExport {
    pub feature_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl SurrogateExport {
    pub fn new(surrogate: &LinearSurrogate, feature_names: &[String]) -> Result<Self> {
        ensure_len(
            "surrogate export names",
            surrogate.dim(),
            feature_names.len(),
        )?;
        Ok(Self {
            feature_names: feature_names.to_vec(),
            coefficients: surrogate.phi.clone(),
            bias: surrogate.bias,
        })
    }

    pub fn surrogate(&self) -> Result<LinearSurrogate> {
        LinearSurrogate::new(self.coefficients.clone(), self.bias)
    }

    /// `name<TAB>coefficient` per feature, then `(bias)<TAB>b`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (n, c) in self.feature_names.iter().zip(&self.coefficients) {
            let _ = writeln!(out, "{n}\t{c}");
        }
        let _ = writeln!(out, "(bias)\t{}", self.bias);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("feature{i}")).collect()
    }

    #[test]
    fn predict_examples() {
        let g = LinearSurrogate::new(vec![0.0; 4], 0.7).unwrap();
        assert_eq!(g.predict(&[1.0, -3.0, 9.0, 2.0]).unwrap(), 0.7);
        let g = LinearSurrogate::new(vec![1.0, -2.0], 1.0).unwrap();
        assert_eq!(g.predict(&[3.0, 1.0]).unwrap(), 2.0);
        assert!(g.predict(&[1.0]).is_err());
    }

    #[test]
    fn grad_examples() {
        let g = LinearSurrogate::zeros(2);
        let x = DenseMatrix::new(1, 2, vec![1.0, 0.0]).unwrap();
        assert_eq!(g.grad_point_fidelity(&x, &[0.0]).unwrap(), vec![0.0; 3]);
        let r = 0.3;
        assert_eq!(
            g.grad_point_fidelity(&x, &[r]).unwrap(),
            vec![-2.0 * r, 0.0, -2.0 * r]
        );
        assert!(g.grad_point_fidelity(&x, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn explain_ranks_by_magnitude() {
        let g = LinearSurrogate::new(vec![0.5, -3.0, 0.0], 0.0).unwrap();
        let fi = g.explain(&names(3)).unwrap();
        let order: Vec<&str> = fi.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(order, ["feature2", "feature1", "feature3"]);
        assert_eq!(fi.entries[0].rank, 1);

        let tied = LinearSurrogate::new(vec![1.0, -1.0, 1.0], 0.0).unwrap();
        let fi = tied.explain(&names(3)).unwrap();
        let idx: Vec<usize> = fi.entries.iter().map(|e| e.index).collect();
        assert_eq!(idx, [0, 1, 2]);
    }

    #[test]
    fn export_round_trips_through_json() {
        let g = LinearSurrogate::new(vec![0.125, -2.5], 0.3).unwrap();
        let ex = SurrogateExport::new(&g, &names(2)).unwrap();
        let back: SurrogateExport =
            serde_json::from_str(&serde_json::to_string(&ex).unwrap()).unwrap();
        assert_eq!(back.surrogate().unwrap(), g);
        assert_eq!(
            ex.to_text(),
            "feature1\t0.125\nfeature2\t-2.5\n(bias)\t0.3\n"
        );
    }
}
