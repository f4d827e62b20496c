//! Principal component analysis via a symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::EmbeddingVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: EmbeddingVector,
    /// `k` orthonormal directions, each of length `dim`.
    pub components: Vec<Vec<f64>>,
    /// Sample variance along each component, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Trace of the sample covariance matrix.
    pub total_variance: f64,
    pub k: usize,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    /// Fraction of the total variance captured by the kept components.
    pub fn explained_ratio(&self) -> f64 {
        if self.total_variance == 0.0 {
            return 1.0;
        }
        self.explained_variance.iter().sum::<f64>() / self.total_variance
    }

    /// Map reduced coordinates back into the input space.
    pub fn reconstruct(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: coords.len(),
            });
        }
        let mut out = self.mean.values().to_vec();
        for (c, comp) in coords.iter().zip(&self.components) {
            for (o, x) in out.iter_mut().zip(comp) {
                *o += c * x;
            }
        }
        Ok(out)
    }
}

/// Fit the top-`k` principal components (sample covariance, divisor n−1).
pub fn fit_pca(vectors: &[EmbeddingVector], k: usize) -> Result<PcaModel> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::Parameter(format!("PCA needs at least 2 vectors, got {n}")));
    }
    let dim = vectors[0].dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    if k == 0 || k > dim.min(n - 1) {
        return Err(Error::Parameter(format!(
            "PCA dimension k={k} must be in 1..={} for n={n}, dim={dim}",
            dim.min(n - 1)
        )));
    }

    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v.values()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, dim, |i, j| vectors[i].values()[j] - mean[j]);
    let denom = (n - 1) as f64;
    let total_variance = centered.iter().map(|x| x * x).sum::<f64>() / denom;

    let (values, directions) = if n > dim {
        let cov = centered.transpose() * &centered / denom;
        let eig = SymmetricEigen::new(cov);
        let order = descending_order(eig.eigenvalues.as_slice());
        let values: Vec<f64> = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
        let dirs: Vec<Vec<f64>> = order
            .iter()
            .take(k)
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        (values, dirs)
    } else {
        gram_components(&centered, k, denom)
    };

    let scale = values.first().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for (value, dir) in values.into_iter().zip(directions) {
        let null = value <= scale * 1e-12 || !value.is_finite();
        let dir = if null {
            // Null-space direction: any unit vector orthogonal to the rest.
            complete_basis(&components, dim)
        } else {
            orthonormalize(dir, &components).unwrap_or_else(|| complete_basis(&components, dim))
        };
        components.push(apply_sign_convention(dir));
        explained.push(if null { 0.0 } else { value });
    }

    Ok(PcaModel {
        mean: EmbeddingVector::new(mean)?,
        components,
        explained_variance: explained,
        total_variance,
        k,
    })
}

/// Eigenpairs of the covariance recovered from the n×n Gram matrix.
fn gram_components(centered: &DMatrix<f64>, k: usize, denom: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let gram = centered * centered.transpose() / denom;
    let eig = SymmetricEigen::new(gram);
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut values = Vec::with_capacity(k);
    let mut dirs = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let lambda = eig.eigenvalues[i];
        let u: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let v = centered.transpose() * u;
        values.push(lambda);
        dirs.push(v.iter().copied().collect());
    }
    (values, dirs)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Gram-Schmidt `dir` against `basis` (twice, for stability) and normalise.
fn orthonormalize(mut dir: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let initial = norm(&dir);
    if initial == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let p: f64 = dir.iter().zip(b).map(|(x, y)| x * y).sum();
            dir.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
    }
    let n = norm(&dir);
    if n <= initial * 1e-8 {
        return None;
    }
    dir.iter_mut().for_each(|x| *x /= n);
    Some(dir)
}

fn complete_basis(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    (0..dim)
        .find_map(|axis| {
            let mut e = vec![0.0; dim];
            e[axis] = 1.0;
            orthonormalize(e, basis)
        })
        .expect("k <= dim leaves room for another basis vector")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Flip `v` so that its largest-magnitude entry (first on ties) is positive.
fn apply_sign_convention(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Coordinates of `v − mean` on each component.
pub fn project_pca(model: &PcaModel, v: &EmbeddingVector) -> Result<Vec<f64>> {
    if v.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: v.dim(),
        });
    }
    Ok(model
        .components
        .iter()
        .map(|comp| {
            comp.iter()
                .zip(v.values())
                .zip(model.mean.values())
                .map(|((c, x), m)| c * (x - m))
                .sum()
        })
        .collect())
}
