//! Orthonormal tetrads/triads from a metric and an optional timelike seed.

use crate::error::{Error, NodeWitness, Result};
use crate::fields::VectorField;
use crate::symbols::{Frame, MetricField};
use nalgebra::DMatrix;

const PIVOT_TOL: f64 = 1e-8;

/// Inputs for the Gram-Schmidt construction.
#[derive(Clone)]
pub struct SeedData {
    pub g: MetricField,
    /// Normalized timelike seed, required in dimension 4.
    pub e4_seed: Option<VectorField>,
    /// Candidate vectors tried in order at each point; defaults to the
    /// coordinate basis.
    pub reference_basis: Option<Vec<Vec<f64>>>,
}

/// Normalize a timelike field to g(u,u) = -1 at every point of evaluation.
pub fn normalize_timelike(g: &MetricField, u: &VectorField) -> VectorField {
    let g = g.clone();
    let u = u.clone();
    VectorField::from_fn(u.chart.clone(), move |x| {
        let v = u.eval(x)?;
        let norm2 = g.dot_lower(x, &v, &v)?;
        if norm2 >= 0.0 {
            return Err(Error::NotTimelike {
                value: norm2,
                witness: NodeWitness { index: vec![], point: x.to_vec() },
            });
        }
        let scale = (-norm2).sqrt();
        Ok(v.into_iter().map(|c| c / scale).collect())
    })
}

/// Gram-Schmidt orthonormalization against the metric. In dimension 4 the
/// last row is the given normalized timelike seed and the remaining rows are
/// built in the induced Riemannian metric on its orthogonal complement; in
/// dimension 3 the reference basis is orthonormalized directly.
///
/// Reference vectors whose projection norm falls below the pivot threshold
/// are skipped in favor of the next candidate.
pub fn gram_schmidt_orthonormalize(seed: &SeedData) -> Result<Frame> {
    let chart = seed.g.chart().clone();
    let dim = chart.dim;
    if dim == 4 && seed.e4_seed.is_none() {
        return Err(Error::Invalid("dimension 4 requires a timelike seed field".into()));
    }
    let reference: Vec<Vec<f64>> = match &seed.reference_basis {
        Some(basis) => {
            if basis.len() < dim || basis.iter().any(|v| v.len() != dim) {
                return Err(Error::Invalid("reference basis must contain dim vectors of length dim".into()));
            }
            basis.clone()
        }
        None => (0..dim)
            .map(|j| (0..dim).map(|a| if a == j { 1.0 } else { 0.0 }).collect())
            .collect(),
    };
    let g = seed.g.clone();
    let e4 = seed.e4_seed.clone();

    Ok(Frame::from_fn(chart, move |x| {
        let gl = g.lower(x)?;
        let dot = |u: &[f64], v: &[f64]| -> f64 {
            let mut acc = 0.0;
            for a in 0..dim {
                for b in 0..dim {
                    acc += gl[(a, b)] * u[a] * v[b];
                }
            }
            acc
        };

        let spatial_count = if dim == 4 { 3 } else { 3.min(dim) };
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let timelike: Option<Vec<f64>> = match &e4 {
            Some(field) => {
                let v = field.eval(x)?;
                let norm2 = dot(&v, &v);
                if (norm2 + 1.0).abs() > 1e-6 {
                    return Err(Error::NotTimelike {
                        value: norm2,
                        witness: NodeWitness { index: vec![], point: x.to_vec() },
                    });
                }
                Some(v)
            }
            None => None,
        };

        let mut candidates = reference.iter();
        while rows.len() < spatial_count {
            let Some(candidate) = candidates.next() else {
                return Err(Error::GramSchmidtBreakdown {
                    witness: NodeWitness { index: vec![], point: x.to_vec() },
                });
            };
            let mut v = candidate.clone();
            // project onto the orthogonal complement of the timelike leg;
            // g(e4,e4) = -1 so the projector is v + g(v,e4) e4
            if let Some(t) = &timelike {
                let c = dot(&v, t);
                for a in 0..dim {
                    v[a] += c * t[a];
                }
            }
            for prev in &rows {
                let c = dot(&v, prev);
                for a in 0..dim {
                    v[a] -= c * prev[a];
                }
            }
            let norm2 = dot(&v, &v);
            if norm2 <= PIVOT_TOL * PIVOT_TOL {
                continue; // pivot: candidate degenerated, try the next one
            }
            let norm = norm2.sqrt();
            rows.push(v.into_iter().map(|c| c / norm).collect());
        }
        if let Some(t) = timelike {
            rows.push(t);
        }

        let mut e = DMatrix::zeros(dim, dim);
        for (j, row) in rows.iter().enumerate() {
            for a in 0..dim {
                e[(j, a)] = row[a];
            }
        }
        Ok(e)
    }))
}

/// Max deviation from the Lorentzian (dim 4) or Euclidean (dim 3)
/// orthonormality relations at `x`.
pub fn orthonormality_defect(frame: &Frame, g: &MetricField, x: &[f64]) -> Result<f64> {
    let dim = frame.dim;
    let e = frame.eval(x)?;
    let gl = g.lower(x)?;
    let gram = &e * gl * e.transpose();
    let mut defect = 0.0f64;
    for j in 0..dim {
        for k in 0..dim {
            let expected = if j != k {
                0.0
            } else if dim == 4 && j == 3 {
                -1.0
            } else {
                1.0
            };
            defect = defect.max((gram[(j, k)] - expected).abs());
        }
    }
    Ok(defect)
}
