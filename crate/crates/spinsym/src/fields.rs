//! Charts, evaluated fields and finite-difference differentiation.

use crate::error::{Error, NodeWitness, Result};
use crate::expr::{ComplexExpr, Expr};
use crate::mat2::CMat2;
use nalgebra::DMatrix;
use std::sync::Arc;

/// A coordinate box with per-axis periodicity flags and grid resolution.
/// The computational stand-in for the manifold.
#[derive(Debug, Clone)]
pub struct Chart {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub periodic: Vec<bool>,
    pub n: Vec<usize>,
}

impl Chart {
    pub fn new(
        dim: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
        periodic: Vec<bool>,
        n: Vec<usize>,
    ) -> Result<Chart> {
        if !(dim == 3 || dim == 4) {
            return Err(Error::InvalidChart(format!("dimension must be 3 or 4, got {dim}")));
        }
        if lo.len() != dim || hi.len() != dim || periodic.len() != dim || n.len() != dim {
            return Err(Error::InvalidChart("axis arrays must all have length dim".into()));
        }
        for a in 0..dim {
            if !(lo[a] < hi[a]) {
                return Err(Error::InvalidChart(format!(
                    "lo[{a}] = {} must be < hi[{a}] = {}",
                    lo[a], hi[a]
                )));
            }
            if n[a] < 8 {
                return Err(Error::InvalidChart(format!(
                    "grid must have at least 8 points per axis, n[{a}] = {}",
                    n[a]
                )));
            }
        }
        Ok(Chart { dim, lo, hi, periodic, n })
    }

    /// Default chart: the unit box [0,1]^dim, all axes periodic, 16 points
    /// per axis (torus topology).
    pub fn unit_torus(dim: usize) -> Chart {
        Chart::new(dim, vec![0.0; dim], vec![1.0; dim], vec![true; dim], vec![16; dim]).unwrap()
    }

    pub fn with_resolution(&self, n: usize) -> Chart {
        let mut chart = self.clone();
        chart.n = vec![n.max(8); self.dim];
        chart
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Default finite-difference step along `axis`.
    pub fn default_fd_step(&self, axis: usize) -> f64 {
        self.extent(axis) * 1e-5
    }

    /// Chart basepoint (the lo corner).
    pub fn basepoint(&self) -> Vec<f64> {
        self.lo.clone()
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim).map(|a| 0.5 * (self.lo[a] + self.hi[a])).collect()
    }

    /// Wrap periodic coordinates into [lo, hi); non-periodic coordinates are
    /// left untouched.
    pub fn wrap(&self, point: &[f64]) -> Vec<f64> {
        let mut out = point.to_vec();
        for a in 0..self.dim {
            if self.periodic[a] {
                let width = self.extent(a);
                let mut t = (out[a] - self.lo[a]) % width;
                if t < 0.0 {
                    t += width;
                }
                out[a] = self.lo[a] + t;
            }
        }
        out
    }

    /// Shift `point` by `delta` along `axis`, wrapping on periodic axes and
    /// refusing to cross non-periodic boundaries.
    pub fn shift(&self, point: &[f64], axis: usize, delta: f64) -> Result<Vec<f64>> {
        let mut out = point.to_vec();
        out[axis] += delta;
        if self.periodic[axis] {
            Ok(self.wrap(&out))
        } else if out[axis] < self.lo[axis] || out[axis] > self.hi[axis] {
            Err(Error::StencilOutOfBounds { axis, point: point.to_vec() })
        } else {
            Ok(out)
        }
    }

    /// Grid node coordinate for multi-index `idx`. Periodic axes place n
    /// nodes on [lo, hi) (hi identified with lo); non-periodic axes place n
    /// nodes on [lo, hi] inclusive.
    pub fn node_point(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim)
            .map(|a| {
                let steps = if self.periodic[a] { self.n[a] } else { self.n[a] - 1 };
                self.lo[a] + self.extent(a) * idx[a] as f64 / steps as f64
            })
            .collect()
    }

    /// Iterate all grid multi-indices in lexicographic order.
    pub fn node_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let dims = self.n.clone();
        let total: usize = dims.iter().product();
        (0..total).map(move |mut flat| {
            let mut idx = vec![0usize; dims.len()];
            for a in (0..dims.len()).rev() {
                idx[a] = flat % dims[a];
                flat /= dims[a];
            }
            idx
        })
    }

    /// Check a scalar field satisfies the periodic matching condition
    /// f(.., lo, ..) = f(.., hi, ..) on every periodic axis, within `tol`.
    pub fn check_periodicity<F>(&self, field: F, tol: f64) -> Result<()>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        for axis in 0..self.dim {
            if !self.periodic[axis] {
                continue;
            }
            for idx in self.node_indices() {
                if idx[axis] != 0 {
                    continue;
                }
                let mut lo_pt = self.node_point(&idx);
                let mut hi_pt = lo_pt.clone();
                lo_pt[axis] = self.lo[axis];
                hi_pt[axis] = self.hi[axis];
                let a = field(&lo_pt)?;
                let b = field(&hi_pt)?;
                if (a - b).abs() > tol {
                    return Err(Error::Invalid(format!(
                        "field is not periodic along axis {axis}: gap {:.3e} at {lo_pt:?}",
                        (a - b).abs()
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Central difference (f(x+h) - f(x-h)) / (2h) of a scalar-valued field.
pub fn fd_partial<F>(chart: &Chart, field: F, point: &[f64], axis: usize, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let fwd = chart.shift(point, axis, h)?;
    let bwd = chart.shift(point, axis, -h)?;
    Ok((field(&fwd)? - field(&bwd)?) / (2.0 * h))
}

/// Central difference of a 2x2 complex matrix field.
pub fn fd_partial_mat2<F>(
    chart: &Chart,
    field: F,
    point: &[f64],
    axis: usize,
    h: f64,
) -> Result<CMat2>
where
    F: Fn(&[f64]) -> Result<CMat2>,
{
    let fwd = chart.shift(point, axis, h)?;
    let bwd = chart.shift(point, axis, -h)?;
    Ok((field(&fwd)? - field(&bwd)?) / num_complex::Complex64::new(2.0 * h, 0.0))
}

// ---------------------------------------------------------------------------
// Grid sweeps (deterministic sequential traversal)
// ---------------------------------------------------------------------------

/// Run `check` at every grid node; returns the first failing node, if any.
pub fn sweep_check<F>(chart: &Chart, mut check: F) -> Result<Option<NodeWitness>>
where
    F: FnMut(&[f64]) -> Result<bool>,
{
    for idx in chart.node_indices() {
        let point = chart.node_point(&idx);
        if !check(&point).map_err(|e| annotate(e, &idx, &point))? {
            return Ok(Some(NodeWitness { index: idx, point }));
        }
    }
    Ok(None)
}

/// Max-norm reduction of a nonnegative per-node quantity.
pub fn sweep_max<F>(chart: &Chart, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut max = 0.0f64;
    for idx in chart.node_indices() {
        let point = chart.node_point(&idx);
        let v = f(&point).map_err(|e| annotate(e, &idx, &point))?;
        if v > max {
            max = v;
        }
    }
    Ok(max)
}

/// Collect a per-node record at every grid node.
pub fn sweep_collect<T, F>(chart: &Chart, mut f: F) -> Result<Vec<(NodeWitness, T)>>
where
    F: FnMut(&[f64]) -> Result<T>,
{
    let mut out = Vec::new();
    for idx in chart.node_indices() {
        let point = chart.node_point(&idx);
        let v = f(&point).map_err(|e| annotate(e, &idx, &point))?;
        out.push((NodeWitness { index: idx, point }, v));
    }
    Ok(out)
}

fn annotate(err: Error, idx: &[usize], point: &[f64]) -> Error {
    match err {
        Error::Eval { offset, message } => Error::Eval {
            offset,
            message: format!("{message} (at grid node {idx:?}, point {point:?})"),
        },
        other => other,
    }
}

// ---------------------------------------------------------------------------
// Field types
// ---------------------------------------------------------------------------

type Mat2Fn = dyn Fn(&[f64]) -> Result<CMat2> + Send + Sync;

/// A 2x2 complex matrix field over a chart. Backed either by expression
/// entries or by an arbitrary pure closure (gauge-transformed coefficients).
#[derive(Clone)]
pub struct Mat2Field {
    pub chart: Chart,
    eval: Arc<Mat2Fn>,
}

impl Mat2Field {
    pub fn from_fn<F>(chart: Chart, f: F) -> Mat2Field
    where
        F: Fn(&[f64]) -> Result<CMat2> + Send + Sync + 'static,
    {
        Mat2Field { chart, eval: Arc::new(f) }
    }

    pub fn from_exprs(chart: Chart, entries: [[ComplexExpr; 2]; 2]) -> Mat2Field {
        Mat2Field::from_fn(chart, move |x| {
            Ok(CMat2::new(
                entries[0][0].eval(x)?,
                entries[0][1].eval(x)?,
                entries[1][0].eval(x)?,
                entries[1][1].eval(x)?,
            ))
        })
    }

    pub fn constant(chart: Chart, value: CMat2) -> Mat2Field {
        Mat2Field::from_fn(chart, move |_| Ok(value))
    }

    pub fn eval(&self, point: &[f64]) -> Result<CMat2> {
        (self.eval)(point)
    }

    pub fn fd_partial(&self, point: &[f64], axis: usize, h: f64) -> Result<CMat2> {
        fd_partial_mat2(&self.chart, |x| self.eval(x), point, axis, h)
    }
}

type VecFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A real vector (or covector) field over a chart.
#[derive(Clone)]
pub struct VectorField {
    pub chart: Chart,
    eval: Arc<VecFn>,
}

impl VectorField {
    pub fn from_fn<F>(chart: Chart, f: F) -> VectorField
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        VectorField { chart, eval: Arc::new(f) }
    }

    pub fn from_exprs(chart: Chart, components: Vec<Expr>) -> VectorField {
        VectorField::from_fn(chart, move |x| {
            components.iter().map(|c| c.eval(x)).collect()
        })
    }

    pub fn constant(chart: Chart, value: Vec<f64>) -> VectorField {
        VectorField::from_fn(chart, move |_| Ok(value.clone()))
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        (self.eval)(point)
    }
}

/// dim x dim table of expressions; row j is vector field e_j with
/// components e_j^alpha.
#[derive(Debug, Clone)]
pub struct VectorFieldSet {
    pub dim: usize,
    pub rows: Vec<Vec<Expr>>,
}

impl VectorFieldSet {
    pub fn new(dim: usize, rows: Vec<Vec<Expr>>) -> Result<VectorFieldSet> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Invalid(format!("expected a {dim}x{dim} expression table")));
        }
        Ok(VectorFieldSet { dim, rows })
    }

    pub fn eval(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for a in 0..self.dim {
                m[(j, a)] = self.rows[j][a].eval(point)?;
            }
        }
        Ok(m)
    }
}
