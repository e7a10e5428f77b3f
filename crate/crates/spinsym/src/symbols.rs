//! Principal and subprincipal symbols, the frame correspondence, metric
//! extraction, causal character and the topological/temporal charges.

use crate::error::{Error, NodeWitness, Result};
use crate::fields::{sweep_check, Chart, Mat2Field, VectorField, VectorFieldSet};
use crate::mat2::{adjugate, hermitian_defect, pauli_basis, CMat2};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

pub use crate::mat2::{pauli, pauli_basis as pauli_matrices};

const HERMITIAN_TOL: f64 = 1e-9;
const DEGENERACY_TOL: f64 = 1e-10;
const CHARGE_AGREEMENT_TOL: f64 = 1e-6;
const LIGHTLIKE_TOL: f64 = 1e-9;
const SIGNATURE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Operator data
// ---------------------------------------------------------------------------

/// Coefficients of the first-order operator F^a(x) d/dx^a + G(x).
#[derive(Clone)]
pub struct OperatorData {
    pub chart: Chart,
    pub dim: usize,
    pub f_coeffs: Vec<Mat2Field>,
    pub g: Mat2Field,
}

impl OperatorData {
    pub fn new(chart: Chart, f_coeffs: Vec<Mat2Field>, g: Mat2Field) -> Result<OperatorData> {
        let dim = chart.dim;
        if f_coeffs.len() != dim {
            return Err(Error::Invalid(format!(
                "expected {dim} coefficient fields F^a, got {}",
                f_coeffs.len()
            )));
        }
        Ok(OperatorData { chart, dim, f_coeffs, g })
    }

    pub fn principal_symbol(&self) -> PrincipalSymbol {
        let fs = self.f_coeffs.clone();
        let i = Complex64::new(0.0, 1.0);
        PrincipalSymbol::from_fn(self.chart.clone(), move |x| {
            fs.iter().map(|f| Ok(f.eval(x)? * i)).collect()
        })
    }

    /// Subprincipal symbol G(x) - (1/2) (F^a)_{x^a}(x), x-derivatives by
    /// central differences with step `h` (chart default when `None`).
    pub fn subprincipal_symbol(&self, x: &[f64], h: Option<f64>) -> Result<CMat2> {
        let mut div = CMat2::zeros();
        for a in 0..self.dim {
            let step = h.unwrap_or_else(|| self.chart.default_fd_step(a));
            div += self.f_coeffs[a].fd_partial(x, a, step)?;
        }
        Ok(self.g.eval(x)? - div * Complex64::new(0.5, 0.0))
    }

    /// Formal self-adjointness surrogate: iF^a(x) and L_sub(x) Hermitian at
    /// every grid node where the fd stencil is valid.
    pub fn check_self_adjoint(&self, tol: f64) -> Result<()> {
        for idx in self.chart.node_indices() {
            let point = self.chart.node_point(&idx);
            for f in &self.f_coeffs {
                let m = f.eval(&point)? * Complex64::new(0.0, 1.0);
                let defect = hermitian_defect(&m);
                if defect > tol {
                    return Err(Error::NotHermitian {
                        defect,
                        witness: NodeWitness { index: idx, point },
                    });
                }
            }
            match self.subprincipal_symbol(&point, None) {
                Ok(sub) => {
                    let defect = hermitian_defect(&sub);
                    if defect > tol {
                        return Err(Error::NotHermitian {
                            defect,
                            witness: NodeWitness { index: idx, point },
                        });
                    }
                }
                Err(Error::StencilOutOfBounds { .. }) => {} // boundary node of a non-periodic axis
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    pub fn default_self_adjoint_check(&self) -> Result<()> {
        self.check_self_adjoint(HERMITIAN_TOL)
    }
}

// ---------------------------------------------------------------------------
// Principal symbol
// ---------------------------------------------------------------------------

type CoeffFn = dyn Fn(&[f64]) -> Result<Vec<CMat2>> + Send + Sync;

/// Momentum-linear Hermitian symbol L_prin(x, p) = C_a(x) p_a, stored by its
/// coefficient matrices C_a = (L_prin)_{p_a}.
#[derive(Clone)]
pub struct PrincipalSymbol {
    pub chart: Chart,
    pub dim: usize,
    coeffs: Arc<CoeffFn>,
}

impl PrincipalSymbol {
    pub fn from_fn<F>(chart: Chart, f: F) -> PrincipalSymbol
    where
        F: Fn(&[f64]) -> Result<Vec<CMat2>> + Send + Sync + 'static,
    {
        let dim = chart.dim;
        PrincipalSymbol { chart, dim, coeffs: Arc::new(f) }
    }

    /// Momentum-derivative coefficients C_a(x), a = 1..dim.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<CMat2>> {
        let cs = (self.coeffs)(x)?;
        if cs.len() != self.dim {
            return Err(Error::Invalid(format!(
                "symbol returned {} coefficients, expected {}",
                cs.len(),
                self.dim
            )));
        }
        Ok(cs)
    }

    pub fn eval(&self, x: &[f64], p: &[f64]) -> Result<CMat2> {
        let cs = self.coefficients(x)?;
        let mut m = CMat2::zeros();
        for (c, &pa) in cs.iter().zip(p) {
            m += c * Complex64::new(pa, 0.0);
        }
        Ok(m)
    }

    /// Max Hermiticity defect of the coefficients at `x`.
    pub fn hermitian_defect_at(&self, x: &[f64]) -> Result<f64> {
        Ok(self
            .coefficients(x)?
            .iter()
            .map(hermitian_defect)
            .fold(0.0, f64::max))
    }
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

type FrameFn = dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync;

/// A field of dim x dim real matrices; row j holds the components e_j^a of
/// the vector field e_j.
#[derive(Clone)]
pub struct Frame {
    pub chart: Chart,
    pub dim: usize,
    eval: Arc<FrameFn>,
}

impl Frame {
    pub fn from_fn<F>(chart: Chart, f: F) -> Frame
    where
        F: Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        let dim = chart.dim;
        Frame { chart, dim, eval: Arc::new(f) }
    }

    pub fn from_exprs(chart: Chart, set: VectorFieldSet) -> Result<Frame> {
        if set.dim != chart.dim {
            return Err(Error::Invalid("frame table dimension does not match chart".into()));
        }
        Ok(Frame::from_fn(chart, move |x| set.eval(x)))
    }

    pub fn identity(chart: Chart) -> Frame {
        let dim = chart.dim;
        Frame::from_fn(chart, move |_| Ok(DMatrix::identity(dim, dim)))
    }

    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        (self.eval)(x)
    }

    /// Row j as a vector field.
    pub fn row(&self, j: usize) -> VectorField {
        let this = self.clone();
        VectorField::from_fn(self.chart.clone(), move |x| {
            Ok(this.eval(x)?.row(j).iter().copied().collect())
        })
    }
}

/// L_prin(x,p) = s^j e_j^a(x) p_a.
pub fn frame_to_symbol(frame: &Frame) -> PrincipalSymbol {
    let dim = frame.dim;
    let basis = pauli_basis(dim);
    let frame = frame.clone();
    PrincipalSymbol::from_fn(frame.chart.clone(), move |x| {
        let e = frame.eval(x)?;
        let mut cs = vec![CMat2::zeros(); dim];
        for a in 0..dim {
            for (j, s) in basis.iter().enumerate() {
                cs[a] += s * Complex64::new(e[(j, a)], 0.0);
            }
        }
        Ok(cs)
    })
}

/// Inverse direction of the frame/symbol bijection:
/// e_j^a(x) = tr(s^j C_a(x)) / 2.
pub fn symbol_to_frame(sym: &PrincipalSymbol) -> Frame {
    let dim = sym.dim;
    let basis = pauli_basis(dim);
    let sym = sym.clone();
    Frame::from_fn(sym.chart.clone(), move |x| {
        let cs = sym.coefficients(x)?;
        for c in &cs {
            let defect = hermitian_defect(c);
            if defect > 1e-8 {
                return Err(Error::NotHermitian {
                    defect,
                    witness: NodeWitness { index: vec![], point: x.to_vec() },
                });
            }
        }
        let mut e = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            for (j, s) in basis.iter().enumerate() {
                e[(j, a)] = ((s * cs[a]).trace() / 2.0).re;
            }
        }
        Ok(e)
    })
}

// ---------------------------------------------------------------------------
// Non-degeneracy and ellipticity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct NondegeneracyReport {
    pub nondegenerate: bool,
    pub witness: Option<NodeWitness>,
    pub witness_det: Option<f64>,
    pub min_abs_det: f64,
}

/// det e_j^a(x) != 0 at every grid node.
pub fn check_nondegenerate(sym: &PrincipalSymbol) -> Result<NondegeneracyReport> {
    let frame = symbol_to_frame(sym);
    let mut min_abs = f64::INFINITY;
    for idx in sym.chart.node_indices() {
        let point = sym.chart.node_point(&idx);
        let det = frame.eval(&point)?.determinant();
        min_abs = min_abs.min(det.abs());
        if det.abs() <= DEGENERACY_TOL {
            return Ok(NondegeneracyReport {
                nondegenerate: false,
                witness: Some(NodeWitness { index: idx, point }),
                witness_det: Some(det),
                min_abs_det: min_abs,
            });
        }
    }
    Ok(NondegeneracyReport {
        nondegenerate: true,
        witness: None,
        witness_det: None,
        min_abs_det: min_abs,
    })
}

#[derive(Debug, Clone)]
pub struct EllipticityReport {
    pub trace_free: bool,
    pub elliptic: bool,
    pub witness: Option<NodeWitness>,
}

impl EllipticityReport {
    pub fn ok(&self) -> bool {
        self.trace_free && self.elliptic
    }
}

/// 3D check: trace-free principal symbol, determinant nonzero for all p != 0
/// (sampled on the unit sphere).
pub fn check_elliptic_tracefree(sym: &PrincipalSymbol) -> Result<EllipticityReport> {
    if sym.dim != 3 {
        return Err(Error::Invalid("ellipticity check applies to dimension 3".into()));
    }
    let sphere = unit_sphere_sample(32);
    for idx in sym.chart.node_indices() {
        let point = sym.chart.node_point(&idx);
        let cs = sym.coefficients(&point)?;
        for c in &cs {
            if c.trace().norm() > 1e-10 {
                return Ok(EllipticityReport {
                    trace_free: false,
                    elliptic: false,
                    witness: Some(NodeWitness { index: idx, point }),
                });
            }
        }
        for p in &sphere {
            let m = cs[0] * Complex64::new(p[0], 0.0)
                + cs[1] * Complex64::new(p[1], 0.0)
                + cs[2] * Complex64::new(p[2], 0.0);
            if m.determinant().norm() <= DEGENERACY_TOL {
                return Ok(EllipticityReport {
                    trace_free: true,
                    elliptic: false,
                    witness: Some(NodeWitness { index: idx, point }),
                });
            }
        }
    }
    Ok(EllipticityReport { trace_free: true, elliptic: true, witness: None })
}

fn unit_sphere_sample(count: usize) -> Vec<[f64; 3]> {
    // Fibonacci sphere, deterministic.
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

/// Contravariant metric recovered from det L_prin(x,p) = -g^{ab} p_a p_b by
/// polarization over basis momenta, with its pointwise inverse.
#[derive(Clone)]
pub struct MetricField {
    pub sym: PrincipalSymbol,
    pub dim: usize,
}

impl MetricField {
    pub fn from_symbol(sym: &PrincipalSymbol) -> MetricField {
        MetricField { dim: sym.dim, sym: sym.clone() }
    }

    pub fn from_frame(frame: &Frame) -> MetricField {
        MetricField::from_symbol(&frame_to_symbol(frame))
    }

    pub fn chart(&self) -> &Chart {
        &self.sym.chart
    }

    /// g^{ab}(x).
    pub fn upper(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let cs = self.sym.coefficients(x)?;
        let dets: Vec<Complex64> = cs.iter().map(|c| c.determinant()).collect();
        let mut g = DMatrix::zeros(self.dim, self.dim);
        for a in 0..self.dim {
            g[(a, a)] = -dets[a].re;
            for b in a + 1..self.dim {
                let mixed = (cs[a] + cs[b]).determinant() - dets[a] - dets[b];
                let value = -mixed.re / 2.0;
                g[(a, b)] = value;
                g[(b, a)] = value;
            }
        }
        Ok(g)
    }

    /// g_{ab}(x), the pointwise inverse of g^{ab}(x).
    pub fn lower(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.upper(x)?;
        g.clone().try_inverse().ok_or_else(|| Error::Invalid(format!(
            "metric is singular at {x:?}"
        )))
    }

    /// Inner product of two frame-index vectors with g_{ab}.
    pub fn dot_lower(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let gl = self.lower(x)?;
        let mut acc = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                acc += gl[(a, b)] * u[a] * v[b];
            }
        }
        Ok(acc)
    }

    /// Signature check at every grid node: (+,+,+,-) in dimension 4,
    /// positive definite in dimension 3. Eigenvalues are taken on the
    /// norm-scaled matrix with threshold 1e-9.
    pub fn check_signature(&self) -> Result<()> {
        for idx in self.chart().node_indices() {
            let point = self.chart().node_point(&idx);
            let g = self.upper(&point)?;
            let scale = g.norm().max(1e-300);
            let eigs = (g / scale).symmetric_eigen().eigenvalues;
            let pos = eigs.iter().filter(|&&v| v > SIGNATURE_TOL).count();
            let neg = eigs.iter().filter(|&&v| v < -SIGNATURE_TOL).count();
            let wanted = if self.dim == 4 { (3, 1) } else { (3, 0) };
            if (pos, neg) != wanted {
                return Err(Error::WrongSignature {
                    eigs: eigs.iter().map(|v| v * scale).collect(),
                    witness: NodeWitness { index: idx, point },
                });
            }
        }
        Ok(())
    }
}

/// metric_from_symbol with the signature verified over the whole grid.
pub fn metric_from_symbol(sym: &PrincipalSymbol) -> Result<MetricField> {
    let metric = MetricField::from_symbol(sym);
    metric.check_signature()?;
    Ok(metric)
}

// ---------------------------------------------------------------------------
// Causal character
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalCharacter {
    Spacelike,
    Lightlike,
    Timelike,
    Mixed,
}

impl std::fmt::Display for CausalCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CausalCharacter::Spacelike => "spacelike",
            CausalCharacter::Lightlike => "lightlike",
            CausalCharacter::Timelike => "timelike",
            CausalCharacter::Mixed => "mixed",
        };
        write!(f, "{s}")
    }
}

/// Classify the sign of g_{ab} u^a u^b at every grid node.
pub fn causal_character(g: &MetricField, u: &VectorField) -> Result<CausalCharacter> {
    let mut class: Option<CausalCharacter> = None;
    for idx in g.chart().node_indices() {
        let point = g.chart().node_point(&idx);
        let uv = u.eval(&point)?;
        let value = g.dot_lower(&point, &uv, &uv)?;
        let here = if value.abs() < LIGHTLIKE_TOL {
            CausalCharacter::Lightlike
        } else if value > 0.0 {
            CausalCharacter::Spacelike
        } else {
            CausalCharacter::Timelike
        };
        match class {
            None => class = Some(here),
            Some(prev) if prev != here => return Ok(CausalCharacter::Mixed),
            _ => {}
        }
    }
    Ok(class.unwrap_or(CausalCharacter::Mixed))
}

// ---------------------------------------------------------------------------
// Charges
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Charges {
    pub c_top: i8,
    /// Present only in dimension 4.
    pub c_tem: Option<i8>,
}

/// Topological charge: the trace formula
/// -(i/2) sqrt|det g_{ab}| tr( C_1 C_2 C_3 [C_4] ) and sgn det e_j^a are both
/// computed at every grid node, required to agree and stay constant.
pub fn topological_charge(sym: &PrincipalSymbol, g: &MetricField) -> Result<i8> {
    let frame = symbol_to_frame(sym);
    let mut charge: Option<i8> = None;
    for idx in sym.chart.node_indices() {
        let point = sym.chart.node_point(&idx);
        let cs = sym.coefficients(&point)?;
        // In dimension 4 the four coefficients are alternated with their
        // adjugates (the 2-spinor "tilde" of a Hermitian matrix); a plain
        // product is not invariant under determinant-one conjugation. The
        // real part is exactly sgn det e; the imaginary part is a
        // metric-determined artifact that vanishes for orthogonal tetrads.
        let prod = if sym.dim == 4 {
            adjugate(&cs[0]) * cs[1] * adjugate(&cs[2]) * cs[3]
        } else {
            cs[0] * cs[1] * cs[2]
        };
        let det_lower = g.lower(&point)?.determinant();
        let trace_value =
            Complex64::new(0.0, -0.5) * Complex64::new(det_lower.abs().sqrt(), 0.0) * prod.trace();
        let det_sign = match frame.eval(&point)?.determinant() {
            d if d > 0.0 => 1i8,
            d if d < 0.0 => -1i8,
            _ => {
                return Err(Error::Degenerate {
                    det: 0.0,
                    witness: NodeWitness { index: idx, point },
                })
            }
        };
        // dimension 4: the imaginary part equals the (gauge-invariant)
        // metric combination -(g^12 g^34 - g^13 g^24 + g^14 g^23) sqrt|det g_low|
        let expected_im = if sym.dim == 4 {
            let gu = g.upper(&point)?;
            -(gu[(0, 1)] * gu[(2, 3)] - gu[(0, 2)] * gu[(1, 3)] + gu[(0, 3)] * gu[(1, 2)])
                * det_lower.abs().sqrt()
        } else {
            0.0
        };
        let mismatch =
            (trace_value.re - det_sign as f64).abs().max((trace_value.im - expected_im).abs());
        if mismatch > CHARGE_AGREEMENT_TOL {
            return Err(Error::ChargeMismatch {
                trace_value: trace_value.re,
                det_sign,
                witness: NodeWitness { index: idx, point },
            });
        }
        match charge {
            None => charge = Some(det_sign),
            Some(prev) if prev != det_sign => {
                return Err(Error::ChargeNotConstant(format!(
                    "topological charge flips from {prev} to {det_sign} at {point:?}"
                )))
            }
            _ => {}
        }
    }
    charge.ok_or_else(|| Error::Invalid("empty grid".into()))
}

/// Temporal charge sgn(q_a e_4^a) with respect to a reference covector field
/// q, which must be timelike for the extracted metric at every node.
pub fn temporal_charge(sym: &PrincipalSymbol, g: &MetricField, q: &VectorField) -> Result<i8> {
    if sym.dim != 4 {
        return Err(Error::Invalid("temporal charge applies to dimension 4".into()));
    }
    let mut charge: Option<i8> = None;
    for idx in sym.chart.node_indices() {
        let point = sym.chart.node_point(&idx);
        let qv = q.eval(&point)?;
        // covector causal character uses the contravariant metric
        let gu = g.upper(&point)?;
        let mut qq = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                qq += gu[(a, b)] * qv[a] * qv[b];
            }
        }
        if qq >= 0.0 {
            return Err(Error::NotTimelike {
                value: qq,
                witness: NodeWitness { index: idx, point },
            });
        }
        // tr L_prin(x, q) = 2 q_a e_4^a
        let trace = sym.eval(&point, &qv)?.trace();
        let value = trace.re / 2.0;
        let sign = if value > 0.0 { 1i8 } else { -1i8 };
        match charge {
            None => charge = Some(sign),
            Some(prev) if prev != sign => {
                return Err(Error::ChargeNotConstant(format!(
                    "temporal charge flips from {prev} to {sign} at {point:?}"
                )))
            }
            _ => {}
        }
    }
    charge.ok_or_else(|| Error::Invalid("empty grid".into()))
}

/// Both charges of a 4-dimensional symbol, or the topological charge alone
/// in dimension 3.
pub fn charges(sym: &PrincipalSymbol, g: &MetricField, q: Option<&VectorField>) -> Result<Charges> {
    let c_top = topological_charge(sym, g)?;
    let c_tem = if sym.dim == 4 {
        let default_q = VectorField::constant(sym.chart.clone(), vec![0.0, 0.0, 0.0, 1.0]);
        Some(temporal_charge(sym, g, q.unwrap_or(&default_q))?)
    } else {
        None
    };
    Ok(Charges { c_top, c_tem })
}

/// The timelike trace vector e_4 of a 4-dimensional symbol, checked against
/// the extracted metric at every node.
pub fn check_trace_vector_timelike(sym: &PrincipalSymbol, g: &MetricField) -> Result<()> {
    let frame = symbol_to_frame(sym);
    if let Some(witness) = sweep_check(&sym.chart, |x| {
        let e = frame.eval(x)?;
        let e4: Vec<f64> = e.row(3).iter().copied().collect();
        Ok(g.dot_lower(x, &e4, &e4)? < 0.0)
    })? {
        return Err(Error::NotTimelike { value: 0.0, witness });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fields::VectorFieldSet;

    fn chart(dim: usize) -> Chart {
        let mut c = Chart::unit_torus(dim);
        c.n = vec![8; dim];
        c
    }

    fn minkowski_symbol() -> PrincipalSymbol {
        frame_to_symbol(&Frame::identity(chart(4)))
    }

    #[test]
    fn identity_frame_symbol_values() {
        let sym = minkowski_symbol();
        let x = [0.3, 0.1, 0.7, 0.2];
        let m = sym.eval(&x, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((m - CMat2::identity()).norm() < 1e-15);
        let m = sym.eval(&x, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((m - pauli(0, 4)).norm() < 1e-15);
    }

    #[test]
    fn doubled_row_scales_symbol() {
        let c = chart(4);
        let mut rows = Vec::new();
        for j in 0..4 {
            let mut row = Vec::new();
            for a in 0..4 {
                let v = if j == a {
                    if j == 3 { "2" } else { "1" }
                } else {
                    "0"
                };
                row.push(parse(v, 4).unwrap());
            }
            rows.push(row);
        }
        let frame = Frame::from_exprs(c, VectorFieldSet::new(4, rows).unwrap()).unwrap();
        let sym = frame_to_symbol(&frame);
        let m = sym.eval(&[0.0; 4], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((m - CMat2::identity() * Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symbol_to_frame_pauli_orthogonality() {
        let sym = minkowski_symbol();
        let frame = symbol_to_frame(&sym);
        let e = frame.eval(&[0.1; 4]).unwrap();
        assert!((e - DMatrix::<f64>::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn frame_symbol_roundtrip() {
        // random-ish smooth non-degenerate frame
        let c = chart(4);
        let mut rows = Vec::new();
        for j in 0..4 {
            let mut row = Vec::new();
            for a in 0..4 {
                let base = if j == a { "1" } else { "0" };
                let src = format!(
                    "{base} + 0.1*sin(2*pi*x{}) - 0.07*cos(2*pi*x{})",
                    (j % 4) + 1,
                    (a % 4) + 1
                );
                row.push(parse(&src, 4).unwrap());
            }
            rows.push(row);
        }
        let frame = Frame::from_exprs(c, VectorFieldSet::new(4, rows).unwrap()).unwrap();
        let back = symbol_to_frame(&frame_to_symbol(&frame));
        for k in 0..25 {
            let t = k as f64 / 24.0;
            let x = [t, 0.3 * t, 1.0 - t, 0.5];
            let a = frame.eval(&x).unwrap();
            let b = back.eval(&x).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn minkowski_metric_and_charges() {
        let sym = minkowski_symbol();
        let g = metric_from_symbol(&sym).unwrap();
        let gu = g.upper(&[0.2; 4]).unwrap();
        let eta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
        assert!((gu - eta).norm() < 1e-12);
        let ch = charges(&sym, &g, None).unwrap();
        assert_eq!(ch.c_top, 1);
        assert_eq!(ch.c_tem, Some(1));
    }

    #[test]
    fn row_swap_flips_topological_charge() {
        let c = chart(4);
        let frame = Frame::from_fn(c, |_| {
            let mut e = DMatrix::identity(4, 4);
            e.swap_rows(0, 1);
            Ok(e)
        });
        let sym = frame_to_symbol(&frame);
        let g = metric_from_symbol(&sym).unwrap();
        assert_eq!(topological_charge(&sym, &g).unwrap(), -1);
    }

    #[test]
    fn three_dimensional_charge_and_ellipticity() {
        let sym = frame_to_symbol(&Frame::identity(chart(3)));
        let g = metric_from_symbol(&sym).unwrap();
        let gu = g.upper(&[0.1; 3]).unwrap();
        assert!((gu - DMatrix::<f64>::identity(3, 3)).norm() < 1e-13);
        assert_eq!(topological_charge(&sym, &g).unwrap(), 1);
        assert!(check_elliptic_tracefree(&sym).unwrap().ok());
    }

    #[test]
    fn symbol_with_trace_component_fails_trace_free() {
        let c = chart(3);
        let sym = PrincipalSymbol::from_fn(c, |_| {
            Ok(vec![pauli(0, 4) + pauli(3, 4), pauli(1, 4), pauli(2, 4)])
        });
        let report = check_elliptic_tracefree(&sym).unwrap();
        assert!(!report.trace_free);
    }

    #[test]
    fn degenerate_frame_detected_with_witness() {
        let c = chart(4);
        let frame = Frame::from_fn(c, |_| {
            let mut e = DMatrix::identity(4, 4);
            e.set_row(1, &e.row(0).clone_owned());
            Ok(e)
        });
        let report = check_nondegenerate(&frame_to_symbol(&frame)).unwrap();
        assert!(!report.nondegenerate);
        assert!(report.witness.is_some());
    }

    #[test]
    fn rotated_frame_stays_nondegenerate() {
        let c = chart(4);
        let rows = vec![
            vec![
                parse("cos(2*pi*x1)", 4).unwrap(),
                parse("sin(2*pi*x1)", 4).unwrap(),
                parse("0", 4).unwrap(),
                parse("0", 4).unwrap(),
            ],
            vec![
                parse("-sin(2*pi*x1)", 4).unwrap(),
                parse("cos(2*pi*x1)", 4).unwrap(),
                parse("0", 4).unwrap(),
                parse("0", 4).unwrap(),
            ],
            vec![
                parse("0", 4).unwrap(),
                parse("0", 4).unwrap(),
                parse("1", 4).unwrap(),
                parse("0", 4).unwrap(),
            ],
            vec![
                parse("0", 4).unwrap(),
                parse("0", 4).unwrap(),
                parse("0", 4).unwrap(),
                parse("1", 4).unwrap(),
            ],
        ];
        let frame = Frame::from_exprs(c, VectorFieldSet::new(4, rows).unwrap()).unwrap();
        let report = check_nondegenerate(&frame_to_symbol(&frame)).unwrap();
        assert!(report.nondegenerate);
        assert!(report.min_abs_det > 0.99);
    }

    #[test]
    fn causal_character_minkowski() {
        let sym = minkowski_symbol();
        let g = metric_from_symbol(&sym).unwrap();
        let c = g.chart().clone();
        let mk = |v: [f64; 4]| VectorField::constant(c.clone(), v.to_vec());
        assert_eq!(
            causal_character(&g, &mk([1.0, 0.0, 0.0, 0.0])).unwrap(),
            CausalCharacter::Spacelike
        );
        assert_eq!(
            causal_character(&g, &mk([0.0, 0.0, 0.0, 1.0])).unwrap(),
            CausalCharacter::Timelike
        );
        assert_eq!(
            causal_character(&g, &mk([1.0, 0.0, 0.0, 1.0])).unwrap(),
            CausalCharacter::Lightlike
        );
    }

    #[test]
    fn temporal_charge_signs() {
        let sym = minkowski_symbol();
        let g = metric_from_symbol(&sym).unwrap();
        let c = sym.chart.clone();
        let q_plus = VectorField::constant(c.clone(), vec![0.0, 0.0, 0.0, 1.0]);
        let q_minus = VectorField::constant(c.clone(), vec![0.0, 0.0, 0.0, -1.0]);
        assert_eq!(temporal_charge(&sym, &g, &q_plus).unwrap(), 1);
        assert_eq!(temporal_charge(&sym, &g, &q_minus).unwrap(), -1);

        // boosted frame: e_4 = (sinh 1, 0, 0, cosh 1), q = dx^4
        let boosted = Frame::from_fn(c.clone(), |_| {
            let mut e = DMatrix::identity(4, 4);
            e[(3, 0)] = 1f64.sinh();
            e[(3, 3)] = 1f64.cosh();
            e[(0, 0)] = 1f64.cosh();
            e[(0, 3)] = 1f64.sinh();
            Ok(e)
        });
        let bsym = frame_to_symbol(&boosted);
        let bg = metric_from_symbol(&bsym).unwrap();
        assert_eq!(temporal_charge(&bsym, &bg, &q_plus).unwrap(), 1);
    }

    #[test]
    fn spacelike_q_rejected() {
        let sym = minkowski_symbol();
        let g = metric_from_symbol(&sym).unwrap();
        let q = VectorField::constant(sym.chart.clone(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            temporal_charge(&sym, &g, &q),
            Err(Error::NotTimelike { .. })
        ));
    }

    #[test]
    fn subprincipal_of_constant_coefficients() {
        let c = chart(4);
        let i = Complex64::new(0.0, 1.0);
        let fs: Vec<Mat2Field> = (0..4)
            .map(|a| Mat2Field::constant(c.clone(), pauli(a, 4) * (-i)))
            .collect();
        let g0 = pauli(2, 4) * Complex64::new(0.25, 0.0);
        let op = OperatorData::new(c, fs, Mat2Field::constant(Chart::unit_torus(4), g0)).unwrap();
        let sub = op.subprincipal_symbol(&[0.3; 4], None).unwrap();
        assert!((sub - g0).norm() < 1e-12);
        op.default_self_adjoint_check().unwrap();
    }

    #[test]
    fn subprincipal_cancellation_example() {
        // F^1 = -i s^1 x^1, other F^a = -i s^a constant, G = -(1/2) i ... :
        // with G = (1/2) s^1 * (-?) chosen so L_sub = 0.
        // L_sub = G - (1/2) d(F^1)/dx^1 = G - (1/2)(-i s^1); choose
        // G = -(i/2) s^1 => L_sub = -(i/2)s^1 + (i/2)s^1 = 0.
        let c = Chart::new(4, vec![0.0; 4], vec![1.0; 4], vec![false; 4], vec![8; 4]).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let c2 = c.clone();
        let f1 = Mat2Field::from_fn(c.clone(), move |x| {
            Ok(pauli(0, 4) * (-i) * Complex64::new(x[0], 0.0))
        });
        let mut fs = vec![f1];
        for a in 1..4 {
            fs.push(Mat2Field::constant(c.clone(), pauli(a, 4) * (-i)));
        }
        let g = Mat2Field::constant(c2, pauli(0, 4) * (-i * Complex64::new(0.5, 0.0)));
        let op = OperatorData::new(c, fs, g).unwrap();
        let sub = op.subprincipal_symbol(&[0.5; 4], None).unwrap();
        assert!(sub.norm() < 1e-9, "L_sub = {sub}");
    }
}
