//! Double-cover path lifting: framing equivalence and spin-structure
//! classification on periodic charts.

use crate::error::{Error, NodeWitness, Result};
use crate::fields::Chart;
use crate::mat2::{pauli_basis, CMat2};
use crate::symbols::{Frame, MetricField};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

const ROTATION_TOL: f64 = 1e-8;
const ORTHONORMALITY_TOL: f64 = 1e-8;
const CLOSURE_TOL: f64 = 1e-9;
/// d_min/d_max ratio above which the nearest-preimage choice is ambiguous.
const AMBIGUITY_RATIO: f64 = 0.9;

pub const DEFAULT_LOOP_SAMPLES: usize = 64;
pub const MAX_LOOP_SAMPLES: usize = 1024;

// ---------------------------------------------------------------------------
// Quaternions and the SU(2) -> SO(3) cover
// ---------------------------------------------------------------------------

/// Unit quaternion w + xi + yj + zk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Quat {
        Quat { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &Quat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn neg(&self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }

    pub fn axis_angle(axis: [f64; 3], angle: f64) -> Quat {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, c) = ((angle / 2.0).sin(), (angle / 2.0).cos());
        Quat::new(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    /// The SU(2) matrix w I - i (x s1 + y s2 + z s3).
    pub fn to_su2(&self) -> CMat2 {
        let basis = pauli_basis(3);
        let mut m = CMat2::identity() * Complex64::new(self.w, 0.0);
        let i = Complex64::new(0.0, 1.0);
        m -= basis[0] * (i * Complex64::new(self.x, 0.0));
        m -= basis[1] * (i * Complex64::new(self.y, 0.0));
        m -= basis[2] * (i * Complex64::new(self.z, 0.0));
        m
    }
}

/// Adjoint representation: the rotation of conjugation by a unit quaternion.
pub fn ad_su2_to_so3(q: &Quat) -> Result<DMatrix<f64>> {
    let n = q.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitQuaternion(n));
    }
    let (w, x, y, z) = (q.w, q.x, q.y, q.z);
    let mut m = DMatrix::zeros(3, 3);
    m[(0, 0)] = 1.0 - 2.0 * (y * y + z * z);
    m[(0, 1)] = 2.0 * (x * y - w * z);
    m[(0, 2)] = 2.0 * (x * z + w * y);
    m[(1, 0)] = 2.0 * (x * y + w * z);
    m[(1, 1)] = 1.0 - 2.0 * (x * x + z * z);
    m[(1, 2)] = 2.0 * (y * z - w * x);
    m[(2, 0)] = 2.0 * (x * z - w * y);
    m[(2, 1)] = 2.0 * (y * z + w * x);
    m[(2, 2)] = 1.0 - 2.0 * (x * x + y * y);
    Ok(m)
}

fn check_rotation(m: &DMatrix<f64>) -> Result<()> {
    let n = m.nrows();
    let defect = (m.transpose() * m - DMatrix::<f64>::identity(n, n)).norm();
    if defect > ROTATION_TOL {
        return Err(Error::NotRotation(format!("orthogonality defect {defect:.3e}")));
    }
    let det = m.determinant();
    if (det - 1.0).abs() > ROTATION_TOL {
        return Err(Error::NotRotation(format!("det = {det}")));
    }
    Ok(())
}

/// Canonical quaternion preimage of a rotation matrix (Shepperd's method).
fn quat_from_rotation(m: &DMatrix<f64>) -> Quat {
    let t = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let q = if t > m[(0, 0)] && t > m[(1, 1)] && t > m[(2, 2)] {
        let r = (1.0 + t).sqrt();
        let s = 0.5 / r;
        Quat::new(
            0.5 * r,
            (m[(2, 1)] - m[(1, 2)]) * s,
            (m[(0, 2)] - m[(2, 0)]) * s,
            (m[(1, 0)] - m[(0, 1)]) * s,
        )
    } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
        let r = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
        let s = 0.5 / r;
        Quat::new(
            (m[(2, 1)] - m[(1, 2)]) * s,
            0.5 * r,
            (m[(0, 1)] + m[(1, 0)]) * s,
            (m[(0, 2)] + m[(2, 0)]) * s,
        )
    } else if m[(1, 1)] >= m[(2, 2)] {
        let r = (1.0 - m[(0, 0)] + m[(1, 1)] - m[(2, 2)]).sqrt();
        let s = 0.5 / r;
        Quat::new(
            (m[(0, 2)] - m[(2, 0)]) * s,
            (m[(0, 1)] + m[(1, 0)]) * s,
            0.5 * r,
            (m[(1, 2)] + m[(2, 1)]) * s,
        )
    } else {
        let r = (1.0 - m[(0, 0)] - m[(1, 1)] + m[(2, 2)]).sqrt();
        let s = 0.5 / r;
        Quat::new(
            (m[(1, 0)] - m[(0, 1)]) * s,
            (m[(0, 2)] + m[(2, 0)]) * s,
            (m[(1, 2)] + m[(2, 1)]) * s,
            0.5 * r,
        )
    };
    let n = q.norm();
    Quat::new(q.w / n, q.x / n, q.y / n, q.z / n)
}

/// Local inverse of the double cover: the preimage of `m` closer to `near`.
pub fn so3_local_lift(m: &DMatrix<f64>, near: &Quat) -> Result<Quat> {
    check_rotation(m)?;
    let q = quat_from_rotation(m);
    let d = q.dot(near);
    if d.abs() < 1e-9 {
        return Err(Error::AmbiguousLift { step: 0 });
    }
    Ok(if d >= 0.0 { q } else { q.neg() })
}

// ---------------------------------------------------------------------------
// SL(2,C) -> SO+(3,1)
// ---------------------------------------------------------------------------

/// Adjoint action of S on Hermitian matrices read back in the Pauli basis:
/// (Ad S)^k_j = Re tr(s^k S s^j S*) / 2.
pub fn ad_sl2c_to_so31(s: &CMat2) -> DMatrix<f64> {
    let basis = pauli_basis(4);
    let mut m = DMatrix::zeros(4, 4);
    for k in 0..4 {
        for j in 0..4 {
            m[(k, j)] = ((basis[k] * s * basis[j] * s.adjoint()).trace() / 2.0).re;
        }
    }
    m
}

fn check_restricted_lorentz(m: &DMatrix<f64>) -> Result<()> {
    let eta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
    let defect = (m.transpose() * &eta * m - &eta).norm();
    if defect > ROTATION_TOL {
        return Err(Error::NotRotation(format!("eta-orthogonality defect {defect:.3e}")));
    }
    let det = m.determinant();
    if (det - 1.0).abs() > 1e-6 {
        return Err(Error::NotRotation(format!("det = {det}")));
    }
    if m[(3, 3)] < 1.0 - 1e-8 {
        return Err(Error::NotRotation(format!("not orthochronous: entry (4,4) = {}", m[(3, 3)])));
    }
    Ok(())
}

/// Canonical SL(2,C) preimage of a restricted Lorentz transformation via the
/// boost-rotation factorization. The boost part is the positive Hermitian
/// factor moving the time axis to its image, the remaining rotation lifts
/// through the quaternion cover.
fn sl2c_from_lorentz(m: &DMatrix<f64>) -> Result<CMat2> {
    check_restricted_lorentz(m)?;
    let basis = pauli_basis(4);
    // image of the time axis
    let u = [m[(0, 3)], m[(1, 3)], m[(2, 3)], m[(3, 3)]];
    let gamma = u[3].max(1.0);
    let spatial = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let (boost_su, boost_vec);
    if spatial < 1e-14 {
        boost_su = CMat2::identity();
        boost_vec = DMatrix::identity(4, 4);
    } else {
        let n = [u[0] / spatial, u[1] / spatial, u[2] / spatial];
        let phi = gamma.acosh();
        let (ch, sh) = ((phi / 2.0).cosh(), (phi / 2.0).sinh());
        let mut s = CMat2::identity() * Complex64::new(ch, 0.0);
        for k in 0..3 {
            s += basis[k] * Complex64::new(sh * n[k], 0.0);
        }
        boost_su = s;
        // the matching 4x4 boost
        let mut b = DMatrix::identity(4, 4);
        for i in 0..3 {
            for j in 0..3 {
                b[(i, j)] += (gamma - 1.0) * n[i] * n[j];
            }
            b[(i, 3)] = spatial * n[i];
            b[(3, i)] = spatial * n[i];
        }
        b[(3, 3)] = gamma;
        boost_vec = b;
    }
    // residual rotation fixing the time axis
    let inv_boost = boost_vec.clone().try_inverse().ok_or_else(|| {
        Error::NotRotation("boost factor is singular".into())
    })?;
    let residual = inv_boost * m;
    let rot3 = residual.view((0, 0), (3, 3)).clone_owned();
    check_rotation(&rot3)?;
    let q = quat_from_rotation(&rot3);
    Ok(boost_su * q.to_su2())
}

// ---------------------------------------------------------------------------
// Rotation paths and loop lifting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverGroup {
    So3,
    So31,
}

/// A discretized closed path of rotation / restricted Lorentz matrices.
#[derive(Clone)]
pub struct RotationPath {
    pub group: CoverGroup,
    pub samples: Vec<DMatrix<f64>>,
}

impl RotationPath {
    pub fn new(group: CoverGroup, samples: Vec<DMatrix<f64>>) -> Result<RotationPath> {
        if samples.len() < 2 {
            return Err(Error::Invalid("a loop needs at least two samples".into()));
        }
        let gap = (samples.first().unwrap() - samples.last().unwrap()).norm();
        if gap > CLOSURE_TOL {
            return Err(Error::PathNotClosed(gap));
        }
        if group == CoverGroup::So3 {
            // enforce the step-angle bound directly
            for (k, pair) in samples.windows(2).enumerate() {
                let rel = pair[0].transpose() * &pair[1];
                let cos_angle = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
                if cos_angle.acos() >= std::f64::consts::FRAC_PI_2 {
                    return Err(Error::AmbiguousLift { step: k + 1 });
                }
            }
        }
        Ok(RotationPath { group, samples })
    }

    fn canonical_lift(&self, m: &DMatrix<f64>) -> Result<CMat2> {
        match self.group {
            CoverGroup::So3 => {
                check_rotation(m)?;
                Ok(quat_from_rotation(m).to_su2())
            }
            CoverGroup::So31 => sl2c_from_lorentz(m),
        }
    }

    fn verify_lift(&self, s: &CMat2, m: &DMatrix<f64>) -> Result<()> {
        let rebuilt = match self.group {
            CoverGroup::So3 => {
                let full = ad_sl2c_to_so31(s);
                full.view((0, 0), (3, 3)).clone_owned()
            }
            CoverGroup::So31 => ad_sl2c_to_so31(s),
        };
        let gap = (&rebuilt - m).norm();
        if gap > 1e-6 {
            return Err(Error::NotRotation(format!("lift verification failed, gap {gap:.3e}")));
        }
        Ok(())
    }
}

/// Lift the loop sample-by-sample with sheet continuity; +1 if the lift
/// closes, -1 if it returns to the opposite sheet.
pub fn lift_loop(path: &RotationPath) -> Result<i8> {
    let start = path.canonical_lift(&path.samples[0])?;
    path.verify_lift(&start, &path.samples[0])?;
    let mut current = start;
    for (step, m) in path.samples.iter().enumerate().skip(1) {
        let candidate = path.canonical_lift(m)?;
        let d_plus = (candidate - current).norm();
        let d_minus = (-candidate - current).norm();
        let (d_min, d_max) = if d_plus <= d_minus { (d_plus, d_minus) } else { (d_minus, d_plus) };
        if d_max > 0.0 && d_min / d_max > AMBIGUITY_RATIO {
            return Err(Error::AmbiguousLift { step });
        }
        current = if d_plus <= d_minus { candidate } else { -candidate };
        path.verify_lift(&current, m)?;
    }
    let d_plus = (current - start).norm();
    let d_minus = (current + start).norm();
    Ok(if d_plus <= d_minus { 1 } else { -1 })
}

// ---------------------------------------------------------------------------
// Relating maps between framings
// ---------------------------------------------------------------------------

type MapFn = dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync;

/// Pointwise matrix expressing the second frame in the first:
/// e2_j = sum_k C_{jk} e1_k with C_{jk} = eta_kk g(e2_j, e1_k).
#[derive(Clone)]
pub struct RelatingMap {
    pub chart: Chart,
    pub group: CoverGroup,
    eval: Arc<MapFn>,
}

impl RelatingMap {
    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        (self.eval)(x)
    }
}

fn frame_signature(dim: usize) -> Vec<f64> {
    let mut eta = vec![1.0; dim];
    if dim == 4 {
        eta[3] = -1.0;
    }
    eta
}

pub fn relating_map(f1: &Frame, f2: &Frame, g: &MetricField) -> Result<RelatingMap> {
    if f1.dim != f2.dim {
        return Err(Error::Invalid("frames have different dimensions".into()));
    }
    let dim = f1.dim;
    let group = if dim == 4 { CoverGroup::So31 } else { CoverGroup::So3 };
    let eta = frame_signature(dim);
    let chart = f1.chart.clone();
    let (f1, f2, g) = (f1.clone(), f2.clone(), g.clone());
    let eval = move |x: &[f64]| -> Result<DMatrix<f64>> {
        let gl = g.lower(x)?;
        let e1 = f1.eval(x)?;
        let e2 = f2.eval(x)?;
        // orthonormality of both frames
        for (name, e) in [("first", &e1), ("second", &e2)] {
            let gram = e * &gl * e.transpose();
            let mut defect = 0.0f64;
            for j in 0..dim {
                for k in 0..dim {
                    let expected = if j == k { eta[j] } else { 0.0 };
                    defect = defect.max((gram[(j, k)] - expected).abs());
                }
            }
            if defect > ORTHONORMALITY_TOL {
                return Err(Error::NotOrthonormal {
                    defect,
                    witness: NodeWitness { index: vec![], point: x.to_vec() },
                });
            }
            let _ = name;
        }
        let mut c = &e2 * &gl * e1.transpose();
        for k in 0..dim {
            for j in 0..dim {
                c[(j, k)] *= eta[k];
            }
        }
        // identity-component checks
        let det = c.determinant();
        if (det - 1.0).abs() > 1e-6 {
            return Err(Error::OutsideIdentityComponent {
                reason: format!("det = {det}"),
                witness: NodeWitness { index: vec![], point: x.to_vec() },
            });
        }
        if dim == 4 && c[(3, 3)] <= 0.0 {
            return Err(Error::OutsideIdentityComponent {
                reason: format!("time-time entry = {}", c[(3, 3)]),
                witness: NodeWitness { index: vec![], point: x.to_vec() },
            });
        }
        Ok(c)
    };
    Ok(RelatingMap { chart, group, eval: Arc::new(eval) })
}

// ---------------------------------------------------------------------------
// Framing equivalence and torus classification
// ---------------------------------------------------------------------------

/// One sign per periodic chart axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HolonomySignature {
    pub signs: Vec<i8>,
}

impl std::fmt::Display for HolonomySignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .signs
            .iter()
            .map(|s| if *s >= 0 { "+1".into() } else { "-1".to_string() })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

impl HolonomySignature {
    pub fn all_plus(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    pub fn entrywise_product(&self, other: &HolonomySignature) -> HolonomySignature {
        HolonomySignature {
            signs: self
                .signs
                .iter()
                .zip(&other.signs)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }
}

/// Sample the relating map along the generator loop of one periodic axis
/// through the chart basepoint.
pub fn axis_loop_path(map: &RelatingMap, axis: usize, samples: usize) -> Result<RotationPath> {
    if !map.chart.periodic[axis] {
        return Err(Error::Invalid(format!("axis {axis} is not periodic")));
    }
    let base = map.chart.basepoint();
    let extent = map.chart.extent(axis);
    let mut mats = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let mut x = base.clone();
        x[axis] += extent * k as f64 / samples as f64;
        let x = map.chart.wrap(&x);
        mats.push(map.eval(&x)?);
    }
    RotationPath::new(map.group, mats)
}

/// Lift a generator loop with automatic sample doubling on ambiguity.
fn lift_axis(map: &RelatingMap, axis: usize, samples: usize) -> Result<i8> {
    let mut count = samples.max(2);
    loop {
        let attempt = axis_loop_path(map, axis, count).and_then(|p| lift_loop(&p));
        match attempt {
            Err(Error::AmbiguousLift { .. }) if count < MAX_LOOP_SAMPLES => count *= 2,
            other => return other,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub signature: HolonomySignature,
    /// Axes the signature entries refer to (the periodic ones, in order).
    pub axes: Vec<usize>,
}

/// Decide framing equivalence: lift the relating map along each periodic
/// axis generator; equivalent iff every holonomy sign is +1.
pub fn framings_equivalent(
    f1: &Frame,
    f2: &Frame,
    g: &MetricField,
    samples: usize,
) -> Result<EquivalenceReport> {
    let map = relating_map(f1, f2, g)?;
    let mut signs = Vec::new();
    let mut axes = Vec::new();
    for axis in 0..map.chart.dim {
        if !map.chart.periodic[axis] {
            continue;
        }
        signs.push(lift_axis(&map, axis, samples)?);
        axes.push(axis);
    }
    let signature = HolonomySignature { signs };
    Ok(EquivalenceReport { equivalent: signature.all_plus(), signature, axes })
}

/// Classify a family of framings on a fully periodic chart by their
/// holonomy signatures relative to a reference framing.
pub fn classify_torus_framings(
    reference: &Frame,
    family: &[Frame],
    g: &MetricField,
    samples: usize,
) -> Result<Vec<HolonomySignature>> {
    let chart = &reference.chart;
    if !chart.periodic.iter().all(|&p| p) {
        return Err(Error::Invalid("torus classification needs a fully periodic chart".into()));
    }
    family
        .iter()
        .map(|f| Ok(framings_equivalent(reference, f, g, samples)?.signature))
        .collect()
}
