//! Gauge maps R(x) and the induced action on operators and symbols.

use crate::error::{Error, NodeWitness, Result};
use crate::fields::Mat2Field;
use crate::mat2::CMat2;
use crate::symbols::{OperatorData, PrincipalSymbol};
use num_complex::Complex64;

const GAUGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeGroup {
    /// det R = 1 (dimension 4).
    Sl2c,
    /// det R = 1 and R*R = I (dimension 3).
    Su2,
}

impl std::fmt::Display for GaugeGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GaugeGroup::Sl2c => write!(f, "SL(2,C)"),
            GaugeGroup::Su2 => write!(f, "SU(2)"),
        }
    }
}

/// A validated field of determinant-one gauge matrices.
#[derive(Clone)]
pub struct GaugeMap {
    pub field: Mat2Field,
    pub group: GaugeGroup,
}

impl GaugeMap {
    pub fn eval(&self, x: &[f64]) -> Result<CMat2> {
        self.field.eval(x)
    }
}

/// Validate det R(x) = 1 (and unitarity in SU(2) mode) at every grid node.
pub fn validate_gauge(field: Mat2Field, group: GaugeGroup) -> Result<GaugeMap> {
    for idx in field.chart.node_indices() {
        let point = field.chart.node_point(&idx);
        let r = field.eval(&point)?;
        let det_defect = (r.determinant() - Complex64::new(1.0, 0.0)).norm();
        if det_defect > GAUGE_TOL {
            return Err(Error::InvalidGauge {
                reason: format!("det R = {} (defect {det_defect:.3e})", r.determinant()),
                witness: NodeWitness { index: idx, point },
            });
        }
        if group == GaugeGroup::Su2 {
            let unitarity_defect = (r.adjoint() * r - CMat2::identity()).norm();
            if unitarity_defect > GAUGE_TOL {
                return Err(Error::InvalidGauge {
                    reason: format!("R*R != I (defect {unitarity_defect:.3e})"),
                    witness: NodeWitness { index: idx, point },
                });
            }
        }
    }
    Ok(GaugeMap { field, group })
}

/// Pointwise conjugation of a principal symbol: L_prin -> R* L_prin R.
pub fn transform_symbol(sym: &PrincipalSymbol, gauge: &GaugeMap) -> PrincipalSymbol {
    let gauge = gauge.clone();
    let inner = sym.clone();
    PrincipalSymbol::from_fn(sym.chart.clone(), move |x| {
        let r = gauge.eval(x)?;
        let rs = r.adjoint();
        Ok(inner.coefficients(x)?.into_iter().map(|c| rs * c * r).collect())
    })
}

/// Pointwise conjugation of a Hermitian matrix field (subprincipal or
/// covariant subprincipal symbol): M -> R* M R.
pub fn transform_matrix_field(field: &Mat2Field, gauge: &GaugeMap) -> Mat2Field {
    let gauge = gauge.clone();
    let inner = field.clone();
    Mat2Field::from_fn(field.chart.clone(), move |x| {
        let r = gauge.eval(x)?;
        Ok(r.adjoint() * inner.eval(x)? * r)
    })
}

/// The operator-level gauge transformation L -> R* L R:
/// F~^a = R* F^a R and G~ = R* G R + R* F^a R_{x^a}, with the derivative of
/// R taken by central differences.
pub fn transform_operator(op: &OperatorData, gauge: &GaugeMap) -> Result<OperatorData> {
    let chart = op.chart.clone();
    let mut new_f = Vec::with_capacity(op.dim);
    for a in 0..op.dim {
        let f = op.f_coeffs[a].clone();
        let gmap = gauge.clone();
        new_f.push(Mat2Field::from_fn(chart.clone(), move |x| {
            let r = gmap.eval(x)?;
            Ok(r.adjoint() * f.eval(x)? * r)
        }));
    }
    let g = op.g.clone();
    let fs = op.f_coeffs.clone();
    let gmap = gauge.clone();
    let chart2 = chart.clone();
    let new_g = Mat2Field::from_fn(chart.clone(), move |x| {
        let r = gmap.eval(x)?;
        let rs = r.adjoint();
        let mut out = rs * g.eval(x)? * r;
        for a in 0..chart2.dim {
            let h = chart2.default_fd_step(a);
            let dr = gmap.field.fd_partial(x, a, h)?;
            out += rs * fs[a].eval(x)? * dr;
        }
        Ok(out)
    });
    OperatorData::new(chart, new_f, new_g)
}

/// Pointwise product of two gauge maps (group closure).
pub fn compose_gauges(first: &GaugeMap, second: &GaugeMap) -> Result<GaugeMap> {
    if first.group != second.group {
        return Err(Error::Invalid("cannot compose gauge maps from different groups".into()));
    }
    let a = first.field.clone();
    let b = second.field.clone();
    let field = Mat2Field::from_fn(first.field.chart.clone(), move |x| {
        Ok(a.eval(x)? * b.eval(x)?)
    });
    Ok(GaugeMap { field, group: first.group })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Chart;
    use crate::mat2::{cident, pauli};
    use crate::symbols::{frame_to_symbol, metric_from_symbol, Frame};

    fn chart() -> Chart {
        let mut c = Chart::unit_torus(4);
        c.n = vec![8; 4];
        c
    }

    #[test]
    fn identity_is_valid_in_both_groups() {
        let f = Mat2Field::constant(chart(), cident());
        assert!(validate_gauge(f.clone(), GaugeGroup::Sl2c).is_ok());
        assert!(validate_gauge(f, GaugeGroup::Su2).is_ok());
    }

    #[test]
    fn diag_two_half_is_sl2c_but_not_su2() {
        let m = CMat2::new(
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        );
        let f = Mat2Field::constant(chart(), m);
        assert!(validate_gauge(f.clone(), GaugeGroup::Sl2c).is_ok());
        assert!(matches!(
            validate_gauge(f, GaugeGroup::Su2),
            Err(Error::InvalidGauge { .. })
        ));
    }

    #[test]
    fn scaled_identity_is_rejected() {
        let f = Mat2Field::constant(chart(), cident() * Complex64::new(2.0, 0.0));
        assert!(matches!(
            validate_gauge(f, GaugeGroup::Sl2c),
            Err(Error::InvalidGauge { .. })
        ));
    }

    #[test]
    fn identity_gauge_leaves_symbol_unchanged() {
        let sym = frame_to_symbol(&Frame::identity(chart()));
        let gauge = validate_gauge(Mat2Field::constant(chart(), cident()), GaugeGroup::Sl2c).unwrap();
        let transformed = transform_symbol(&sym, &gauge);
        let x = [0.2; 4];
        for (a, b) in sym
            .coefficients(&x)
            .unwrap()
            .iter()
            .zip(transformed.coefficients(&x).unwrap())
        {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_by_antisymmetric_constant() {
        // R = [[0,1],[-1,0]]: s1 -> -s1, s2 -> s2, s3 -> -s3, s4 -> s4,
        // verified by direct 2x2 multiplication.
        let r = CMat2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let gauge = validate_gauge(Mat2Field::constant(chart(), r), GaugeGroup::Sl2c).unwrap();
        let sym = frame_to_symbol(&Frame::identity(chart()));
        let transformed = transform_symbol(&sym, &gauge);
        let cs = transformed.coefficients(&[0.1; 4]).unwrap();
        let expected = [-1.0, 1.0, -1.0, 1.0];
        for (a, sign) in expected.iter().enumerate() {
            let want = pauli(a, 4) * Complex64::new(*sign, 0.0);
            assert!((cs[a] - want).norm() < 1e-14, "s^{}", a + 1);
        }
    }

    #[test]
    fn metric_invariance_under_smooth_gauge() {
        let c = chart();
        // smooth SL(2,C) field: diag(exp(w), exp(-w)), w complex smooth
        let gauge_field = Mat2Field::from_fn(c.clone(), |x| {
            let w = Complex64::new(
                0.2 * (2.0 * std::f64::consts::PI * x[0]).sin(),
                0.1 * (2.0 * std::f64::consts::PI * x[1]).cos(),
            );
            Ok(CMat2::new(
                w.exp(),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                (-w).exp(),
            ))
        });
        let gauge = validate_gauge(gauge_field, GaugeGroup::Sl2c).unwrap();
        let sym = frame_to_symbol(&Frame::identity(c));
        let transformed = transform_symbol(&sym, &gauge);
        let g0 = metric_from_symbol(&sym).unwrap();
        let g1 = metric_from_symbol(&transformed).unwrap();
        for k in 0..20 {
            let t = k as f64 / 19.0;
            let x = [t, 0.4, 1.0 - t, 0.2];
            let delta = (g0.upper(&x).unwrap() - g1.upper(&x).unwrap()).norm();
            assert!(delta < 1e-9, "metric delta {delta}");
        }
    }

    #[test]
    fn constant_gauge_transforms_g_exactly() {
        let c = chart();
        let i = Complex64::new(0.0, 1.0);
        let fs: Vec<Mat2Field> = (0..4)
            .map(|a| Mat2Field::constant(c.clone(), pauli(a, 4) * (-i)))
            .collect();
        let g0 = pauli(2, 4) * Complex64::new(0.5, 0.0);
        let op = OperatorData::new(c.clone(), fs, Mat2Field::constant(c.clone(), g0)).unwrap();
        let r = CMat2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let gauge = validate_gauge(Mat2Field::constant(c, r), GaugeGroup::Sl2c).unwrap();
        let transformed = transform_operator(&op, &gauge).unwrap();
        let got = transformed.g.eval(&[0.3; 4]).unwrap();
        let want = r.adjoint() * g0 * r;
        assert!((got - want).norm() < 1e-9);
    }
}
