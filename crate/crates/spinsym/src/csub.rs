//! Covariant subprincipal symbol: matrix adjugation, the three-slot
//! generalized Poisson bracket, the curvature-type correction and the
//! electromagnetic potential extraction.

use crate::error::{Error, NodeWitness, Result};
use crate::fields::{Chart, Mat2Field, VectorField};
use crate::mat2::{hermitian_defect, pauli_basis, CMat2};
use crate::symbols::{frame_to_symbol, Frame, MetricField, OperatorData, PrincipalSymbol};
use nalgebra::DVector;
use num_complex::Complex64;
use std::sync::Arc;

pub use crate::mat2::adjugate;

const HERMITIAN_TOL: f64 = 1e-8;
const IMAG_RESIDUE_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Matrix symbols affine in momentum
// ---------------------------------------------------------------------------

type AffineFn = dyn Fn(&[f64]) -> Result<(CMat2, Vec<CMat2>)> + Send + Sync;

/// A matrix-valued symbol affine in momentum:
/// S(x, p) = K(x) + C_a(x) p_a. Momentum derivatives are analytic
/// (S_{p_a} = C_a), position derivatives are central differences.
#[derive(Clone)]
pub struct AffineSymbol {
    pub chart: Chart,
    parts: Arc<AffineFn>,
}

impl AffineSymbol {
    pub fn from_fn<F>(chart: Chart, f: F) -> AffineSymbol
    where
        F: Fn(&[f64]) -> Result<(CMat2, Vec<CMat2>)> + Send + Sync + 'static,
    {
        AffineSymbol { chart, parts: Arc::new(f) }
    }

    pub fn from_principal(sym: &PrincipalSymbol) -> AffineSymbol {
        let sym = sym.clone();
        AffineSymbol::from_fn(sym.chart.clone(), move |x| {
            Ok((CMat2::zeros(), sym.coefficients(x)?))
        })
    }

    /// adj S for a momentum-affine symbol; adjugation is linear on 2x2
    /// matrices, so the affine structure is preserved.
    pub fn adjugated(&self) -> AffineSymbol {
        let inner = self.clone();
        AffineSymbol::from_fn(self.chart.clone(), move |x| {
            let (k, cs) = inner.parts(x)?;
            Ok((adjugate(&k), cs.iter().map(adjugate).collect()))
        })
    }

    pub fn parts(&self, x: &[f64]) -> Result<(CMat2, Vec<CMat2>)> {
        (self.parts)(x)
    }

    pub fn eval(&self, x: &[f64], p: &[f64]) -> Result<CMat2> {
        let (k, cs) = self.parts(x)?;
        let mut m = k;
        for (c, &pa) in cs.iter().zip(p) {
            m += c * Complex64::new(pa, 0.0);
        }
        Ok(m)
    }

    fn x_partial(&self, x: &[f64], p: &[f64], axis: usize, h: f64) -> Result<CMat2> {
        let fwd = self.chart.shift(x, axis, h)?;
        let bwd = self.chart.shift(x, axis, -h)?;
        Ok((self.eval(&fwd, p)? - self.eval(&bwd, p)?) / Complex64::new(2.0 * h, 0.0))
    }
}

/// Generalized Poisson bracket
/// {F, G, H}(x, p) = F_{x^a} G H_{p_a} - F_{p_a} G H_{x^a}.
pub fn bracket3(
    f: &AffineSymbol,
    g: &AffineSymbol,
    h: &AffineSymbol,
    x: &[f64],
    p: &[f64],
) -> Result<CMat2> {
    let chart = &f.chart;
    let g_val = g.eval(x, p)?;
    let (_, f_lin) = f.parts(x)?;
    let (_, h_lin) = h.parts(x)?;
    let mut out = CMat2::zeros();
    for a in 0..chart.dim {
        let step = chart.default_fd_step(a);
        let f_x = f.x_partial(x, p, a, step)?;
        let h_x = h.x_partial(x, p, a, step)?;
        out += f_x * g_val * h_lin[a] - f_lin[a] * g_val * h_x;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Covariant subprincipal symbol
// ---------------------------------------------------------------------------

/// The correction term (i/16) g_{ab} {L_prin, adj L_prin, L_prin}_{p_a p_b}.
/// The bracket of momentum-linear symbols is quadratic in momentum; the
/// subscript is read as its second momentum derivatives, contracted with
/// g_{ab}, which leaves a matrix-function of x alone.
pub fn csub_correction(sym: &PrincipalSymbol, g: &MetricField, x: &[f64]) -> Result<CMat2> {
    let dim = sym.dim;
    let cs = sym.coefficients(x)?;
    let adj_cs: Vec<CMat2> = cs.iter().map(adjugate).collect();
    // D[c][m] = d C_m / d x^c by central differences
    let mut d = vec![vec![CMat2::zeros(); dim]; dim];
    for c in 0..dim {
        let h = sym.chart.default_fd_step(c);
        let fwd = sym.chart.shift(x, c, h)?;
        let bwd = sym.chart.shift(x, c, -h)?;
        let cf = sym.coefficients(&fwd)?;
        let cb = sym.coefficients(&bwd)?;
        for m in 0..dim {
            d[c][m] = (cf[m] - cb[m]) / Complex64::new(2.0 * h, 0.0);
        }
    }
    let g_lower = g.lower(x)?;
    // quadratic coefficient of the bracket:
    // B_{mn} = sum_c [ (d_c C_m) adj(C_n) C_c - C_c adj(C_m) (d_c C_n) ]
    let b = |m: usize, n: usize| -> CMat2 {
        let mut acc = CMat2::zeros();
        for c in 0..dim {
            acc += d[c][m] * adj_cs[n] * cs[c] - cs[c] * adj_cs[m] * d[c][n];
        }
        acc
    };
    let mut correction = CMat2::zeros();
    for alpha in 0..dim {
        for beta in 0..dim {
            let second = b(alpha, beta) + b(beta, alpha);
            correction += second * Complex64::new(0.0, g_lower[(alpha, beta)] / 16.0);
        }
    }
    Ok(correction)
}

/// Hermitian field L_csub(x) = L_sub(x) + correction(x).
#[derive(Clone)]
pub struct CovariantSub {
    pub field: Mat2Field,
    pub dim: usize,
}

impl CovariantSub {
    pub fn from_field(field: Mat2Field) -> CovariantSub {
        let dim = field.chart.dim;
        CovariantSub { field, dim }
    }

    /// Evaluate with the Hermiticity invariant enforced.
    pub fn eval(&self, x: &[f64]) -> Result<CMat2> {
        let m = self.field.eval(x)?;
        let defect = hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                defect,
                witness: NodeWitness { index: vec![], point: x.to_vec() },
            });
        }
        Ok(m)
    }
}

/// Covariant subprincipal symbol of an operator.
pub fn covariant_subprincipal(op: &OperatorData, g: &MetricField) -> CovariantSub {
    let op = op.clone();
    let g = g.clone();
    let sym = op.principal_symbol();
    let field = Mat2Field::from_fn(op.chart.clone(), move |x| {
        Ok(op.subprincipal_symbol(x, None)? + csub_correction(&sym, &g, x)?)
    });
    CovariantSub::from_field(field)
}

// ---------------------------------------------------------------------------
// Electromagnetic potential
// ---------------------------------------------------------------------------

/// The real covector field A with L_csub(x) = L_prin(x, A(x)).
#[derive(Clone)]
pub struct Potential {
    pub components: VectorField,
}

/// Decompose L_csub in the Pauli basis and solve e_j^a A_a = c_j per point.
pub fn extract_potential(csub: &CovariantSub, frame: &Frame) -> Potential {
    let csub = csub.clone();
    let frame = frame.clone();
    let dim = frame.dim;
    let basis = pauli_basis(dim);
    let components = VectorField::from_fn(frame.chart.clone(), move |x| {
        let m = csub.eval(x)?;
        let mut rhs = DVector::zeros(dim);
        let mut residue = 0.0f64;
        for (j, s) in basis.iter().enumerate() {
            let c = (s * m).trace() / 2.0;
            rhs[j] = c.re;
            residue = residue.max(c.im.abs());
        }
        if residue > IMAG_RESIDUE_TOL {
            return Err(Error::ComplexPotential {
                residue,
                witness: NodeWitness { index: vec![], point: x.to_vec() },
            });
        }
        let e = frame.eval(x)?;
        let lu = e.lu();
        let a = lu.solve(&rhs).ok_or_else(|| Error::SingularFrame {
            witness: NodeWitness { index: vec![], point: x.to_vec() },
        })?;
        Ok(a.iter().copied().collect())
    });
    Potential { components }
}

/// Construct an operator realizing the prescribed principal symbol (through
/// the frame) and covariant subprincipal symbol L_prin(x, A) + base_sub:
/// F^a = -i s^j e_j^a and G = L_sub_target + (1/2)(F^a)_{x^a}.
pub fn build_operator(
    frame: &Frame,
    potential: &VectorField,
    base_sub: Option<Mat2Field>,
) -> Result<OperatorData> {
    let chart = frame.chart.clone();
    let dim = frame.dim;
    let basis = pauli_basis(dim);
    let sym = frame_to_symbol(frame);
    let g = MetricField::from_symbol(&sym);

    let mut f_coeffs = Vec::with_capacity(dim);
    for a in 0..dim {
        let frame_a = frame.clone();
        let basis_a = basis.clone();
        f_coeffs.push(Mat2Field::from_fn(chart.clone(), move |x| {
            let e = frame_a.eval(x)?;
            let mut m = CMat2::zeros();
            for (j, s) in basis_a.iter().enumerate() {
                m += s * Complex64::new(0.0, -e[(j, a)]);
            }
            Ok(m)
        }));
    }

    let sym_g = sym.clone();
    let pot = potential.clone();
    let chart_g = chart.clone();
    let fs = f_coeffs.clone();
    let g_field = Mat2Field::from_fn(chart.clone(), move |x| {
        // target covariant subprincipal symbol at x
        let a_vals = pot.eval(x)?;
        let mut target = sym_g.eval(x, &a_vals)?;
        if let Some(extra) = &base_sub {
            target += extra.eval(x)?;
        }
        // subtract the correction to land on the plain subprincipal symbol
        let sub_target = target - csub_correction(&sym_g, &g, x)?;
        // G = L_sub + (1/2)(F^a)_{x^a}
        let mut div = CMat2::zeros();
        for a in 0..chart_g.dim {
            let h = chart_g.default_fd_step(a);
            div += fs[a].fd_partial(x, a, h)?;
        }
        Ok(sub_target + div * Complex64::new(0.5, 0.0))
    });

    OperatorData::new(chart, f_coeffs, g_field)
}
