//! Conjugating an operator by a determinant-one matrix field leaves the
//! metric, charges, and electromagnetic potential unchanged and transforms
//! the covariant subprincipal symbol covariantly.

use num_complex::Complex64;
use spinsym::csub::{build_operator, covariant_subprincipal, extract_potential};
use spinsym::fields::{sweep_max, Chart, Mat2Field, VectorField};
use spinsym::gauge::{transform_matrix_field, transform_operator, validate_gauge, GaugeGroup};
use spinsym::mat2::pauli;
use spinsym::symbols::{charges, metric_from_symbol, symbol_to_frame, Frame};

fn main() {
    let chart = Chart::unit_torus(4).with_resolution(8);
    let frame = Frame::from_fn(chart.clone(), |x| {
        let mut e = nalgebra::DMatrix::<f64>::identity(4, 4);
        e[(0, 1)] = 0.1 * (2.0 * std::f64::consts::PI * x[2]).sin();
        e[(2, 3)] = 0.1 * (2.0 * std::f64::consts::PI * x[0]).cos();
        Ok(e)
    });
    let a = VectorField::constant(chart.clone(), vec![0.1, 0.0, 0.0, 0.25]);
    let op = build_operator(&frame, &a, None).unwrap();

    // R = exp(w s3) with smooth w: diagonal, determinant one, not unitary
    let r = Mat2Field::from_fn(chart.clone(), |x| {
        let w = 0.2 * (2.0 * std::f64::consts::PI * x[1]).sin();
        Ok(pauli(3, 4) * Complex64::new(w.cosh(), 0.0)
            + pauli(2, 4) * Complex64::new(w.sinh(), 0.0))
    });
    let gauge = validate_gauge(r, GaugeGroup::Sl2c).unwrap();
    let transformed = transform_operator(&op, &gauge).unwrap();

    let g = metric_from_symbol(&op.principal_symbol()).unwrap();
    let g_t = metric_from_symbol(&transformed.principal_symbol()).unwrap();
    let metric_delta = sweep_max(&chart, |x| Ok((g.upper(x)? - g_t.upper(x)?).norm())).unwrap();
    println!("metric delta:        {metric_delta:.3e}");

    let ch = charges(&op.principal_symbol(), &g, None).unwrap();
    let ch_t = charges(&transformed.principal_symbol(), &g_t, None).unwrap();
    println!("charges:             {:?} -> {:?}", (ch.c_top, ch.c_tem), (ch_t.c_top, ch_t.c_tem));

    let csub = covariant_subprincipal(&op, &g);
    let csub_t = covariant_subprincipal(&transformed, &g_t);
    let conjugated = transform_matrix_field(&csub.field, &gauge);
    let x = chart.center();
    let two_path = (csub_t.field.eval(&x).unwrap() - conjugated.eval(&x).unwrap()).norm();
    println!("csub two-path delta: {two_path:.3e}");

    let pot = extract_potential(&csub, &symbol_to_frame(&op.principal_symbol()));
    let pot_t = extract_potential(&csub_t, &symbol_to_frame(&transformed.principal_symbol()));
    println!("potential:           {:?}", pot.components.eval(&x).unwrap());
    println!("after gauge:         {:?}", pot_t.components.eval(&x).unwrap());
}
