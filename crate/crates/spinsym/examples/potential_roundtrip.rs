//! Build the operator realizing a prescribed electromagnetic potential,
//! then recover the potential from its covariant subprincipal symbol.

use spinsym::csub::{build_operator, covariant_subprincipal, extract_potential};
use spinsym::expr::parse;
use spinsym::fields::{Chart, VectorField};
use spinsym::symbols::{metric_from_symbol, Frame};

fn main() {
    let chart = Chart::unit_torus(4).with_resolution(8);
    let dim = chart.dim;
    let frame = Frame::from_fn(chart.clone(), |x| {
        let mut e = nalgebra::DMatrix::<f64>::identity(4, 4);
        let t = 2.0 * std::f64::consts::PI;
        e[(0, 0)] += 0.1 * (t * x[1]).sin();
        e[(1, 2)] = 0.1 * (t * x[0]).cos();
        e[(3, 3)] += 0.1 * (t * x[2]).cos();
        Ok(e)
    });

    let a = VectorField::from_exprs(
        chart.clone(),
        vec![
            parse("0.2*sin(2*pi*x1)", dim).unwrap(),
            parse("0.1*cos(2*pi*x2)", dim).unwrap(),
            parse("0", dim).unwrap(),
            parse("0.3", dim).unwrap(),
        ],
    );

    let op = build_operator(&frame, &a, None).unwrap();
    let g = metric_from_symbol(&op.principal_symbol()).unwrap();
    let csub = covariant_subprincipal(&op, &g);
    let recovered = extract_potential(&csub, &frame);

    for x in [chart.basepoint(), chart.center(), vec![0.6, 0.1, 0.4, 0.8]] {
        let want = a.eval(&x).unwrap();
        let got = recovered.components.eval(&x).unwrap();
        let err = want
            .iter()
            .zip(&got)
            .map(|(w, g)| (w - g).abs())
            .fold(0.0f64, f64::max);
        println!("x = {x:?}");
        println!("  A given     = {want:?}");
        println!("  A recovered = {got:?}  (max error {err:.2e})");
    }
}
