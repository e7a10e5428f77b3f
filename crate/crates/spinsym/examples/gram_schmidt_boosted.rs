//! Orthonormalize a tetrad against a Lorentzian metric starting from a
//! boosted timelike seed.

use spinsym::fields::{sweep_max, Chart, VectorField};
use spinsym::frames::{
    gram_schmidt_orthonormalize, normalize_timelike, orthonormality_defect, SeedData,
};
use spinsym::symbols::{Frame, MetricField};

fn main() {
    let chart = Chart::unit_torus(4).with_resolution(8);
    let g = MetricField::from_frame(&Frame::identity(chart.clone()));

    // seed: the time axis boosted with rapidity 1 in the x-direction
    let seed = VectorField::constant(chart.clone(), vec![1f64.sinh(), 0.0, 0.0, 1f64.cosh()]);
    let data = SeedData {
        g: g.clone(),
        e4_seed: Some(normalize_timelike(&g, &seed)),
        reference_basis: None,
    };
    let frame = gram_schmidt_orthonormalize(&data).unwrap();

    let x = chart.center();
    println!("orthonormal tetrad rows at the chart center:");
    println!("{:.6}", frame.eval(&x).unwrap());

    let defect = sweep_max(&chart, |x| orthonormality_defect(&frame, &g, x)).unwrap();
    println!("max orthonormality defect over the grid: {defect:.3e}");
}
