//! From a frame to the metric and charges: the identity tetrad gives the
//! flat Lorentzian metric with charges (+1, +1); swapping two rows flips
//! the topological charge.

use spinsym::fields::{Chart, VectorField};
use spinsym::symbols::{charges, frame_to_symbol, metric_from_symbol, Frame};

fn main() {
    let chart = Chart::unit_torus(4);
    let frame = Frame::identity(chart.clone());
    let sym = frame_to_symbol(&frame);
    let g = metric_from_symbol(&sym).unwrap();

    let x = chart.center();
    println!("g^ab at the chart center:");
    println!("{:.3}", g.upper(&x).unwrap());

    let q = VectorField::constant(chart.clone(), vec![0.0, 0.0, 0.0, 1.0]);
    let ch = charges(&sym, &g, Some(&q)).unwrap();
    println!("identity tetrad: c_top = {}, c_tem = {:?}", ch.c_top, ch.c_tem);

    let swapped = Frame::from_fn(chart, |_| {
        let mut e = nalgebra::DMatrix::<f64>::identity(4, 4);
        e.swap_rows(0, 1);
        Ok(e)
    });
    let sym = frame_to_symbol(&swapped);
    let g = metric_from_symbol(&sym).unwrap();
    let ch = charges(&sym, &g, None).unwrap();
    println!("row-swapped tetrad: c_top = {}, c_tem = {:?}", ch.c_top, ch.c_tem);
}
