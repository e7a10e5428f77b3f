//! Expression grammar tour: parse, pretty-print, evaluate, and show how
//! errors carry source offsets.

use spinsym::expr::parse;

fn main() {
    let dim = 4;
    for src in [
        "1 + 2*x1 - x2^2",
        "sin(2*pi*x1) * exp(-x3)",
        "-2^2",
        "cosh(x4)^2 - sinh(x4)^2",
    ] {
        let ast = parse(src, dim).unwrap();
        let value = ast.eval(&[0.25, 0.5, 1.0, 0.3]).unwrap();
        println!("{src:<28} => {ast}  =  {value:.6}");
    }

    // errors point at the offending character
    for bad in ["x5 + 1", "2 ** 3", "sqrt(-1)"] {
        let outcome = parse(bad, dim).and_then(|ast| ast.eval(&[0.0; 4]));
        println!("{bad:<28} => {}", outcome.unwrap_err());
    }
}
