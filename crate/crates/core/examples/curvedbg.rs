use tgraph_core::shape::burgers::{Phi0, TestShape};
use tgraph_core::shape::fg::{FgField, LimitShape};
use tgraph_core::shape::psi::*;
use tgraph_core::shape::cut::*;
use tgraph_core::geom::C;
use tgraph_core::hexlattice::HexCoord;
use std::f64::consts::PI;
fn main() {
    let ls = LimitShape::build(TestShape::new(
        Phi0::affine(C::from_polar(1.0, PI / 3.0), C::new(0.10, 0.02)),
        C::new(0.0, 0.0), 1.0,
    )).unwrap();
    let delta = 1.0 / 16.0;
    let fg = FgField::build(&ls, None, delta, 0).unwrap();
    let (lambda, margin) = choose_lambda(&fg).unwrap();
    println!("margin {margin:.4}");
    let psi = build_psi(&fg, lambda).unwrap();
    let gx = correct_to_tgraph(&psi, &CorrectionParams::default()).unwrap();
    let input = gx.cut_input();
    // long edge stats
    let mut lens: Vec<f64> = input.edge_class.iter().enumerate()
        .filter(|(_, k)| matches!(k, EdgeClass::Long{..}))
        .map(|(e, _)| gx.graph.edge_length(e)).collect();
    lens.sort_by(|a,b| a.partial_cmp(b).unwrap());
    println!("long edges: n={} min={:.2e} med={:.2e} max={:.2e}", lens.len(), lens[0], lens[lens.len()/2], lens[lens.len()-1]);
    let shift = {
        let mut acc = C::new(0.0, 0.0);
        let mut k = 0;
        for (&(m, n), &v) in &psi.values {
            let z = tgraph_core::hexlattice::plane_position(HexCoord::dual(m, n), delta);
            if let Ok(p) = ls.phi_map(z) { acc += v - p; k += 1; }
        }
        acc / k as f64
    };
    let r_u = 0.55;
    let npts = 256;
    let curve: Vec<C> = (0..npts).map(|k| {
        let t = 2.0 * PI * k as f64 / npts as f64;
        ls.phi_map(C::from_polar(r_u, t)).unwrap() + shift
    }).collect();
    // curve stats
    let cen = curve.iter().sum::<C>() / curve.len() as f64;
    let inr = curve.iter().map(|&q| (q-cen).norm()).fold(f64::INFINITY, f64::min);
    println!("curve inradius {:.3} center ({:.2},{:.2})", inr, cen.re, cen.im);
    // graph extent
    let mut hi: f64 = 0.0;
    for v in &gx.graph.vertices { hi = hi.max((v - cen).norm()); }
    println!("graph max dist from curve center {:.3}", hi);
    match cut_domain(&input, &curve, &CutParams::default()) {
        Ok(cd) => println!("OK whites {}", cd.u_hex.whites.len()),
        Err(e) => println!("FAIL {e}"),
    }
}
