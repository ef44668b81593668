use emden::approx::build_omega_refined;
use emden::fem::SymmetryClass;
use emden::geometry::{build_domain, generate_mesh};
use emden::spectral::*;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let spec = build_domain(3.0, false).unwrap();
    let mesh = Arc::new(generate_mesh(&spec, 1.0 / 16.0).unwrap());
    let om = build_omega_refined(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14, 2).unwrap();
    let t0 = Instant::now();
    let coef = build_coefficient(&om, 1e-6).unwrap();
    println!("coef built {:?}", t0.elapsed());
    let cbar = base_problem_coefficient(&om, 3.0).unwrap();
    debug_widths(&om, &coef, &cbar);
}
