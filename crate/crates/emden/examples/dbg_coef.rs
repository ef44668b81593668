use emden::approx::build_omega_refined;
use emden::fem::SymmetryClass;
use emden::geometry::{build_domain, generate_mesh};
use emden::spectral::build_coefficient;
use std::sync::Arc;

fn main() {
    let spec = build_domain(1.5, false).unwrap();
    let mesh = Arc::new(generate_mesh(&spec, 0.25).unwrap());
    let om = build_omega_refined(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14, 1).unwrap();
    let coef = build_coefficient(&om, 1e-6).unwrap();
    coef.debug_cells();
}
