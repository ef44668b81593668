use emden::approx::build_omega_refined;
use emden::fem::SymmetryClass;
use emden::geometry::{build_domain, generate_mesh};
use emden::spectral::*;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let spec = build_domain(3.0, false).unwrap();
    let mesh = Arc::new(generate_mesh(&spec, 1.0 / 16.0).unwrap());
    let om = build_omega_refined(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14, 2).unwrap();
    println!("omega built ({:.1?}), a = {}", t0.elapsed(), om.a);
    let t1 = Instant::now();
    let coef = build_coefficient(&om, 1e-6).unwrap();
    println!("coefficient built ({:.1?})", t1.elapsed());
    println!("L4(omega_c) = {}", coef.l4_norm());
    println!("L2 lower = {}", coef.l2_lower());
    println!("diff H1 = {}", regular_diff_h1(&om));
    let cbar = base_problem_coefficient(&om, 3.0).unwrap();
    println!("cbar corner {} arms {:?}", cbar.c_corner, cbar.c_arm);
    for class in [SymmetryClass::Symmetric, SymmetryClass::Antisymmetric] {
        let t2 = Instant::now();
        let mut st = HomotopySettings::default();
        st.verbose = true;
        match homotopy_run(&om, &coef, &cbar, &st, class) {
            Ok(out) => {
                println!("== {:?}: n0 = {}, stages {:?} ({:.1?})", class, out.n0, out.stages, t2.elapsed());
                for e in &out.base {
                    println!("  base {}: lower {}", e.index, e.lower);
                }
                for e in &out.finals {
                    println!("  final {}: [{}, {}]", e.index, e.lower, e.upper);
                }
                match compute_k(&out.finals) {
                    Ok(k) => println!("  K = {}", k),
                    Err(e) => println!("  K error: {e}"),
                }
            }
            Err(e) => println!("== {:?}: ERROR {e} ({:.1?})", class, t2.elapsed()),
        }
    }
    println!("total {:.1?}", t0.elapsed());
}
