use std::sync::Arc;
use std::time::Instant;
use emden::fem::SymmetryClass;
use emden::geometry::{build_domain, generate_mesh};
use emden::residual::{bound_residual, embedding_c2, fit_flux, ResidualOptions};

fn main() {
    let t0 = Instant::now();
    let mesh = Arc::new(generate_mesh(&build_domain(3.0, false).unwrap(), 1.0 / 16.0).unwrap());
    println!("cells {} nodes {}", mesh.cells.len(), mesh.nodes.len());
    let om = emden::approx::build_omega_refined(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14, 2).unwrap();
    println!("[{:?}] a = {}, newton resid {:.2e}", t0.elapsed(), om.a, om.newton_residual);
    let c2 = embedding_c2(true);
    let flux = fit_flux(&om, c2.hi).unwrap();
    println!("[{:?}] flux objective {:.3e}", t0.elapsed(), flux.objective);
    let rep = bound_residual(&om, &flux, &c2, &ResidualOptions::default());
    println!("[{:?}] grad {:.4e} div {:.4e} budget {:.4e} delta {:.6}", t0.elapsed(),
        rep.grad_term.hi, rep.div_term.hi, rep.interp_budget.hi, rep.delta.hi);
    println!("budget split: lap {:.4e} cube {:.4e} sign {:.4e}",
        rep.corr_lap, rep.corr_cube, rep.corr_sign);
}
