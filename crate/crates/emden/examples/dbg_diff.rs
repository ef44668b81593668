use emden::approx::build_omega_refined;
use emden::fem::SymmetryClass;
use emden::geometry::{build_domain, generate_mesh};
use emden::quad::gauss_rule_f64;
use std::sync::Arc;

fn main() {
    let spec = build_domain(3.0, false).unwrap();
    let mesh = Arc::new(generate_mesh(&spec, 1.0 / 16.0).unwrap());
    let omc = build_omega_refined(mesh.clone(), SymmetryClass::Symmetric, 8.0, 1e-10, 14, 0).unwrap();
    let omf = build_omega_refined(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14, 2).unwrap();
    println!("a_c = {}, a_f = {}", omc.a, omf.a);
    let (pts, wts) = gauss_rule_f64(4);
    let fm = &omf.space.mesh;
    let h = fm.h;
    let mut grad2 = 0.0;
    let mut val2 = 0.0;
    let mut l4c = 0.0;
    let mut l4f = 0.0;
    for cell in &fm.cells {
        let x0 = cell.cx as f64 * h;
        let y0 = cell.cy as f64 * h;
        for (i, &xi) in pts.iter().enumerate() {
            for (j, &yj) in pts.iter().enumerate() {
                let x = x0 + 0.5 * h * (1.0 + xi);
                let y = y0 + 0.5 * h * (1.0 + yj);
                let wq = wts[i] * wts[j] * 0.25 * h * h;
                let gf = omf.space.eval_grad(&omf.v, x, y);
                let gc = omc.space.eval_grad(&omc.v, x, y);
                let vf = omf.space.eval(&omf.v, x, y);
                let vc = omc.space.eval(&omc.v, x, y);
                let dg = (gf.0 - gc.0, gf.1 - gc.1);
                grad2 += wq * (dg.0 * dg.0 + dg.1 * dg.1);
                val2 += wq * (vf - vc) * (vf - vc);
                let of = omf.a * emden::singular::w_f64(x, y) + vf;
                let oc = omc.a * emden::singular::w_f64(x, y) + vc;
                l4f += wq * of.powi(4);
                l4c += wq * oc.powi(4);
            }
        }
    }
    let diff = (grad2 + val2).sqrt();
    println!("|vf - vc|_H1 = {diff:.5} (grad {:.5}, l2 {:.5})", grad2.sqrt(), val2.sqrt());
    println!("|omega|_L4 fine {:.5} coarse {:.5}", l4f.powf(0.25), l4c.powf(0.25));
    let gamma = 0.2959;
    let k = 3.8;
    let kap = gamma * k * (l4f.powf(0.25) + l4c.powf(0.25)) * diff;
    println!("kappa est = {kap:.4}, K' = {:.4}", k / (1.0 - kap));
}
