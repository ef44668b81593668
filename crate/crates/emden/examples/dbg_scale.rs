use std::sync::Arc;
use emden::fem::{DirichletKind, FeSpace, SymmetryClass};
use emden::geometry::{build_domain, generate_mesh};
use emden::singular;
use emden::sparse::cg;

fn defect(t: f64, h: f64, hf: f64) -> f64 {
    let mesh = Arc::new(generate_mesh(&build_domain(t, false).unwrap(), h).unwrap());
    let om = emden::approx::build_omega(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14).unwrap();
    let a = om.a;
    let fine = Arc::new(generate_mesh(&build_domain(t, false).unwrap(), hf).unwrap());
    let fs = FeSpace::new(fine, SymmetryClass::Symmetric, DirichletKind::AllOuter);
    let k = fs.stiffness();
    let m = fs.mass();
    let (qn, qw) = emden::quad::gauss_rule_f64(6);
    let hh = fs.mesh.h;
    let mut r = vec![0.0; fs.ndof];
    for cell in &fs.mesh.cells {
        let (x0, y0) = fs.mesh.cell_origin(cell);
        for (i, &xi) in qn.iter().enumerate() {
            for (j, &eta) in qn.iter().enumerate() {
                let x = x0 + 0.5 * hh * (xi + 1.0);
                let y = y0 + 0.5 * hh * (eta + 1.0);
                let wq = qw[i] * qw[j] * 0.25 * hh * hh;
                let (gx, gy) = om.space.eval_grad(&om.v, x, y);
                let f = a * singular::laplace_w_f64(x, y) + om.eval(x, y).abs().powi(3);
                let s = emden::fem::shape(xi, eta);
                let (dx, dy) = emden::fem::dshape(xi, eta);
                for (kk, &id) in cell.nodes.iter().enumerate() {
                    if let Some((d, c)) = fs.node_dof[id] {
                        r[d] += wq * c * ((gx * dx[kk] + gy * dy[kk]) * 2.0 / hh - f * s[kk]);
                    }
                }
            }
        }
    }
    let km = k.add_scaled(&m, 1.0);
    let (z, _res) = cg(&km, &r, 1e-12, 80000);
    let kz = km.matvec(&z);
    let nrm2: f64 = z.iter().zip(&kz).map(|(p, q)| p * q).sum();
    nrm2.sqrt()
}

fn main() {
    println!("h=1/8  defect ~ {:.5}", defect(3.0, 0.125, 0.0625));
    println!("h=1/16 defect ~ {:.5}", defect(3.0, 0.0625, 0.03125));
    println!("h=1/32 defect ~ {:.5}", defect(3.0, 0.03125, 0.015625));
}
