use std::sync::Arc;
use emden::fem::{DirichletKind, FeSpace, SymmetryClass};
use emden::geometry::{build_domain, generate_mesh};
use emden::singular;
use emden::sparse::cg;

fn main() {
    // omega on h=1/16, defect measured against fine space h=1/32 (float estimate)
    let t = 3.0;
    let mesh = Arc::new(generate_mesh(&build_domain(t, false).unwrap(), 1.0 / 16.0).unwrap());
    let om = emden::approx::build_omega(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14).unwrap();
    let a = om.a;
    println!("a = {a}");
    let fine = Arc::new(generate_mesh(&build_domain(t, false).unwrap(), 1.0 / 32.0).unwrap());
    let fs = FeSpace::new(fine, SymmetryClass::Symmetric, DirichletKind::AllOuter);
    // residual functional: r(phi) = int grad(omega).grad(phi) - |omega|^3 phi
    // = int [a grad w + grad v].grad phi - |omega|^3 phi
    // integrate by parts the singular part: int a grad w . grad phi = -int a (Lap w) phi
    // so r(phi) = int grad v . grad phi - (a Lap w + |omega|^3) phi
    let k = fs.stiffness();
    let m = fs.mass();
    // load for grad v . grad phi: assemble via fine-quadrature of grad v dot grad phi
    // use: element loop quadrature with eval_grad of v on coarse space
    let (qn, qw) = emden::quad::gauss_rule_f64(6);
    let h = fs.mesh.h;
    let mut r = vec![0.0; fs.ndof];
    for cell in &fs.mesh.cells {
        let (x0, y0) = fs.mesh.cell_origin(cell);
        for (i, &xi) in qn.iter().enumerate() {
            for (j, &eta) in qn.iter().enumerate() {
                let x = x0 + 0.5 * h * (xi + 1.0);
                let y = y0 + 0.5 * h * (eta + 1.0);
                let wq = qw[i] * qw[j] * 0.25 * h * h;
                let (gx, gy) = om.space.eval_grad(&om.v, x, y);
                let f = a * singular::laplace_w_f64(x, y) + om.eval(x, y).abs().powi(3);
                let s = emden::fem::shape(xi, eta);
                let (dx, dy) = emden::fem::dshape(xi, eta);
                for (kk, &id) in cell.nodes.iter().enumerate() {
                    if let Some((d, c)) = fs.node_dof[id] {
                        r[d] += wq * c * ((gx * dx[kk] + gy * dy[kk]) * 2.0 / h - f * s[kk]);
                    }
                }
            }
        }
    }
    // Riesz representer in H1 norm: (K + M) z = r
    let km = k.add_scaled(&m, 1.0);
    let (z, res) = cg(&km, &r, 1e-12, 50000);
    println!("cg res {res:.2e}");
    let kz = km.matvec(&z);
    let nrm2: f64 = z.iter().zip(&kz).map(|(p, q)| p * q).sum();
    println!("estimated true defect (dual norm vs h=1/32 space): {:.5}", nrm2.sqrt());
}
