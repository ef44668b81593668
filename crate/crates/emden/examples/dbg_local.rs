use std::sync::Arc;
use emden::fem::{DirichletKind, FeSpace, SymmetryClass};
use emden::geometry::{build_domain, generate_mesh};
use emden::singular;
use emden::sparse::cg;

fn main() {
    let t = 3.0;
    let mesh = Arc::new(generate_mesh(&build_domain(t, false).unwrap(), 1.0 / 16.0).unwrap());
    let om = emden::approx::build_omega(mesh, SymmetryClass::Symmetric, 8.0, 1e-10, 14).unwrap();
    let a = om.a;
    let fine = Arc::new(generate_mesh(&build_domain(t, false).unwrap(), 1.0 / 32.0).unwrap());
    let fs = FeSpace::new(fine.clone(), SymmetryClass::Symmetric, DirichletKind::AllOuter);
    let k = fs.stiffness();
    let m = fs.mass();
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
    let km = k.add_scaled(&m, 1.0);
    let (z, _res) = cg(&km, &r, 1e-12, 50000);
    // localize |z|_H1^2 per radial band around the corner
    let bands = [0.0625, 0.125, 0.25, 0.5, 1.0, 100.0];
    let mut acc = vec![0.0; bands.len()];
    for cell in &fs.mesh.cells {
        let (x0, y0) = fs.mesh.cell_origin(cell);
        let (cx, cy) = (x0 + 0.5 * h, y0 + 0.5 * h);
        let rad = (cx * cx + cy * cy).sqrt();
        let bi = bands.iter().position(|&b| rad <= b).unwrap();
        for (i, &xi) in qn.iter().enumerate() {
            for (j, &eta) in qn.iter().enumerate() {
                let x = x0 + 0.5 * h * (xi + 1.0);
                let y = y0 + 0.5 * h * (eta + 1.0);
                let wq = qw[i] * qw[j] * 0.25 * h * h;
                let (zx, zy) = fs.eval_grad(&z, x, y);
                let zv = fs.eval(&z, x, y);
                acc[bi] += wq * (zx * zx + zy * zy + zv * zv);
            }
        }
    }
    let tot: f64 = acc.iter().sum();
    println!("total {:.5}", tot.sqrt());
    for (b, v) in bands.iter().zip(&acc) {
        println!("band r<={b}: {:.3e} (share {:.2}%)", v.sqrt(), 100.0 * v / tot);
    }
    // also peak-region: distance from (-0.5, 0.5)
    let mut peak = 0.0;
    for cell in &fs.mesh.cells {
        let (x0, y0) = fs.mesh.cell_origin(cell);
        let (cx, cy) = (x0 + 0.5 * h + 0.5, y0 + 0.5 * h - 0.5);
        if (cx * cx + cy * cy).sqrt() <= 0.35 {
            for (i, &xi) in qn.iter().enumerate() {
                for (j, &eta) in qn.iter().enumerate() {
                    let x = x0 + 0.5 * h * (xi + 1.0);
                    let y = y0 + 0.5 * h * (eta + 1.0);
                    let wq = qw[i] * qw[j] * 0.25 * h * h;
                    let (zx, zy) = fs.eval_grad(&z, x, y);
                    let zv = fs.eval(&z, x, y);
                    peak += wq * (zx * zx + zy * zy + zv * zv);
                }
            }
        }
    }
    println!("peak region share {:.2}%", 100.0 * peak / tot);
}
