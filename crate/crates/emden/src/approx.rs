//! Approximate solution of `-Lap u = |u|^3` on the truncated domain:
//! a Picard/Newton iteration for the pure finite element approximation, the
//! approximate stress intensity factor at the reentrant corner, and the
//! regular-part solve that produces the combined approximation
//! `omega = a*w + v` with `w` the cutoff singular function.

use std::sync::Arc;

use crate::fem::{DirichletKind, FeSpace, SymmetryClass};
use crate::geometry::Mesh;
use crate::singular;
use crate::sparse::{cg, minres, Csr};

/// Result of a Newton solve.
pub struct NewtonResult {
    pub coeffs: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nodal interpolation of the standing-wave initial guess
/// `amplitude * sin(pi (x+1)) sin(pi y)` on the corner square `(-1,0)x(0,1)`.
pub fn initial_guess(space: &FeSpace, amplitude: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    space.interpolate(&|x, y| {
        if (-1.0..=0.0).contains(&x) && (0.0..=1.0).contains(&y) {
            amplitude * (pi * (x + 1.0)).sin() * (pi * y).sin()
        } else {
            0.0
        }
    })
}

fn residual(
    space: &FeSpace,
    k: &Csr,
    u: &[f64],
    omega_at: &dyn Fn(&[f64], f64, f64) -> f64,
    extra_rhs: Option<&dyn Fn(f64, f64) -> f64>,
) -> Vec<f64> {
    // F(u) = K u - load(|omega(u)|^3 + extra)
    let rhs = space.load(
        &|_ci, x, y| {
            let v = omega_at(u, x, y);
            let mut f = v.abs().powi(3);
            if let Some(g) = extra_rhs {
                f += g(x, y);
            }
            f
        },
        6,
    );
    let ku = k.matvec(u);
    ku.iter().zip(&rhs).map(|(a, b)| a - b).collect()
}

fn newton_core(
    space: &FeSpace,
    u0: Vec<f64>,
    omega_at: &dyn Fn(&[f64], f64, f64) -> f64,
    extra_rhs: Option<&dyn Fn(f64, f64) -> f64>,
    tol: f64,
    max_iter: usize,
) -> NewtonResult {
    let k = space.stiffness();
    let mut u = u0;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut f = residual(space, &k, &u, omega_at, extra_rhs);
    let mut fnorm = norm(&f);
    for it in 0..max_iter {
        if fnorm <= tol {
            return NewtonResult {
                coeffs: u,
                residual_norm: fnorm,
                iterations: it,
                converged: true,
            };
        }
        // J = K - W with W the linearized weight 3|omega|omega
        let w = space.weighted_mass(
            &|_ci, x, y| {
                let v = omega_at(&u, x, y);
                3.0 * v.abs() * v
            },
            6,
        );
        let jac = k.add_scaled(&w, -1.0);
        let (step, _res) = minres(&jac, &f, 1e-10, 20_000);
        // damping: halve until the residual decreases
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&step)
                .map(|(ui, si)| ui - damping * si)
                .collect();
            let ft = residual(space, &k, &trial, omega_at, extra_rhs);
            let ft_norm = norm(&ft);
            if ft_norm < fnorm {
                u = trial;
                f = ft;
                fnorm = ft_norm;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let converged = fnorm <= tol;
    NewtonResult {
        residual_norm: fnorm,
        iterations: max_iter,
        converged,
        coeffs: u,
    }
}

/// Normalized Picard iteration `u <- s * K^{-1} load(|u|^3)` with the scale
/// `s` fixed by the Galerkin consistency condition `s^2 = <z,Kz> / <z,|z|^3>`.
/// Contracts toward the bump state from generic one-signed initial data and
/// avoids the fold that traps residual-damped Newton iterations.
fn picard_rescale(space: &FeSpace, k: &Csr, mut u: Vec<f64>, iters: usize, tol: f64) -> Vec<f64> {
    let cube_load = |u: &Vec<f64>| {
        space.load(
            &|_ci, x, y| {
                let v = space.eval(u, x, y);
                v.abs().powi(3)
            },
            6,
        )
    };
    for _ in 0..iters {
        let rhs = cube_load(&u);
        let (z, _res) = cg(k, &rhs, 1e-13, 20_000);
        let kz = k.matvec(&z);
        let num: f64 = z.iter().zip(&kz).map(|(a, b)| a * b).sum();
        let den: f64 = z.iter().zip(&cube_load(&z)).map(|(a, b)| a * b).sum();
        if !(num > 0.0 && den > 0.0) {
            break;
        }
        let s = (num / den).sqrt();
        let drift: f64 = u
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - s * b) * (a - s * b))
            .sum::<f64>()
            .sqrt();
        u = z.iter().map(|v| s * v).collect();
        if drift < tol {
            break;
        }
    }
    u
}

/// Solve the pure FE problem `-Lap u = |u|^3`: normalized Picard iteration
/// to reach the Newton basin, then Newton to full accuracy.
pub fn newton_solve(space: &FeSpace, u0: Vec<f64>, tol: f64, max_iter: usize) -> NewtonResult {
    let k = space.stiffness();
    let u1 = picard_rescale(space, &k, u0, 80, 1e-8);
    newton_core(space, u1, &|u, x, y| space.eval(u, x, y), None, tol, max_iter)
}

/// Approximate stress intensity factor
/// `a = (1/pi) int (Lam Gam)|u|^3 + Lap(Lam Gam) u` with `Lam` the cutoff and
/// `Gam` the dual singular function. The integrand is weakly singular at the
/// corner; cells touching it are refined geometrically toward the corner.
pub fn stress_intensity(space: &FeSpace, u: &[f64], levels: usize) -> f64 {
    let (nodes, weights) = crate::quad::gauss_rule_f64(8);
    let mesh = &space.mesh;
    let h = mesh.h;
    let integrand = |x: f64, y: f64| -> f64 {
        let lam = singular::lambda_f64(x, y);
        if lam == 0.0 && singular::dlambda_f64(x, y) == (0.0, 0.0) {
            return 0.0;
        }
        let (lx, ly) = singular::dlambda_f64(x, y);
        let gam = singular::cap_gamma_f64(x, y);
        let (gx, gy) = singular::dcap_gamma_f64(x, y);
        // Lap(Lam Gam) = 2 grad Lam . grad Gam + Gam Lap Lam  (Gam harmonic)
        let a = 1.0 - x * x;
        let b = 1.0 - y * y;
        let lap_lam = (12.0 * x * x - 4.0) * b * b + (12.0 * y * y - 4.0) * a * a;
        let uu = space.eval(u, x, y);
        lam * gam * uu.abs().powi(3) + (2.0 * (lx * gx + ly * gy) + gam * lap_lam) * uu
    };
    let gauss_box = |x0: f64, x1: f64, y0: f64, y1: f64| -> f64 {
        let mut s = 0.0;
        for (i, &xi) in nodes.iter().enumerate() {
            for (j, &eta) in nodes.iter().enumerate() {
                let x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * xi;
                let y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * eta;
                s += weights[i] * weights[j] * integrand(x, y);
            }
        }
        s * 0.25 * (x1 - x0) * (y1 - y0)
    };
    let mut acc = 0.0;
    for cell in &mesh.cells {
        let (x0, y0) = mesh.cell_origin(cell);
        if x0 >= 1.0 || x0 + h <= -1.0 || y0 >= 1.0 || y0 + h <= -1.0 {
            continue; // outside the cutoff support
        }
        let touches_corner = (cell.cx == 0 || cell.cx == -1) && (cell.cy == 0 || cell.cy == -1);
        if !touches_corner {
            acc += gauss_box(x0, x0 + h, y0, y0 + h);
            continue;
        }
        // geometric grading toward the corner: split the cell into dyadic
        // shells; each shell is an L-shaped difference of two squares
        let sx = if cell.cx >= 0 { 1.0 } else { -1.0 };
        let sy = if cell.cy >= 0 { 1.0 } else { -1.0 };
        let mut outer = h;
        for lev in 0..levels {
            let inner = if lev + 1 == levels { 0.0 } else { outer * 0.5 };
            // shell = [0,outer]^2 \ [0,inner]^2 in the (sx,sy) quadrant:
            // split into two rectangles
            let (ax0, ax1) = if sx > 0.0 { (inner, outer) } else { (-outer, -inner) };
            let (bx0, bx1) = if sx > 0.0 { (0.0, inner) } else { (-inner, 0.0) };
            let (ay0, ay1) = if sy > 0.0 { (0.0, outer) } else { (-outer, 0.0) };
            let (cy0, cy1) = if sy > 0.0 { (inner, outer) } else { (-outer, -inner) };
            acc += gauss_box(ax0, ax1, ay0, ay1);
            if inner > 0.0 {
                acc += gauss_box(bx0, bx1, cy0, cy1);
            }
            outer = inner;
            if outer == 0.0 {
                break;
            }
        }
    }
    acc / std::f64::consts::PI
}

/// Combined approximation `omega = a*w + v` with FE regular part `v`.
pub struct Omega {
    pub space: Arc<FeSpace>,
    pub a: f64,
    /// Regular part coefficients.
    pub v: Vec<f64>,
    /// Pure FE approximation (before singular splitting).
    pub omega0: Vec<f64>,
    pub newton_residual: f64,
    /// Unrefined regular part on the original (spectral-stage) mesh; equal
    /// to `space`/`v` when no refinement was requested. The spectral stages
    /// work with `a*w + v_coarse`, whose distance to `omega` is a purely
    /// piecewise-polynomial quantity on nested meshes.
    pub space_coarse: Arc<FeSpace>,
    pub v_coarse: Vec<f64>,
}

impl Omega {
    /// Point value of `omega` (float).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * singular::w_f64(x, y) + self.space.eval(&self.v, x, y)
    }

    /// Nodal interpolation of `omega` onto another space.
    pub fn interpolate_to(&self, other: &FeSpace) -> Vec<f64> {
        other.interpolate(&|x, y| self.eval(x, y))
    }
}

/// Full approximate-solution pipeline: FE Newton solve, stress intensity,
/// regular-part Newton solve.
pub fn build_omega(
    mesh: Arc<Mesh>,
    class: SymmetryClass,
    amplitude: f64,
    tol: f64,
    grading_levels: usize,
) -> Result<Omega, String> {
    build_omega_refined(mesh, class, amplitude, tol, grading_levels, 0)
}

/// As [`build_omega`], but the regular part is solved on a `refine`-times
/// uniformly refined mesh. The dual-norm defect of the Galerkin regular part
/// scales like `h^2`; refining only this stage keeps the residual bound below
/// the certificate budget without touching the coarse spectral stages.
pub fn build_omega_refined(
    mesh: Arc<Mesh>,
    class: SymmetryClass,
    amplitude: f64,
    tol: f64,
    grading_levels: usize,
    refine: usize,
) -> Result<Omega, String> {
    let space = FeSpace::new(mesh, class, DirichletKind::AllOuter);
    let u0 = initial_guess(&space, amplitude);
    let r0 = newton_solve(&space, u0, tol, 50);
    if !r0.converged {
        return Err(format!(
            "FE Newton iteration stalled at residual {:.3e}",
            r0.residual_norm
        ));
    }
    let a = stress_intensity(&space, &r0.coeffs, grading_levels);
    // regular part on the original mesh: -Lap v = |a w + v|^3 + a Lap w,
    // Newton from v0 = omega0 - a I(w)
    let solve_regular = |sp: &Arc<FeSpace>, v0: Vec<f64>| -> Result<NewtonResult, String> {
        let omega_at = |v: &[f64], x: f64, y: f64| a * singular::w_f64(x, y) + sp.eval(v, x, y);
        let extra = |x: f64, y: f64| a * singular::laplace_w_f64(x, y);
        let rv = newton_core(sp, v0, &omega_at, Some(&extra), tol, 50);
        if !rv.converged {
            return Err(format!(
                "regular-part Newton iteration stalled at residual {:.3e}",
                rv.residual_norm
            ));
        }
        Ok(rv)
    };
    let iw = space.interpolate(&singular::w_f64);
    let v0: Vec<f64> = r0.coeffs.iter().zip(&iw).map(|(o, w)| o - a * w).collect();
    let rc = solve_regular(&space, v0)?;
    if refine == 0 {
        return Ok(Omega {
            space: space.clone(),
            a,
            v: rc.coeffs.clone(),
            omega0: r0.coeffs,
            newton_residual: rc.residual_norm,
            space_coarse: space,
            v_coarse: rc.coeffs,
        });
    }
    let h = space.mesh.h / (1u64 << refine) as f64;
    let fine = Arc::new(
        crate::geometry::generate_mesh(&space.mesh.spec, h).map_err(|e| format!("{e:?}"))?,
    );
    let fsp = FeSpace::new(fine, class, DirichletKind::AllOuter);
    let omega0 = fsp.interpolate(&|x, y| space.eval(&r0.coeffs, x, y));
    let vf0 = fsp.interpolate(&|x, y| space.eval(&rc.coeffs, x, y));
    let rv = solve_regular(&fsp, vf0)?;
    Ok(Omega {
        space: fsp,
        a,
        v: rv.coeffs,
        omega0,
        newton_residual: rv.residual_norm,
        space_coarse: space,
        v_coarse: rc.coeffs,
    })
}

/// Least-squares projection of `omega`'s gradient-related flux: solve the SPD
/// mass system `M q = rhs` in a component space.
pub fn mass_project(space: &FeSpace, rhs: &[f64]) -> Vec<f64> {
    let m = space.mass();
    let (q, _res) = cg(&m, rhs, 1e-12, 10_000);
    q
}
