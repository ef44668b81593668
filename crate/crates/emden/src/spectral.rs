//! Spectral engine for the linearization eigenvalue problem
//!
//!   int grad u . grad phi + u phi = kappa int (1 + 3|omega|omega) u phi,
//!
//! whose eigenvalues `kappa` neighbouring 1 determine the inverse bound `K`
//! via `nu = 1 - 1/kappa`. Upper bounds come from Rayleigh-Ritz, lower
//! bounds from Lehmann-Goerisch; the a-priori bound `rho` the latter needs
//! is produced by a homotopy from a base problem with piecewise-constant
//! coefficient, whose eigenvalues are enclosed by a Neumann domain
//! decomposition and verified 1D transcendental matching equations.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::approx::Omega;
use crate::fem::{DirichletKind, FeSpace, SymmetryClass};
use crate::geometry::{Cell, Mesh};
use crate::gevp::{verified_spd, verified_sym_gevp, GevpError, IvMatrix};
use crate::interval::{add_up, mul_up, sub_up, Interval};
use crate::ivnewton::interval_newton_enclose;
use crate::residual::{
    cell_taylor, global_to_local, hdiv_fit, local_q8_poly, Flux, Poly2,
};
use crate::singular::{self, gamma_box, Rect};
use crate::sparse::Csr;

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("Rayleigh-Ritz threshold violation: Lambda_n = {0} >= pi^2+1")]
    ThresholdViolation(f64),
    #[error("rho = {0} invalid: must satisfy Lambda_n < rho <= pi^2+1")]
    RhoInvalid(f64),
    #[error("matrix definiteness could not be verified: {0}")]
    DefinitenessFailure(String),
    #[error("Lehmann-Goerisch pencil has a non-negative eigenvalue enclosure")]
    NonNegativeMu,
    #[error("undecided root brackets remain in mode m={0}")]
    UndecidedRoots(u32),
    #[error("base coefficient does not dominate 3|omega|omega")]
    CbarTooSmall,
    #[error("homotopy stalled at s={0}: no admissible step")]
    HomotopyStall(f64),
    #[error("spectral gap around 0 could not be verified")]
    GapFailure,
    #[error("norm transfer factor kappa = {0} >= 1")]
    KappaTooLarge(f64),
    #[error("solver breakdown: {0}")]
    SolverBreakdown(String),
}

/// Provenance of an eigenvalue enclosure.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Base,
    Homotopy(f64),
    FinalRr,
    FinalLg,
}

/// Two-sided enclosure of one eigenvalue, with provenance.
#[derive(Debug, Clone)]
pub struct EigenEnclosure {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub symmetry_class: SymmetryClass,
    pub stage: Stage,
}

/// Rigorous enclosure of `pi^2 / (pi^2 + 1)`, the essential-spectrum floor
/// on the nu side.
pub fn essential_floor_nu() -> Interval {
    let pi2 = Interval::pi().sqr();
    pi2.div(&pi2.add(&Interval::ONE)).expect("positive")
}

/// Rigorous enclosure of `pi^2 + 1`, the essential-spectrum threshold on the
/// kappa side.
pub fn essential_threshold_kappa() -> Interval {
    Interval::pi().sqr().add(&Interval::ONE)
}

/// `nu = 1 - 1/kappa` (outward rounded; requires `0` not in `kappa`).
pub fn nu_from_kappa(kappa: &Interval) -> Result<Interval, SpectralError> {
    let inv = kappa
        .recip()
        .map_err(|_| SpectralError::DomainViolation(format!("kappa = {kappa} contains 0")))?;
    Ok(Interval::ONE.sub(&inv))
}

/// `kappa = 1/(1 - nu)` (outward rounded; requires `1` not in `nu`).
pub fn kappa_from_nu(nu: &Interval) -> Result<Interval, SpectralError> {
    Interval::ONE
        .sub(nu)
        .recip()
        .map_err(|_| SpectralError::DomainViolation(format!("nu = {nu} contains 1")))
}

// ---------------------------------------------------------------------------
// base problem: Neumann domain decomposition with piecewise-constant weight
// ---------------------------------------------------------------------------

/// Piecewise-constant coefficient `cbar >= 3|omega_FE|omega_FE`, constant on
/// the corner square `(-1,0)x(0,1)` and on unit slabs `(i,i+1)x(0,1)` along
/// the arm (mirrored onto the other arm by the diagonal symmetry), zero
/// beyond the last slab.
#[derive(Debug, Clone)]
pub struct BaseCoefficient {
    pub c_corner: f64,
    /// `c_arm[i]` on the slab `(i, i+1) x (0,1)`.
    pub c_arm: Vec<f64>,
}

impl BaseCoefficient {
    pub fn max(&self) -> f64 {
        self.c_arm.iter().fold(self.c_corner, |m, &c| m.max(c)).max(0.0)
    }

    /// Value at a point of the full domain (arm coordinate via symmetry).
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let (ax, _ay) = if y < 0.0 { (-y, -x) } else { (x, y) };
        if ax < 0.0 {
            self.c_corner
        } else {
            let i = ax.floor() as usize;
            self.c_arm.get(i).copied().unwrap_or(0.0)
        }
    }
}

/// Series evaluation of the entire functions
/// `c0(z) = cosh(sqrt z) = sum z^n/(2n)!` and
/// `s0(z) = sinh(sqrt z)/sqrt z = sum z^n/(2n+1)!`
/// together with their `z`-derivatives, with rigorous truncation tails.
fn series_cs(z: &Interval) -> (Interval, Interval, Interval, Interval) {
    let mut c0 = Interval::ONE;
    let mut s0 = Interval::ONE;
    let mut dc = Interval::ZERO;
    let mut ds = Interval::ZERO;
    let mut tc = Interval::ONE; // z^n / (2n)!
    let mut ts = Interval::ONE; // z^n / (2n+1)!
    let zmag = z.mag();
    let mut n = 0usize;
    loop {
        n += 1;
        let f2n = ((2 * n - 1) * (2 * n)) as f64;
        let f2n1 = ((2 * n) * (2 * n + 1)) as f64;
        // derivative terms n z^(n-1)/(2n)! from the previous power
        dc = dc.add(&tc.scale(n as f64 / f2n));
        ds = ds.add(&ts.scale(n as f64 / f2n1));
        tc = tc.mul(z).scale(1.0 / f2n);
        ts = ts.mul(z).scale(1.0 / f2n1);
        c0 = c0.add(&tc);
        s0 = s0.add(&ts);
        let q = zmag / (((2 * n + 1) * (2 * n + 2)) as f64);
        if q < 0.25 && tc.mag().max(ts.mag()) < 1e-19 * (1.0 + c0.mag()) {
            // geometric tails: next-term ratio <= q for values, <= 2q for the
            // derivative series (extra factor (n+1)/n <= 2)
            let tail_v = mul_up(tc.mag().max(ts.mag()), mul_up(q, 1.0 / (1.0 - q)));
            let dq = 2.0 * q;
            let dnext = mul_up(tc.mag().max(ts.mag()), (n + 1) as f64 / (n as f64));
            let tail_d = mul_up(dnext, 1.0 / (1.0 - dq));
            let pad_v = Interval::new(-tail_v, tail_v);
            let pad_d = Interval::new(-tail_d, tail_d);
            return (c0.add(&pad_v), s0.add(&pad_v), dc.add(&pad_d), ds.add(&pad_d));
        }
        assert!(n < 200, "series_cs: no convergence for z = {z}");
    }
}

/// 2x2 interval matrix with its derivative in the spectral parameter.
#[derive(Clone)]
struct M2d {
    a: [[Interval; 2]; 2],
    d: [[Interval; 2]; 2],
}

impl M2d {
    fn apply(&self, v: &([Interval; 2], [Interval; 2])) -> ([Interval; 2], [Interval; 2]) {
        let (x, dx) = v;
        let mut y = [Interval::ZERO; 2];
        let mut dy = [Interval::ZERO; 2];
        for i in 0..2 {
            for j in 0..2 {
                y[i] += self.a[i][j].mul(&x[j]);
                dy[i] += self.d[i][j].mul(&x[j]).add(&self.a[i][j].mul(&dx[j]));
            }
        }
        (y, dy)
    }
}

/// Transfer matrix over a subinterval of length `len` for `X'' = alpha X`,
/// mapping `(X, X')` at the left end to the right end.
fn piece_transfer(alpha: &Interval, dalpha: &Interval, len: &Interval) -> M2d {
    let l2 = len.sqr();
    let z = alpha.mul(&l2);
    let dz = dalpha.mul(&l2);
    let (c0, s0, dc, ds) = series_cs(&z);
    let ls = len.mul(&s0);
    let dls = len.mul(&ds).mul(&dz);
    M2d {
        a: [[c0, ls], [alpha.mul(&ls), c0]],
        d: [
            [dc.mul(&dz), dls],
            [dalpha.mul(&ls).add(&alpha.mul(&dls)), dc.mul(&dz)],
        ],
    }
}

/// Matching function of the arm problem for transverse mode `m`: propagate
/// the Neumann data `(1, 0)` across the slabs and match the decaying tail.
/// Returns `(f, df/dkappa)`; roots of `f` below `pi^2 + 1` are exactly the
/// eigenvalues of the decomposed arm problem.
fn arm_matching(c_arm: &[f64], m: u32, kappa: &Interval) -> (Interval, Interval) {
    let base = Interval::ONE.add(&Interval::pi().sqr().scale((m * m) as f64));
    let mut v = (
        [Interval::ONE, Interval::ZERO],
        [Interval::ZERO, Interval::ZERO],
    );
    for &c in c_arm {
        let wc = Interval::ONE.add(&Interval::point(c));
        let alpha = base.sub(&kappa.mul(&wc));
        let dalpha = wc.scale(-1.0);
        // subdivide so that |alpha| len^2 stays small: the cosh/sinh series
        // cancels catastrophically for large oscillatory arguments
        let ns = ((alpha.mag().sqrt() / 3.0).ceil() as usize).max(1);
        let len = Interval::ratio(1, ns as i64);
        let t = piece_transfer(&alpha, &dalpha, &len);
        for _ in 0..ns {
            v = t.apply(&v);
        }
    }
    // decaying tail with coefficient zero: X'/X = -sqrt(base - kappa)
    let at = base.sub(kappa);
    let sq = at.sqrt_nonneg().unwrap_or(Interval::new(0.0, at.hi.max(0.0).sqrt()));
    let dsq = sq.scale(2.0).recip().map(|r| r.scale(-1.0)).unwrap_or(Interval::new(
        f64::NEG_INFINITY,
        0.0,
    ));
    let (x, dx) = v;
    let f = x[1].add(&sq.mul(&x[0]));
    let df = dx[1].add(&sq.mul(&dx[0])).add(&dsq.mul(&x[0]));
    (f, df)
}

/// Verified enclosures of all arm-problem eigenvalues below `pi^2 + 1 - eps`
/// for transverse mode `m`. Every returned interval contains exactly one
/// eigenvalue (simplicity is verified via a sign-definite derivative).
fn arm_mode_eigs(
    c_arm: &[f64],
    m: u32,
    eps: f64,
) -> Result<Vec<Interval>, SpectralError> {
    let cmax = c_arm.iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0);
    let hi = essential_threshold_kappa().lo - eps;
    let base = Interval::ONE.add(&Interval::pi().sqr().scale((m * m) as f64));
    let lo = base.div(&Interval::ONE.add(&Interval::point(cmax))).expect("positive").lo;
    if lo >= hi {
        return Ok(vec![]);
    }
    let f = |k: &Interval| arm_matching(c_arm, m, k).0;
    let df = |k: &Interval| arm_matching(c_arm, m, k).1;
    let roots = interval_newton_enclose(f, df, Interval::new(lo, hi), 1e-9, 50_000);
    if !roots.is_complete() {
        return Err(SpectralError::UndecidedRoots(m));
    }
    // exactly-one-root check: the derivative must be sign definite on each
    // verified bracket, otherwise the multiplicity count below is unsound
    for r in &roots.verified {
        let d = arm_matching(c_arm, m, r).1;
        if d.contains(0.0) {
            return Err(SpectralError::UndecidedRoots(m));
        }
    }
    let mut out = roots.verified;
    out.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    Ok(out)
}

/// Closed-form eigenvalues of the corner-square problem
/// `(1 + mu_mn) / (1 + c)` with `mu_mn = ((m-1/2)^2 + (n-1/2)^2) pi^2`
/// (Dirichlet on the two outer edges, Neumann on the two interfaces),
/// restricted by symmetry class: the diagonal reflection maps mode `(m,n)`
/// to `+-(n,m)`, so unordered pairs carry one symmetric combination each
/// (including the diagonal) and one antisymmetric combination when `m != n`.
fn corner_eigs(c: f64, eps: f64, class: SymmetryClass) -> Vec<Interval> {
    let hi = essential_threshold_kappa().lo - eps;
    let wc = Interval::ONE.add(&Interval::point(c));
    let pi2 = Interval::pi().sqr();
    let mut out = Vec::new();
    for m in 1u32..100 {
        let hm = Interval::ratio(2 * m as i64 - 1, 2).sqr();
        let min_val = Interval::ONE
            .add(&pi2.mul(&hm.add(&Interval::ratio(1, 4))))
            .div(&wc)
            .expect("positive");
        if min_val.lo >= hi {
            break;
        }
        for n in 1u32..100 {
            let hn = Interval::ratio(2 * n as i64 - 1, 2).sqr();
            let val = Interval::ONE
                .add(&pi2.mul(&hm.add(&hn)))
                .div(&wc)
                .expect("positive");
            if val.lo >= hi {
                break;
            }
            let copies = match class {
                SymmetryClass::Full => {
                    if m == n {
                        1
                    } else if m < n {
                        2
                    } else {
                        0
                    }
                }
                SymmetryClass::Symmetric => usize::from(m <= n),
                SymmetryClass::Antisymmetric => usize::from(m < n),
            };
            for _ in 0..copies {
                out.push(val);
            }
        }
    }
    out
}

/// Eigenvalue enclosures, sorted with multiplicity, of the decomposed base
/// problem (Neumann interfaces) below `pi^2 + 1 - eps`, restricted to a
/// symmetry class. By the min-max comparison they are index-wise lower
/// bounds for the base problem on the full domain in the same class.
pub fn domain_decomposition_eigs(
    cbar: &BaseCoefficient,
    eps: f64,
    class: SymmetryClass,
) -> Result<Vec<EigenEnclosure>, SpectralError> {
    let mut all: Vec<Interval> = corner_eigs(cbar.c_corner, eps, class);
    let hi_kappa = essential_threshold_kappa();
    // arm modes: transverse sin(m pi y), m^2 pi^2 + 1 below threshold needed
    for m in 1u32..100 {
        let floor = Interval::ONE
            .add(&Interval::pi().sqr().scale((m * m) as f64))
            .div(&Interval::ONE.add(&Interval::point(cbar.max())))
            .expect("positive");
        if floor.lo >= hi_kappa.lo - eps {
            break;
        }
        let eigs = arm_mode_eigs(&cbar.c_arm, m, eps)?;
        let copies = match class {
            // the two arm subdomains are swapped by the diagonal symmetry:
            // each arm eigenvalue appears once per class, twice in total
            SymmetryClass::Full => 2,
            SymmetryClass::Symmetric | SymmetryClass::Antisymmetric => 1,
        };
        for e in eigs {
            for _ in 0..copies {
                all.push(e);
            }
        }
    }
    all.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    Ok(all
        .into_iter()
        .enumerate()
        .map(|(i, e)| EigenEnclosure {
            index: i + 1,
            lower: e.lo,
            upper: e.hi,
            symmetry_class: class,
            stage: Stage::Base,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// rigorous coefficient data: per-cell moment matrices of c = 3|omega|omega
// ---------------------------------------------------------------------------

/// Trial and flux fields are Q8 polynomials of per-variable degree <= 2, so
/// every pair product has per-variable degree <= MDEG.
const MDEG: usize = 4;

type Mom = [[Interval; MDEG + 1]; MDEG + 1];

/// Moment matrices `W[a][b] = int P s^a t^b ds dt` over the centered local
/// square `[-1/2, 1/2]^2` for the weights `P = c` and `P = c^2` (Taylor
/// remainders and subdivision slack absorbed as pads). Centered monomials
/// keep the high-order Taylor coefficients from amplifying under products.
struct CoefCell {
    wc: Mom,
    wc2: Mom,
}

/// Rigorous per-cell data for the coefficient `c = 3|omega|omega` on the
/// spectral-stage mesh, precomputed once and reused by every assembly pass.
pub struct Coefficient {
    pub space: Arc<FeSpace>,
    pub a: f64,
    pub v: Vec<f64>,
    cells: Vec<CoefCell>,
}

fn local_vals(space: &FeSpace, x: &[f64], cell: &Cell) -> [f64; 8] {
    let mut out = [0.0; 8];
    for k in 0..8 {
        if let Some((dof, c)) = space.node_dof[cell.nodes[k]] {
            out[k] = c * x[dof];
        }
    }
    out
}

fn clamp01(v: Interval) -> Interval {
    Interval::new(v.lo.clamp(0.0, 1.0), v.hi.clamp(0.0, 1.0))
}

/// `int_{-1/2}^{1/2} s^k ds`, and also `int |s^k| ds`.
fn cmoment(k: usize) -> Interval {
    Interval::point(0.5f64.powi(k as i32)).mul(&Interval::ratio(1, k as i64 + 1))
}

/// `W[a][b] = int P s^a t^b ds dt` over `[-1/2, 1/2]^2` with
/// `|P - true weight| <= pad` pointwise.
fn moments(p: &Poly2, pad: f64) -> Mom {
    let mut w = [[Interval::ZERO; MDEG + 1]; MDEG + 1];
    for a in 0..=MDEG {
        for b in 0..=MDEG {
            let mut acc = Interval::new(-pad, pad).mul(&cmoment(a)).mul(&cmoment(b));
            for (i, row) in p.c.iter().enumerate() {
                for (j, cij) in row.iter().enumerate() {
                    if cij.lo == 0.0 && cij.hi == 0.0 {
                        continue;
                    }
                    if (i + a) % 2 == 1 || (j + b) % 2 == 1 {
                        continue;
                    }
                    acc += cij.mul(&cmoment(i + a)).mul(&cmoment(j + b));
                }
            }
            w[a][b] = acc;
        }
    }
    w
}

fn center(p: &Poly2) -> Poly2 {
    p.compose_affine(0.5, 1.0, 0.5, 1.0)
}

/// Range enclosure over the centered square via a k x k subdivision.
fn range_centered(p: &Poly2, k: usize) -> Interval {
    let mut out: Option<Interval> = None;
    for i in 0..k {
        for j in 0..k {
            let u = Interval::new(-0.5 + i as f64 / k as f64, -0.5 + (i + 1) as f64 / k as f64);
            let v = Interval::new(-0.5 + j as f64 / k as f64, -0.5 + (j + 1) as f64 / k as f64);
            let r = p.eval_box(&u, &v);
            out = Some(match out {
                Some(o) => o.hull(&r),
                None => r,
            });
        }
    }
    out.expect("nonempty subdivision")
}

/// `(int_{u0}^{u1} s^a ds, upper bound for int_{u0}^{u1} |s^a| ds)` via the
/// monomial antiderivative.
fn seg_moment(a: usize, u0: f64, u1: f64) -> (Interval, f64) {
    let p = |x: f64| {
        Interval::point(x)
            .pow_i(a as i32 + 1)
            .expect("positive exponent")
            .mul(&Interval::ratio(1, a as i64 + 1))
    };
    let i = p(u1).sub(&p(u0));
    let j = if u0 >= 0.0 || u1 <= 0.0 {
        // s^a has one sign on the segment
        i.mag()
    } else {
        add_up(p(u1).mag(), p(u0).mag())
    };
    (i, j)
}

fn mom_map(m: &Mom, f: impl Fn(&Interval) -> Interval) -> Mom {
    let mut out = *m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v = f(v);
        }
    }
    out
}

/// Builds the per-cell weight data from the spectral-stage approximation
/// `omega_c = a w + v_coarse`.
pub fn build_coefficient(om: &Omega, taylor_target: f64) -> Result<Coefficient, SpectralError> {
    let space = om.space_coarse.clone();
    let mesh = space.mesh.clone();
    let h = mesh.h;
    let lambda_poly = Poly2::from_list(&singular::lambda_monomials());
    let a_iv = Interval::point(om.a);
    let mut cells = Vec::with_capacity(mesh.cells.len());
    for cell in &mesh.cells {
        let lv = local_vals(&space, &om.v_coarse, cell);
        let pv = local_q8_poly(&lv);
        let lam_l = global_to_local(&lambda_poly, cell, h);
        let x0 = cell.cx as f64 * h;
        let y0 = cell.cy as f64 * h;
        // the singular part lives on the cutoff support square only
        let in_support = x0 + h <= 1.0 && y0 + h <= 1.0 && x0 >= -1.0 && y0 >= -1.0;
        let touches = (cell.cx == 0 || cell.cx == -1) && (cell.cy == 0 || cell.cy == -1);
        if !in_support || om.a == 0.0 {
            // purely polynomial cell: exact moments, no remainder
            let pvc = center(&pv);
            let p2 = pvc.mul(&pvc);
            let rng = range_centered(&pvc, 2);
            let pc = p2.scale_iv(&Interval::point(3.0));
            let pc2 = p2.mul(&p2).scale_iv(&Interval::point(9.0));
            let base = moments(&pc, 0.0);
            let wc = if rng.lo >= 0.0 {
                base
            } else if rng.hi <= 0.0 {
                mom_map(&base, |m| m.scale(-1.0))
            } else {
                mom_map(&base, |m| m.hull(&m.scale(-1.0)))
            };
            cells.push(CoefCell {
                wc,
                wc2: moments(&pc2, 0.0),
            });
            continue;
        }
        // Low-order Taylor only: squaring twice amplifies high-order monomial
        // coefficients (the centered expansion grows like 3^n after the shift
        // to [0,1] coordinates), so near-origin cells where a tight expansion
        // needs many terms use polar range enclosures instead.
        let taylor = if touches {
            None
        } else {
            cell_taylor(x0, y0, h, 2, taylor_target, 10).filter(|t| t.rem <= 1e-4)
        };
        if taylor.is_none() {
            // polar range enclosures on a dyadic subdivision, collapsed into
            // centered moments: per box `int c s^a t^b` lies in
            // `mid(c) int s^a t^b + rad(c) [-1, 1] int |s^a t^b|`
            let k = 64usize;
            let segs: Vec<[(Interval, f64); MDEG + 1]> = (0..k)
                .map(|i| {
                    let u0 = i as f64 / k as f64 - 0.5;
                    let u1 = (i + 1) as f64 / k as f64 - 0.5;
                    std::array::from_fn(|a| seg_moment(a, u0, u1))
                })
                .collect();
            let mut wc = [[Interval::ZERO; MDEG + 1]; MDEG + 1];
            let mut wc2 = [[Interval::ZERO; MDEG + 1]; MDEG + 1];
            for i in 0..k {
                for j in 0..k {
                    let u = Interval::new(i as f64 / k as f64, (i + 1) as f64 / k as f64);
                    let vv = Interval::new(j as f64 / k as f64, (j + 1) as f64 / k as f64);
                    let rect = Rect {
                        x0: x0 + u.lo * h,
                        x1: x0 + u.hi * h,
                        y0: y0 + vv.lo * h,
                        y1: y0 + vv.hi * h,
                    };
                    let gam = gamma_box(&rect);
                    let lam = clamp01(lam_l.eval_box(&u, &vv));
                    let w_enc = a_iv.mul(&lam.mul(&gam)).add(&pv.eval_box(&u, &vv));
                    // t |-> |t| t is increasing
                    let c = Interval::new(
                        3.0 * w_enc.lo * w_enc.lo.abs(),
                        3.0 * w_enc.hi * w_enc.hi.abs(),
                    );
                    let c2 = w_enc.sqr().sqr().scale(9.0);
                    for (w, rng) in [(&mut wc, &c), (&mut wc2, &c2)] {
                        let mid = Interval::point(rng.lo)
                            .add(&Interval::point(rng.hi))
                            .scale(0.5);
                        let rad = mul_up(0.5, sub_up(rng.hi, rng.lo));
                        for a in 0..=MDEG {
                            for b in 0..=MDEG {
                                let exact = mid.mul(&segs[i][a].0.mul(&segs[j][b].0));
                                let slack = mul_up(rad, mul_up(segs[i][a].1, segs[j][b].1));
                                w[a][b] += exact.add(&Interval::new(-slack, slack));
                            }
                        }
                    }
                }
            }
            cells.push(CoefCell { wc, wc2 });
        } else {
            let t = taylor.expect("checked above");
            // cutoff takes values in [0, 1], so the Taylor remainder of
            // gamma bounds the remainder of lambda gamma as well
            let pw = center(&lam_l)
                .mul(&center(&t.im))
                .scale_iv(&a_iv)
                .add(&center(&pv));
            let e = mul_up(om.a.abs(), t.rem);
            let rng = range_centered(&pw, 2).add(&Interval::new(-e, e));
            let s = rng.mag();
            let p2 = pw.mul(&pw);
            let pc = p2.scale_iv(&Interval::point(3.0));
            let ec = mul_up(3.0, add_up(mul_up(2.0 * s, e), e * e));
            // c^2 = 9 omega^4 is sign free
            let pc2 = p2.mul(&p2).scale_iv(&Interval::point(9.0));
            let p4_hi = Interval::point(add_up(s, e)).sqr().sqr().hi;
            let p4_lo = Interval::point(s).sqr().sqr().lo;
            let ec2 = mul_up(9.0, sub_up(p4_hi, p4_lo).max(0.0));
            let wc2 = moments(&pc2, ec2);
            let base = moments(&pc, ec);
            let wc = if rng.lo >= 0.0 {
                base
            } else if rng.hi <= 0.0 {
                mom_map(&base, |m| m.scale(-1.0))
            } else {
                // sign indeterminate: c = 3 sigma omega^2 with sigma in [-1,1]
                mom_map(&base, |m| m.hull(&m.scale(-1.0)))
            };
            cells.push(CoefCell { wc, wc2 });
        }
    }
    Ok(Coefficient {
        space,
        a: om.a,
        v: om.v_coarse.clone(),
        cells,
    })
}

impl Coefficient {
    /// `(int c q, int c^2 q)` over the physical cell `ci`, with `q` in local
    /// coordinates (the `h^2` Jacobian is applied here).
    fn weighted(&self, ci: usize, q: &Poly2) -> (Interval, Interval) {
        let h2 = Interval::point(self.space.mesh.h).sqr();
        let CoefCell { wc, wc2 } = &self.cells[ci];
        let q = center(q);
        let mut s1 = Interval::ZERO;
        let mut s2 = Interval::ZERO;
        for (i, row) in q.c.iter().enumerate() {
            for (j, cij) in row.iter().enumerate() {
                if cij.lo == 0.0 && cij.hi == 0.0 {
                    continue;
                }
                assert!(i <= MDEG && j <= MDEG, "weighted: degree overflow");
                s1 += cij.mul(&wc[i][j]);
                s2 += cij.mul(&wc2[i][j]);
            }
        }
        (s1.mul(&h2), s2.mul(&h2))
    }

    /// Upper-oriented enclosure of the `L4` norm of `omega_c`:
    /// `int omega^4 = (1/9) int c^2`.
    #[doc(hidden)]
    pub fn debug_cells(&self) {
        let one = Poly2::from_list(&[(0, 0, Interval::ONE)]);
        for ci in 0..self.cells.len() {
            let (c1, c2) = self.weighted(ci, &one);
            let cell = &self.space.mesh.cells[ci];
            if c2.hi - c2.lo > 1e-3 {
                println!("({:3},{:3}) c1 {c1} c2 {c2}", cell.cx, cell.cy);
            }
        }
    }

    pub fn l4_norm(&self) -> Interval {
        let one = Poly2::from_list(&[(0, 0, Interval::ONE)]);
        let mut acc = Interval::ZERO;
        for ci in 0..self.cells.len() {
            let (_, c2) = self.weighted(ci, &one);
            acc += c2;
        }
        let l4_4 = acc.mul(&Interval::ratio(1, 9)).intersect(&Interval::new(0.0, f64::INFINITY));
        l4_4.sqrt_nonneg()
            .and_then(|r| r.sqrt_nonneg())
            .unwrap_or(Interval::new(0.0, f64::INFINITY))
    }

    /// Lower bound for the `L2` norm of `omega_c`:
    /// `int omega^2 = (1/3) int |c|`, dropping sign-indeterminate cells.
    pub fn l2_lower(&self) -> f64 {
        let one = Poly2::from_list(&[(0, 0, Interval::ONE)]);
        let mut acc = 0.0f64;
        for ci in 0..self.cells.len() {
            let (c1, _) = self.weighted(ci, &one);
            let m = c1.lo.max(-c1.hi).max(0.0);
            acc += m / 3.0;
        }
        acc.sqrt()
    }
}

/// Smallest admissible piecewise-constant dominating coefficient:
/// per-rectangle verified sup of `3|omega_c|omega_c`, rounded up.
pub fn base_problem_coefficient(om: &Omega, t: f64) -> Result<BaseCoefficient, SpectralError> {
    let space = &om.space_coarse;
    let mesh = &space.mesh;
    let h = mesh.h;
    let lambda_poly = Poly2::from_list(&singular::lambda_monomials());
    let a_iv = Interval::point(om.a);
    let nslab = t.ceil() as usize;
    let mut c_corner = 0.0f64;
    let mut c_arm = vec![0.0f64; nslab];
    for cell in &mesh.cells {
        let lv = local_vals(space, &om.v_coarse, cell);
        let pv = local_q8_poly(&lv);
        let lam_l = global_to_local(&lambda_poly, cell, h);
        let x0 = cell.cx as f64 * h;
        let y0 = cell.cy as f64 * h;
        let in_support = x0 + h <= 1.0 && y0 + h <= 1.0 && x0 >= -1.0 && y0 >= -1.0;
        // sup omega over the cell via a dyadic subdivision
        let k = 4usize;
        let mut sup = f64::NEG_INFINITY;
        for i in 0..k {
            for j in 0..k {
                let u = Interval::new(i as f64 / k as f64, (i + 1) as f64 / k as f64);
                let vv = Interval::new(j as f64 / k as f64, (j + 1) as f64 / k as f64);
                let mut w_enc = pv.eval_box(&u, &vv);
                if in_support && om.a != 0.0 {
                    let rect = Rect {
                        x0: x0 + u.lo * h,
                        x1: x0 + u.hi * h,
                        y0: y0 + vv.lo * h,
                        y1: y0 + vv.hi * h,
                    };
                    let gam = gamma_box(&rect);
                    let lam = clamp01(lam_l.eval_box(&u, &vv));
                    w_enc = a_iv.mul(&lam.mul(&gam)).add(&w_enc);
                }
                sup = sup.max(w_enc.hi);
            }
        }
        if !sup.is_finite() {
            return Err(SpectralError::CbarTooSmall);
        }
        let cval = if sup <= 0.0 {
            0.0
        } else {
            mul_up(3.0, mul_up(sup, sup))
        };
        // classify by the diagonal-symmetry arm coordinate of the center
        let (mut cx, mut cy) = ((x0 + 0.5 * h), (y0 + 0.5 * h));
        if cy < 0.0 {
            let t = cx;
            cx = -cy;
            cy = -t;
        }
        let _ = cy;
        if cx < 0.0 {
            c_corner = c_corner.max(cval);
        } else {
            let i = (cx.floor() as usize).min(nslab - 1);
            c_arm[i] = c_arm[i].max(cval);
        }
    }
    Ok(BaseCoefficient { c_corner, c_arm })
}

// ---------------------------------------------------------------------------
// trial functions and interval matrix assembly
// ---------------------------------------------------------------------------

/// Approximate eigenvectors of the current float pencil, A-orthonormalized
/// (so the interval Gram `A0` is close to the identity).
pub struct TrialBasis {
    pub space: Arc<FeSpace>,
    pub vecs: Vec<Vec<f64>>,
    /// Float eigenvalue estimates `Lambda ~ kappa` (quality only).
    pub lam_est: Vec<f64>,
}

fn csr_to_dense(m: &Csr) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.n, m.n);
    for i in 0..m.n {
        for k in m.row_ptr[i]..m.row_ptr[i + 1] {
            d[(i, m.cols[k])] = m.vals[k];
        }
    }
    d
}

pub fn trial_basis(
    space: &Arc<FeSpace>,
    c: &dyn Fn(f64, f64) -> f64,
    n: usize,
) -> Result<TrialBasis, SpectralError> {
    let nd = space.ndof;
    let a = space.stiffness().add_scaled(&space.mass(), 1.0);
    let w = space.mass().add_scaled(&space.weighted_mass(&|_, x, y| c(x, y), 6), 1.0);
    let ad = csr_to_dense(&a);
    let wd = csr_to_dense(&w);
    let chol = nalgebra::linalg::Cholesky::new(ad).ok_or_else(|| {
        SpectralError::DefinitenessFailure("float H1 Gram not positive definite".into())
    })?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&wd)
        .ok_or_else(|| SpectralError::SolverBreakdown("triangular solve".into()))?;
    let s = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| SpectralError::SolverBreakdown("triangular solve".into()))?;
    let eig = nalgebra::SymmetricEigen::new(s);
    let mut idx: Vec<usize> = (0..nd).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let lt = l.transpose();
    let mut vecs = Vec::new();
    let mut lam_est = Vec::new();
    // trials whose float estimate is far above the essential threshold only
    // degrade the conditioning of the mass-type pencil matrices
    let lam_cap = 4.0 * essential_threshold_kappa().hi;
    for &t in idx.iter().take(n) {
        let theta = eig.eigenvalues[t];
        if theta <= 0.0 || 1.0 / theta > lam_cap {
            break;
        }
        let yv = eig.eigenvectors.column(t).clone_owned();
        let x = lt
            .solve_upper_triangular(&yv)
            .ok_or_else(|| SpectralError::SolverBreakdown("triangular solve".into()))?;
        vecs.push(x.iter().copied().collect());
        lam_est.push(1.0 / theta);
    }
    if vecs.is_empty() {
        return Err(SpectralError::SolverBreakdown(
            "no positive pencil eigenvalues".into(),
        ));
    }
    Ok(TrialBasis {
        space: space.clone(),
        vecs,
        lam_est,
    })
}

struct CoarseMats {
    a0: IvMatrix,
    m_plain: IvMatrix,
    m_cbar: IvMatrix,
    m_cbar2: IvMatrix,
}

const UNIT: Rect = Rect {
    x0: 0.0,
    x1: 1.0,
    y0: 0.0,
    y1: 1.0,
};

fn assemble_coarse(tb: &TrialBasis, cbar: &BaseCoefficient) -> CoarseMats {
    let n = tb.vecs.len();
    let mesh = &tb.space.mesh;
    let h = mesh.h;
    let h2 = Interval::point(h).sqr();
    let mut a0 = IvMatrix::zeros(n);
    let mut m_plain = IvMatrix::zeros(n);
    let mut m_cbar = IvMatrix::zeros(n);
    let mut m_cbar2 = IvMatrix::zeros(n);
    for cell in &mesh.cells {
        let polys: Vec<Poly2> = tb
            .vecs
            .iter()
            .map(|v| local_q8_poly(&local_vals(&tb.space, v, cell)))
            .collect();
        let dx: Vec<Poly2> = polys.iter().map(|p| p.ddx()).collect();
        let dy: Vec<Poly2> = polys.iter().map(|p| p.ddy()).collect();
        let cb = Interval::point(cbar.at((cell.cx as f64 + 0.5) * h, (cell.cy as f64 + 0.5) * h));
        for i in 0..n {
            for j in i..n {
                let mass = polys[i].mul(&polys[j]).integral(&UNIT).mul(&h2);
                let stiff = dx[i]
                    .mul(&dx[j])
                    .add(&dy[i].mul(&dy[j]))
                    .integral(&UNIT);
                let g = stiff.add(&mass);
                a0.add_to(i, j, g);
                m_plain.add_to(i, j, mass);
                m_cbar.add_to(i, j, cb.mul(&mass));
                m_cbar2.add_to(i, j, cb.sqr().mul(&mass));
                if i != j {
                    a0.add_to(j, i, g);
                    m_plain.add_to(j, i, mass);
                    m_cbar.add_to(j, i, cb.mul(&mass));
                    m_cbar2.add_to(j, i, cb.sqr().mul(&mass));
                }
            }
        }
    }
    CoarseMats {
        a0,
        m_plain,
        m_cbar,
        m_cbar2,
    }
}

struct FineMats {
    m_c: IvMatrix,
    m_cbarc: IvMatrix,
    m_c2: IvMatrix,
    g: IvMatrix,
    dd: IvMatrix,
    /// `int div_i v_j` (not symmetric).
    ndv: IvMatrix,
    ncbar_dv: IvMatrix,
    nc_dv: IvMatrix,
}

/// Assembles the coefficient-weighted trial matrices and, when fluxes are
/// given, the Goerisch blocks, over the coefficient mesh (which nests inside
/// the trial mesh).
fn assemble_fine(
    coef: &Coefficient,
    cbar: &BaseCoefficient,
    tb: &TrialBasis,
    fluxes: Option<&[Flux]>,
) -> FineMats {
    let n = tb.vecs.len();
    let mesh = &coef.space.mesh;
    let h = mesh.h;
    let h_iv = Interval::point(h);
    let h2 = h_iv.sqr();
    let hinv = h_iv.recip().expect("mesh width positive");
    let ht = tb.space.mesh.h;
    let m = (ht / h).round() as i64;
    assert!((ht - m as f64 * h).abs() < 1e-12, "meshes must nest");
    let tmap: HashMap<(i64, i64), usize> = tb
        .space
        .mesh
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.cx, c.cy), i))
        .collect();
    let mut fm = FineMats {
        m_c: IvMatrix::zeros(n),
        m_cbarc: IvMatrix::zeros(n),
        m_c2: IvMatrix::zeros(n),
        g: IvMatrix::zeros(n),
        dd: IvMatrix::zeros(n),
        ndv: IvMatrix::zeros(n),
        ncbar_dv: IvMatrix::zeros(n),
        nc_dv: IvMatrix::zeros(n),
    };
    let inv_m = 1.0 / m as f64;
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let pcx = cell.cx.div_euclid(m);
        let pcy = cell.cy.div_euclid(m);
        let qx = (cell.cx - pcx * m) as f64 * inv_m;
        let qy = (cell.cy - pcy * m) as f64 * inv_m;
        let pidx = *tmap.get(&(pcx, pcy)).expect("nested meshes share cells");
        let pcell = &tb.space.mesh.cells[pidx];
        let tp: Vec<Poly2> = tb
            .vecs
            .iter()
            .map(|v| {
                local_q8_poly(&local_vals(&tb.space, v, pcell))
                    .compose_affine(qx, inv_m, qy, inv_m)
            })
            .collect();
        let cb = Interval::point(cbar.at(
            (cell.cx as f64 + 0.5) * h,
            (cell.cy as f64 + 0.5) * h,
        ));
        for i in 0..n {
            for j in i..n {
                let q = tp[i].mul(&tp[j]);
                let (w1, w2) = coef.weighted(ci, &q);
                let wb = cb.mul(&w1);
                fm.m_c.add_to(i, j, w1);
                fm.m_cbarc.add_to(i, j, wb);
                fm.m_c2.add_to(i, j, w2);
                if i != j {
                    fm.m_c.add_to(j, i, w1);
                    fm.m_cbarc.add_to(j, i, wb);
                    fm.m_c2.add_to(j, i, w2);
                }
            }
        }
        if let Some(fl) = fluxes {
            let px: Vec<Poly2> = fl
                .iter()
                .map(|f| local_q8_poly(&local_vals(&f.space_x, &f.rho_x, cell)))
                .collect();
            let py: Vec<Poly2> = fl
                .iter()
                .map(|f| local_q8_poly(&local_vals(&f.space_y, &f.rho_y, cell)))
                .collect();
            let dq: Vec<Poly2> = (0..n).map(|i| px[i].ddx().add(&py[i].ddy())).collect();
            for i in 0..n {
                for j in i..n {
                    let gij = px[i]
                        .mul(&px[j])
                        .add(&py[i].mul(&py[j]))
                        .integral(&UNIT)
                        .mul(&h2);
                    let dij = dq[i].mul(&dq[j]).integral(&UNIT);
                    fm.g.add_to(i, j, gij);
                    fm.dd.add_to(i, j, dij);
                    if i != j {
                        fm.g.add_to(j, i, gij);
                        fm.dd.add_to(j, i, dij);
                    }
                }
                for j in 0..n {
                    let q = dq[i].mul(&tp[j]);
                    let plain = q.integral(&UNIT).mul(&h_iv);
                    let (w1, _) = coef.weighted(ci, &q);
                    fm.ndv.add_to(i, j, plain);
                    fm.ncbar_dv.add_to(i, j, cb.mul(&plain));
                    fm.nc_dv.add_to(i, j, w1.mul(&hinv));
                }
            }
        }
    }
    fm
}

fn mat_comb(terms: &[(&IvMatrix, Interval)]) -> IvMatrix {
    let n = terms[0].0.n;
    IvMatrix::from_fn(n, |i, j| {
        let mut acc = Interval::ZERO;
        for (m, c) in terms {
            acc += m.get(i, j).mul(c);
        }
        acc
    })
}

fn a1_at(s: f64, cm: &CoarseMats, fm: &FineMats) -> IvMatrix {
    mat_comb(&[
        (&cm.m_plain, Interval::ONE),
        (&cm.m_cbar, Interval::point(1.0 - s)),
        (&fm.m_c, Interval::point(s)),
    ])
}

fn a2_at(s: f64, cm: &CoarseMats, fm: &FineMats) -> IvMatrix {
    // A2[i][j] = int w_i.w_j + (div w_i + (1+c_s)v_i)(div w_j + (1+c_s)v_j)
    let sm = Interval::point(s);
    let rm = Interval::point(1.0 - s);
    let x = mat_comb(&[
        (&fm.ndv, Interval::ONE),
        (&fm.ncbar_dv, rm),
        (&fm.nc_dv, sm),
    ]);
    let q = mat_comb(&[
        (&cm.m_plain, Interval::ONE),
        (&cm.m_cbar, rm.scale(2.0)),
        (&fm.m_c, sm.scale(2.0)),
        (&cm.m_cbar2, rm.sqr()),
        (&fm.m_cbarc, rm.mul(&sm).scale(2.0)),
        (&fm.m_c2, sm.sqr()),
    ]);
    let n = q.n;
    IvMatrix::from_fn(n, |i, j| {
        fm.g.get(i, j)
            .add(&fm.dd.get(i, j))
            .add(&x.get(i, j))
            .add(&x.get(j, i))
            .add(&q.get(i, j))
    })
}

fn gevp_err(e: GevpError) -> SpectralError {
    match e {
        GevpError::NotPositiveDefinite => {
            SpectralError::DefinitenessFailure("pencil right-hand matrix".into())
        }
        other => SpectralError::SolverBreakdown(format!("{other:?}")),
    }
}

fn rr_raw(a0: &IvMatrix, a1: &IvMatrix) -> Result<Vec<Interval>, SpectralError> {
    if !verified_spd(a0) {
        return Err(SpectralError::DefinitenessFailure(
            "trial Gram A0 not verifiably positive definite".into(),
        ));
    }
    Ok(verified_sym_gevp(a0, a1).map_err(gevp_err)?.eigen_bounds)
}

/// Rayleigh-Ritz upper bounds: ascending enclosures of the eigenvalues of
/// `A0 x = Lambda A1 x`; `kappa_i <= Lambda_i` holds only below the essential
/// threshold, so `Lambda_n >= pi^2+1` is rejected.
pub fn rayleigh_ritz(a0: &IvMatrix, a1: &IvMatrix) -> Result<Vec<Interval>, SpectralError> {
    let lam = rr_raw(a0, a1)?;
    if let Some(last) = lam.last() {
        if !(last.hi < essential_threshold_kappa().lo) {
            return Err(SpectralError::ThresholdViolation(last.hi));
        }
    }
    Ok(lam)
}

/// Lehmann-Goerisch lower bounds `kappa_m >= rho - rho/(1 - mu_{n+1-m})`
/// where `mu_1 <= ... <= mu_n < 0` solve the pencil
/// `(A0 - rho A1) x = mu (A0 - 2 rho A1 + rho^2 A2) x`.
/// Requires `Lambda_n < rho <= pi^2+1` and `rho <= kappa_{n+1}` (caller
/// guarantees the latter via the homotopy bookkeeping).
///
/// Solved in the inverted form `B x = tau (rho A1 - A0) x` with
/// `tau = -1/mu`, so the bound reads `kappa_m >= rho / (1 + tau_{n+1-m})`.
/// The right-hand matrix is then tight (stiffness and base-mass data only)
/// and the interval slack of the Goerisch matrix `A2` lands on the large,
/// insensitive `tau` of the near-degenerate top trial instead of being
/// broadcast to every index through the disk radii.
pub fn lehmann_goerisch(
    a0: &IvMatrix,
    a1: &IvMatrix,
    a2: &IvMatrix,
    rho: f64,
    lambda_n_hi: f64,
) -> Result<Vec<f64>, SpectralError> {
    let thresh = essential_threshold_kappa();
    if !(lambda_n_hi < rho && rho <= thresh.lo) {
        return Err(SpectralError::RhoInvalid(rho));
    }
    let r = Interval::point(rho);
    let n = a0.n;
    let g_neg = mat_comb(&[(a1, r), (a0, Interval::ONE.scale(-1.0))]);
    let b = mat_comb(&[(a0, Interval::ONE), (a1, r.scale(-2.0)), (a2, r.sqr())]);
    let enc = verified_sym_gevp(&b, &g_neg).map_err(gevp_err)?;
    // tau > 0 with rho A1 - A0 positive definite certifies B positive
    // definite and every mu = -1/tau negative
    if enc.eigen_bounds.iter().any(|t| !(t.lo > 0.0)) {
        return Err(SpectralError::NonNegativeMu);
    }
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        let tau = enc.eigen_bounds[n - m];
        let lb = r.div(&Interval::ONE.add(&tau)).expect("1 + tau > 1").lo;
        out.push(lb);
    }
    Ok(out)
}

/// Least-squares Goerisch flux for trial function `i`: approximate minimizer
/// of `|(1/Lambda) grad v - w|^2 + |-div w + ((1/Lambda) - (1+c)) v|^2`.
pub fn goerisch_fit(
    tb: &TrialBasis,
    i: usize,
    lam: f64,
    c: &dyn Fn(f64, f64) -> f64,
    mesh: &Arc<Mesh>,
) -> Result<Flux, SpectralError> {
    let sp = tb.space.clone();
    let v = tb.vecs[i].clone();
    let g = {
        let sp = sp.clone();
        let v = v.clone();
        move |x: f64, y: f64| {
            let (gx, gy) = sp.eval_grad(&v, x, y);
            (gx / lam, gy / lam)
        }
    };
    let d = move |x: f64, y: f64| {
        let vv = sp.eval(&v, x, y);
        (1.0 + c(x, y)) * vv - vv / lam
    };
    hdiv_fit(mesh, &g, &d, 1.0, 6).map_err(SpectralError::SolverBreakdown)
}

// ---------------------------------------------------------------------------
// homotopy driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub s: f64,
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub tag: String,
}

pub struct HomotopyOutcome {
    pub class: SymmetryClass,
    pub base: Vec<EigenEnclosure>,
    /// Final two-sided enclosures at `s = 1`, plus a last sentinel entry
    /// carrying only the verified lower bound for the next eigenvalue.
    pub finals: Vec<EigenEnclosure>,
    pub trace: Vec<TraceRow>,
    pub n0: usize,
    pub stages: Vec<f64>,
}

pub struct HomotopySettings {
    pub trial_h: f64,
    pub eps: f64,
    pub n_max: usize,
    pub taylor_target: f64,
    pub verbose: bool,
}

impl Default for HomotopySettings {
    fn default() -> Self {
        HomotopySettings {
            trial_h: 0.125,
            eps: 0.05,
            n_max: 16,
            taylor_target: 1e-6,
            verbose: false,
        }
    }
}

pub fn homotopy_run(
    om: &Omega,
    coef: &Coefficient,
    cbar: &BaseCoefficient,
    st: &HomotopySettings,
    class: SymmetryClass,
) -> Result<HomotopyOutcome, SpectralError> {
    let thresh = essential_threshold_kappa().lo;
    let base = domain_decomposition_eigs(cbar, st.eps, class)?;
    let mut trace: Vec<TraceRow> = base
        .iter()
        .map(|e| TraceRow {
            s: 0.0,
            index: e.index,
            lower: e.lower,
            upper: f64::INFINITY,
            tag: "base".into(),
        })
        .collect();
    let tmesh = Arc::new(
        crate::geometry::generate_mesh(&om.space_coarse.mesh.spec, st.trial_h)
            .map_err(|e| SpectralError::DomainViolation(format!("{e:?}")))?,
    );
    let tspace = FeSpace::new(tmesh, class, DirichletKind::AllOuter);
    let omega_c = {
        let sp = om.space_coarse.clone();
        let v = om.v_coarse.clone();
        let a = om.a;
        move |x: f64, y: f64| a * singular::w_f64(x, y) + sp.eval(&v, x, y)
    };
    let c_at = |s: f64| {
        let omega_c = omega_c.clone();
        move |x: f64, y: f64| {
            let w = omega_c(x, y);
            (1.0 - s) * cbar.at(x, y) + s * 3.0 * w.abs() * w
        }
    };
    // Rayleigh-Ritz probe at homotopy parameter s with k trial functions
    let probe = |s: f64,
                 k: usize|
     -> Result<(TrialBasis, CoarseMats, FineMats, Vec<Interval>), SpectralError> {
        let tb = trial_basis(&tspace, &c_at(s), k)?;
        let cm = assemble_coarse(&tb, cbar);
        let fm = assemble_fine(coef, cbar, &tb, None);
        // raw bounds: entries at or above the essential threshold are
        // discarded by the admissibility filter, not treated as errors
        let lam = rr_raw(&cm.a0, &a1_at(s, &cm, &fm))?;
        Ok((tb, cm, fm, lam))
    };

    if base.is_empty() {
        // no discrete spectrum below the threshold at s=0; a single RR pass
        // at s=1 can still certify nothing, so report the essential data only
        return Ok(HomotopyOutcome {
            class,
            base,
            finals: vec![],
            trace,
            n0: 0,
            stages: vec![],
        });
    }

    // stage 0: auto-select n as the largest index with a verified gap
    // Lambda_n(0) < kappa_{n+1}^{(0)}
    let kmax = st.n_max.min(base.len().saturating_sub(1)).max(1);
    let (_tb0, _cm0, _fm0, lam0) = probe(0.0, kmax)?;
    if st.verbose {
        eprintln!(
            "[homotopy {class:?}] base lowers {:?}",
            base.iter().map(|e| e.lower).collect::<Vec<_>>()
        );
        eprintln!(
            "[homotopy {class:?}] s=0 RR uppers {:?}",
            lam0.iter().map(|l| l.hi).collect::<Vec<_>>()
        );
    }
    let mut n0 = 0usize;
    for i in 1..=lam0.len().min(base.len().saturating_sub(1)) {
        if lam0[i - 1].hi < base[i].lower && lam0[i - 1].hi < thresh {
            n0 = i;
        }
    }
    if n0 == 0 {
        return Err(SpectralError::HomotopyStall(0.0));
    }
    for (i, l) in lam0.iter().enumerate().take(n0) {
        trace.push(TraceRow {
            s: 0.0,
            index: i + 1,
            lower: f64::NEG_INFINITY,
            upper: l.hi,
            tag: "rr".into(),
        });
    }
    // lb[j] = verified lower bound for eigenvalue j+1, valid for all t >= s
    let mut lb: Vec<f64> = base.iter().map(|e| e.lower).collect();
    let mut s_cur = 0.0f64;
    let mut n_cur = n0;
    let mut stages: Vec<f64> = Vec::new();
    let mut finals = Vec::new();
    // The Lehmann pencil right-hand matrix degenerates as Lambda_n -> rho,
    // so verified definiteness needs a sliver of clearance.
    let clear = |lam: &[Interval], n: usize, rho: f64| -> bool {
        lam.len() >= n && lam[n - 1].hi < 0.98 * rho
    };
    loop {
        // One condition governs a step with n trials: the top Ritz value
        // must stay below a lower bound for eigenvalue n+1 that is valid at
        // every later parameter. Bounds for the lower indices come out of
        // the Lehmann step itself.
        let rho = lb[n_cur].min(thresh);
        let mut accepted: Option<(f64, TrialBasis, CoarseMats, FineMats, Vec<Interval>)> = None;
        {
            let (tb, cm, fm, lam) = probe(1.0, n_cur)?;
            if clear(&lam, n_cur, rho) {
                accepted = Some((1.0, tb, cm, fm, lam));
            }
        }
        if accepted.is_none() {
            let (mut lo, mut hi) = (s_cur, 1.0);
            for _ in 0..6 {
                let mid = 0.5 * (lo + hi);
                let (tb, cm, fm, lam) = probe(mid, n_cur)?;
                if clear(&lam, n_cur, rho) {
                    lo = mid;
                    accepted = Some((mid, tb, cm, fm, lam));
                } else {
                    hi = mid;
                }
            }
        }
        let Some((mut s_next, mut tb, mut cm, mut fm, mut lam)) = accepted else {
            // blocked: the top eigenvalue has outgrown its ceiling; drop it
            // (its own latest lower bound becomes the next ceiling)
            if st.verbose {
                eprintln!("[homotopy {class:?}] shrink n {n_cur} -> {} at s={s_cur}", n_cur - 1);
            }
            if n_cur <= 1 {
                return Err(SpectralError::HomotopyStall(s_cur));
            }
            n_cur -= 1;
            continue;
        };
        if s_next <= s_cur {
            return Err(SpectralError::HomotopyStall(s_cur));
        }
        let m = n_cur;
        // Lehmann-Goerisch at s_next, backing off toward s_cur when the
        // near-degenerate pencil resists verification
        let mut lg = None;
        for _ in 0..4 {
            if st.verbose {
                eprintln!(
                    "[homotopy {class:?}] s={s_next} n={m} rho={rho} RR {:?}",
                    lam.iter().map(|l| l.hi).collect::<Vec<_>>()
                );
            }
            let sub = |mat: &IvMatrix| IvMatrix::from_fn(m, |i, j| mat.get(i, j));
            let tbm = TrialBasis {
                space: tb.space.clone(),
                vecs: tb.vecs[..m].to_vec(),
                lam_est: tb.lam_est[..m].to_vec(),
            };
            let c_fn = c_at(s_next);
            let fluxes: Vec<Flux> = (0..m)
                .map(|i| goerisch_fit(&tbm, i, tbm.lam_est[i], &c_fn, &coef.space.mesh))
                .collect::<Result<_, _>>()?;
            let fm_full = assemble_fine(coef, cbar, &tbm, Some(&fluxes));
            let a0m = sub(&cm.a0);
            let a1m = sub(&a1_at(s_next, &cm, &fm));
            let a2m = a2_at(
                s_next,
                &CoarseMats {
                    a0: sub(&cm.a0),
                    m_plain: sub(&cm.m_plain),
                    m_cbar: sub(&cm.m_cbar),
                    m_cbar2: sub(&cm.m_cbar2),
                },
                &fm_full,
            );
            match lehmann_goerisch(&a0m, &a1m, &a2m, rho, lam[m - 1].hi) {
                Ok(lbs) => {
                    lg = Some(lbs);
                    break;
                }
                Err(SpectralError::DefinitenessFailure(_))
                | Err(SpectralError::NonNegativeMu)
                | Err(SpectralError::SolverBreakdown(_)) => {
                    let s_retry = 0.5 * (s_cur + s_next);
                    if st.verbose {
                        eprintln!(
                            "[homotopy {class:?}] pencil not verifiable at s={s_next}, retry s={s_retry}"
                        );
                    }
                    if s_retry <= s_cur {
                        break;
                    }
                    let (ntb, ncm, nfm, nlam) = probe(s_retry, m)?;
                    if !clear(&nlam, m, rho) {
                        break;
                    }
                    s_next = s_retry;
                    tb = ntb;
                    cm = ncm;
                    fm = nfm;
                    lam = nlam;
                }
                Err(other) => return Err(other),
            }
        }
        let Some(lbs) = lg else {
            if st.verbose {
                eprintln!("[homotopy {class:?}] shrink n {n_cur} -> {} at s={s_cur}", n_cur - 1);
            }
            if n_cur <= 1 {
                return Err(SpectralError::HomotopyStall(s_cur));
            }
            n_cur -= 1;
            continue;
        };
        if st.verbose {
            eprintln!("[homotopy {class:?}] s={s_next} LG lowers {lbs:?}");
        }
        for (i, &l) in lbs.iter().enumerate() {
            if lb[i] < l {
                lb[i] = l;
            }
            trace.push(TraceRow {
                s: s_next,
                index: i + 1,
                lower: l,
                upper: lam[i].hi,
                tag: "homotopy".into(),
            });
        }
        stages.push(s_next);
        s_cur = s_next;
        if s_cur >= 1.0 {
            for i in 0..m {
                finals.push(EigenEnclosure {
                    index: i + 1,
                    lower: lb[i],
                    upper: lam[i].hi,
                    symmetry_class: class,
                    stage: Stage::FinalLg,
                });
            }
            // sentinel: everything beyond index m is at least rho
            finals.push(EigenEnclosure {
                index: m + 1,
                lower: rho,
                upper: f64::INFINITY,
                symmetry_class: class,
                stage: Stage::FinalLg,
            });
            for e in &finals {
                trace.push(TraceRow {
                    s: 1.0,
                    index: e.index,
                    lower: e.lower,
                    upper: e.upper,
                    tag: "final".into(),
                });
            }
            break;
        }
    }
    Ok(HomotopyOutcome {
        class,
        base,
        finals,
        trace,
        n0,
        stages,
    })
}

#[doc(hidden)]
pub fn debug_widths(om: &Omega, coef: &Coefficient, cbar: &BaseCoefficient) {
    let tmesh = Arc::new(
        crate::geometry::generate_mesh(&om.space_coarse.mesh.spec, 0.125).unwrap(),
    );
    let tspace = FeSpace::new(tmesh, SymmetryClass::Symmetric, DirichletKind::AllOuter);
    let s = 0.00390625;
    let omega_c = |x: f64, y: f64| {
        om.a * singular::w_f64(x, y) + om.space_coarse.eval(&om.v_coarse, x, y)
    };
    let c_fn = move |x: f64, y: f64| {
        let w = omega_c(x, y);
        (1.0 - s) * cbar.at(x, y) + s * 3.0 * w.abs() * w
    };
    let tb = trial_basis(&tspace, &c_fn, 11).unwrap();
    let cm = assemble_coarse(&tb, cbar);
    let fluxes: Vec<Flux> = (0..tb.vecs.len())
        .map(|i| goerisch_fit(&tb, i, tb.lam_est[i], &c_fn, &coef.space.mesh).unwrap())
        .collect();
    let fm = assemble_fine(coef, cbar, &tb, Some(&fluxes));
    let width = |m: &IvMatrix, name: &str| {
        let mut w = 0.0f64;
        for i in 0..m.n {
            for j in 0..m.n {
                let e = m.get(i, j);
                w = w.max(e.hi - e.lo);
            }
        }
        eprintln!("width[{name}] max = {w:.3e}");
    };
    width(&cm.a0, "a0");
    width(&cm.m_cbar, "m_cbar");
    width(&cm.m_cbar2, "m_cbar2");
    width(&fm.m_c, "m_c");
    width(&fm.m_cbarc, "m_cbarc");
    width(&fm.m_c2, "m_c2");
    width(&fm.g, "g");
    width(&fm.dd, "dd");
    width(&fm.ndv, "ndv");
    width(&fm.nc_dv, "nc_dv");
    let a1 = a1_at(s, &cm, &fm);
    let a2 = a2_at(s, &cm, &fm);
    width(&a1, "a1");
    width(&a2, "a2");
    let rho = 2.23376976061055f64;
    let r = Interval::point(rho);
    let b = mat_comb(&[
        (&cm.a0, Interval::ONE),
        (&a1, r.scale(-2.0)),
        (&a2, r.sqr()),
    ]);
    width(&b, "B");
    let bm = b.midpoint();
    let eig = bm.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eprintln!("B midpoint eigs {ev:?}");
    eprintln!("lam_est {:?}", tb.lam_est);
    eprintln!(
        "flux objectives {:?}",
        fluxes.iter().map(|f| f.objective).collect::<Vec<_>>()
    );
    // ideal diagonal of A2 is approximately a0_ii / lam_i^2
    for i in 0..tb.vecs.len() {
        let ideal = cm.a0.get(i, i).mid() / (tb.lam_est[i] * tb.lam_est[i]);
        eprintln!(
            "a2[{i}][{i}] = {:?} ideal ~ {ideal:.6}",
            a2.get(i, i)
        );
    }
}

// ---------------------------------------------------------------------------
// K and the norm transfer
// ---------------------------------------------------------------------------

/// `K = 1 / min |nu|` over the verified spectrum: discrete enclosures
/// (`nu = 1 - 1/kappa`) plus the essential floor. Every enclosure must be
/// verifiably on one side of `kappa = 1`.
pub fn compute_k(finals: &[EigenEnclosure]) -> Result<Interval, SpectralError> {
    let mut min_abs = essential_floor_nu();
    for e in finals {
        let cand = if e.upper < 1.0 {
            // kappa <= upper < 1: |nu| = 1/kappa - 1 >= 1/upper - 1
            Interval::point(e.upper)
                .recip()
                .map_err(|_| SpectralError::GapFailure)?
                .sub(&Interval::ONE)
        } else if e.lower > 1.0 {
            Interval::ONE.sub(
                &Interval::point(e.lower)
                    .recip()
                    .map_err(|_| SpectralError::GapFailure)?,
            )
        } else {
            return Err(SpectralError::GapFailure);
        };
        if cand.lo <= 0.0 {
            return Err(SpectralError::GapFailure);
        }
        if cand.lo < min_abs.lo {
            min_abs = cand;
        }
    }
    min_abs.recip().map_err(|_| SpectralError::GapFailure)
}

/// Norm transfer: bounds for the linearization at `omega` from bounds at the
/// nearby `omega_c`, via `kappa = 3 C4^3 K (|u|_4 + |u~|_4) |u - u~|_H10`.
pub fn transfer_k(
    k: &Interval,
    l4_u: &Interval,
    l4_ut: &Interval,
    diff_h1: &Interval,
    c4: &Interval,
) -> Result<Interval, SpectralError> {
    let gamma = c4.sqr().mul(c4).scale(3.0);
    let kap = gamma.mul(k).mul(&l4_u.add(l4_ut)).mul(diff_h1);
    if !(kap.hi < 1.0) {
        return Err(SpectralError::KappaTooLarge(kap.hi));
    }
    k.div(&Interval::ONE.sub(&kap))
        .map_err(|_| SpectralError::KappaTooLarge(kap.hi))
}

/// Exact `H10` distance between the refined and the spectral-stage regular
/// parts: both are piecewise polynomials on nested meshes.
pub fn regular_diff_h1(om: &Omega) -> Interval {
    let fine = &om.space;
    let coarse = &om.space_coarse;
    if Arc::ptr_eq(fine, coarse) {
        return Interval::ZERO;
    }
    let hf = fine.mesh.h;
    let hc = coarse.mesh.h;
    let m = (hc / hf).round() as i64;
    let inv_m = 1.0 / m as f64;
    let cmap: HashMap<(i64, i64), usize> = coarse
        .mesh
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.cx, c.cy), i))
        .collect();
    let h2 = Interval::point(hf).sqr();
    let mut acc = Interval::ZERO;
    for cell in &fine.mesh.cells {
        let pf = local_q8_poly(&local_vals(fine, &om.v, cell));
        let pcx = cell.cx.div_euclid(m);
        let pcy = cell.cy.div_euclid(m);
        let pidx = *cmap.get(&(pcx, pcy)).expect("nested meshes share cells");
        let pc = local_q8_poly(&local_vals(coarse, &om.v_coarse, &coarse.mesh.cells[pidx]))
            .compose_affine(
                (cell.cx - pcx * m) as f64 * inv_m,
                inv_m,
                (cell.cy - pcy * m) as f64 * inv_m,
                inv_m,
            );
        let d = pf.sub(&pc);
        let dx = d.ddx();
        let dy = d.ddy();
        acc += dx.mul(&dx).add(&dy.mul(&dy)).integral(&UNIT);
        acc += d.mul(&d).integral(&UNIT).mul(&h2);
    }
    acc.intersect(&Interval::new(0.0, f64::INFINITY))
        .sqrt_nonneg()
        .unwrap_or(Interval::new(0.0, f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn essential_floor_and_threshold_are_consistent() {
        let floor = essential_floor_nu();
        let thresh = essential_threshold_kappa();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert!(floor.contains(pi2 / (pi2 + 1.0)));
        assert!(thresh.contains(pi2 + 1.0));
        assert!(floor.hi - floor.lo < 1e-14);
        assert!(thresh.hi - thresh.lo < 1e-13);
        // nu = 1 - 1/kappa maps the threshold to the floor
        let nu = nu_from_kappa(&thresh).unwrap();
        assert!(nu.lo <= floor.hi && floor.lo <= nu.hi);
        let back = kappa_from_nu(&floor).unwrap();
        assert!(back.lo <= thresh.hi && thresh.lo <= back.hi);
    }

    #[test]
    fn series_matches_std_cosh_and_cos() {
        // c0(z) = cosh(sqrt z) for z >= 0 and cos(sqrt -z) for z < 0;
        // s0(z) = sinh(sqrt z)/sqrt z resp. sin(sqrt -z)/sqrt -z
        for &z in &[0.0, 1e-8, 0.3, 1.0, 4.0, 9.0, -0.5, -2.0, -9.0] {
            let (c0, s0, dc, ds) = series_cs(&Interval::point(z));
            let (rc, rs) = if z >= 0.0 {
                let r = z.sqrt();
                (r.cosh(), if z == 0.0 { 1.0 } else { r.sinh() / r })
            } else {
                let r = (-z).sqrt();
                (r.cos(), r.sin() / r)
            };
            assert!(c0.contains(rc), "c0({z}) = {c0} vs {rc}");
            assert!(s0.contains(rs), "s0({z}) = {s0} vs {rs}");
            assert!(c0.hi - c0.lo < 1e-12);
            assert!(s0.hi - s0.lo < 1e-12);
            // derivative identity dc0/dz = s0/2, checked via the series
            assert!(dc.sub(&s0.scale(0.5)).mag() < 1e-12, "dc0 != s0/2 at z={z}");
            // ds0/dz = (c0 - s0)/(2z); finite difference check instead (robust at z=0)
            let eps = 1e-6;
            let (_, sp, _, _) = series_cs(&Interval::point(z + eps));
            let (_, sm, _, _) = series_cs(&Interval::point(z - eps));
            let fd = (sp.lo + sp.hi - sm.lo - sm.hi) / (4.0 * eps);
            assert!((ds.lo - fd).abs() < 1e-5, "ds0({z}) = {ds} vs fd {fd}");
        }
    }

    #[test]
    fn pure_strip_has_no_discrete_spectrum() {
        // c = 0: essential spectrum [pi^2+1, inf) only
        for m in 1..4 {
            let eigs = arm_mode_eigs(&[0.0, 0.0], m, 0.05).unwrap();
            assert!(eigs.is_empty(), "mode {m}: {eigs:?}");
        }
    }

    // f64 matching function evaluated with std cosh/sinh: an oracle for root
    // locations fully independent of the interval series and interval Newton
    fn arm_matching_f64(c_arm: &[f64], m: u32, kappa: f64) -> f64 {
        let pi = std::f64::consts::PI;
        let base = 1.0 + (m * m) as f64 * pi * pi;
        let (mut x, mut xp) = (1.0f64, 0.0f64);
        for &c in c_arm {
            let alpha = base - kappa * (1.0 + c);
            let (c0, s0) = if alpha >= 0.0 {
                let r = alpha.sqrt();
                (r.cosh(), if r == 0.0 { 1.0 } else { r.sinh() / r })
            } else {
                let r = (-alpha).sqrt();
                (r.cos(), r.sin() / r)
            };
            let (nx, nxp) = (c0 * x + s0 * xp, alpha * s0 * x + c0 * xp);
            x = nx;
            xp = nxp;
        }
        xp + (base - kappa).sqrt() * x
    }

    #[test]
    fn arm_eigenvalues_match_f64_matching_oracle() {
        let c_arm = [40.0, 10.0, 2.0];
        for m in 1..3u32 {
            let eigs = arm_mode_eigs(&c_arm, m, 0.05).unwrap();
            // every enclosure brackets an f64 sign change of the oracle
            for e in &eigs {
                let pad = 1e-7;
                let (fl, fr) = (
                    arm_matching_f64(&c_arm, m, e.lo - pad),
                    arm_matching_f64(&c_arm, m, e.hi + pad),
                );
                assert!(fl * fr < 0.0, "m={m} enclosure {e} not a bracket: {fl} {fr}");
                assert!(e.hi - e.lo < 1e-7, "wide enclosure {e}");
            }
            // and the oracle finds no extra roots between consecutive enclosures
            let hi = essential_threshold_kappa().lo - 0.05;
            let mut edges = vec![(1.0 + (m * m) as f64 * 9.8696) / 42.0];
            for e in &eigs {
                edges.push(e.lo - 1e-7);
                edges.push(e.hi + 1e-7);
            }
            edges.push(hi);
            for gap in edges.chunks(2) {
                let (a, b) = (gap[0], gap[1]);
                let n = 400;
                let mut prev = arm_matching_f64(&c_arm, m, a);
                for i in 1..=n {
                    let k = a + (b - a) * i as f64 / n as f64;
                    let f = arm_matching_f64(&c_arm, m, k);
                    assert!(prev * f > 0.0, "m={m}: missed root near {k}");
                    prev = f;
                }
            }
        }
    }

    #[test]
    fn arm_eigenvalues_match_finite_difference_oracle() {
        // second-order FD for -X'' + (1 + m^2 pi^2 - kappa(1+c))X = 0 on
        // (0, 12), Neumann at 0, Dirichlet at 12; generalized symmetric
        // problem (D + base I) x = kappa diag(1+c) x via nalgebra
        let c_arm = [40.0, 10.0, 2.0];
        let m = 1u32;
        let n = 900usize;
        let len = 12.0;
        let h = len / n as f64;
        let pi = std::f64::consts::PI;
        let base = 1.0 + (m * m) as f64 * pi * pi;
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let xi = (i as f64 + 0.5) * h;
            let c: f64 = if xi < 1.0 {
                c_arm[0]
            } else if xi < 2.0 {
                c_arm[1]
            } else if xi < 3.0 {
                c_arm[2]
            } else {
                0.0
            };
            let w = (1.0 + c).sqrt();
            // symmetrized: B^{-1/2} (D + base) B^{-1/2}
            let diag = if i == 0 { 1.0 } else { 2.0 } / (h * h) + base;
            a[(i, i)] = diag / (w * w);
            if i + 1 < n {
                let xj = (i as f64 + 1.5) * h;
                let cj: f64 = if xj < 1.0 {
                    c_arm[0]
                } else if xj < 2.0 {
                    c_arm[1]
                } else if xj < 3.0 {
                    c_arm[2]
                } else {
                    0.0
                };
                let wj = (1.0 + cj).sqrt();
                a[(i, i + 1)] = -1.0 / (h * h) / (w * wj);
                a[(i + 1, i)] = a[(i, i + 1)];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(a);
        let mut fd: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        fd.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let eigs = arm_mode_eigs(&c_arm, m, 0.05).unwrap();
        assert!(!eigs.is_empty());
        for (i, e) in eigs.iter().enumerate() {
            let mid = 0.5 * (e.lo + e.hi);
            // second-order FD error grows like h^2 kappa^2; tolerance scales
            assert!(
                (fd[i] - mid).abs() < 1e-3 * (1.0 + mid * mid),
                "eig {i}: verified {mid} vs FD {}",
                fd[i]
            );
        }
    }

    #[test]
    fn corner_class_counts_are_consistent() {
        let c = 30.0;
        let full = corner_eigs(c, 0.05, SymmetryClass::Full);
        let sym = corner_eigs(c, 0.05, SymmetryClass::Symmetric);
        let anti = corner_eigs(c, 0.05, SymmetryClass::Antisymmetric);
        assert_eq!(full.len(), sym.len() + anti.len());
        assert!(!sym.is_empty());
        // closed form to high accuracy: (1 + mu_mn)/(1 + c)
        let pi = std::f64::consts::PI;
        let k11 = (1.0 + 0.5 * pi * pi) / (1.0 + c);
        assert!(sym[0].contains(k11));
        assert!(sym[0].hi - sym[0].lo < 1e-8);
    }

    #[test]
    fn decomposition_union_is_sorted_with_multiplicity() {
        let cbar = BaseCoefficient {
            c_corner: 40.0,
            c_arm: vec![40.0, 10.0, 2.0],
        };
        let eigs = domain_decomposition_eigs(&cbar, 0.05, SymmetryClass::Symmetric).unwrap();
        assert!(eigs.len() >= 12, "only {} enclosures", eigs.len());
        for w in eigs.windows(2) {
            assert!(w[0].lower <= w[1].lower);
        }
        for (i, e) in eigs.iter().enumerate() {
            assert_eq!(e.index, i + 1);
            assert!(e.lower <= e.upper);
            assert!(e.stage == Stage::Base);
        }
        // Full class contains each symmetric-class eigenvalue
        let full = domain_decomposition_eigs(&cbar, 0.05, SymmetryClass::Full).unwrap();
        assert!(full.len() > eigs.len());
    }

    #[test]
    fn transform_round_trip_contains_input() {
        for k in 1..200 {
            let kappa = 0.05 + 0.11 * k as f64;
            if (kappa - 1.0).abs() < 0.06 {
                continue;
            }
            let iv = Interval::new(kappa - 1e-3, kappa + 1e-3);
            let nu = nu_from_kappa(&iv).unwrap();
            let back = kappa_from_nu(&nu).unwrap();
            assert!(back.lo <= iv.lo && iv.hi <= back.hi, "round trip at {kappa}");
        }
    }

    // --- 1D toy problem -u'' + u = kappa (1+c) u on (0,1) -----------------
    //
    // Exact eigenvalues (k^2 pi^2 + 1)/(1+c). P1 elements on a uniform mesh;
    // trial vectors from a float dense eigensolve, fluxes from the same
    // least-squares objective as the 2D fit, all pencil matrices assembled
    // exactly in interval arithmetic.

    fn lin_int(a1: &Interval, b1: &Interval, a2: &Interval, b2: &Interval) -> Interval {
        // int_0^1 (a1 + b1 t)(a2 + b2 t) dt
        a1.mul(a2)
            .add(&a1.mul(b2).add(&a2.mul(b1)).scale(0.5))
            .add(&b1.mul(b2).mul(&Interval::ratio(1, 3)))
    }

    struct Toy1d {
        a0: IvMatrix,
        a1: IvMatrix,
        a2: IvMatrix,
        lam_hi: f64,
    }

    fn toy_1d(nelem: usize, c: f64, ntrial: usize) -> Toy1d {
        let h = 1.0 / nelem as f64;
        let nd = nelem - 1; // interior nodes
        let refine = 4; // fluxes live on a refined mesh, as in the 2D stage
        // float P1 matrices for -u'' + u and (1+c) u
        let mut af = DMatrix::zeros(nd, nd);
        let mut wf = DMatrix::zeros(nd, nd);
        for i in 0..nd {
            af[(i, i)] = 2.0 / h + 2.0 * h / 3.0;
            wf[(i, i)] = (1.0 + c) * 2.0 * h / 3.0;
            if i + 1 < nd {
                af[(i, i + 1)] = -1.0 / h + h / 6.0;
                af[(i + 1, i)] = af[(i, i + 1)];
                wf[(i, i + 1)] = (1.0 + c) * h / 6.0;
                wf[(i + 1, i)] = wf[(i, i + 1)];
            }
        }
        let chol = nalgebra::linalg::Cholesky::new(af.clone()).unwrap();
        let y = chol.l().solve_lower_triangular(&wf).unwrap();
        let s = chol.l().solve_lower_triangular(&y.transpose()).unwrap();
        let eig = nalgebra::SymmetricEigen::new(s);
        let mut idx: Vec<usize> = (0..nd).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        let lt = chol.l().transpose();
        // trial node values (with boundary zeros) and eigenvalue estimates
        let mut trials: Vec<Vec<f64>> = Vec::new();
        let mut lams: Vec<f64> = Vec::new();
        for &t in idx.iter().take(ntrial) {
            let x = lt
                .solve_upper_triangular(&eig.eigenvectors.column(t).clone_owned())
                .unwrap();
            let mut nodes = vec![0.0; nelem + 1];
            for i in 0..nd {
                nodes[i + 1] = x[i];
            }
            trials.push(nodes);
            lams.push(1.0 / eig.eigenvalues[t]);
        }
        // restrict trials to the refined mesh (dyadic interpolation is exact)
        let nf = nelem * refine;
        let hf = h / refine as f64;
        let trials_f: Vec<Vec<f64>> = trials
            .iter()
            .map(|u| {
                (0..=nf)
                    .map(|k| {
                        let e = (k / refine).min(nelem - 1);
                        let t = (k - e * refine) as f64 / refine as f64;
                        u[e] * (1.0 - t) + u[e + 1] * t
                    })
                    .collect()
            })
            .collect();
        // fluxes: P1 on the refined mesh, least squares for
        // |w - (1/L) u'|^2 + |w' - ((1/L) - (1+c)) u|^2
        let mut fluxes: Vec<Vec<f64>> = Vec::new();
        for (u, &lam) in trials_f.iter().zip(&lams) {
            let nn = nf + 1;
            let mut m = DMatrix::zeros(nn, nn);
            let mut rhs = DMatrix::zeros(nn, 1);
            for e in 0..nf {
                let du = (u[e + 1] - u[e]) / hf;
                let g = du / lam;
                let q0 = (1.0 / lam - (1.0 + c)) * u[e];
                let q1 = (1.0 / lam - (1.0 + c)) * u[e + 1];
                // local basis: phi_e = 1 - t, phi_{e+1} = t on [0,1]
                let mm = [[hf / 3.0, hf / 6.0], [hf / 6.0, hf / 3.0]];
                let kk = [[1.0 / hf, -1.0 / hf], [-1.0 / hf, 1.0 / hf]];
                for a in 0..2 {
                    for b in 0..2 {
                        m[(e + a, e + b)] += mm[a][b] + kk[a][b];
                    }
                }
                // int g phi_a + int q phi_a' with q linear
                let dq = [-1.0, 1.0];
                for a in 0..2 {
                    rhs[(e + a, 0)] += g * hf / 2.0 + dq[a] * (q0 + q1) / 2.0;
                }
            }
            let w = m.lu().solve(&rhs).unwrap();
            fluxes.push(w.iter().copied().collect());
        }
        // exact interval assembly on local coordinate t in [0,1]
        let n = trials.len();
        let hi = Interval::ratio(1, nf as i64);
        let hinv = Interval::point(nf as f64);
        let cp1 = Interval::point(1.0 + c);
        let mut a0 = IvMatrix::zeros(n);
        let mut a1 = IvMatrix::zeros(n);
        let mut a2 = IvMatrix::zeros(n);
        for e in 0..nf {
            for i in 0..n {
                for j in i..n {
                    let (ai, bi) = (
                        Interval::point(trials_f[i][e]),
                        Interval::point(trials_f[i][e + 1] - trials_f[i][e]),
                    );
                    let (aj, bj) = (
                        Interval::point(trials_f[j][e]),
                        Interval::point(trials_f[j][e + 1] - trials_f[j][e]),
                    );
                    let mass = lin_int(&ai, &bi, &aj, &bj).mul(&hi);
                    let stiff = bi.mul(&bj).mul(&hinv);
                    let v0 = stiff.add(&mass);
                    let v1 = cp1.mul(&mass);
                    // w and w2 = w' + (1+c) u, both linear in t
                    let (wa_i, wb_i) = (
                        Interval::point(fluxes[i][e]),
                        Interval::point(fluxes[i][e + 1] - fluxes[i][e]),
                    );
                    let (wa_j, wb_j) = (
                        Interval::point(fluxes[j][e]),
                        Interval::point(fluxes[j][e + 1] - fluxes[j][e]),
                    );
                    let w2a_i = wb_i.mul(&hinv).add(&cp1.mul(&ai));
                    let w2b_i = cp1.mul(&bi);
                    let w2a_j = wb_j.mul(&hinv).add(&cp1.mul(&aj));
                    let w2b_j = cp1.mul(&bj);
                    let v2 = lin_int(&wa_i, &wb_i, &wa_j, &wb_j)
                        .add(&lin_int(&w2a_i, &w2b_i, &w2a_j, &w2b_j))
                        .mul(&hi);
                    a0.add_to(i, j, v0);
                    a1.add_to(i, j, v1);
                    a2.add_to(i, j, v2);
                    if i != j {
                        a0.add_to(j, i, v0);
                        a1.add_to(j, i, v1);
                        a2.add_to(j, i, v2);
                    }
                }
            }
        }
        Toy1d {
            a0,
            a1,
            a2,
            lam_hi: f64::NAN,
        }
    }

    #[test]
    fn toy_1d_rr_and_lg_bracket_exact_eigenvalues() {
        let c = 7.0;
        let pi2 = std::f64::consts::PI.powi(2);
        let exact = [(pi2 + 1.0) / 8.0, (4.0 * pi2 + 1.0) / 8.0];
        let rho = 10.5; // below pi^2+1 and below exact kappa_3 = 11.23
        let mut prev_gap = f64::INFINITY;
        for &nelem in &[16usize, 32, 64] {
            let mut toy = toy_1d(nelem, c, 2);
            let upper = rayleigh_ritz(&toy.a0, &toy.a1).unwrap();
            toy.lam_hi = upper[1].hi;
            let lower = lehmann_goerisch(&toy.a0, &toy.a1, &toy.a2, rho, toy.lam_hi).unwrap();
            let mut gap = 0.0f64;
            for k in 0..2 {
                assert!(
                    lower[k] <= exact[k] && exact[k] <= upper[k].hi,
                    "n={nelem} k={k}: [{}, {}] vs {}",
                    lower[k],
                    upper[k].hi,
                    exact[k]
                );
                gap = gap.max(upper[k].hi - lower[k]);
            }
            assert!(gap < prev_gap, "gap {gap} did not shrink at n={nelem}");
            prev_gap = gap;
        }
        assert!(prev_gap < 0.05, "final gap {prev_gap}");
    }

    #[test]
    fn lehmann_goerisch_mu_minus_one_gives_half_rho() {
        // 1x1 pencil engineered so mu = -1: bound must be rho/2
        let rho = 4.0;
        let a0 = IvMatrix::from_fn(1, |_, _| Interval::point(2.0));
        let a1 = IvMatrix::from_fn(1, |_, _| Interval::ONE);
        let a2 = IvMatrix::from_fn(1, |_, _| Interval::point(0.5));
        let lb = lehmann_goerisch(&a0, &a1, &a2, rho, 3.9).unwrap();
        assert!((lb[0] - 2.0).abs() < 1e-12, "{}", lb[0]);
    }

    #[test]
    fn lehmann_goerisch_rejects_invalid_rho_and_nonnegative_mu() {
        let a0 = IvMatrix::from_fn(1, |_, _| Interval::point(2.0));
        let a1 = IvMatrix::from_fn(1, |_, _| Interval::ONE);
        let a2 = IvMatrix::from_fn(1, |_, _| Interval::point(0.5));
        assert!(matches!(
            lehmann_goerisch(&a0, &a1, &a2, 4.0, 4.5),
            Err(SpectralError::RhoInvalid(_))
        ));
        assert!(matches!(
            lehmann_goerisch(&a0, &a1, &a2, 12.0, 3.0),
            Err(SpectralError::RhoInvalid(_))
        ));
        // rho below the Rayleigh quotient 2: A positive, mu > 0
        assert!(matches!(
            lehmann_goerisch(&a0, &a1, &a2, 1.5, 1.0),
            Err(SpectralError::NonNegativeMu)
        ));
    }

    #[test]
    fn nested_trial_spaces_obey_matrix_min_max() {
        // principal submatrices correspond to smaller trial spaces, so the
        // k-th Ritz value can only grow when columns are dropped
        let n = 6;
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut rnd = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let r = DMatrix::from_fn(n, n, |_, _| rnd());
        let q = DMatrix::from_fn(n, n, |_, _| rnd());
        let af = &r * r.transpose() + DMatrix::identity(n, n);
        let bf = &q * q.transpose() + DMatrix::identity(n, n);
        let a0 = IvMatrix::from_fn(n, |i, j| Interval::point(af[(i, j)]));
        let a1 = IvMatrix::from_fn(n, |i, j| Interval::point(bf[(i, j)]));
        let full = verified_sym_gevp(&a0, &a1).unwrap().eigen_bounds;
        for k in [2usize, 4] {
            let a0s = IvMatrix::from_fn(k, |i, j| a0.get(i, j));
            let a1s = IvMatrix::from_fn(k, |i, j| a1.get(i, j));
            let sub = verified_sym_gevp(&a0s, &a1s).unwrap().eigen_bounds;
            for i in 0..k {
                assert!(
                    sub[i].hi >= full[i].lo,
                    "k={k} i={i}: {} < {}",
                    sub[i].hi,
                    full[i].lo
                );
            }
        }
    }

    #[test]
    fn compute_k_matches_hand_computation() {
        let enc = |lower: f64, upper: f64| EigenEnclosure {
            index: 1,
            lower,
            upper,
            symmetry_class: SymmetryClass::Symmetric,
            stage: Stage::FinalLg,
        };
        // only essential floor: K = (pi^2+1)/pi^2
        let k0 = compute_k(&[]).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(k0.contains((pi2 + 1.0) / pi2));
        // one below, one above: K = 1/(1 - 1/1.368)
        let k = compute_k(&[enc(0.25, 0.353), enc(1.368, f64::INFINITY)]).unwrap();
        assert!(k.contains(1.0 / (1.0 - 1.0 / 1.368)));
        assert!(k.hi - k.lo < 1e-10);
        // an enclosure straddling kappa = 1 blocks the inversion
        assert!(matches!(
            compute_k(&[enc(0.9, 1.1)]),
            Err(SpectralError::GapFailure)
        ));
    }

    #[test]
    fn transfer_k_matches_hand_computation() {
        let k = Interval::point(4.0);
        let l4 = Interval::point(3.0);
        let diff = Interval::point(0.01);
        let c4 = Interval::point(0.462);
        let kp = transfer_k(&k, &l4, &l4, &diff, &c4).unwrap();
        // kappa = 3 * 0.462^3 * 4 * 6 * 0.01 = 0.071016...
        let kappa = 3.0 * 0.462f64.powi(3) * 4.0 * 6.0 * 0.01;
        let expect = 4.0 / (1.0 - kappa);
        assert!(kp.contains(expect), "{kp} vs {expect}");
        assert!((kp.hi - kp.lo) < 1e-12);
        // zero distance: K unchanged
        let same = transfer_k(&k, &l4, &l4, &Interval::ZERO, &c4).unwrap();
        assert!(same.contains(4.0));
        // large distance: contraction factor reaches 1
        assert!(matches!(
            transfer_k(&k, &l4, &l4, &Interval::point(1.0), &c4),
            Err(SpectralError::KappaTooLarge(_))
        ));
    }

    #[test]
    fn coefficient_and_norms_match_quadrature_oracle() {
        use crate::geometry::{build_domain, generate_mesh};
        use crate::quad::gauss_rule_f64;
        // small truncated domain, refined regular part
        let spec = build_domain(1.5, false).unwrap();
        let mesh = Arc::new(generate_mesh(&spec, 0.25).unwrap());
        let om = crate::approx::build_omega_refined(
            mesh,
            SymmetryClass::Symmetric,
            8.0,
            1e-10,
            14,
            1,
        )
        .unwrap();
        let coef = build_coefficient(&om, 1e-6).unwrap();
        // float oracle: Gauss quadrature of omega_c powers
        let omega_c = |x: f64, y: f64| {
            om.a * singular::w_f64(x, y) + om.space_coarse.eval(&om.v_coarse, x, y)
        };
        let (pts, wts) = gauss_rule_f64(6);
        let h = om.space_coarse.mesh.h;
        let (mut l4, mut l2) = (0.0f64, 0.0f64);
        for cell in &om.space_coarse.mesh.cells {
            for (i, &xi) in pts.iter().enumerate() {
                for (j, &yj) in pts.iter().enumerate() {
                    let x = cell.cx as f64 * h + 0.5 * h * (1.0 + xi);
                    let y = cell.cy as f64 * h + 0.5 * h * (1.0 + yj);
                    let wq = wts[i] * wts[j] * 0.25 * h * h;
                    let v = omega_c(x, y);
                    l4 += wq * v.powi(4);
                    l2 += wq * v * v;
                }
            }
        }
        let l4_ref = l4.powf(0.25);
        let enc = coef.l4_norm();
        // quadrature misses a little singular mass at the corner, so allow
        // the oracle to sit slightly below the verified enclosure
        assert!(
            enc.lo <= l4_ref * 1.001 && l4_ref <= enc.hi * 1.001,
            "L4 {enc} vs {l4_ref}"
        );
        assert!(enc.hi - enc.lo < 0.2 * enc.lo, "L4 enclosure too wide: {enc}");
        assert!(coef.l2_lower() <= l2.sqrt() * 1.001);
        assert!(coef.l2_lower() > 0.5 * l2.sqrt());
        // base coefficient dominates 3 omega^2 at sample points
        let cbar = base_problem_coefficient(&om, 1.5).unwrap();
        for cell in &om.space_coarse.mesh.cells {
            for (si, sj) in [(0.21, 0.37), (0.83, 0.52), (0.5, 0.5)] {
                let x = (cell.cx as f64 + si) * h;
                let y = (cell.cy as f64 + sj) * h;
                let w = omega_c(x, y);
                assert!(
                    cbar.at(x, y) + 1e-9 >= 3.0 * w.abs() * w,
                    "cbar at ({x}, {y})"
                );
            }
        }
        // exact H1 distance of the regular parts vs quadrature
        let mut g2 = 0.0f64;
        let fm = &om.space.mesh;
        let hf = fm.h;
        for cell in &fm.cells {
            for (i, &xi) in pts.iter().enumerate() {
                for (j, &yj) in pts.iter().enumerate() {
                    let x = cell.cx as f64 * hf + 0.5 * hf * (1.0 + xi);
                    let y = cell.cy as f64 * hf + 0.5 * hf * (1.0 + yj);
                    let wq = wts[i] * wts[j] * 0.25 * hf * hf;
                    let gf = om.space.eval_grad(&om.v, x, y);
                    let gc = om.space_coarse.eval_grad(&om.v_coarse, x, y);
                    let vf = om.space.eval(&om.v, x, y);
                    let vc = om.space_coarse.eval(&om.v_coarse, x, y);
                    g2 += wq
                        * ((gf.0 - gc.0).powi(2)
                            + (gf.1 - gc.1).powi(2)
                            + (vf - vc).powi(2));
                }
            }
        }
        let d = regular_diff_h1(&om);
        let dref = g2.sqrt();
        assert!(d.contains(dref) || (d.lo - dref).abs() < 1e-6, "{d} vs {dref}");
        assert!(d.hi - d.lo < 1e-8);
    }
}
