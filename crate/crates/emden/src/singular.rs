//! Corner singular functions and verified integration of expressions that mix
//! polynomials with fractional powers of the corner radius.
//!
//! The reentrant corner at the origin has interior angle `3*pi/2`; the leading
//! singular solution component is `gamma = r^(2/3) sin(2*phi/3)` with the dual
//! singular function `Gamma = r^(-2/3) sin(2*phi/3)` (both harmonic on the
//! sector `0 < phi < 3*pi/2`). The cutoff `lambda = (1-x^2)^2 (1-y^2)^2`
//! localizes them to the unit square; `w = lambda * gamma` is the singular
//! part of the approximate solution.
//!
//! Rigorous integrals are computed through a closed-form engine: every
//! expression of interest is a finite sum of terms `r^(p/3) * T(phi)` with
//! `T` a trigonometric polynomial in frequencies `k/3`. Such sums multiply
//! and integrate in closed form over polar rectangles. A Cartesian cell is
//! handled by covering it with polar bounding boxes of sub-rectangles; for
//! pointwise nonnegative integrands (squares and fourth powers by
//! construction) this yields a rigorous upper bound.

use std::collections::BTreeMap;

use crate::interval::{sector_angle, Interval};

/// Trigonometric polynomial `sum_k a_k cos(k*phi/3) + b_k sin(k*phi/3)`,
/// `k >= 0` integer.
#[derive(Debug, Clone, Default)]
pub struct TrigPoly {
    terms: BTreeMap<i64, [Interval; 2]>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: Interval) -> Self {
        let mut t = TrigPoly::default();
        t.add_term(0, c, Interval::ZERO);
        t
    }

    /// Add `a cos(k*phi/3) + b sin(k*phi/3)`; negative `k` is normalized.
    pub fn add_term(&mut self, k: i64, a: Interval, b: Interval) {
        let (k, a, b) = if k < 0 { (-k, a, b.neg()) } else { (k, a, b) };
        let e = self.terms.entry(k).or_insert([Interval::ZERO; 2]);
        e[0] += a;
        e[1] += b;
        if k == 0 {
            // sin(0) = 0: drop the sine coefficient
            e[1] = Interval::ZERO;
        }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (&k, &[a, b]) in &other.terms {
            out.add_term(k, a, b);
        }
        out
    }

    pub fn scale(&self, c: &Interval) -> TrigPoly {
        let mut out = TrigPoly::default();
        for (&k, &[a, b]) in &self.terms {
            out.add_term(k, a.mul(c), b.mul(c));
        }
        out
    }

    /// Product via the product-to-sum identities.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let half = Interval::point(0.5);
        let mut out = TrigPoly::default();
        for (&k1, &[a1, b1]) in &self.terms {
            for (&k2, &[a2, b2]) in &other.terms {
                let sum = k1 + k2;
                let diff = k1 - k2;
                // cos cos = (cos(d) + cos(s))/2
                let aa = a1.mul(&a2).mul(&half);
                out.add_term(diff, aa, Interval::ZERO);
                out.add_term(sum, aa, Interval::ZERO);
                // sin sin = (cos(d) - cos(s))/2
                let bb = b1.mul(&b2).mul(&half);
                out.add_term(diff, bb, Interval::ZERO);
                out.add_term(sum, bb.neg(), Interval::ZERO);
                // cos sin = (sin(s) - sin(d))/2
                let ab = a1.mul(&b2).mul(&half);
                out.add_term(sum, Interval::ZERO, ab);
                out.add_term(diff, Interval::ZERO, ab.neg());
                // sin cos = (sin(s) + sin(d))/2
                let ba = b1.mul(&a2).mul(&half);
                out.add_term(sum, Interval::ZERO, ba);
                out.add_term(diff, Interval::ZERO, ba);
            }
        }
        out
    }

    /// Exact integral over `[phi1, phi2]` (interval endpoints).
    pub fn integrate(&self, phi1: &Interval, phi2: &Interval) -> Interval {
        let mut acc = Interval::ZERO;
        for (&k, &[a, b]) in &self.terms {
            if k == 0 {
                acc += a.mul(&phi2.sub(phi1));
            } else {
                let f = Interval::ratio(k, 3);
                let inv = Interval::ratio(3, k);
                let s2 = phi2.mul(&f).sin();
                let s1 = phi1.mul(&f).sin();
                let c2 = phi2.mul(&f).cos();
                let c1 = phi1.mul(&f).cos();
                acc += a.mul(&inv).mul(&s2.sub(&s1));
                acc += b.mul(&inv).mul(&c1.sub(&c2));
            }
        }
        acc
    }

    /// Floating-point evaluation (tests and diagnostics).
    pub fn eval_f64(&self, phi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&k, &[a, b])| {
                let t = k as f64 * phi / 3.0;
                a.mid() * t.cos() + b.mid() * t.sin()
            })
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .values()
            .all(|[a, b]| a.lo == 0.0 && a.hi == 0.0 && b.lo == 0.0 && b.hi == 0.0)
    }
}

/// Sum of terms `r^(p/3) * T_p(phi)`, `p` integer (possibly negative).
#[derive(Debug, Clone, Default)]
pub struct PolarExpr {
    terms: BTreeMap<i64, TrigPoly>,
}

impl PolarExpr {
    pub fn zero() -> Self {
        PolarExpr::default()
    }

    pub fn add_term(&mut self, p: i64, trig: TrigPoly) {
        if trig.is_zero() {
            return;
        }
        let e = self.terms.entry(p).or_insert_with(TrigPoly::zero);
        *e = e.add(&trig);
    }

    pub fn add(&self, other: &PolarExpr) -> PolarExpr {
        let mut out = self.clone();
        for (&p, t) in &other.terms {
            out.add_term(p, t.clone());
        }
        out
    }

    pub fn sub(&self, other: &PolarExpr) -> PolarExpr {
        self.add(&other.scale(&Interval::point(-1.0)))
    }

    pub fn scale(&self, c: &Interval) -> PolarExpr {
        let mut out = PolarExpr::default();
        for (&p, t) in &self.terms {
            out.add_term(p, t.scale(c));
        }
        out
    }

    pub fn mul(&self, other: &PolarExpr) -> PolarExpr {
        let mut out = PolarExpr::default();
        for (&p1, t1) in &self.terms {
            for (&p2, t2) in &other.terms {
                out.add_term(p1 + p2, t1.mul(t2));
            }
        }
        out
    }

    pub fn square(&self) -> PolarExpr {
        self.mul(self)
    }

    /// `x^a y^b` as a polar term: `r^(a+b) cos^a(phi) sin^b(phi)`.
    pub fn monomial(ax: u32, ay: u32, c: Interval) -> PolarExpr {
        let mut trig = TrigPoly::constant(Interval::ONE);
        let cos1 = {
            let mut t = TrigPoly::zero();
            t.add_term(3, Interval::ONE, Interval::ZERO);
            t
        };
        let sin1 = {
            let mut t = TrigPoly::zero();
            t.add_term(3, Interval::ZERO, Interval::ONE);
            t
        };
        for _ in 0..ax {
            trig = trig.mul(&cos1);
        }
        for _ in 0..ay {
            trig = trig.mul(&sin1);
        }
        let mut out = PolarExpr::default();
        out.add_term(3 * (ax + ay) as i64, trig.scale(&c));
        out
    }

    /// Polynomial `sum c x^a y^b` in polar form.
    pub fn from_poly(monomials: &[(u32, u32, Interval)]) -> PolarExpr {
        let mut out = PolarExpr::default();
        for &(ax, ay, c) in monomials {
            out = out.add(&PolarExpr::monomial(ax, ay, c));
        }
        out
    }

    /// `gamma = r^(2/3) sin(2 phi / 3)`.
    pub fn gamma() -> PolarExpr {
        let mut t = TrigPoly::zero();
        t.add_term(2, Interval::ZERO, Interval::ONE);
        let mut out = PolarExpr::default();
        out.add_term(2, t);
        out
    }

    /// `d gamma / dx = -(2/3) r^(-1/3) sin(phi/3)`.
    pub fn dgamma_dx() -> PolarExpr {
        let mut t = TrigPoly::zero();
        t.add_term(1, Interval::ZERO, Interval::ratio(-2, 3));
        let mut out = PolarExpr::default();
        out.add_term(-1, t);
        out
    }

    /// `d gamma / dy = (2/3) r^(-1/3) cos(phi/3)`.
    pub fn dgamma_dy() -> PolarExpr {
        let mut t = TrigPoly::zero();
        t.add_term(1, Interval::ratio(2, 3), Interval::ZERO);
        let mut out = PolarExpr::default();
        out.add_term(-1, t);
        out
    }

    /// `x * d gamma / dx`.
    pub fn x_dgamma_dx() -> PolarExpr {
        PolarExpr::monomial(1, 0, Interval::ONE).mul(&PolarExpr::dgamma_dx())
    }

    /// `y * d gamma / dy`.
    pub fn y_dgamma_dy() -> PolarExpr {
        PolarExpr::monomial(0, 1, Interval::ONE).mul(&PolarExpr::dgamma_dy())
    }

    /// Exact integral over the polar rectangle `[r1,r2] x [phi1,phi2]`
    /// (area element `r dr dphi` included). Requires every exponent
    /// `p/3 > -2`.
    pub fn integrate_polar_rect(
        &self,
        r1: &Interval,
        r2: &Interval,
        phi1: &Interval,
        phi2: &Interval,
    ) -> Interval {
        let mut acc = Interval::ZERO;
        for (&p, trig) in &self.terms {
            assert!(p > -6, "non-integrable radial exponent {p}/3");
            // int r^(p/3) * r dr = 3/(p+6) * r^((p+6)/3)
            let e = p + 6;
            let radial = rpow3(r2, e)
                .sub(&rpow3(r1, e))
                .mul(&Interval::ratio(3, e));
            acc += radial.mul(&trig.integrate(phi1, phi2));
        }
        acc
    }

    /// Floating-point evaluation at `(r, phi)` (tests and diagnostics).
    pub fn eval_f64(&self, r: f64, phi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&p, t)| r.powf(p as f64 / 3.0) * t.eval_f64(phi))
            .sum()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

/// `r^(e/3)` for `r >= 0`, `e >= 0`.
fn rpow3(r: &Interval, e: i64) -> Interval {
    assert!(e >= 0);
    let r = Interval::new(r.lo.max(0.0), r.hi.max(0.0));
    r.cbrt().pow_i(e as i32).expect("nonnegative exponent")
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// Polar bounding box of a rectangle: radius range from the point-to-set
/// distance, angle range from the corner angles (the angle has no interior
/// extremum on a rectangle not containing the origin in its interior).
fn polar_bbox(r: &Rect) -> (Interval, Interval, Interval, Interval) {
    let dx = if r.x0 > 0.0 {
        Interval::point(r.x0)
    } else if r.x1 < 0.0 {
        Interval::point(-r.x1)
    } else {
        Interval::ZERO
    };
    let dy = if r.y0 > 0.0 {
        Interval::point(r.y0)
    } else if r.y1 < 0.0 {
        Interval::point(-r.y1)
    } else {
        Interval::ZERO
    };
    let rmin = dx.sqr().add(&dy.sqr()).sqrt_nonneg().unwrap();
    let mx = Interval::point(r.x0.abs().max(r.x1.abs()));
    let my = Interval::point(r.y0.abs().max(r.y1.abs()));
    let rmax = mx.sqr().add(&my.sqr()).sqrt_nonneg().unwrap();
    let mut phi_lo = Interval::point(f64::INFINITY);
    let mut phi_hi = Interval::point(f64::NEG_INFINITY);
    for (x, y) in [(r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1)] {
        if x == 0.0 && y == 0.0 {
            continue;
        }
        let a = sector_angle(x, y)
            .expect("corner angle defined away from the origin");
        if a.lo < phi_lo.lo {
            phi_lo = a;
        }
        if a.hi > phi_hi.hi {
            phi_hi = a;
        }
    }
    (rmin, rmax, phi_lo, phi_hi)
}

/// Upper bound for the integral of a pointwise nonnegative polar expression
/// over a rectangle, by covering `s x s` sub-rectangles with polar bounding
/// boxes. The rectangle must lie in the closed sector `0 <= phi <= 3*pi/2`.
pub fn cover_bound(expr: &PolarExpr, rect: &Rect, s: usize) -> Interval {
    assert!(s >= 1);
    let mut hi = 0.0f64;
    for i in 0..s {
        for j in 0..s {
            let fx = |k: usize| rect.x0 + (rect.x1 - rect.x0) * k as f64 / s as f64;
            let fy = |k: usize| rect.y0 + (rect.y1 - rect.y0) * k as f64 / s as f64;
            let sub = Rect {
                x0: fx(i),
                x1: fx(i + 1),
                y0: fy(j),
                y1: fy(j + 1),
            };
            let (r1, r2, p1, p2) = polar_bbox(&sub);
            let v = expr.integrate_polar_rect(&r1, &r2, &p1, &p2);
            hi = crate::interval::add_up(hi, v.hi.max(0.0));
        }
    }
    Interval::new(0.0, hi)
}

// --- cutoff polynomial and its derived coefficient polynomials ---

fn poly_1d_sq() -> [f64; 5] {
    // (1 - x^2)^2 = 1 - 2x^2 + x^4
    [1.0, 0.0, -2.0, 0.0, 1.0]
}

/// `lambda = (1-x^2)^2 (1-y^2)^2` as monomials (valid on the closed unit
/// square; zero outside by definition).
pub fn lambda_monomials() -> Vec<(u32, u32, Interval)> {
    let a = poly_1d_sq();
    let mut out = Vec::new();
    for (i, &ci) in a.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        for (j, &cj) in a.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            out.push((i as u32, j as u32, Interval::point(ci * cj)));
        }
    }
    out
}

/// `q1 = 2 lambda_x / x = -8 (1-x^2)(1-y^2)^2`.
pub fn q1_monomials() -> Vec<(u32, u32, Interval)> {
    let a = [-8.0, 0.0, 8.0]; // -8(1-x^2)
    let b = poly_1d_sq();
    let mut out = Vec::new();
    for (i, &ci) in a.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        for (j, &cj) in b.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            out.push((i as u32, j as u32, Interval::point(ci * cj)));
        }
    }
    out
}

/// `q2 = 2 lambda_y / y = -8 (1-x^2)^2 (1-y^2)`.
pub fn q2_monomials() -> Vec<(u32, u32, Interval)> {
    q1_monomials()
        .into_iter()
        .map(|(i, j, c)| (j, i, c))
        .collect()
}

/// `q3 = Laplace(lambda)`.
pub fn q3_monomials() -> Vec<(u32, u32, Interval)> {
    // (d2/dx2)(1-x^2)^2 = 12x^2 - 4
    let a2 = [-4.0, 0.0, 12.0];
    let b = poly_1d_sq();
    let mut out = Vec::new();
    for (i, &ci) in a2.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        for (j, &cj) in b.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            // lambda_xx term
            out.push((i as u32, j as u32, Interval::point(ci * cj)));
            // lambda_yy term by symmetry
            out.push((j as u32, i as u32, Interval::point(ci * cj)));
        }
    }
    out
}

// --- pointwise evaluation (float, for interpolation and diagnostics) ---

/// Corner polar coordinates of a point in the closed domain sector.
pub fn polar_f64(x: f64, y: f64) -> (f64, f64) {
    let r = x.hypot(y);
    let mut phi = y.atan2(x);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    (r, phi)
}

/// `gamma(x, y)` (float).
pub fn gamma_f64(x: f64, y: f64) -> f64 {
    let (r, phi) = polar_f64(x, y);
    r.powf(2.0 / 3.0) * (2.0 * phi / 3.0).sin()
}

/// `(x gamma_x, y gamma_y)` (float).
pub fn xy_dgamma_f64(x: f64, y: f64) -> (f64, f64) {
    let (r, phi) = polar_f64(x, y);
    let c = 2.0 / 3.0 * r.powf(2.0 / 3.0);
    (
        -c * phi.cos() * (phi / 3.0).sin(),
        c * phi.sin() * (phi / 3.0).cos(),
    )
}

/// `grad gamma` (float; unbounded at the origin).
pub fn dgamma_f64(x: f64, y: f64) -> (f64, f64) {
    let (r, phi) = polar_f64(x, y);
    let c = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
    (-c * (phi / 3.0).sin(), c * (phi / 3.0).cos())
}

/// Cutoff `lambda` and gradient (float); zero outside the open unit square.
pub fn lambda_f64(x: f64, y: f64) -> f64 {
    if x.abs() >= 1.0 || y.abs() >= 1.0 {
        return 0.0;
    }
    let a = 1.0 - x * x;
    let b = 1.0 - y * y;
    a * a * b * b
}

pub fn dlambda_f64(x: f64, y: f64) -> (f64, f64) {
    if x.abs() >= 1.0 || y.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let a = 1.0 - x * x;
    let b = 1.0 - y * y;
    (-4.0 * x * a * b * b, -4.0 * y * b * a * a)
}

/// `w = lambda * gamma` (float).
pub fn w_f64(x: f64, y: f64) -> f64 {
    lambda_f64(x, y) * gamma_f64(x, y)
}

/// `grad w` (float).
pub fn dw_f64(x: f64, y: f64) -> (f64, f64) {
    if x == 0.0 && y == 0.0 {
        return (0.0, 0.0);
    }
    let l = lambda_f64(x, y);
    let (lx, ly) = dlambda_f64(x, y);
    let g = gamma_f64(x, y);
    let (gx, gy) = dgamma_f64(x, y);
    (lx * g + l * gx, ly * g + l * gy)
}

/// `Laplace w = q1 x gamma_x + q2 y gamma_y + q3 gamma` (float; continuous,
/// vanishing at the corner).
pub fn laplace_w_f64(x: f64, y: f64) -> f64 {
    if x.abs() >= 1.0 || y.abs() >= 1.0 {
        return 0.0;
    }
    let a = 1.0 - x * x;
    let b = 1.0 - y * y;
    let q1 = -8.0 * a * b * b;
    let q2 = -8.0 * a * a * b;
    let q3 = (12.0 * x * x - 4.0) * b * b + (12.0 * y * y - 4.0) * a * a;
    let (xgx, ygy) = xy_dgamma_f64(x, y);
    q1 * xgx + q2 * ygy + q3 * gamma_f64(x, y)
}

/// Dual singular function `Gamma = r^(-2/3) sin(2 phi/3)` (float).
pub fn cap_gamma_f64(x: f64, y: f64) -> f64 {
    let (r, phi) = polar_f64(x, y);
    r.powf(-2.0 / 3.0) * (2.0 * phi / 3.0).sin()
}

/// `grad Gamma` (float).
pub fn dcap_gamma_f64(x: f64, y: f64) -> (f64, f64) {
    let (r, phi) = polar_f64(x, y);
    let c = 2.0 / 3.0 * r.powf(-5.0 / 3.0);
    (-c * (5.0 * phi / 3.0).sin(), c * (5.0 * phi / 3.0).cos())
}

/// Interval enclosure of `gamma` over a rectangle in the closed sector.
pub fn gamma_box(rect: &Rect) -> Interval {
    let (r1, r2, p1, p2) = polar_bbox(rect);
    let r23 = Interval::new(r1.lo, r2.hi);
    let radial = rpow3(&r23, 2);
    let phi = Interval::new(p1.lo, p2.hi);
    let s = phi.scale(2.0 / 3.0).sin();
    // gamma >= 0 on the sector; the product needs both orders of endpoints
    radial.mul(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(pairs: &[(i64, f64, f64)]) -> TrigPoly {
        let mut t = TrigPoly::zero();
        for &(k, a, b) in pairs {
            t.add_term(k, Interval::point(a), Interval::point(b));
        }
        t
    }

    #[test]
    fn trig_mul_matches_pointwise() {
        let t1 = tp(&[(0, 0.5, 0.0), (2, 1.0, -0.3), (3, 0.0, 2.0)]);
        let t2 = tp(&[(1, -1.0, 0.7), (4, 0.2, 0.2)]);
        let prod = t1.mul(&t2);
        for i in 0..20 {
            let phi = 0.1 + 4.5 * i as f64 / 20.0;
            let expect = t1.eval_f64(phi) * t2.eval_f64(phi);
            let got = prod.eval_f64(phi);
            assert!((expect - got).abs() < 1e-12, "phi={phi}: {expect} vs {got}");
        }
    }

    #[test]
    fn trig_integrate_matches_riemann() {
        let t = tp(&[(0, 0.3, 0.0), (1, 1.0, 0.5), (5, -0.2, 0.9)]);
        let (a, b) = (0.3, 3.9);
        let exact = t.integrate(&Interval::point(a), &Interval::point(b));
        let n = 400_000;
        let mut s = 0.0;
        for i in 0..n {
            let phi = a + (b - a) * (i as f64 + 0.5) / n as f64;
            s += t.eval_f64(phi);
        }
        s *= (b - a) / n as f64;
        assert!((exact.mid() - s).abs() < 1e-8, "{} vs {s}", exact.mid());
        assert!(exact.width() < 1e-12);
    }

    #[test]
    fn monomial_matches_cartesian() {
        let e = PolarExpr::monomial(3, 2, Interval::point(1.5));
        for &(x, y) in &[(0.4, 0.7), (-0.6, 0.2), (-0.3, -0.8)] {
            let (r, phi) = polar_f64(x, y);
            let expect = 1.5 * x.powi(3) * y.powi(2);
            let got = e.eval_f64(r, phi);
            assert!((expect - got).abs() < 1e-12, "({x},{y}): {expect} vs {got}");
        }
    }

    #[test]
    fn polar_rect_integral_matches_riemann() {
        // integrand: (gamma - polynomial)^2, a generic mixed expression
        let poly = PolarExpr::from_poly(&[
            (0, 0, Interval::point(0.1)),
            (1, 0, Interval::point(-0.4)),
            (1, 1, Interval::point(0.8)),
        ]);
        let e = PolarExpr::gamma().sub(&poly).square();
        let (r1, r2, p1, p2) = (0.2, 0.9, 0.4, 2.0);
        let exact = e.integrate_polar_rect(
            &Interval::point(r1),
            &Interval::point(r2),
            &Interval::point(p1),
            &Interval::point(p2),
        );
        let n = 600;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r = r1 + (r2 - r1) * (i as f64 + 0.5) / n as f64;
                let phi = p1 + (p2 - p1) * (j as f64 + 0.5) / n as f64;
                s += e.eval_f64(r, phi) * r;
            }
        }
        s *= (r2 - r1) * (p2 - p1) / (n * n) as f64;
        assert!(
            (exact.mid() - s).abs() < 1e-4 * s.abs().max(1.0),
            "{} vs {s}",
            exact.mid()
        );
    }

    #[test]
    fn gamma_gradient_formulas() {
        // finite-difference check of the closed forms away from the corner
        let eps = 1e-6;
        for &(x, y) in &[(0.5, 0.3), (-0.4, 0.6), (-0.3, -0.5), (0.7, 0.01)] {
            let (gx, gy) = dgamma_f64(x, y);
            let fdx = (gamma_f64(x + eps, y) - gamma_f64(x - eps, y)) / (2.0 * eps);
            let fdy = (gamma_f64(x, y + eps) - gamma_f64(x, y - eps)) / (2.0 * eps);
            assert!((gx - fdx).abs() < 1e-7, "({x},{y})");
            assert!((gy - fdy).abs() < 1e-7, "({x},{y})");
            let (xgx, ygy) = xy_dgamma_f64(x, y);
            assert!((xgx - x * gx).abs() < 1e-12);
            assert!((ygy - y * gy).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_is_harmonic() {
        // 5-point Laplacian of gamma is ~0 away from the corner
        let h = 1e-4;
        for &(x, y) in &[(0.5, 0.3), (-0.6, 0.4), (-0.2, -0.7)] {
            let lap = (gamma_f64(x + h, y)
                + gamma_f64(x - h, y)
                + gamma_f64(x, y + h)
                + gamma_f64(x, y - h)
                - 4.0 * gamma_f64(x, y))
                / (h * h);
            assert!(lap.abs() < 1e-4, "({x},{y}): {lap}");
        }
    }

    #[test]
    fn laplace_w_matches_finite_differences() {
        let h = 1e-4;
        for &(x, y) in &[(0.5, 0.3), (-0.6, 0.4), (-0.2, -0.7), (0.1, 0.1)] {
            let lap = (w_f64(x + h, y) + w_f64(x - h, y) + w_f64(x, y + h) + w_f64(x, y - h)
                - 4.0 * w_f64(x, y))
                / (h * h);
            let exact = laplace_w_f64(x, y);
            assert!(
                (lap - exact).abs() < 1e-3 * (1.0 + exact.abs()),
                "({x},{y}): {lap} vs {exact}"
            );
        }
    }

    #[test]
    fn laplace_w_polar_form_matches() {
        // the polar-engine form of Delta w agrees with the float evaluation
        let dw = PolarExpr::from_poly(&q1_monomials())
            .mul(&PolarExpr::x_dgamma_dx())
            .add(&PolarExpr::from_poly(&q2_monomials()).mul(&PolarExpr::y_dgamma_dy()))
            .add(&PolarExpr::from_poly(&q3_monomials()).mul(&PolarExpr::gamma()));
        for &(x, y) in &[(0.5, 0.3), (-0.6, 0.4), (-0.2, -0.7)] {
            let (r, phi) = polar_f64(x, y);
            let got = dw.eval_f64(r, phi);
            let expect = laplace_w_f64(x, y);
            assert!(
                (got - expect).abs() < 1e-10 * (1.0 + expect.abs()),
                "({x},{y}): {got} vs {expect}"
            );
        }
    }

    #[test]
    fn cover_bound_dominates_sampled_integral() {
        // integral of gamma^2 over a cell near the corner: the covering
        // bound must dominate a dense Riemann sum, and not by much
        let rect = Rect {
            x0: 0.0,
            x1: 0.125,
            y0: 0.0,
            y1: 0.125,
        };
        let e = PolarExpr::gamma().square();
        let bound = cover_bound(&e, &rect, 4);
        let n = 500;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = rect.x0 + (rect.x1 - rect.x0) * (i as f64 + 0.5) / n as f64;
                let y = rect.y0 + (rect.y1 - rect.y0) * (j as f64 + 0.5) / n as f64;
                s += gamma_f64(x, y).powi(2);
            }
        }
        s *= (rect.x1 - rect.x0) * (rect.y1 - rect.y0) / (n * n) as f64;
        assert!(bound.hi >= s, "bound {} < sample {s}", bound.hi);
        assert!(bound.hi <= 3.0 * s, "bound {} too loose vs {s}", bound.hi);
    }

    #[test]
    fn cover_bound_away_from_corner_is_tight() {
        let rect = Rect {
            x0: -0.75,
            x1: -0.625,
            y0: 0.25,
            y1: 0.375,
        };
        let e = PolarExpr::gamma().square();
        let bound = cover_bound(&e, &rect, 4);
        let n = 300;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = rect.x0 + (rect.x1 - rect.x0) * (i as f64 + 0.5) / n as f64;
                let y = rect.y0 + (rect.y1 - rect.y0) * (j as f64 + 0.5) / n as f64;
                s += gamma_f64(x, y).powi(2);
            }
        }
        s *= (rect.x1 - rect.x0) * (rect.y1 - rect.y0) / (n * n) as f64;
        assert!(bound.hi >= s);
        // polar boxes overshoot a Cartesian rectangle by up to a factor of
        // (|cos| + |sin|)^2 <= 2 independent of the subdivision depth
        assert!(bound.hi <= 2.2 * s, "bound {} vs {s}", bound.hi);
    }

    #[test]
    fn gamma_box_encloses_samples() {
        let rect = Rect {
            x0: -0.4,
            x1: -0.2,
            y0: -0.3,
            y1: -0.1,
        };
        let b = gamma_box(&rect);
        for i in 0..10 {
            for j in 0..10 {
                let x = rect.x0 + (rect.x1 - rect.x0) * i as f64 / 9.0;
                let y = rect.y0 + (rect.y1 - rect.y0) * j as f64 / 9.0;
                let g = gamma_f64(x, y);
                assert!(b.lo - 1e-12 <= g && g <= b.hi + 1e-12, "({x},{y}): {g} not in {b}");
            }
        }
    }

    #[test]
    fn dual_gamma_is_harmonic() {
        let h = 1e-4;
        for &(x, y) in &[(0.5, 0.3), (-0.6, 0.4)] {
            let lap = (cap_gamma_f64(x + h, y)
                + cap_gamma_f64(x - h, y)
                + cap_gamma_f64(x, y + h)
                + cap_gamma_f64(x, y - h)
                - 4.0 * cap_gamma_f64(x, y))
                / (h * h);
            assert!(lap.abs() < 1e-3, "({x},{y}): {lap}");
        }
        // gradient check
        let eps = 1e-6;
        for &(x, y) in &[(0.5, 0.3), (-0.4, -0.6)] {
            let (gx, gy) = dcap_gamma_f64(x, y);
            let fdx = (cap_gamma_f64(x + eps, y) - cap_gamma_f64(x - eps, y)) / (2.0 * eps);
            let fdy = (cap_gamma_f64(x, y + eps) - cap_gamma_f64(x, y - eps)) / (2.0 * eps);
            assert!((gx - fdx).abs() < 1e-6);
            assert!((gy - fdy).abs() < 1e-6);
        }
    }
}
