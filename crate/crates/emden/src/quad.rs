//! Gauss-Legendre quadrature with verified interval nodes and weights.
//!
//! An n-point rule integrates polynomials of degree `2n-1` exactly, so
//! evaluating the rule with interval enclosures of its nodes and weights gives
//! a rigorous enclosure of the exact integral of any polynomial integrand of
//! admissible degree. Node enclosures are produced at first use by running the
//! interval Newton solver on the Legendre recurrence; weights follow from
//! `w = 2 / ((1 - x^2) P_n'(x)^2)` evaluated in interval arithmetic.

use std::collections::HashMap;
use std::sync::Mutex;

use once_cell::sync::Lazy;

use crate::interval::Interval;

pub const MAX_POINTS: usize = 16;

/// Legendre `P_n` and `P_n'` at an interval argument, by the joint recurrence.
fn legendre(n: usize, x: &Interval) -> (Interval, Interval) {
    let mut p_prev = Interval::ONE;
    let mut p_cur = *x;
    let mut d_prev = Interval::ZERO;
    let mut d_cur = Interval::ONE;
    if n == 0 {
        return (p_prev, d_prev);
    }
    for k in 2..=n {
        let kf = k as f64;
        let a = Interval::point(2.0 * kf - 1.0);
        let b = Interval::point(kf - 1.0);
        let p_next = a
            .mul(x)
            .mul(&p_cur)
            .sub(&b.mul(&p_prev))
            .div(&Interval::point(kf))
            .unwrap();
        let d_next = d_prev.add(&a.mul(&p_cur));
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
    }
    (p_cur, d_cur)
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p_cur = x;
    let mut d_prev = 0.0;
    let mut d_cur = 1.0;
    if n == 0 {
        return (p_prev, d_prev);
    }
    for k in 2..=n {
        let kf = k as f64;
        let a = 2.0 * kf - 1.0;
        let p_next = (a * x * p_cur - (kf - 1.0) * p_prev) / kf;
        let d_next = d_prev + a * p_cur;
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
    }
    (p_cur, d_cur)
}

/// Verified bracket around an approximate simple root of `P_n`: widen until
/// the interval evaluations at the endpoints have strictly opposite signs.
fn verify_root(n: usize, x: f64) -> Interval {
    let mut eps = 1e-16 * (1.0 + x.abs());
    for _ in 0..48 {
        let a = x - eps;
        let b = x + eps;
        let fa = legendre(n, &Interval::point(a)).0;
        let fb = legendre(n, &Interval::point(b)).0;
        if (fa.hi < 0.0 && fb.lo > 0.0) || (fa.lo > 0.0 && fb.hi < 0.0) {
            return Interval::new(a, b);
        }
        eps *= 2.0;
    }
    panic!("could not verify Legendre root near {x} for n={n}");
}

#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<Interval>,
    pub weights: Vec<Interval>,
}

fn build_rule(n: usize) -> GaussRule {
    assert!(n >= 1 && n <= MAX_POINTS, "unsupported rule size {n}");
    if n == 1 {
        return GaussRule {
            nodes: vec![Interval::ZERO],
            weights: vec![Interval::point(2.0)],
        };
    }
    // float Newton from the Chebyshev initial guesses, then a widening
    // sign-change bracket around each approximate root; P_n has exactly n
    // simple roots, so n disjoint verified brackets enclose all of them
    let mut nodes: Vec<Interval> = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (4.0 * i as f64 - 1.0) / (4.0 * n as f64 + 2.0)).cos();
        for _ in 0..60 {
            let (p, d) = legendre_f64(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(verify_root(n, x));
    }
    nodes.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    for w in nodes.windows(2) {
        assert!(w[0].hi < w[1].lo, "Legendre root brackets overlap for n={n}");
    }
    let weights = nodes
        .iter()
        .map(|x| {
            let d = legendre(n, x).1;
            let one_minus = Interval::ONE.sub(&x.sqr());
            Interval::point(2.0)
                .div(&one_minus.mul(&d.sqr()))
                .expect("nonzero weight denominator")
        })
        .collect();
    GaussRule { nodes, weights }
}

static RULES: Lazy<Mutex<HashMap<usize, GaussRule>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Shared verified rule with `n` points (cached).
pub fn gauss_rule(n: usize) -> GaussRule {
    let mut map = RULES.lock().unwrap();
    map.entry(n).or_insert_with(|| build_rule(n)).clone()
}

/// Smallest rule size exact for the given polynomial degree.
pub fn points_for_degree(degree: usize) -> usize {
    (degree / 2 + 1).max(1)
}

/// Enclosure of the integral of an elementwise-polynomial function over
/// `[a, b]`, where `f` receives an interval enclosure of the node.
pub fn integrate_1d(f: impl Fn(&Interval) -> Interval, a: f64, b: f64, n: usize) -> Interval {
    let rule = gauss_rule(n);
    let mid = Interval::point(a).add(&Interval::point(b)).scale(0.5);
    let halfw = Interval::point(b).sub(&Interval::point(a)).scale(0.5);
    let mut acc = Interval::ZERO;
    for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let xv = mid.add(&halfw.mul(x));
        acc += w.mul(&f(&xv));
    }
    acc.mul(&halfw)
}

/// Enclosure of the integral over the rectangle `[ax, bx] x [ay, by]` of a
/// polynomial integrand of per-variable degree at most `2n - 1`.
pub fn integrate_2d(
    f: impl Fn(&Interval, &Interval) -> Interval,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    n: usize,
) -> Interval {
    let rule = gauss_rule(n);
    let mid_x = Interval::point(ax).add(&Interval::point(bx)).scale(0.5);
    let half_x = Interval::point(bx).sub(&Interval::point(ax)).scale(0.5);
    let mid_y = Interval::point(ay).add(&Interval::point(by)).scale(0.5);
    let half_y = Interval::point(by).sub(&Interval::point(ay)).scale(0.5);
    let mut acc = Interval::ZERO;
    for (x, wx) in rule.nodes.iter().zip(rule.weights.iter()) {
        let xv = mid_x.add(&half_x.mul(x));
        let mut inner = Interval::ZERO;
        for (y, wy) in rule.nodes.iter().zip(rule.weights.iter()) {
            let yv = mid_y.add(&half_y.mul(y));
            inner += wy.mul(&f(&xv, &yv));
        }
        acc += wx.mul(&inner);
    }
    acc.mul(&half_x).mul(&half_y)
}

/// Plain floating-point tensor rule (midpoints of the verified rule), for
/// approximate computations that need no rigor.
pub fn gauss_rule_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_rule(n);
    (
        rule.nodes.iter().map(|x| x.mid()).collect(),
        rule.weights.iter().map(|w| w.mid()).collect(),
    )
}
