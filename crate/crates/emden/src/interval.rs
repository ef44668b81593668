//! Directed-rounding interval arithmetic on `f64`.
//!
//! Rounding is realized without touching the FPU rounding mode: every
//! elementary operation computes the rounded-to-nearest result together with
//! its exact residual (two-sum for additions, an FMA residual for products,
//! quotients and square roots) and widens to the neighbouring float only when
//! the residual shows the rounded result lies on the wrong side. Results are
//! therefore the tightest representable enclosures for `+ - * / sqrt`.
//!
//! Transcendental functions (`sin`, `cos`, `exp`) are enclosed via argument
//! reduction with an interval `pi` plus a Taylor series with an explicit
//! remainder term, evaluated in interval arithmetic. `cbrt` is enclosed by a
//! verified widening loop around the libm value.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("empty interval operand")]
    EmptyOperand,
}

pub type Result<T> = std::result::Result<T, IntervalError>;

/// Closed real interval `[lo, hi]` with `lo <= hi`, or the empty set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

// ---- directed-rounding primitives ----

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn sat_down(z: f64) -> f64 {
    if z == f64::INFINITY {
        f64::MAX
    } else {
        z.next_down()
    }
}

#[inline]
fn sat_up(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        f64::MIN
    } else {
        z.next_up()
    }
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e >= 0.0 {
        s
    } else {
        sat_down(s)
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e <= 0.0 {
        s
    } else {
        sat_up(s)
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() { 0.0_f64.min(p) } else { sat_down(p.min(f64::INFINITY)) };
    }
    let e = a.mul_add(b, -p);
    if e >= 0.0 {
        p
    } else {
        sat_down(p)
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() { 0.0_f64.max(p) } else { sat_up(p.max(f64::NEG_INFINITY)) };
    }
    let e = a.mul_add(b, -p);
    if e <= 0.0 {
        p
    } else {
        sat_up(p)
    }
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return sat_down(q.min(f64::INFINITY));
    }
    // r = q*b - a, exact; a/b = q - r/b
    let r = q.mul_add(b, -a);
    if r == 0.0 || (r > 0.0) != (b > 0.0) {
        q
    } else {
        sat_down(q)
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return sat_up(q.max(f64::NEG_INFINITY));
    }
    let r = q.mul_add(b, -a);
    if r == 0.0 || (r > 0.0) == (b > 0.0) {
        q
    } else {
        sat_up(q)
    }
}

#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    let s = a.sqrt();
    let r = s.mul_add(s, -a);
    if r <= 0.0 {
        s
    } else {
        sat_down(s)
    }
}

#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    let s = a.sqrt();
    let r = s.mul_add(s, -a);
    if r >= 0.0 {
        s
    } else {
        sat_up(s)
    }
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        assert!(!lo.is_nan() && !hi.is_nan());
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Interval {
        assert!(!x.is_nan());
        Interval { lo: x, hi: x }
    }

    /// Smallest interval containing the true value of the decimal ratio `p/q`.
    pub fn ratio(p: i64, q: i64) -> Interval {
        assert!(q != 0);
        let a = p as f64;
        let b = q as f64;
        Interval::new(div_down(a, b), div_up(a, b))
    }

    /// Enclosure of pi.
    pub fn pi() -> Interval {
        Interval::new(std::f64::consts::PI.next_down(), std::f64::consts::PI.next_up())
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            sub_up(self.hi, self.lo)
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Largest absolute value of any point in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value of any point in the interval.
    pub fn mig(&self) -> f64 {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        !self.is_empty() && !other.is_empty() && self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            Interval::EMPTY
        } else {
            Interval { lo, hi }
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn neg(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(-self.hi, -self.lo)
    }

    pub fn abs(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval::new(0.0, self.mag())
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        if self.is_empty() || o.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        if self.is_empty() || o.is_empty() {
            return Interval::EMPTY;
        }
        let cands_lo = [
            mul_down(self.lo, o.lo),
            mul_down(self.lo, o.hi),
            mul_down(self.hi, o.lo),
            mul_down(self.hi, o.hi),
        ];
        let cands_hi = [
            mul_up(self.lo, o.lo),
            mul_up(self.lo, o.hi),
            mul_up(self.hi, o.lo),
            mul_up(self.hi, o.hi),
        ];
        Interval::new(
            cands_lo.iter().cloned().fold(f64::INFINITY, f64::min),
            cands_hi.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn div(&self, o: &Interval) -> Result<Interval> {
        if self.is_empty() || o.is_empty() {
            return Err(IntervalError::EmptyOperand);
        }
        if o.contains(0.0) {
            return Err(IntervalError::DomainViolation(format!(
                "division by interval containing zero: [{}, {}]",
                o.lo, o.hi
            )));
        }
        let cands_lo = [
            div_down(self.lo, o.lo),
            div_down(self.lo, o.hi),
            div_down(self.hi, o.lo),
            div_down(self.hi, o.hi),
        ];
        let cands_hi = [
            div_up(self.lo, o.lo),
            div_up(self.lo, o.hi),
            div_up(self.hi, o.lo),
            div_up(self.hi, o.hi),
        ];
        Ok(Interval::new(
            cands_lo.iter().cloned().fold(f64::INFINITY, f64::min),
            cands_hi.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ))
    }

    pub fn recip(&self) -> Result<Interval> {
        Interval::ONE.div(self)
    }

    /// Exact-range square (tighter than `self.mul(self)` for sign-changing intervals).
    pub fn sqr(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        let a = self.lo;
        let b = self.hi;
        if a >= 0.0 {
            Interval::new(mul_down(a, a), mul_up(b, b))
        } else if b <= 0.0 {
            Interval::new(mul_down(b, b), mul_up(a, a))
        } else {
            let m = self.mag();
            Interval::new(0.0, mul_up(m, m))
        }
    }

    /// Integer power with exact range handling for even exponents.
    pub fn pow_i(&self, n: i32) -> Result<Interval> {
        if self.is_empty() {
            return Err(IntervalError::EmptyOperand);
        }
        if n < 0 {
            return self.pow_i(-n)?.recip();
        }
        let mut result = Interval::ONE;
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        // even powers of a sign-changing interval still have exact lower bound 0
        if n % 2 == 0 && self.contains(0.0) {
            result.lo = result.lo.max(0.0);
        }
        Ok(result)
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.is_empty() {
            return Err(IntervalError::EmptyOperand);
        }
        if self.lo < 0.0 {
            return Err(IntervalError::DomainViolation(format!(
                "sqrt of interval with negative part: [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(Interval::new(sqrt_down(self.lo), sqrt_up(self.hi)))
    }

    /// Like `sqrt`, but truncates a slightly negative lower endpoint to zero.
    /// Sound when the enclosed quantity is known to be nonnegative.
    pub fn sqrt_nonneg(&self) -> Result<Interval> {
        Interval::new(self.lo.max(0.0), self.hi.max(0.0)).sqrt()
    }

    pub fn cbrt(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(cbrt_down(self.lo), cbrt_up(self.hi))
    }

    pub fn exp(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(exp_point(self.lo).lo, exp_point(self.hi).hi)
    }

    pub fn sin(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        sin_interval(self)
    }

    pub fn cos(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        // cos(x) = sin(x + pi/2), shift done in interval arithmetic
        let half_pi = Interval::pi().mul(&Interval::point(0.5));
        sin_interval(&self.add(&half_pi))
    }

    /// Scale by a scalar.
    pub fn scale(&self, s: f64) -> Interval {
        self.mul(&Interval::point(s))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            write!(f, "[empty]")
        } else {
            write!(f, "[{:.17e},{:.17e}]", self.lo, self.hi)
        }
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::add(&self, &o)
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::sub(&self, &o)
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        Interval::mul(&self, &o)
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::neg(&self)
    }
}

impl std::ops::AddAssign for Interval {
    fn add_assign(&mut self, o: Interval) {
        *self = Interval::add(self, &o);
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Interval {
        Interval::point(x)
    }
}

// ---- cbrt with verified widening ----

fn cbrt_down(x: f64) -> f64 {
    let mut y = x.cbrt().next_down();
    // verify y^3 <= x using upward-rounded cube
    for _ in 0..10 {
        let c = mul_up(mul_up(y, y), y);
        let ok = if y >= 0.0 { c <= x } else { mul_down(mul_down(y, y), y) <= x };
        if ok {
            return y;
        }
        y = y.next_down();
    }
    // libm cbrt off by more than 10 ulps would be a platform bug
    unreachable!("cbrt_down failed to verify");
}

fn cbrt_up(x: f64) -> f64 {
    let mut y = x.cbrt().next_up();
    for _ in 0..10 {
        let c = mul_down(mul_down(y, y), y);
        let ok = if y >= 0.0 { c >= x } else { mul_up(mul_up(y, y), y) >= x };
        if ok {
            return y;
        }
        y = y.next_up();
    }
    unreachable!("cbrt_up failed to verify");
}

// ---- double-double argument reduction ----

/// Enclosure of `x - n*c` where the constant `c = c_hi + c_lo + [-c_err, c_err]`
/// is given in double-double form. Uses exact FMA/two-sum residuals so the
/// result width stays at the ulp scale of the reduced argument.
fn reduce_by_multiple(x: f64, n: f64, c_hi: f64, c_lo: f64, c_err: f64) -> Interval {
    let p = n * c_hi;
    let e1 = n.mul_add(c_hi, -p); // exact residual of the product
    let (d, e0) = two_sum(x, -p);
    let tail = Interval::point(c_lo).add(&Interval::new(-c_err, c_err));
    Interval::point(d)
        .add(&Interval::point(e0))
        .sub(&Interval::point(e1))
        .sub(&tail.scale(n))
}

// pi/2 = PI_2_HI + PI_2_LO + O(1e-33)
const PI_2_HI: f64 = std::f64::consts::FRAC_PI_2;
const PI_2_LO: f64 = 6.123233995736766e-17;
const PI_2_ERR: f64 = 1.0e-32;

// ln2 = LN2_HI + LN2_LO + O(1e-33)
const LN2_HI: f64 = std::f64::consts::LN_2;
const LN2_LO: f64 = 2.3190468138462996e-17;
const LN2_ERR: f64 = 1.0e-32;

// ---- exp via reduction x = n ln2 + y, |y| <= ln2/2 ----

fn exp_point(x: f64) -> Interval {
    if x > 709.0 {
        return Interval::new(exp_point(709.0).lo, f64::INFINITY);
    }
    if x < -745.0 {
        return Interval::new(0.0, exp_point(-745.0).hi);
    }
    let n = (x / std::f64::consts::LN_2).round();
    let y = reduce_by_multiple(x, n, LN2_HI, LN2_LO, LN2_ERR);
    // Taylor with remainder: |y| <= 0.35, 18 terms give remainder below 1 ulp
    let mut sum = Interval::ONE;
    let mut term = Interval::ONE;
    for k in 1..=18u32 {
        term = term.mul(&y).div(&Interval::point(k as f64)).unwrap();
        sum = sum.add(&term);
    }
    // remainder bound: |y|^19/19! * e^{|y|} <= |y|^19/19! * 1.5
    let m = y.mag();
    let r = m.powi(19) / 1.216_451_004_088_320_0e17 * 1.5;
    let rem = Interval::new(-r.next_up(), r.next_up());
    sum = sum.add(&rem);
    // scale by 2^n (exact)
    let p = 2.0_f64.powi(n as i32);
    sum.scale(p)
}

// ---- sin via reduction mod pi/2 ----

/// Enclosure of sin on |y| <= 0.79 + small, by Taylor series with remainder.
fn sin_small(y: &Interval) -> Interval {
    let y2 = y.sqr();
    let mut sum = *y;
    let mut term = *y;
    let mut fact_arg = 1.0;
    for _ in 0..8 {
        // term_{k+1} = -term_k * y^2 / ((n+1)(n+2))
        term = term.mul(&y2).neg();
        term = term
            .div(&Interval::point((fact_arg + 1.0) * (fact_arg + 2.0)))
            .unwrap();
        sum = sum.add(&term);
        fact_arg += 2.0;
    }
    let m = y.mag();
    let r = m.powi(19) / 1.216_451_004_088_320_0e17;
    sum = sum.add(&Interval::new(-r.next_up(), r.next_up()));
    sum.intersect(&Interval::new(-1.0, 1.0))
}

fn cos_small(y: &Interval) -> Interval {
    let y2 = y.sqr();
    let mut sum = Interval::ONE;
    let mut term = Interval::ONE;
    let mut fact_arg = 0.0;
    for _ in 0..9 {
        term = term.mul(&y2).neg();
        term = term
            .div(&Interval::point((fact_arg + 1.0) * (fact_arg + 2.0)))
            .unwrap();
        sum = sum.add(&term);
        fact_arg += 2.0;
    }
    let m = y.mag();
    let r = m.powi(18) / 6.402_373_705_728_000_0e15;
    sum = sum.add(&Interval::new(-r.next_up(), r.next_up()));
    sum.intersect(&Interval::new(-1.0, 1.0))
}

/// Enclosure of sin at a point.
fn sin_point(x: f64) -> Interval {
    if x.abs() > 1.0e9 {
        return Interval::new(-1.0, 1.0);
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let n = (x / half_pi).round();
    let y = reduce_by_multiple(x, n, PI_2_HI, PI_2_LO, PI_2_ERR);
    let m = (n as i64).rem_euclid(4);
    match m {
        0 => sin_small(&y),
        1 => cos_small(&y),
        2 => sin_small(&y).neg(),
        _ => cos_small(&y).neg(),
    }
}

fn sin_interval(x: &Interval) -> Interval {
    let two_pi = 2.0 * std::f64::consts::PI;
    if x.width() >= two_pi || x.lo.abs() > 1.0e9 || x.hi.abs() > 1.0e9 {
        return Interval::new(-1.0, 1.0);
    }
    let mut result = sin_point(x.lo).hull(&sin_point(x.hi));
    // check for interior critical points pi/2 + k pi (conservative inclusion)
    let pi_iv = Interval::pi();
    let k0 = ((x.lo - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI).floor() as i64;
    for k in k0..=(k0 + 3) {
        let crit = pi_iv.scale(0.5).add(&pi_iv.scale(k as f64));
        if crit.lo <= x.hi && crit.hi >= x.lo {
            if k.rem_euclid(2) == 0 {
                result.hi = 1.0;
            } else {
                result.lo = -1.0;
            }
        }
    }
    result.intersect(&Interval::new(-1.0, 1.0))
}

/// Sector polar angle of a point `(x, y)` of the L-shaped sector, measured from
/// the positive x-axis, in `[0, 3pi/2]`. Returns a verified enclosure obtained
/// by bracketing the residual `y cos(phi) - x sin(phi)` around the libm value.
pub fn sector_angle(x: f64, y: f64) -> Result<Interval> {
    if x == 0.0 && y == 0.0 {
        return Err(IntervalError::DomainViolation(
            "sector angle undefined at the corner".into(),
        ));
    }
    // exact axis cases
    if y == 0.0 {
        if x > 0.0 {
            return Ok(Interval::ZERO);
        }
        return Ok(Interval::pi());
    }
    if x == 0.0 {
        if y > 0.0 {
            return Ok(Interval::pi().scale(0.5));
        }
        return Ok(Interval::pi().scale(1.5));
    }
    let mut phi = y.atan2(x);
    if y < 0.0 {
        phi += two_pi_approx();
    }
    let xi = Interval::point(x);
    let yi = Interval::point(y);
    let g = |p: f64| -> Interval {
        let pi_ = Interval::point(p);
        yi.mul(&pi_.cos()).sub(&xi.mul(&pi_.sin()))
    };
    let mut eps = 1.0e-14 * (1.0 + phi.abs());
    for _ in 0..40 {
        let a = phi - eps;
        let b = phi + eps;
        let ga = g(a);
        let gb = g(b);
        if (ga.hi < 0.0 && gb.lo > 0.0) || (ga.lo > 0.0 && gb.hi < 0.0) {
            return Ok(Interval::new(a, b));
        }
        eps *= 4.0;
    }
    Err(IntervalError::DomainViolation(format!(
        "sector angle enclosure failed at ({x}, {y})"
    )))
}

fn two_pi_approx() -> f64 {
    2.0 * std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_exact_endpoints() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(3.0, 4.0);
        let c = a + b;
        assert_eq!(c.lo, 4.0);
        assert_eq!(c.hi, 6.0);
    }

    #[test]
    fn mul_symmetric() {
        let a = Interval::new(-1.0, 1.0);
        let c = a * a;
        assert_eq!(c.lo, -1.0);
        assert_eq!(c.hi, 1.0);
        // exact-range square
        let s = a.sqr();
        assert_eq!(s.lo, 0.0);
        assert_eq!(s.hi, 1.0);
    }

    #[test]
    fn div_by_zero_interval_rejected() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(-0.5, 0.5);
        assert!(a.div(&b).is_err());
    }

    #[test]
    fn sqrt_of_negative_rejected() {
        assert!(Interval::new(-1.0, 1.0).sqrt().is_err());
        let r = Interval::new(2.0, 2.0).sqrt().unwrap();
        assert!(r.contains(std::f64::consts::SQRT_2));
        assert!(r.width() < 1e-15);
    }

    #[test]
    fn sin_encloses_sampled_range() {
        // sin([0, pi]) must contain [0+, 1] and have small defect at the ends
        let x = Interval::new(0.0, std::f64::consts::PI);
        let s = x.sin();
        let mut smin = f64::INFINITY;
        let mut smax = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let t = std::f64::consts::PI * i as f64 / 1000.0;
            smin = smin.min(t.sin());
            smax = smax.max(t.sin());
        }
        assert!(s.lo <= smin + 1e-12 && s.lo <= 0.0 + 1e-9);
        assert!(s.hi >= smax);
        assert!(s.hi >= 1.0);
        assert!(s.lo >= -1e-9, "lo={}", s.lo);
    }

    #[test]
    fn sin_point_accuracy() {
        for i in 0..2000 {
            let x = -10.0 + 0.01 * i as f64;
            let s = sin_point(x);
            assert!(s.contains(x.sin()), "x={x} s={s} libm={}", x.sin());
            assert!(s.width() < 4e-15, "width {} at {}", s.width(), x);
        }
    }

    #[test]
    fn exp_point_accuracy() {
        for i in 0..600 {
            let x = -30.0 + 0.1 * i as f64;
            let e = Interval::point(x).exp();
            assert!(e.contains(x.exp()));
            assert!(e.width() / x.exp() < 1e-14);
        }
    }

    #[test]
    fn cbrt_verified() {
        for &x in &[0.0, 1.0, 8.0, 2.0, 1e-30, 123.456, -27.0, -0.001] {
            let c = Interval::point(x).cbrt();
            assert!(c.contains(x.cbrt()));
            assert!(c.width() <= 4.0 * (x.cbrt().abs().max(1e-300) * 1e-15));
        }
    }

    #[test]
    fn pow_even_nonnegative() {
        let a = Interval::new(-2.0, 1.0);
        let p = a.pow_i(4).unwrap();
        assert_eq!(p.lo, 0.0);
        assert!(p.contains(16.0));
    }

    #[test]
    fn sector_angle_quadrants() {
        let cases = [
            (1.0, 1.0, std::f64::consts::FRAC_PI_4),
            (-1.0, 1.0, 3.0 * std::f64::consts::FRAC_PI_4),
            (-1.0, -1.0, 5.0 * std::f64::consts::FRAC_PI_4),
            (-0.3, -2.0, (-2.0f64).atan2(-0.3) + 2.0 * std::f64::consts::PI),
        ];
        for (x, y, phi) in cases {
            let e = sector_angle(x, y).unwrap();
            assert!(e.contains(phi), "({x},{y}): {e} vs {phi}");
            assert!(e.width() < 1e-10);
        }
        assert!(sector_angle(3.0, 0.0).unwrap().contains(0.0));
        assert!(sector_angle(-2.0, 0.0).unwrap().contains(std::f64::consts::PI));
        assert!(sector_angle(0.0, -1.0)
            .unwrap()
            .contains(1.5 * std::f64::consts::PI));
    }

    #[test]
    fn inclusion_of_point_results_randomized() {
        // interval result must contain the pointwise f64 result for sampled ops
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0
        };
        for _ in 0..10_000 {
            let a = rng();
            let b = rng();
            let ia = Interval::point(a);
            let ib = Interval::point(b);
            assert!((ia + ib).contains(a + b));
            assert!((ia - ib).contains(a - b));
            assert!((ia * ib).contains(a * b));
            if b.abs() > 1e-6 {
                assert!(ia.div(&ib).unwrap().contains(a / b));
            }
            assert!(ia.sin().contains(a.sin()));
            assert!(ia.cos().contains(a.cos()));
            assert!(ia.exp().contains(a.exp()));
        }
    }
}
