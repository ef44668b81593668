//! Verified enclosure of the roots of a 1D function by interval bisection
//! combined with an interval Newton operator.

use crate::interval::Interval;

/// Outcome of a root search over a bracket.
///
/// `verified` intervals each provably contain at least one root (by a sign
/// change or by Newton contraction). `undecided` intervals could neither be
/// discarded nor verified within the subdivision budget; together with the
/// verified list they cover every root of the bracket.
#[derive(Debug, Clone, Default)]
pub struct RootEnclosures {
    pub verified: Vec<Interval>,
    pub undecided: Vec<Interval>,
}

impl RootEnclosures {
    pub fn is_complete(&self) -> bool {
        self.undecided.is_empty()
    }
}

/// Interval Newton / bisection root enclosure.
///
/// `f` must be an inclusion function of the target (a point argument is passed
/// as a degenerate interval); `df` an inclusion function of its derivative.
pub fn interval_newton_enclose<F, G>(
    f: F,
    df: G,
    bracket: Interval,
    tol: f64,
    budget: usize,
) -> RootEnclosures
where
    F: Fn(&Interval) -> Interval,
    G: Fn(&Interval) -> Interval,
{
    assert!(tol > 0.0);
    let mut out = RootEnclosures::default();
    let mut work = vec![bracket];
    let mut steps = 0usize;

    let point = |x: f64| Interval::point(x);
    let sign_change = |a: f64, b: f64| -> bool {
        let fa = f(&point(a));
        let fb = f(&point(b));
        (fa.hi < 0.0 && fb.lo > 0.0) || (fa.lo > 0.0 && fb.hi < 0.0)
    };

    while let Some(x) = work.pop() {
        steps += 1;
        if steps > budget {
            out.undecided.push(x);
            out.undecided.extend(work);
            break;
        }
        let fx = f(&x);
        if !fx.contains(0.0) {
            continue;
        }
        let dfx = df(&x);
        // Newton step when the derivative excludes zero
        if !dfx.contains(0.0) {
            let m = x.mid();
            let fm = f(&point(m));
            let n = point(m).sub(&fm.div(&dfx).expect("derivative free of zero"));
            let reduced = n.intersect(&x);
            if reduced.is_empty() {
                continue; // no root in x
            }
            if x.contains_interval(&n) {
                // Moore's test: exactly one root in x; contract to tolerance
                let mut cur = reduced;
                for _ in 0..80 {
                    if cur.width() <= tol {
                        break;
                    }
                    let mc = cur.mid();
                    let fmc = f(&point(mc));
                    let dc = df(&cur);
                    if dc.contains(0.0) {
                        break;
                    }
                    let nc = point(mc).sub(&fmc.div(&dc).unwrap());
                    let next = nc.intersect(&cur);
                    if next.is_empty() || next.width() >= cur.width() * 0.95 {
                        break;
                    }
                    cur = next;
                }
                if cur.width() <= tol {
                    out.verified.push(cur);
                } else {
                    // contraction stalled above tolerance: subdivide further
                    push_halves(&mut work, &cur);
                }
                continue;
            }
            if reduced.width() < 0.8 * x.width() {
                work.push(reduced);
                continue;
            }
        }
        if x.width() <= tol {
            // probe pairs slightly outside x as well: a root sitting exactly on
            // a representable endpoint has no determinable sign there
            let probes = [
                (x.lo, x.hi),
                (x.lo - tol, x.hi),
                (x.lo, x.hi + tol),
                (x.lo - tol, x.hi + tol),
            ];
            let mut decided = false;
            for (a, b) in probes {
                if sign_change(a, b) {
                    out.verified.push(Interval::new(a, b));
                    decided = true;
                    break;
                }
            }
            if !decided {
                out.undecided.push(x);
            }
            continue;
        }
        push_halves(&mut work, &x);
    }

    merge_overlaps(&mut out.verified);
    merge_overlaps(&mut out.undecided);
    // absorb undecided slivers that overlap a verified enclosure: the hull
    // still provably contains a root and no root coverage is lost
    let mut remaining = Vec::new();
    'outer: for u in out.undecided.drain(..) {
        for v in out.verified.iter_mut() {
            if u.intersects(v) {
                *v = v.hull(&u);
                continue 'outer;
            }
        }
        remaining.push(u);
    }
    out.undecided = remaining;
    merge_overlaps(&mut out.verified);
    out
}

fn push_halves(work: &mut Vec<Interval>, x: &Interval) {
    let m = x.mid();
    if m <= x.lo || m >= x.hi {
        // cannot split further in f64; leave as a single candidate of minimal width
        work.push(*x);
        return;
    }
    work.push(Interval::new(x.lo, m));
    work.push(Interval::new(m, x.hi));
}

fn merge_overlaps(v: &mut Vec<Interval>) {
    if v.len() < 2 {
        return;
    }
    v.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    let mut merged: Vec<Interval> = Vec::with_capacity(v.len());
    for iv in v.iter() {
        if let Some(last) = merged.last_mut() {
            if iv.lo <= last.hi {
                *last = last.hull(iv);
                continue;
            }
        }
        merged.push(*iv);
    }
    *v = merged;
}
