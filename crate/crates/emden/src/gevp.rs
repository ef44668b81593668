//! Verified eigenvalue enclosures for the symmetric generalized problem
//! `A x = lambda B x` with `B` positive definite.
//!
//! Strategy: an approximate eigendecomposition (floating point) supplies a
//! congruence transformation that brings the interval pencil to near-diagonal
//! form; Gershgorin-type disks of the transformed pencil then give rigorous
//! per-index enclosures. Counting is justified by the linear homotopy from the
//! diagonal pencil to the full one: `B`-side matrices stay positive definite
//! along the way and the disks only shrink towards `t = 0`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::interval::Interval;

#[derive(Debug, Error)]
pub enum GevpError {
    #[error("matrix B could not be verified positive definite")]
    NotPositiveDefinite,
    #[error("eigenvalue enclosures too wide: {0}")]
    EnclosureTooWide(String),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

/// Symmetric interval matrix, dense row-major storage.
#[derive(Debug, Clone)]
pub struct IvMatrix {
    pub n: usize,
    data: Vec<Interval>,
}

impl IvMatrix {
    pub fn zeros(n: usize) -> IvMatrix {
        IvMatrix {
            n,
            data: vec![Interval::ZERO; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Interval) -> IvMatrix {
        let mut m = IvMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: Interval) {
        let cur = self.get(i, j);
        self.set(i, j, cur.add(&v));
    }

    pub fn midpoint(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).mid())
    }

    /// Congruence transform `X^T M X` with a floating-point matrix `X` (n x k).
    pub fn congruence(&self, x: &DMatrix<f64>) -> IvMatrix {
        assert_eq!(x.nrows(), self.n);
        let k = x.ncols();
        // M X first
        let mut mx = vec![Interval::ZERO; self.n * k];
        for i in 0..self.n {
            for c in 0..k {
                let mut acc = Interval::ZERO;
                for j in 0..self.n {
                    acc += self.get(i, j).scale(x[(j, c)]);
                }
                mx[i * k + c] = acc;
            }
        }
        let mut out = IvMatrix::zeros(k);
        for r in 0..k {
            for c in 0..k {
                let mut acc = Interval::ZERO;
                for i in 0..self.n {
                    acc += mx[i * k + c].scale(x[(i, r)]);
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

/// Interval Cholesky factorization test. Success proves every symmetric point
/// matrix within the interval matrix is positive definite.
pub fn verified_spd(m: &IvMatrix) -> bool {
    let n = m.n;
    let mut l = vec![Interval::ZERO; n * n];
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d = d.sub(&l[j * n + k].sqr());
        }
        if d.lo <= 0.0 {
            return false;
        }
        let djj = match d.sqrt() {
            Ok(s) => s,
            Err(_) => return false,
        };
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s = s.sub(&l[i * n + k].mul(&l[j * n + k]));
            }
            match s.div(&djj) {
                Ok(v) => l[i * n + j] = v,
                Err(_) => return false,
            }
        }
    }
    true
}

/// Rigorous lower bound for the smallest eigenvalue of a symmetric interval
/// matrix, via a verified Cholesky test of `M - beta I` around a floating
/// point estimate. Returns `None` if no positive-definite shift verifies.
pub fn verified_lambda_min(m: &IvMatrix) -> Option<f64> {
    let mid = m.midpoint();
    let approx = mid.clone().symmetric_eigen().eigenvalues.min();
    let mut beta = if approx > 0.0 { 0.99 * approx } else { approx * 1.01 - 1e-300 };
    for _ in 0..60 {
        let shifted = IvMatrix::from_fn(m.n, |i, j| {
            if i == j {
                m.get(i, j).sub(&Interval::point(beta))
            } else {
                m.get(i, j)
            }
        });
        if verified_spd(&shifted) {
            return Some(beta);
        }
        beta = if beta > 0.0 { beta * 0.5 } else { beta * 2.0 - 1e-12 };
        if beta < -1e30 {
            break;
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct SymGevpEnclosure {
    /// i-th entry contains the i-th eigenvalue (ascending, counting multiplicity).
    pub eigen_bounds: Vec<Interval>,
    pub dim: usize,
    /// true when all Gershgorin clusters were singletons (strict index separation)
    pub separated: bool,
}

/// Verified enclosures for all eigenvalues of the symmetric pencil `(A, B)`.
pub fn verified_sym_gevp(a: &IvMatrix, b: &IvMatrix) -> Result<SymGevpEnclosure, GevpError> {
    if a.n != b.n {
        return Err(GevpError::Dimension(a.n, b.n));
    }
    let n = a.n;
    if n == 0 {
        return Ok(SymGevpEnclosure {
            eigen_bounds: vec![],
            dim: 0,
            separated: true,
        });
    }

    // approximate eigendecomposition of the midpoint pencil
    let a_mid = a.midpoint();
    let b_mid = b.midpoint();
    let chol = b_mid
        .clone()
        .cholesky()
        .ok_or(GevpError::NotPositiveDefinite)?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or(GevpError::NotPositiveDefinite)?;
    let c = &l_inv * &a_mid * l_inv.transpose();
    let c_sym = (&c + c.transpose()) * 0.5;
    let eig = c_sym.symmetric_eigen();
    // transformation X = L^{-T} Q
    let x = l_inv.transpose() * &eig.eigenvectors;

    // interval congruence: G ~ diag(lambda), H ~ I
    let g = a.congruence(&x);
    let h = b.congruence(&x);

    if !verified_spd(&h) {
        return Err(GevpError::NotPositiveDefinite);
    }

    // Gershgorin lower bound on lambda_min(H)
    let mut hmin = f64::INFINITY;
    for i in 0..n {
        let mut row = Interval::ZERO;
        for j in 0..n {
            if j != i {
                row += Interval::point(h.get(i, j).mag());
            }
        }
        hmin = hmin.min(h.get(i, i).lo - row.hi);
    }
    if hmin <= 0.0 {
        return Err(GevpError::EnclosureTooWide(format!(
            "transformed B matrix not diagonally dominant (margin {hmin})"
        )));
    }

    // a priori bound on |lambda|: max row sum of |G| over lambda_min(H)
    let mut gnorm = Interval::ZERO;
    for i in 0..n {
        let mut row = Interval::ZERO;
        for j in 0..n {
            row += Interval::point(g.get(i, j).mag());
        }
        if row.hi > gnorm.hi {
            gnorm = row;
        }
    }
    let lam_max = gnorm.div(&Interval::point(hmin)).unwrap().hi;

    // per-row disks: |g_ii - lambda h_ii| <= R_i + |lambda| Q_i
    let mut disks: Vec<Interval> = Vec::with_capacity(n);
    for i in 0..n {
        let mut radius = Interval::ZERO;
        for j in 0..n {
            if j != i {
                radius += Interval::point(g.get(i, j).mag());
                radius += Interval::point(h.get(i, j).mag()).scale(lam_max);
            }
        }
        let spread = Interval::new(-radius.hi, radius.hi);
        let disk = g
            .get(i, i)
            .add(&spread)
            .div(&h.get(i, i))
            .map_err(|_| GevpError::EnclosureTooWide("zero diagonal in H".into()))?;
        disks.push(disk);
    }

    // merge overlapping disks into clusters; each cluster of size k contains
    // exactly k eigenvalues, so the cluster hull is a valid bound per index
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| disks[i].lo.partial_cmp(&disks[j].lo).unwrap());
    let mut bounds: Vec<Interval> = Vec::with_capacity(n);
    let mut separated = true;
    let mut idx = 0;
    while idx < n {
        let mut hullv = disks[order[idx]];
        let mut count = 1;
        while idx + count < n && disks[order[idx + count]].lo <= hullv.hi {
            hullv = hullv.hull(&disks[order[idx + count]]);
            count += 1;
        }
        if count > 1 {
            separated = false;
        }
        for _ in 0..count {
            bounds.push(hullv);
        }
        idx += count;
    }
    // enforce nondecreasing lower bounds (hulls already sorted by construction)
    for w in 1..bounds.len() {
        if bounds[w].lo < bounds[w - 1].lo {
            bounds[w].lo = bounds[w - 1].lo;
        }
    }

    Ok(SymGevpEnclosure {
        eigen_bounds: bounds,
        dim: n,
        separated,
    })
}
