//! Minimal sparse symmetric linear algebra: CSR storage with COO assembly,
//! Jacobi-preconditioned conjugate gradients for definite systems and MINRES
//! for indefinite ones.

/// Triplet accumulator; duplicate entries are summed on conversion.
pub struct Coo {
    pub n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Coo {
    pub fn new(n: usize) -> Self {
        Coo {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn to_csr(mut self) -> Csr {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals = Vec::with_capacity(self.entries.len());
        let mut rows = Vec::with_capacity(self.entries.len());
        for (i, j, v) in self.entries {
            if rows.last() == Some(&i) && cols.last() == Some(&j) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                cols.push(j);
                vals.push(v);
            }
        }
        let mut row_ptr = vec![0usize; self.n + 1];
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.cols[k] == j {
                return self.vals[k];
            }
        }
        0.0
    }

    /// `self + alpha * other` (patterns may differ).
    pub fn add_scaled(&self, other: &Csr, alpha: f64) -> Csr {
        assert_eq!(self.n, other.n);
        let mut coo = Coo::new(self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                coo.push(i, self.cols[k], self.vals[k]);
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                coo.push(i, other.cols[k], alpha * other.vals[k]);
            }
        }
        coo.to_csr()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients. Returns the solution and the
/// final relative residual.
pub fn cg(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = a.n;
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let dinv: Vec<f64> = a
        .diag()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        if norm(&r) / bnorm <= tol {
            break;
        }
        a.matvec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm(&r) / bnorm;
    (x, res)
}

/// MINRES for symmetric (possibly indefinite) systems. Returns the solution
/// and the final relative residual.
pub fn minres(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = a.n;
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; n];
    let mut v_prev = vec![0.0; n];
    let mut v = b.to_vec();
    let mut beta = norm(&v);
    if beta == 0.0 {
        return (x, 0.0);
    }
    for vi in v.iter_mut() {
        *vi /= beta;
    }
    let mut eta = beta;
    let (mut c_old, mut c_cur) = (1.0, 1.0);
    let (mut s_old, mut s_cur) = (0.0, 0.0);
    let mut w_old = vec![0.0; n];
    let mut w_cur = vec![0.0; n];
    let mut resid = beta;
    for _ in 0..max_iter {
        let mut av = a.matvec(&v);
        let alpha = dot(&v, &av);
        for i in 0..n {
            av[i] -= alpha * v[i] + beta * v_prev[i];
        }
        let beta_new = norm(&av);
        // two Givens rotations applied to the new tridiagonal column
        let rho1 = c_cur * alpha - c_old * s_cur * beta;
        let rho2 = s_cur * alpha + c_old * c_cur * beta;
        let rho3 = s_old * beta;
        let r1 = (rho1 * rho1 + beta_new * beta_new).sqrt();
        if r1 == 0.0 {
            break;
        }
        let c_new = rho1 / r1;
        let s_new = beta_new / r1;
        let mut w_new = vec![0.0; n];
        for i in 0..n {
            w_new[i] = (v[i] - rho2 * w_cur[i] - rho3 * w_old[i]) / r1;
            x[i] += c_new * eta * w_new[i];
        }
        resid *= s_new.abs();
        eta = -s_new * eta;
        if resid / bnorm <= tol {
            break;
        }
        if beta_new == 0.0 {
            break;
        }
        v_prev = std::mem::replace(&mut v, av);
        for vi in v.iter_mut() {
            *vi /= beta_new;
        }
        beta = beta_new;
        w_old = std::mem::replace(&mut w_cur, w_new);
        c_old = c_cur;
        c_cur = c_new;
        s_old = s_cur;
        s_cur = s_new;
    }
    // recompute the true residual: the recurrence estimate can drift
    let r = a.matvec(&x);
    let true_res = b
        .iter()
        .zip(&r)
        .map(|(bi, ri)| (bi - ri) * (bi - ri))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    (x, true_res)
}
