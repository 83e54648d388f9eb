//! Thin QR factor of the Loewner matrix, updated as supports are added.
//!
//! Adding a support appends one column and removes that sample's row. Both
//! updates cost `O(M m)`, against `O(M m^2)` for refactoring each step.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `A = Q R` over all `M` sample rows; removed rows are zero in `Q`.
pub(super) struct LoewnerQr {
    rows: usize,
    q: Vec<Vec<Complex64>>,
    r: DMatrix<Complex64>,
    removed: Vec<bool>,
    columns: Vec<Vec<Complex64>>,
    last: Option<DVector<Complex64>>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl LoewnerQr {
    pub fn new(rows: usize) -> Self {
        LoewnerQr {
            rows,
            q: Vec::new(),
            r: DMatrix::zeros(0, 0),
            removed: vec![false; rows],
            columns: Vec::new(),
            last: None,
        }
    }

    /// Zeroes row `k` of the factored matrix.
    pub fn remove_row(&mut self, k: usize) {
        self.removed[k] = true;
        for c in &mut self.columns {
            c[k] = ZERO;
        }
        let m = self.q.len();
        if m == 0 {
            return;
        }
        let u: Vec<Complex64> = self.q.iter().map(|c| c[k]).collect();
        let s2 = 1.0 - u.iter().map(|x| x.norm_sqr()).sum::<f64>();
        if s2 < 1e-8 {
            self.refactor();
            return;
        }
        let s = s2.sqrt();
        // Unit vector completing Q whose row k carries the rest of e_k.
        let mut t = vec![ZERO; self.rows];
        t[k] = Complex64::new(1.0, 0.0);
        for (c, uj) in self.q.iter().zip(&u) {
            let f = uj.conj();
            for (ti, ci) in t.iter_mut().zip(c) {
                *ti -= ci * f;
            }
        }
        for ti in &mut t {
            *ti /= s;
        }
        let mut z = vec![ZERO; m];
        for j in (0..m).rev() {
            let (a, b) = (self.q[j][k], t[k]);
            let h = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if a.norm() == 0.0 || h == 0.0 {
                continue;
            }
            let (a, b) = (a / h, b / h);
            let qj = &mut self.q[j];
            for (qi, ti) in qj.iter_mut().zip(t.iter_mut()) {
                let (x, y) = (*qi, *ti);
                *qi = b * x - a * y;
                *ti = a.conj() * x + b.conj() * y;
            }
            for col in j..m {
                let (x, y) = (self.r[(j, col)], z[col]);
                self.r[(j, col)] = b.conj() * x - a.conj() * y;
                z[col] = a * x + b * y;
            }
        }
        for c in &mut self.q {
            c[k] = ZERO;
        }
    }

    /// Appends a column (its entries on removed rows are ignored).
    pub fn push_column(&mut self, mut a: Vec<Complex64>) {
        for (ai, &gone) in a.iter_mut().zip(&self.removed) {
            if gone {
                *ai = ZERO;
            }
        }
        self.columns.push(a.clone());
        let m = self.q.len();
        let scale = norm(&a);
        let mut coef = vec![ZERO; m];
        for _ in 0..2 {
            for (j, c) in self.q.iter().enumerate() {
                let h = dot(c, &a);
                coef[j] += h;
                for (ai, ci) in a.iter_mut().zip(c) {
                    *ai -= ci * h;
                }
            }
        }
        let mut rho = norm(&a);
        if !(rho > 1e-14 * scale) || rho == 0.0 {
            // Numerically dependent column: complete Q with any orthogonal direction.
            rho = 0.0;
            a = self.fresh_direction();
        } else {
            for ai in &mut a {
                *ai /= rho;
            }
        }
        self.q.push(a);
        let mut r = DMatrix::zeros(m + 1, m + 1);
        r.view_mut((0, 0), (m, m)).copy_from(&self.r);
        for (j, h) in coef.into_iter().enumerate() {
            r[(j, m)] = h;
        }
        r[(m, m)] = Complex64::new(rho, 0.0);
        self.r = r;
    }

    fn fresh_direction(&self) -> Vec<Complex64> {
        for i in 0..self.rows {
            if self.removed[i] {
                continue;
            }
            let mut v = vec![ZERO; self.rows];
            v[i] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for c in &self.q {
                    let h = dot(c, &v);
                    for (vi, ci) in v.iter_mut().zip(c) {
                        *vi -= ci * h;
                    }
                }
            }
            let n = norm(&v);
            if n > 0.5 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
        vec![ZERO; self.rows]
    }

    /// Rebuilds `Q` and `R` from the stored columns by Householder QR.
    fn refactor(&mut self) {
        let active: Vec<usize> = (0..self.rows).filter(|&i| !self.removed[i]).collect();
        let m = self.columns.len();
        let a = DMatrix::from_fn(active.len().max(m), m, |i, j| {
            active.get(i).map_or(ZERO, |&r| self.columns[j][r])
        });
        let qr = a.qr();
        let (q, r) = (qr.q(), qr.r());
        self.q = (0..m)
            .map(|j| {
                let mut c = vec![ZERO; self.rows];
                for (i, &row) in active.iter().enumerate() {
                    c[row] = q[(i, j)];
                }
                c
            })
            .collect();
        self.r = r;
    }

    /// Smallest singular value of the factored matrix and its right vector.
    pub fn min_singular(&mut self) -> (f64, DVector<Complex64>) {
        let m = self.r.ncols();
        let (sigma, v) = match self.inverse_iteration() {
            Some(res) => res,
            None => super::min_singular_vector(&self.r),
        };
        self.last = Some(v.clone());
        debug_assert_eq!(v.len(), m);
        (sigma, v)
    }

    fn inverse_iteration(&self) -> Option<(f64, DVector<Complex64>)> {
        let m = self.r.ncols();
        if m < 2 {
            return None;
        }
        let rmax = self.r.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if (0..m).any(|i| !(self.r[(i, i)].norm() > 1e-13 * rmax)) {
            return None;
        }
        let rh = self.r.adjoint();
        let mut x = DVector::from_fn(m, |i, _| {
            let prev = self
                .last
                .as_ref()
                .and_then(|l| l.get(i).copied())
                .unwrap_or(ZERO);
            prev + Complex64::from_polar(1e-3 / (m as f64).sqrt(), 1.7 * i as f64)
        });
        x /= Complex64::new(x.norm(), 0.0);
        let mut sigma = f64::INFINITY;
        for _ in 0..60 {
            let y = rh.solve_lower_triangular(&x)?;
            let mut nx = self.r.solve_upper_triangular(&y)?;
            let n = nx.norm();
            if !n.is_finite() || n == 0.0 {
                return None;
            }
            nx /= Complex64::new(n, 0.0);
            let s = (&self.r * &nx).norm();
            let done = (sigma - s).abs() <= 1e-12 * s;
            sigma = s;
            x = nx;
            if done {
                return Some((sigma, x));
            }
        }
        None
    }
}
