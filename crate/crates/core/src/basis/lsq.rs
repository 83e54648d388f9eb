use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivots below `RANK_TOL * |R_00|` are truncated.
pub const RANK_TOL: f64 = 1e-14;

/// What a least-squares column multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    /// Real part of the coefficient of basis function `index` in `block`.
    Real { block: usize, index: usize },
    /// Imaginary part of the same coefficient (column holds `-Im phi`).
    Imag { block: usize, index: usize },
    /// The unknown `-log rho` of doubly connected problems.
    Modulus,
}

#[derive(Debug, Clone)]
pub struct LeastSquaresSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub column_map: Vec<ColumnRole>,
}

#[derive(Debug, Clone)]
pub struct LsSolution {
    pub coeffs: DVector<f64>,
    /// `||A x - b||_2`.
    pub residual: f64,
    /// Numerical rank after pivot truncation.
    pub rank: usize,
}

/// Solves `min ||A x - b||` by Householder QR with column pivoting.
///
/// Columns are equilibrated first; trailing pivots below [`RANK_TOL`] times the
/// leading one are dropped and their coefficients set to zero.
pub fn solve_ls(system: &LeastSquaresSystem) -> Result<LsSolution> {
    let a0 = &system.matrix;
    let (m, n) = a0.shape();
    if system.rhs.len() != m {
        return Err(Error::InvalidOption(format!(
            "solve_ls: rhs has {} rows, matrix has {m}",
            system.rhs.len()
        )));
    }
    if m < n {
        return Err(Error::InvalidOption(format!(
            "solve_ls: system is underdetermined ({m} x {n})"
        )));
    }
    if a0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("least-squares matrix"));
    }
    if system.rhs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("least-squares right-hand side"));
    }
    if n == 0 {
        return Ok(LsSolution {
            coeffs: DVector::zeros(0),
            residual: system.rhs.norm(),
            rank: 0,
        });
    }

    let mut a = a0.clone();
    let mut colscale = vec![1.0; n];
    for j in 0..n {
        let nrm = a.column(j).norm();
        if nrm > 0.0 {
            colscale[j] = nrm;
            a.column_mut(j).unscale_mut(nrm);
        }
    }
    let mut b = system.rhs.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| a.column(j).norm_squared()).collect();
    let mut exact: Vec<f64> = norms.clone();
    let mut diag = vec![0.0; n];
    let kmax = m.min(n);
    let mut rank = kmax;
    let mut lead = 0.0;

    let data = a.as_mut_slice();
    for k in 0..kmax {
        let p = (k..n)
            .max_by(|&i, &j| norms[i].total_cmp(&norms[j]).then(j.cmp(&i)))
            .unwrap();
        if p != k {
            for i in 0..m {
                data.swap(k * m + i, p * m + i);
            }
            norms.swap(k, p);
            exact.swap(k, p);
            perm.swap(k, p);
        }

        let col = &mut data[k * m..(k + 1) * m];
        let alpha_norm = col[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if k == 0 {
            lead = alpha_norm;
        }
        if alpha_norm <= RANK_TOL * lead || alpha_norm == 0.0 {
            rank = k;
            break;
        }
        let beta = if col[k] >= 0.0 {
            -alpha_norm
        } else {
            alpha_norm
        };
        // v = x - beta e1, stored in place; H = I - 2 v v^T / (v^T v).
        col[k] -= beta;
        let vnorm2: f64 = col[k..].iter().map(|x| x * x).sum();
        diag[k] = beta;

        let (head, tail) = data.split_at_mut((k + 1) * m);
        let v = &head[k * m + k..(k + 1) * m];
        for j in 0..(n - k - 1) {
            let cj = &mut tail[j * m + k..(j + 1) * m];
            let dot: f64 = v.iter().zip(cj.iter()).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vnorm2;
            for (y, x) in cj.iter_mut().zip(v) {
                *y -= f * x;
            }
        }
        let bt = &mut b.as_mut_slice()[k..];
        let dot: f64 = v.iter().zip(bt.iter()).map(|(x, y)| x * y).sum();
        let f = 2.0 * dot / vnorm2;
        for (y, x) in bt.iter_mut().zip(v) {
            *y -= f * x;
        }

        for j in (k + 1)..n {
            let r = data[j * m + k];
            norms[j] -= r * r;
            // Downdated norms lose accuracy; recompute when most of the column is gone.
            if norms[j] <= 1e-2 * exact[j] {
                let c = &data[j * m + k + 1..(j + 1) * m];
                norms[j] = c.iter().map(|x| x * x).sum();
                exact[j] = norms[j];
            }
        }
    }

    let mut y = vec![0.0; n];
    for i in (0..rank).rev() {
        let mut s = b[i];
        for j in (i + 1)..rank {
            s -= data[j * m + i] * y[j];
        }
        y[i] = s / diag[i];
    }
    let mut x = DVector::zeros(n);
    for i in 0..rank {
        x[perm[i]] = y[i] / colscale[perm[i]];
    }
    let residual = (a0 * &x - &system.rhs).norm();
    Ok(LsSolution {
        coeffs: x,
        residual,
        rank,
    })
}
