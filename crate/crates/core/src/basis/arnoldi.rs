use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which powers a block generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerSign {
    /// `(z - c)^k`, k = 0..n.
    Positive,
    /// `(z - c)^{-k}`, k = 0..n.
    Negative,
}

/// Vandermonde-with-Arnoldi basis for one expansion center.
///
/// Column `k` of the quasi-matrix is a degree-`k` polynomial in the multiplier
/// `m(z)`, orthonormal over the construction nodes in the inner product
/// `<f, g> = sum w_i conj(f_i) g_i / sum w_i`.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// `(n+1) x n` upper Hessenberg recurrence coefficients.
    pub hessenberg: DMatrix<Complex64>,
    pub center: Complex64,
    pub sign: PowerSign,
    /// Basis values at the nodes, `M x (n+1)`.
    pub q: DMatrix<Complex64>,
    /// Degree that was asked for; larger than `degree()` after a breakdown.
    pub requested_degree: usize,
}

impl OrthoBasis {
    pub fn degree(&self) -> usize {
        self.hessenberg.ncols()
    }

    pub fn broke_down(&self) -> bool {
        self.requested_degree > self.degree()
    }

    fn multiplier(&self, z: Complex64) -> Result<Complex64> {
        multiplier(self.center, self.sign, z)
    }

    /// Basis values at `z = infinity`; only defined for negative-power blocks.
    pub fn eval_at_infinity(&self) -> Option<Vec<Complex64>> {
        if self.sign != PowerSign::Negative {
            return None;
        }
        let n = self.degree();
        let mut row = vec![Complex64::new(1.0, 0.0); n + 1];
        for k in 0..n {
            let mut v = Complex64::new(0.0, 0.0);
            for j in 0..=k {
                v -= self.hessenberg[(j, k)] * row[j];
            }
            row[k + 1] = v / self.hessenberg[(k + 1, k)];
        }
        Some(row)
    }
}

fn multiplier(center: Complex64, sign: PowerSign, z: Complex64) -> Result<Complex64> {
    match sign {
        PowerSign::Positive => Ok(z - center),
        PowerSign::Negative => {
            let d = z - center;
            if d.norm() == 0.0 {
                Err(Error::PoleEvaluation(z))
            } else {
                Ok(d.inv())
            }
        }
    }
}

fn inner(w: &[f64], wsum: f64, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        acc += a[i].conj() * b[i] * w[i];
    }
    acc / wsum
}

/// Builds an orthonormal basis of degree `n` by Arnoldi with reorthogonalization.
///
/// On breakdown (`h_{k+1,k} < 1e-14 * scale`) the degree is reduced to `k`
/// and `requested_degree` records the original request.
pub fn arnoldi_build(
    nodes: &[Complex64],
    weights: &[f64],
    n: usize,
    center: Complex64,
    sign: PowerSign,
) -> Result<OrthoBasis> {
    let m = nodes.len();
    if weights.len() != m {
        return Err(Error::InvalidOption(
            "arnoldi_build: weights and nodes differ in length".into(),
        ));
    }
    if n + 1 > m {
        return Err(Error::InvalidOption(format!(
            "arnoldi_build: degree {n} needs more than {m} nodes"
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidOption(
            "arnoldi_build: weights must be positive".into(),
        ));
    }
    let wsum: f64 = weights.iter().sum();
    let mult: Vec<Complex64> = nodes
        .iter()
        .map(|&z| multiplier(center, sign, z))
        .collect::<Result<_>>()?;
    let scale = mult.iter().map(|x| x.norm()).fold(0.0, f64::max);

    let mut cols: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0); m]];
    let mut h = DMatrix::<Complex64>::zeros(n + 1, n);
    let mut degree = n;
    for k in 0..n {
        let mut v: Vec<Complex64> = cols[k].iter().zip(&mult).map(|(q, z)| q * z).collect();
        for _pass in 0..2 {
            for j in 0..=k {
                let c = inner(weights, wsum, &cols[j], &v);
                h[(j, k)] += c;
                for i in 0..m {
                    v[i] -= c * cols[j][i];
                }
            }
        }
        let norm = inner(weights, wsum, &v, &v).re.sqrt();
        if !(norm >= 1e-14 * scale) {
            degree = k;
            break;
        }
        h[(k + 1, k)] = Complex64::new(norm, 0.0);
        for x in &mut v {
            *x /= norm;
        }
        cols.push(v);
    }

    let h = h.view((0, 0), (degree + 1, degree)).into_owned();
    let q = DMatrix::from_fn(m, degree + 1, |i, k| cols[k][i]);
    Ok(OrthoBasis {
        nodes: nodes.to_vec(),
        weights: weights.to_vec(),
        hessenberg: h,
        center,
        sign,
        q,
        requested_degree: n,
    })
}

/// Evaluates the basis at arbitrary points by rerunning the stored recurrence.
pub fn arnoldi_eval(basis: &OrthoBasis, points: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let n = basis.degree();
    let mut out = DMatrix::<Complex64>::zeros(points.len(), n + 1);
    for (i, &z) in points.iter().enumerate() {
        let m = basis.multiplier(z)?;
        out[(i, 0)] = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let mut v = out[(i, k)] * m;
            for j in 0..=k {
                v -= basis.hessenberg[(j, k)] * out[(i, j)];
            }
            out[(i, k + 1)] = v / basis.hessenberg[(k + 1, k)];
        }
    }
    Ok(out)
}
