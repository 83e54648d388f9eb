//! Greedy barycentric rational approximation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod loewner;
use loewner::LoewnerQr;

pub const DEFAULT_MMAX: usize = 150;

/// `r(z) = sum w_s f_s / (z - z_s) / sum w_s / (z - z_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycentricRational {
    pub support: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleData {
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub zeros: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct AaaFit {
    pub rational: BarycentricRational,
    pub converged: bool,
    /// Max residual over the samples after each greedy step.
    pub history: Vec<f64>,
    /// Smallest singular value of the Loewner matrix after each greedy step.
    pub linearized: Vec<f64>,
    /// Max residual of the returned rational (after cleanup).
    pub error: f64,
}

fn infinity() -> Complex64 {
    Complex64::new(f64::INFINITY, f64::INFINITY)
}

/// True for the value returned at a pole.
pub fn is_infinite(z: Complex64) -> bool {
    !z.re.is_finite() || !z.im.is_finite()
}

impl BarycentricRational {
    pub fn degree(&self) -> usize {
        self.support.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if is_infinite(z) {
            return self.eval_at_infinity();
        }
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for ((&s, &f), &w) in self.support.iter().zip(&self.values).zip(&self.weights) {
            let d = z - s;
            if d.re == 0.0 && d.im == 0.0 {
                return f;
            }
            let c = w / d;
            num += c * f;
            den += c;
        }
        let r = num / den;
        if den.norm() == 0.0 || is_infinite(r) || r.re.is_nan() || r.im.is_nan() {
            infinity()
        } else {
            r
        }
    }

    /// Limit as `z -> infinity`.
    pub fn eval_at_infinity(&self) -> Complex64 {
        let den: Complex64 = self.weights.iter().sum();
        let num: Complex64 = self
            .weights
            .iter()
            .zip(&self.values)
            .map(|(w, f)| w * f)
            .sum();
        if den.norm() == 0.0 {
            infinity()
        } else {
            num / den
        }
    }

    /// Characteristic length of the support set.
    fn scale(&self) -> f64 {
        let n = self.support.len().max(1) as f64;
        let c: Complex64 = self.support.iter().sum::<Complex64>() / n;
        self.support
            .iter()
            .map(|s| (s - c).norm())
            .fold(0.0, f64::max)
            .max(1.0)
    }
}

pub fn bary_eval(r: &BarycentricRational, z: &[Complex64]) -> Vec<Complex64> {
    z.iter().map(|&p| r.eval(p)).collect()
}

/// Smallest singular value of `a` and its right singular vector.
fn min_singular_vector(a: &DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let n = a.ncols();
    if n == 1 {
        return (a.norm(), DVector::from_element(1, Complex64::new(1.0, 0.0)));
    }
    // Reduce tall matrices to their triangular factor first.
    let r = if a.nrows() > n {
        a.clone().qr().r()
    } else {
        a.clone()
    };
    let r = if r.nrows() < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (r.nrows(), n)).copy_from(&r);
        padded
    } else {
        r
    };
    let svd = r.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    (
        svd.singular_values[k],
        DVector::from_fn(n, |j, _| vt[(k, j)].conj()),
    )
}

/// Weights minimizing the Loewner residual over the non-support samples.
fn loewner_weights(
    points: &[Complex64],
    values: &[Complex64],
    rows: &[usize],
    support: &[Complex64],
    fsup: &[Complex64],
) -> (f64, Vec<Complex64>) {
    let m = support.len();
    let a = DMatrix::from_fn(rows.len(), m, |i, k| {
        let r = rows[i];
        (values[r] - fsup[k]) / (points[r] - support[k])
    });
    let (sigma, v) = min_singular_vector(&a);
    (sigma, v.iter().copied().collect())
}

/// Greedy fit of `values` at `points`; stops at `max|F - r| <= tol * max|F|`
/// or at degree `mmax`, then removes spurious poles.
pub fn aaa_fit(
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
    mmax: usize,
) -> Result<AaaFit> {
    aaa_fit_with(points, values, tol, mmax, &[])
}

/// [`aaa_fit`] with the samples at `forced` taken as the first support points.
///
/// Forced supports survive cleanup, so the fit interpolates them exactly.
pub fn aaa_fit_with(
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
    mmax: usize,
    forced: &[usize],
) -> Result<AaaFit> {
    if points.len() != values.len() {
        return Err(Error::InvalidOption(
            "aaa: points and values differ in length".into(),
        ));
    }
    if points.len() < 4 {
        return Err(Error::InvalidOption("aaa: needs at least 4 points".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidOption("aaa: tol must be positive".into()));
    }
    if values
        .iter()
        .chain(points)
        .any(|v| is_infinite(*v) || v.re.is_nan() || v.im.is_nan())
    {
        return Err(Error::NonFinite("aaa samples"));
    }
    let npts = points.len();
    // Each step needs more remaining rows than support points.
    let limit = (mmax + 1).min(npts / 2);
    if forced.iter().any(|&i| i >= npts) || forced.len() > limit {
        return Err(Error::InvalidOption(
            "aaa: forced support out of range".into(),
        ));
    }
    let fmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let protected: Vec<Complex64> = forced.iter().map(|&i| points[i]).collect();
    let first = greedy(points, values, tol, limit, forced, &vec![false; npts]);
    let cleaned = prune(
        &first.rational(points, values),
        points,
        values,
        tol,
        &protected,
        false,
    );
    let mut rational = cleaned;
    let mut converged = first.converged;
    // Removing doublets can cost accuracy; resume the greedy steps without them.
    if first.converged && residual(&bary_eval(&rational, points), values) > tol * fmax {
        let mut start: Vec<usize> = forced.to_vec();
        for z in &rational.support {
            if let Some(i) = (0..npts).find(|&i| points[i] == *z && !start.contains(&i)) {
                start.push(i);
            }
        }
        let mut banned = vec![false; npts];
        for &i in &first.support {
            banned[i] = !start.contains(&i);
        }
        let second = greedy(points, values, tol, limit, &start, &banned);
        converged = second.converged;
        rational = prune(
            &second.rational(points, values),
            points,
            values,
            tol,
            &protected,
            true,
        );
    }
    let error = residual(&bary_eval(&rational, points), values);
    Ok(AaaFit {
        rational,
        converged,
        history: first.history,
        linearized: first.linearized,
        error,
    })
}

/// State of one greedy pass.
struct Pass {
    support: Vec<usize>,
    weights: Vec<Complex64>,
    history: Vec<f64>,
    linearized: Vec<f64>,
    converged: bool,
}

impl Pass {
    fn rational(&self, points: &[Complex64], values: &[Complex64]) -> BarycentricRational {
        BarycentricRational {
            support: self.support.iter().map(|&i| points[i]).collect(),
            values: self.support.iter().map(|&i| values[i]).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Greedy steps taking `start` first, never choosing a `banned` sample.
fn greedy(
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
    limit: usize,
    start: &[usize],
    banned: &[bool],
) -> Pass {
    let npts = points.len();
    let fmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mean: Complex64 = values.iter().sum::<Complex64>() / npts as f64;
    let mut approx = vec![mean; npts];
    let mut in_support = vec![false; npts];
    let mut pass = Pass {
        support: Vec::new(),
        weights: Vec::new(),
        history: Vec::new(),
        linearized: Vec::new(),
        converged: false,
    };
    let mut qr = LoewnerQr::new(npts);
    for step in 0..limit {
        let j = if let Some(&f) = start.get(step) {
            f
        } else {
            let Some(j) = (0..npts)
                .filter(|&i| !in_support[i] && !banned[i])
                .max_by(|&a, &b| {
                    (values[a] - approx[a])
                        .norm()
                        .total_cmp(&(values[b] - approx[b]).norm())
                        .then(b.cmp(&a))
                })
            else {
                break;
            };
            j
        };
        in_support[j] = true;
        pass.support.push(j);
        qr.remove_row(j);
        qr.push_column(
            (0..npts)
                .map(|i| {
                    if in_support[i] {
                        Complex64::new(0.0, 0.0)
                    } else {
                        (values[i] - values[j]) / (points[i] - points[j])
                    }
                })
                .collect(),
        );
        if step + 1 < start.len() {
            continue;
        }
        let (sigma, w) = qr.min_singular();
        pass.weights = w.iter().copied().collect();
        pass.linearized.push(sigma);
        let r = pass.rational(points, values);
        for i in 0..npts {
            approx[i] = if in_support[i] {
                values[i]
            } else {
                r.eval(points[i])
            };
        }
        let err = residual(&approx, values);
        pass.history.push(err);
        if err <= tol * fmax {
            pass.converged = true;
            break;
        }
    }
    pass
}

fn residual(approx: &[Complex64], values: &[Complex64]) -> f64 {
    approx
        .iter()
        .zip(values)
        .map(|(a, v)| {
            if is_infinite(*a) {
                f64::INFINITY
            } else {
                (a - v).norm()
            }
        })
        .fold(0.0, f64::max)
}

/// Roots of `sum c_k / (z - z_k)`: finite eigenvalues of the arrowhead pencil
/// `([0 c^T; 1 diag(z)], diag(0, 1, .., 1))`.
fn partial_fraction_roots(support: &[Complex64], c: &[Complex64], scale: f64) -> Vec<Complex64> {
    let m = support.len();
    let cmax = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if m < 2 || cmax == 0.0 {
        return vec![];
    }
    let n = m + 1;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // Column-major storage.
    let mut a = vec![zero; n * n];
    let mut b = vec![zero; n * n];
    for k in 0..m {
        a[(k + 1) * n] = c[k] / cmax;
        a[k + 1] = one;
        a[(k + 1) * n + k + 1] = support[k];
        b[(k + 1) * n + k + 1] = one;
    }
    let (mut alpha, mut beta) = (vec![zero; n], vec![zero; n]);
    let mut vl = vec![zero; 1];
    let mut vr = vec![zero; 1];
    let lwork = 4 * n as i32;
    let mut work = vec![zero; lwork as usize];
    let mut rwork = vec![0.0; 8 * n];
    let mut info = 0;
    let nn = n as i32;
    // SAFETY: every buffer has the length LAPACK expects for these dimensions.
    unsafe {
        lapack::zggev(
            b'N', b'N', nn, &mut a, nn, &mut b, nn, &mut alpha, &mut beta, &mut vl, 1, &mut vr, 1,
            &mut work, lwork, &mut rwork, &mut info,
        );
    }
    if info != 0 {
        return vec![];
    }
    alpha
        .iter()
        .zip(&beta)
        .filter(|(_, b)| b.norm() > 0.0)
        .map(|(a, b)| a / b)
        .filter(|p| p.re.is_finite() && p.im.is_finite() && p.norm() < 1e13 * scale)
        .collect()
}

pub fn poles_residues_zeros(r: &BarycentricRational) -> PoleData {
    let (poles, residues) = poles_residues(r);
    let wf: Vec<Complex64> = r
        .weights
        .iter()
        .zip(&r.values)
        .map(|(w, f)| w * f)
        .collect();
    let zeros = partial_fraction_roots(&r.support, &wf, r.scale());
    PoleData {
        poles,
        residues,
        zeros,
    }
}

fn poles_residues(r: &BarycentricRational) -> (Vec<Complex64>, Vec<Complex64>) {
    let poles = partial_fraction_roots(&r.support, &r.weights, r.scale());
    let residues = poles
        .iter()
        .map(|&p| {
            let mut num = Complex64::new(0.0, 0.0);
            let mut dd = Complex64::new(0.0, 0.0);
            for ((&s, &f), &w) in r.support.iter().zip(&r.values).zip(&r.weights) {
                let c = w / (p - s);
                num += c * f;
                dd -= c / (p - s);
            }
            num / dd
        })
        .collect();
    (poles, residues)
}

/// Removes poles with `|residue| < tol * max|values| * dist(pole, points)`.
///
/// Each such pole costs its nearest support point; weights are refit on the
/// rest and the test repeats.
pub fn cleanup(
    r: &BarycentricRational,
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
) -> BarycentricRational {
    cleanup_protected(r, points, values, tol, &[])
}

/// [`cleanup`] that never deletes the support points listed in `protected`.
pub fn cleanup_protected(
    r: &BarycentricRational,
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
    protected: &[Complex64],
) -> BarycentricRational {
    prune(r, points, values, tol, protected, false)
}

/// With `guard`, stops before a removal that would push the max residual
/// above both `tol * max|values|` and its current value.
fn prune(
    r: &BarycentricRational,
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
    protected: &[Complex64],
    guard: bool,
) -> BarycentricRational {
    let fmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut cur = r.clone();
    for _ in 0..r.support.len() {
        if cur.support.len() < 2 {
            break;
        }
        let (poles, residues) = poles_residues(&cur);
        let mut drop: Vec<usize> = Vec::new();
        for (p, res) in poles.iter().zip(&residues) {
            let dist = points
                .iter()
                .map(|z| (z - p).norm())
                .fold(f64::INFINITY, f64::min);
            if res.norm() < tol * fmax * dist || !res.norm().is_finite() {
                let Some(k) = (0..cur.support.len())
                    .filter(|&k| !protected.contains(&cur.support[k]))
                    .min_by(|&a, &b| {
                        (cur.support[a] - p)
                            .norm()
                            .total_cmp(&(cur.support[b] - p).norm())
                    })
                else {
                    continue;
                };
                if !drop.contains(&k) {
                    drop.push(k);
                }
            }
        }
        if drop.is_empty() || drop.len() >= cur.support.len() {
            break;
        }
        let keep: Vec<usize> = (0..cur.support.len())
            .filter(|k| !drop.contains(k))
            .collect();
        let support: Vec<Complex64> = keep.iter().map(|&k| cur.support[k]).collect();
        let fsup: Vec<Complex64> = keep.iter().map(|&k| cur.values[k]).collect();
        let rows: Vec<usize> = (0..points.len())
            .filter(|&i| !support.contains(&points[i]))
            .collect();
        let (_, weights) = loewner_weights(points, values, &rows, &support, &fsup);
        let next = BarycentricRational {
            support,
            values: fsup,
            weights,
        };
        if guard {
            let before = residual(&bary_eval(&cur, points), values);
            let after = residual(&bary_eval(&next, points), values);
            if after > before.max(tol * fmax) {
                break;
            }
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn circle(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_data_is_degree_zero() {
        let z = circle(32);
        let f = vec![c(5.0, 0.0); 32];
        let fit = aaa_fit(&z, &f, 1e-13, DEFAULT_MMAX).unwrap();
        assert_eq!(fit.rational.degree(), 0);
        assert!(fit.converged);
        assert_eq!(fit.rational.eval(c(17.0, 0.0)), c(5.0, 0.0));
        assert!(poles_residues_zeros(&fit.rational).poles.is_empty());
    }

    #[test]
    fn simple_pole_is_recovered() {
        let z = circle(128);
        let f: Vec<Complex64> = z.iter().map(|z| (z - 2.0).inv()).collect();
        let fit = aaa_fit(&z, &f, 1e-12, DEFAULT_MMAX).unwrap();
        assert!(fit.converged);
        let pd = poles_residues_zeros(&fit.rational);
        assert_eq!(pd.poles.len(), 1, "{:?}", pd.poles);
        assert!((pd.poles[0] - 2.0).norm() <= 1e-8);
        assert!((pd.residues[0] - 1.0).norm() <= 1e-8);
        assert!((fit.rational.eval(c(0.0, 0.0)) + 0.5).norm() <= 1e-10);
    }

    #[test]
    fn identity_needs_degree_at_most_two() {
        let z: Vec<Complex64> = (0..50)
            .map(|k| c(k as f64 / 49.0, (k as f64).sin()))
            .collect();
        let fit = aaa_fit(&z, &z, 1e-13, DEFAULT_MMAX).unwrap();
        assert!(fit.rational.degree() <= 2);
        assert!(fit.error <= 1e-13 * 2.0);
    }

    #[test]
    fn pole_and_zero_of_mobius_data() {
        let z = circle(64);
        let f: Vec<Complex64> = z.iter().map(|z| (z - 3.0) / (z - 2.0)).collect();
        let fit = aaa_fit(&z, &f, 1e-12, DEFAULT_MMAX).unwrap();
        let pd = poles_residues_zeros(&fit.rational);
        assert_eq!(pd.poles.len(), 1);
        assert_eq!(pd.zeros.len(), 1);
        assert!((pd.poles[0] - 2.0).norm() <= 1e-8);
        assert!((pd.zeros[0] - 3.0).norm() <= 1e-8);
    }

    #[test]
    fn supports_interpolate_exactly() {
        let z = circle(100);
        let f: Vec<Complex64> = z.iter().map(|z| (z * 2.0).exp() / (z - 1.5)).collect();
        let fit = aaa_fit(&z, &f, 1e-10, DEFAULT_MMAX).unwrap();
        let r = &fit.rational;
        for (s, v) in r.support.iter().zip(&r.values) {
            assert_eq!(r.eval(*s), *v);
        }
        assert!(fit.error <= 1e-10 * f.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }

    #[test]
    fn linearized_residual_never_increases() {
        let z = circle(200);
        let f: Vec<Complex64> = z
            .iter()
            .map(|z| (z * 3.0).exp() + (z - 1.2).inv())
            .collect();
        let fit = aaa_fit(&z, &f, 1e-13, DEFAULT_MMAX).unwrap();
        assert!(
            fit.linearized
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
            "{:?}",
            fit.linearized
        );
    }

    #[test]
    fn max_residual_decreases_for_a_single_pole() {
        let z = circle(128);
        let f: Vec<Complex64> = z.iter().map(|z| (z - 2.0).inv()).collect();
        let fit = aaa_fit(&z, &f, 1e-13, DEFAULT_MMAX).unwrap();
        assert!(
            fit.history.windows(2).all(|w| w[1] <= w[0]),
            "{:?}",
            fit.history
        );
    }

    #[test]
    fn noise_doublets_are_removed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = circle(200);
        let f: Vec<Complex64> = z
            .iter()
            .map(|z| {
                (z - 2.0).inv()
                    + c(
                        rng.random_range(-1e-14..1e-14),
                        rng.random_range(-1e-14..1e-14),
                    )
            })
            .collect();
        // A tight tolerance makes the greedy loop fit the noise.
        let raw = aaa_fit(&z, &f, 1e-15, 30).unwrap();
        let cleaned = cleanup(&raw.rational, &z, &f, 1e-8);
        let pd = poles_residues_zeros(&cleaned);
        assert_eq!(pd.poles.len(), 1, "{:?}", pd.poles);
        assert!((pd.poles[0] - 2.0).norm() <= 1e-6);
    }

    #[test]
    fn cleanup_leaves_clean_fits_alone() {
        let z = circle(64);
        let f: Vec<Complex64> = z.iter().map(|z| (z - 2.0).inv()).collect();
        let fit = aaa_fit(&z, &f, 1e-12, DEFAULT_MMAX).unwrap();
        assert_eq!(cleanup(&fit.rational, &z, &f, 1e-12), fit.rational);
        let d0 = BarycentricRational {
            support: vec![c(0.0, 0.0)],
            values: vec![c(1.0, 0.0)],
            weights: vec![c(1.0, 0.0)],
        };
        assert_eq!(cleanup(&d0, &z, &f, 1e-12), d0);
    }

    #[test]
    fn forced_support_is_interpolated() {
        let mut z = circle(64);
        z.push(c(0.0, 0.0));
        let f: Vec<Complex64> = z.iter().map(|z| z * (z - 2.0).inv()).collect();
        let fit = aaa_fit_with(&z, &f, 1e-10, DEFAULT_MMAX, &[64]).unwrap();
        assert_eq!(fit.rational.support[0], c(0.0, 0.0));
        assert_eq!(fit.rational.eval(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn evaluation_at_a_pole_is_infinite() {
        let r = BarycentricRational {
            support: vec![c(0.0, 0.0), c(1.0, 0.0)],
            values: vec![c(1.0, 0.0), c(2.0, 0.0)],
            weights: vec![c(1.0, 0.0), c(1.0, 0.0)],
        };
        // Denominator 1/z + 1/(z-1) vanishes at 1/2.
        assert!(is_infinite(r.eval(c(0.5, 0.0))));
        assert!(bary_eval(&r, &[]).is_empty());
    }

    #[test]
    fn serde_round_trip_is_exact() {
        let z = circle(64);
        let f: Vec<Complex64> = z.iter().map(|z| (z - 2.0).inv()).collect();
        let r = aaa_fit(&z, &f, 1e-12, DEFAULT_MMAX).unwrap().rational;
        let s = serde_json::to_string(&r).unwrap();
        let back: BarycentricRational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
