use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{arnoldi_eval, OrthoBasis, PowerSign};
use crate::error::{Error, Result};
use crate::geometry::BoundarySamples;

use super::PoleSet;

/// Fractional powers `((z - v) / (-d * scale))^{k/alpha}`, `k = 1..=terms`.
///
/// `d` is the exterior bisector, so the principal branch cut runs along it,
/// away from the domain.
#[derive(Debug, Clone)]
pub struct CornerBlock {
    pub vertex: Complex64,
    pub alpha: f64,
    pub bisector: Complex64,
    pub scale: f64,
    pub terms: usize,
}

impl CornerBlock {
    fn eval_into(&self, z: Complex64, out: &mut [Complex64]) {
        let w = (z - self.vertex) / (-self.bisector * self.scale);
        if w.norm() == 0.0 {
            out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            return;
        }
        let lw = w.ln();
        for (k, x) in out.iter_mut().enumerate() {
            *x = (lw * ((k + 1) as f64 / self.alpha)).exp();
        }
    }
}

/// One group of complex basis functions sharing a coefficient vector slice.
#[derive(Debug, Clone)]
pub enum BasisBlock {
    /// Simple poles `d_j / (z - p_j)`.
    Poles(PoleSet),
    /// Arnoldi block; `constant` says whether its column 0 is used.
    Smooth {
        basis: OrthoBasis,
        constant: bool,
    },
    Corner(CornerBlock),
}

impl BasisBlock {
    /// Number of complex basis functions (including an unused constant slot).
    pub fn len(&self) -> usize {
        match self {
            BasisBlock::Poles(p) => p.poles.len(),
            BasisBlock::Smooth { basis, .. } => basis.degree() + 1,
            BasisBlock::Corner(c) => c.terms,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values of every function of the block at `points`, row-major `points.len() x len()`.
    pub fn eval(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        let w = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); points.len() * w];
        match self {
            BasisBlock::Poles(set) => {
                for (i, &z) in points.iter().enumerate() {
                    for (j, (&p, &d)) in set.poles.iter().zip(&set.distances).enumerate() {
                        let dz = z - p;
                        if dz.norm() == 0.0 {
                            return Err(Error::PoleEvaluation(z));
                        }
                        out[i * w + j] = d / dz;
                    }
                }
            }
            BasisBlock::Smooth { basis, .. } => {
                let q = arnoldi_eval(basis, points)?;
                for i in 0..points.len() {
                    for k in 0..w {
                        out[i * w + k] = q[(i, k)];
                    }
                }
            }
            BasisBlock::Corner(c) => {
                for (i, &z) in points.iter().enumerate() {
                    c.eval_into(z, &mut out[i * w..(i + 1) * w]);
                }
            }
        }
        Ok(out)
    }

    /// Values at infinity, when finite.
    pub fn eval_at_infinity(&self) -> Option<Vec<Complex64>> {
        match self {
            BasisBlock::Poles(p) => Some(vec![Complex64::new(0.0, 0.0); p.poles.len()]),
            BasisBlock::Smooth { basis, .. } => basis.eval_at_infinity(),
            BasisBlock::Corner(_) => None,
        }
    }

    /// Finite singular points of the block (poles, negative-power centers, branch points).
    pub fn singularities(&self) -> Vec<Complex64> {
        match self {
            BasisBlock::Poles(p) => p.poles.clone(),
            BasisBlock::Smooth { basis, .. } if basis.sign == PowerSign::Negative => {
                vec![basis.center]
            }
            BasisBlock::Smooth { .. } => vec![],
            BasisBlock::Corner(_) => vec![],
        }
    }
}

/// Where the harmonic conjugate is pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizationPoint {
    Finite(Complex64),
    Infinity,
}

/// One step of the adaptive schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Poles (or corner terms) per corner.
    pub per_corner: usize,
    /// Degree of each smooth block.
    pub smooth_degree: usize,
    /// Number of real unknowns.
    pub dof: usize,
    pub rows: usize,
    /// Max boundary error on the validation grid.
    pub error: f64,
}

/// Analytic model `F = sum of blocks`, fitted so that `Re F` matches boundary data.
#[derive(Debug, Clone)]
pub struct LightningModel {
    pub blocks: Vec<BasisBlock>,
    /// Complex coefficients, concatenated block by block.
    pub coeffs: Vec<Complex64>,
    /// `log rho` for doubly connected problems.
    pub modulus_coeff: Option<f64>,
    /// Subtracted from `Im F` so that `v` vanishes at `normalization_point`.
    pub normalization_shift: f64,
    pub normalization_point: NormalizationPoint,
    /// Max `|Re F - data|` on the validation grid.
    pub error: f64,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    /// Collocation points of the accepted fit.
    pub samples: BoundarySamples,
    /// Length scale used for pole-proximity checks.
    pub scale: f64,
}

impl LightningModel {
    /// Model that is identically zero.
    pub fn zero(samples: BoundarySamples, scale: f64) -> Self {
        LightningModel {
            blocks: vec![],
            coeffs: vec![],
            modulus_coeff: None,
            normalization_shift: 0.0,
            normalization_point: NormalizationPoint::Infinity,
            error: 0.0,
            converged: true,
            history: vec![],
            samples,
            scale,
        }
    }

    pub fn pole_sets(&self) -> impl Iterator<Item = (&PoleSet, &[Complex64])> {
        self.block_coeffs().filter_map(|(b, c)| match b {
            BasisBlock::Poles(p) => Some((p, c)),
            _ => None,
        })
    }

    pub fn smooth_parts(&self) -> impl Iterator<Item = (&OrthoBasis, &[Complex64])> {
        self.block_coeffs().filter_map(|(b, c)| match b {
            BasisBlock::Smooth { basis, .. } => Some((basis, c)),
            _ => None,
        })
    }

    pub fn corner_terms(&self) -> impl Iterator<Item = (&CornerBlock, &[Complex64])> {
        self.block_coeffs().filter_map(|(b, c)| match b {
            BasisBlock::Corner(k) => Some((k, c)),
            _ => None,
        })
    }

    fn block_coeffs(&self) -> impl Iterator<Item = (&BasisBlock, &[Complex64])> {
        let mut offset = 0;
        self.blocks.iter().map(move |b| {
            let c = &self.coeffs[offset..offset + b.len()];
            offset += b.len();
            (b, c)
        })
    }

    /// Every finite singularity of the model.
    pub fn singularities(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|b| b.singularities()).collect()
    }

    /// Number of complex basis functions actually in use.
    pub fn term_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                BasisBlock::Smooth {
                    constant: false,
                    basis,
                } => basis.degree(),
                other => other.len(),
            })
            .sum()
    }

    /// `F(z)` without the normalization shift.
    pub(crate) fn eval_raw(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); points.len()];
        let mut offset = 0;
        for b in &self.blocks {
            let w = b.len();
            let vals = b.eval(points)?;
            let c = &self.coeffs[offset..offset + w];
            for (i, o) in out.iter_mut().enumerate() {
                let row = &vals[i * w..(i + 1) * w];
                *o += row.iter().zip(c).map(|(x, y)| x * y).sum::<Complex64>();
            }
            offset += w;
        }
        Ok(out)
    }

    pub(crate) fn eval_raw_at_infinity(&self) -> Option<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        let mut offset = 0;
        for b in &self.blocks {
            let w = b.len();
            let vals = b.eval_at_infinity()?;
            total += vals
                .iter()
                .zip(&self.coeffs[offset..offset + w])
                .map(|(x, y)| x * y)
                .sum::<Complex64>();
            offset += w;
        }
        Some(total)
    }

    /// `F(z) = u + iv` with the normalization applied.
    pub fn eval_at_infinity(&self) -> Option<Complex64> {
        self.eval_raw_at_infinity()
            .map(|f| f - Complex64::new(0.0, self.normalization_shift))
    }
}

/// Evaluates `F(z) = u(z) + i v(z)` at each point.
///
/// Fails when a point lies within `1e-13 * scale` of a model singularity.
pub fn eval_model(model: &LightningModel, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let sing = model.singularities();
    let guard = 1e-13 * model.scale.max(f64::MIN_POSITIVE);
    for &p in z {
        if sing.iter().any(|&s| (p - s).norm() <= guard) {
            return Err(Error::PoleEvaluation(p));
        }
    }
    let shift = Complex64::new(0.0, model.normalization_shift);
    Ok(model.eval_raw(z)?.into_iter().map(|f| f - shift).collect())
}

/// Real and imaginary parts of a fitted model as harmonic functions.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicPair<'a> {
    pub model: &'a LightningModel,
}

impl<'a> HarmonicPair<'a> {
    pub fn new(model: &'a LightningModel) -> Self {
        HarmonicPair { model }
    }

    pub fn u(&self, z: Complex64) -> Result<f64> {
        Ok(eval_model(self.model, &[z])?[0].re)
    }

    pub fn v(&self, z: Complex64) -> Result<f64> {
        Ok(eval_model(self.model, &[z])?[0].im)
    }
}
