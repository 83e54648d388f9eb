//! Laplace Dirichlet solver with exponentially clustered poles.

mod model;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use model::{
    eval_model, BasisBlock, CornerBlock, HarmonicPair, IterationRecord, LightningModel,
    NormalizationPoint,
};

use crate::basis::{arnoldi_build, solve_ls, ColumnRole, LeastSquaresSystem, PowerSign};
use crate::error::{Error, Result};
use crate::geometry::{
    sample_boundary, validation_points, Anchor, ArcKind, BoundarySamples, Connectivity, Corner,
    Region,
};

pub const CLUSTERING_SIGMA: f64 = 4.0;

/// Default cap on the number of real unknowns.
pub const MAX_DOF: usize = 4000;

/// Boundary data `u(z)` given the point and its curve tag.
pub type BoundaryData<'a> = &'a dyn Fn(Complex64, usize) -> f64;

/// Poles clustered on the exterior bisector of one corner.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    /// Index of the corner in [`Region::corners`] order.
    pub corner: usize,
    pub vertex: Complex64,
    pub direction: Complex64,
    pub poles: Vec<Complex64>,
    /// `|pole - vertex|`, increasing.
    pub distances: Vec<f64>,
}

/// `n` poles at `vertex + d_j * bisector`, `d_j = L exp(-sigma (sqrt n - sqrt j))`.
pub fn place_poles(corner: &Corner, n: usize, scale: f64) -> PoleSet {
    let sn = (n as f64).sqrt();
    let distances: Vec<f64> = (1..=n)
        .map(|j| scale * (-CLUSTERING_SIGMA * (sn - (j as f64).sqrt())).exp())
        .filter(|&d| d <= scale)
        .collect();
    let poles = distances
        .iter()
        .map(|&d| corner.vertex + corner.exterior_bisector * d)
        .collect();
    PoleSet {
        corner: 0,
        vertex: corner.vertex,
        direction: corner.exterior_bisector,
        poles,
        distances,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Smooth (Arnoldi) blocks only.
    Polynomial,
    /// Clustered poles at every corner plus smooth blocks.
    Lightning,
    /// Fractional powers at every corner plus smooth blocks.
    CornerBasis,
}

#[derive(Debug, Clone, Copy)]
pub struct DirichletOptions {
    pub tol: f64,
    pub method: Method,
    pub max_dof: usize,
}

impl Default for DirichletOptions {
    fn default() -> Self {
        DirichletOptions {
            tol: 1e-6,
            method: Method::Lightning,
            max_dof: MAX_DOF,
        }
    }
}

/// Lightning solve of `u = data` on the boundary of `region`.
pub fn solve_dirichlet(region: &Region, data: BoundaryData, tol: f64) -> Result<LightningModel> {
    solve_dirichlet_with(
        region,
        data,
        &DirichletOptions {
            tol,
            ..Default::default()
        },
    )
}

/// Same as [`solve_dirichlet`] with fractional-power corner terms instead of poles.
pub fn corner_basis_model(region: &Region, data: BoundaryData, tol: f64) -> Result<LightningModel> {
    solve_dirichlet_with(
        region,
        data,
        &DirichletOptions {
            tol,
            method: Method::CornerBasis,
            ..Default::default()
        },
    )
}

pub fn solve_dirichlet_with(
    region: &Region,
    data: BoundaryData,
    opts: &DirichletOptions,
) -> Result<LightningModel> {
    if !(1e-12..=1e-1).contains(&opts.tol) {
        return Err(Error::InvalidOption(format!(
            "tol {} outside [1e-12, 1e-1]",
            opts.tol
        )));
    }
    if opts.method == Method::CornerBasis {
        let smooth = region
            .chains
            .iter()
            .flat_map(|c| c.arcs.iter())
            .any(|a| matches!(a.kind, ArcKind::Parametric { .. }));
        if smooth {
            return Err(Error::UnsupportedRegion(
                "corner terms need a polygon or circular polygon".into(),
            ));
        }
    }

    let mut best: Option<LightningModel> = None;
    let mut history: Vec<IterationRecord> = Vec::new();
    for step in 0.. {
        let plan = Plan::at(opts.method, step);
        let candidate = match build_candidate(region, data, &plan)? {
            Some(c) => c,
            None => break,
        };
        if candidate.dof > opts.max_dof {
            break;
        }
        let model = fit(region, data, candidate)?;
        history.push(*model.history.last().unwrap());
        let err = model.error;
        if best.as_ref().is_none_or(|b| err < b.error) {
            best = Some(model);
        }
        if err <= opts.tol {
            break;
        }
        let k = history.len();
        if k >= 3 && history[k - 1].error > 0.5 * history[k - 3].error {
            break;
        }
    }
    let mut model = best
        .ok_or_else(|| Error::InvalidOption("degree budget too small for a single solve".into()))?;
    model.converged = model.error <= opts.tol;
    model.history = history;
    Ok(model)
}

/// Sizes used at one step of the adaptive schedule.
#[derive(Debug, Clone, Copy)]
struct Plan {
    method: Method,
    /// Poles or corner terms per corner.
    per_corner: usize,
    smooth_degree: usize,
    /// Basis size passed to the sampler.
    sample_n: usize,
}

impl Plan {
    fn at(method: Method, step: usize) -> Plan {
        let k = step as f64;
        match method {
            Method::Polynomial => {
                let n = (2f64.powf(4.0 + k / 2.0)).round() as usize;
                Plan {
                    method,
                    per_corner: 0,
                    smooth_degree: n,
                    sample_n: n,
                }
            }
            Method::Lightning => {
                let n1 = (2f64.powf(2.0 + k / 2.0)).round() as usize;
                Plan {
                    method,
                    per_corner: n1,
                    smooth_degree: n1.div_ceil(2),
                    sample_n: n1,
                }
            }
            Method::CornerBasis => {
                let kk = 2 * (step + 1);
                Plan {
                    method,
                    per_corner: kk,
                    smooth_degree: 2 * kk,
                    sample_n: 2 * kk,
                }
            }
        }
    }
}

struct Candidate {
    blocks: Vec<BasisBlock>,
    samples: BoundarySamples,
    plan: Plan,
    dof: usize,
    modulus: bool,
}

/// Whether `1/alpha` is an integer, so the corner expansion is analytic.
fn analytic_corner(alpha: f64) -> bool {
    let p = 1.0 / alpha;
    (p - p.round()).abs() < 1e-8
}

fn build_candidate(region: &Region, data: BoundaryData, plan: &Plan) -> Result<Option<Candidate>> {
    let corners: Vec<&Corner> = region.corners().collect();
    let mut blocks = Vec::new();
    let mut pole_dists: Vec<Vec<f64>> = Vec::new();
    if plan.method == Method::Lightning {
        for (k, c) in corners.iter().enumerate() {
            let mut set = PoleSet {
                corner: k,
                ..place_poles(c, plan.per_corner, c.local_scale)
            };
            // Keep only poles off the closed domain and resolvable from the vertex.
            let floor = 1e-12 * region.diameter();
            let keep: Vec<bool> = set
                .poles
                .iter()
                .zip(&set.distances)
                .map(|(&p, &d)| {
                    d >= floor && !region.contains(p) && region.distance_to_boundary(p) > 1e-3 * d
                })
                .collect();
            let mut it = keep.iter();
            set.poles.retain(|_| *it.next().unwrap());
            let mut it = keep.iter();
            set.distances.retain(|_| *it.next().unwrap());
            pole_dists.push(set.distances.clone());
            if !set.poles.is_empty() {
                blocks.push(BasisBlock::Poles(set));
            }
        }
    }
    let samples = sample_boundary(
        region,
        plan.sample_n,
        (plan.method == Method::Lightning).then_some(pole_dists.as_slice()),
    )?
    .with_data(data);

    if plan.method == Method::CornerBasis {
        for c in &corners {
            if analytic_corner(c.alpha) {
                continue;
            }
            blocks.push(BasisBlock::Corner(CornerBlock {
                vertex: c.vertex,
                alpha: c.alpha,
                bisector: c.exterior_bisector,
                scale: c.local_scale,
                terms: plan.per_corner,
            }));
        }
    }

    let nodes = &samples.points;
    let w = &samples.weights;
    let deg = plan.smooth_degree.min(nodes.len().saturating_sub(1));
    let zero = Complex64::new(0.0, 0.0);
    let smooth: Vec<(Complex64, PowerSign)> = match (region.connectivity, region.anchor) {
        (Connectivity::Simply, _) if region.target.exterior_source() => {
            vec![(zero, PowerSign::Negative)]
        }
        (Connectivity::Simply, Anchor::Point(a)) => vec![(a, PowerSign::Positive)],
        (Connectivity::Annular, Anchor::Point(a)) => {
            vec![(a, PowerSign::Positive), (a, PowerSign::Negative)]
        }
        (_, Anchor::Pair(q1, q2)) => vec![(q1, PowerSign::Negative), (q2, PowerSign::Negative)],
        (_, Anchor::Point(a)) => vec![(a, PowerSign::Positive)],
    };
    for (i, (center, sign)) in smooth.into_iter().enumerate() {
        let basis = arnoldi_build(nodes, w, deg, center, sign)?;
        blocks.push(BasisBlock::Smooth {
            basis,
            constant: i == 0,
        });
    }

    let modulus = region.connectivity != Connectivity::Simply;
    let dof = blocks
        .iter()
        .map(|b| match b {
            BasisBlock::Smooth { basis, constant } => 2 * basis.degree() + usize::from(*constant),
            other => 2 * other.len(),
        })
        .sum::<usize>()
        + usize::from(modulus);
    if dof >= samples.len() {
        return Ok(None);
    }
    Ok(Some(Candidate {
        blocks,
        samples,
        plan: *plan,
        dof,
        modulus,
    }))
}

fn fit(region: &Region, data: BoundaryData, cand: Candidate) -> Result<LightningModel> {
    let Candidate {
        blocks,
        samples,
        plan,
        dof,
        modulus,
    } = cand;
    let m = samples.len();
    let mut matrix = DMatrix::<f64>::zeros(m, dof);
    let mut column_map = Vec::with_capacity(dof);
    let mut col = 0;
    for (bi, b) in blocks.iter().enumerate() {
        let width = b.len();
        let vals = b.eval(&samples.points)?;
        let skip_const = matches!(
            b,
            BasisBlock::Smooth {
                constant: false,
                ..
            }
        );
        let real_only_const = matches!(b, BasisBlock::Smooth { constant: true, .. });
        for k in 0..width {
            if k == 0 && skip_const {
                continue;
            }
            for i in 0..m {
                matrix[(i, col)] = samples.weights[i] * vals[i * width + k].re;
            }
            column_map.push(ColumnRole::Real {
                block: bi,
                index: k,
            });
            col += 1;
            if k == 0 && real_only_const {
                continue;
            }
            for i in 0..m {
                matrix[(i, col)] = -samples.weights[i] * vals[i * width + k].im;
            }
            column_map.push(ColumnRole::Imag {
                block: bi,
                index: k,
            });
            col += 1;
        }
    }
    if modulus {
        for i in 0..m {
            if samples.curve_tag[i] == 1 {
                matrix[(i, col)] = samples.weights[i];
            }
        }
        column_map.push(ColumnRole::Modulus);
        col += 1;
    }
    debug_assert_eq!(col, dof);
    let rhs = DVector::from_fn(m, |i, _| samples.weights[i] * samples.data[i]);
    let system = LeastSquaresSystem {
        matrix,
        rhs,
        column_map,
    };
    let sol = solve_ls(&system)?;

    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, b| {
            let o = *acc;
            *acc += b.len();
            Some(o)
        })
        .collect();
    let total: usize = blocks.iter().map(BasisBlock::len).sum();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); total];
    let mut shift = 0.0;
    for (role, &x) in system.column_map.iter().zip(sol.coeffs.iter()) {
        match *role {
            ColumnRole::Real { block, index } => coeffs[offsets[block] + index].re = x,
            ColumnRole::Imag { block, index } => coeffs[offsets[block] + index].im = x,
            ColumnRole::Modulus => shift = x,
        }
    }

    let scale = region.diameter();
    let mut model = LightningModel::zero(samples, scale);
    model.blocks = blocks;
    model.coeffs = coeffs;
    // The unknown is -log rho.
    model.modulus_coeff = modulus.then_some(-shift);

    model.normalization_point = match (region.connectivity, region.anchor) {
        (Connectivity::Simply, _) if region.target.exterior_source() => {
            NormalizationPoint::Infinity
        }
        (Connectivity::Simply, Anchor::Point(a)) => NormalizationPoint::Finite(a),
        _ => NormalizationPoint::Finite(model.samples.points[0]),
    };
    model.normalization_shift = match model.normalization_point {
        NormalizationPoint::Finite(z) => model.eval_raw(&[z])?[0].im,
        NormalizationPoint::Infinity => {
            model
                .eval_raw_at_infinity()
                .ok_or_else(|| Error::Normalization("model is unbounded at infinity".into()))?
                .im
        }
    };

    let val = validation_points(region, &model.samples)?.with_data(data);
    model.error = boundary_error(&model, &val)?;
    model.converged = false;
    model.history = vec![IterationRecord {
        per_corner: plan.per_corner,
        smooth_degree: plan.smooth_degree,
        dof,
        rows: m,
        error: model.error,
    }];
    Ok(model)
}

/// Max of `|Re F + [tag 1] * (-log rho) - data|` over `samples`.
pub fn boundary_error(model: &LightningModel, samples: &BoundarySamples) -> Result<f64> {
    let f = model.eval_raw(&samples.points)?;
    let lr = model.modulus_coeff.unwrap_or(0.0);
    Ok(f.iter()
        .zip(&samples.data)
        .zip(&samples.curve_tag)
        .map(|((f, d), &t)| {
            let shift = if t == 1 { -lr } else { 0.0 };
            (f.re + shift - d).abs()
        })
        .fold(0.0, f64::max))
}
