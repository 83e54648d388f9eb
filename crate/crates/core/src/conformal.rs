//! Conformal maps to disks and annuli, compressed by AAA.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aaa::{
    aaa_fit, aaa_fit_with, bary_eval, is_infinite, poles_residues_zeros, BarycentricRational,
    DEFAULT_MMAX,
};
use crate::error::{Error, Result};
use crate::geometry::{
    sample_boundary, validation_points, Connectivity, Region, RegionDocument, Target,
};
use crate::lightning::{
    eval_model, solve_dirichlet_with, DirichletOptions, IterationRecord, LightningModel, Method,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapMethod {
    Auto,
    Polynomial,
    Lightning,
    CornerBasis,
}

impl MapMethod {
    pub fn name(self) -> &'static str {
        match self {
            MapMethod::Auto => "auto",
            MapMethod::Polynomial => "polynomial",
            MapMethod::Lightning => "lightning",
            MapMethod::CornerBasis => "corner-basis",
        }
    }
}

impl fmt::Display for MapMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MapMethod::Auto),
            "polynomial" => Ok(MapMethod::Polynomial),
            "lightning" => Ok(MapMethod::Lightning),
            "corner-basis" | "corner_basis" => Ok(MapMethod::CornerBasis),
            other => Err(Error::InvalidOption(format!(
                "method: unknown value `{other}`, expected auto, polynomial, lightning or corner-basis"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MapOptions {
    pub tol: f64,
    pub method: MapMethod,
    /// Overrides the target stored in the region document.
    pub target: Option<Target>,
    pub aaa_mmax: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            tol: 1e-6,
            method: MapMethod::Auto,
            target: None,
            aaa_mmax: DEFAULT_MMAX,
        }
    }
}

/// Wall-clock seconds per stage; never written to artifacts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub solve: f64,
    pub forward_fit: f64,
    pub inverse_fit: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Max `|Re F - data|` of the Dirichlet solve on its validation grid.
    pub dirichlet_error: f64,
    pub dirichlet_converged: bool,
    pub dirichlet_dof: usize,
    pub schedule: Vec<IterationRecord>,
    pub forward_fit_error: f64,
    pub inverse_fit_error: f64,
    pub forward_converged: bool,
    pub inverse_converged: bool,
    /// Boundary images wind once around the origin, monotonically.
    pub univalent: bool,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalMap {
    pub target: Target,
    pub method: MapMethod,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<f64>,
    pub forward: BarycentricRational,
    pub inverse: BarycentricRational,
    /// Max deviation of `|forward|` from the target radius on validation points.
    pub boundary_error: f64,
    pub degrees: (usize, usize),
    pub converged: bool,
    /// Image of the point at infinity (disjoint pairs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_of_infinity: Option<Complex64>,
    pub diagnostics: Diagnostics,
    /// Originating region document.
    pub region: serde_json::Value,
}

impl ConformalMap {
    pub fn forward_at(&self, z: &[Complex64]) -> Vec<Complex64> {
        bary_eval(&self.forward, z)
    }

    pub fn inverse_at(&self, w: &[Complex64]) -> Vec<Complex64> {
        bary_eval(&self.inverse, w)
    }

    /// Rebuilds the source region from the stored document.
    pub fn source_region(&self) -> Result<Region> {
        let doc: RegionDocument = serde_json::from_value(self.region.clone())
            .map_err(|e| Error::Artifact(format!("region: {e}")))?;
        Region::from_spec(&doc.shape, Some(self.target))
    }

    /// Radius of the target circle that the boundary curve `tag` maps to.
    pub fn target_radius(&self, tag: usize) -> f64 {
        match (tag, self.modulus) {
            (1, Some(rho)) => rho,
            _ => 1.0,
        }
    }
}

fn dirichlet_method(region: &Region, method: MapMethod) -> (MapMethod, Method) {
    match method {
        MapMethod::Auto if region.corner_count() > 0 => (MapMethod::Lightning, Method::Lightning),
        MapMethod::Auto => (MapMethod::Polynomial, Method::Polynomial),
        MapMethod::Polynomial => (method, Method::Polynomial),
        MapMethod::Lightning => (method, Method::Lightning),
        MapMethod::CornerBasis => (method, Method::CornerBasis),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-12..=1e-1).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidOption(format!(
            "tol {tol} outside [1e-12, 1e-1]"
        )))
    }
}

/// Maps a simply connected region to the unit disk (or its exterior).
pub fn map_disk(region: &Region, opts: &MapOptions) -> Result<ConformalMap> {
    if region.connectivity != Connectivity::Simply {
        return Err(Error::UnsupportedRegion(
            "map_disk needs a simply connected region".into(),
        ));
    }
    build_map(region, opts)
}

/// Maps an annular or disjoint-pair region to `rho < |w| < 1`.
pub fn map_annulus(region: &Region, opts: &MapOptions) -> Result<ConformalMap> {
    if region.connectivity == Connectivity::Simply {
        return Err(Error::UnsupportedRegion(
            "map_annulus needs a doubly connected region".into(),
        ));
    }
    build_map(region, opts)
}

/// Dispatches on the connectivity of `region`.
pub fn map_region(region: &Region, opts: &MapOptions) -> Result<ConformalMap> {
    match region.connectivity {
        Connectivity::Simply => map_disk(region, opts),
        _ => map_annulus(region, opts),
    }
}

/// Parses a region document, applying `opts.target`, and maps it.
pub fn map_document(text: &str, opts: &MapOptions) -> Result<(Region, ConformalMap)> {
    let doc: RegionDocument = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    let target = match (opts.target, &doc.target) {
        (Some(t), _) => Some(t),
        (None, Some(t)) => Some(t.parse()?),
        (None, None) => None,
    };
    let region = Region::from_spec(&doc.shape, target)?;
    let mut map = map_region(&region, opts)?;
    map.region = serde_json::from_str(text)?;
    Ok((region, map))
}

fn build_map(region: &Region, opts: &MapOptions) -> Result<ConformalMap> {
    check_tol(opts.tol)?;
    let start = Instant::now();
    let (method, dm) = dirichlet_method(region, opts.method);
    let data = |z: Complex64, _: usize| region.log_data(z);
    let model = solve_dirichlet_with(
        region,
        &data,
        &DirichletOptions {
            tol: opts.tol,
            method: dm,
            ..Default::default()
        },
    )?;
    let solve_time = start.elapsed().as_secs_f64();

    let modulus = match model.modulus_coeff {
        Some(lr) => {
            let rho = lr.exp();
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::InvalidModulus(rho));
            }
            Some(rho)
        }
        None => None,
    };
    let reciprocal = matches!(
        region.target,
        Target::InteriorExterior | Target::ExteriorDisk
    );
    let image = |z: Complex64, f: Complex64| {
        let w = region.factor(z) * f.exp();
        if reciprocal {
            w.inv()
        } else {
            w
        }
    };

    let zs: Vec<Complex64> = model.samples.points.clone();
    let fz = eval_model(&model, &zs)?;
    let ws: Vec<Complex64> = zs.iter().zip(&fz).map(|(&z, &f)| image(z, f)).collect();
    let univalent = winds_once(region, &model, &ws, opts.tol);
    // Nearly coincident pairs add nothing at accuracy tol and make the fits
    // ill-posed. The inverse data is far more crowded near corners.
    let gz = opts.tol * region.diameter();
    let (mut zf, mut wf) = thin_pairs(&zs, &ws, gz, opts.tol, false);
    let (mut wi, mut zi) = thin_pairs(&ws, &zs, opts.tol, gz, true);

    // The anchor of an interior disk map is an exact support: f(a) = 0.
    let (mut ff, mut fi) = (vec![], vec![]);
    if region.target == Target::InteriorDisk {
        let a = region.singular_points()[0];
        let zero = Complex64::new(0.0, 0.0);
        zf.push(a);
        wf.push(zero);
        ff.push(zf.len() - 1);
        wi.push(zero);
        zi.push(a);
        fi.push(wi.len() - 1);
    }
    let t0 = Instant::now();
    let fwd = aaa_fit_with(&zf, &wf, opts.tol, opts.aaa_mmax, &ff)?;
    let t1 = Instant::now();
    let inv = aaa_fit_with(&wi, &zi, opts.tol, opts.aaa_mmax, &fi)?;
    let t2 = Instant::now();

    let image_of_infinity = if region.connectivity == Connectivity::DisjointPair {
        model.eval_at_infinity().map(|f| f.exp())
    } else {
        None
    };

    let val = validation_points(region, &model.samples)?;
    let wv = bary_eval(&fwd.rational, &val.points);
    let boundary_error = wv
        .iter()
        .zip(&val.curve_tag)
        .map(|(w, &t)| {
            let r = if t == 1 { modulus.unwrap_or(1.0) } else { 1.0 };
            (w.norm() - r).abs()
        })
        .fold(0.0, f64::max);

    let mut notes = Vec::new();
    if !model.converged {
        notes.push(format!(
            "Dirichlet solve stopped at error {:.2e} > tol {:.1e} after {} refinements",
            model.error,
            opts.tol,
            model.history.len()
        ));
        if dm == Method::Polynomial {
            notes.push(
                "polynomial expansions suffer from crowding on elongated or deeply \
                 indented regions; the degree needed grows exponentially with the \
                 aspect ratio, so a polynomial of degree in the tens of thousands may \
                 be required"
                    .into(),
            );
        }
    }
    if !univalent {
        notes.push("boundary image does not wind once monotonically: map is not univalent".into());
    }
    if !fwd.converged || !inv.converged {
        notes.push(format!(
            "AAA reached degree {} without meeting tol",
            opts.aaa_mmax
        ));
    }

    let doc = RegionDocument {
        shape: region.spec.clone(),
        target: Some(region.target.name().to_string()),
    };
    let converged = model.converged && fwd.converged && inv.converged && univalent;
    Ok(ConformalMap {
        target: region.target,
        method,
        tol: opts.tol,
        modulus,
        degrees: (fwd.rational.degree(), inv.rational.degree()),
        forward: fwd.rational,
        inverse: inv.rational,
        boundary_error,
        converged,
        image_of_infinity,
        diagnostics: Diagnostics {
            dirichlet_error: model.error,
            dirichlet_converged: model.converged,
            dirichlet_dof: model.history.iter().map(|h| h.dof).max().unwrap_or(0),
            schedule: model.history.clone(),
            forward_fit_error: fwd.error,
            inverse_fit_error: inv.error,
            forward_converged: fwd.converged,
            inverse_converged: inv.converged,
            univalent,
            notes,
            timings: Timings {
                solve: solve_time,
                forward_fit: (t1 - t0).as_secs_f64(),
                inverse_fit: (t2 - t1).as_secs_f64(),
                total: start.elapsed().as_secs_f64(),
            },
        },
        region: serde_json::to_value(doc)?,
    })
}

/// Drops boundary pairs too close to the last kept one. With `both`, a pair
/// is kept only if input and output moved by their gaps; otherwise either suffices.
fn thin_pairs(
    input: &[Complex64],
    output: &[Complex64],
    gap_in: f64,
    gap_out: f64,
    both: bool,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut a: Vec<Complex64> = Vec::with_capacity(input.len());
    let mut b: Vec<Complex64> = Vec::with_capacity(output.len());
    for (&x, &y) in input.iter().zip(output) {
        let far = match (a.last(), b.last()) {
            (Some(&p), Some(&q)) => {
                let (mi, mo) = ((x - p).norm() >= gap_in, (y - q).norm() >= gap_out);
                if both {
                    mi && mo
                } else {
                    mi || mo
                }
            }
            _ => true,
        };
        if far {
            a.push(x);
            b.push(y);
        }
    }
    (a, b)
}

/// Checks that each boundary curve's image turns around 0 once, monotonically.
fn winds_once(region: &Region, model: &LightningModel, w: &[Complex64], tol: f64) -> bool {
    let slack = 10.0 * (model.error + tol);
    for tag in 0..region.chains.len() {
        let sign = match (region.connectivity, tag) {
            (Connectivity::Simply, _) if region.target.exterior_image() => -1.0,
            (Connectivity::Simply, _) => 1.0,
            (_, 0) => 1.0,
            _ => -1.0,
        };
        let pts: Vec<Complex64> = w
            .iter()
            .zip(&model.samples.curve_tag)
            .filter(|(_, &t)| t == tag)
            .map(|(w, _)| *w)
            .collect();
        if pts.iter().any(|p| p.norm() == 0.0 || is_infinite(*p)) {
            return false;
        }
        let mut total = 0.0;
        for i in 0..pts.len() {
            let step = (pts[(i + 1) % pts.len()] / pts[i]).arg();
            if sign * step < -slack {
                return false;
            }
            total += step;
        }
        if (total - sign * TAU).abs() > 0.1 {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Max `||f(z)| - radius|` on a fresh boundary grid.
    pub boundary_error: f64,
    /// Max `|f^{-1}(f(z)) - z|` over the interior test points.
    pub round_trip_error: f64,
    pub test_points: usize,
    /// Forward poles in the closed source domain (legitimate ones excluded).
    pub forward_pole_violations: Vec<Complex64>,
    /// Inverse poles in the closed target (legitimate ones excluded).
    pub inverse_pole_violations: Vec<Complex64>,
    /// Inverse poles in the open target, legitimate or not.
    pub inverse_poles_in_target: usize,
    /// `|f(a)|` at the anchor of an interior disk map.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor_value: Option<f64>,
    /// `arg f'(a)` from centered differences.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor_derivative_arg: Option<f64>,
    pub flags: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Points of `region` drawn uniformly from (a padded) bounding box.
pub fn interior_points(region: &Region, n: usize, seed: u64) -> Vec<Complex64> {
    let (lo, hi) = region.bounding_box();
    let (lo, hi) =
        if region.target.exterior_source() || region.connectivity == Connectivity::DisjointPair {
            let c = (lo + hi) / 2.0;
            (c + (lo - c) * 2.0, c + (hi - c) * 2.0)
        } else {
            (lo, hi)
        };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let z = Complex64::new(
            rng.random_range(lo.re..hi.re),
            rng.random_range(lo.im..hi.im),
        );
        if region.contains(z) {
            out.push(z);
        }
    }
    out
}

/// Boundary, round-trip, pole and normalization checks of a map.
pub fn verify_map(
    map: &ConformalMap,
    region: &Region,
    n_test: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let mut flags = Vec::new();
    let grid = validation_points(region, &sample_boundary(region, 41, None)?)?;
    let fb = map.forward_at(&grid.points);
    let boundary_error = fb
        .iter()
        .zip(&grid.curve_tag)
        .map(|(w, &t)| (w.norm() - map.target_radius(t)).abs())
        .fold(0.0, f64::max);
    if !(boundary_error <= 10.0 * map.tol) {
        flags.push(format!(
            "boundary modulus error {boundary_error:.2e} exceeds 10*tol"
        ));
    }

    let pts = interior_points(region, n_test, seed);
    let round_trip_error = pts
        .iter()
        .map(|&z| {
            let back = map.inverse.eval(map.forward.eval(z));
            (back - z).norm()
        })
        .fold(
            0.0,
            |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) },
        );
    if !(round_trip_error <= 100.0 * map.tol) {
        flags.push(format!(
            "round-trip error {round_trip_error:.2e} exceeds 100*tol"
        ));
    }

    // Poles within the fit accuracy of a boundary belong to its branch points.
    let slack = 100.0 * map.tol;
    // When infinity maps to infinity, a pole this far out stands in for the one there.
    let far = |p: Complex64, size: f64| {
        map.target == Target::ExteriorExterior && p.norm() > size / map.tol
    };
    let diam = region.diameter();
    let fp = poles_residues_zeros(&map.forward).poles;
    let anchor = region.singular_points()[0];
    let forward_pole_violations: Vec<Complex64> = fp
        .into_iter()
        .filter(|&p| region.contains(p) && region.distance_to_boundary(p) > slack * diam)
        .filter(|&p| !far(p, diam))
        .filter(|&p| {
            !(map.target == Target::InteriorExterior && (p - anchor).norm() <= 1e-4 * diam)
        })
        .collect();

    let rho = map.modulus.unwrap_or(0.0);
    let ip = poles_residues_zeros(&map.inverse).poles;
    let in_closed = |p: Complex64| {
        let r = p.norm();
        if map.target == Target::Annulus {
            r >= rho + slack && r <= 1.0 - slack
        } else if map.target.exterior_image() {
            r >= 1.0 + slack
        } else {
            r <= 1.0 - slack
        }
    };
    let in_open = |p: Complex64| {
        let r = p.norm();
        if map.target == Target::Annulus {
            r > rho && r < 1.0
        } else if map.target.exterior_image() {
            r > 1.0
        } else {
            r < 1.0
        }
    };
    let inverse_poles_in_target = ip.iter().filter(|&&p| in_open(p)).count();
    let mut exempt: Vec<Complex64> = Vec::new();
    if map.target == Target::ExteriorDisk {
        exempt.push(Complex64::new(0.0, 0.0));
    }
    if let Some(q) = map.image_of_infinity {
        exempt.push(q);
    }
    let mut inverse_pole_violations = Vec::new();
    for p in ip.into_iter().filter(|&p| in_closed(p) && !far(p, 1.0)) {
        if let Some(k) = exempt.iter().position(|&e| (p - e).norm() <= 1e-4) {
            exempt.remove(k);
        } else {
            inverse_pole_violations.push(p);
        }
    }
    if !forward_pole_violations.is_empty() {
        flags.push(format!(
            "{} forward-map poles lie in the closed domain",
            forward_pole_violations.len()
        ));
    }
    if !inverse_pole_violations.is_empty() {
        flags.push(format!(
            "{} inverse-map poles lie in the closed target",
            inverse_pole_violations.len()
        ));
    }

    let (anchor_value, anchor_derivative_arg) = if map.target == Target::InteriorDisk {
        let h = 1e-4 * diam;
        let f = |t: f64| map.forward.eval(anchor + t);
        let d = ((f(h) - f(-h)) * 8.0 - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
        let v = map.forward.eval(anchor).norm();
        if !(v <= 1e-10) {
            flags.push(format!("|f(anchor)| = {v:.2e}"));
        }
        if !(d.arg().abs() <= 1e-6f64.max(10.0 * map.tol)) {
            flags.push(format!("arg f'(anchor) = {:.2e}", d.arg()));
        }
        (Some(v), Some(d.arg()))
    } else {
        (None, None)
    };

    Ok(VerifyReport {
        boundary_error,
        round_trip_error,
        test_points: pts.len(),
        forward_pole_violations,
        inverse_pole_violations,
        inverse_poles_in_target,
        anchor_value,
        anchor_derivative_arg,
        flags,
    })
}

/// Serializes a map with full-precision floats.
pub fn artifact_to_string(map: &ConformalMap) -> Result<String> {
    Ok(serde_json::to_string_pretty(map)? + "\n")
}

pub fn artifact_from_str(text: &str) -> Result<ConformalMap> {
    let map: ConformalMap =
        serde_json::from_str(text).map_err(|e| Error::Artifact(e.to_string()))?;
    for r in [&map.forward, &map.inverse] {
        if r.support.is_empty()
            || r.support.len() != r.values.len()
            || r.support.len() != r.weights.len()
        {
            return Err(Error::Artifact(
                "support, values and weights must have equal nonzero length".into(),
            ));
        }
    }
    Ok(map)
}

pub fn write_artifact(map: &ConformalMap, path: &Path) -> Result<()> {
    std::fs::write(path, artifact_to_string(map)?)?;
    Ok(())
}

pub fn read_artifact(path: &Path) -> Result<ConformalMap> {
    artifact_from_str(&std::fs::read_to_string(path)?)
}

/// Plain AAA fit of a map's boundary correspondence, exposed for reuse.
pub fn fit_boundary_pairs(
    z: &[Complex64],
    w: &[Complex64],
    tol: f64,
    mmax: usize,
) -> Result<(BarycentricRational, BarycentricRational)> {
    Ok((
        aaa_fit(z, w, tol, mmax)?.rational,
        aaa_fit(w, z, tol, mmax)?.rational,
    ))
}
