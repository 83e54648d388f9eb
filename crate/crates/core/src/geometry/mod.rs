//! Boundary geometry: arcs, corners, regions, and collocation sampling.
//!
//! Every chain is stored with the domain on its left. Interior targets give a
//! counterclockwise outer chain, exterior targets and holes run clockwise, so
//! "to the right of the boundary" always means "outside the domain".

mod arc;
mod sample;
mod spec;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc as Shared;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use arc::{Arc, ArcKind, TrigCurve};
pub use sample::{sample_boundary, validation_points, BoundarySamples};
pub use spec::{RegionDocument, RegionSpec, SideSpec};

pub(crate) use arc::cross;

use crate::error::{Error, Result};

/// Turning angles below this are treated as smooth joins.
const CORNER_TURN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "disk")]
    InteriorDisk,
    #[serde(rename = "int-ext")]
    InteriorExterior,
    #[serde(rename = "ext-ext")]
    ExteriorExterior,
    #[serde(rename = "ext-disk")]
    ExteriorDisk,
    #[serde(rename = "annulus")]
    Annulus,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::InteriorDisk => "disk",
            Target::InteriorExterior => "int-ext",
            Target::ExteriorExterior => "ext-ext",
            Target::ExteriorDisk => "ext-disk",
            Target::Annulus => "annulus",
        }
    }

    /// True when the source domain is the unbounded exterior of the curve.
    pub fn exterior_source(self) -> bool {
        matches!(self, Target::ExteriorExterior | Target::ExteriorDisk)
    }

    /// True when the image is the exterior of the unit circle.
    pub fn exterior_image(self) -> bool {
        matches!(self, Target::InteriorExterior | Target::ExteriorExterior)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(Target::InteriorDisk),
            "int-ext" => Ok(Target::InteriorExterior),
            "ext-ext" => Ok(Target::ExteriorExterior),
            "ext-disk" => Ok(Target::ExteriorDisk),
            "annulus" => Ok(Target::Annulus),
            other => Err(Error::Spec(format!(
                "target: unknown value `{other}`, expected one of disk, int-ext, ext-ext, ext-disk, annulus"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    Simply,
    Annular,
    DisjointPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub vertex: Complex64,
    /// Interior angle as a multiple of pi, measured inside the domain.
    pub alpha: f64,
    /// Unit direction bisecting the exterior angle, pointing out of the domain.
    pub exterior_bisector: Complex64,
    pub chain: usize,
    /// Index of the arc that starts at this vertex.
    pub arc: usize,
    /// Half the shorter of the two adjacent arc lengths.
    pub local_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Chain {
    pub arcs: Vec<Arc>,
    pub corners: Vec<Corner>,
    /// Counterclockwise (positive signed area).
    pub ccw: bool,
}

impl Chain {
    pub fn length(&self) -> f64 {
        self.arcs.iter().map(Arc::length).sum()
    }

    pub fn signed_area(&self) -> f64 {
        self.arcs.iter().map(Arc::area_term).sum()
    }

    pub fn winding(&self, z: Complex64) -> f64 {
        self.arcs.iter().map(|a| a.angle_change(z)).sum::<f64>() / (2.0 * PI)
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        self.arcs
            .iter()
            .map(|a| a.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed polyline (first point repeated at the end).
    pub fn polyline(&self, pieces_per_arc: usize) -> Vec<Complex64> {
        let mut pts = Vec::new();
        for a in &self.arcs {
            let pieces = match a.kind {
                ArcKind::Segment => 1,
                ArcKind::Circular { .. } => pieces_per_arc.max(1),
                ArcKind::Parametric { .. } => 4 * pieces_per_arc.max(1),
            };
            let line = a.polyline(pieces);
            pts.extend_from_slice(&line[..line.len() - 1]);
        }
        pts.push(self.arcs[0].start);
        pts
    }

    fn reversed(&self) -> Vec<Arc> {
        self.arcs.iter().rev().map(Arc::reversed).collect()
    }

    /// Area centroid of the polyline approximation.
    fn centroid(&self) -> Complex64 {
        let pts = self.polyline(64);
        let mut area = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for w in pts.windows(2) {
            let a = cross(w[0], w[1]);
            area += a;
            acc += (w[0] + w[1]) * a;
        }
        acc / (3.0 * area)
    }
}

/// Points that carry the logarithmic factor of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// `f = (z - a) e^g`.
    Point(Complex64),
    /// `f = (z - q2)/(z - q1) e^g` with `q1` inside the first curve and `q2` inside the second.
    Pair(Complex64, Complex64),
}

#[derive(Debug, Clone)]
pub struct Region {
    pub chains: Vec<Chain>,
    pub connectivity: Connectivity,
    pub target: Target,
    pub contains_origin: bool,
    pub anchor: Anchor,
    pub spec: RegionSpec,
}

/// Parses a region document (JSON) into a validated region.
pub fn parse_region(text: &str) -> Result<Region> {
    let doc: RegionDocument = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    let target = match &doc.target {
        Some(t) => Some(t.parse::<Target>()?),
        None => None,
    };
    Region::from_spec(&doc.shape, target)
}

/// Exterior bisector of a corner; fails for cusps.
pub fn exterior_bisector(corner: &Corner, region: &Region) -> Result<Complex64> {
    let owned = region
        .corners()
        .any(|c| (c.vertex - corner.vertex).norm() == 0.0 && c.chain == corner.chain);
    if !owned {
        return Err(Error::InvalidOption(format!(
            "corner at {} does not belong to the region",
            corner.vertex
        )));
    }
    if corner.alpha <= 1e-10 || corner.alpha >= 2.0 - 1e-10 {
        return Err(Error::UnsupportedCorner {
            vertex: corner.vertex,
            alpha: corner.alpha,
        });
    }
    Ok(corner.exterior_bisector)
}

impl Region {
    /// Builds a region; `target` defaults to the disk (simply connected) or annulus.
    pub fn from_spec(spec: &RegionSpec, target: Option<Target>) -> Result<Region> {
        let (connectivity, default_target) = match spec {
            RegionSpec::Annulus { .. } => (Connectivity::Annular, Target::Annulus),
            RegionSpec::DisjointPair { .. } => (Connectivity::DisjointPair, Target::Annulus),
            _ => (Connectivity::Simply, Target::InteriorDisk),
        };
        let target = target.unwrap_or(default_target);
        match (connectivity, target) {
            (Connectivity::Simply, Target::Annulus) => {
                return Err(Error::Spec(
                    "target: annulus requires an annulus or disjoint_pair region".into(),
                ))
            }
            (Connectivity::Annular | Connectivity::DisjointPair, t) if t != Target::Annulus => {
                return Err(Error::Spec(format!(
                    "target: doubly connected regions map to the annulus, not `{t}`"
                )))
            }
            _ => {}
        }

        let raw: Vec<(Vec<Arc>, bool)> = match spec {
            RegionSpec::Annulus { outer, inner } => vec![
                (simple_chain(outer, "outer")?, true),
                (simple_chain(inner, "inner")?, false),
            ],
            RegionSpec::DisjointPair { left, right } => vec![
                (simple_chain(left, "left")?, false),
                (simple_chain(right, "right")?, false),
            ],
            simple => vec![(simple_chain(simple, "")?, !target.exterior_source())],
        };

        let mut chains = Vec::new();
        for (idx, (arcs, want_ccw)) in raw.into_iter().enumerate() {
            let area: f64 = arcs.iter().map(Arc::area_term).sum();
            let arcs = if (area > 0.0) != want_ccw {
                Chain {
                    arcs,
                    corners: vec![],
                    ccw: !want_ccw,
                }
                .reversed()
            } else {
                arcs
            };
            check_closed(&arcs, idx)?;
            check_simple(&arcs, idx)?;
            let corners = detect_corners(&arcs, idx)?;
            chains.push(Chain {
                arcs,
                corners,
                ccw: want_ccw,
            });
        }

        check_nesting(&chains, connectivity)?;

        let anchor = match connectivity {
            Connectivity::Simply => {
                let w = chains[0].winding(Complex64::new(0.0, 0.0)).round();
                if chains[0].distance(Complex64::new(0.0, 0.0)) < 1e-12 || w.abs() != 1.0 {
                    return Err(Error::Normalization(
                        "the origin must lie strictly inside the boundary curve".into(),
                    ));
                }
                Anchor::Point(Complex64::new(0.0, 0.0))
            }
            Connectivity::Annular => Anchor::Point(interior_point(&chains[1], "inner")?),
            Connectivity::DisjointPair => Anchor::Pair(
                interior_point(&chains[0], "left")?,
                interior_point(&chains[1], "right")?,
            ),
        };

        let mut region = Region {
            chains,
            connectivity,
            target,
            contains_origin: false,
            anchor,
            spec: spec.clone(),
        };
        region.contains_origin = region.contains(Complex64::new(0.0, 0.0));
        Ok(region)
    }

    pub fn corners(&self) -> impl Iterator<Item = &Corner> {
        self.chains.iter().flat_map(|c| c.corners.iter())
    }

    pub fn corner_count(&self) -> usize {
        self.chains.iter().map(|c| c.corners.len()).sum()
    }

    /// Whether `z` lies in the open domain.
    pub fn contains(&self, z: Complex64) -> bool {
        self.chains.iter().all(|c| {
            let w = c.winding(z).round();
            if c.ccw {
                w == 1.0
            } else {
                w == 0.0
            }
        }) && self.distance_to_boundary(z) > 0.0
    }

    pub fn distance_to_boundary(&self, z: Complex64) -> f64 {
        self.chains
            .iter()
            .map(|c| c.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Bounding box `(min corner, max corner)` of all chains.
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.chains {
            for p in c.polyline(32) {
                lo.re = lo.re.min(p.re);
                lo.im = lo.im.min(p.im);
                hi.re = hi.re.max(p.re);
                hi.im = hi.im.max(p.im);
            }
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Real boundary data `-log|factor(z)|` of the mapping Dirichlet problem.
    pub fn log_data(&self, z: Complex64) -> f64 {
        -self.factor(z).norm().ln()
    }

    /// The explicit factor multiplying `e^g` in the map.
    pub fn factor(&self, z: Complex64) -> Complex64 {
        match self.anchor {
            Anchor::Point(a) => z - a,
            Anchor::Pair(q1, q2) => (z - q2) / (z - q1),
        }
    }

    /// Points where the boundary data are logarithmically singular.
    pub fn singular_points(&self) -> Vec<Complex64> {
        match self.anchor {
            Anchor::Point(a) => vec![a],
            Anchor::Pair(q1, q2) => vec![q1, q2],
        }
    }
}

fn c64(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn field(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

fn check_finite(points: &[[f64; 2]], name: &str) -> Result<()> {
    if points.iter().flatten().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Spec(format!("{name}: non-finite coordinate")))
    }
}

fn simple_chain(spec: &RegionSpec, prefix: &str) -> Result<Vec<Arc>> {
    match spec {
        RegionSpec::Polygon { vertices } => {
            let name = field(prefix, "vertices");
            check_finite(vertices, &name)?;
            if vertices.len() < 3 {
                return Err(Error::DegeneratePolygon {
                    field: name,
                    count: vertices.len(),
                });
            }
            let pts: Vec<Complex64> = vertices.iter().copied().map(c64).collect();
            let n = pts.len();
            let mut arcs = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (pts[k], pts[(k + 1) % n]);
                if a == b {
                    return Err(Error::Spec(format!("{name}: repeated vertex {k}")));
                }
                arcs.push(Arc::segment(a, b));
            }
            Ok(arcs)
        }
        RegionSpec::CircularPolygon { sides } => {
            let name = field(prefix, "sides");
            let starts: Vec<[f64; 2]> = sides.iter().map(|s| s.start).collect();
            check_finite(&starts, &name)?;
            if sides.len() < 2 {
                return Err(Error::DegeneratePolygon {
                    field: name,
                    count: sides.len(),
                });
            }
            let n = sides.len();
            let mut arcs = Vec::with_capacity(n);
            for k in 0..n {
                let a = c64(sides[k].start);
                let b = c64(sides[(k + 1) % n].start);
                if a == b {
                    return Err(Error::Spec(format!("{name}: repeated start point {k}")));
                }
                match sides[k].radius {
                    Some(r) if !r.is_finite() => {
                        return Err(Error::Spec(format!("{name}[{k}].radius: non-finite")))
                    }
                    Some(r) if r != 0.0 => {
                        let arc = Arc::circular(a, b, r).ok_or(Error::RadiusTooSmall {
                            side: k,
                            radius: r,
                            half_chord: (b - a).norm() / 2.0,
                        })?;
                        arcs.push(arc);
                    }
                    _ => arcs.push(Arc::segment(a, b)),
                }
            }
            if n == 2 && arcs.iter().all(|a| matches!(a.kind, ArcKind::Segment)) {
                return Err(Error::DegeneratePolygon {
                    field: name,
                    count: n,
                });
            }
            Ok(arcs)
        }
        RegionSpec::Smooth { points } => {
            let name = field(prefix, "points");
            check_finite(points, &name)?;
            if points.len() < 3 {
                return Err(Error::DegeneratePolygon {
                    field: name,
                    count: points.len(),
                });
            }
            let pts: Vec<Complex64> = points.iter().copied().map(c64).collect();
            let curve = Shared::new(TrigCurve::from_points(&pts));
            let mut arc = Arc::parametric(curve, 0.0, 1.0);
            arc.end = arc.start;
            Ok(vec![arc])
        }
        RegionSpec::Annulus { .. } | RegionSpec::DisjointPair { .. } => Err(Error::Spec(format!(
            "{}: nested doubly connected regions are not supported",
            if prefix.is_empty() { "type" } else { prefix }
        ))),
    }
}

fn check_closed(arcs: &[Arc], chain: usize) -> Result<()> {
    let scale = arcs.iter().map(|a| a.start.norm()).fold(1.0_f64, f64::max);
    for k in 0..arcs.len() {
        let next = &arcs[(k + 1) % arcs.len()];
        let gap = (arcs[k].end - next.start).norm();
        if gap > 1e-12 * scale {
            return Err(Error::OpenChain { chain, arc: k, gap });
        }
    }
    Ok(())
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Complex64, q: Complex64, r: Complex64, o: f64| {
        o == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

/// Polyline pieces tagged with their arc index.
fn tagged_pieces(arcs: &[Arc]) -> Vec<(usize, Complex64, Complex64)> {
    let mut out = Vec::new();
    for (k, a) in arcs.iter().enumerate() {
        let pieces = match a.kind {
            ArcKind::Segment => 1,
            ArcKind::Circular { .. } => 32,
            ArcKind::Parametric { .. } => 256,
        };
        let line = a.polyline(pieces);
        for w in line.windows(2) {
            out.push((k, w[0], w[1]));
        }
    }
    out
}

fn check_simple(arcs: &[Arc], chain: usize) -> Result<()> {
    let pieces = tagged_pieces(arcs);
    let n = pieces.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (ai, p0, p1) = pieces[i];
            let (aj, q0, q1) = pieces[j];
            if segments_cross(p0, p1, q0, q1) {
                return Err(Error::SelfIntersecting {
                    chain,
                    first: ai,
                    second: aj,
                });
            }
        }
    }
    Ok(())
}

fn check_nesting(chains: &[Chain], connectivity: Connectivity) -> Result<()> {
    if chains.len() < 2 {
        return Ok(());
    }
    let a = tagged_pieces(&chains[0].arcs);
    let b = tagged_pieces(&chains[1].arcs);
    for &(i, p0, p1) in &a {
        for &(j, q0, q1) in &b {
            if segments_cross(p0, p1, q0, q1) {
                return Err(Error::Spec(format!(
                    "curves intersect (arc {i} of the first curve and arc {j} of the second)"
                )));
            }
        }
    }
    let probe = chains[1].arcs[0].start;
    let inside_first = chains[0].winding(probe).round().abs() == 1.0;
    match connectivity {
        Connectivity::Annular if !inside_first => Err(Error::Spec(
            "inner: curve must lie inside the outer curve".into(),
        )),
        Connectivity::DisjointPair
            if inside_first || chains[1].winding(chains[0].arcs[0].start).round() != 0.0 =>
        {
            Err(Error::Spec(
                "right: the two curves of a disjoint pair must not be nested".into(),
            ))
        }
        _ => Ok(()),
    }
}

fn detect_corners(arcs: &[Arc], chain: usize) -> Result<Vec<Corner>> {
    let n = arcs.len();
    let mut corners = Vec::new();
    for k in 0..n {
        let incoming = &arcs[(k + n - 1) % n];
        let outgoing = &arcs[k];
        let t_in = incoming.tangent(1.0);
        let t_out = outgoing.tangent(0.0);
        let turn = (t_out / t_in).arg();
        if turn.abs() <= CORNER_TURN_TOL {
            continue;
        }
        let alpha = 1.0 - turn / PI;
        if alpha <= 1e-10 || alpha >= 2.0 - 1e-10 {
            return Err(Error::UnsupportedCorner {
                vertex: outgoing.start,
                alpha,
            });
        }
        let interior = t_out * Complex64::from_polar(1.0, alpha * PI / 2.0);
        corners.push(Corner {
            vertex: outgoing.start,
            alpha,
            exterior_bisector: -interior,
            chain,
            arc: k,
            local_scale: 0.5 * incoming.length().min(outgoing.length()),
        });
    }
    Ok(corners)
}

fn interior_point(chain: &Chain, name: &str) -> Result<Complex64> {
    let c = chain.centroid();
    if chain.winding(c).round().abs() == 1.0 && chain.distance(c) > 0.0 {
        Ok(c)
    } else {
        Err(Error::Normalization(format!(
            "{name}: the centroid of the curve is not inside it"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(text: &str) -> Region {
        parse_region(text).unwrap()
    }

    #[test]
    fn square_has_four_right_angle_corners() {
        let r = region(r#"{"type":"polygon","vertices":[[1,0],[0,1],[-1,0],[0,-1]]}"#);
        assert_eq!(r.corner_count(), 4);
        for c in r.corners() {
            assert!((c.alpha - 0.5).abs() < 1e-12);
        }
        assert!(r.chains[0].signed_area() > 0.0);
        assert!(r.contains_origin);
    }

    #[test]
    fn clockwise_polygon_is_reoriented() {
        let r = region(r#"{"type":"polygon","vertices":[[0,-1],[-1,0],[0,1],[1,0]]}"#);
        assert!(r.chains[0].ccw);
        assert!(r.chains[0].signed_area() > 0.0);
    }

    #[test]
    fn scalloped_circular_polygon() {
        let r = region(
            r#"{"type":"circular_polygon","sides":[
                {"start":[1,0],"radius":-2},{"start":[0,1],"radius":-2},
                {"start":[-1,0],"radius":-2},{"start":[0,-1],"radius":-2}]}"#,
        );
        assert_eq!(r.corner_count(), 4);
        let expected = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (c, e) in r.corners().zip(expected) {
            assert!((c.vertex - e).norm() < 1e-15);
            // Inward-bulging radius-2 sides narrow each right angle by twice asin(sqrt(2)/4).
            let alpha = 0.5 - 2.0 * (2f64.sqrt() / 4.0).asin() / PI;
            assert!((c.alpha - alpha).abs() < 1e-10, "{} vs {}", c.alpha, alpha);
        }
        for arc in &r.chains[0].arcs {
            if let ArcKind::Circular { radius, .. } = arc.kind {
                assert_eq!(radius.abs(), 2.0);
            } else {
                panic!("expected circular arcs");
            }
        }
    }

    #[test]
    fn degenerate_polygon_is_rejected() {
        let err = parse_region(r#"{"type":"polygon","vertices":[[1,0],[0,1]]}"#).unwrap_err();
        assert!(err.to_string().contains("degenerate polygon"));
    }

    #[test]
    fn bowtie_is_self_intersecting() {
        let err = parse_region(r#"{"type":"polygon","vertices":[[-1,-1],[1,1],[1,-1],[-1,1]]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::SelfIntersecting { .. }), "{err}");
    }

    #[test]
    fn small_radius_is_rejected() {
        let err = parse_region(
            r#"{"type":"circular_polygon","sides":[{"start":[1,0],"radius":0.5},{"start":[0,1]},{"start":[-1,0]}]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::RadiusTooSmall { side: 0, .. }),
            "{err}"
        );
    }

    #[test]
    fn malformed_spec_names_field() {
        let err = parse_region(r#"{"type":"polygon","verts":[[1,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("vertices"), "{err}");
    }

    #[test]
    fn square_vertex_bisector_is_diagonal() {
        let r = region(r#"{"type":"polygon","vertices":[[1,1],[-1,1],[-1,-1],[1,-1]]}"#);
        let c = r
            .corners()
            .find(|c| (c.vertex - Complex64::new(1.0, 1.0)).norm() < 1e-15)
            .unwrap();
        let d = exterior_bisector(c, &r).unwrap();
        assert!((d - Complex64::new(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-14);
    }

    #[test]
    fn l_shape_reentrant_bisector() {
        let l = region(
            r#"{"type":"polygon","vertices":[[-0.5,-0.5],[1.5,-0.5],[1.5,0.5],[0.5,0.5],[0.5,1.5],[-0.5,1.5]]}"#,
        );
        let v = Complex64::new(0.5, 0.5);
        let c = l
            .corners()
            .find(|c| (c.vertex - v).norm() < 1e-15)
            .expect("reentrant corner");
        assert!((c.alpha - 1.5).abs() < 1e-12);
        let d = exterior_bisector(c, &l).unwrap();
        assert!((d - Complex64::new(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-14);
        assert!(!l.contains(v + d * 1e-6));
        assert!(l.contains(v - d * 1e-6));
    }

    #[test]
    fn exterior_target_reverses_orientation() {
        let r = Region::from_spec(
            &RegionSpec::Polygon {
                vertices: vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            },
            Some(Target::ExteriorExterior),
        )
        .unwrap();
        assert!(!r.chains[0].ccw);
        assert!(r.contains(Complex64::new(3.0, 0.1)));
        assert!(!r.contains(Complex64::new(0.1, 0.1)));
        for c in r.corners() {
            assert!((c.alpha - 1.5).abs() < 1e-12);
            // Exterior of the exterior domain is the inside of the square.
            assert!(
                c.exterior_bisector.re * c.vertex.re + c.exterior_bisector.im * c.vertex.im < 0.0
            );
        }
    }

    #[test]
    fn annulus_orientation_and_anchor() {
        let r = region(
            r#"{"type":"annulus",
                "outer":{"type":"smooth","points":[[1,0],[0,1],[-1,0],[0,-1]]},
                "inner":{"type":"polygon","vertices":[[0.5,0],[0,0.5],[-0.5,0],[0,-0.5]]}}"#,
        );
        assert!(r.chains[0].ccw && !r.chains[1].ccw);
        assert!(r.chains[1].signed_area() < 0.0);
        assert!(r.contains(Complex64::new(0.7, 0.0)));
        assert!(!r.contains(Complex64::new(0.1, 0.0)));
        assert_eq!(r.connectivity, Connectivity::Annular);
        match r.anchor {
            Anchor::Point(a) => assert!(a.norm() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn origin_outside_is_rejected() {
        let err =
            parse_region(r#"{"type":"polygon","vertices":[[1,1],[2,1],[2,2],[1,2]]}"#).unwrap_err();
        assert!(matches!(err, Error::Normalization(_)));
    }
}
