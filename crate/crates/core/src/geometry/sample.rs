use num_complex::Complex64;

use super::{Corner, Region};
use crate::error::{Error, Result};
use crate::lightning::CLUSTERING_SIGMA;

/// Collocation points on the boundary with the data of the mapping problem.
#[derive(Debug, Clone, Default)]
pub struct BoundarySamples {
    pub points: Vec<Complex64>,
    pub data: Vec<f64>,
    pub weights: Vec<f64>,
    /// Chain index of each point (0 for the outer/first curve).
    pub curve_tag: Vec<usize>,
    /// Distance to the nearest corner (infinite when the region has none).
    pub normal_dist: Vec<f64>,
    /// `(arc index, parameter)` of each point on its chain.
    pub location: Vec<(usize, f64)>,
}

impl BoundarySamples {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Replaces the data column with `f(z, curve_tag)`.
    pub fn with_data(mut self, f: &dyn Fn(Complex64, usize) -> f64) -> Self {
        self.data = self
            .points
            .iter()
            .zip(&self.curve_tag)
            .map(|(&z, &tag)| f(z, tag))
            .collect();
        self
    }

    /// Number of points carrying the given curve tag.
    pub fn count_on(&self, tag: usize) -> usize {
        self.curve_tag.iter().filter(|&&t| t == tag).count()
    }
}

/// Default innermost clustering distance for a corner when no poles are supplied.
pub(crate) fn default_min_distance(corner: &Corner, n: usize) -> f64 {
    let n = n.max(1) as f64;
    corner.local_scale * (-CLUSTERING_SIGMA * (n.sqrt() - 1.0)).exp()
}

/// Samples every chain of `region` with `8n` arclength-equispaced points,
/// plus `ceil(3n)` geometrically clustered points on each side of every corner.
///
/// `corner_poles[k]` lists pole distances for the k-th corner in
/// [`Region::corners`] order; the innermost sample lies at half the smallest.
pub fn sample_boundary(
    region: &Region,
    n: usize,
    corner_poles: Option<&[Vec<f64>]>,
) -> Result<BoundarySamples> {
    if n == 0 {
        return Err(Error::InvalidOption("sample_boundary needs n >= 1".into()));
    }
    let all_corners: Vec<&Corner> = region.corners().collect();
    let min_dist: Vec<f64> = all_corners
        .iter()
        .enumerate()
        .map(|(k, c)| {
            corner_poles
                .and_then(|p| p.get(k))
                .and_then(|d| d.iter().copied().reduce(f64::min))
                .unwrap_or_else(|| default_min_distance(c, n))
        })
        .collect();

    let mut out = BoundarySamples::default();
    let mut corner_offset = 0;
    for (ci, chain) in region.chains.iter().enumerate() {
        let lengths: Vec<f64> = chain.arcs.iter().map(|a| a.length()).collect();
        let total: f64 = lengths.iter().sum();
        let mut locs: Vec<(usize, f64)> = Vec::new();

        for k in 0..chain.arcs.len() {
            locs.push((k, 0.0));
        }
        let m = 8 * n;
        let mut arc = 0;
        let mut before = 0.0;
        for j in 0..m {
            let s = total * j as f64 / m as f64;
            while arc + 1 < lengths.len() && s >= before + lengths[arc] {
                before += lengths[arc];
                arc += 1;
            }
            locs.push((arc, chain.arcs[arc].param_at_length(s - before)));
        }

        let extra = 3 * n;
        for (k, corner) in chain.corners.iter().enumerate() {
            let nc = chain.arcs.len();
            let out_arc = corner.arc;
            let in_arc = (corner.arc + nc - 1) % nc;
            // Slightly inside half the distance so rounding cannot push it past.
            let inner = 0.5 * (1.0 - 1e-9) * min_dist[corner_offset + k];
            let outer = 0.5 * lengths[out_arc].min(lengths[in_arc]);
            if inner >= outer {
                continue;
            }
            let ratio = (outer / inner).ln();
            for j in 0..extra {
                let frac = if extra > 1 {
                    j as f64 / (extra - 1) as f64
                } else {
                    0.0
                };
                let s = inner * (ratio * frac).exp();
                locs.push((out_arc, chain.arcs[out_arc].param_at_length(s)));
                locs.push((
                    in_arc,
                    chain.arcs[in_arc].param_at_length(lengths[in_arc] - s),
                ));
            }
        }
        corner_offset += chain.corners.len();

        // Parameter 1 of an arc is parameter 0 of the next.
        for loc in &mut locs {
            if loc.1 >= 1.0 {
                *loc = ((loc.0 + 1) % chain.arcs.len(), 0.0);
            }
        }
        locs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        locs.dedup_by(|b, a| a.0 == b.0 && (b.1 - a.1).abs() < 1e-15);

        for (arc_idx, t) in locs {
            let z = chain.arcs[arc_idx].eval(t);
            out.points.push(z);
            out.curve_tag.push(ci);
            out.location.push((arc_idx, t));
        }
    }

    fill_derived(region, &mut out, &all_corners)?;
    Ok(out)
}

fn fill_derived(region: &Region, s: &mut BoundarySamples, corners: &[&Corner]) -> Result<()> {
    let scale = region.diameter();
    s.normal_dist.clear();
    s.data.clear();
    for &z in &s.points {
        let dist = corners
            .iter()
            .map(|c| (z - c.vertex).norm())
            .fold(f64::INFINITY, f64::min);
        s.normal_dist.push(dist);
        for p in region.singular_points() {
            if (z - p).norm() <= 1e-14 * scale.max(1.0) {
                return Err(Error::SingularSample(z));
            }
        }
        let d = region.log_data(z);
        if !d.is_finite() {
            return Err(Error::SingularSample(z));
        }
        s.data.push(d);
    }
    // Uniform rows: the geometric clustering already concentrates rows at corners.
    s.weights = vec![1.0; s.points.len()];
    Ok(())
}

/// Midpoints (in arc parameter) between consecutive collocation points.
///
/// These are distinct from the collocation points and resolve the same clustering.
pub fn validation_points(region: &Region, samples: &BoundarySamples) -> Result<BoundarySamples> {
    let mut out = BoundarySamples::default();
    let n = samples.len();
    for i in 0..n {
        let tag = samples.curve_tag[i];
        let (arc, t) = samples.location[i];
        let chain = &region.chains[tag];
        let next_same_arc =
            i + 1 < n && samples.curve_tag[i + 1] == tag && samples.location[i + 1].0 == arc;
        let t_next = if next_same_arc {
            samples.location[i + 1].1
        } else {
            1.0
        };
        let tm = 0.5 * (t + t_next);
        out.points.push(chain.arcs[arc].eval(tm));
        out.curve_tag.push(tag);
        out.location.push((arc, tm));
    }
    let corners: Vec<&Corner> = region.corners().collect();
    fill_derived(region, &mut out, &corners)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_region;

    #[test]
    fn unit_circle_samples() {
        let r = parse_region(r#"{"type":"smooth","points":[[1,0],[0,1],[-1,0],[0,-1]]}"#).unwrap();
        let s = sample_boundary(&r, 8, None).unwrap();
        assert_eq!(s.len(), 64);
        for (z, d) in s.points.iter().zip(&s.data) {
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!(d.abs() < 1e-14);
        }
        let mut gaps: Vec<f64> = s.points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        gaps.sort_by(f64::total_cmp);
        assert!(gaps[gaps.len() - 1] - gaps[0] < 1e-6);
    }

    #[test]
    fn smooth_curve_gives_8n_points() {
        let pts: Vec<[f64; 2]> = (0..200)
            .map(|k| {
                let t = 2.0 * k as f64 / 200.0 - 1.0;
                let z = Complex64::from_polar(
                    1.0 + 0.15 * (5.0 * std::f64::consts::PI * t).cos(),
                    std::f64::consts::PI * t,
                );
                [z.re, z.im]
            })
            .collect();
        let text = serde_json::json!({"type":"smooth","points":pts}).to_string();
        let r = parse_region(&text).unwrap();
        let s = sample_boundary(&r, 16, None).unwrap();
        assert_eq!(s.len(), 128);
    }

    #[test]
    fn samples_lie_on_their_arcs() {
        let r = parse_region(
            r#"{"type":"circular_polygon","sides":[{"start":[1,0],"radius":-2},{"start":[0,1],"radius":-2},{"start":[-1,0],"radius":-2},{"start":[0,-1],"radius":-2}]}"#,
        )
        .unwrap();
        let s = sample_boundary(&r, 10, None).unwrap();
        for (z, &(arc, t)) in s.points.iter().zip(&s.location) {
            assert!((r.chains[0].arcs[arc].eval(t) - z).norm() <= 1e-12);
        }
        assert!(s.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
    }

    #[test]
    fn corner_clustering_reaches_half_min_pole_distance() {
        let r = parse_region(
            r#"{"type":"polygon","vertices":[[-0.5,-0.5],[1.5,-0.5],[1.5,0.5],[0.5,0.5],[0.5,1.5],[-0.5,1.5]]}"#,
        )
        .unwrap();
        let v = Complex64::new(0.5, 0.5);
        let mut poles = vec![vec![0.1]; r.corner_count()];
        let reentrant = r.corners().position(|c| c.vertex == v).unwrap();
        poles[reentrant] = vec![5.3e-5, 1e-3, 0.1];
        let s = sample_boundary(&r, 25, Some(&poles)).unwrap();
        let nearest = s
            .points
            .iter()
            .map(|z| (z - v).norm())
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= 2.65e-5 * (1.0 + 1e-12), "{nearest}");
    }

    #[test]
    fn sample_at_log_singularity_is_an_error() {
        let mut r =
            parse_region(r#"{"type":"polygon","vertices":[[1,0],[0,1],[-1,0],[0,-1]]}"#).unwrap();
        r.anchor = crate::geometry::Anchor::Point(Complex64::new(1.0, 0.0));
        let err = sample_boundary(&r, 4, None).unwrap_err();
        assert!(matches!(err, Error::SingularSample(_)));
    }
}
