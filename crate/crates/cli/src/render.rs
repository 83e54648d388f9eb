//! SVG figures of a map: the source domain with preimages of a polar grid,
//! and the target with the grid and the images of the boundary.

use std::f64::consts::TAU;
use std::fmt::Write;

use confmap::aaa::poles_residues_zeros;
use confmap::conformal::ConformalMap;
use confmap::geometry::{Connectivity, Region};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    /// Radial circles of the target grid.
    pub circles: usize,
    pub rays: usize,
    pub show_poles: bool,
    /// Canvas width and height in pixels.
    pub size: u32,
    pub stroke: f64,
    pub grid_color: String,
    pub boundary_color: String,
    pub pole_color: String,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            circles: 10,
            rays: 24,
            show_poles: true,
            size: 600,
            stroke: 1.0,
            grid_color: "#4477aa".into(),
            boundary_color: "#000000".into(),
            pole_color: "#d62728".into(),
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.circles == 0 || self.rays == 0 {
            return Err("grid: circle and ray counts must be at least 1".into());
        }
        if self.size < 100 {
            return Err(format!(
                "size: {} px is below the 100 px minimum",
                self.size
            ));
        }
        if !(self.stroke > 0.0) {
            return Err("stroke: width must be positive".into());
        }
        Ok(())
    }
}

const CIRCLE_POINTS: usize = 360;
const RAY_POINTS: usize = 200;
const EDGE_PIECES: usize = 24;

/// Axis-aligned window in model coordinates.
#[derive(Debug, Clone, Copy)]
struct View {
    lo: Complex64,
    hi: Complex64,
}

impl View {
    fn square(center: Complex64, half: f64) -> Self {
        let d = Complex64::new(half, half);
        View {
            lo: center - d,
            hi: center + d,
        }
    }

    fn grown(&self, factor: f64) -> Self {
        let c = (self.lo + self.hi) / 2.0;
        View {
            lo: c + (self.lo - c) * factor,
            hi: c + (self.hi - c) * factor,
        }
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re.is_finite()
            && z.im.is_finite()
            && (self.lo.re..=self.hi.re).contains(&z.re)
            && (self.lo.im..=self.hi.im).contains(&z.im)
    }
}

struct Canvas {
    body: String,
    view: View,
    scale: f64,
    spec: RenderSpec,
}

impl Canvas {
    fn new(view: View, spec: &RenderSpec) -> Self {
        let width = (view.hi.re - view.lo.re).max(view.hi.im - view.lo.im);
        Canvas {
            body: String::new(),
            view,
            scale: spec.size as f64 / width,
            spec: spec.clone(),
        }
    }

    fn px(&self, v: f64) -> f64 {
        v / self.scale
    }

    /// Splits `pts` into runs inside a margin around the view.
    fn polyline(&mut self, class: &str, color: &str, pts: &[Complex64]) {
        let keep = self.view.grown(1.5);
        let mut run: Vec<Complex64> = Vec::new();
        for &z in pts
            .iter()
            .chain(std::iter::once(&Complex64::new(f64::NAN, 0.0)))
        {
            if keep.contains(z) {
                run.push(z);
                continue;
            }
            if run.len() >= 2 {
                let mut line = format!(
                    "<polyline class=\"{class}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{:.6}\" points=\"",
                    self.px(self.spec.stroke)
                );
                for (i, p) in run.iter().enumerate() {
                    if i > 0 {
                        line.push(' ');
                    }
                    let _ = write!(line, "{:.6},{:.6}", p.re, p.im);
                }
                line.push_str("\"/>\n");
                self.body.push_str(&line);
            }
            run.clear();
        }
    }

    fn circle(&mut self, id: &str, color: &str, r: f64) {
        let _ = writeln!(
            self.body,
            "<circle id=\"{id}\" class=\"boundary\" cx=\"0\" cy=\"0\" r=\"{r:.12}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{:.6}\"/>",
            self.px(1.5 * self.spec.stroke)
        );
    }

    fn poles(&mut self, poles: &[Complex64]) {
        let color = self.spec.pole_color.clone();
        for p in poles.iter().filter(|p| self.view.contains(**p)) {
            let _ = writeln!(
                self.body,
                "<circle class=\"pole\" cx=\"{:.9}\" cy=\"{:.9}\" r=\"{:.6}\" fill=\"{color}\"/>",
                p.re,
                p.im,
                self.px(3.0)
            );
        }
    }

    fn finish(self, title: &str) -> String {
        let n = self.spec.size;
        let (lo, hi) = (self.view.lo, self.view.hi);
        let s = self.scale;
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{n}\" height=\"{n}\" viewBox=\"0 0 {n} {n}\">"
        );
        let _ = writeln!(out, "<title>{title}</title>");
        let _ = writeln!(
            out,
            "<defs><clipPath id=\"view\"><rect x=\"{:.9}\" y=\"{:.9}\" width=\"{:.9}\" height=\"{:.9}\"/></clipPath></defs>",
            lo.re,
            lo.im,
            hi.re - lo.re,
            hi.im - lo.im
        );
        let _ = writeln!(
            out,
            "<rect x=\"0\" y=\"0\" width=\"{n}\" height=\"{n}\" fill=\"#ffffff\"/>"
        );
        // Model coordinates with the imaginary axis pointing up.
        let _ = writeln!(
            out,
            "<g id=\"model\" transform=\"matrix({s:.9} 0 0 {:.9} {:.9} {:.9})\" clip-path=\"url(#view)\">",
            -s,
            -lo.re * s,
            hi.im * s
        );
        out.push_str(&self.body);
        out.push_str("</g>\n</svg>\n");
        out
    }
}

/// Polar grid of the target in a unit-disk parameter `s`.
struct Grid {
    lines: Vec<Vec<Complex64>>,
}

fn target_grid(map: &ConformalMap, spec: &RenderSpec) -> Grid {
    let rho = map.modulus.unwrap_or(0.0);
    let outward = map.target.exterior_image();
    let place = |s: f64, t: f64| {
        let u = Complex64::from_polar(1.0, t);
        if outward {
            u / s
        } else {
            u * s
        }
    };
    let s_min = if outward { 0.05 } else { rho };
    let mut lines = Vec::new();
    for k in 1..=spec.circles {
        let s = rho + (1.0 - rho) * k as f64 / (spec.circles + 1) as f64;
        lines.push(
            (0..=CIRCLE_POINTS)
                .map(|j| place(s, TAU * j as f64 / CIRCLE_POINTS as f64))
                .collect(),
        );
    }
    for j in 0..spec.rays {
        let t = TAU * j as f64 / spec.rays as f64;
        lines.push(
            (0..=RAY_POINTS)
                .map(|i| {
                    let s = s_min + (1.0 - s_min) * i as f64 / RAY_POINTS as f64;
                    place(s.max(1e-12), t)
                })
                .collect(),
        );
    }
    Grid { lines }
}

fn boundary_curves(region: &Region) -> Vec<Vec<Complex64>> {
    region
        .chains
        .iter()
        .map(|c| {
            let pts = c.polyline(64);
            let mut dense = Vec::with_capacity(EDGE_PIECES * pts.len());
            for w in pts.windows(2) {
                for i in 0..EDGE_PIECES {
                    dense.push(w[0] + (w[1] - w[0]) * (i as f64 / EDGE_PIECES as f64));
                }
            }
            dense.push(pts[pts.len() - 1]);
            dense
        })
        .collect()
}

fn domain_view(region: &Region) -> View {
    let (lo, hi) = region.bounding_box();
    let c = (lo + hi) / 2.0;
    let half = (hi.re - lo.re).max(hi.im - lo.im) / 2.0;
    let grow =
        if region.target.exterior_source() || region.connectivity == Connectivity::DisjointPair {
            2.0
        } else {
            1.1
        };
    View::square(c, half * grow)
}

fn finite_poles(r: &confmap::aaa::BarycentricRational) -> Vec<Complex64> {
    poles_residues_zeros(r)
        .poles
        .into_iter()
        .filter(|p| p.re.is_finite() && p.im.is_finite())
        .collect()
}

/// Domain-side and target-side SVG documents.
pub fn render(
    map: &ConformalMap,
    region: &Region,
    spec: &RenderSpec,
) -> Result<(String, String), String> {
    spec.validate()?;
    let grid = target_grid(map, spec);
    let curves = boundary_curves(region);

    let mut dom = Canvas::new(domain_view(region), spec);
    for line in &grid.lines {
        let pre = map.inverse_at(line);
        dom.polyline("grid", &spec.grid_color, &pre);
    }
    for c in &curves {
        dom.polyline("boundary", &spec.boundary_color, c);
    }
    if spec.show_poles {
        dom.poles(&finite_poles(&map.forward));
    }

    let half = if map.target.exterior_image() {
        2.5
    } else {
        1.1
    };
    let mut tgt = Canvas::new(View::square(Complex64::new(0.0, 0.0), half), spec);
    for line in &grid.lines {
        tgt.polyline("grid", &spec.grid_color, line);
    }
    tgt.circle("outer-circle", &spec.boundary_color, 1.0);
    if let Some(rho) = map.modulus {
        tgt.circle("inner-circle", &spec.boundary_color, rho);
    }
    for c in &curves {
        let img = map.forward_at(c);
        tgt.polyline("image", &spec.pole_color, &img);
    }
    if spec.show_poles {
        tgt.poles(&finite_poles(&map.inverse));
    }
    let name = region.spec.kind();
    Ok((
        dom.finish(&format!("{name} domain, {} map", map.target)),
        tgt.finish(&format!("{name} target, {} map", map.target)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_limits() {
        let mut s = RenderSpec::default();
        assert!(s.validate().is_ok());
        s.size = 99;
        assert!(s.validate().is_err());
        s = RenderSpec {
            rays: 0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn polylines_break_outside_the_view() {
        let spec = RenderSpec::default();
        let mut c = Canvas::new(View::square(Complex64::new(0.0, 0.0), 1.0), &spec);
        let pts = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(f64::INFINITY, 0.0),
            Complex64::new(0.5, 0.5),
            Complex64::new(0.0, 0.5),
            Complex64::new(1e9, 0.0),
        ];
        c.polyline("grid", "#000", &pts);
        assert_eq!(c.body.matches("<polyline").count(), 2);
    }
}
