use std::f64::consts::TAU;
use std::sync::Arc as Shared;

use num_complex::Complex64;

/// Periodic curve given by trigonometric interpolation of a point table.
///
/// The table is read as samples at `t = k/N`, `k = 0..N`, of a curve with
/// period 1 in `t`.
#[derive(Debug, Clone)]
pub struct TrigCurve {
    /// Fourier coefficients for frequencies `freqs[j]`.
    coeffs: Vec<Complex64>,
    freqs: Vec<i64>,
    /// Cumulative arclength on a uniform grid of `t`, last entry is the period length.
    arclength: Vec<f64>,
}

const ARCLENGTH_GRID: usize = 4096;
const POLYLINE_PIECES: usize = 1024;

impl TrigCurve {
    pub fn from_points(points: &[Complex64]) -> Self {
        let n = points.len();
        let half = (n / 2) as i64;
        let lo = -(((n as i64) - 1) / 2);
        let mut coeffs = Vec::new();
        let mut freqs = Vec::new();
        for j in lo..=half {
            let mut c = Complex64::new(0.0, 0.0);
            for (k, p) in points.iter().enumerate() {
                let theta = -TAU * (j as f64) * (k as f64) / (n as f64);
                c += p * Complex64::from_polar(1.0, theta);
            }
            c /= n as f64;
            if n.is_multiple_of(2) && j == half && n > 1 {
                // Split the Nyquist term symmetrically so the interpolant is real-consistent.
                coeffs.push(c * 0.5);
                freqs.push(j);
                coeffs.push(c * 0.5);
                freqs.push(-j);
            } else {
                coeffs.push(c);
                freqs.push(j);
            }
        }
        let mut curve = TrigCurve {
            coeffs,
            freqs,
            arclength: Vec::new(),
        };
        let speeds: Vec<f64> = (0..=ARCLENGTH_GRID)
            .map(|k| curve.deriv(k as f64 / ARCLENGTH_GRID as f64).norm())
            .collect();
        let h = 1.0 / ARCLENGTH_GRID as f64;
        let mut cum = Vec::with_capacity(ARCLENGTH_GRID + 1);
        cum.push(0.0);
        for k in 0..ARCLENGTH_GRID {
            let last = cum[k];
            cum.push(last + 0.5 * h * (speeds[k] + speeds[k + 1]));
        }
        curve.arclength = cum;
        curve
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.freqs)
            .map(|(c, &j)| c * Complex64::from_polar(1.0, TAU * j as f64 * t))
            .sum()
    }

    pub fn deriv(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.freqs)
            .map(|(c, &j)| {
                c * Complex64::new(0.0, TAU * j as f64)
                    * Complex64::from_polar(1.0, TAU * j as f64 * t)
            })
            .sum()
    }

    fn cumulative(&self, t: f64) -> f64 {
        let x = t * ARCLENGTH_GRID as f64;
        let k = (x.floor() as isize).clamp(0, ARCLENGTH_GRID as isize - 1) as usize;
        let frac = x - k as f64;
        self.arclength[k] + frac * (self.arclength[k + 1] - self.arclength[k])
    }

    /// Parameter at which the cumulative arclength from `t = 0` equals `s`.
    fn param_at(&self, s: f64) -> f64 {
        let idx = self.arclength.partition_point(|&a| a < s);
        let k = idx.saturating_sub(1).min(ARCLENGTH_GRID - 1);
        let (a0, a1) = (self.arclength[k], self.arclength[k + 1]);
        let frac = if a1 > a0 { (s - a0) / (a1 - a0) } else { 0.0 };
        let mut t = (k as f64 + frac) / ARCLENGTH_GRID as f64;
        // One Newton step against the piecewise-linear table sharpens the estimate.
        let speed = self.deriv(t).norm();
        if speed > 0.0 {
            t -= (self.cumulative(t) - s) / speed;
        }
        t
    }
}

#[derive(Debug, Clone)]
pub enum ArcKind {
    Segment,
    /// Circular arc `center + |radius| * exp(i(start_angle + t*sweep))`.
    ///
    /// `radius` keeps the sign it was specified with: negative bulges to the
    /// left of the direction of travel, positive to the right.
    Circular {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// Piece `[t0, t1]` of a periodic curve (`t1 < t0` runs it backwards).
    Parametric {
        curve: Shared<TrigCurve>,
        t0: f64,
        t1: f64,
        /// Dense polyline of the piece, for distance and winding queries.
        table: Shared<Vec<Complex64>>,
    },
}

/// One analytic piece of a boundary chain, parameterized by `t` in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Arc {
    pub kind: ArcKind,
    pub start: Complex64,
    pub end: Complex64,
}

impl Arc {
    pub fn segment(start: Complex64, end: Complex64) -> Self {
        Arc {
            kind: ArcKind::Segment,
            start,
            end,
        }
    }

    /// Circular arc from `start` to `end` with signed radius (minor arc).
    ///
    /// Returns `None` when `|radius|` is smaller than half the chord.
    pub fn circular(start: Complex64, end: Complex64, radius: f64) -> Option<Self> {
        let chord = end - start;
        let half = chord.norm() / 2.0;
        let r = radius.abs();
        if r < half * (1.0 - 1e-14) || half == 0.0 {
            return None;
        }
        let offset = (r * r - half * half).max(0.0).sqrt();
        let unit = chord / chord.norm();
        let mid = (start + end) / 2.0;
        let left = Complex64::i() * unit;
        // Bulging left puts the center on the right of the chord and the arc runs clockwise.
        let (center, sign) = if radius < 0.0 {
            (mid - left * offset, -1.0)
        } else {
            (mid + left * offset, 1.0)
        };
        let sweep = sign * 2.0 * (half / r).min(1.0).asin();
        Some(Arc {
            kind: ArcKind::Circular {
                center,
                radius,
                start_angle: (start - center).arg(),
                sweep,
            },
            start,
            end,
        })
    }

    pub fn parametric(curve: Shared<TrigCurve>, t0: f64, t1: f64) -> Self {
        let start = curve.eval(t0);
        let end = curve.eval(t1);
        let table: Vec<Complex64> = (0..=POLYLINE_PIECES)
            .map(|k| curve.eval(t0 + (t1 - t0) * k as f64 / POLYLINE_PIECES as f64))
            .collect();
        Arc {
            kind: ArcKind::Parametric {
                curve,
                t0,
                t1,
                table: Shared::new(table),
            },
            start,
            end,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match &self.kind {
            ArcKind::Segment => {
                if t == 1.0 {
                    self.end
                } else {
                    self.start + (self.end - self.start) * t
                }
            }
            ArcKind::Circular {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                if t == 0.0 {
                    self.start
                } else if t == 1.0 {
                    self.end
                } else {
                    center + Complex64::from_polar(radius.abs(), start_angle + t * sweep)
                }
            }
            ArcKind::Parametric { curve, t0, t1, .. } => curve.eval(t0 + t * (t1 - t0)),
        }
    }

    /// Derivative with respect to the arc parameter.
    pub fn deriv(&self, t: f64) -> Complex64 {
        match &self.kind {
            ArcKind::Segment => self.end - self.start,
            ArcKind::Circular {
                radius,
                start_angle,
                sweep,
                ..
            } => {
                Complex64::new(0.0, *sweep)
                    * Complex64::from_polar(radius.abs(), start_angle + t * sweep)
            }
            ArcKind::Parametric { curve, t0, t1, .. } => {
                curve.deriv(t0 + t * (t1 - t0)) * (t1 - t0)
            }
        }
    }

    pub fn tangent(&self, t: f64) -> Complex64 {
        let d = self.deriv(t);
        d / d.norm()
    }

    pub fn length(&self) -> f64 {
        match &self.kind {
            ArcKind::Segment => (self.end - self.start).norm(),
            ArcKind::Circular { radius, sweep, .. } => radius.abs() * sweep.abs(),
            ArcKind::Parametric { curve, t0, t1, .. } => {
                (arclength_from_zero(curve, *t1) - arclength_from_zero(curve, *t0)).abs()
            }
        }
    }

    /// Parameter `t` at arclength `s` measured from the start of the arc.
    pub fn param_at_length(&self, s: f64) -> f64 {
        let len = self.length();
        if len == 0.0 {
            return 0.0;
        }
        match &self.kind {
            ArcKind::Segment | ArcKind::Circular { .. } => (s / len).clamp(0.0, 1.0),
            ArcKind::Parametric { curve, t0, t1, .. } => {
                let s0 = arclength_from_zero(curve, *t0);
                let target = if t1 >= t0 { s0 + s } else { s0 - s };
                let tc = param_from_length(curve, target);
                ((tc - t0) / (t1 - t0)).clamp(0.0, 1.0)
            }
        }
    }

    pub fn reversed(&self) -> Self {
        match &self.kind {
            ArcKind::Segment => Arc::segment(self.end, self.start),
            ArcKind::Circular {
                center,
                radius,
                start_angle,
                sweep,
            } => Arc {
                kind: ArcKind::Circular {
                    center: *center,
                    radius: -radius,
                    start_angle: start_angle + sweep,
                    sweep: -sweep,
                },
                start: self.end,
                end: self.start,
            },
            ArcKind::Parametric { curve, t0, t1, .. } => Arc::parametric(curve.clone(), *t1, *t0),
        }
    }

    /// Change in `arg(arc(t) - z)` as `t` runs from 0 to 1.
    pub fn angle_change(&self, z: Complex64) -> f64 {
        match &self.kind {
            ArcKind::Segment => ((self.end - z) / (self.start - z)).arg(),
            ArcKind::Circular {
                center,
                radius,
                sweep,
                ..
            } => {
                let chord = ((self.end - z) / (self.start - z)).arg();
                // The closed loop arc + reversed chord winds once around the lens it bounds.
                let inside_circle = (z - center).norm() < radius.abs();
                let mid = self.eval(0.5);
                let side = |p: Complex64| cross(self.end - self.start, p - self.start);
                let same_side = side(z) * side(mid) > 0.0;
                if inside_circle && same_side {
                    chord + TAU * sweep.signum()
                } else {
                    chord
                }
            }
            ArcKind::Parametric { table, .. } => table
                .windows(2)
                .map(|w| ((w[1] - z) / (w[0] - z)).arg())
                .sum(),
        }
    }

    /// Signed area contribution `1/2 Im ∫ conj(z) dz` along the arc.
    pub fn area_term(&self) -> f64 {
        match &self.kind {
            ArcKind::Segment => 0.5 * cross(self.start, self.end),
            ArcKind::Circular {
                center,
                radius,
                sweep,
                ..
            } => {
                let r = radius.abs();
                0.5 * cross(*center, self.end - self.start) + 0.5 * r * r * sweep
            }
            ArcKind::Parametric { .. } => {
                gauss_integrate(|t| 0.5 * (self.eval(t).conj() * self.deriv(t)).im, 64)
            }
        }
    }

    /// Distance from `z` to the arc.
    pub fn distance(&self, z: Complex64) -> f64 {
        match &self.kind {
            ArcKind::Segment => {
                let d = self.end - self.start;
                let t = (((z - self.start) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (self.start + d * t - z).norm()
            }
            ArcKind::Circular {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let endpoints = (z - self.start).norm().min((z - self.end).norm());
                let rel = z - center;
                if rel.norm() == 0.0 {
                    return radius.abs();
                }
                let mut phi = (rel.arg() - start_angle) / sweep;
                // Bring the angle into the parameter range when possible.
                let period = TAU / sweep.abs();
                phi = phi.rem_euclid(period);
                if phi <= 1.0 {
                    (rel.norm() - radius.abs()).abs()
                } else {
                    endpoints
                }
            }
            ArcKind::Parametric { table, .. } => table
                .windows(2)
                .map(|w| Arc::segment(w[0], w[1]).distance(z))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Polyline approximation with `pieces + 1` points including both ends.
    pub fn polyline(&self, pieces: usize) -> Vec<Complex64> {
        (0..=pieces)
            .map(|k| self.eval(k as f64 / pieces as f64))
            .collect()
    }

    pub fn is_parametric(&self) -> bool {
        matches!(self.kind, ArcKind::Parametric { .. })
    }
}

fn arclength_from_zero(curve: &TrigCurve, t: f64) -> f64 {
    let total = *curve.arclength.last().unwrap();
    let periods = t.floor();
    periods * total + curve.cumulative(t - periods)
}

fn param_from_length(curve: &TrigCurve, s: f64) -> f64 {
    let total = *curve.arclength.last().unwrap();
    let periods = (s / total).floor();
    periods + curve.param_at(s - periods * total)
}

pub(crate) fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Composite 4-point Gauss-Legendre rule on `[0, 1]`.
pub(crate) fn gauss_integrate(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    const NODES: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const WEIGHTS: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            total += w * f(a + 0.5 * h * (x + 1.0));
        }
    }
    total * 0.5 * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circular_arc_endpoints_and_radius() {
        let a = Arc::circular(c(1.0, 0.0), c(0.0, 1.0), -2.0).unwrap();
        assert!((a.eval(0.0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((a.eval(1.0) - c(0.0, 1.0)).norm() < 1e-15);
        if let ArcKind::Circular { center, .. } = a.kind {
            for k in 0..=10 {
                let p = a.eval(k as f64 / 10.0);
                assert!(((p - center).norm() - 2.0).abs() < 1e-13);
            }
        }
        // Negative radius bulges left of travel: toward the origin here.
        assert!(a.eval(0.5).norm() < std::f64::consts::FRAC_1_SQRT_2);
        let b = Arc::circular(c(1.0, 0.0), c(0.0, 1.0), 2.0).unwrap();
        assert!(b.eval(0.5).norm() > std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn radius_below_half_chord_is_rejected() {
        assert!(Arc::circular(c(0.0, 0.0), c(2.0, 0.0), 0.9).is_none());
        assert!(Arc::circular(c(0.0, 0.0), c(2.0, 0.0), 1.0).is_some());
    }

    #[test]
    fn reversed_arc_traces_same_points() {
        let a = Arc::circular(c(1.0, 0.0), c(0.0, 1.0), 1.5).unwrap();
        let r = a.reversed();
        for k in 0..=8 {
            let t = k as f64 / 8.0;
            assert!((a.eval(t) - r.eval(1.0 - t)).norm() < 1e-14);
        }
    }

    #[test]
    fn trig_curve_interpolates_table() {
        let pts: Vec<Complex64> = (0..32)
            .map(|k| {
                let t = k as f64 / 32.0;
                Complex64::from_polar(1.0 + 0.2 * (3.0 * TAU * t).cos(), TAU * t)
            })
            .collect();
        let curve = TrigCurve::from_points(&pts);
        for (k, p) in pts.iter().enumerate() {
            assert!((curve.eval(k as f64 / 32.0) - p).norm() < 1e-13);
        }
        let circle = TrigCurve::from_points(
            &(0..16)
                .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 16.0))
                .collect::<Vec<_>>(),
        );
        assert!((circle.arclength.last().unwrap() - TAU).abs() < 1e-10);
    }

    #[test]
    fn circular_arc_angle_change_inside_lens() {
        // Outward-bulging arc from 1 to i around the origin circle.
        let a = Arc::circular(c(1.0, 0.0), c(0.0, 1.0), 1.0).unwrap();
        let z = c(0.65, 0.65);
        let pieces: f64 = (1..=2000)
            .map(|k| {
                ((a.eval(k as f64 / 2000.0) - z) / (a.eval((k - 1) as f64 / 2000.0) - z)).arg()
            })
            .sum();
        assert!((a.angle_change(z) - pieces).abs() < 1e-9);
    }
}
