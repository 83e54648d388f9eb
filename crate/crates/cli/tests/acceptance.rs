//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use confmap::aaa::{aaa_fit, cleanup, poles_residues_zeros, BarycentricRational};
use confmap::conformal::{
    interior_points, map_document, map_region, verify_map, ConformalMap, MapMethod, MapOptions,
};
use confmap::geometry::{parse_region, Region, RegionSpec};
use confmap::lightning::{
    place_poles, solve_dirichlet_with, DirichletOptions, IterationRecord, Method,
};
use num_complex::Complex64;

const TOL: f64 = 1e-6;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn regions() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../regions")
}

fn text(name: &str) -> String {
    std::fs::read_to_string(regions().join(format!("{name}.json"))).unwrap()
}

fn map_named(name: &str, opts: &MapOptions) -> (Region, ConformalMap) {
    map_document(&text(name), opts).unwrap()
}

fn opts(tol: f64, method: MapMethod) -> MapOptions {
    MapOptions {
        tol,
        method,
        ..Default::default()
    }
}

fn poles(r: &BarycentricRational) -> Vec<Complex64> {
    poles_residues_zeros(r)
        .poles
        .into_iter()
        .filter(|p| p.re.is_finite() && p.im.is_finite())
        .collect()
}

fn sorted_distances(poles: &[Complex64], z: Complex64, radius: f64) -> Vec<f64> {
    let mut d: Vec<f64> = poles
        .iter()
        .map(|p| (p - z).norm())
        .filter(|&d| d < radius)
        .collect();
    d.sort_by(f64::total_cmp);
    d
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Points spread evenly over the disk `|w| < radius` (sunflower pattern).
fn disk_points(n: usize, radius: f64) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            Complex64::from_polar(
                radius * ((k as f64 + 0.5) / n as f64).sqrt(),
                golden * k as f64,
            )
        })
        .collect()
}

fn scaled(spec: &RegionSpec, s: f64) -> RegionSpec {
    let pts = |v: &[[f64; 2]]| v.iter().map(|p| [s * p[0], s * p[1]]).collect();
    match spec {
        RegionSpec::Polygon { vertices } => RegionSpec::Polygon {
            vertices: pts(vertices),
        },
        RegionSpec::Smooth { points } => RegionSpec::Smooth {
            points: pts(points),
        },
        RegionSpec::CircularPolygon { sides } => RegionSpec::CircularPolygon {
            sides: sides
                .iter()
                .map(|side| {
                    let mut side = side.clone();
                    side.start = [s * side.start[0], s * side.start[1]];
                    side.radius = side.radius.map(|r| s * r);
                    side
                })
                .collect(),
        },
        RegionSpec::Annulus { outer, inner } => RegionSpec::Annulus {
            outer: Box::new(scaled(outer, s)),
            inner: Box::new(scaled(inner, s)),
        },
        RegionSpec::DisjointPair { left, right } => RegionSpec::DisjointPair {
            left: Box::new(scaled(left, s)),
            right: Box::new(scaled(right, s)),
        },
    }
}

/// Modulus of `{|z| < 1} \ {|z - c| <= r}` from the Möbius map to a concentric annulus.
fn eccentric_oracle(c: f64, r: f64) -> f64 {
    let b = 1.0 + c * c - r * r;
    let a = (b - (b * b - 4.0 * c * c).sqrt()) / (2.0 * c);
    ((c + r - a) / (1.0 - a * (c + r))).abs()
}

/// Modulus of the exterior of the circles `|z -+ d| = r` (Möbius oracle).
fn pair_oracle(d: f64, r: f64) -> f64 {
    let a = (d * d - r * r).sqrt();
    let q = (a - (d - r)) / (a + (d - r));
    q * q
}

fn c1() -> Outcome {
    let start = Instant::now();
    let (region, map) = map_named("disk", &MapOptions::default());
    let secs = start.elapsed().as_secs_f64();
    let mut z: Vec<Complex64> = (0..500)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 500.0))
        .collect();
    z.extend(interior_points(&region, 500, 1));
    let err = map
        .forward_at(&z)
        .iter()
        .zip(&z)
        .map(|(w, z)| (w - z).norm())
        .fold(0.0, f64::max);
    outcome(
        z.len() == 1000 && err <= 1e-8 && secs < 1.0,
        format!(
            "max |f(z) - z| = {err:.2e} (<= 1e-8) on {} points, {secs:.3} s (< 1 s)",
            z.len()
        ),
    )
}

fn c2() -> Outcome {
    let start = Instant::now();
    let (region, map) = map_named("lobe", &opts(1e-5, MapMethod::Polynomial));
    let secs = start.elapsed().as_secs_f64();
    let fwd = poles(&map.forward)
        .iter()
        .map(|&p| region.distance_to_boundary(p))
        .fold(f64::INFINITY, f64::min);
    let inv = poles(&map.inverse)
        .iter()
        .map(|p| (p.norm() - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    let (df, di) = map.degrees;
    outcome(
        map.converged
            && map.boundary_error <= 1e-4
            && df <= 60
            && di <= 60
            && (0.02..=0.5).contains(&fwd)
            && (0.01..=0.3).contains(&inv)
            && secs <= 10.0,
        format!(
            "converged {}, boundary {:.2e} (<= 1e-4), degrees ({df}, {di}) (<= 60), closest poles {fwd:.3} in [0.02, 0.5] and {inv:.3} in [0.01, 0.3], {secs:.2} s (<= 10 s)",
            map.converged, map.boundary_error
        ),
    )
}

fn c3() -> Outcome {
    let out = std::env::temp_dir().join(format!(
        "confmap-acceptance-{}-deeplobe.json",
        std::process::id()
    ));
    let run = Command::new(env!("CARGO_BIN_EXE_confmap"))
        .arg("map")
        .arg(regions().join("deeplobe.json"))
        .args(["--method", "polynomial", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    let written = out.exists();
    let _ = std::fs::remove_file(&out);
    let code = run.status.code();
    outcome(
        code == Some(3)
            && written
            && stdout.contains("converged    false")
            && stdout.contains("crowding"),
        format!(
            "exit {code:?} (3), artifact written {written}, report cites crowding {}",
            stdout.contains("crowding")
        ),
    )
}

fn c4() -> Outcome {
    let start = Instant::now();
    let (region, map) = map_named("pentagon", &opts(TOL, MapMethod::Lightning));
    let secs = start.elapsed().as_secs_f64();
    let rep = verify_map(&map, &region, 1000, 7).unwrap();
    let fp = poles(&map.forward);
    let counts: Vec<usize> = region
        .corners()
        .map(|c| sorted_distances(&fp, c.vertex, 0.5).len())
        .collect();
    let d = sorted_distances(&fp, Complex64::new(1.0, 0.0), 0.5);
    let ratios: Vec<f64> = d.windows(2).map(|w| w[1] / w[0]).collect();
    outcome(
        rep.boundary_error <= 1e-5
            && rep.round_trip_error <= 1e-4
            && rep.test_points == 1000
            && counts.len() == 5
            && counts.iter().all(|&n| n >= 3)
            && !ratios.is_empty()
            && ratios.iter().all(|r| (1.5..=6.0).contains(r))
            && secs <= 10.0,
        format!(
            "boundary {:.2e} (<= 1e-5), round trip {:.2e} (<= 1e-4), poles within 0.5 per vertex {counts:?} (>= 3), ratios at z=1 {} in [1.5, 6], {secs:.2} s",
            rep.boundary_error,
            rep.round_trip_error,
            fmt_list(&ratios)
        ),
    )
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.2}")).collect();
    format!("[{}]", items.join(", "))
}

fn c5() -> Outcome {
    let (region, map) = map_named("lshape", &opts(TOL, MapMethod::Lightning));
    let fp = poles(&map.forward);
    let mut near_reentrant = 0;
    let mut near_salient = 0;
    let mut spacing = Vec::new();
    let mut placed = f64::NAN;
    for c in region.corners() {
        if c.alpha > 1.0 {
            let set = place_poles(c, 25, c.local_scale);
            placed = median(set.distances.windows(2).map(|w| w[1] / w[0]).collect());
            near_reentrant = sorted_distances(&fp, c.vertex, 0.1).len();
            let d = sorted_distances(&fp, c.vertex, f64::INFINITY);
            spacing = d[..25.min(d.len())]
                .windows(2)
                .map(|w| w[1] / w[0])
                .collect();
        } else {
            near_salient += sorted_distances(&fp, c.vertex, 0.02).len();
        }
    }
    let ratio = if spacing.len() == 24 {
        median(spacing)
    } else {
        f64::NAN
    };
    outcome(
        near_reentrant >= 3
            && near_salient == 0
            && (ratio - 1.4).abs() <= 0.4
            && (placed - 1.4).abs() <= 0.4,
        format!(
            "{near_reentrant} poles within 0.1 of the reentrant corner (>= 3), {near_salient} within 0.02 of salient corners (0), median spacing ratio of the 25 nearest {ratio:.2} and of 25 placed lightning poles {placed:.2} (1.4 +- 0.4)"
        ),
    )
}

fn c6() -> Outcome {
    let (_, map) = map_named("circpoly", &opts(TOL, MapMethod::Lightning));
    let ext_opts = MapOptions {
        aaa_mmax: 400,
        ..opts(TOL, MapMethod::Lightning)
    };
    let (ext, emap) = map_named("circpoly-ext", &ext_opts);
    let data = |z: Complex64, _: usize| ext.log_data(z);
    let model = solve_dirichlet_with(
        &ext,
        &data,
        &DirichletOptions {
            tol: TOL,
            ..Default::default()
        },
    )
    .unwrap();
    let basis: Vec<Complex64> = model
        .pole_sets()
        .flat_map(|(s, _)| s.poles.clone())
        .collect();
    let outside = basis
        .iter()
        .filter(|&&p| ext.contains(p) || ext.distance_to_boundary(p) == 0.0)
        .count();
    outcome(
        map.converged
            && map.boundary_error <= 1e-5
            && emap.converged
            && emap.boundary_error <= 1e-5
            && !basis.is_empty()
            && outside == 0,
        format!(
            "interior: converged {} boundary {:.2e}; ext-ext: converged {} boundary {:.2e}, {} of {} basis poles outside P",
            map.converged,
            map.boundary_error,
            emap.converged,
            emap.boundary_error,
            outside,
            basis.len()
        ),
    )
}

fn modulus_of(spec: &RegionSpec) -> f64 {
    let region = Region::from_spec(spec, None).unwrap();
    map_region(&region, &MapOptions::default())
        .unwrap()
        .modulus
        .unwrap()
}

fn c7() -> Outcome {
    let (_, conc) = map_named("annulus", &MapOptions::default());
    let rho = conc.modulus.unwrap();
    let ecc = parse_region(&text("eccentric")).unwrap();
    let rho_e = modulus_of(&ecc.spec);
    let oracle = eccentric_oracle(0.3, 0.3);
    let rho_e3 = modulus_of(&scaled(&ecc.spec, 3.0));
    let rho_c3 = modulus_of(&scaled(&parse_region(&text("annulus")).unwrap().spec, 3.0));
    let shift = (rho_e3 - rho_e).abs().max((rho_c3 - rho).abs());
    outcome(
        (rho - 0.5).abs() <= 1e-8 && (rho_e - oracle).abs() <= 1e-6 && shift <= 10.0 * TOL,
        format!(
            "concentric rho {rho:.10} (0.5 +- 1e-8), eccentric {rho_e:.10} vs oracle {oracle:.10} (+- 1e-6), change under scaling by 3 {shift:.1e} (<= 1e-5)"
        ),
    )
}

fn c8() -> Outcome {
    let (region, map) = map_named("pair", &MapOptions::default());
    let rep = verify_map(&map, &region, 1000, 3).unwrap();
    let rho = map.modulus.unwrap();
    let oracle = pair_oracle(2.0, 1.0);
    let inside: Vec<Complex64> = poles(&map.inverse)
        .into_iter()
        .filter(|p| p.norm() > rho && p.norm() < 1.0)
        .collect();
    let simple = inside.len() == 1 && {
        let pd = poles_residues_zeros(&map.inverse);
        let k = pd.poles.iter().position(|p| *p == inside[0]).unwrap();
        pd.residues[k].norm() > 1e-8
    };
    outcome(
        map.converged && inside.len() == 1 && simple && rep.inverse_poles_in_target == 1 && (rho - oracle).abs() <= 1e-6,
        format!(
            "converged {}, inverse poles inside the annulus {} (1), rho {rho:.10} vs oracle {oracle:.10} (+- 1e-6)",
            map.converged,
            inside.len()
        ),
    )
}

fn c9() -> Outcome {
    let (_, map) = map_named("pentagon", &opts(TOL, MapMethod::Lightning));
    let s: &[IterationRecord] = &map.diagnostics.schedule;
    let x: Vec<f64> = s.iter().map(|r| (r.dof as f64).sqrt()).collect();
    let y: Vec<f64> = s.iter().map(|r| r.error.log10()).collect();
    let r = correlation(&x, &y);
    let decreasing = s.windows(2).all(|w| w[1].error <= w[0].error);
    outcome(
        s.len() >= 3 && decreasing && r <= -0.9,
        format!("{} schedule steps, decreasing {decreasing}, r(log10 error, sqrt dof) = {r:.3} (<= -0.9)", s.len()),
    )
}

/// Log-linear interpolation of a solver's error at `dof`.
fn error_at(history: &[IterationRecord], dof: usize) -> f64 {
    let x = dof as f64;
    for w in history.windows(2) {
        let (a, b) = (w[0].dof as f64, w[1].dof as f64);
        if (a..=b).contains(&x) {
            let t = (x - a) / (b - a);
            return (w[0].error.ln() * (1.0 - t) + w[1].error.ln() * t).exp();
        }
    }
    f64::NAN
}

fn c10() -> Outcome {
    let region = parse_region(&text("lshape")).unwrap();
    let data = |z: Complex64, _: usize| region.log_data(z);
    let solve = |method, tol| {
        solve_dirichlet_with(
            &region,
            &data,
            &DirichletOptions {
                tol,
                method,
                max_dof: 1000,
            },
        )
        .unwrap()
    };
    let corner = solve(Method::CornerBasis, 1e-8);
    let light = solve(Method::Lightning, 1e-8);
    let h = &corner.history;
    let x: Vec<f64> = h.iter().map(|r| r.per_corner as f64).collect();
    let y: Vec<f64> = h.iter().map(|r| r.error.ln()).collect();
    let r = correlation(&x, &y);
    let dof = h.last().unwrap().dof;
    let rival = error_at(&light.history, dof);
    outcome(
        corner.converged
            && corner.error <= 1e-8
            && corner.term_count() <= 120
            && r <= -0.95
            && corner.error < rival,
        format!(
            "error {:.2e} (<= 1e-8) with {} terms (<= 120), r(ln error, terms per corner) = {r:.3} (<= -0.95), lightning at {dof} dof {rival:.2e}",
            corner.error,
            corner.term_count()
        ),
    )
}

fn c11() -> Outcome {
    let z: Vec<Complex64> = (0..200)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 200.0))
        .collect();
    let f: Vec<Complex64> = z.iter().map(|z| (z * 2.0).exp() / (z - 1.5)).collect();
    let fit = aaa_fit(&z, &f, 1e-10, 100).unwrap();
    let r = &fit.rational;
    let exact = r
        .support
        .iter()
        .zip(&r.values)
        .all(|(s, v)| r.eval(*s) == *v);

    let g: Vec<Complex64> = z.iter().map(|z| (z - 2.0).inv()).collect();
    let pd = poles_residues_zeros(&aaa_fit(&z, &g, 1e-12, 100).unwrap().rational);
    let recovered = pd.poles.len() == 1
        && (pd.poles[0] - 2.0).norm() <= 1e-8
        && (pd.residues[0] - 1.0).norm() <= 1e-8;

    let noisy: Vec<Complex64> = g
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let h = (k as f64 * 12.9898).sin() * 43758.5453;
            let e = 2.0 * (h - h.floor()) - 1.0;
            v + Complex64::new(e, -e * 0.7) * 1e-14
        })
        .collect();
    let raw = aaa_fit(&z, &noisy, 1e-15, 30).unwrap();
    let raw_poles = poles(&raw.rational).len();
    let cleaned = poles(&cleanup(&raw.rational, &z, &noisy, 1e-8));
    let doublets_gone = raw_poles > 1 && cleaned.len() == 1 && (cleaned[0] - 2.0).norm() <= 1e-6;

    let mixed: Vec<Complex64> = z
        .iter()
        .map(|z| (z * 3.0).exp() + (z - 1.2).inv())
        .collect();
    let lin = aaa_fit(&z, &mixed, 1e-13, 100).unwrap().linearized;
    let monotone = lin.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    outcome(
        exact && recovered && doublets_gone && monotone,
        format!(
            "support interpolation exact {exact}, 1/(z-2) recovered {recovered}, doublets {raw_poles} -> {} poles, residual monotone {monotone}",
            cleaned.len()
        ),
    )
}

fn c12() -> Outcome {
    let (_, map) = map_named("lshape", &opts(TOL, MapMethod::Lightning));
    let w = disk_points(10_000, 1.0);
    let start = Instant::now();
    let z = map.inverse_at(&w);
    let secs = start.elapsed().as_secs_f64();
    let finite = z.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    outcome(
        finite && z.len() == 10_000 && secs <= 0.5,
        format!("10000 inverse evaluations in {secs:.4} s (<= 0.5 s), all finite {finite}"),
    )
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("identity disk", c1),
        ("smooth 5-lobe, polynomial", c2),
        ("deep 5-lobe fails and flags", c3),
        ("regular pentagon, lightning", c4),
        ("L-shape pole clustering", c5),
        ("circular polygon, interior and ext-ext", c6),
        ("annulus moduli", c7),
        ("disjoint pair", c8),
        ("root-exponential convergence", c9),
        ("corner basis on the L-shape", c10),
        ("AAA unit suite", c11),
        ("evaluation throughput", c12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !res.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if res.pass { "PASS" } else { "FAIL" },
            res.detail,
            start.elapsed().as_secs_f64()
        );
        let _ = std::io::stdout().flush();
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
