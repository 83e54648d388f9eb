//! Plain-text point files: one `x y` pair per line.

use std::fmt::Write;

use num_complex::Complex64;

/// Parses `x y` lines; blank lines and lines starting with `#` are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Complex64>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("line {}: expected two numbers `x y`", i + 1));
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("line {}: `{s}` is not a finite number", i + 1))
        };
        out.push(Complex64::new(parse(x)?, parse(y)?));
    }
    Ok(out)
}

/// Shortest round-trip formatting; non-finite images become `inf inf`.
pub fn format_points(points: &[Complex64]) -> String {
    let mut s = String::with_capacity(40 * points.len());
    for z in points {
        if z.re.is_finite() && z.im.is_finite() {
            let _ = writeln!(s, "{:?} {:?}", z.re, z.im);
        } else {
            s.push_str("inf inf\n");
        }
    }
    s
}
