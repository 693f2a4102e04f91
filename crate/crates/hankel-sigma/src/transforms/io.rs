use std::fmt::Write as _;

use num_complex::Complex64;

use super::{Grid, GridFunction, LinearGrid, LogGrid, TransformError};

/// CSV with columns `x,re,im`, preceded by a `#` line describing the grid.
/// Values use shortest round-trip formatting, so parsing restores them bit-exactly.
pub fn grid_function_to_csv(f: &GridFunction) -> String {
    let mut out = String::new();
    match f.grid {
        Grid::Log(g) => {
            let _ = writeln!(out, "# log x_min={} x_max={} n_points={}", g.x_min(), g.x_max(), g.n_points());
        }
        Grid::Linear(g) => {
            let _ = writeln!(out, "# linear start={} step={} n_points={}", g.start, g.step, g.n_points);
        }
    }
    out.push_str("x,re,im\n");
    for (x, v) in f.grid.coordinates().iter().zip(&f.values) {
        let _ = writeln!(out, "{x},{},{}", v.re, v.im);
    }
    out
}

fn header_fields(line: &str) -> Result<(String, Vec<(String, String)>), TransformError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| TransformError::Csv("missing grid header".into()))?;
    let mut parts = body.split_whitespace();
    let kind = parts.next().ok_or_else(|| TransformError::Csv("empty grid header".into()))?.to_string();
    let fields = parts
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| TransformError::Csv(format!("bad header field {p:?}")))
        })
        .collect::<Result<_, _>>()?;
    Ok((kind, fields))
}

fn field<T: std::str::FromStr>(fields: &[(String, String)], name: &str) -> Result<T, TransformError> {
    let raw = fields
        .iter()
        .find(|(k, _)| k == name)
        .map(|(_, v)| v)
        .ok_or_else(|| TransformError::Csv(format!("header lacks {name}")))?;
    raw.parse().map_err(|_| TransformError::Csv(format!("bad value {raw:?} for {name}")))
}

fn parse_f64(s: &str, line: usize) -> Result<f64, TransformError> {
    s.trim().parse().map_err(|_| TransformError::Csv(format!("line {line}: cannot parse {s:?}")))
}

pub fn grid_function_from_csv(text: &str) -> Result<GridFunction, TransformError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| TransformError::Csv("empty input".into()))?;
    let (kind, fields) = header_fields(header)?;
    let grid = match kind.as_str() {
        "log" => Grid::Log(LogGrid::new(field(&fields, "x_min")?, field(&fields, "x_max")?, field(&fields, "n_points")?)?),
        "linear" => Grid::Linear(LinearGrid {
            start: field(&fields, "start")?,
            step: field(&fields, "step")?,
            n_points: field(&fields, "n_points")?,
        }),
        other => return Err(TransformError::Csv(format!("unknown grid kind {other:?}"))),
    };
    if lines.next().map(str::trim) != Some("x,re,im") {
        return Err(TransformError::Csv("expected column header x,re,im".into()));
    }
    let mut values = Vec::with_capacity(grid.n_points());
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(TransformError::Csv(format!("line {}: expected 3 columns", i + 3)));
        }
        parse_f64(cols[0], i + 3)?;
        values.push(Complex64::new(parse_f64(cols[1], i + 3)?, parse_f64(cols[2], i + 3)?));
    }
    GridFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let grid = LogGrid::new(-3.0, 2.5, 64).unwrap();
        let f = GridFunction::sample_log(grid, |t| (1.0 / 3.0) * t.sin() / (1.0 + t)).unwrap();
        let back = grid_function_from_csv(&grid_function_to_csv(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_short_input() {
        let grid = LogGrid::new(-3.0, 2.5, 64).unwrap();
        let f = GridFunction::sample_log(grid, |t| t).unwrap();
        let csv = grid_function_to_csv(&f);
        let truncated: String = csv.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(grid_function_from_csv(&truncated), Err(TransformError::LengthMismatch { .. })));
    }
}
