//! `.pts` landmark files and the structured (JSON) landmark record.
//!
//! `.pts` files store 1-based pixel coordinates; they are shifted to the
//! 0-based convention used everywhere else on load, and back on save.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::landmarks::{LandmarkSet, Point, N_LANDMARKS};

pub fn parse_pts(text: &str, path: &Path) -> Result<LandmarkSet> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"));

    let mut n_points = None;
    loop {
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(path, "missing '{' before point list"))?;
        if line == "{" {
            break;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(path, format!("unexpected header line '{line}'")))?;
        match key.trim() {
            "version" => {}
            "n_points" => {
                let n: usize = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, format!("bad n_points '{}'", value.trim())))?;
                n_points = Some(n);
            }
            other => return Err(Error::parse(path, format!("unknown header key '{other}'"))),
        }
    }
    let n_points = n_points.ok_or_else(|| Error::parse(path, "missing n_points header"))?;
    if n_points != N_LANDMARKS {
        return Err(Error::parse(
            path,
            format!("expected {N_LANDMARKS} points, header declares {n_points}"),
        ));
    }

    let mut points = Vec::with_capacity(N_LANDMARKS);
    let mut closed = false;
    for line in lines {
        if line == "}" {
            closed = true;
            break;
        }
        let mut it = line.split_whitespace();
        let mut coord = || -> Result<f64> {
            it.next()
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::parse(path, format!("bad point line '{line}'")))
        };
        let (x, y) = (coord()?, coord()?);
        points.push(Point::new(x - 1.0, y - 1.0));
    }
    if !closed {
        return Err(Error::parse(path, "missing closing '}'"));
    }
    if points.len() != n_points {
        return Err(Error::parse(
            path,
            format!("header declares {n_points} points, found {}", points.len()),
        ));
    }
    let lms = LandmarkSet::new(points)?;
    lms.validate()?;
    Ok(lms)
}

pub fn format_pts(lms: &LandmarkSet) -> String {
    let mut out = String::from("version: 1\nn_points: 68\n{\n");
    for p in lms.points() {
        // `{}` on f64 is the shortest representation that round-trips.
        let _ = writeln!(out, "{} {}", p.x + 1.0, p.y + 1.0);
    }
    out.push_str("}\n");
    out
}

pub fn read_pts(path: &Path) -> Result<LandmarkSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pts(&text, path)
}

pub fn write_pts(path: &Path, lms: &LandmarkSet) -> Result<()> {
    fs::write(path, format_pts(lms)).map_err(|e| Error::io(path, e))
}

/// Reads the structured record `{"n_points": 68, "points": [[x, y], ...]}`
/// (0-based coordinates).
pub fn read_structured(path: &Path) -> Result<LandmarkSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_structured(path: &Path, lms: &LandmarkSet) -> Result<()> {
    let text = serde_json::to_string(lms).expect("landmarks serialize");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::tests::ring;
    use proptest::prelude::*;

    #[test]
    fn parses_one_based_coordinates() {
        let mut text = String::from("version: 1\nn_points:  68\n{\n");
        for i in 0..68 {
            text.push_str(&format!("{}.5 {}\n", i + 1, 2 * i + 1));
        }
        text.push_str("}\n");
        let lms = parse_pts(&text, Path::new("x.pts")).unwrap();
        assert_eq!(lms.get(0), Point::new(0.5, 0.0));
        assert_eq!(lms.get(67), Point::new(67.5, 134.0));
    }

    #[test]
    fn rejects_wrong_count_and_truncation() {
        let p = Path::new("bad.pts");
        assert!(parse_pts("version: 1\nn_points: 5\n{\n}\n", p).is_err());
        let mut text = String::from("version: 1\nn_points: 68\n{\n");
        for _ in 0..67 {
            text.push_str("1 1\n");
        }
        text.push_str("}\n");
        assert!(parse_pts(&text, p).is_err());
        text = text.replace("}\n", "1 1\n");
        assert!(parse_pts(&text, p).is_err());
        assert!(parse_pts("version: 1\nn_points: 68\n{\n1 x\n}", p).is_err());
    }

    proptest! {
        #[test]
        fn pts_text_round_trips(cx in -50.0f64..200.0, cy in -50.0f64..200.0, r in 0.1f64..80.0) {
            let lms = ring(cx, cy, r);
            let back = parse_pts(&format_pts(&lms), Path::new("p.pts")).unwrap();
            // the +/- 1 shift is exact up to one rounding
            prop_assert!(back.max_abs_diff(&lms) < 1e-12);
        }
    }
}
