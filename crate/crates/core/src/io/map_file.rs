//! Line-oriented map format:
//!
//! ```text
//! # comment
//! bounds 0 0 1000 800
//! margin 25
//! obstacle
//! v 100 100
//! v 200 100
//! v 150 180
//! ```
//!
//! `bounds` comes first and once; `margin` is optional (default 0). Each
//! `obstacle` line opens a polygon whose vertices follow as `v x y` lines.
//! A vertex repeating the one before it is dropped with a warning.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{Point2, Polygon, PolygonMap, Rect};

pub fn load_map(path: impl AsRef<Path>) -> Result<PolygonMap> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_map(&text, &path.display().to_string())
}

struct PendingObstacle {
    line: usize,
    vertices: Vec<Point2>,
    vertex_lines: Vec<usize>,
}

/// Parses map text. `origin` names the source in error messages.
pub fn parse_map(text: &str, origin: &str) -> Result<PolygonMap> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut bounds: Option<Rect> = None;
    let mut margin = 0.0;
    let mut margin_seen = false;
    let mut pending: Vec<PendingObstacle> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().unwrap_or_default();
        let args: Vec<&str> = tokens.collect();
        let numbers = |expected: usize| -> Result<Vec<f64>> {
            if args.len() != expected {
                return Err(err(
                    line,
                    format!("`{keyword}` takes {expected} numbers, found {}", args.len()),
                ));
            }
            args.iter()
                .map(|a| match a.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(err(line, format!("`{a}` is not a finite number"))),
                })
                .collect()
        };
        match keyword {
            "bounds" => {
                if bounds.is_some() {
                    return Err(err(line, "`bounds` given twice".into()));
                }
                let b = numbers(4)?;
                let rect = Rect::new(Point2::new(b[0], b[1]), Point2::new(b[2], b[3]))
                    .map_err(|e| err(line, e.to_string()))?;
                bounds = Some(rect);
            }
            "margin" => {
                if margin_seen {
                    return Err(err(line, "`margin` given twice".into()));
                }
                let m = numbers(1)?[0];
                if m < 0.0 {
                    return Err(err(line, format!("margin must be >= 0, got {m}")));
                }
                margin = m;
                margin_seen = true;
            }
            "obstacle" => {
                numbers(0)?;
                if bounds.is_none() {
                    return Err(err(line, "`obstacle` before `bounds`".into()));
                }
                pending.push(PendingObstacle {
                    line,
                    vertices: Vec::new(),
                    vertex_lines: Vec::new(),
                });
            }
            "v" => {
                let xy = numbers(2)?;
                let Some(obs) = pending.last_mut() else {
                    return Err(err(line, "vertex outside of an `obstacle` block".into()));
                };
                let p = Point2::new(xy[0], xy[1]);
                if obs.vertices.last() == Some(&p) {
                    log::warn!("{origin}:{line}: duplicate vertex ({}, {}) dropped", p.x, p.y);
                    continue;
                }
                obs.vertices.push(p);
                obs.vertex_lines.push(line);
            }
            other => return Err(err(line, format!("unknown keyword `{other}`"))),
        }
    }

    let Some(bounds) = bounds else {
        return Err(err(text.lines().count().max(1), "missing `bounds` line".into()));
    };
    let mut obstacles = Vec::with_capacity(pending.len());
    for (k, obs) in pending.iter().enumerate() {
        if let Some(i) = obs.vertices.iter().position(|&v| !bounds.contains(v)) {
            let v = obs.vertices[i];
            return Err(err(
                obs.vertex_lines[i],
                format!("obstacle {k} vertex {i} ({}, {}) lies outside the bounds", v.x, v.y),
            ));
        }
        let poly = Polygon::new(obs.vertices.clone())
            .map_err(|e| err(obs.line, format!("obstacle {k}: {e}")))?;
        obstacles.push(poly);
    }
    PolygonMap::new(bounds, obstacles, margin).map_err(|e| err(1, e.to_string()))
}

/// Text that [`parse_map`] reads back to an equal map.
pub fn format_map(map: &PolygonMap) -> String {
    let b = map.bounds();
    let mut out = String::new();
    let _ = writeln!(out, "bounds {:?} {:?} {:?} {:?}", b.min.x, b.min.y, b.max.x, b.max.y);
    if map.safety_margin() > 0.0 {
        let _ = writeln!(out, "margin {:?}", map.safety_margin());
    }
    for obs in map.obstacles() {
        out.push_str("obstacle\n");
        for v in obs.vertices() {
            let _ = writeln!(out, "v {:?} {:?}", v.x, v.y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = "bounds 0 0 100 100\nobstacle\nv 10 10\nv 50 10\nv 30 40\n";

    #[test]
    fn minimal_file() {
        let map = parse_map(TRIANGLE, "t").unwrap();
        assert_eq!(map.obstacles().len(), 1);
        assert_eq!(map.safety_margin(), 0.0);
    }

    #[test]
    fn comments_and_margin() {
        let text = "# harbour\nbounds 0 0 100 100   # whole area\n\nmargin 5\n";
        let map = parse_map(text, "t").unwrap();
        assert_eq!(map.safety_margin(), 5.0);
        assert!(map.obstacles().is_empty());
    }

    #[test]
    fn vertex_outside_bounds_names_index_and_line() {
        let text = "bounds 0 0 100 100\nobstacle\nv 10 10\nv 150 10\nv 30 40\n";
        let e = parse_map(text, "m.txt").unwrap_err().to_string();
        assert!(e.starts_with("m.txt:4:"), "{e}");
        assert!(e.contains("vertex 1"), "{e}");
    }

    #[test]
    fn duplicate_vertex_is_collapsed() {
        let text = "bounds 0 0 100 100\nobstacle\nv 10 10\nv 50 10\nv 50 10\nv 30 40\n";
        let map = parse_map(text, "t").unwrap();
        assert_eq!(map.obstacles()[0].len(), 3);
    }

    #[test]
    fn self_intersection_reports_obstacle_line() {
        let text = "bounds 0 0 100 100\n\nobstacle\nv 0 0\nv 10 10\nv 10 0\nv 0 4\n";
        match parse_map(text, "t").unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("intersect"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn syntax_errors_are_line_precise() {
        for (text, line) in [
            ("bounds 0 0 100\n", 1),
            ("bounds 0 0 100 100\nv 1 1\n", 2),
            ("bounds 0 0 100 100\nobstacle\nv 1 x\n", 3),
            ("bounds 0 0 100 100\nisland\n", 2),
            ("obstacle\n", 1),
            ("margin 1\n", 1),
            ("bounds 0 0 100 100\nmargin -1\n", 2),
        ] {
            match parse_map(text, "t") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn format_round_trip() {
        let text = "bounds -1.5 0 100 100\nmargin 2.25\nobstacle\nv 10.1 10\nv 50 10\nv 30 40.7\n";
        let map = parse_map(text, "t").unwrap();
        assert_eq!(parse_map(&format_map(&map), "t").unwrap(), map);
    }
}
