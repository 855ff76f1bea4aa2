//! Plain SVG renderings of a planning run.

use std::fmt::Write as _;

use crate::geom::{Point2, PolygonMap};
use crate::refine::TimedTrajectory;
use crate::roadmap::{PiecewiseLinearPath, RoadmapGraph};

/// Layers drawn over the map; absent layers are skipped.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub map: &'a PolygonMap,
    pub roadmap: Option<&'a RoadmapGraph>,
    pub raw_path: Option<&'a PiecewiseLinearPath>,
    /// Densely sampled smooth path.
    pub refined: Option<&'a [Point2]>,
    pub trajectory: Option<&'a TimedTrajectory>,
}

fn points_attr(points: impl IntoIterator<Item = Point2>) -> String {
    let mut s = String::new();
    for (i, p) in points.into_iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", p.x, p.y);
    }
    s
}

/// Map, roadmap, paths and trajectory in world coordinates (y up). Each
/// obstacle is one `<polygon class="obstacle">`.
pub fn scene_svg(scene: &Scene<'_>) -> String {
    let b = scene.map.bounds();
    let (w, h) = (b.width(), b.height());
    let stroke = 0.002 * w.max(h);
    let px = 1000.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{:.0}" viewBox="{} {} {} {}">"#,
        px * h / w,
        b.min.x,
        -b.max.y,
        w,
        h
    );
    let _ = writeln!(
        s,
        r#"<style>.obstacle{{fill:#c9b88f;stroke:#6b5a34;stroke-width:{stroke}}} .roadmap{{fill:none;stroke:#9bb7d4;stroke-width:{:.3}}} .raw-path{{fill:none;stroke:#d0473b;stroke-width:{stroke};stroke-dasharray:{:.1}}} .refined-path{{fill:none;stroke:#2f7d32;stroke-width:{stroke}}} .trajectory{{fill:none;stroke:#1c1c8c;stroke-width:{:.3}}}</style>"#,
        0.5 * stroke,
        4.0 * stroke,
        1.5 * stroke
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{w}" height="{h}" fill="#eaf2fb"/>"##,
        b.min.x, b.min.y
    );
    for obs in scene.map.obstacles() {
        let _ = writeln!(
            s,
            r#"<polygon class="obstacle" points="{}"/>"#,
            points_attr(obs.vertices().iter().copied())
        );
    }
    if let Some(g) = scene.roadmap {
        let mut d = String::new();
        for e in g.edges() {
            let (a, c) = (g.nodes()[e.a], g.nodes()[e.b]);
            let _ = write!(d, "M{:.2} {:.2}L{:.2} {:.2}", a.x, a.y, c.x, c.y);
        }
        let _ = writeln!(s, r#"<path class="roadmap" d="{d}"/>"#);
    }
    if let Some(p) = scene.raw_path {
        let _ = writeln!(
            s,
            r#"<polyline class="raw-path" points="{}"/>"#,
            points_attr(p.waypoints().iter().copied())
        );
    }
    if let Some(p) = scene.refined {
        let _ = writeln!(
            s,
            r#"<polyline class="refined-path" points="{}"/>"#,
            points_attr(p.iter().copied())
        );
    }
    if let Some(t) = scene.trajectory {
        let _ = writeln!(
            s,
            r#"<polyline class="trajectory" points="{}"/>"#,
            points_attr(t.eta.iter().map(|e| Point2::new(e[0], e[1])))
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Heading and body velocities against time, one panel each.
pub fn states_svg(traj: &TimedTrajectory) -> String {
    let panels: [(&str, Vec<f64>); 4] = [
        ("psi [rad]", traj.eta.iter().map(|e| e[2]).collect()),
        ("u [m/s]", traj.nu.iter().map(|v| v[0]).collect()),
        ("v [m/s]", traj.nu.iter().map(|v| v[1]).collect()),
        ("r [rad/s]", traj.nu.iter().map(|v| v[2]).collect()),
    ];
    let (width, panel_h, left, pad) = (800.0, 160.0, 70.0, 20.0);
    let plot_w = width - left - pad;
    let height = panels.len() as f64 * (panel_h + pad) + pad + 20.0;
    let t0 = traj.t.first().copied().unwrap_or(0.0);
    let t1 = traj.t.last().copied().unwrap_or(1.0);
    let tspan = (t1 - t0).max(f64::MIN_POSITIVE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    for (i, (label, ys)) in panels.iter().enumerate() {
        let top = pad + i as f64 * (panel_h + pad);
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi - lo > 1e-12 { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        let _ = writeln!(
            s,
            r##"<rect class="panel" x="{left}" y="{top}" width="{plot_w}" height="{panel_h}" fill="none" stroke="#888"/>"##
        );
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{label}</text>"#, top + panel_h / 2.0);
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{hi:.3}</text>"#, top + 10.0);
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{lo:.3}</text>"#, top + panel_h);
        let pts: Vec<String> = traj
            .t
            .iter()
            .zip(ys)
            .map(|(&t, &y)| {
                let x = left + plot_w * (t - t0) / tspan;
                let yy = top + panel_h * (1.0 - (y - lo) / (hi - lo));
                format!("{x:.2},{yy:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="series" points="{}" fill="none" stroke="#1c1c8c"/>"##,
            pts.join(" ")
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{:.1}">t = {t0:.1} s</text><text x="{:.1}" y="{:.1}" text-anchor="end">t = {t1:.1} s</text>"#,
        height - 6.0,
        width - pad,
        height - 6.0
    );
    s.push_str("</svg>\n");
    s
}
