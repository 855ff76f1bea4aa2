use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::Point2;

use super::GeometricPath;

/// Positions and tangent headings at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedSamples {
    pub t: Vec<f64>,
    pub position: Vec<Point2>,
    /// Unwrapped tangent heading.
    pub heading: Vec<f64>,
    pub speed: f64,
    pub dt: f64,
    /// Travel time; `t[k] = k * (t_max / intervals)`.
    pub t_max: f64,
}

impl TimedSamples {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

}

/// Traverses `gp` at constant `cruise_speed`, sampled at `intervals + 1`
/// uniformly spaced times from 0 to `length / cruise_speed`.
pub fn assign_time(gp: &GeometricPath, cruise_speed: f64, intervals: usize) -> Result<TimedSamples> {
    if !(cruise_speed.is_finite() && cruise_speed > 0.0) {
        return Err(Error::Parameter(format!(
            "cruise speed must be positive, got {cruise_speed}"
        )));
    }
    if intervals == 0 {
        return Err(Error::Parameter("need at least one time interval".into()));
    }
    let length = gp.length();
    let t_max = length / cruise_speed;
    let dt = t_max / intervals as f64;
    let mut t = Vec::with_capacity(intervals + 1);
    let mut position = Vec::with_capacity(intervals + 1);
    let mut heading: Vec<f64> = Vec::with_capacity(intervals + 1);
    for k in 0..=intervals {
        let tk = k as f64 * dt;
        let (p, h) = gp.eval(length * k as f64 / intervals as f64);
        t.push(tk);
        position.push(p);
        heading.push(match heading.last() {
            Some(&prev) => unwrap_near(h, prev),
            None => h,
        });
    }
    Ok(TimedSamples {
        t,
        position,
        heading,
        speed: cruise_speed,
        dt,
        t_max,
    })
}

/// The angle congruent to `a` closest to `reference`.
pub fn unwrap_near(a: f64, reference: f64) -> f64 {
    a - 2.0 * PI * ((a - reference) / (2.0 * PI)).round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::PathElement;

    #[test]
    fn straight_line_midpoint() {
        let gp = GeometricPath::new(vec![PathElement::Line {
            a: Point2::new(0.0, 0.0),
            b: Point2::new(100.0, 0.0),
        }])
        .unwrap();
        let s = assign_time(&gp, 5.0, 4).unwrap();
        assert_eq!(s.t_max, 20.0);
        assert_eq!(s.t[2], 10.0);
        assert_eq!(s.position[2], Point2::new(50.0, 0.0));
        assert!(s.heading.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn quarter_arc_heading_is_linear_in_time() {
        let gp = GeometricPath::new(vec![PathElement::Arc {
            center: Point2::new(0.0, 0.0),
            radius: 10.0,
            start_angle: -PI / 2.0,
            sweep: PI / 2.0,
        }])
        .unwrap();
        let s = assign_time(&gp, 5.0, 8).unwrap();
        assert!((s.t_max - PI).abs() < 1e-12);
        for (t, h) in s.t.iter().zip(&s.heading) {
            // Heading rate equals speed over radius.
            assert!((h - 0.5 * t).abs() < 1e-12, "t {t} heading {h}");
        }
        let spacing: Vec<f64> = s.t.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(spacing.iter().all(|d| (d - s.dt).abs() < 1e-12));
    }

    #[test]
    fn unwrap_keeps_steps_below_pi() {
        assert!((unwrap_near(-3.1, 3.1) - (2.0 * PI - 3.1)).abs() < 1e-12);
        assert_eq!(unwrap_near(0.5, 0.4), 0.5);
    }

    #[test]
    fn rejects_bad_speed() {
        let gp = GeometricPath::new(vec![PathElement::Line {
            a: Point2::new(0.0, 0.0),
            b: Point2::new(1.0, 0.0),
        }])
        .unwrap();
        assert!(assign_time(&gp, 0.0, 4).is_err());
        assert!(assign_time(&gp, 1.0, 0).is_err());
    }
}
