use crate::error::{Error, Result};
use crate::geom::PolygonMap;
use crate::roadmap::PiecewiseLinearPath;

/// Greedy line-of-sight reduction: from each anchor, jump to the farthest
/// later waypoint that one collision-free segment reaches.
pub fn reduce_waypoints(path: &PiecewiseLinearPath, map: &PolygonMap) -> Result<PiecewiseLinearPath> {
    if !path.is_collision_free(map) {
        return Err(Error::InvalidPath(
            "cannot reduce a path that is not collision-free".into(),
        ));
    }
    let wp = path.waypoints();
    let mut out = vec![wp[0]];
    let mut anchor = 0;
    while anchor + 1 < wp.len() {
        let next = (anchor + 1..wp.len())
            .rev()
            .find(|&j| j == anchor + 1 || map.segment_free_unchecked(wp[anchor], wp[j]))
            .expect("the adjacent waypoint is always reachable");
        out.push(wp[next]);
        anchor = next;
    }
    PiecewiseLinearPath::new(out)
}
