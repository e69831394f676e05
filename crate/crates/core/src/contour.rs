//! Iso-lines of a gridded surface by marching squares.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::grid::{GridSurface, SurfaceKind};

/// One polyline at `level`; points are `[tfr, e0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourLine {
    pub level: f64,
    pub points: Vec<[f64; 2]>,
}

impl ContourLine {
    /// Linearly interpolated y where the polyline crosses `x`, taking the
    /// first crossing.
    pub fn y_at_x(&self, x: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let ([x0, y0], [x1, y1]) = (w[0], w[1]);
            if (x0 - x) * (x1 - x) > 0.0 {
                return None;
            }
            if x1 == x0 {
                return Some(y0);
            }
            Some(y0 + (x - x0) / (x1 - x0) * (y1 - y0))
        })
    }
}

/// Cell edges: horizontal `(i, j)` joins `(i, j)`-`(i+1, j)`, vertical joins
/// `(i, j)`-`(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Polylines where the field crosses `level`. `values` is y-major:
/// `values[j * xs.len() + i]` sits at `(xs[i], ys[j])`. Fields with fewer
/// than two points along either axis have no cells and yield nothing.
pub fn march(xs: &[f64], ys: &[f64], values: &[f64], level: f64) -> Vec<Vec<[f64; 2]>> {
    let nx = xs.len();
    let ny = ys.len();
    assert_eq!(values.len(), nx * ny, "field size does not match axes");
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let v = |i: usize, j: usize| values[j * nx + i];
    let above = |i: usize, j: usize| v(i, j) >= level;

    let point = |e: Edge| -> [f64; 2] {
        let ((ia, ja), (ib, jb)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (va, vb) = (v(ia, ja), v(ib, jb));
        let t = (level - va) / (vb - va);
        [
            xs[ia] + t * (xs[ib] - xs[ia]),
            ys[ja] + t * (ys[jb] - ys[ja]),
        ]
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let case = above(i, j) as u8
                | (above(i + 1, j) as u8) << 1
                | (above(i + 1, j + 1) as u8) << 2
                | (above(i, j + 1) as u8) << 3;
            let b = Edge::H(i, j);
            let t = Edge::H(i, j + 1);
            let l = Edge::V(i, j);
            let r = Edge::V(i + 1, j);
            let center_above =
                0.25 * (v(i, j) + v(i + 1, j) + v(i + 1, j + 1) + v(i, j + 1)) >= level;
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((l, b)),
                2 | 13 => segments.push((b, r)),
                3 | 12 => segments.push((l, r)),
                4 | 11 => segments.push((r, t)),
                6 | 9 => segments.push((b, t)),
                7 | 8 => segments.push((l, t)),
                5 if center_above => segments.extend([(b, r), (t, l)]),
                5 => segments.extend([(l, b), (r, t)]),
                10 if center_above => segments.extend([(l, b), (r, t)]),
                10 => segments.extend([(b, r), (t, l)]),
                _ => unreachable!(),
            }
        }
    }
    stitch(&segments)
        .into_iter()
        .map(|edges| edges.into_iter().map(point).collect())
        .collect()
}

/// Joins segments sharing an edge into maximal paths; closed loops repeat
/// their first edge at the end.
fn stitch(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        incident.entry(*a).or_default().push(k);
        incident.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();

    let walk = |start: usize, from: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut path = vec![from];
        let mut seg = start;
        let mut at = from;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            path.push(next);
            at = next;
            match incident[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        path
    };

    // Open paths start at an edge touched by one segment, in segment order.
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (a, b) = segments[k];
        if incident[&a].len() == 1 {
            lines.push(walk(k, a, &mut used));
        } else if incident[&b].len() == 1 {
            lines.push(walk(k, b, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            lines.push(walk(k, segments[k].0, &mut used));
        }
    }
    lines
}

/// Contour lines of one surface quantity. Levels outside the surface's
/// value range are skipped with a warning.
pub fn contour_export(
    surface: &GridSurface,
    kind: SurfaceKind,
    levels: &[f64],
) -> Vec<ContourLine> {
    let values = surface.values(kind);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::new();
    for &level in levels {
        if !(lo <= level && level <= hi) {
            log::warn!("contour level {level} outside surface range [{lo}, {hi}], skipped");
            continue;
        }
        for points in march(&surface.tfr_values, &surface.e0_values, &values, level) {
            out.push(ContourLine { level, points });
        }
    }
    out
}
