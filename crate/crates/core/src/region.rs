//! Bounded spatial regions: unions of intervals on the line, discs and
//! axis-aligned polygons in the plane, and set differences of those.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A straight or circular piece of the boundary of a planar region.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryPiece {
    /// Segment from `start` to `end` with exterior unit normal `normal`.
    Segment {
        start: [f64; 2],
        end: [f64; 2],
        normal: [f64; 2],
    },
    /// Full circle; exterior normal points away from the centre.
    Circle { center: [f64; 2], radius: f64 },
}

/// A bounded domain `Lambda`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Disjoint union of closed intervals `[a_i, b_i]`, sorted.
    Intervals(Vec<(f64, f64)>),
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    /// Simple polygon whose edges are parallel to the axes, vertices in
    /// counter-clockwise order.
    Polygon(Vec<[f64; 2]>),
    /// `outer \ inner` with `inner` contained in `outer`.
    Difference {
        outer: Box<Region>,
        inner: Box<Region>,
    },
}

impl Region {
    /// Validated union of disjoint intervals; touching intervals are
    /// rejected because they would hide boundary points.
    pub fn intervals(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Geometry("interval union needs at least one interval".into()));
        }
        if parts.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::Geometry("intervals must be finite with a < b".into()));
        }
        parts.sort_by(|x, y| x.0.total_cmp(&y.0));
        if parts.windows(2).any(|w| w[1].0 <= w[0].1) {
            return Err(Error::Geometry("intervals must be pairwise disjoint".into()));
        }
        Ok(Self::Intervals(parts))
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::intervals(vec![(a, b)])
    }

    pub fn disc(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Geometry(format!("disc radius must be > 0, got {radius}")));
        }
        Ok(Self::Disc { center, radius })
    }

    /// Validated axis-aligned polygon; clockwise input is reversed.
    pub fn polygon(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::Geometry("polygon needs at least four vertices".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let dx = b[0] - a[0];
            let dy = b[1] - a[1];
            if (dx == 0.0) == (dy == 0.0) {
                return Err(Error::Geometry(format!(
                    "edge {i} is not axis-aligned or has zero length"
                )));
            }
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Ok(Self::Polygon(vertices))
    }

    pub fn difference(outer: Region, inner: Region) -> Result<Self> {
        if outer.dimension() != inner.dimension() {
            return Err(Error::Geometry("difference of regions of different dimension".into()));
        }
        if !inner.is_inside(&outer) {
            return Err(Error::Geometry("inner region must lie inside the outer one".into()));
        }
        Ok(Self::Difference {
            outer: Box::new(outer),
            inner: Box::new(inner),
        })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Intervals(_) => 1,
            Self::Disc { .. } | Self::Polygon(_) => 2,
            Self::Difference { outer, .. } => outer.dimension(),
        }
    }

    /// Lebesgue measure `|Lambda|`.
    pub fn volume(&self) -> f64 {
        match self {
            Self::Intervals(parts) => parts.iter().map(|(a, b)| b - a).sum(),
            Self::Disc { radius, .. } => PI * radius * radius,
            Self::Polygon(v) => signed_area(v),
            Self::Difference { outer, inner } => outer.volume() - inner.volume(),
        }
    }

    /// Boundary measure `|dLambda|`: the number of boundary points on the
    /// line, the perimeter in the plane.
    pub fn boundary_measure(&self) -> f64 {
        match self {
            Self::Intervals(parts) => 2.0 * parts.len() as f64,
            Self::Disc { radius, .. } => 2.0 * PI * radius,
            Self::Polygon(v) => (0..v.len())
                .map(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % v.len()];
                    (b[0] - a[0]).abs() + (b[1] - a[1]).abs()
                })
                .sum(),
            Self::Difference { outer, inner } => outer.boundary_measure() + inner.boundary_measure(),
        }
    }

    /// Membership test (boundary points count as inside for intervals,
    /// discs and polygons).
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Intervals(parts) => parts.iter().any(|&(a, b)| a <= x[0] && x[0] <= b),
            Self::Disc { center, radius } => (x[0] - center[0]).hypot(x[1] - center[1]) <= *radius,
            Self::Polygon(v) => point_in_polygon(v, [x[0], x[1]]),
            Self::Difference { outer, inner } => outer.contains(x) && !inner.contains(x),
        }
    }

    /// Pieces of the boundary of a planar region.
    pub fn boundary_pieces(&self) -> Vec<BoundaryPiece> {
        match self {
            Self::Intervals(_) => Vec::new(),
            Self::Disc { center, radius } => vec![BoundaryPiece::Circle {
                center: *center,
                radius: *radius,
            }],
            Self::Polygon(v) => (0..v.len())
                .map(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % v.len()];
                    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                    BoundaryPiece::Segment {
                        start: a,
                        end: b,
                        normal: [(b[1] - a[1]) / len, -(b[0] - a[0]) / len],
                    }
                })
                .collect(),
            Self::Difference { outer, inner } => {
                let mut pieces = outer.boundary_pieces();
                // the inner boundary is traversed with reversed orientation
                pieces.extend(inner.boundary_pieces().into_iter().map(|p| match p {
                    BoundaryPiece::Segment { start, end, normal } => BoundaryPiece::Segment {
                        start: end,
                        end: start,
                        normal: [-normal[0], -normal[1]],
                    },
                    circle => circle,
                }));
                pieces
            }
        }
    }

    /// Axis-aligned bounding box `(lower, upper)`, one entry per dimension.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Intervals(parts) => (vec![parts[0].0], vec![parts[parts.len() - 1].1]),
            Self::Disc { center, radius } => (
                vec![center[0] - radius, center[1] - radius],
                vec![center[0] + radius, center[1] + radius],
            ),
            Self::Polygon(v) => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for p in v {
                    for k in 0..2 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
            Self::Difference { outer, .. } => outer.bounding_box(),
        }
    }

    /// Whether `self` lies inside `outer` (closed containment).
    pub fn is_inside(&self, outer: &Region) -> bool {
        match (self, outer) {
            (Self::Intervals(inner), Self::Intervals(out)) => {
                inner.iter().all(|&(a, b)| out.iter().any(|&(c, d)| c <= a && b <= d))
            }
            _ => self.boundary_samples(2048).iter().all(|p| outer.contains(p)) && self.dimension() == outer.dimension(),
        }
    }

    /// `dist(self, d outer)`, the distance from this region to the boundary
    /// of `outer`. Exact for intervals, discs and polygons; curved inner
    /// boundaries paired with polygonal outer ones are sampled.
    pub fn distance_to_boundary(&self, outer: &Region) -> f64 {
        match (self, outer) {
            (Self::Intervals(inner), Self::Intervals(out)) => {
                let ends: Vec<f64> = out.iter().flat_map(|&(c, d)| [c, d]).collect();
                inner
                    .iter()
                    .map(|&(a, b)| {
                        // every boundary point of `outer` is either left of,
                        // inside or right of [a, b]
                        ends.iter()
                            .map(|&e| {
                                if e < a {
                                    a - e
                                } else if e > b {
                                    e - b
                                } else {
                                    0.0
                                }
                            })
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            (Self::Disc { center: c1, radius: r1 }, Self::Disc { center: c2, radius: r2 }) => {
                let gap = r2 - (c1[0] - c2[0]).hypot(c1[1] - c2[1]) - r1;
                gap.max(0.0)
            }
            _ => {
                if !self.is_inside(outer) {
                    return 0.0;
                }
                self.boundary_samples(4096)
                    .iter()
                    .map(|p| outer.distance_from_boundary([p[0], p[1]]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Euclidean distance from `x` to the closed region (`0` inside).
    pub fn distance_to_point(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        match self {
            Self::Intervals(parts) => parts
                .iter()
                .map(|&(a, b)| if x[0] < a { a - x[0] } else { x[0] - b })
                .fold(f64::INFINITY, f64::min),
            _ => self.distance_from_boundary([x[0], x[1]]),
        }
    }

    fn distance_from_boundary(&self, p: [f64; 2]) -> f64 {
        self.boundary_pieces()
            .iter()
            .map(|piece| match piece {
                BoundaryPiece::Segment { start, end, .. } => point_segment_distance(p, *start, *end),
                BoundaryPiece::Circle { center, radius } => ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs(),
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn boundary_samples(&self, per_piece: usize) -> Vec<Vec<f64>> {
        match self {
            Self::Intervals(parts) => parts.iter().flat_map(|&(a, b)| [vec![a], vec![b]]).collect(),
            _ => self
                .boundary_pieces()
                .iter()
                .flat_map(|piece| {
                    (0..per_piece).map(move |i| {
                        let s = i as f64 / per_piece as f64;
                        match piece {
                            BoundaryPiece::Segment { start, end, .. } => {
                                vec![start[0] + s * (end[0] - start[0]), start[1] + s * (end[1] - start[1])]
                            }
                            BoundaryPiece::Circle { center, radius } => {
                                let t = 2.0 * PI * s;
                                vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                            }
                        }
                    })
                })
                .collect(),
        }
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    0.5 * (0..v.len())
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    // boundary counts as inside
    for i in 0..n {
        if point_segment_distance(p, v[i], v[(i + 1) % n]) == 0.0 {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}
