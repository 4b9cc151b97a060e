//! Planar geometry helpers shared by the scene graph and the simulator.

use serde::{Deserialize, Serialize};

/// A point in the plane, meters. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Signed area (positive for counter-clockwise vertex order).
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Point2]) -> Point2 {
    let a = signed_area(poly);
    if a.abs() < 1e-12 {
        let n = poly.len() as f64;
        let (sx, sy) = poly.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        return Point2::new(sx / n, sy / n);
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point2::new(cx / (6.0 * a), cy / (6.0 * a))
}

/// Even-odd point-in-polygon test. Points exactly on an edge may land either way.
pub fn contains(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    if len_sq == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0);
    p.distance(&Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Distance from `p` to the nearest polygon edge.
pub fn boundary_distance(poly: &[Point2], p: Point2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Axis-aligned bounding box as `(min, max)`.
pub fn bounds(poly: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

fn orientation(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Proper intersection of two segments (shared endpoints and collinear touching excluded).
fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    const EPS: f64 = 1e-12;
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    ((o1 > EPS && o2 < -EPS) || (o1 < -EPS && o2 > EPS)) && ((o3 > EPS && o4 < -EPS) || (o3 < -EPS && o4 > EPS))
}

/// True when no two non-adjacent edges cross.
pub fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// True when the interiors of two simple polygons overlap. Polygons that only
/// share boundary segments (adjacent rooms) do not overlap.
pub fn interiors_overlap(a: &[Point2], b: &[Point2]) -> bool {
    let (alo, ahi) = bounds(a);
    let (blo, bhi) = bounds(b);
    if ahi.x <= blo.x || bhi.x <= alo.x || ahi.y <= blo.y || bhi.y <= alo.y {
        return false;
    }
    for i in 0..a.len() {
        for j in 0..b.len() {
            if segments_cross(a[i], a[(i + 1) % a.len()], b[j], b[(j + 1) % b.len()]) {
                return true;
            }
        }
    }
    // No proper crossings: nested, identical, only touching, or overlapping
    // along collinear edges. Sample the shared bounding box for a point
    // strictly inside both.
    let lo = Point2::new(alo.x.max(blo.x), alo.y.max(blo.y));
    let hi = Point2::new(ahi.x.min(bhi.x), ahi.y.min(bhi.y));
    const STEPS: usize = 32;
    let strictly_inside = |poly: &[Point2], p: Point2| contains(poly, p) && boundary_distance(poly, p) > 1e-9;
    for j in 0..STEPS {
        for i in 0..STEPS {
            let p = Point2::new(
                lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / STEPS as f64,
                lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / STEPS as f64,
            );
            if strictly_inside(a, p) && strictly_inside(b, p) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Point2> {
        vec![
            Point2::new(x0, y0),
            Point2::new(x0 + s, y0),
            Point2::new(x0 + s, y0 + s),
            Point2::new(x0, y0 + s),
        ]
    }

    #[test]
    fn square_centroid_and_area() {
        let sq = square(0.0, 0.0, 4.0);
        assert_eq!(signed_area(&sq), 16.0);
        assert_eq!(centroid(&sq), Point2::new(2.0, 2.0));
        assert!(contains(&sq, Point2::new(1.0, 3.0)));
        assert!(!contains(&sq, Point2::new(5.0, 3.0)));
        assert!((boundary_distance(&sq, Point2::new(1.0, 2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjacent_squares_do_not_overlap() {
        let a = square(0.0, 0.0, 4.0);
        let b = square(4.0, 0.0, 4.0);
        assert!(!interiors_overlap(&a, &b));
        let c = square(3.0, 1.0, 4.0);
        assert!(interiors_overlap(&a, &c));
        let inner = square(1.0, 1.0, 1.0);
        assert!(interiors_overlap(&a, &inner));
        assert!(interiors_overlap(&a, &a.clone()));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bowtie = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 2.0),
        ];
        assert!(!is_simple(&bowtie));
        assert!(is_simple(&square(0.0, 0.0, 1.0)));
    }
}
