//! Small planar-geometry helpers shared by the T-graph modules.

use num_complex::Complex64;

pub type C = Complex64;

/// Cross product `Im(conj(a) * b)`.
pub fn cross(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Dot product `Re(conj(a) * b)`.
pub fn dot(a: C, b: C) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn dist_point_segment(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (dot(p - a, ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Parameter of the projection of `p` onto the line through `a`, `b`
/// (0 at `a`, 1 at `b`).
pub fn project_param(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    dot(p - a, ab) / dot(ab, ab)
}

/// `p` lies on the open segment `(a, b)` within distance `eps`, staying at
/// least `eps` away from both endpoints.
pub fn strictly_inside_segment(p: C, a: C, b: C, eps: f64) -> bool {
    let len = (b - a).norm();
    if len == 0.0 {
        return false;
    }
    let t = project_param(p, a, b);
    let margin = eps / len;
    t > margin && t < 1.0 - margin && dist_point_segment(p, a, b) <= eps
}

/// Intersection of the ray `o + t d (t >= 0)` with the closed segment `[a, b]`.
/// Returns the smallest such `t` and the hit point.
pub fn ray_segment_intersection(o: C, d: C, a: C, b: C, eps: f64) -> Option<(f64, C)> {
    let ab = b - a;
    let denom = cross(d, ab);
    if denom.abs() < eps * ab.norm() * d.norm() {
        return None; // parallel (collinear overlaps are rejected elsewhere)
    }
    let t = cross(a - o, ab) / denom;
    let u = cross(a - o, d) / denom;
    if t >= -eps && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some((t.max(0.0), o + d * t.max(0.0)))
    } else {
        None
    }
}

/// Proper intersection of open segments `(a1,b1)` and `(a2,b2)`.
pub fn open_segments_intersect(a1: C, b1: C, a2: C, b2: C, eps: f64) -> bool {
    let d1 = b1 - a1;
    let d2 = b2 - a2;
    let denom = cross(d1, d2);
    let scale = d1.norm() * d2.norm();
    if denom.abs() < 1e-14 * scale {
        // parallel: overlap iff collinear and parameter ranges overlap
        if dist_point_segment(a2, a1, b1) > eps && dist_point_segment(b2, a1, b1) > eps {
            return false;
        }
        let (mut t0, mut t1) = (project_param(a2, a1, b1), project_param(b2, a1, b1));
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        let m = eps / d1.norm();
        return t1 > m && t0 < 1.0 - m;
    }
    let t = cross(a2 - a1, d2) / denom;
    let u = cross(a2 - a1, d1) / denom;
    let m1 = eps / d1.norm();
    let m2 = eps / d2.norm();
    t > m1 && t < 1.0 - m1 && u > m2 && u < 1.0 - m2
}

/// Signed area of a polygon (counterclockwise positive).
pub fn polygon_area(poly: &[C]) -> f64 {
    let mut a = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        a += cross(p, q);
    }
    a / 2.0
}

/// A point inside a simple polygon (works for convex and mildly non-convex
/// faces: tries the centroid, then falls back to edge-midpoint offsets).
pub fn representative_point(poly: &[C], eps: f64) -> C {
    let n = poly.len() as f64;
    let centroid = poly.iter().sum::<C>() / n;
    if point_in_polygon(centroid, poly) {
        return centroid;
    }
    let area = polygon_area(poly);
    let orient = if area >= 0.0 { 1.0 } else { -1.0 };
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let mid = (p + q) / 2.0;
        let normal = C::new(0.0, 1.0) * (q - p) / (q - p).norm();
        let cand = mid + normal * orient * eps * 10.0;
        if point_in_polygon(cand, poly) {
            return cand;
        }
    }
    centroid
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: C, poly: &[C]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.im > p.im) != (pj.im > p.im) {
            let x = pi.re + (p.im - pi.im) / (pj.im - pi.im) * (pj.re - pi.re);
            if p.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Winding number of a closed polyline around `p`.
pub fn winding_number(p: C, poly: &[C]) -> i32 {
    let mut total = 0.0;
    for i in 0..poly.len() {
        let a = poly[i] - p;
        let b = poly[(i + 1) % poly.len()] - p;
        total += cross(a, b).atan2(dot(a, b));
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}

/// Total turning angle of an open polyline: the sum of signed exterior angles.
pub fn turning_angle(path: &[C]) -> f64 {
    let mut total = 0.0;
    for i in 1..path.len().saturating_sub(1) {
        let a = path[i] - path[i - 1];
        let b = path[i + 1] - path[i];
        total += cross(a, b).atan2(dot(a, b));
    }
    total
}

/// Interior angle at vertex `v` between incoming direction `din` (pointing at
/// `v`) and outgoing direction `dout` (pointing away), measured inside the
/// face that lies to the left of the traversal. Result in `(0, 2 pi)`.
pub fn interior_angle_left(din: C, dout: C) -> f64 {
    // left-face interior angle = pi - (signed turn)
    let turn = cross(din, dout).atan2(dot(din, dout));
    std::f64::consts::PI - turn
}

/// Uniform grid hash for segment proximity queries.
pub struct SegmentGrid {
    cell: f64,
    min: C,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl SegmentGrid {
    pub fn build(segments: &[(C, C)], cell: f64) -> Self {
        let mut min = C::new(f64::INFINITY, f64::INFINITY);
        let mut max = C::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(a, b) in segments {
            min.re = min.re.min(a.re.min(b.re));
            min.im = min.im.min(a.im.min(b.im));
            max.re = max.re.max(a.re.max(b.re));
            max.im = max.im.max(a.im.max(b.im));
        }
        if !min.re.is_finite() {
            min = C::new(0.0, 0.0);
            max = C::new(1.0, 1.0);
        }
        let cols = (((max.re - min.re) / cell).ceil() as usize + 2).max(1);
        let rows = (((max.im - min.im) / cell).ceil() as usize + 2).max(1);
        let mut grid = SegmentGrid { cell, min, cols, rows, buckets: vec![Vec::new(); cols * rows] };
        for (i, &(a, b)) in segments.iter().enumerate() {
            grid.insert(i, a, b);
        }
        grid
    }

    fn index(&self, x: f64, y: f64) -> (usize, usize) {
        let cx = (((x - self.min.re) / self.cell).floor().max(0.0) as usize).min(self.cols - 1);
        let cy = (((y - self.min.im) / self.cell).floor().max(0.0) as usize).min(self.rows - 1);
        (cx, cy)
    }

    pub fn insert(&mut self, id: usize, a: C, b: C) {
        let (x0, y0) = self.index(a.re.min(b.re), a.im.min(b.im));
        let (x1, y1) = self.index(a.re.max(b.re), a.im.max(b.im));
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                self.buckets[cy * self.cols + cx].push(id);
            }
        }
    }

    /// Candidate segment ids near the box around `[a, b]` inflated by `pad`.
    pub fn query(&self, a: C, b: C, pad: f64) -> Vec<usize> {
        let (x0, y0) = self.index(a.re.min(b.re) - pad, a.im.min(b.im) - pad);
        let (x1, y1) = self.index(a.re.max(b.re) + pad, a.im.max(b.im) + pad);
        let mut out = Vec::new();
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                out.extend_from_slice(&self.buckets[cy * self.cols + cx]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}
